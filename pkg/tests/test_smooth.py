import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothsearch.numeric import is_unitary, root_power
from smoothsearch.oracles import build_U
from smoothsearch.smooth import (
    DiscretizedDomain,
    SmoothFamily,
    analysis_operator,
    check_delta_condition,
    check_partition,
    constant_family,
    cyclic_permute,
    indicator_family,
    projection,
    random_complex_family,
    random_real_family,
    rotation_2d,
    smooth_cone_profile,
    smooth_step,
    smooth_unitary,
)


def grid(n, g=5, lo=-1.0, hi=1.0):
    return DiscretizedDomain(n, tuple(np.linspace(lo, hi, g)))


def brute_force_projection(fam, j, sign=1):
    """Entry-by-entry evaluation of the projection through tuple rotations."""
    dom = fam.domain
    n = fam.N
    s = {p: fam.at(p) for p in dom.points()}
    mat = np.zeros((dom.size, dom.size), dtype=complex)
    for p in dom.points():
        for tau in range(n):
            q = cyclic_permute(p, tau)
            coef = np.conj(s[p][j - 1]) * np.exp(sign * 2j * np.pi * tau * j / n) * s[q][j - 1]
            mat[dom.flat(p), dom.flat(q)] += coef
    return mat


# --- domain and permutation ---------------------------------------------------

def test_cyclic_permute_examples():
    assert cyclic_permute(("a", "b", "c"), 1) == ("b", "c", "a")
    assert cyclic_permute((1, 2, 3), 3) == (1, 2, 3)
    assert cyclic_permute(cyclic_permute((1, 2, 3), -1), 1) == (1, 2, 3)


@given(st.lists(st.integers(0, 9), min_size=1, max_size=6), st.integers(-20, 20))
def test_cyclic_permute_has_order_n(p, tau):
    p = tuple(p)
    assert cyclic_permute(cyclic_permute(p, tau), -tau) == p
    assert cyclic_permute(p, len(p)) == p


def test_domain_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        DiscretizedDomain(2, (0.0, 0.0, 1.0))


def test_shift_tables_match_cyclic_permute():
    dom = grid(3, 4)
    for tau in range(3):
        for p in dom.points():
            assert dom.shift_tables[tau, dom.flat(p)] == dom.flat(cyclic_permute(p, tau))


def test_family_structure_holds_by_construction():
    fam = random_complex_family(grid(3), np.random.default_rng(0))
    assert fam.structure_residual() < 1e-15


# --- partition and shift-orthogonality -----------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_constant_family_passes_both_checks(n):
    fam = constant_family(grid(n, 3))
    ok, dev = check_partition(fam)
    assert ok and dev < 1e-15
    assert check_delta_condition(fam)[0]


@pytest.mark.parametrize("n", [2, 3])
def test_indicator_family_passes_both_checks(n):
    fam = indicator_family(grid(n, 6))
    assert check_partition(fam)[0]
    assert check_delta_condition(fam)[0]


def test_indicator_family_is_argmax_on_tie_free_points():
    dom = grid(3, 6)
    fam = indicator_family(dom)
    for p in dom.points():
        if len(set(p)) == 3:
            expected = np.zeros(3)
            expected[int(np.argmax(p))] = 1.0
            np.testing.assert_array_equal(fam.at(p).real, expected)


def test_partition_fails_for_unnormalised_family():
    dom = grid(2, 3)
    fam = SmoothFamily.from_s1(dom, np.ones(dom.size))
    ok, dev = check_partition(fam)
    assert not ok
    assert abs(dev - 1.0) < 1e-15


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_every_real_two_member_family_satisfies_delta(seed):
    fam = random_real_family(grid(2, 6), np.random.default_rng(seed))
    assert check_partition(fam)[0]
    assert check_delta_condition(fam)[0]


def test_random_complex_three_member_family_breaks_delta():
    fam = random_complex_family(grid(3, 4), np.random.default_rng(5))
    assert check_partition(fam)[0]
    ok, (tau, point, residual) = check_delta_condition(fam)
    assert not ok
    assert tau != 0 and residual > 1e-3
    assert len(point) == 3


# --- analysis operator and projections --------------------------------------------

def test_analysis_operator_constant_n2_examples():
    dom = grid(2, 4)
    fam = constant_family(dom)
    rng = np.random.default_rng(1)
    f = rng.standard_normal(dom.size)
    tf = f[dom.shift_tables[1]]
    np.testing.assert_allclose(analysis_operator(fam, 2) @ f, (f + tf) / 2, atol=1e-15)
    sym = f + tf
    np.testing.assert_allclose(analysis_operator(fam, 1) @ sym, 0, atol=1e-15)
    np.testing.assert_array_equal(analysis_operator(fam, 1) @ np.zeros(dom.size), 0)


def test_projection_constant_n2_examples():
    dom = grid(2, 4)
    fam = constant_family(dom)
    f = np.random.default_rng(2).standard_normal(dom.size)
    tf = f[dom.shift_tables[1]]
    np.testing.assert_allclose(projection(fam, 1) @ f, (f - tf) / 2, atol=1e-15)
    np.testing.assert_allclose(projection(fam, 2) @ f, (f + tf) / 2, atol=1e-15)
    np.testing.assert_allclose(projection(fam, 1) @ (f + tf), 0, atol=1e-15)


@pytest.mark.parametrize("builder", ["constant", "indicator", "random_complex"])
@pytest.mark.parametrize("sign,phase", [(1, "analysis"), (-1, "conjugate")])
def test_projection_matches_brute_force(builder, sign, phase):
    dom = grid(3, 4)
    fam = {
        "constant": lambda: constant_family(dom),
        "indicator": lambda: indicator_family(dom),
        "random_complex": lambda: random_complex_family(dom, np.random.default_rng(9)),
    }[builder]()
    for j in (1, 2, 3):
        np.testing.assert_allclose(projection(fam, j, phase), brute_force_projection(fam, j, sign), atol=1e-14)


@pytest.mark.parametrize("phase", ["analysis", "conjugate"])
def test_projection_is_orthogonal_for_any_normalised_family(phase):
    fam = random_complex_family(grid(3, 4), np.random.default_rng(4))
    for j in (1, 2, 3):
        p = projection(fam, j, phase)
        assert np.max(np.abs(p @ p - p)) < 1e-10
        assert np.max(np.abs(p - p.conj().T)) < 1e-10


def test_analysis_phase_projection_equals_v_vdagger():
    fam = constant_family(grid(3, 3))
    for j in (1, 2, 3):
        v = analysis_operator(fam, j)
        np.testing.assert_allclose(projection(fam, j), v @ v.conj().T, atol=1e-14)


def test_conjugate_phase_projection_pairs_with_mirrored_member():
    # The conjugate-phase form picks out the V_{N-j} range for a constant family.
    fam = constant_family(grid(3, 3))
    for j in (1, 2):
        v = analysis_operator(fam, 3 - j)
        np.testing.assert_allclose(projection(fam, j, "conjugate"), v @ v.conj().T, atol=1e-14)


def test_member_index_range_checked():
    fam = constant_family(grid(2, 3))
    for bad in (0, 3):
        with pytest.raises(ValueError):
            projection(fam, bad)
        with pytest.raises(ValueError):
            analysis_operator(fam, bad)


# --- pointwise unitaries -------------------------------------------------------------

@pytest.mark.parametrize("n", range(2, 17))
def test_smooth_unitary_of_constant_family_is_collapse_gate(n):
    fam = constant_family(DiscretizedDomain(n, (0.0,)))
    assert np.max(np.abs(smooth_unitary(fam, (0,) * n) - build_U(n))) < 1e-12


def test_smooth_unitary_two_member_real_family_is_rotation():
    dom = DiscretizedDomain(2, (0.0, 1.0))
    s1 = np.array([1.0, 0.6, 0.8, 1 / np.sqrt(2)])
    fam = SmoothFamily.from_s1(dom, s1)
    np.testing.assert_allclose(smooth_unitary(fam, (0, 1)), [[0.6, -0.8], [0.8, 0.6]], atol=1e-15)
    np.testing.assert_allclose(smooth_unitary(fam, (1, 0)), [[0.8, -0.6], [0.6, 0.8]], atol=1e-15)


def test_smooth_unitary_degenerate_member_is_identity():
    dom = DiscretizedDomain(2, (0.0, 1.0))
    fam = SmoothFamily.from_s1(dom, [1.0, 1.0, 0.0, 1 / np.sqrt(2)])
    np.testing.assert_allclose(smooth_unitary(fam, (0, 1)), np.eye(2), atol=1e-15)


def test_smooth_unitary_rejects_partition_violation():
    dom = grid(2, 3)
    fam = SmoothFamily.from_s1(dom, np.ones(dom.size))
    with pytest.raises(ValueError, match="partition"):
        smooth_unitary(fam, (0, 0))


def test_smooth_unitary_rejects_shift_orthogonality_violation():
    fam = random_complex_family(grid(3, 4), np.random.default_rng(5))
    _, (_, point, _) = check_delta_condition(fam)
    with pytest.raises(ValueError, match="shift-orthogonality"):
        smooth_unitary(fam, point)


def test_rotation_2d_examples():
    np.testing.assert_array_equal(rotation_2d(1.0, 0.0), np.eye(2))
    r = rotation_2d(1 / np.sqrt(2), 1 / np.sqrt(2))
    assert np.max(np.abs(r @ r.conj().T - np.eye(2))) < 1e-12
    m = rotation_2d(0.6, 0.8)
    assert abs(np.vdot(m[:, 0], m[:, 1])) < 1e-15
    assert is_unitary(m, 1e-12)
    with pytest.raises(ValueError):
        rotation_2d(1.0, 1.0)


@given(st.floats(0, 2 * np.pi))
def test_rotation_2d_inverse(theta):
    c, s = np.cos(theta), np.sin(theta)
    np.testing.assert_allclose(rotation_2d(c, s) @ rotation_2d(c, -s), np.eye(2), atol=1e-12)


# --- smooth cone ------------------------------------------------------------------

def test_smooth_step_endpoints_and_symmetry():
    np.testing.assert_array_equal(smooth_step([-1.0, 0.0, 1.0, 2.0]), [0.0, 0.0, 1.0, 1.0])
    t = np.linspace(0.01, 0.99, 25)
    np.testing.assert_allclose(smooth_step(t) + smooth_step(1 - t), 1.0, atol=1e-15)


def test_smooth_cone_plateaus_and_checks():
    dom = DiscretizedDomain(2, tuple(np.linspace(-1, 1, 8)))
    fam = smooth_cone_profile(dom, 0.3)
    deep1 = (7, 0)  # x1 = 1, x2 = -1
    deep2 = (0, 7)
    np.testing.assert_allclose(fam.at(deep1), [1, 0], atol=1e-15)
    np.testing.assert_allclose(fam.at(deep2), [0, 1], atol=1e-15)
    assert np.max(np.abs(np.sum(np.abs(fam.values) ** 2, axis=0) - 1)) < 1e-12
    assert check_partition(fam)[0]
    assert check_delta_condition(fam)[0]


@pytest.mark.parametrize("width", [0.0, 1.0, -0.2, 1.5])
def test_smooth_cone_rejects_width(width):
    with pytest.raises(ValueError):
        smooth_cone_profile(grid(2), width)


def test_smooth_cone_needs_two_coordinates():
    with pytest.raises(ValueError):
        smooth_cone_profile(grid(3), 0.3)


def test_root_power_phase_convention():
    # w^{tau j} with w = e^{2 pi i / N}
    assert abs(root_power(3, 1) - np.exp(2j * np.pi / 3)) < 1e-15
