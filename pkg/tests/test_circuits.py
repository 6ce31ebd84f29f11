import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothsearch.circuits.gates import (
    CX,
    Circuit,
    GateOp,
    cx,
    dumps_circuit,
    gate_census,
    loads_circuit,
    simplify,
    single,
)
from smoothsearch.circuits.simulate import (
    NoiseModel,
    NoiseScope,
    ShotResult,
    apply_gate,
    circuit_unitary,
    depolarize,
    depolarize_pauli_sum,
    diagonal_probabilities,
    evolve_density,
    run_noisy,
    sample_counts,
    simulate_statevector,
    zero_state,
)
from smoothsearch.circuits.synthesis import (
    H,
    X,
    Z,
    SynthesisHint,
    affine_form,
    diagonal_ops,
    factor_qft_family,
    multi_controlled_u,
    qft_matrix,
    qft_ops,
    synthesize,
    two_level_decompose,
)
from smoothsearch.numeric import (
    bitstring,
    global_phase_distance,
    kron,
    pauli_matrices,
    random_unitary,
)
from smoothsearch.oracles import MarkedSequence, build_F, build_U, build_U_tilde


def random_density(dim, rng):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# --- gates and text form -----------------------------------------------------------

def test_gate_validation():
    with pytest.raises(ValueError):
        single(0, np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        cx(1, 1)
    with pytest.raises(ValueError):
        Circuit(2, (cx(0, 2),))


def test_gate_census_examples():
    assert gate_census(Circuit(2)) == {"single": 0, "cx": 0, "total": 0}
    assert gate_census(Circuit(2, (cx(0, 1),))) == {"single": 0, "cx": 1, "total": 1}


def test_circuit_text_round_trip_bit_exact():
    rng = np.random.default_rng(7)
    ops = []
    for i in range(20):
        if i % 3 == 0:
            ops.append(GateOp(CX, (i % 3, (i + 1) % 3), noisy=i % 2 == 0))
        else:
            ops.append(GateOp("single", (i % 3,), random_unitary(2, rng), noisy=i % 4 == 1))
    c = Circuit(3, tuple(ops))
    text = dumps_circuit(c)
    assert text.startswith("circuit 3\n")
    back = loads_circuit(text)
    assert back.ops == c.ops
    assert dumps_circuit(back) == text
    assert any(line.endswith(" !") for line in text.splitlines())


@pytest.mark.parametrize("bad", ["", "circ 2", "circuit 2\nCZ 0 1", "circuit 2\nU1 0 1 0 0"])
def test_circuit_text_rejects_malformed(bad):
    with pytest.raises(ValueError):
        loads_circuit(bad)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_simplify_preserves_unitary(seed):
    rng = np.random.default_rng(seed)
    ops = []
    for _ in range(25):
        if rng.random() < 0.4:
            a, b = rng.choice(3, 2, replace=False)
            ops.append(cx(a, b))
        else:
            m = [H, X, Z, random_unitary(2, rng)][rng.integers(4)]
            ops.append(single(int(rng.integers(3)), m))
    c = Circuit(3, tuple(ops))
    s = simplify(c)
    assert len(s) <= len(c)
    assert global_phase_distance(circuit_unitary(s), circuit_unitary(c)) < 1e-10


def test_simplify_cancels_pairs():
    c = Circuit(2, (cx(0, 1), cx(0, 1), single(0, H), single(0, H)))
    assert len(simplify(c)) == 0


# --- pure-state simulation -----------------------------------------------------------

def test_apply_gate_examples():
    plus = apply_gate(zero_state(1), single(0, H))
    np.testing.assert_allclose(plus, [1 / np.sqrt(2)] * 2, atol=1e-15)
    ket10 = np.zeros(4, dtype=complex)
    ket10[2] = 1
    out = apply_gate(ket10, cx(0, 1))
    assert bitstring(int(np.argmax(np.abs(out))), 2) == "11"
    out = apply_gate(zero_state(2), single(1, X))
    assert bitstring(int(np.argmax(np.abs(out))), 2) == "01"
    with pytest.raises(ValueError):
        apply_gate(zero_state(2), single(2, X))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_statevector_matches_kron_embedding(seed):
    rng = np.random.default_rng(seed)
    u0, u2 = random_unitary(2, rng), random_unitary(2, rng)
    c = Circuit(3, (single(0, u0), single(2, u2), cx(0, 1)))
    cxm = kron(np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]), np.eye(2))
    expected = cxm @ kron(u0, np.eye(2), u2)
    np.testing.assert_allclose(circuit_unitary(c), expected, atol=1e-14)
    psi = simulate_statevector(c)
    assert abs(np.linalg.norm(psi) - 1) < 1e-10
    np.testing.assert_allclose(psi, expected[:, 0], atol=1e-14)


# --- depolarizing channel ---------------------------------------------------------

def test_depolarize_p_zero_is_identity():
    rho = random_density(4, np.random.default_rng(0))
    np.testing.assert_array_equal(depolarize(rho, [1], 0.0), rho)


@pytest.mark.parametrize("p", [0.0, 0.001, 0.1, 0.5, 1.0])
def test_depolarize_ground_state_fidelity(p):
    rho = np.diag([1.0, 0.0]).astype(complex)
    out = depolarize(rho, [0], p)
    assert abs(out[0, 0].real - (1 - 2 * p / 3)) < 1e-12


def test_depolarize_full_strength_reduces_purity():
    rho = np.diag([1.0, 0.0]).astype(complex)
    out = depolarize(rho, [0], 1.0)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.trace(out @ out).real < np.trace(rho @ rho).real
    np.testing.assert_allclose(np.diag(out).real, [1 / 3, 2 / 3], atol=1e-15)


@pytest.mark.parametrize("qubits", [(0,), (2,), (0, 1), (2, 0), (1, 2)])
def test_depolarize_matches_pauli_sum(qubits):
    rng = np.random.default_rng(len(qubits) * 10 + qubits[0])
    rho = random_density(8, rng)
    for p in (0.001, 0.3, 1.0):
        np.testing.assert_allclose(depolarize(rho, qubits, p), depolarize_pauli_sum(rho, qubits, p), atol=1e-14)


@given(st.integers(0, 2**32 - 1), st.floats(0, 1), st.sampled_from([(0,), (1,), (0, 1), (1, 0)]))
@settings(max_examples=60, deadline=None)
def test_depolarize_keeps_density_properties(seed, p, qubits):
    rho = random_density(4, np.random.default_rng(seed))
    out = depolarize(rho, qubits, p)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.max(np.abs(out - out.conj().T)) < 1e-12
    assert np.min(np.linalg.eigvalsh(out)) > -1e-8


def test_depolarize_argument_checks():
    rho = np.eye(4, dtype=complex) / 4
    with pytest.raises(ValueError):
        depolarize(rho, [0], 1.5)
    with pytest.raises(ValueError):
        depolarize(rho, [0, 0], 0.1)
    with pytest.raises(ValueError):
        depolarize(rho, [0, 1, 0], 0.1)


# --- noisy execution --------------------------------------------------------------

def qcpa_demo_circuit():
    return simplify(Circuit(2, tuple([single(0, H), single(1, H)]))
                    + synthesize(build_U(4), "qft_family")
                    + synthesize(build_F(MarkedSequence((0, 1, 0, 0))), "permutation"))


def test_noiseless_run_puts_all_shots_on_expected_state():
    res = run_noisy(qcpa_demo_circuit(), NoiseModel.noiseless(), 1000, 3)
    assert res.counts == {"10": 1000}


def test_first_n_zero_equals_noiseless():
    c = qcpa_demo_circuit()
    a = run_noisy(c, NoiseModel(0.001, 0.001, "first-n", 0), 4000, 9)
    b = run_noisy(c, NoiseModel.noiseless(), 4000, 9)
    assert a.counts == b.counts


def test_density_matches_pure_statevector():
    c = synthesize(random_unitary(8, np.random.default_rng(2)), "generic")
    probs = diagonal_probabilities(evolve_density(c))
    np.testing.assert_allclose(probs, np.abs(simulate_statevector(c)) ** 2, atol=1e-8)


def test_noise_scope_flags():
    c = Circuit(2, (single(0, H), cx(0, 1), single(1, H), cx(1, 0)))
    assert NoiseModel(0.1, 0.1, "first-n", 2).flags(c) == [True, True, False, False]
    assert NoiseModel(0.1, 0.1, "all").flags(c) == [True] * 4
    assert NoiseScope.parse("all_gates") is NoiseScope.ALL
    with pytest.raises(ValueError):
        NoiseModel(1.5, 0.0)
    with pytest.raises(ValueError):
        NoiseScope.parse("some")


def test_noise_lowers_success_probability():
    c = qcpa_demo_circuit()
    clean = diagonal_probabilities(evolve_density(c))[2]
    noisy = diagonal_probabilities(evolve_density(c, NoiseModel(0.01, 0.01, "all")))[2]
    assert clean > 1 - 1e-12
    assert noisy < clean


def test_run_noisy_is_deterministic():
    c = qcpa_demo_circuit()
    nm = NoiseModel(0.05, 0.05, "all")
    assert run_noisy(c, nm, 5000, 42).counts == run_noisy(c, nm, 5000, 42).counts
    res = run_noisy(c, nm, 5000, 42)
    assert sum(res.counts.values()) == 5000


def test_shot_result_validates_sum():
    with pytest.raises(ValueError):
        ShotResult({"0": 3}, 4, 0)


def test_sampling_monte_carlo_consistency():
    probs = np.array([0.55, 0.2, 0.15, 0.06, 0.03, 0.01, 0.0, 0.0])
    shots = 10000
    ok = 0
    for seed in range(20):
        counts = sample_counts(probs, shots, np.random.default_rng(seed), 3)
        freq = np.array([counts.get(bitstring(i, 3), 0) for i in range(8)]) / shots
        se = np.sqrt(probs * (1 - probs) / shots)
        ok += bool(np.all(np.abs(freq - probs) <= 4 * se + 1e-12))
    assert ok >= 19


def test_shared_uniforms_preserve_probability_order():
    a = np.array([0.9, 0.05, 0.05, 0.0])
    b = np.array([0.05, 0.05, 0.0, 0.9])
    ca = sample_counts(a, 2000, np.random.default_rng(1), 2)
    cb = sample_counts(b, 2000, np.random.default_rng(1), 2)
    assert ca["00"] == cb["11"]
    better = np.array([0.92, 0.04, 0.04, 0.0])
    cc = sample_counts(better, 2000, np.random.default_rng(1), 2)
    assert cc["00"] >= ca["00"]


# --- synthesis --------------------------------------------------------------------

def test_two_level_single_factor_for_2x2():
    u = random_unitary(2, np.random.default_rng(1))
    factors = two_level_decompose(u)
    assert len(factors) == 1
    np.testing.assert_allclose(factors[0].embed(2), u, atol=1e-14)


def test_two_level_identity_is_empty():
    assert two_level_decompose(np.eye(8)) == []
    assert len(synthesize(np.eye(8), "generic")) == 0


@pytest.mark.parametrize("dim", [2, 3, 4, 8, 16])
def test_two_level_reconstructs(dim):
    u = random_unitary(dim, np.random.default_rng(dim))
    factors = two_level_decompose(u)
    assert len(factors) <= dim * (dim - 1) // 2
    prod = np.eye(dim, dtype=complex)
    for f in factors:
        block = f.embed(dim)
        assert np.count_nonzero(np.abs(block - np.eye(dim)) > 1e-14) <= 4
        prod = block @ prod
    assert np.max(np.abs(prod - u)) < 1e-8


def test_two_level_collapse_gate_n4():
    factors = two_level_decompose(build_U(4))
    prod = np.eye(4, dtype=complex)
    for f in factors:
        prod = f.embed(4) @ prod
    assert np.max(np.abs(prod - build_U(4))) < 1e-8


def test_two_level_rejects_non_unitary():
    with pytest.raises(ValueError):
        two_level_decompose(np.diag([1.0, 2.0]))


@pytest.mark.parametrize("dim", [2, 4, 8])
def test_generic_synthesis_random_unitaries(dim):
    rng = np.random.default_rng(100 + dim)
    for _ in range(10):
        u = random_unitary(dim, rng)
        c = synthesize(u, SynthesisHint.GENERIC)
        assert global_phase_distance(circuit_unitary(c), u) < 1e-8


def test_synthesis_rejects_bad_input():
    with pytest.raises(ValueError):
        synthesize(np.eye(3))
    with pytest.raises(ValueError):
        synthesize(np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        synthesize(np.eye(4), "magic")


def test_qft_network_matches_matrix():
    for n in (1, 2, 3, 4):
        c = Circuit(n, tuple(qft_ops(n)))
        assert global_phase_distance(circuit_unitary(c), qft_matrix(n)) < 1e-12


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_collapse_gate_phase_identity(n):
    # w^{jk} = w * w^{j-1} * w^{k-1} * w^{(j-1)(k-1)} for 1-based j, k
    w = np.exp(2j * np.pi / n)
    j = np.arange(1, n + 1)[:, None]
    k = np.arange(1, n + 1)[None, :]
    lhs = w ** (j * k)
    rhs = w * w ** (j - 1) * w ** (k - 1) * w ** ((j - 1) * (k - 1))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_qft_family_synthesis_of_search_operators(n):
    dim = 2**n
    mats = [build_U(dim)]
    for s in sorted({1, 2, dim // 2 + 1, dim}):
        seq = MarkedSequence.marked(dim, s)
        mats += [build_U_tilde(seq), build_F(seq, "row-start"), build_F(seq, "paper")]
    for m in mats:
        c = synthesize(m, "qft_family")
        assert not c.warnings
        assert global_phase_distance(circuit_unitary(c), m) < 1e-8


def test_qft_family_recognises_collapse_gate():
    fac = factor_qft_family(build_U(8))
    assert fac is not None


def test_qft_family_hint_mismatch_falls_back_with_warning():
    u = random_unitary(4, np.random.default_rng(12))
    c = synthesize(u, "qft_family")
    assert c.warnings
    assert global_phase_distance(circuit_unitary(c), u) < 1e-8
    c = synthesize(u, "permutation")
    assert c.warnings and "permutation" in c.warnings[0]


@pytest.mark.parametrize("conv", ["row-start", "paper"])
def test_permutation_synthesis_is_exact(conv):
    for n in (1, 2, 3, 4):
        dim = 2**n
        for s in range(1, dim + 1):
            f = build_F(MarkedSequence.marked(dim, s), conv)
            c = synthesize(f, "permutation")
            induced = circuit_unitary(c)
            np.testing.assert_array_equal(np.round(np.abs(induced)), f.real)
            assert np.max(np.abs(induced - f)) < 1e-12


def test_permutation_synthesis_arbitrary_permutation():
    rng = np.random.default_rng(8)
    for dim in (4, 8):
        for _ in range(5):
            perm = rng.permutation(dim)
            m = np.zeros((dim, dim))
            m[perm, np.arange(dim)] = 1
            assert np.max(np.abs(circuit_unitary(synthesize(m, "permutation")) - m)) < 1e-12


def test_affine_form_detection():
    assert affine_form([3, 4, 5, 6, 7, 0, 1, 2]) == (1, 3)
    assert affine_form([1, 0, 3, 2]) == (-1, 1)
    assert affine_form([0, 2, 1, 3]) is None
    assert affine_form([2, 1, 0, 3]) == (-1, 2)


@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_multi_controlled_u(k):
    n = k + 1
    u = random_unitary(2, np.random.default_rng(k))
    c = Circuit(n, tuple(multi_controlled_u(range(k), k, u)))
    expected = np.eye(2**n, dtype=complex)
    expected[-2:, -2:] = u
    assert np.max(np.abs(circuit_unitary(c) - expected)) < 1e-10
    if k >= 2:
        assert gate_census(c)["cx"] <= 2 * (2**k - 1) + 2**k - 2


def test_diagonal_ops():
    rng = np.random.default_rng(4)
    phases = rng.uniform(-np.pi, np.pi, 8)
    c = Circuit(3, tuple(diagonal_ops(phases, 3)))
    assert global_phase_distance(circuit_unitary(c), np.diag(np.exp(1j * phases))) < 1e-12
    separable = np.array([a + b for a in (0, 2.5) for b in (0, -1.0)])
    assert len(diagonal_ops(separable, 2)) == 2


def test_synthesis_of_pauli_on_one_qubit():
    for name, m in pauli_matrices().items():
        c = synthesize(m, "generic")
        assert global_phase_distance(circuit_unitary(c), m) < 1e-12
