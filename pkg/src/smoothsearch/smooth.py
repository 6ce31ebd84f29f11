"""Smooth orthogonal projections and unitaries built from a cyclic family.

The continuum construction lives on L^2(R^N); here it is realised on a finite
tensor grid whose axes are identical, so the cyclic coordinate permutation
``T`` maps grid points to grid points and every operator is a finite matrix
over the flattened point index (C order).

Family members are indexed 1..N in the public API (``j`` arguments) and stored
0-based in ``SmoothFamily.values``: ``values[j - 1, p] == s_j(point p)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .numeric import ACCUMULATED_TOL, root_power


@dataclass(frozen=True)
class DiscretizedDomain:
    n_coords: int
    axis_grid: tuple[float, ...]

    def __post_init__(self):
        if self.n_coords < 1:
            raise ValueError("n_coords must be positive")
        grid = tuple(float(v) for v in self.axis_grid)
        if not grid:
            raise ValueError("axis_grid must be non-empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("axis_grid must be strictly increasing")
        object.__setattr__(self, "axis_grid", grid)

    @property
    def g(self) -> int:
        return len(self.axis_grid)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.g,) * self.n_coords

    @property
    def size(self) -> int:
        return self.g ** self.n_coords

    def points(self) -> list[tuple[int, ...]]:
        """All grid point index tuples in flattened (C) order."""
        return list(itertools.product(range(self.g), repeat=self.n_coords))

    def coordinates(self) -> np.ndarray:
        """Real coordinates of every grid point, shape ``(size, n_coords)``."""
        axis = np.asarray(self.axis_grid)
        return axis[np.array(self.points())]

    def flat(self, p: tuple[int, ...]) -> int:
        return int(np.ravel_multi_index(tuple(p), self.shape))

    def unflat(self, index: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(index, self.shape))

    @cached_property
    def shift_tables(self) -> np.ndarray:
        """``shift_tables[tau, p]`` is the flat index of ``T**tau`` applied to point ``p``."""
        pts = np.array(self.points()).reshape(self.size, self.n_coords)
        tables = []
        for tau in range(self.n_coords):
            moved = np.roll(pts, -tau, axis=1)
            tables.append(np.ravel_multi_index(moved.T, self.shape))
        return np.array(tables)


def cyclic_permute(p, tau: int) -> tuple:
    """Apply ``T**tau``: output coordinate ``c`` is input coordinate ``(c + tau) mod N``."""
    p = tuple(p)
    n = len(p)
    if n == 0:
        return p
    tau %= n
    return p[tau:] + p[:tau]


@dataclass(frozen=True)
class SmoothFamily:
    """Cyclic family ``s_j = s_1(T**(j-1) .)`` sampled on a grid.

    ``values`` has shape ``(N, domain.size)``. Use :meth:`from_s1` so the
    family structure holds by construction.
    """

    domain: DiscretizedDomain
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.domain.n_coords, self.domain.size):
            raise ValueError(
                f"values must have shape {(self.domain.n_coords, self.domain.size)}, got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("family values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_s1(cls, domain: DiscretizedDomain, s1) -> "SmoothFamily":
        s1 = np.asarray(s1, dtype=complex).reshape(domain.size)
        shifts = domain.shift_tables
        return cls(domain, np.stack([s1[shifts[j]] for j in range(domain.n_coords)]))

    @property
    def N(self) -> int:
        return self.domain.n_coords

    def member(self, j: int) -> np.ndarray:
        _check_member(j, self.N)
        return self.values[j - 1]

    def at(self, point) -> np.ndarray:
        """The vector ``(s_1(x), ..., s_N(x))`` at a grid point (tuple or flat index)."""
        idx = point if isinstance(point, (int, np.integer)) else self.domain.flat(point)
        return self.values[:, idx]

    def structure_residual(self) -> float:
        """Max over points and j of ``|s_{j+1}(x) - s_j(T x)|`` (indices mod N)."""
        shift = self.domain.shift_tables[1 % self.N]
        worst = 0.0
        for j in range(self.N):
            nxt = self.values[(j + 1) % self.N]
            worst = max(worst, float(np.max(np.abs(nxt - self.values[j][shift]))))
        return worst


def _check_member(j: int, n: int) -> None:
    if not 1 <= j <= n:
        raise ValueError(f"member index j={j} outside 1..{n}")


# --- family builders ----------------------------------------------------------

def constant_family(domain: DiscretizedDomain, phase: complex = 1.0) -> SmoothFamily:
    """``s_j = phase / sqrt(N)`` everywhere."""
    n = domain.n_coords
    return SmoothFamily.from_s1(domain, np.full(domain.size, phase / np.sqrt(n), dtype=complex))


def orbit_normalized_family(domain: DiscretizedDomain, raw_s1) -> SmoothFamily:
    """Scale ``raw_s1`` on each T-orbit so the partition of unity holds.

    ``sum_j |s_j(x)|^2`` runs over the orbit of ``x``, so dividing by the
    orbit's root-sum-square enforces it exactly. Zero orbits become uniform.
    """
    raw = np.asarray(raw_s1, dtype=complex).reshape(domain.size).copy()
    shifts = domain.shift_tables
    orbit_mass = np.zeros(domain.size)
    for tau in range(domain.n_coords):
        orbit_mass += np.abs(raw[shifts[tau]]) ** 2
    dead = orbit_mass < 1e-300
    raw[dead] = 1.0
    orbit_mass[dead] = domain.n_coords
    return SmoothFamily.from_s1(domain, raw / np.sqrt(orbit_mass))


def indicator_family(domain: DiscretizedDomain) -> SmoothFamily:
    """Indicator family of the cone partition ``U_j = {x : argmax coordinate is j}``.

    ``s_1`` is 1 on the points that are the lexicographic maximum of their
    cyclic rotations, which for tie-free points is exactly "largest
    coordinate comes first" and breaks ties consistently along each orbit.
    Points fixed by ``T`` (all coordinates equal) get ``1/sqrt(N)`` in every
    member, the only value compatible with both the family structure and the
    partition of unity there.
    """
    n = domain.n_coords
    s1 = np.zeros(domain.size, dtype=complex)
    for idx, p in enumerate(domain.points()):
        rotations = [cyclic_permute(p, t) for t in range(n)]
        if all(r == p for r in rotations):
            s1[idx] = 1.0 / np.sqrt(n)
        elif p == max(rotations):
            s1[idx] = 1.0
    return SmoothFamily.from_s1(domain, s1)


def random_real_family(domain: DiscretizedDomain, rng: np.random.Generator) -> SmoothFamily:
    return orbit_normalized_family(domain, rng.standard_normal(domain.size))


def random_complex_family(domain: DiscretizedDomain, rng: np.random.Generator) -> SmoothFamily:
    raw = rng.standard_normal(domain.size) + 1j * rng.standard_normal(domain.size)
    return orbit_normalized_family(domain, raw)


def smooth_step(t) -> np.ndarray:
    """C-infinity step ``e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})`` clamped to [0, 1]."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def cone_angle(coords: np.ndarray, transition_width: float) -> np.ndarray:
    """Ramp angle in [0, pi/2] for 2-D points; swapping the coordinates maps beta to pi/2 - beta."""
    x1, x2 = coords[:, 0], coords[:, 1]
    scale = np.abs(x1) + np.abs(x2)
    u = np.divide(x2 - x1, scale, out=np.zeros_like(scale), where=scale > 0)
    t = (u + transition_width) / (2.0 * transition_width)
    return 0.5 * np.pi * smooth_step(t)


def smooth_cone_profile(domain: DiscretizedDomain, transition_width: float) -> SmoothFamily:
    """Smoothed indicator of the two cones ``{x1 > x2}`` and ``{x2 > x1}`` in 2-D.

    ``s1 = cos(beta)``, ``s2 = sin(beta)``; beta is 0 deep inside the first
    cone, pi/2 deep inside the second, and ramps through the smooth step on
    the band ``|x2 - x1| < width * (|x1| + |x2|)``.
    """
    if domain.n_coords != 2:
        raise ValueError("smooth_cone_profile needs a 2-coordinate domain")
    if not 0.0 < transition_width < 1.0:
        raise ValueError(f"transition_width must lie in (0, 1), got {transition_width}")
    beta = cone_angle(domain.coordinates(), transition_width)
    return SmoothFamily.from_s1(domain, np.cos(beta))


# --- checks -------------------------------------------------------------------

def partition_deviation(fam: SmoothFamily) -> np.ndarray:
    """Per-point ``|sum_j |s_j|^2 - 1|``."""
    return np.abs(np.sum(np.abs(fam.values) ** 2, axis=0) - 1.0)


def check_partition(fam: SmoothFamily, tol: float = ACCUMULATED_TOL) -> tuple[bool, float]:
    dev = float(np.max(partition_deviation(fam)))
    return dev < tol, dev


def delta_residuals(fam: SmoothFamily, sign: int = 1) -> np.ndarray:
    """``r[tau, p] = |sum_j w^{sign*tau*j} conj(s_j) s_{j+tau} - delta_{tau,0}|``."""
    n = fam.N
    s = fam.values
    out = np.empty((n, fam.domain.size))
    j1 = np.arange(1, n + 1)
    for tau in range(n):
        phase = root_power(n, sign * tau * j1)[:, None]
        shifted = s[(j1 - 1 + tau) % n]
        total = np.sum(phase * s.conj() * shifted, axis=0)
        out[tau] = np.abs(total - (1.0 if tau == 0 else 0.0))
    return out


def check_delta_condition(
    fam: SmoothFamily, tol: float = ACCUMULATED_TOL, sign: int = 1
) -> tuple[bool, tuple[int, tuple[int, ...], float]]:
    """Check the shift-orthogonality condition at every point.

    Returns ``(ok, (tau, point, residual))`` for the worst offender. ``sign=-1``
    checks the conjugate-phase variant.
    """
    res = delta_residuals(fam, sign)
    tau, p = np.unravel_index(int(np.argmax(res)), res.shape)
    worst = float(res[tau, p])
    return worst < tol, (int(tau), fam.domain.unflat(int(p)), worst)


# --- operators ------------------------------------------------------------------

def analysis_operator(fam: SmoothFamily, j: int) -> np.ndarray:
    """Matrix of ``f -> N^{-1/2} conj(s_j) sum_tau w^{tau j} f(T^tau .)``."""
    _check_member(j, fam.N)
    n, size = fam.N, fam.domain.size
    sj = fam.values[j - 1]
    rows = np.arange(size)
    mat = np.zeros((size, size), dtype=complex)
    for tau in range(n):
        np.add.at(mat, (rows, fam.domain.shift_tables[tau]), sj.conj() * root_power(n, tau * j))
    return mat / np.sqrt(n)


def projection(fam: SmoothFamily, j: int, phase: str = "analysis") -> np.ndarray:
    """Matrix of ``P_j f(x) = conj(s_j(x)) sum_tau c_tau s_j(T^tau x) f(T^tau x)``.

    ``phase="analysis"`` uses ``c_tau = w^{tau j}``, which makes ``P_j`` equal
    to ``V_j V_j^dagger`` for :func:`analysis_operator`. ``phase="conjugate"``
    uses ``conj(w^{tau j})``; it is still an orthogonal projection but equals
    ``V_{N-j} V_{N-j}^dagger`` when the family is constant.
    """
    _check_member(j, fam.N)
    if phase not in ("analysis", "conjugate"):
        raise ValueError(f"unknown phase convention {phase!r}")
    sign = 1 if phase == "analysis" else -1
    n, size = fam.N, fam.domain.size
    sj = fam.values[j - 1]
    rows = np.arange(size)
    mat = np.zeros((size, size), dtype=complex)
    for tau in range(n):
        cols = fam.domain.shift_tables[tau]
        np.add.at(mat, (rows, cols), sj.conj() * root_power(n, sign * tau * j) * sj[cols])
    return mat


def smooth_unitary(fam: SmoothFamily, point, tol: float = ACCUMULATED_TOL) -> np.ndarray:
    """N x N unitary at one grid point: ``U[j, k] = s_{j+k-1}(x) w^{j(k-1)}`` (1-based, index mod N).

    Column orthonormality of this matrix is exactly the shift-orthogonality
    condition at ``x``; for ``s_j = 1/sqrt(N)`` it is the collapse gate and
    for real 2-member families it is the rotation ``[[s1, -s2], [s2, s1]]``.
    """
    s = fam.at(point)
    n = fam.N
    part = abs(float(np.sum(np.abs(s) ** 2)) - 1.0)
    if part >= tol:
        raise ValueError(f"partition of unity violated at {point}: |sum|s_j|^2 - 1| = {part:.3e}")
    j = np.arange(1, n + 1)[:, None]
    k = np.arange(1, n + 1)[None, :]
    mat = s[(j + k - 2) % n] * root_power(n, j * (k - 1))
    gram = np.max(np.abs(mat.conj().T @ mat - np.eye(n)))
    if gram >= tol:
        raise ValueError(
            f"shift-orthogonality violated at {point}: unitarity defect {gram:.3e}"
        )
    return mat


def rotation_2d(s1: float, s2: float, tol: float = ACCUMULATED_TOL) -> np.ndarray:
    if abs(s1 * s1 + s2 * s2 - 1.0) >= tol:
        raise ValueError(f"s1^2 + s2^2 must be 1, got {s1 * s1 + s2 * s2!r}")
    return np.array([[s1, -s2], [s2, s1]], dtype=complex)
