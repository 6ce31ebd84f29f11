"""Lower unitaries to {1-qubit, CX} circuits.

Three routes:

* generic: Givens elimination in Gray-code order, so every two-level factor
  touches basis states one bit apart and becomes a fully controlled
  1-qubit gate;
* qft_family: ``M = P D_r QFT^{+-1} D_c``, optionally with one more QFT on
  the left, emitted as diagonal layers around the O(n^2) QFT network;
* permutation: transpositions, each conjugated down to a single
  multi-controlled X by a CX ladder.

Multi-controlled gates use the ancilla-free Gray-code construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..numeric import ACCUMULATED_TOL, hadamard, is_unitary, num_qubits, root_power
from .gates import Circuit, GateOp, concat, cx, simplify, single

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = hadamard()


class SynthesisHint(str, enum.Enum):
    GENERIC = "generic"
    QFT_FAMILY = "qft_family"
    PERMUTATION = "permutation"

    @classmethod
    def parse(cls, value) -> "SynthesisHint":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).replace("-", "_"))
        except ValueError:
            raise ValueError(f"unknown synthesis hint {value!r}") from None


def phase_gate(theta: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


# --- single- and controlled-qubit building blocks ---------------------------------

def zyz_angles(u: np.ndarray) -> tuple[float, float, float, float]:
    """``(alpha, beta, gamma, delta)`` with ``u = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)``."""
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    alpha = 0.5 * np.angle(det)
    v = u * np.exp(-1j * alpha)  # now in SU(2)
    gamma = 2.0 * np.arctan2(abs(v[1, 0]), abs(v[0, 0]))
    s = np.angle(v[1, 1]) if abs(v[1, 1]) > 1e-12 else 0.0  # (beta + delta) / 2
    d = np.angle(v[1, 0]) if abs(v[1, 0]) > 1e-12 else 0.0  # (beta - delta) / 2
    beta, delta = s + d, s - d
    return float(alpha), float(beta), float(gamma), float(delta)


def controlled_u(control: int, target: int, u: np.ndarray) -> list[GateOp]:
    """Singly controlled ``u``: ``u = e^{ia} A X B X C`` with ``ABC = I``."""
    u = np.asarray(u, dtype=complex)
    if abs(u[0, 1]) < 1e-14 and abs(u[1, 0]) < 1e-14:
        # diagonal: controlled phase pair, 2 CX
        a0, a1 = np.angle(u[0, 0]), np.angle(u[1, 1])
        lam = a1 - a0
        return [
            single(control, phase_gate(a0)),
            single(target, phase_gate(lam / 2)),
            cx(control, target),
            single(target, phase_gate(-lam / 2)),
            cx(control, target),
            single(control, phase_gate(lam / 2)),
        ]
    alpha, beta, gamma, delta = zyz_angles(u)
    a = rz(beta) @ ry(gamma / 2)
    b = ry(-gamma / 2) @ rz(-(delta + beta) / 2)
    c = rz((delta - beta) / 2)
    return [
        single(target, c),
        cx(control, target),
        single(target, b),
        cx(control, target),
        single(target, a),
        single(control, phase_gate(alpha)),
    ]


def unitary_root(u: np.ndarray, power: int) -> np.ndarray:
    """Principal ``u^(1/power)`` of a 2x2 unitary via its Schur form."""
    t, z = scipy.linalg.schur(np.asarray(u, dtype=complex), output="complex")
    eig = np.diagonal(t)
    root = np.exp(1j * np.angle(eig) / power)
    return (z * root) @ z.conj().T


def multi_controlled_u(controls, target: int, u: np.ndarray) -> list[GateOp]:
    """All-ones controlled ``u`` without ancillas (Gray-code ladder).

    Uses ``2^k - 1`` controlled roots ``V = u^(1/2^(k-1))`` and ``2^k - 2`` CX.
    The ladder walks the binary reflected Gray code; the control holding the
    running parity is the highest bit of the current code word, and every
    control is back to its input value at the end.
    """
    controls = list(controls)
    k = len(controls)
    if k == 0:
        return [single(target, u)]
    if k == 1:
        return controlled_u(controls[0], target, u)
    v = unitary_root(u, 2 ** (k - 1))
    v_dag = v.conj().T
    ops: list[GateOp] = []
    prev = 0
    for i in range(1, 2**k):
        g = i ^ (i >> 1)
        hb = g.bit_length() - 1
        if prev:
            p = (g ^ prev).bit_length() - 1
            src = controls[hb - 1] if p == hb else controls[p]
            ops.append(cx(src, controls[hb]))
        ops += controlled_u(controls[hb], target, v if bin(g).count("1") % 2 else v_dag)
        prev = g
    return ops


def controlled_on_values(controls, values, target: int, u: np.ndarray) -> list[GateOp]:
    """``u`` on ``target`` when each control equals its value in ``values``."""
    flips = [single(c, X) for c, v in zip(controls, values) if not v]
    return flips + multi_controlled_u(controls, target, u) + flips


# --- generic route --------------------------------------------------------------

@dataclass(frozen=True)
class TwoLevel:
    """Unitary acting as ``matrix`` on span(e_i, e_j) and as identity elsewhere."""

    i: int
    j: int
    matrix: np.ndarray

    def embed(self, dim: int) -> np.ndarray:
        m = np.eye(dim, dtype=complex)
        m[np.ix_([self.i, self.j], [self.i, self.j])] = self.matrix
        return m


def gray_order(dim: int) -> list[int]:
    return [i ^ (i >> 1) for i in range(dim)]


def _is_identity2(m: np.ndarray, tol: float) -> bool:
    return float(np.max(np.abs(m - np.eye(2)))) < tol


def two_level_decompose(m, order=None, tol: float = ACCUMULATED_TOL) -> list[TwoLevel]:
    """Factor a unitary into two-level unitaries.

    Returns factors in application order: applying them left to right (the
    first factor acts first) reproduces ``m``. Elimination pairs rows that
    are neighbours in ``order`` (default: natural order), so with
    :func:`gray_order` every factor couples states one bit apart. At most
    ``N(N-1)/2`` factors; identity factors are dropped.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("two_level_decompose needs a square matrix")
    if not is_unitary(m, tol):
        raise ValueError("two_level_decompose needs a unitary matrix")
    dim = m.shape[0]
    if dim < 2:
        raise ValueError("two_level_decompose needs dimension >= 2")
    order = list(range(dim)) if order is None else list(order)
    if sorted(order) != list(range(dim)):
        raise ValueError("order must be a permutation of the basis indices")
    a = m[np.ix_(order, order)].copy()
    applied: list[TwoLevel] = []  # G_1, G_2, ... with G_K ... G_1 a = I
    for col in range(dim - 1):
        for r in range(dim - 1, col, -1):
            top, bot = a[r - 1, col], a[r, col]
            last_pair = col == dim - 2
            if abs(bot) < 1e-15 and r > col + 1:
                continue
            nrm = np.hypot(abs(top), abs(bot))
            g = np.array([[np.conj(top), np.conj(bot)], [-bot, top]], dtype=complex) / nrm
            rows = [r - 1, r]
            a[rows] = g @ a[rows]
            if last_pair:
                # fold the final diagonal phase into this factor
                ph = a[r, r]
                fix = np.array([[1, 0], [0, np.conj(ph) / abs(ph)]], dtype=complex)
                g = fix @ g
                a[rows] = fix @ a[rows]
            if not _is_identity2(g, 1e-13):
                applied.append(TwoLevel(order[r - 1], order[r], g))
    # m = G_1^dag G_2^dag ... G_K^dag: application order is G_K^dag first
    return [TwoLevel(f.i, f.j, f.matrix.conj().T) for f in reversed(applied)]


def _two_level_ops(f: TwoLevel, n: int) -> list[GateOp]:
    diff = f.i ^ f.j
    if diff == 0 or diff & (diff - 1):
        raise ValueError("two-level factor does not couple states one bit apart")
    bit = diff.bit_length() - 1
    target = n - 1 - bit
    u = f.matrix if not (f.i >> bit) & 1 else X @ f.matrix @ X
    controls = [q for q in range(n) if q != target]
    values = [(f.i >> (n - 1 - q)) & 1 for q in controls]
    return controlled_on_values(controls, values, target, u)


def synthesize_generic(m) -> Circuit:
    m = np.asarray(m, dtype=complex)
    n = num_qubits(m.shape[0])
    if n == 0:
        return Circuit(1, ())
    factors = two_level_decompose(m, gray_order(m.shape[0]))
    ops: list[GateOp] = []
    for f in factors:
        ops += _two_level_ops(f, n)
    return simplify(Circuit(n, tuple(ops)))


# --- diagonal and permutation routes --------------------------------------------

def diagonal_ops(phases, n: int, tol: float = 1e-12) -> list[GateOp]:
    """Circuit for ``diag(e^{i phases})`` up to global phase (Walsh expansion).

    ``phases_m = sum_S a_S (-1)^{|S & m|}``; each non-empty ``S`` with a
    non-negligible coefficient becomes a parity ladder onto one qubit, an
    ``Rz``-type gate, and the ladder undone. Separable phase patterns only
    produce singleton ``S``, i.e. one gate per qubit.
    """
    phases = np.asarray(phases, dtype=float)
    dim = phases.size
    idx = np.arange(dim)
    # separable modulo 2 pi: one phase gate per qubit (Walsh would see the wraps)
    per_qubit = [phases[1 << (n - 1 - q)] - phases[0] for q in range(n)]
    rebuilt = phases[0] + sum(
        per_qubit[q] * ((idx >> (n - 1 - q)) & 1) for q in range(n)
    )
    if np.max(np.abs(np.exp(1j * rebuilt) - np.exp(1j * phases))) < tol:
        return [single(q, phase_gate(t)) for q, t in enumerate(per_qubit) if abs(np.exp(1j * t) - 1) >= tol]
    ops: list[GateOp] = []
    for mask in range(1, dim):
        signs = 1.0 - 2.0 * (np.array([bin(v & mask).count("1") & 1 for v in idx]))
        coef = float(np.dot(phases, signs)) / dim
        if abs(coef) < tol:
            continue
        qubits = [n - 1 - b for b in range(n) if (mask >> b) & 1]
        tgt = qubits[-1]
        ladder = [cx(q, tgt) for q in qubits[:-1]]
        gate = np.array([[np.exp(1j * coef), 0], [0, np.exp(-1j * coef)]], dtype=complex)
        ops += ladder + [single(tgt, gate)] + ladder[::-1]
    return ops


def _is_permutation(m: np.ndarray, tol: float = 1e-12) -> bool:
    if not np.all((np.abs(m) < tol) | (np.abs(m - 1) < tol)):
        return False
    ones = np.abs(m - 1) < tol
    return bool(np.all(ones.sum(axis=0) == 1) and np.all(ones.sum(axis=1) == 1))


def transposition_ops(a: int, b: int, n: int) -> list[GateOp]:
    """Swap basis states ``a`` and ``b``: CX ladder, one multi-controlled X, ladder undone."""
    diff = a ^ b
    if diff == 0:
        return []
    bits = [bit for bit in range(n) if (diff >> bit) & 1]
    pivot_bit = bits[-1]
    pivot = n - 1 - pivot_bit
    ladder = [cx(pivot, n - 1 - bit) for bit in bits[:-1]]
    # after the ladder the pair differs only on the pivot; the state with pivot 0 is unchanged
    base = a if not (a >> pivot_bit) & 1 else b
    controls = [q for q in range(n) if q != pivot]
    values = [(base >> (n - 1 - q)) & 1 for q in controls]
    return ladder + controlled_on_values(controls, values, pivot, X) + ladder[::-1]


def permutation_transpositions(perm) -> list[tuple[int, int]]:
    """Transpositions in application order whose product is ``perm`` (``perm[j]`` = image of j)."""
    work = list(perm)
    found = []
    for j in range(len(work)):
        while work[j] != j:
            i = work[j]
            # left-compose with (j i): work := (j i) o work
            found.append((j, i))
            work = [j if v == i else i if v == j else v for v in work]
    return found[::-1]


def affine_form(perm) -> tuple[int, int] | None:
    """``(a, b)`` with ``perm[x] = (a x + b) mod len(perm)`` and ``a = +-1``, if one exists."""
    size = len(perm)
    b = int(perm[0])
    for a in (1, -1):
        if all(int(perm[x]) == (a * x + b) % size for x in range(size)):
            return a, b
    return None


def increment_ops(qubits) -> list[GateOp]:
    """``x -> x + 1 mod 2^k`` on ``qubits`` (most significant first): carry cascade of MCX."""
    qubits = list(qubits)
    ops: list[GateOp] = []
    for i in range(len(qubits)):
        ops += multi_controlled_u(qubits[i + 1:], qubits[i], X)
    return ops


def add_constant_ops(c: int, n: int) -> list[GateOp]:
    """``x -> x + c mod 2^n``; subtracts ``2^n - c`` instead when that has fewer set bits."""
    size = 2**n
    c %= size
    flips: list[GateOp] = []
    if bin(size - c).count("1") < bin(c).count("1"):
        # x - d = ~(~x + d)
        c = size - c
        flips = [single(q, X) for q in range(n)]
    ops: list[GateOp] = []
    for bit in range(n):
        if (c >> bit) & 1:
            ops += increment_ops(range(n - bit))
    return flips + ops + flips


def permutation_ops(perm, n: int) -> list[GateOp]:
    """Modular shifts and reflections ``x -> +-x + b`` use adder cascades; others use transpositions."""
    form = affine_form(perm) if n >= 1 else None
    if form is not None:
        a, b = form
        if a == 1:
            return add_constant_ops(b, n)
        # -x + b = ~x + (b + 1)
        return [single(q, X) for q in range(n)] + add_constant_ops(b + 1, n)
    ops: list[GateOp] = []
    for a, b in permutation_transpositions(perm):
        ops += transposition_ops(a, b, n)
    return ops


def synthesize_permutation(m) -> Circuit:
    m = np.asarray(m, dtype=complex)
    n = num_qubits(m.shape[0])
    if not _is_permutation(m):
        raise ValueError("matrix is not a 0/1 permutation matrix")
    perm = [int(np.argmax(np.abs(m[:, j]))) for j in range(m.shape[0])]
    return simplify(Circuit(max(n, 1), tuple(permutation_ops(perm, n))))


# --- QFT family -----------------------------------------------------------------

def qft_matrix(n: int) -> np.ndarray:
    """``QFT[j, m] = w^{jm} / sqrt(2^n)``."""
    dim = 2**n
    j = np.arange(dim)
    return root_power(dim, np.outer(j, j)) / np.sqrt(dim)


def qft_ops(n: int) -> list[GateOp]:
    """Textbook QFT network: H and controlled phases, then bit reversal by swaps."""
    ops: list[GateOp] = []
    for q in range(n):
        ops.append(single(q, H))
        for r in range(q + 1, n):
            theta = 2 * np.pi / 2 ** (r - q + 1)
            ops += controlled_u(r, q, phase_gate(theta))
    for q in range(n // 2):
        a, b = q, n - 1 - q
        ops += [cx(a, b), cx(b, a), cx(a, b)]
    return ops


@dataclass(frozen=True)
class QFTFactorization:
    """``M = [QFT] @ P @ diag(row_phases) @ QFT^{+-1} @ diag(col_phases)``.

    ``perm[j]`` is the image of basis state ``j`` under ``P``; the leading
    QFT is present when ``outer_qft``; ``inverse_inner`` selects QFT^dagger
    for the middle factor.
    """

    perm: tuple[int, ...]
    row_phases: np.ndarray
    col_phases: np.ndarray
    outer_qft: bool = False
    inverse_inner: bool = False

    def cost(self) -> int:
        # rough gate estimate: a moved basis state costs a multi-controlled X,
        # an extra QFT costs a full network, phase layers are cheap
        moved = sum(1 for j, i in enumerate(self.perm) if i != j)
        return (
            100 * moved
            + 60 * self.outer_qft
            + 5 * (_nontrivial(self.row_phases) + _nontrivial(self.col_phases))
        )


def _nontrivial(phases: np.ndarray) -> int:
    return int(float(np.max(np.abs(phases - phases[0]))) > 1e-9)


def _monomial(g: np.ndarray, tol: float):
    mag = np.abs(g)
    big = mag > 0.5
    if not (np.all(big.sum(axis=0) == 1) and np.all(big.sum(axis=1) == 1)):
        return None
    if np.max(np.abs(mag[big] - 1)) > tol or np.max(mag[~big], initial=0.0) > tol:
        return None
    perm = tuple(int(np.argmax(big[:, j])) for j in range(g.shape[0]))
    phases = np.array([g[perm[j], j] for j in range(g.shape[0])])
    return perm, phases


def factor_qft_family(m, tol: float = 1e-9) -> QFTFactorization | None:
    """Cheapest factorization of ``m`` as a QFT sandwich, or ``None``.

    For each placement the column phases are read off one reference row
    (any row works up to a cyclic shift absorbed into ``P``); the remainder
    must be monomial.
    """
    m = np.asarray(m, dtype=complex)
    dim = m.shape[0]
    n = num_qubits(dim)
    q = qft_matrix(n)
    best = None
    for outer in (False, True):
        target = q.conj().T @ m if outer else m
        mag = np.abs(target) * np.sqrt(dim)
        if np.max(np.abs(mag - 1)) > tol:
            continue
        for inverse in (False, True):
            inner_dag = q if inverse else q.conj().T
            for ref in range(dim):
                col = target[ref] / target[ref, 0]
                mono = _monomial(target @ np.diag(col.conj()) @ inner_dag, tol)
                if mono is None:
                    continue
                cand = QFTFactorization(mono[0], mono[1], col, outer, inverse)
                if best is None or cand.cost() < best.cost():
                    best = cand
    return best


def inverse_ops(ops: list[GateOp]) -> list[GateOp]:
    out = []
    for op in reversed(ops):
        out.append(single(op.qubits[0], op.matrix.conj().T) if op.kind == "single" else op)
    return out


def synthesize_qft_family(m) -> Circuit | None:
    m = np.asarray(m, dtype=complex)
    n = num_qubits(m.shape[0])
    fac = factor_qft_family(m)
    if fac is None:
        return None
    ops = diagonal_ops(np.angle(fac.col_phases), n)
    ops += inverse_ops(qft_ops(n)) if fac.inverse_inner else qft_ops(n)
    ops += diagonal_ops(np.angle(fac.row_phases), n)
    ops += permutation_ops(fac.perm, n)
    if fac.outer_qft:
        ops += qft_ops(n)
    return simplify(Circuit(n, tuple(ops)))


# --- entry point ------------------------------------------------------------------

def synthesize(m, hint=SynthesisHint.GENERIC) -> Circuit:
    """Circuit over {1-qubit, CX} implementing ``m`` up to global phase.

    A hint whose structure does not match falls back to the generic route
    and records a warning on the returned circuit.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("synthesize needs a square matrix")
    num_qubits(m.shape[0])
    if m.shape[0] < 2:
        raise ValueError("synthesize needs at least one qubit (dimension >= 2)")
    if not is_unitary(m, ACCUMULATED_TOL):
        raise ValueError("synthesize needs a unitary matrix")
    hint = SynthesisHint.parse(hint)
    if hint is SynthesisHint.QFT_FAMILY:
        c = synthesize_qft_family(m)
        if c is not None:
            return c
        warning = "qft_family structure not found; used generic synthesis"
    elif hint is SynthesisHint.PERMUTATION:
        if _is_permutation(m):
            return synthesize_permutation(m)
        warning = "matrix is not a permutation; used generic synthesis"
    else:
        return synthesize_generic(m)
    c = synthesize_generic(m)
    return Circuit(c.n_qubits, c.ops, c.warnings + (warning,))


def hadamard_layer(n: int) -> list[GateOp]:
    return [single(q, H) for q in range(n)]


def compose(n: int, *parts) -> Circuit:
    return simplify(concat(n, parts))
