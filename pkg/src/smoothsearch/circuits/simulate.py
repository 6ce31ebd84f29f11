"""Statevector and density-matrix simulation with depolarizing gate noise."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from ..numeric import bitstring, pauli_matrices
from .gates import CX, Circuit, GateOp


def _apply(tensor: np.ndarray, mat: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Contract ``mat`` (2^k x 2^k) into the given axes of a rank-r tensor of 2s."""
    k = len(axes)
    gate = mat.reshape((2,) * (2 * k))
    moved = np.tensordot(gate, tensor, axes=(tuple(range(k, 2 * k)), axes))
    return np.moveaxis(moved, tuple(range(k)), axes)


def _check_qubits(op: GateOp, n: int) -> None:
    if any(q >= n for q in op.qubits):
        raise ValueError(f"gate on qubits {op.qubits} outside a {n}-qubit register")


def apply_gate(state, op: GateOp) -> np.ndarray:
    """Apply one gate to a statevector of length 2^n (qubit 0 is the leading bit)."""
    state = np.asarray(state, dtype=complex)
    n = state.size.bit_length() - 1
    _check_qubits(op, n)
    t = _apply(state.reshape((2,) * n), op.unitary(), op.qubits)
    return t.reshape(-1)


def zero_state(n_qubits: int) -> np.ndarray:
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def simulate_statevector(c: Circuit, initial=None) -> np.ndarray:
    psi = zero_state(c.n_qubits) if initial is None else np.asarray(initial, dtype=complex)
    t = psi.reshape((2,) * c.n_qubits)
    for op in c.ops:
        _check_qubits(op, c.n_qubits)
        t = _apply(t, op.unitary(), op.qubits)
    return t.reshape(-1)


def circuit_unitary(c: Circuit) -> np.ndarray:
    """The 2^n x 2^n matrix the circuit implements."""
    n = c.n_qubits
    dim = 2**n
    # columns carried as a trailing axis
    t = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for op in c.ops:
        t = _apply(t, op.unitary(), op.qubits)
    return t.reshape(dim, dim)


# --- density matrices ---------------------------------------------------------

def _rho_tensor(rho: np.ndarray) -> tuple[np.ndarray, int]:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    return rho.reshape((2,) * (2 * n)), n


def apply_gate_density(rho, op: GateOp) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    t, n = _rho_tensor(rho)
    _check_qubits(op, n)
    u = op.unitary()
    t = _apply(t, u, op.qubits)
    t = _apply(t, u.conj(), tuple(n + q for q in op.qubits))
    return t.reshape(rho.shape)


def depolarize(rho, qubits, p: float) -> np.ndarray:
    """Depolarizing channel on one or two qubits.

    ``(1-p) rho + p/(4^k - 1) * sum_P P rho P`` over the non-identity Paulis
    on ``k`` qubits, evaluated through the equivalent replacement form
    ``(1 - lam) rho + lam * (I/2^k (x) tr_q rho)`` with ``lam = 4^k p / (4^k - 1)``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must lie in [0, 1], got {p}")
    qubits = tuple(int(q) for q in qubits)
    if len(qubits) not in (1, 2) or len(set(qubits)) != len(qubits):
        raise ValueError("depolarize acts on one or two distinct qubits")
    rho = np.asarray(rho, dtype=complex)
    if p == 0.0:
        return rho.copy()
    t, n = _rho_tensor(rho)
    if any(q >= n or q < 0 for q in qubits):
        raise ValueError(f"qubits {qubits} outside a {n}-qubit register")
    k = len(qubits)
    d = 2**k
    lam = d * d * p / (d * d - 1)
    axes = qubits + tuple(n + q for q in qubits)
    front = np.moveaxis(t, axes, tuple(range(2 * k)))
    block = front.reshape((d, d) + front.shape[2 * k:])
    reduced = np.trace(block, axis1=0, axis2=1) / d
    out = (1.0 - lam) * block
    for i in range(d):
        out[i, i] += lam * reduced
    out = np.moveaxis(out.reshape(front.shape), tuple(range(2 * k)), axes)
    return out.reshape(rho.shape)


def depolarize_pauli_sum(rho, qubits, p: float) -> np.ndarray:
    """Reference evaluation of :func:`depolarize` as an explicit Pauli sum."""
    rho = np.asarray(rho, dtype=complex)
    n = rho.shape[0].bit_length() - 1
    paulis = pauli_matrices()
    labels = "IXYZ"
    k = len(qubits)
    out = np.zeros_like(rho)
    for combo in itertools.product(labels, repeat=k):
        full = [paulis["I"]] * n
        for q, lab in zip(qubits, combo):
            full[q] = paulis[lab]
        op = full[0]
        for f in full[1:]:
            op = np.kron(op, f)
        weight = (1 - p) if set(combo) == {"I"} else p / (4**k - 1)
        out += weight * (op @ rho @ op.conj().T)
    return out


class NoiseScope(str, enum.Enum):
    FIRST_N = "first-n"
    ALL = "all"

    @classmethod
    def parse(cls, value) -> "NoiseScope":
        if isinstance(value, cls):
            return value
        aliases = {"first-n": cls.FIRST_N, "first_n": cls.FIRST_N, "all": cls.ALL,
                   "all_gates": cls.ALL, "all-gates": cls.ALL}
        try:
            return aliases[str(value)]
        except KeyError:
            raise ValueError(f"unknown noise scope {value!r}") from None


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    scope: NoiseScope = NoiseScope.ALL
    n: int = 0

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.n < 0:
            raise ValueError("noisy gate count must be non-negative")
        object.__setattr__(self, "scope", NoiseScope.parse(self.scope))

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls(0.0, 0.0, NoiseScope.ALL, 0)

    def flags(self, c: Circuit) -> list[bool]:
        if self.scope is NoiseScope.ALL:
            return [True] * len(c.ops)
        return [i < self.n for i in range(len(c.ops))]

    def apply_scope(self, c: Circuit) -> Circuit:
        return c.with_noise_flags(self.flags(c))


@dataclass(frozen=True)
class ShotResult:
    counts: dict[str, int]
    shots: int
    seed: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts must sum to shots")

    def frequency(self, bits: str) -> float:
        return self.counts.get(bits, 0) / self.shots


def evolve_density(c: Circuit, nm: NoiseModel | None = None) -> np.ndarray:
    """Density matrix after running ``c`` from |0...0>; noise follows the op flags.

    When ``nm`` is given its scope rule sets the flags first.
    """
    if nm is not None:
        c = nm.apply_scope(c)
        p1, p2 = nm.p1, nm.p2
    else:
        p1 = p2 = 0.0
    n = c.n_qubits
    dim = 2**n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    for op in c.ops:
        rho = apply_gate_density(rho, op)
        if op.noisy:
            p = p2 if op.kind == CX else p1
            if p > 0.0:
                rho = depolarize(rho, op.qubits, p)
    return rho


def diagonal_probabilities(rho: np.ndarray) -> np.ndarray:
    probs = np.clip(np.real(np.diagonal(rho)), 0.0, None)
    return probs / probs.sum()


def sample_counts(probs, shots: int, rng: np.random.Generator, n_qubits: int) -> dict[str, int]:
    """Seeded sample of ``shots`` outcomes, keyed by bitstring (only observed outcomes).

    Inverse-CDF sampling over categories ordered by decreasing probability
    (ties by index). Two distributions sampled with the same generator state
    share their uniforms, so a category holding equal probability in both
    receives the same count, and a larger probability never receives fewer.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.asarray(probs, dtype=float)
    order = sorted(range(probs.size), key=lambda i: (-round(float(probs[i]), 12), i))
    cdf = np.cumsum(probs[order])
    cdf /= cdf[-1]
    picks = np.searchsorted(cdf, rng.random(shots), side="right")
    drawn = np.bincount(np.minimum(picks, probs.size - 1), minlength=probs.size)
    counts = {bitstring(order[i], n_qubits): int(k) for i, k in enumerate(drawn) if k}
    return dict(sorted(counts.items()))


def run_noisy(c: Circuit, nm: NoiseModel, shots: int, seed: int) -> ShotResult:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = diagonal_probabilities(evolve_density(c, nm))
    rng = np.random.default_rng(seed)
    return ShotResult(sample_counts(probs, shots, rng, c.n_qubits), shots, seed)
