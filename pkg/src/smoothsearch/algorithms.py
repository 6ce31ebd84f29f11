"""QCPA, QUSA and Grover pipelines at matrix level and circuit level."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuits.gates import Circuit, concat, simplify, single
from .circuits.simulate import simulate_statevector
from .circuits.synthesis import (
    SynthesisHint,
    X,
    Z,
    hadamard_layer,
    multi_controlled_u,
    synthesize,
)
from .numeric import bitstring, num_qubits, uniform_state
from .oracles import (
    MarkedSequence,
    PermutationConvention,
    build_F,
    build_U,
    build_U_tilde,
    grover_diffusion,
    grover_phase_oracle,
)


class Mode(str, enum.Enum):
    MATRIX = "matrix"
    CIRCUIT = "circuit"


@dataclass(frozen=True)
class SearchOutcome:
    measured_index_j: int  # 1-based
    recovered_s: int
    distribution: np.ndarray
    mode: Mode

    @property
    def success_probability(self) -> float:
        return float(self.distribution[self.measured_index_j - 1])

    def bitstring(self) -> str:
        return bitstring(self.measured_index_j - 1, num_qubits(self.distribution.size))


def recover_qcpa(j: int, n: int, conv=PermutationConvention.ROW_START) -> int:
    """Marked position from the measured 1-based index ``j``."""
    conv = PermutationConvention.parse(conv)
    if not 1 <= j <= n:
        raise ValueError(f"measured index j={j} outside 1..{n}")
    if conv is PermutationConvention.PAPER_RECOVERY:
        return n + 1 - j
    return ((j - 2) % n) + 1


def qcpa_measured_index(s: int, n: int, conv=PermutationConvention.ROW_START) -> int:
    """Inverse of :func:`recover_qcpa`: where QCPA's point mass lands for marked ``s``."""
    conv = PermutationConvention.parse(conv)
    if conv is PermutationConvention.PAPER_RECOVERY:
        return n + 1 - s
    return (s % n) + 1


def _probabilities(amplitudes: np.ndarray) -> np.ndarray:
    p = np.abs(amplitudes) ** 2
    return p / p.sum()


def _require_power_of_two(n: int) -> int:
    try:
        return num_qubits(n)
    except ValueError:
        raise ValueError(f"circuit mode needs N to be a power of two, got {n}") from None


def _outcome(dist: np.ndarray, recover, mode: Mode) -> SearchOutcome:
    j = int(np.argmax(dist)) + 1
    return SearchOutcome(j, recover(j), dist, mode)


# --- circuits -------------------------------------------------------------------

@lru_cache(maxsize=None)
def _synth_cached(kind: str, key: tuple, hint: str) -> Circuit:
    if kind == "U":
        return synthesize(build_U(key[0]), hint)
    if kind == "Ut":
        return synthesize(build_U_tilde(MarkedSequence(key)), hint)
    if kind.startswith("F:"):
        return synthesize(build_F(MarkedSequence(key), kind[2:]), hint)
    raise KeyError(kind)


def qcpa_circuit(
    seq: MarkedSequence,
    conv=PermutationConvention.ROW_START,
    u_hint=SynthesisHint.QFT_FAMILY,
    f_hint=SynthesisHint.QFT_FAMILY,
) -> Circuit:
    """Hadamard layer, collapse gate, permutation oracle; simplified."""
    conv = PermutationConvention.parse(conv)
    n = _require_power_of_two(seq.N)
    u = _synth_cached("U", (seq.N,), SynthesisHint.parse(u_hint).value)
    f = _synth_cached("F:" + conv.value, seq.x, SynthesisHint.parse(f_hint).value)
    return simplify(concat(n, [hadamard_layer(n), u, f]))


def qusa_circuit(seq: MarkedSequence, hint=SynthesisHint.QFT_FAMILY) -> Circuit:
    n = _require_power_of_two(seq.N)
    ut = _synth_cached("Ut", seq.x, SynthesisHint.parse(hint).value)
    return simplify(concat(n, [hadamard_layer(n), ut]))


def grover_oracle_ops(n: int, s: int) -> list:
    """Phase flip on basis state ``s - 1``: X-conjugated multi-controlled Z."""
    flips = [single(q, X) for q in range(n) if not ((s - 1) >> (n - 1 - q)) & 1]
    return flips + multi_controlled_u(range(n - 1), n - 1, Z) + flips


def grover_diffusion_ops(n: int) -> list:
    """``-(2|psi><psi| - I)``; the sign is a global phase."""
    h = hadamard_layer(n)
    xs = [single(q, X) for q in range(n)]
    return h + xs + multi_controlled_u(range(n - 1), n - 1, Z) + xs + h


def grover_circuit(n_states: int, s: int, k: int | None = None) -> Circuit:
    n = _require_power_of_two(n_states)
    if not 1 <= s <= n_states:
        raise ValueError(f"marked position s={s} outside 1..{n_states}")
    k = grover_iterations(n_states) if k is None else k
    ops = list(hadamard_layer(n))
    for _ in range(k):
        ops += grover_oracle_ops(n, s) + grover_diffusion_ops(n)
    return simplify(Circuit(n, tuple(ops)))


# --- pipelines ------------------------------------------------------------------

def run_qcpa(seq: MarkedSequence, conv=PermutationConvention.ROW_START, mode=Mode.MATRIX) -> SearchOutcome:
    conv = PermutationConvention.parse(conv)
    mode = Mode(mode)
    n = seq.N
    if mode is Mode.MATRIX:
        amps = build_F(seq, conv) @ (build_U(n) @ uniform_state(n))
    else:
        amps = simulate_statevector(qcpa_circuit(seq, conv))
    return _outcome(_probabilities(amps), lambda j: recover_qcpa(j, n, conv), mode)


def run_qusa(seq: MarkedSequence, mode=Mode.MATRIX) -> SearchOutcome:
    mode = Mode(mode)
    n = seq.N
    if mode is Mode.MATRIX:
        amps = build_U_tilde(seq) @ uniform_state(n)
    else:
        amps = simulate_statevector(qusa_circuit(seq))
    return _outcome(_probabilities(amps), lambda j: j, mode)


def grover_iterations(n: int) -> int:
    if n < 2:
        raise ValueError(f"Grover needs N >= 2, got {n}")
    return int(np.floor(np.pi / 4 * np.sqrt(n)))


def grover_success_closed_form(n: int, k: int) -> float:
    theta = np.arcsin(1 / np.sqrt(n))
    return float(np.sin((2 * k + 1) * theta) ** 2)


def run_grover(n: int, s: int, k: int | None = None, mode=Mode.MATRIX) -> SearchOutcome:
    mode = Mode(mode)
    if n < 2:
        raise ValueError(f"Grover needs N >= 2, got {n}")
    if not 1 <= s <= n:
        raise ValueError(f"marked position s={s} outside 1..{n}")
    k = grover_iterations(n) if k is None else k
    if k < 0:
        raise ValueError("iteration count must be non-negative")
    if mode is Mode.MATRIX:
        step = grover_diffusion(n) @ grover_phase_oracle(n, s)
        amps = np.linalg.matrix_power(step, k) @ uniform_state(n)
    else:
        amps = simulate_statevector(grover_circuit(n, s, k))
    return _outcome(_probabilities(amps), lambda j: j, mode)


# --- recovery used by shot-based experiments --------------------------------------

def expected_index(algorithm: str, s: int, n: int, conv=PermutationConvention.ROW_START) -> int:
    """0-based basis index whose measurement recovers ``s``."""
    if algorithm == "qcpa":
        return qcpa_measured_index(s, n, conv) - 1
    if algorithm in ("qusa", "grover"):
        return s - 1
    raise ValueError(f"unknown algorithm {algorithm!r}")


def build_circuit(
    algorithm: str,
    n_states: int,
    s: int,
    conv=PermutationConvention.ROW_START,
    grover_k: int | None = None,
    hint_u=SynthesisHint.QFT_FAMILY,
    hint_f=SynthesisHint.QFT_FAMILY,
    hint_ut=SynthesisHint.QFT_FAMILY,
) -> Circuit:
    seq = MarkedSequence.marked(n_states, s)
    if algorithm == "qcpa":
        return qcpa_circuit(seq, conv, hint_u, hint_f)
    if algorithm == "qusa":
        return qusa_circuit(seq, hint_ut)
    if algorithm == "grover":
        return grover_circuit(n_states, s, grover_k)
    raise ValueError(f"unknown algorithm {algorithm!r}")
