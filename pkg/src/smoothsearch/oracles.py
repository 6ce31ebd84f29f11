"""Search operators: collapse gate, cyclic-permutation oracle, unity-sum oracle, Grover.

Marked positions ``s`` and row/column labels in docstrings are 1-based to
match the usual way a sequence position is quoted; arrays are 0-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .numeric import root_power, uniform_state


class DegenerateConstructionError(ValueError):
    """Raised when the unity-sum oracle's normalising column sum vanishes."""


class PermutationConvention(str, enum.Enum):
    ROW_START = "row-start"
    PAPER_RECOVERY = "paper"

    @classmethod
    def parse(cls, value) -> "PermutationConvention":
        if isinstance(value, cls):
            return value
        aliases = {"row-start": cls.ROW_START, "paper": cls.PAPER_RECOVERY,
                   "paper-recovery": cls.PAPER_RECOVERY}
        try:
            return aliases[str(value)]
        except KeyError:
            raise ValueError(f"unknown permutation convention {value!r}") from None


@dataclass(frozen=True)
class MarkedSequence:
    x: tuple[int, ...]

    def __post_init__(self):
        x = tuple(int(v) for v in self.x)
        if not x:
            raise ValueError("sequence must be non-empty")
        if any(v not in (0, 1) for v in x) or sum(x) != 1:
            raise ValueError(f"sequence must contain exactly one 1 and zeros elsewhere, got {x}")
        object.__setattr__(self, "x", x)

    @classmethod
    def marked(cls, n: int, s: int) -> "MarkedSequence":
        if n < 1 or not 1 <= s <= n:
            raise ValueError(f"marked position s={s} outside 1..{n}")
        return cls(tuple(1 if i == s else 0 for i in range(1, n + 1)))

    @property
    def N(self) -> int:
        return len(self.x)

    @property
    def s(self) -> int:
        return self.x.index(1) + 1

    def f(self, k: int) -> int:
        """Grover-style marker: 0 at the marked position, 1 elsewhere."""
        return 0 if k == self.s else 1


def build_U(n: int) -> np.ndarray:
    """Collapse gate, ``U[k, l] = w^{k (l-1)} / sqrt(N)`` (1-based).

    Sends the uniform superposition to the last basis state.
    """
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    k = np.arange(1, n + 1)[:, None]
    l = np.arange(1, n + 1)[None, :]
    return root_power(n, k * (l - 1)) / np.sqrt(n)


def build_F(seq: MarkedSequence, conv=PermutationConvention.ROW_START) -> np.ndarray:
    """Cyclic-permutation oracle.

    Row-start: row ``j`` lists the sequence starting at ``x_j``, so
    ``F[j, l] = x_{((j + l - 2) mod N) + 1}``. Paper-recovery: rows are right
    shifts of ``x``, ``F[j, l] = x_{((l - j) mod N) + 1}``, chosen so the
    last basis state lands on ``N + 1 - s``.
    """
    if not isinstance(seq, MarkedSequence):
        raise ValueError("build_F needs a MarkedSequence")
    conv = PermutationConvention.parse(conv)
    n = seq.N
    x = np.array(seq.x, dtype=complex)
    j = np.arange(n)[:, None]
    l = np.arange(n)[None, :]
    if conv is PermutationConvention.ROW_START:
        return x[(j + l) % n]
    return x[(l - j) % n]


def build_U_tilde(seq: MarkedSequence, return_scalar: bool = False):
    """Unity-sum oracle: the collapse gate with the marked row flattened.

    Rows ``k < N`` keep ``1/sqrt(N)`` and raise only the phase to
    ``f(x_k)``; the last row is ``S^{l-1}/sqrt(N)`` with
    ``S = N^{-1/2} (-sum_{k<N} Ut[k, N])^{-1}``. The result is the collapse
    gate with rows ``s`` and ``N`` exchanged, and ``S = w^s``.
    """
    if not isinstance(seq, MarkedSequence):
        raise ValueError("build_U_tilde needs a MarkedSequence")
    n = seq.N
    rt = np.sqrt(n)
    ut = np.zeros((n, n), dtype=complex)
    l = np.arange(1, n + 1)
    for k in range(1, n):
        ut[k - 1] = root_power(n, k * (l - 1) * seq.f(k)) / rt
    col_sum = np.sum(ut[: n - 1, n - 1])
    if n > 1 and abs(col_sum) < 1e-14:
        raise DegenerateConstructionError("column sum of the unmarked rows vanishes")
    scalar = 1.0 / (rt * -col_sum) if n > 1 else 1.0 + 0j
    ut[n - 1] = scalar ** (l - 1) / rt
    return (ut, complex(scalar)) if return_scalar else ut


def grover_phase_oracle(n: int, s: int) -> np.ndarray:
    if n < 1 or not 1 <= s <= n:
        raise ValueError(f"marked position s={s} outside 1..{n}")
    d = np.ones(n, dtype=complex)
    d[s - 1] = -1.0
    return np.diag(d)


def grover_diffusion(n: int) -> np.ndarray:
    """Inversion about the mean, ``2|psi><psi| - I`` for the uniform ``psi``."""
    if n < 2:
        raise ValueError(f"diffusion needs N >= 2, got {n}")
    psi = uniform_state(n)
    return 2.0 * np.outer(psi, psi.conj()) - np.eye(n)
