"""Gate lists over {arbitrary 1-qubit unitary, CX}."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from ..numeric import ACCUMULATED_TOL, is_unitary

SINGLE = "single"
CX = "cx"


@dataclass(frozen=True, eq=False)
class GateOp:
    kind: str
    qubits: tuple[int, ...]
    matrix: np.ndarray | None = field(default=None, repr=False)
    noisy: bool = False

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if self.kind == SINGLE:
            if len(qubits) != 1:
                raise ValueError("single-qubit gate takes exactly one qubit")
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (2, 2) or not is_unitary(m, ACCUMULATED_TOL):
                raise ValueError("single-qubit gate matrix must be a 2x2 unitary")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        elif self.kind == CX:
            if len(qubits) != 2 or qubits[0] == qubits[1]:
                raise ValueError("CX needs distinct control and target")
            object.__setattr__(self, "matrix", None)
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if any(q < 0 for q in qubits):
            raise ValueError("qubit indices must be non-negative")

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def unitary(self) -> np.ndarray:
        if self.kind == SINGLE:
            return self.matrix
        return CX_MATRIX

    def __eq__(self, other):
        if not isinstance(other, GateOp):
            return NotImplemented
        if (self.kind, self.qubits, self.noisy) != (other.kind, other.qubits, other.noisy):
            return False
        if self.kind == SINGLE:
            return bool(np.array_equal(self.matrix, other.matrix))
        return True

    def __hash__(self):
        return hash((self.kind, self.qubits, self.noisy))


CX_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CX_MATRIX.setflags(write=False)


def single(q: int, matrix) -> GateOp:
    return GateOp(SINGLE, (q,), matrix)


def cx(control: int, target: int) -> GateOp:
    return GateOp(CX, (control, target))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[GateOp, ...] = ()
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        ops = tuple(self.ops)
        for op in ops:
            if any(q >= self.n_qubits for q in op.qubits):
                raise ValueError(f"gate on qubits {op.qubits} exceeds {self.n_qubits} qubits")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __len__(self) -> int:
        return len(self.ops)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits of different width")
        return Circuit(self.n_qubits, self.ops + other.ops, self.warnings + other.warnings)

    def with_noise_flags(self, flags: Sequence[bool]) -> "Circuit":
        if len(flags) != len(self.ops):
            raise ValueError("one flag per op required")
        ops = tuple(replace(op, noisy=bool(f)) for op, f in zip(self.ops, flags))
        return Circuit(self.n_qubits, ops, self.warnings)


def gate_census(c: Circuit) -> dict[str, int]:
    n_single = sum(1 for op in c.ops if op.kind == SINGLE)
    n_cx = sum(1 for op in c.ops if op.kind == CX)
    return {"single": n_single, "cx": n_cx, "total": n_single + n_cx}


# --- text format --------------------------------------------------------------

def dumps_circuit(c: Circuit) -> str:
    lines = [f"circuit {c.n_qubits}"]
    for op in c.ops:
        if op.kind == SINGLE:
            vals = []
            for z in op.matrix.reshape(-1):
                vals += [repr(float(z.real)), repr(float(z.imag))]
            line = f"U1 {op.qubits[0]} " + " ".join(vals)
        else:
            line = f"CX {op.qubits[0]} {op.qubits[1]}"
        lines.append(line + (" !" if op.noisy else ""))
    return "\n".join(lines) + "\n"


def loads_circuit(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty circuit text")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "circuit":
        raise ValueError("circuit text must start with 'circuit NQUBITS'")
    n = int(head[1])
    ops = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        noisy = parts[-1] == "!"
        if noisy:
            parts = parts[:-1]
        elif parts[-1].endswith("!"):
            noisy = True
            parts[-1] = parts[-1][:-1]
        if parts[0] == "U1" and len(parts) == 10:
            vals = [float(v) for v in parts[2:]]
            m = np.array([complex(vals[i], vals[i + 1]) for i in range(0, 8, 2)]).reshape(2, 2)
            ops.append(GateOp(SINGLE, (int(parts[1]),), m, noisy))
        elif parts[0] == "CX" and len(parts) == 3:
            ops.append(GateOp(CX, (int(parts[1]), int(parts[2])), None, noisy))
        else:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")
    return Circuit(n, tuple(ops))


# --- peephole -----------------------------------------------------------------

def _is_phase_identity(m: np.ndarray, tol: float = 1e-12) -> bool:
    return abs(m[0, 1]) < tol and abs(m[1, 0]) < tol and abs(m[0, 0] - m[1, 1]) < tol


def simplify(c: Circuit) -> Circuit:
    """Merge runs of 1-qubit gates, drop phase-only identities, cancel CX pairs.

    The induced unitary is preserved up to global phase. Noise flags are
    discarded, since merged gates no longer correspond one-to-one.
    """
    out: list[GateOp | None] = []
    stacks: list[list[int]] = [[] for _ in range(c.n_qubits)]

    def top(q):
        while stacks[q] and out[stacks[q][-1]] is None:
            stacks[q].pop()
        return stacks[q][-1] if stacks[q] else None

    for op in c.ops:
        if op.kind == SINGLE:
            q = op.qubits[0]
            t = top(q)
            if t is not None and out[t].kind == SINGLE:
                merged = op.matrix @ out[t].matrix
                if _is_phase_identity(merged):
                    out[t] = None
                    stacks[q].pop()
                else:
                    out[t] = single(q, merged)
                continue
            if _is_phase_identity(op.matrix):
                continue
            out.append(single(q, op.matrix))
            stacks[q].append(len(out) - 1)
        else:
            ctl, tgt = op.qubits
            a, b = top(ctl), top(tgt)
            if a is not None and a == b and out[a].kind == CX and out[a].qubits == (ctl, tgt):
                out[a] = None
                stacks[ctl].pop()
                stacks[tgt].pop()
                continue
            out.append(cx(ctl, tgt))
            stacks[ctl].append(len(out) - 1)
            stacks[tgt].append(len(out) - 1)
    return Circuit(c.n_qubits, tuple(op for op in out if op is not None), c.warnings)


def concat(n_qubits: int, parts: Iterable[Circuit | Sequence[GateOp]]) -> Circuit:
    ops: list[GateOp] = []
    warnings: list[str] = []
    for part in parts:
        if isinstance(part, Circuit):
            ops.extend(part.ops)
            warnings.extend(part.warnings)
        else:
            ops.extend(part)
    return Circuit(n_qubits, tuple(ops), tuple(warnings))
