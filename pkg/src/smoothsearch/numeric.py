"""Dense complex linear algebra shared by the rest of the package.

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
Paper-style formulas index from 1; everything here indexes from 0, and the
shift is made explicit wherever a 1-based quantity crosses into an array.

Basis index ``m`` of an ``n``-qubit register renders as the ``n``-bit
binary string of ``m`` with the most significant bit first, so qubit 0 is
the leftmost character and ``kron(A, B)`` puts ``A`` on qubit 0.
"""

from __future__ import annotations

from typing import Iterable, TextIO

import numpy as np

STRUCTURAL_TOL = 1e-12
ACCUMULATED_TOL = 1e-10
SYNTHESIS_TOL = 1e-8


def as_vector(values) -> np.ndarray:
    """Return ``values`` as a 1-D complex vector, rejecting non-finite entries."""
    v = np.asarray(values, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_matrix(values) -> np.ndarray:
    """Return ``values`` as a 2-D complex matrix, rejecting non-finite entries."""
    m = np.asarray(values, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def roots_of_unity(n: int) -> np.ndarray:
    """Return ``[w**0, w**1, ..., w**(n-1)]`` with ``w = exp(2 pi i / n)``."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    return np.exp(2j * np.pi * np.arange(n) / n)


def root_power(n: int, k) -> np.ndarray | complex:
    """``w**k`` for ``w = exp(2 pi i / n)``, with ``k`` reduced mod ``n`` first.

    Reducing the exponent keeps ``w**(j*k)`` exact-ish for large products.
    """
    return np.exp(2j * np.pi * (np.asarray(k) % n) / n)


def mat_apply(m, v) -> np.ndarray:
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {m.shape} vs vector {v.shape}")
    return m @ v


def is_unitary(m, tol: float = STRUCTURAL_TOL) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"is_unitary needs a square matrix, got {m.shape}")
    eye = np.eye(m.shape[0])
    left = np.max(np.abs(m.conj().T @ m - eye))
    right = np.max(np.abs(m @ m.conj().T - eye))
    return bool(left < tol and right < tol)


def kron(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices, first factor most significant."""
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def uniform_state(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    return np.full(n, 1.0 / np.sqrt(n), dtype=complex)


def basis_state(n: int, index: int) -> np.ndarray:
    if not 0 <= index < n:
        raise ValueError(f"basis index {index} outside 0..{n - 1}")
    v = np.zeros(n, dtype=complex)
    v[index] = 1.0
    return v


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def num_qubits(dim: int) -> int:
    """Return ``n`` with ``2**n == dim``; raise if ``dim`` is not a power of two."""
    if dim < 1 or dim & (dim - 1):
        raise ValueError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def bitstring(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b") if n_qubits else ""


def bitstring_index(bits: str) -> int:
    return int(bits, 2)


def global_phase_distance(a, b) -> float:
    """Max-norm distance between ``a`` and ``b`` after the best global phase.

    The phase is taken from the overlap ``tr(b^dagger a)``; when that vanishes
    the plain distance is returned.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    overlap = np.vdot(b, a)
    if abs(overlap) > 1e-300:
        b = b * (overlap / abs(overlap))
    return max_abs(a - b)


# --- text interchange -----------------------------------------------------

def _fmt(x: float) -> str:
    # repr round-trips a float64 exactly
    return repr(float(x))


def dumps_matrix(m) -> str:
    m = as_matrix(m)
    rows, cols = m.shape
    lines = [f"cmatrix {rows} {cols}"]
    for row in m:
        lines.append(" ".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in row))
    return "\n".join(lines) + "\n"


def loads_matrix(text: str) -> np.ndarray:
    tokens = text.split()
    if len(tokens) < 3 or tokens[0] != "cmatrix":
        raise ValueError("matrix text must start with 'cmatrix ROWS COLS'")
    try:
        rows, cols = int(tokens[1]), int(tokens[2])
    except ValueError as exc:
        raise ValueError("bad cmatrix header") from exc
    if rows < 1 or cols < 1:
        raise ValueError("cmatrix dimensions must be positive")
    entries = tokens[3:]
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, found {len(entries)}")
    values = []
    for tok in entries:
        re, sep, im = tok.partition(",")
        if not sep:
            raise ValueError(f"entry {tok!r} is not an 're,im' pair")
        values.append(complex(float(re), float(im)))
    return as_matrix(np.array(values, dtype=complex).reshape(rows, cols))


def write_matrix(m, fh: TextIO) -> None:
    fh.write(dumps_matrix(m))


def read_matrix(fh: TextIO) -> np.ndarray:
    return loads_matrix(fh.read())


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def pauli_matrices() -> dict[str, np.ndarray]:
    return {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def sorted_rows(m: Iterable) -> np.ndarray:
    """Rows of ``m`` sorted lexicographically by (rounded real, rounded imag)."""
    m = np.asarray(m, dtype=complex)
    keys = [tuple(np.round(np.concatenate([r.real, r.imag]), 9)) for r in m]
    order = sorted(range(len(keys)), key=keys.__getitem__)
    return m[order]
