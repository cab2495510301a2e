"""Dense complex linear algebra with explicit tolerance handling.

All matrices are numpy complex128 arrays.  Equality, rank, and kernel
decisions are never made against exact zero; they go through a
:class:`Tolerances` instance so every numerical cutoff in the package is
pinned in one place.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NonHermitian, NotPSD, ValidationError


@dataclass(frozen=True)
class Tolerances:
    """Numerical cutoffs used throughout the package.

    atol_equality   absolute tolerance for matrix equality and validation
    rank_threshold  relative cutoff for counting singular values / eigenvalues
    kernel_threshold relative cutoff for null-space extraction
    cluster_gap     minimum separation between distinct eigenvalue clusters
    """

    atol_equality: float = 1e-9
    rank_threshold: float = 1e-8
    kernel_threshold: float = 1e-8
    cluster_gap: float = 1e-6

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not (0.0 < v < 1e-2):
                raise ValidationError(f"{f.name} must lie in (0, 1e-2), got {v!r}")


DEFAULT_TOL = Tolerances()


def as_complex_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(a^dag b)."""
    return complex(np.vdot(a, b))


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def vec(a: np.ndarray) -> np.ndarray:
    """Row-major vectorization; an isometry for the HS inner product."""
    return np.asarray(a).reshape(-1)


def unvec(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    v = np.asarray(v)
    if v.size != rows * cols:
        raise DimensionMismatch(f"cannot reshape {v.size} entries to {rows}x{cols}")
    return v.reshape(rows, cols)


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.asarray(ops[0], dtype=np.complex128)
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def is_hermitian(a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and np.abs(a - a.conj().T).max() <= tol.atol_equality


def hermitianize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def hermitian_eig(a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending, real) and matching orthonormal eigenvector columns.

    Raises NonHermitian when the input is not Hermitian within tolerance.
    """
    a = as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"square matrix required, got {a.shape}")
    dev = np.abs(a - a.conj().T).max() if a.size else 0.0
    if dev > tol.atol_equality:
        raise NonHermitian(f"Hermiticity deviation {dev:.3e} exceeds {tol.atol_equality:.1e}")
    try:
        w, v = np.linalg.eigh(hermitianize(a))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure is exotic
        raise NoConvergence(str(exc)) from exc
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def numerical_rank(a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> int:
    """Number of singular values above rank_threshold * max(1, largest)."""
    a = as_complex_matrix(a)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    cut = tol.rank_threshold * max(1.0, float(s[0]) if s.size else 0.0)
    return int(np.count_nonzero(s > cut))


def kernel_basis(a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns spanning the (right) null space of a."""
    a = as_complex_matrix(a)
    _, s, vh = np.linalg.svd(a)
    cut = tol.kernel_threshold * max(1.0, float(s[0]) if s.size else 0.0)
    rank = int(np.count_nonzero(s > cut))
    return vh[rank:].conj().T


def partial_trace(a: np.ndarray, dims: tuple[int, int], traced: str = "second") -> np.ndarray:
    """Trace out one tensor factor of an operator on C^d1 (x) C^d2."""
    a = as_complex_matrix(a)
    d1, d2 = dims
    if a.shape != (d1 * d2, d1 * d2):
        raise DimensionMismatch(f"operator shape {a.shape} does not match dims {dims}")
    t = a.reshape(d1, d2, d1, d2)
    if traced == "second":
        return np.einsum("iaja->ij", t)
    if traced == "first":
        return np.einsum("aiaj->ij", t)
    raise DimensionMismatch(f"traced must be 'first' or 'second', got {traced!r}")


def matrix_sqrt_psd(a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Unique PSD square root; small negative eigenvalues are clipped to zero."""
    w, v = hermitian_eig(a, tol)
    if w.size and w[-1] < -10 * tol.atol_equality:
        raise NotPSD(f"eigenvalue {w[-1]:.3e} below -10*atol")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def eigenvalue_clusters(values: np.ndarray, gap: float) -> list[np.ndarray]:
    """Group sorted-descending values into clusters separated by more than gap.

    Returns index arrays into the input (which must be sorted descending).
    """
    if values.size == 0:
        return []
    groups: list[list[int]] = [[0]]
    for i in range(1, values.size):
        if abs(values[i - 1] - values[i]) > gap:
            groups.append([i])
        else:
            groups[-1].append(i)
    return [np.array(g) for g in groups]
