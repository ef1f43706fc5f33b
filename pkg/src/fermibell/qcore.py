"""Dense complex linear algebra used by every other module.

Kets are 1-d complex arrays, operators are 2-d complex arrays and a
two-system joint ket is a ``d x d`` coefficient matrix whose row index is the
first tensor factor and whose column index is the second.  All functions are
pure; inputs are never modified.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._config import DEFAULT_TOL

Ket = NDArray[np.complex128]
Operator = NDArray[np.complex128]
JointKet = NDArray[np.complex128]


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class LinAlgFailure(RuntimeError):
    """A LAPACK routine did not converge."""


def as_ket(x: ArrayLike) -> Ket:
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"ket must be a non-empty 1-d array, got shape {v.shape}")
    return v


def as_operator(m: ArrayLike) -> Operator:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.size == 0:
        raise DimensionError(f"operator must be a non-empty 2-d array, got shape {a.shape}")
    return a


def basis_ket(dim: int, index: int) -> Ket:
    """Standard basis vector ``e_index`` (0-based) of ``C^dim``."""
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def frozen(a: np.ndarray) -> np.ndarray:
    """Return a read-only copy of ``a``."""
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


def inner_product(x: ArrayLike, y: ArrayLike) -> complex:
    """``<x|y>``, conjugate-linear in the first argument."""
    x, y = as_ket(x), as_ket(y)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.size} vs {y.size}")
    return complex(np.vdot(x, y))


def norm(x: ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=np.complex128)))


def tensor(x: ArrayLike, y: ArrayLike) -> JointKet:
    """Product ket ``x (x) y`` as a coefficient matrix ``[i, j] = x_i y_j``."""
    return np.outer(as_ket(x), as_ket(y))


def op_tensor(a: ArrayLike, b: ArrayLike) -> Operator:
    """Kronecker product of two square operators.

    The flattening matches :func:`tensor` with row-major ``reshape``, so
    ``op_tensor(A, B) @ tensor(x, y).ravel() == tensor(A @ x, B @ y).ravel()``.
    """
    a, b = as_operator(a), as_operator(b)
    for m in (a, b):
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"op_tensor needs square operators, got {m.shape}")
    return np.kron(a, b)


def apply_local(a: ArrayLike, b: ArrayLike, psi: ArrayLike) -> JointKet:
    """``(A (x) B) psi`` acting on a coefficient matrix: ``A psi B^T``."""
    return as_operator(a) @ np.asarray(psi, dtype=np.complex128) @ as_operator(b).T


def swap_operator(dim: int) -> Operator:
    """The unitary exchanging the two factors of ``C^dim (x) C^dim``."""
    s = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for i in range(dim):
        for j in range(dim):
            s[j * dim + i, i * dim + j] = 1.0
    return s


def dagger(m: ArrayLike) -> Operator:
    return as_operator(m).conj().T


def _scale(m: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0


def is_hermitian(m: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    m = as_operator(m)
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T)) <= tol * _scale(m))


def is_unitary(m: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    m = as_operator(m)
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def is_isometry(m: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    """Columns of ``m`` are orthonormal."""
    m = as_operator(m)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[1]))) <= tol)


def is_projector(m: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    """Hermitian and idempotent."""
    m = as_operator(m)
    if not is_hermitian(m, tol):
        return False
    return bool(np.max(np.abs(m @ m - m)) <= tol * _scale(m))


def projector_onto(vectors: ArrayLike) -> Operator:
    """Orthogonal projector onto the span of the given orthonormal columns."""
    v = np.asarray(vectors, dtype=np.complex128)
    if v.ndim == 1:
        v = v[:, None]
    return v @ v.conj().T


def projector_rank(p: ArrayLike) -> int:
    return int(round(float(np.trace(as_operator(p)).real)))


def range_basis(p: ArrayLike) -> NDArray[np.complex128]:
    """Orthonormal columns spanning the range of a projector."""
    w, v = np.linalg.eigh(as_operator(p))
    keep = w > 0.5
    return v[:, keep][:, ::-1]


def svd(m: ArrayLike) -> tuple[Operator, NDArray[np.float64], Operator]:
    """Full SVD ``M = U diag(s) V^dagger`` with ``s`` descending.

    Non-convergence is raised as :class:`LinAlgFailure`, never ignored.
    """
    m = as_operator(m)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise LinAlgFailure(f"SVD did not converge: {exc}") from exc
    return u, s, vh.conj().T


def haar_random_unitary(dim: int, seed: int | np.random.Generator | None = None) -> Operator:
    """Haar-distributed unitary from QR of a complex Ginibre matrix.

    The phases of the triangular factor's diagonal are divided out so the
    result is invariant under left and right multiplication by unitaries.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    phases = diag / np.abs(diag)
    return q * phases[None, :]


def random_ket(dim: int, seed: int | np.random.Generator | None = None) -> Ket:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def orthonormal_complement(vectors: ArrayLike, dim: int | None = None) -> NDArray[np.complex128]:
    """Orthonormal basis of the orthogonal complement of the given orthonormal columns."""
    v = np.asarray(vectors, dtype=np.complex128)
    if v.ndim == 1:
        v = v[:, None]
    n = v.shape[0] if dim is None else dim
    if v.shape[1] == 0:
        return np.eye(n, dtype=np.complex128)
    u, s, _ = np.linalg.svd(v, full_matrices=True)
    k = int(np.sum(s > 0.5))
    return u[:, k:]


def fix_column_phases(u: ArrayLike, rel_tol: float = 1e-8) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """Rotate each column so its first non-negligible entry is real positive.

    Entries below ``rel_tol`` times the column's largest modulus count as zero.
    Returns the rotated matrix and the unit phases ``p`` with ``u == out * p``.
    """
    u = np.array(u, dtype=np.complex128, copy=True)
    phases = np.ones(u.shape[1], dtype=np.complex128)
    for k in range(u.shape[1]):
        col = u[:, k]
        big = float(np.max(np.abs(col)))
        if big == 0.0:
            continue
        first = int(np.argmax(np.abs(col) > rel_tol * big))
        p = col[first] / abs(col[first])
        phases[k] = p
        u[:, k] = col / p
    return u, phases
