"""Slater (canonical) decomposition of two-fermion pure states.

A two-fermion state ``sum_ij A_ij e_i (x) e_j`` is held as its antisymmetric
coefficient matrix ``A``.  Unitary congruence ``A -> V A V^T`` is a change of
single-particle basis, and every ``A`` can be brought to the block form

    A = U Z U^T,   Z = diag([[0, c_1/sqrt2], [-c_1/sqrt2, 0]], ..., 0)

so that the state equals ``sum_i c_i phi_{2i-1} ^ phi_{2i}`` with ``phi_k``
the columns of ``U`` and ``sum |c_i|^2 = 1``.  The number of nonzero ``c_i``
is the Slater rank; rank one means the state is a single wedge product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._config import DEFAULT_TOL
from .exterior import FermionState
from .qcore import DimensionError, LinAlgFailure, fix_column_phases, frozen, orthonormal_complement, svd

SQRT2 = math.sqrt(2.0)


class SlaterDecompositionError(RuntimeError):
    """The canonical form could not be reconstructed to tolerance."""


@dataclass(frozen=True)
class FermionPairState:
    """Normalized two-fermion state with antisymmetric coefficient matrix ``matrix``."""

    single_dim: int
    matrix: NDArray[np.complex128]

    def __post_init__(self) -> None:
        a = np.asarray(self.matrix, dtype=np.complex128)
        if a.shape != (self.single_dim, self.single_dim):
            raise DimensionError(f"coefficient matrix shape {a.shape} != ({self.single_dim}, {self.single_dim})")
        scale = max(1.0, float(np.max(np.abs(a))))
        if float(np.max(np.abs(a + a.T))) > DEFAULT_TOL * scale:
            raise ValueError("coefficient matrix is not antisymmetric")
        a = 0.5 * (a - a.T)
        n = float(np.linalg.norm(a))
        if abs(n - 1.0) > DEFAULT_TOL:
            raise ValueError(f"state is not normalized (norm {n:.12g})")
        object.__setattr__(self, "matrix", frozen(a))

    @classmethod
    def from_matrix(cls, a: ArrayLike, normalize: bool = True) -> FermionPairState:
        a = np.asarray(a, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        if normalize:
            n = float(np.linalg.norm(a))
            if n == 0.0:
                raise ValueError("zero state")
            a = a / n
        return cls(a.shape[0], a)

    @classmethod
    def from_fermion_state(cls, psi: FermionState, normalize: bool = False) -> FermionPairState:
        return from_wedge_terms(psi, normalize=normalize)

    def to_fermion_state(self) -> FermionState:
        d = self.single_dim
        terms = {(i, j): SQRT2 * self.matrix[i, j] for i in range(d) for j in range(i + 1, d)}
        return FermionState(d, 2, terms)

    def vector(self) -> NDArray[np.complex128]:
        """Amplitudes on the product basis, row-major (first factor slowest)."""
        return self.matrix.ravel()


def from_wedge_terms(psi: FermionState, normalize: bool = False) -> FermionPairState:
    """Expand a degree-2 wedge state into its coefficient matrix."""
    if psi.n_particles != 2:
        raise DimensionError(f"expected a two-particle state, got N={psi.n_particles}")
    if psi.is_zero:
        raise ValueError("zero state")
    d = psi.single_dim
    a = np.zeros((d, d), dtype=np.complex128)
    for (i, j), c in psi.terms.items():
        a[i, j] = c / SQRT2
        a[j, i] = -c / SQRT2
    return FermionPairState.from_matrix(a, normalize=normalize)


def canonical_block_matrix(coefficients: ArrayLike, d: int) -> NDArray[np.complex128]:
    """Block-diagonal ``Z`` with ``c_i / sqrt2`` above the diagonal in each 2x2 block."""
    z = np.zeros((d, d), dtype=np.complex128)
    for i, c in enumerate(np.asarray(coefficients, dtype=np.complex128)):
        z[2 * i, 2 * i + 1] = c / SQRT2
        z[2 * i + 1, 2 * i] = -c / SQRT2
    return z


def compose(u: ArrayLike, coefficients: ArrayLike) -> FermionPairState:
    """State ``sum_i c_i u_{2i-1} ^ u_{2i}`` for a unitary ``u`` (normalizes ``c``)."""
    u = np.asarray(u, dtype=np.complex128)
    c = np.asarray(coefficients, dtype=np.complex128)
    if 2 * c.size > u.shape[0]:
        raise DimensionError(f"{c.size} blocks do not fit in dimension {u.shape[0]}")
    a = u @ canonical_block_matrix(c, u.shape[0]) @ u.T
    return FermionPairState.from_matrix(a, normalize=True)


@dataclass(frozen=True)
class SlaterDecomposition:
    """``A = U Z U^T``; ``coefficients`` has one entry per 2x2 block (floor(d/2) of them)."""

    unitary: NDArray[np.complex128]
    coefficients: NDArray[np.complex128]
    rank: int

    @property
    def single_dim(self) -> int:
        return self.unitary.shape[0]

    def block_matrix(self) -> NDArray[np.complex128]:
        return canonical_block_matrix(self.coefficients, self.single_dim)

    def reconstruct(self) -> NDArray[np.complex128]:
        u = self.unitary
        return u @ self.block_matrix() @ u.T

    def pair(self, i: int) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
        """The basis vectors ``(phi_{2i+1}, phi_{2i+2})`` carrying block ``i`` (0-based)."""
        return self.unitary[:, 2 * i], self.unitary[:, 2 * i + 1]


def _monomial_pairs(a: np.ndarray, cutoff: float) -> list[tuple[int, int]] | None:
    """Index pairs if ``a`` has at most one non-negligible entry per row, else None."""
    big = np.abs(a) > cutoff
    if np.any(big.sum(axis=1) > 1):
        return None
    return [(i, int(np.argmax(big[i]))) for i in range(a.shape[0]) if big[i].any() and i < int(np.argmax(big[i]))]


def _extract_blocks(a: np.ndarray, cutoff: float) -> tuple[np.ndarray, list[complex]]:
    d = a.shape[0]
    pairs = _monomial_pairs(a, cutoff)
    if pairs is not None:
        cols: list[np.ndarray] = []
        coeffs: list[complex] = []
        used: set[int] = set()
        eye = np.eye(d, dtype=np.complex128)
        for i, j in pairs:
            cols += [eye[:, i], eye[:, j]]
            coeffs.append(SQRT2 * a[i, j])
            used.update((i, j))
        cols += [eye[:, k] for k in range(d) if k not in used]
        return np.column_stack(cols), coeffs

    w = np.eye(d, dtype=np.complex128)
    b = a.copy()
    cols = []
    coeffs = []
    while b.shape[0] >= 2:
        u, s, v = svd(b)
        if s[0] <= cutoff:
            break
        x = u[:, 0]
        y = np.conj(v[:, 0])
        # u^T v vanishes exactly for antisymmetric b; enforce it against round-off
        y = y - np.vdot(x, y) * x
        y = y / np.linalg.norm(y)
        pair, _ = fix_column_phases(np.column_stack([w @ x, w @ y]))
        phi1, phi2 = pair[:, 0], pair[:, 1]
        cols += [phi1, phi2]
        coeffs.append(SQRT2 * complex(np.vdot(phi1, a @ np.conj(phi2))))
        comp = orthonormal_complement(np.column_stack([x, y]), b.shape[0])
        w = w @ comp
        b = comp.conj().T @ b @ np.conj(comp)
        b = 0.5 * (b - b.T)
    if w.shape[1]:
        cols += list(fix_column_phases(w)[0].T)
    return np.column_stack(cols), coeffs


def _phase_key(c: complex) -> float:
    ang = float(np.angle(c))
    return math.pi if ang <= -math.pi + 1e-12 else ang


def _order_blocks(u: np.ndarray, coeffs: list[complex], tol: float) -> tuple[np.ndarray, list[complex]]:
    """Descending |c|; runs of equal |c| (within tol) by phase angle, then extraction order."""
    n = len(coeffs)
    if n < 2:
        return u, coeffs
    mags = np.abs(coeffs)
    by_mag = sorted(range(n), key=lambda k: (-mags[k], k))
    order: list[int] = []
    run = [by_mag[0]]
    for k in by_mag[1:]:
        if mags[run[0]] - mags[k] <= tol * mags[by_mag[0]]:
            run.append(k)
        else:
            order += sorted(run, key=lambda j: (_phase_key(coeffs[j]), j))
            run = [k]
    order += sorted(run, key=lambda j: (_phase_key(coeffs[j]), j))
    perm = [c for k in order for c in (2 * k, 2 * k + 1)] + list(range(2 * n, u.shape[1]))
    return u[:, perm], [coeffs[k] for k in order]


def slater_decompose(psi: FermionPairState, tol: float = DEFAULT_TOL) -> SlaterDecomposition:
    """Canonical form of a two-fermion state by unitary congruence.

    The largest singular triple ``(s, u, v)`` of the antisymmetric matrix
    gives an orthonormal pair ``(u, conj(v))`` that decouples as one 2x2 block
    with entry ``s``; the block is split off and the rest is decomposed in
    the orthogonal complement.  Singular values below ``tol * s_max`` count
    as zero.  Each basis vector is rotated so that its first non-negligible
    component is real positive, and the block phase is carried by ``c_i``.
    """
    a = np.asarray(psi.matrix)
    d = psi.single_dim
    s_max = float(np.linalg.norm(a, 2))
    cutoff = tol * s_max
    try:
        u, coeffs = _extract_blocks(a, cutoff)
    except LinAlgFailure as exc:
        raise SlaterDecompositionError(str(exc)) from exc
    u, coeffs = _order_blocks(u, coeffs, tol)
    rank = len(coeffs)
    full = np.zeros(d // 2, dtype=np.complex128)
    full[:rank] = coeffs
    dec = SlaterDecomposition(frozen(u), frozen(full), rank)

    residual = float(np.linalg.norm(a - dec.reconstruct()))
    if residual > tol:
        # re-orthogonalize the basis and read the blocks back from A
        q, r = np.linalg.qr(u)
        q = q * (np.diag(r) / np.abs(np.diag(r)))[None, :]
        z = q.conj().T @ a @ np.conj(q)
        retry = np.array([SQRT2 * z[2 * i, 2 * i + 1] for i in range(rank)], dtype=np.complex128)
        full[:rank] = retry
        dec = SlaterDecomposition(frozen(q), frozen(full), rank)
        residual = float(np.linalg.norm(a - dec.reconstruct()))
        if residual > tol:
            raise SlaterDecompositionError(f"canonical form reconstructs A only to {residual:.3e}")
    return dec


def slater_rank(psi: FermionPairState, tol: float = DEFAULT_TOL) -> int:
    return slater_decompose(psi, tol).rank


def is_gmw_entangled(psi: FermionPairState, tol: float = DEFAULT_TOL) -> bool:
    """A two-fermion state is GMW-entangled iff it is not a single wedge product."""
    return slater_rank(psi, tol) >= 2


@dataclass(frozen=True)
class XiGamma:
    xi: float
    gamma: float


def xi_gamma_from(c1: complex, c2: complex) -> XiGamma:
    m1, m2 = abs(c1), abs(c2)
    if m1 == 0.0 or m2 == 0.0:
        raise ValueError("both block coefficients must be nonzero")
    xi = 2.0 * m1 * m2 / (m1 * m1 + m2 * m2)
    gamma = float(np.angle(c1 * np.conj(c2)))
    if gamma <= -math.pi:
        gamma += 2.0 * math.pi
    return XiGamma(float(min(xi, 1.0)), gamma)


def xi_gamma(dec: SlaterDecomposition) -> XiGamma:
    """Two-block parameters from the two largest Slater coefficients."""
    if dec.rank < 2:
        raise ValueError(f"xi/gamma need Slater rank >= 2, got {dec.rank}")
    return xi_gamma_from(dec.coefficients[0], dec.coefficients[1])
