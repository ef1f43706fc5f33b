"""Individuating projector pairs and permutation-invariant local operations.

A pair of single-particle projectors ``E1 _|_ E2`` individuates a two-fermion
state when the state lies in the range of ``E1 (x) E2 + E2 (x) E1``.  Such a
pair always exists for fermions (read off from the Slater basis) but can fail
for bosonic states such as ``phi (x) phi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._config import DEFAULT_TOL
from .qcore import DimensionError, as_operator, frozen, is_projector, op_tensor, projector_onto, projector_rank
from .slater import FermionPairState, SlaterDecomposition, slater_decompose


class ZeroProbabilityError(ValueError):
    """A selective operation annihilated the state."""


class NotOrthogonalError(ValueError):
    """The two projectors overlap."""


@dataclass(frozen=True)
class ProjectorPair:
    E1: NDArray[np.complex128]
    E2: NDArray[np.complex128]

    def __post_init__(self) -> None:
        e1, e2 = as_operator(self.E1), as_operator(self.E2)
        if e1.shape != e2.shape or e1.shape[0] != e1.shape[1]:
            raise DimensionError(f"projector shapes {e1.shape} and {e2.shape} are incompatible")
        for name, e in (("E1", e1), ("E2", e2)):
            if not is_projector(e):
                raise ValueError(f"{name} is not an orthogonal projector")
        if self.overlap_norm(e1, e2) > DEFAULT_TOL:
            raise NotOrthogonalError("E1 E2 != 0")
        object.__setattr__(self, "E1", frozen(e1))
        object.__setattr__(self, "E2", frozen(e2))

    @staticmethod
    def overlap_norm(e1: np.ndarray, e2: np.ndarray) -> float:
        return float(np.linalg.norm(e1 @ e2))

    @property
    def single_dim(self) -> int:
        return self.E1.shape[0]

    @property
    def dims(self) -> tuple[int, int]:
        return projector_rank(self.E1), projector_rank(self.E2)

    @property
    def orthogonality(self) -> float:
        """``||E1 E2||_F``; zero for a genuinely orthogonal pair."""
        return self.overlap_norm(self.E1, self.E2)

    def joint_projector(self) -> NDArray[np.complex128]:
        """``E1 (x) E2 + E2 (x) E1`` on the two-particle space."""
        return op_tensor(self.E1, self.E2) + op_tensor(self.E2, self.E1)

    def apply(self, psi: ArrayLike) -> NDArray[np.complex128]:
        """Action of the joint projector on a coefficient matrix."""
        a = np.asarray(psi, dtype=np.complex128)
        return self.E1 @ a @ self.E2.T + self.E2 @ a @ self.E1.T


@dataclass(frozen=True)
class ExhaustionReport:
    residual: float
    tol: float = DEFAULT_TOL

    @property
    def holds(self) -> bool:
        return self.residual <= self.tol


def check_exhaustion(psi: FermionPairState | ArrayLike, pair: ProjectorPair, tol: float = DEFAULT_TOL) -> ExhaustionReport:
    """Residual ``||(E1 (x) E2 + E2 (x) E1) psi - psi||``.

    ``psi`` may also be a bare ``d x d`` coefficient matrix, which is how
    bosonic (symmetric) states are checked.
    """
    a = psi.matrix if isinstance(psi, FermionPairState) else np.asarray(psi, dtype=np.complex128)
    if a.shape != (pair.single_dim,) * 2:
        raise DimensionError(f"state of shape {a.shape} vs projectors of dimension {pair.single_dim}")
    return ExhaustionReport(float(np.linalg.norm(pair.apply(a) - a)), tol)


def pair_from_slater_basis(dec: SlaterDecomposition, blocks: int | None = None) -> ProjectorPair:
    """Odd Slater vectors to ``E1``, even ones to ``E2``, over the first ``blocks`` blocks."""
    r = dec.rank if blocks is None else blocks
    u = dec.unitary
    return ProjectorPair(projector_onto(u[:, 0 : 2 * r : 2]), projector_onto(u[:, 1 : 2 * r : 2]))


def individuate(psi: FermionPairState, tol: float = DEFAULT_TOL) -> ProjectorPair:
    """An orthogonal, exhaustive projector pair built from the Slater basis of ``psi``."""
    dec = slater_decompose(psi, tol)
    pair = pair_from_slater_basis(dec)
    report = check_exhaustion(psi, pair, tol)
    if not report.holds:
        raise RuntimeError(f"Slater-basis projectors fail exhaustion (residual {report.residual:.3e})")
    return pair


def constituents_pure(psi: FermionPairState, tol: float = DEFAULT_TOL) -> bool:
    """Whether an individuating pair of rank-one projectors exists (Slater rank one)."""
    return slater_decompose(psi, tol).rank == 1


def pi_local_operator(pair: ProjectorPair, a: ArrayLike, b: ArrayLike) -> NDArray[np.complex128]:
    """``E1 A E1 (x) E2 B E2 + E2 B E2 (x) E1 A E1``."""
    a, b = as_operator(a), as_operator(b)
    d = pair.single_dim
    if a.shape != (d, d) or b.shape != (d, d):
        raise DimensionError(f"operators of shape {a.shape}, {b.shape} vs dimension {d}")
    ea = pair.E1 @ a @ pair.E1
    eb = pair.E2 @ b @ pair.E2
    return op_tensor(ea, eb) + op_tensor(eb, ea)


def pi_local_filter(psi: FermionPairState, pair: ProjectorPair, tol: float = DEFAULT_TOL) -> FermionPairState:
    """Apply the projective filter ``E1 (x) E2 + E2 (x) E1`` and renormalize.

    Only projective filters are provided.  The output is built as
    ``B - B^T`` with ``B = E1 A E2^T``, so it is exactly antisymmetric.
    """
    d = pair.single_dim
    if psi.single_dim != d:
        raise DimensionError(f"state dimension {psi.single_dim} vs projectors of dimension {d}")
    b = pair.E1 @ psi.matrix @ pair.E2.T
    out = b - b.T
    n = float(np.linalg.norm(out))
    if n <= tol:
        raise ZeroProbabilityError(f"filter success probability {n * n:.3e} is zero to tolerance")
    return FermionPairState(d, out / n)


def reduced_density_diagnostic(psi: FermionPairState) -> NDArray[np.complex128]:
    """One-body reduced density matrix ``A A^dagger`` (partial trace over one factor).

    Debugging aid only: under permutation invariance the partial trace picks
    out a factor space and so carries no physical meaning.  Both partial
    traces coincide for antisymmetric states.
    """
    a = psi.matrix
    rho = a @ a.conj().T
    return 0.5 * (rho + rho.conj().T)
