"""Wedge products, antisymmetrization and decomposability of fermionic states.

A :class:`FermionState` of ``N`` particles over ``C^d`` is stored as a map
from strictly increasing index tuples to complex coefficients.  A single term
with unit coefficient is the normalized antisymmetrized product

    e_{i1} ^ ... ^ e_{iN} = (N!)^{-1/2} sum_pi sgn(pi) e_{i_pi(1)} (x) ... (x) e_{i_pi(N)}

so the squared norm of a state is the sum of its squared coefficient moduli.
Indices are 0-based throughout the library.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import subspace_angles

from ._config import DEFAULT_TOL
from .qcore import DimensionError, as_operator, frozen, is_isometry


class NotDecomposableError(ValueError):
    """The state is not a wedge product of single-particle vectors."""


class WedgeTerm(NamedTuple):
    coefficient: complex
    indices: tuple[int, ...]


def permutation_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq``; 0 if ``seq`` has repeats."""
    if len(set(seq)) != len(seq):
        return 0
    inversions = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
    return -1 if inversions % 2 else 1


def canonical_term(coefficient: complex, indices: Sequence[int]) -> WedgeTerm | None:
    """Sort ``indices`` picking up the permutation sign; None for repeated indices."""
    sign = permutation_sign(indices)
    if sign == 0:
        return None
    return WedgeTerm(complex(sign * coefficient), tuple(sorted(indices)))


@dataclass(frozen=True)
class FermionState:
    """An element of the degree-``n_particles`` exterior power of ``C^single_dim``.

    An empty ``terms`` mapping is the zero state; antisymmetrization and
    wedge products signal a vanishing result that way (see :attr:`is_zero`).
    """

    single_dim: int
    n_particles: int
    terms: Mapping[tuple[int, ...], complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.single_dim < 1 or self.n_particles < 1:
            raise ValueError("single_dim and n_particles must be positive")
        clean: dict[tuple[int, ...], complex] = {}
        for idx, c in self.terms.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.n_particles:
                raise DimensionError(f"term {idx} has degree {len(idx)}, expected {self.n_particles}")
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError(f"term indices {idx} are not strictly increasing")
            if idx and (idx[0] < 0 or idx[-1] >= self.single_dim):
                raise IndexError(f"term indices {idx} out of range for dimension {self.single_dim}")
            if c != 0:
                clean[idx] = complex(c)
        if clean and self.n_particles > self.single_dim:
            raise ValueError("n_particles exceeds single_dim")
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def from_terms(cls, single_dim: int, terms: Iterable[tuple[complex, Sequence[int]]]) -> FermionState:
        """Build from (coefficient, indices) pairs in any order; repeats are summed."""
        acc: dict[tuple[int, ...], complex] = {}
        degree = None
        for c, idx in terms:
            idx = tuple(idx)
            degree = len(idx) if degree is None else degree
            if len(idx) != degree:
                raise DimensionError("terms of mixed degree")
            t = canonical_term(c, idx)
            if t is None:
                continue
            acc[t.indices] = acc.get(t.indices, 0.0) + t.coefficient
        if degree is None:
            raise ValueError("no terms given")
        return cls(single_dim, degree, acc)

    @classmethod
    def zero(cls, single_dim: int, n_particles: int) -> FermionState:
        return cls(single_dim, n_particles, {})

    @classmethod
    def from_ket(cls, v: ArrayLike) -> FermionState:
        """Degree-1 state with the amplitudes of ``v``."""
        v = np.asarray(v, dtype=np.complex128)
        return cls(v.size, 1, {(i,): c for i, c in enumerate(v)})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def overflow(self) -> bool:
        """Degree exceeds the single-particle dimension (necessarily zero)."""
        return self.n_particles > self.single_dim

    def wedge_terms(self) -> list[WedgeTerm]:
        return [WedgeTerm(c, idx) for idx, c in self.terms.items()]

    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.terms.values()))

    def normalized(self) -> FermionState:
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero state")
        return FermionState(self.single_dim, self.n_particles, {k: c / n for k, c in self.terms.items()})

    def scaled(self, factor: complex) -> FermionState:
        return FermionState(self.single_dim, self.n_particles, {k: c * factor for k, c in self.terms.items()})

    def to_vector(self) -> NDArray[np.complex128]:
        """Coefficients over all sorted index tuples in lexicographic order."""
        combos = itertools.combinations(range(self.single_dim), self.n_particles)
        return np.array([self.terms.get(idx, 0.0) for idx in combos], dtype=np.complex128)

    def to_tensor(self) -> NDArray[np.complex128]:
        """Totally antisymmetric amplitude tensor of shape ``(d,) * N``."""
        n = self.n_particles
        out = np.zeros((self.single_dim,) * n, dtype=np.complex128)
        scale = 1.0 / math.sqrt(math.factorial(n))
        for idx, c in self.terms.items():
            for perm in itertools.permutations(range(n)):
                out[tuple(idx[p] for p in perm)] += permutation_sign(perm) * c * scale
        return out

    def __add__(self, other: FermionState) -> FermionState:
        _check_same_space(self, other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc.get(k, 0.0) + c
        return FermionState(self.single_dim, self.n_particles, acc)

    def __sub__(self, other: FermionState) -> FermionState:
        return self + other.scaled(-1.0)


def _check_same_space(a: FermionState, b: FermionState) -> None:
    if a.single_dim != b.single_dim or a.n_particles != b.n_particles:
        raise DimensionError(
            f"states live in different spaces: (d={a.single_dim}, N={a.n_particles}) vs "
            f"(d={b.single_dim}, N={b.n_particles})"
        )


def _check_tensor(t: np.ndarray) -> tuple[int, int]:
    if t.ndim < 1 or len(set(t.shape)) != 1:
        raise DimensionError(f"expected an N-fold tensor with equal factor dimensions, got {t.shape}")
    return t.shape[0], t.ndim


def permutation_action(perm: Sequence[int], psi: ArrayLike) -> NDArray[np.complex128]:
    """Apply ``U(perm)``: the factor in slot ``k`` moves to slot ``perm[k]``."""
    t = np.asarray(psi, dtype=np.complex128)
    _, n = _check_tensor(t)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise DimensionError(f"{perm} is not a permutation of {n} slots")
    inverse = np.argsort(perm)
    return np.transpose(t, axes=inverse)


def _project(t: np.ndarray, signed: bool) -> np.ndarray:
    n = t.ndim
    acc = np.zeros_like(t)
    for perm in itertools.permutations(range(n)):
        sign = permutation_sign(perm) if signed else 1
        acc += sign * np.transpose(t, axes=perm)
    return acc / math.factorial(n)


def antisymmetrize(psi: ArrayLike, tol: float = DEFAULT_TOL) -> FermionState:
    """Normalized antisymmetric part of an N-fold tensor, as wedge terms.

    Returns the zero state (``is_zero`` true) when the antisymmetric
    projection vanishes relative to the input norm.
    """
    t = np.asarray(psi, dtype=np.complex128)
    d, n = _check_tensor(t)
    in_norm = float(np.linalg.norm(t))
    if n > d or in_norm == 0.0:
        return FermionState.zero(d, n)
    a = _project(t, signed=True)
    if float(np.linalg.norm(a)) <= tol * in_norm:
        return FermionState.zero(d, n)
    root = math.sqrt(math.factorial(n))
    terms = {idx: root * a[idx] for idx in itertools.combinations(range(d), n)}
    return FermionState(d, n, terms).normalized()


def symmetrize(psi: ArrayLike) -> NDArray[np.complex128]:
    """Normalized totally symmetric part of an N-fold tensor (bosonic sector).

    Only used to build bosonic counterexamples; there is no bosonic state type.
    """
    t = np.asarray(psi, dtype=np.complex128)
    _check_tensor(t)
    s = _project(t, signed=False)
    n = np.linalg.norm(s)
    if n == 0.0:
        raise ValueError("symmetric projection vanishes")
    return s / n


def wedge(alpha: FermionState, beta: FermionState) -> FermionState:
    """Exterior product; a zero state when the degree would exceed the dimension."""
    if alpha.single_dim != beta.single_dim:
        raise DimensionError("wedge of states over different single-particle spaces")
    d = alpha.single_dim
    degree = alpha.n_particles + beta.n_particles
    if degree > d:
        return FermionState.zero(d, degree)
    acc: dict[tuple[int, ...], complex] = {}
    for ia, ca in alpha.terms.items():
        for ib, cb in beta.terms.items():
            t = canonical_term(ca * cb, ia + ib)
            if t is not None:
                acc[t.indices] = acc.get(t.indices, 0.0) + t.coefficient
    return FermionState(d, degree, acc)


def wedge_all(states: Sequence[FermionState]) -> FermionState:
    out = states[0]
    for s in states[1:]:
        out = wedge(out, s)
    return out


def wedge_of_vectors(vectors: ArrayLike) -> FermionState:
    """``v_1 ^ ... ^ v_N`` for the columns of a ``d x N`` matrix (coefficients are minors)."""
    v = as_operator(vectors)
    d, n = v.shape
    if n > d:
        return FermionState.zero(d, n)
    terms = {idx: np.linalg.det(v[list(idx), :]) for idx in itertools.combinations(range(d), n)}
    return FermionState(d, n, terms)


def contract(psi: FermionState, index: int) -> FermionState:
    """Interior product with the basis covector ``e_index^*``."""
    if psi.n_particles == 1:
        raise DimensionError("contraction of a degree-1 state gives a scalar")
    acc: dict[tuple[int, ...], complex] = {}
    for idx, c in psi.terms.items():
        if index in idx:
            pos = idx.index(index)
            rest = idx[:pos] + idx[pos + 1:]
            acc[rest] = acc.get(rest, 0.0) + (-1) ** pos * c
    return FermionState(psi.single_dim, psi.n_particles - 1, acc)


def _swap_adjacent_operator(dim: int, n: int, k: int) -> np.ndarray:
    size = dim**n
    idx = np.arange(size).reshape((dim,) * n)
    axes = list(range(n))
    axes[k], axes[k + 1] = axes[k + 1], axes[k]
    target = np.transpose(idx, axes).ravel()
    u = np.zeros((size, size), dtype=np.complex128)
    u[np.arange(size), target] = 1.0
    return u


def is_symmetric_operator(q: ArrayLike, single_dim: int, n_particles: int = 2, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``q`` commutes with every factor permutation.

    Adjacent transpositions generate the symmetric group, so only those are checked.
    """
    q = as_operator(q)
    if q.shape != (single_dim**n_particles,) * 2:
        raise DimensionError(f"operator shape {q.shape} does not match ({single_dim}^{n_particles})^2")
    scale = max(1.0, float(np.max(np.abs(q))))
    for k in range(n_particles - 1):
        u = _swap_adjacent_operator(single_dim, n_particles, k)
        if float(np.max(np.abs(u @ q - q @ u))) > tol * scale:
            return False
    return True


def _unfolding(psi: FermionState) -> np.ndarray:
    """Matrix whose column space is spanned by all (N-1)-fold contractions of psi."""
    d, n = psi.single_dim, psi.n_particles
    cols = list(itertools.combinations(range(d), n - 1))
    col_of = {c: j for j, c in enumerate(cols)}
    m = np.zeros((d, len(cols)), dtype=np.complex128)
    for idx, c in psi.terms.items():
        for pos, k in enumerate(idx):
            rest = idx[:pos] + idx[pos + 1:]
            m[k, col_of[rest]] += (-1) ** pos * c
    return m


def support_rank(psi: FermionState, tol: float = DEFAULT_TOL) -> int:
    """Dimension of the smallest subspace ``W`` with ``psi`` in the N-th exterior power of ``W``."""
    if psi.is_zero:
        return 0
    s = np.linalg.svd(_unfolding(psi), compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def is_decomposable(psi: FermionState, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``psi`` is a single wedge of degree-1 vectors.

    Two particles use the Slater rank; more particles use the contraction
    test ``(e_k^* contracted with psi) ^ psi == 0`` for every basis covector.
    """
    if psi.is_zero:
        return False
    n, d = psi.n_particles, psi.single_dim
    if n == 1 or n == d:
        return True
    if n == 2:
        from .slater import FermionPairState, slater_rank

        return slater_rank(FermionPairState.from_fermion_state(psi.normalized()), tol=tol) == 1
    ref = psi.norm()
    for k in range(d):
        v = contract(psi, k)
        if v.is_zero:
            continue
        if wedge(v, psi).norm() > tol * ref * ref:
            return False
    return True


@dataclass(frozen=True)
class Subspace:
    ambient_dim: int
    basis: NDArray[np.complex128]

    def __post_init__(self) -> None:
        b = np.asarray(self.basis, dtype=np.complex128)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            raise DimensionError(f"basis shape {b.shape} incompatible with ambient dimension {self.ambient_dim}")
        if not is_isometry(b):
            raise ValueError("subspace basis is not orthonormal")
        object.__setattr__(self, "basis", frozen(b))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> NDArray[np.complex128]:
        return self.basis @ self.basis.conj().T

    def principal_angles(self, other: Subspace) -> NDArray[np.float64]:
        return subspace_angles(self.basis, other.basis)


def support_subspace(psi: FermionState, tol: float = DEFAULT_TOL) -> Subspace:
    """The N-dimensional span of the factors of a decomposable state."""
    if psi.is_zero:
        raise NotDecomposableError("zero state has no support")
    u, s, _ = np.linalg.svd(_unfolding(psi), full_matrices=False)
    r = int(np.sum(s > tol * s[0]))
    if r != psi.n_particles:
        raise NotDecomposableError(f"support has dimension {r}, expected {psi.n_particles}")
    return Subspace(psi.single_dim, u[:, :r])


def phase_relation(psi: FermionState, phi: FermionState) -> tuple[complex, float]:
    """Best unit phase ``p`` with ``psi ~ p * phi`` and the residual ``||psi - p phi||``."""
    _check_same_space(psi, phi)
    a, b = psi.to_vector(), phi.to_vector()
    overlap = np.vdot(b, a)
    p = overlap / abs(overlap) if abs(overlap) > 0 else 1.0 + 0j
    return complex(p), float(np.linalg.norm(a - p * b))


def reconstruct_from_subspace(psi: FermionState, sub: Subspace) -> tuple[complex, float]:
    """Wedge the subspace basis and compare it to ``psi``; returns (phase, residual)."""
    rebuilt = wedge_of_vectors(sub.basis)
    return phase_relation(psi.normalized(), rebuilt.normalized())
