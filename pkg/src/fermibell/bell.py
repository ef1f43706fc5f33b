"""CHSH machinery for distinguishable and permutation-invariant two-particle states.

Correlations are always evaluated from full operators on the two-particle
space.  The optimizer works on the real 3x3 correlation tensor
``T[k, l] = F(e_k, e_l)``, since ``F(a, b) = a . T b`` by linearity, and the
winning configuration is re-evaluated through the operator path before it
goes into a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import _kernels
from ._config import CERT_MARGIN, DEFAULT_TOL
from .exterior import is_symmetric_operator
from .individuation import ProjectorPair, check_exhaustion, pair_from_slater_basis, pi_local_filter
from .qcore import DimensionError, as_operator, is_isometry, projector_onto
from .slater import FermionPairState, XiGamma, slater_decompose, xi_gamma, xi_gamma_from

Regime = Literal["distinguishable", "permutation_invariant"]
Optimizer = Literal["grid", "eta4", "stationary"]

GRID_STEP = math.pi / 24
ALGEBRA_TOL = 1e-10

_EPS = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS[_a, _b, _c] = 1.0
    _EPS[_b, _a, _c] = -1.0


class TripletError(ValueError):
    """Operators fail the Pauli algebra or the support conditions."""


def check_pauli_algebra(sx: np.ndarray, sy: np.ndarray, sz: np.ndarray, support: np.ndarray, tol: float = ALGEBRA_TOL) -> None:
    """Raise :class:`TripletError` unless the triplet is a Pauli triplet on ``support``."""
    s = (sx, sy, sz)
    for m in s:
        if np.max(np.abs(support @ m @ support - m)) > tol:
            raise TripletError("operator not supported on its projector")
    for a in range(3):
        for b in range(3):
            comm = s[a] @ s[b] - s[b] @ s[a]
            expect = 2j * sum(_EPS[a, b, c] * s[c] for c in range(3))
            if np.max(np.abs(comm - expect)) > tol:
                raise TripletError(f"commutator [s{a}, s{b}] is wrong")
            anti = s[a] @ s[b] + s[b] @ s[a]
            if np.max(np.abs(anti - 2.0 * (a == b) * support)) > tol:
                raise TripletError(f"anticommutator {{s{a}, s{b}}} is wrong")


@dataclass(frozen=True)
class PauliTriplet:
    """Pauli matrices on ``span{u, v}`` with ``sz = |u><u| - |v><v|``."""

    u: NDArray[np.complex128]
    v: NDArray[np.complex128]
    sx: NDArray[np.complex128] = field(init=False, repr=False)
    sy: NDArray[np.complex128] = field(init=False, repr=False)
    sz: NDArray[np.complex128] = field(init=False, repr=False)
    support: NDArray[np.complex128] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=np.complex128)
        v = np.asarray(self.v, dtype=np.complex128)
        if u.ndim != 1 or u.shape != v.shape:
            raise DimensionError("triplet kets must be 1-d and of equal dimension")
        if not is_isometry(np.column_stack([u, v]), tol=ALGEBRA_TOL):
            raise TripletError("triplet kets are not orthonormal")
        uv = np.outer(u, v.conj())
        vu = np.outer(v, u.conj())
        sx = uv + vu
        sy = -1j * (uv - vu)
        sz = np.outer(u, u.conj()) - np.outer(v, v.conj())
        support = projector_onto(np.column_stack([u, v]))
        check_pauli_algebra(sx, sy, sz, support)
        for name, val in (("u", u), ("v", v), ("sx", sx), ("sy", sy), ("sz", sz), ("support", support)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    def along(self, n: ArrayLike) -> NDArray[np.complex128]:
        """``n . sigma``."""
        n = np.asarray(n, dtype=np.float64)
        return n[0] * self.sx + n[1] * self.sy + n[2] * self.sz


def pauli_triplet_on(u: ArrayLike, v: ArrayLike) -> PauliTriplet:
    return PauliTriplet(np.asarray(u), np.asarray(v))


def _unit(x: ArrayLike) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (3,):
        raise DimensionError(f"direction must be a 3-vector, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class ChshConfiguration:
    triplet1: PauliTriplet
    triplet2: PauliTriplet
    a: NDArray[np.float64]
    a_prime: NDArray[np.float64]
    b: NDArray[np.float64]
    b_prime: NDArray[np.float64]

    def __post_init__(self) -> None:
        for name in ("a", "a_prime", "b", "b_prime"):
            x = _unit(getattr(self, name))
            if abs(float(np.linalg.norm(x)) - 1.0) > 1e-12:
                raise ValueError(f"direction {name} is not a unit vector")
            object.__setattr__(self, name, x.copy())

    def directions(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.a, self.a_prime, self.b, self.b_prime

    def with_directions(self, a, a_prime, b, b_prime) -> ChshConfiguration:
        return ChshConfiguration(self.triplet1, self.triplet2, a, a_prime, b, b_prime)


@dataclass(frozen=True)
class BellCertificate:
    regime: Regime
    value: float | None
    configuration: ChshConfiguration | None
    chi: NDArray[np.complex128] | None
    verdict: Literal["violates", "satisfies"]
    reason: str = ""
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def violates(self) -> bool:
        return self.verdict == "violates"


def verdict_for(value: float | None) -> Literal["violates", "satisfies"]:
    return "violates" if value is not None and value > 2.0 + CERT_MARGIN else "satisfies"


def chsh_value(e_ab: float, e_abp: float, e_apb: float, e_apbp: float) -> float:
    """``|E(a,b) - E(a,b')| + |E(a',b) + E(a',b')|``."""
    return abs(e_ab - e_abp) + abs(e_apb + e_apbp)


# ------------------------------------------------------------------ correlations

def _expect(op: np.ndarray, vec: np.ndarray) -> float:
    val = np.vdot(vec, op @ vec)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise RuntimeError(f"expectation of a Hermitian operator has imaginary part {val.imag:.3e}")
    return float(val.real)


def correlation_distinguishable(chi: ArrayLike, cfg: ChshConfiguration, a: ArrayLike, b: ArrayLike) -> float:
    """``<chi| a.sigma1 (x) b.sigma2 |chi>`` for a ``d1 x d2`` coefficient matrix."""
    m = as_operator(chi)
    if m.shape != (cfg.triplet1.dim, cfg.triplet2.dim):
        raise DimensionError(f"state shape {m.shape} vs triplet dimensions {(cfg.triplet1.dim, cfg.triplet2.dim)}")
    op = np.kron(cfg.triplet1.along(a), cfg.triplet2.along(b))
    return _expect(op, m.ravel())


def _check_pi_supports(cfg: ChshConfiguration) -> None:
    if cfg.triplet1.dim != cfg.triplet2.dim:
        raise DimensionError("permutation-invariant triplets must act on the same space")
    if np.linalg.norm(cfg.triplet1.support @ cfg.triplet2.support) > DEFAULT_TOL:
        raise TripletError("triplet supports overlap")


def pi_correlation_operator(cfg: ChshConfiguration, a: ArrayLike, b: ArrayLike) -> NDArray[np.complex128]:
    """``a.sigma1 (x) b.sigma2 + b.sigma2 (x) a.sigma1``; checked to be permutation symmetric."""
    _check_pi_supports(cfg)
    x = cfg.triplet1.along(a)
    y = cfg.triplet2.along(b)
    op = np.kron(x, y) + np.kron(y, x)
    if not is_symmetric_operator(op, cfg.triplet1.dim):
        raise RuntimeError("correlation operator is not permutation symmetric")
    return op


def correlation_pi(chi: FermionPairState, cfg: ChshConfiguration, a: ArrayLike, b: ArrayLike) -> float:
    """Permutation-invariant correlation ``F(a, b)``."""
    if chi.single_dim != cfg.triplet1.dim:
        raise DimensionError(f"state dimension {chi.single_dim} vs triplet dimension {cfg.triplet1.dim}")
    return _expect(pi_correlation_operator(cfg, a, b), chi.vector())


CorrelationFn = Callable[[ArrayLike, ArrayLike], float]


def _correlator(regime: Regime, chi: Any, cfg: ChshConfiguration) -> CorrelationFn:
    if regime == "permutation_invariant":
        return lambda a, b: correlation_pi(chi, cfg, a, b)
    return lambda a, b: correlation_distinguishable(chi, cfg, a, b)


def correlation_tensor(corr: CorrelationFn) -> NDArray[np.float64]:
    e = np.eye(3)
    return np.array([[corr(e[k], e[l]) for l in range(3)] for k in range(3)])


def evaluate_chsh(regime: Regime, chi: Any, cfg: ChshConfiguration) -> float:
    """CHSH value of a configuration, from the four operator expectations."""
    corr = _correlator(regime, chi, cfg)
    a, ap, b, bp = cfg.directions()
    return chsh_value(corr(a, b), corr(a, bp), corr(ap, b), corr(ap, bp))


# ----------------------------------------------------------- closed-form angles

def _closed_form_angles(xg: XiGamma, eta: float) -> tuple[np.ndarray, ...]:
    # F = a_z b_z + xi cos(g)(a_x b_x - a_y b_y) - xi sin(g)(a_x b_y + a_y b_x) with
    # sigma_y = -i(|u><v| - |v><u|), so b's azimuth is -gamma for F = cos(al)cos(be) + xi sin(al)sin(be)
    s = math.sqrt(max(0.0, 1.0 - eta * eta))
    cg, sg = math.cos(xg.gamma), math.sin(xg.gamma)
    a = np.array([0.0, 0.0, 1.0])
    ap = np.array([1.0, 0.0, 0.0])
    b = np.array([s * cg, -s * sg, eta])
    bp = np.array([s * cg, -s * sg, -eta])
    return a, ap, b, bp


def _check_xi(xi: float) -> None:
    if not 0.0 < xi <= 1.0 + 1e-12:
        raise ValueError(f"xi must lie in (0, 1], got {xi}")


def eta4_closed_form(xi: float) -> float:
    """``2(1 + 2 xi^2) / sqrt(1 + 4 xi^2)``."""
    return 2.0 * (1.0 + 2.0 * xi * xi) / math.sqrt(1.0 + 4.0 * xi * xi)


def stationary_closed_form(xi: float) -> float:
    """Maximum of ``2(eta + xi sqrt(1 - eta^2))`` over eta: ``2 sqrt(1 + xi^2)``."""
    return 2.0 * math.sqrt(1.0 + xi * xi)


def eta4_angles(xg: XiGamma) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
    """Directions with ``alpha = 0``, ``alpha' = pi/2`` and ``cos(beta) = -cos(beta') = 1/sqrt(1 + 4 xi^2)``."""
    _check_xi(xg.xi)
    eta = 1.0 / math.sqrt(1.0 + 4.0 * xg.xi**2)
    return (*_closed_form_angles(xg, eta), eta4_closed_form(xg.xi))


def stationary_angles(xg: XiGamma) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
    """Same family at the stationary point ``eta = 1/sqrt(1 + xi^2)``."""
    _check_xi(xg.xi)
    eta = 1.0 / math.sqrt(1.0 + xg.xi**2)
    return (*_closed_form_angles(xg, eta), stationary_closed_form(xg.xi))


# ------------------------------------------------------------------- optimizer

def _spherical(v: np.ndarray) -> tuple[float, float]:
    v = v / np.linalg.norm(v)
    return math.acos(max(-1.0, min(1.0, float(v[2])))), math.atan2(float(v[1]), float(v[0]))


def _from_spherical(theta: float, phi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def optimize_tensor(t: ArrayLike, backend: str | None = None) -> tuple[float, tuple[np.ndarray, ...]]:
    """Maximize the CHSH combination over unit directions for correlation tensor ``t``.

    Coarse stage: ``a = cos(al) u1 + sin(al) u2`` and ``b = cos(be) v1 + sin(be) v2``
    in the plane of the two leading singular pairs of ``t`` (for a two-block
    state these are the z-x plane and its gamma-rotated partner), on a
    ``pi/24`` grid.  Fine stage: coordinate ascent on the spherical angles of
    all four vectors down to a ``1e-8`` step.
    """
    t = np.asarray(t, dtype=np.float64)
    p, _, qt = np.linalg.svd(t)
    u1, u2, v1, v2 = p[:, 0], p[:, 1], qt[0], qt[1]
    alphas = np.arange(24) * GRID_STEP
    betas = np.arange(48) * GRID_STEP
    a_grid = np.outer(np.cos(alphas), u1) + np.outer(np.sin(alphas), u2)
    b_grid = np.outer(np.cos(betas), v1) + np.outer(np.sin(betas), v2)
    f_table = a_grid @ t @ b_grid.T
    _, i, i2, j, j2 = _kernels.grid_search(f_table, backend=backend)
    start = np.array([x for vec in (a_grid[i], a_grid[i2], b_grid[j], b_grid[j2]) for x in _spherical(vec)])
    value, angles = _kernels.coordinate_ascent(t, start, step0=GRID_STEP / 2, min_step=1e-8, backend=backend)
    vecs = tuple(_from_spherical(angles[2 * m], angles[2 * m + 1]) for m in range(4))
    return value, vecs


def _best_certificate(
    regime: Regime,
    chi: Any,
    base: ChshConfiguration,
    xg: XiGamma | None,
    optimizer: Optimizer,
    backend: str | None,
) -> tuple[float, ChshConfiguration, dict[str, Any]]:
    """Evaluate the requested candidate configurations and keep the best."""
    if optimizer not in ("grid", "eta4", "stationary"):
        raise ValueError(f"unknown optimizer {optimizer!r}")
    candidates: dict[str, ChshConfiguration] = {}
    details: dict[str, Any] = {"optimizer": optimizer}
    if xg is not None:
        details["xi"] = xg.xi
        details["gamma"] = xg.gamma
        pa, pap, pb, pbp, pval = eta4_angles(xg)
        sa, sap, sb, sbp, sval = stationary_angles(xg)
        details["eta4_closed_form"] = pval
        details["stationary_closed_form"] = sval
        if optimizer in ("grid", "eta4"):
            candidates["eta4"] = base.with_directions(pa, pap, pb, pbp)
        if optimizer in ("grid", "stationary"):
            candidates["stationary"] = base.with_directions(sa, sap, sb, sbp)
    if optimizer == "grid" or not candidates:
        t = correlation_tensor(_correlator(regime, chi, base))
        _, vecs = optimize_tensor(t, backend=backend)
        candidates["grid"] = base.with_directions(*vecs)
    values = {name: evaluate_chsh(regime, chi, cfg) for name, cfg in candidates.items()}
    for name, val in values.items():
        details[f"{name}_value"] = val
    best = max(values, key=lambda k: (values[k], k == "grid"))
    details["selected"] = best
    return values[best], candidates[best], details


def optimize_chsh_pi(
    chi: FermionPairState,
    triplet1: PauliTriplet,
    triplet2: PauliTriplet,
    xg: XiGamma | None = None,
    optimizer: Optimizer = "grid",
    backend: str | None = None,
) -> BellCertificate:
    """Best permutation-invariant CHSH value for ``chi`` with the given triplets.

    ``xg`` (two-block parameters in the triplets' frame) adds the two closed
    form configurations as candidates.
    """
    pair = ProjectorPair(triplet1.support, triplet2.support)
    report = check_exhaustion(chi, pair)
    if not report.holds:
        raise ValueError(f"state is not exhausted by the triplet supports (residual {report.residual:.3e})")
    base = ChshConfiguration(triplet1, triplet2, *np.eye(3)[[2, 0, 2, 2]])
    value, cfg, details = _best_certificate("permutation_invariant", chi, base, xg, optimizer, backend)
    return BellCertificate("permutation_invariant", value, cfg, np.asarray(chi.matrix), verdict_for(value), details=details)


# ------------------------------------------------------------------ pipelines

def schmidt_decompose(psi: ArrayLike, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """``psi = sum_k s_k p_k (x) q_k``; returns ``(s, P, Q, rank)`` with ``P, Q`` as columns."""
    m = as_operator(psi)
    p, s, vh = np.linalg.svd(m)
    q = vh.T  # psi = P diag(s) Vh, so the second-factor vectors are the rows of Vh
    rank = int(np.sum(s > tol * s[0])) if s[0] > 0 else 0
    return s, p, q, rank


def gisin_distinguishable(psi: ArrayLike, optimizer: Optimizer = "grid", backend: str | None = None, tol: float = DEFAULT_TOL) -> BellCertificate:
    """CHSH certificate for a distinguishable two-particle pure state.

    The state is filtered to its two leading Schmidt terms; Pauli triplets
    are built on the leading Schmidt vectors of each side.
    """
    m = as_operator(psi)
    m = m / np.linalg.norm(m)
    s, p, q, rank = schmidt_decompose(m, tol)
    if min(m.shape) < 2:
        return BellCertificate("distinguishable", None, None, m, "satisfies", reason="a factor has dimension < 2; no Pauli triplets exist", details={"schmidt_rank": rank})
    t1 = pauli_triplet_on(p[:, 0], p[:, 1])
    t2 = pauli_triplet_on(q[:, 0], q[:, 1])
    chi = t1.support @ m @ t2.support.T
    chi = chi / np.linalg.norm(chi)
    xg = xi_gamma_from(s[0], s[1]) if rank >= 2 else None
    base = ChshConfiguration(t1, t2, *np.eye(3)[[2, 0, 2, 2]])
    value, cfg, details = _best_certificate("distinguishable", chi, base, xg, optimizer, backend)
    details["schmidt_rank"] = rank
    details["schmidt_coefficients"] = [float(x) for x in s[: max(rank, 1)]]
    reason = "entangled: two nonzero Schmidt coefficients" if rank >= 2 else "product state: CHSH <= 2 for every configuration"
    return BellCertificate("distinguishable", value, cfg, chi, verdict_for(value), reason=reason, details=details)


def pipeline_certify(psi: FermionPairState, optimizer: Optimizer = "grid", backend: str | None = None, tol: float = DEFAULT_TOL) -> BellCertificate:
    """Slater decomposition, two-block filter, individuation, triplets, CHSH search."""
    dec = slater_decompose(psi, tol)
    d = psi.single_dim
    details: dict[str, Any] = {"slater_rank": dec.rank}
    if d < 4:
        return BellCertificate(
            "permutation_invariant", None, None, np.asarray(psi.matrix), "satisfies",
            reason="no qualifying triplets exist: single-particle dimension < 4", details=details,
        )
    u = dec.unitary
    t1 = pauli_triplet_on(u[:, 0], u[:, 2])
    t2 = pauli_triplet_on(u[:, 1], u[:, 3])
    if dec.rank == 1:
        cert = optimize_chsh_pi(psi, t1, t2, None, "grid", backend)
        if cert.violates:
            raise RuntimeError(f"decomposable state produced CHSH value {cert.value!r} > 2")
        details.update(cert.details)
        return BellCertificate(
            "permutation_invariant", cert.value, cert.configuration, cert.chi, "satisfies",
            reason="not GMW-entangled: a single wedge product satisfies every permutation-invariant CHSH inequality",
            details=details,
        )
    chi = pi_local_filter(psi, pair_from_slater_basis(dec, blocks=2), tol)
    xg = xi_gamma(dec)
    cert = optimize_chsh_pi(chi, t1, t2, xg, optimizer, backend)
    details.update(cert.details)
    return BellCertificate(
        "permutation_invariant", cert.value, cert.configuration, cert.chi, cert.verdict,
        reason="GMW-entangled: two-block filtered state violates", details=details,
    )


class SupportError(ValueError):
    """State is not supported where the location map is defined."""


def _default_range_basis(p: np.ndarray) -> np.ndarray:
    if np.allclose(p, np.diag(np.diag(p)), atol=1e-12):
        idx = np.nonzero(np.diag(p).real > 0.5)[0]
        return np.eye(p.shape[0], dtype=np.complex128)[:, idx]
    w, v = np.linalg.eigh(p)
    return v[:, w > 0.5]


def map_to_distinguishable(
    psi: FermionPairState,
    left_proj: ArrayLike,
    right_proj: ArrayLike,
    left_basis: ArrayLike | None = None,
    right_basis: ArrayLike | None = None,
    tol: float = DEFAULT_TOL,
) -> NDArray[np.complex128]:
    """Relabel a fermion pair by location: ``sqrt2 (P_L (x) P_R)`` restricted to its domain.

    Returns the ``rank(L) x rank(R)`` coefficient matrix over the given range
    bases (standard-basis order for diagonal projectors when omitted).  The
    state must lie in the range of ``P_L (x) P_R + P_R (x) P_L``.
    """
    pair = ProjectorPair(as_operator(left_proj), as_operator(right_proj))
    report = check_exhaustion(psi, pair, tol)
    if not report.holds:
        raise SupportError(f"state leaves the one-left-one-right sector (residual {report.residual:.3e})")
    lb = _default_range_basis(pair.E1) if left_basis is None else as_operator(left_basis)
    rb = _default_range_basis(pair.E2) if right_basis is None else as_operator(right_basis)
    for name, basis, proj in (("left", lb, pair.E1), ("right", rb, pair.E2)):
        if not is_isometry(basis) or np.linalg.norm(proj @ basis - basis) > tol or basis.shape[1] != round(np.trace(proj).real):
            raise ValueError(f"{name} basis is not an orthonormal basis of the projector's range")
    return math.sqrt(2.0) * lb.conj().T @ psi.matrix @ np.conj(rb)
