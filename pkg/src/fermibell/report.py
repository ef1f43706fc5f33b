"""Analysis reports: assembly, machine and human renderings, and independent verification.

Machine reports are JSON with sorted keys.  Floats are rounded to
``DECIMALS`` places and every quantity derived from a certificate is
recomputed from the *rounded* embedded data, so a report verifies against
itself and golden files are byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from . import __version__
from ._config import DEFAULT_TOL
from .bell import (
    BellCertificate,
    ChshConfiguration,
    PauliTriplet,
    correlation_distinguishable,
    correlation_pi,
    chsh_value,
    gisin_distinguishable,
    map_to_distinguishable,
    pipeline_certify,
    verdict_for,
)
from .individuation import ProjectorPair, ZeroProbabilityError, check_exhaustion, individuate, pi_local_filter
from .slater import FermionPairState, slater_decompose
from .statefile import ParsedState, StateFileError, parse_text, state_document

REPORT_VERSION = "1.0"
DECIMALS = 12
VERIFY_TOL = 1e-8
SECTIONS = ("slater", "individuation", "bell", "distinguishable_map")


def rnd(x: float) -> float:
    """Round for emission; also turns -0.0 into 0.0."""
    return round(float(x), DECIMALS) + 0.0


def cpair(z: complex) -> list[float]:
    return [rnd(z.real), rnd(z.imag)]


def cvec(v: Iterable[complex]) -> list[list[float]]:
    return [cpair(complex(z)) for z in v]


def cmat(m: np.ndarray) -> list[list[list[float]]]:
    return [cvec(row) for row in m]


def _from_pairs(x: Any) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    return a[..., 0] + 1j * a[..., 1]


def _rounded_state_doc(parsed: ParsedState) -> dict[str, Any]:
    doc = state_document(parsed.state, "wedge_terms", parsed.labels)
    for term in doc["payload"]:
        term["coefficient"] = [rnd(c) for c in term["coefficient"]]
    return doc


# ------------------------------------------------------------- certificates

def _correlation_fn(regime: str, chi: Any, cfg: ChshConfiguration):
    if regime == "permutation_invariant":
        return lambda a, b: correlation_pi(chi, cfg, a, b)
    return lambda a, b: correlation_distinguishable(chi, cfg, a, b)


def _correlations(regime: str, chi: Any, cfg: ChshConfiguration) -> dict[str, float]:
    corr = _correlation_fn(regime, chi, cfg)
    a, ap, b, bp = cfg.directions()
    return {"ab": corr(a, b), "ab_prime": corr(a, bp), "a_prime_b": corr(ap, b), "a_prime_b_prime": corr(ap, bp)}


def _value_of(c: dict[str, float]) -> float:
    return chsh_value(c["ab"], c["ab_prime"], c["a_prime_b"], c["a_prime_b_prime"])


def _rebuild_triplets(cert_doc: dict[str, Any]) -> tuple[PauliTriplet, PauliTriplet]:
    c = cert_doc["configuration"]
    return tuple(PauliTriplet(_from_pairs(c[t]["u"]), _from_pairs(c[t]["v"])) for t in ("triplet1", "triplet2"))  # type: ignore[return-value]


def _rebuild(cert_doc: dict[str, Any]) -> tuple[Any, ChshConfiguration]:
    """Chi and configuration from a certificate document (directions renormalized)."""
    regime = cert_doc["regime"]
    chi_m = _from_pairs(cert_doc["chi"])
    chi = FermionPairState.from_matrix(chi_m, normalize=True) if regime == "permutation_invariant" else chi_m / np.linalg.norm(chi_m)
    c = cert_doc["configuration"]
    t1, t2 = _rebuild_triplets(cert_doc)
    dirs = []
    for name in ("a", "a_prime", "b", "b_prime"):
        x = np.asarray(c[name], dtype=np.float64)
        n = float(np.linalg.norm(x))
        if x.shape != (3,) or abs(n - 1.0) > VERIFY_TOL:
            raise ValueError(f"direction {name} is not a unit 3-vector")
        dirs.append(x / n)
    return chi, ChshConfiguration(t1, t2, *dirs)


def certificate_document(cert: BellCertificate) -> dict[str, Any]:
    doc: dict[str, Any] = {"regime": cert.regime, "reason": cert.reason}
    doc["details"] = {k: (rnd(v) if isinstance(v, float) else [rnd(x) for x in v] if isinstance(v, list) else v) for k, v in sorted(cert.details.items())}
    if cert.configuration is None:
        doc.update(value=None, verdict=cert.verdict, configuration=None, correlations=None,
                   chi=None if cert.chi is None else cmat(np.asarray(cert.chi)))
        return doc
    cfg = cert.configuration
    doc["chi"] = cmat(np.asarray(cert.chi))
    doc["configuration"] = {
        "triplet1": {"u": cvec(cfg.triplet1.u), "v": cvec(cfg.triplet1.v)},
        "triplet2": {"u": cvec(cfg.triplet2.u), "v": cvec(cfg.triplet2.v)},
        **{name: [rnd(x) for x in getattr(cfg, name)] for name in ("a", "a_prime", "b", "b_prime")},
    }
    chi, rcfg = _rebuild(doc)
    corr = _correlations(cert.regime, chi, rcfg)
    value = _value_of(corr)
    doc["correlations"] = {k: rnd(v) for k, v in corr.items()}
    doc["value"] = rnd(value)
    verdict = verdict_for(value)
    if cert.verdict == "satisfies" and verdict == "violates":
        raise RuntimeError("rounded configuration turns a satisfying certificate into a violation")
    doc["verdict"] = verdict
    return doc


# ------------------------------------------------------------------- reports

@dataclass
class AnalysisOptions:
    optimizer: str = "grid"
    tolerance: float = DEFAULT_TOL
    left: tuple[int, ...] = ()
    right: tuple[int, ...] = ()
    sections: tuple[str, ...] = SECTIONS
    source: str = ""
    backend: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)


def _location_projector(d: int, idx: tuple[int, ...]) -> np.ndarray:
    p = np.zeros((d, d), dtype=np.complex128)
    for i in idx:
        if not 1 <= i <= d:
            raise StateFileError(f"location index {i} out of range 1..{d}")
        p[i - 1, i - 1] = 1.0
    return p


def distinguishable_map_section(pair: FermionPairState, left: tuple[int, ...], right: tuple[int, ...], optimizer: str, tol: float, backend: str | None = None) -> dict[str, Any]:
    d = pair.single_dim
    m = map_to_distinguishable(pair, _location_projector(d, left), _location_projector(d, right), tol=tol)
    cert = gisin_distinguishable(m, optimizer=optimizer, backend=backend, tol=tol)
    return {
        "left": list(left),
        "right": list(right),
        "matrix": cmat(m),
        "norm": rnd(float(np.linalg.norm(m))),
        "certificate": certificate_document(cert),
    }


def build_report(parsed: ParsedState, opts: AnalysisOptions) -> dict[str, Any]:
    if parsed.state.n_particles != 2:
        raise StateFileError(f"analysis needs a two-particle state, got {parsed.state.n_particles} particles")
    pair = parsed.pair()
    tol = opts.tolerance
    report: dict[str, Any] = {
        "report_version": REPORT_VERSION,
        "generator": {"name": "fermibell", "version": __version__},
        "settings": {"optimizer": opts.optimizer, "tolerance": opts.tolerance},
        "input": {
            "source": opts.source,
            "encoding": parsed.encoding,
            "normalization_factor": rnd(parsed.normalization_factor),
            "warnings": list(parsed.warnings),
        },
        "state": _rounded_state_doc(parsed),
    }
    dec = slater_decompose(pair, tol)
    if "slater" in opts.sections:
        report["slater"] = {
            "rank": dec.rank,
            "gmw_entangled": dec.rank >= 2,
            "coefficients": cvec(dec.coefficients[: dec.rank]),
            "magnitudes": [rnd(abs(c)) for c in dec.coefficients[: dec.rank]],
            "basis": cmat(dec.unitary.T),
        }
    if "individuation" in opts.sections:
        ipair = individuate(pair, tol)
        report["individuation"] = {
            "ranks": list(ipair.dims),
            "orthogonality": rnd(ipair.orthogonality),
            "exhaustion_residual": rnd(check_exhaustion(pair, ipair, tol).residual),
            "constituents_pure": dec.rank == 1,
        }
    if "bell" in opts.sections:
        report["bell"] = certificate_document(pipeline_certify(pair, opts.optimizer, opts.backend, tol))
    if "distinguishable_map" in opts.sections and opts.left and opts.right:
        report["distinguishable_map"] = distinguishable_map_section(pair, opts.left, opts.right, opts.optimizer, tol, opts.backend)
    report.update(opts.extra)
    return report


def render_machine(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _fmt(x: Any) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


def _fmt_c(p: list[float]) -> str:
    re, im = p
    if abs(im) < 5e-7:
        return f"{re:+.6f}"
    return f"{re:+.6f}{im:+.6f}i"


def _render_cert(cert: dict[str, Any], indent: str = "  ") -> list[str]:
    lines = [f"{indent}regime: {cert['regime']}", f"{indent}verdict: {cert['verdict']}", f"{indent}CHSH value: {_fmt(cert['value'])}"]
    if cert.get("reason"):
        lines.append(f"{indent}reason: {cert['reason']}")
    det = cert.get("details", {})
    for key, label in (
        ("xi", "xi"),
        ("gamma", "gamma"),
        ("eta4_closed_form", "closed form, eta = 1/sqrt(1+4 xi^2)"),
        ("stationary_closed_form", "closed form, eta = 1/sqrt(1+xi^2)"),
        ("grid_value", "optimized value"),
    ):
        if key in det:
            lines.append(f"{indent}{label}: {_fmt(det[key])}")
    cfg = cert.get("configuration")
    if cfg:
        for name in ("a", "a_prime", "b", "b_prime"):
            lines.append(f"{indent}{name}: ({', '.join(f'{x:+.6f}' for x in cfg[name])})")
    return lines


def render_human(report: dict[str, Any]) -> str:
    st = report["state"]
    labels = st.get("labels", {})
    lines = [f"fermibell {report['generator']['version']} report ({report['input']['source'] or 'state'})"]
    for w in report["input"]["warnings"]:
        lines.append(f"warning: {w}")
    lines.append(f"state: d = {st['single_dim']}, {len(st['payload'])} wedge term(s)")
    for term in st["payload"]:
        names = " ^ ".join(labels.get(str(i), f"e{i}") for i in term["indices"])
        lines.append(f"  {_fmt_c(term['coefficient'])}  {names}")
    if "slater" in report:
        s = report["slater"]
        lines.append(f"Slater rank: {s['rank']} ({'GMW-entangled' if s['gmw_entangled'] else 'not GMW-entangled'})")
        lines.append("  |c|: (" + ", ".join(f"{m:.6f}" for m in s["magnitudes"]) + ")")
    if "individuation" in report:
        i = report["individuation"]
        lines.append(f"individuating pair: ranks {tuple(i['ranks'])}, orthogonality {i['orthogonality']:.3e}, exhaustion residual {i['exhaustion_residual']:.3e}")
    if "bell" in report:
        lines.append("Bell certificate:")
        lines += _render_cert(report["bell"])
    if "distinguishable_map" in report:
        m = report["distinguishable_map"]
        lines.append(f"location map (left {m['left']}, right {m['right']}), image norm {m['norm']:.6f}:")
        for row in m["matrix"]:
            lines.append("  [" + ", ".join(_fmt_c(z) for z in row) + "]")
        lines += _render_cert(m["certificate"])
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------- verification

@dataclass
class VerifyResult:
    ok: bool
    problems: list[str]
    checked: list[str]


def _check_certificate(cert: dict[str, Any], expected_chi: np.ndarray | None, label: str, problems: list[str], checked: list[str], single_dim: int) -> None:
    for key in ("regime", "verdict", "value", "configuration", "correlations", "chi"):
        if key not in cert:
            problems.append(f"{label}: missing field {key!r}")
            return
    regime = cert["regime"]
    if regime not in ("permutation_invariant", "distinguishable"):
        problems.append(f"{label}: unknown regime {regime!r}")
        return
    if cert["configuration"] is None:
        if cert["value"] is not None or cert["verdict"] != "satisfies":
            problems.append(f"{label}: certificate without configuration must be a satisfaction with no value")
        elif regime == "permutation_invariant" and single_dim >= 4:
            problems.append(f"{label}: configuration missing although triplets exist (d = {single_dim})")
        checked.append(f"{label}: no configuration (d = {single_dim})")
        return
    try:
        chi, cfg = _rebuild(cert)
        corr = _correlations(regime, chi, cfg)
    except (ValueError, KeyError, TypeError, RuntimeError) as exc:
        problems.append(f"{label}: cannot rebuild configuration: {exc}")
        return
    value = _value_of(corr)
    reported = cert["correlations"] or {}
    for k, v in corr.items():
        if k not in reported or not isinstance(reported[k], (int, float)) or abs(reported[k] - v) > VERIFY_TOL:
            problems.append(f"{label}: correlation {k} recomputes to {v:.12f}, reported {reported.get(k)!r}")
    if not isinstance(cert["value"], (int, float)) or abs(cert["value"] - value) > VERIFY_TOL:
        problems.append(f"{label}: CHSH value recomputes to {value:.12f}, reported {cert['value']!r}")
    if cert["verdict"] != verdict_for(value):
        problems.append(f"{label}: verdict {cert['verdict']!r} contradicts recomputed value {value:.12f}")
    if expected_chi is not None:
        got = chi.matrix if isinstance(chi, FermionPairState) else chi
        if got.shape != expected_chi.shape or np.linalg.norm(got - expected_chi) > VERIFY_TOL:
            problems.append(f"{label}: chi is not the filtered input state")
    checked.append(f"{label}: I = {value:.12f} ({verdict_for(value)})")


def verify_report(report: dict[str, Any]) -> VerifyResult:
    """Recompute every certificate in ``report`` from its embedded data."""
    problems: list[str] = []
    checked: list[str] = []
    if report.get("report_version") != REPORT_VERSION:
        return VerifyResult(False, [f"unsupported report_version {report.get('report_version')!r}"], checked)
    if "state" not in report or "bell" not in report and "distinguishable_map" not in report:
        return VerifyResult(False, ["report embeds no state or no certificate"], checked)
    try:
        parsed = parse_text(json.dumps(report["state"]))
        pair = parsed.pair()
    except (StateFileError, ValueError) as exc:
        return VerifyResult(False, [f"embedded state is invalid: {exc}"], checked)
    d = pair.single_dim
    dec = slater_decompose(pair)
    if "slater" in report and report["slater"].get("rank") != dec.rank:
        problems.append(f"slater: rank recomputes to {dec.rank}, reported {report['slater'].get('rank')!r}")

    if "bell" in report:
        cert = report["bell"]
        expected = None
        if cert.get("configuration"):
            try:
                t1, t2 = _rebuild_triplets(cert)
                expected = pi_local_filter(pair, ProjectorPair(t1.support, t2.support)).matrix
            except (ValueError, KeyError, TypeError, ZeroProbabilityError) as exc:
                problems.append(f"bell: triplet supports do not filter the input state: {exc}")
        _check_certificate(cert, expected, "bell", problems, checked, d)
        gmw = dec.rank >= 2
        if cert.get("verdict") == "violates" and not gmw:
            problems.append("bell: violation reported for a state of Slater rank 1")

    if "distinguishable_map" in report:
        sec = report["distinguishable_map"]
        try:
            m = map_to_distinguishable(pair, _location_projector(d, tuple(sec["left"])), _location_projector(d, tuple(sec["right"])))
            if np.linalg.norm(_from_pairs(sec["matrix"]) - m) > VERIFY_TOL:
                problems.append("distinguishable_map: image matrix does not recompute")
            cert = sec["certificate"]
            expected = None
            if cert.get("configuration"):
                t1, t2 = _rebuild_triplets(cert)
                f = t1.support @ m @ t2.support.T
                expected = f / np.linalg.norm(f)
            _check_certificate(cert, expected, "distinguishable_map", problems, checked, d)
        except (ValueError, KeyError, TypeError) as exc:
            problems.append(f"distinguishable_map: {exc}")
    return VerifyResult(not problems, problems, checked)

