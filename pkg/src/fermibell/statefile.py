"""Versioned JSON state files: parsing with positioned diagnostics, and emission.

Two encodings are supported (see ``docs/state_format.md``):

* ``wedge_terms``: ``payload`` is a list of ``{"coefficient": [re, im], "indices": [i, j, ...]}``
  with 1-based single-particle indices; each term is a normalized wedge of basis vectors.
* ``dense_matrix``: ``payload`` is the ``d x d`` antisymmetric coefficient matrix of a
  two-particle state, row-major, each entry an ``[re, im]`` pair.
"""

from __future__ import annotations

import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any

import jsonschema
import numpy as np

from ._config import DEFAULT_TOL
from .exterior import FermionState
from .slater import FermionPairState, from_wedge_terms

FORMAT_VERSION = "1.0"

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

STATE_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format_version", "single_dim", "encoding", "payload"],
    "additionalProperties": False,
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "single_dim": {"type": "integer", "minimum": 1},
        "encoding": {"enum": ["wedge_terms", "dense_matrix"]},
        "payload": {"type": "array"},
        "labels": {"type": "object", "patternProperties": {"^[1-9][0-9]*$": {"type": "string"}}, "additionalProperties": False},
    },
    "allOf": [
        {
            "if": {"properties": {"encoding": {"const": "wedge_terms"}}},
            "then": {
                "properties": {
                    "payload": {
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["coefficient", "indices"],
                            "additionalProperties": False,
                            "properties": {
                                "coefficient": _COMPLEX,
                                "indices": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                            },
                        },
                    }
                }
            },
        },
        {
            "if": {"properties": {"encoding": {"const": "dense_matrix"}}},
            "then": {"properties": {"payload": {"items": {"type": "array", "items": _COMPLEX}}}},
        },
    ],
}


class StateFileError(ValueError):
    """Malformed state file; carries the JSON path and the text position when known."""

    def __init__(self, message: str, path: tuple[Any, ...] = (), line: int | None = None, column: int | None = None, source: str = "<state>"):
        self.message = message
        self.path = tuple(path)
        self.line = line
        self.column = column
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.source
        if self.line is not None:
            where += f":{self.line}:{self.column}"
        loc = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in self.path)
        return f"{where}: {loc}: {self.message}"


# ------------------------------------------------------------------ positions

def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def locate(text: str, path: tuple[Any, ...]) -> tuple[int, int] | None:
    """1-based (line, column) of the value at ``path`` in a JSON document, or None."""
    dec = json.JSONDecoder()
    i = _skip_ws(text, 0)
    try:
        for key in path:
            if isinstance(key, int):
                if text[i] != "[":
                    return None
                i = _skip_ws(text, i + 1)
                for _ in range(key):
                    _, i = dec.raw_decode(text, i)
                    i = _skip_ws(text, i)
                    if text[i] != ",":
                        return None
                    i = _skip_ws(text, i + 1)
            else:
                if text[i] != "{":
                    return None
                i = _skip_ws(text, i + 1)
                while True:
                    k, i = dec.raw_decode(text, i)
                    i = _skip_ws(text, _skip_ws(text, i) + 1)  # past ':'
                    if k == key:
                        break
                    _, i = dec.raw_decode(text, i)
                    i = _skip_ws(text, i)
                    if text[i] != ",":
                        return None
                    i = _skip_ws(text, i + 1)
    except (json.JSONDecodeError, IndexError):
        return None
    line = text.count("\n", 0, i) + 1
    return line, i - (text.rfind("\n", 0, i) + 1) + 1


# -------------------------------------------------------------------- parsing

@dataclass(frozen=True)
class ParsedState:
    state: FermionState
    encoding: str
    input_norm: float
    labels: dict[int, str] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def normalization_factor(self) -> float:
        """Factor the input amplitudes were multiplied by (1 for normalized input)."""
        return 1.0 / self.input_norm

    def pair(self) -> FermionPairState:
        return from_wedge_terms(self.state)


def _reject_duplicate_keys(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for k, v in pairs:
        if k in out:
            raise ValueError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _read(source: str | Path | IO[str]) -> tuple[str, str]:
    if isinstance(source, (str, Path)):
        if str(source) == "-":
            return sys.stdin.read(), "<stdin>"
        try:
            return Path(source).read_text(encoding="utf-8"), str(source)
        except OSError as exc:
            raise StateFileError(f"cannot read file: {exc.strerror}", source=str(source)) from exc
    return source.read(), getattr(source, "name", "<stream>")


def parse_state(source: str | Path | IO[str], tol: float = DEFAULT_TOL) -> ParsedState:
    """Read, validate and normalize a state file (a path, ``"-"`` for stdin, or a text stream)."""
    text, name = _read(source)

    def fail(msg: str, path: tuple[Any, ...] = ()) -> StateFileError:
        pos = locate(text, path)
        return StateFileError(msg, path, *(pos or (None, None)), source=name)

    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise StateFileError(exc.msg, (), exc.lineno, exc.colno, source=name) from exc
    except ValueError as exc:
        raise StateFileError(str(exc), source=name) from exc

    validator = jsonschema.Draft202012Validator(STATE_SCHEMA)
    errors = list(validator.iter_errors(doc))
    if errors:
        # the deepest error points closest to the offending token
        err = max(errors, key=lambda e: len(e.absolute_path))
        raise fail(err.message, tuple(err.absolute_path))

    d = doc["single_dim"]
    labels = {int(k): v for k, v in doc.get("labels", {}).items()}
    for k in labels:
        if k > d:
            raise fail(f"label index {k} exceeds single_dim {d}", ("labels", str(k)))
    warnings: list[str] = []
    payload = doc["payload"]

    if doc["encoding"] == "wedge_terms":
        degree = len(payload[0]["indices"])
        seen: dict[tuple[int, ...], int] = {}
        terms = []
        for n, entry in enumerate(payload):
            idx = entry["indices"]
            if len(idx) != degree:
                raise fail(f"term has {len(idx)} indices, expected {degree}", ("payload", n, "indices"))
            for m, i in enumerate(idx):
                if not 1 <= i <= d:
                    raise fail(f"index {i} out of range 1..{d}", ("payload", n, "indices", m))
            if len(set(idx)) != len(idx):
                raise fail(f"repeated index in {idx}: a wedge with a repeated factor vanishes", ("payload", n, "indices"))
            key = tuple(sorted(idx))
            if key in seen:
                warnings.append(f"payload[{n}] repeats the index set of payload[{seen[key]}]; coefficients summed")
            seen.setdefault(key, n)
            re, im = entry["coefficient"]
            terms.append((complex(re, im), [i - 1 for i in idx]))
        if degree > d:
            raise fail(f"{degree} particles do not fit in dimension {d}", ("payload", 0, "indices"))
        state = FermionState.from_terms(d, terms)
    else:
        if len(payload) != d or any(len(row) != d for row in payload):
            bad = next((r for r, row in enumerate(payload) if len(row) != d), None)
            raise fail(f"dense payload must be {d} x {d}", ("payload",) if bad is None or len(payload) != d else ("payload", bad))
        a = np.array([[complex(re, im) for re, im in row] for row in payload], dtype=np.complex128)
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        asym = float(np.max(np.abs(a + a.T))) if a.size else 0.0
        if asym > tol * max(scale, 1.0):
            r, c = np.unravel_index(int(np.argmax(np.abs(a + a.T))), a.shape)
            raise fail(f"matrix is not antisymmetric: |A[{r + 1},{c + 1}] + A[{c + 1},{r + 1}]| = {asym:.3e}", ("payload", int(r), int(c)))
        a = 0.5 * (a - a.T)
        state = FermionState(d, 2, {(i, j): math.sqrt(2.0) * a[i, j] for i in range(d) for j in range(i + 1, d)})

    n = state.norm()
    if n == 0.0:
        raise fail("state is zero", ("payload",))
    if abs(n - 1.0) > tol:
        warnings.append(f"input norm {n:.12g}; amplitudes rescaled by {1.0 / n:.12g}")
    return ParsedState(state.normalized(), doc["encoding"], n, labels, tuple(warnings))


# ------------------------------------------------------------------- emission

def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def state_document(state: FermionState | FermionPairState, encoding: str = "wedge_terms", labels: dict[int, str] | None = None) -> dict[str, Any]:
    if isinstance(state, FermionPairState):
        pair, state = state, state.to_fermion_state()
    else:
        pair = None
    doc: dict[str, Any] = {"format_version": FORMAT_VERSION, "single_dim": state.single_dim, "encoding": encoding}
    if encoding == "wedge_terms":
        doc["payload"] = [{"coefficient": _pair(c), "indices": [i + 1 for i in idx]} for idx, c in state.terms.items()]
    elif encoding == "dense_matrix":
        a = (pair or from_wedge_terms(state)).matrix
        doc["payload"] = [[_pair(z) for z in row] for row in a]
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    if labels:
        doc["labels"] = {str(k): v for k, v in sorted(labels.items())}
    return doc


def emit_state(state: FermionState | FermionPairState, encoding: str = "wedge_terms", labels: dict[int, str] | None = None) -> str:
    """Serialize with full float precision, so ``parse_state(emit_state(x))`` reproduces ``x``.

    One payload entry per line keeps files diff-able.
    """
    doc = state_document(state, encoding, labels)
    lines = []
    for key, val in doc.items():
        if key == "payload":
            rows = ",\n".join("    " + json.dumps(item, ensure_ascii=False) for item in val)
            lines.append(f'  "payload": [\n{rows}\n  ]')
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(val, ensure_ascii=False)}")
    return "{\n" + ",\n".join(lines) + "\n}\n"


def parse_text(text: str, tol: float = DEFAULT_TOL) -> ParsedState:
    return parse_state(io.StringIO(text), tol)


__all__ = [
    "FORMAT_VERSION",
    "ParsedState",
    "STATE_SCHEMA",
    "StateFileError",
    "emit_state",
    "locate",
    "parse_state",
    "parse_text",
    "state_document",
]
