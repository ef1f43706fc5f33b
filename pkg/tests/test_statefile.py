import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fermibell.exterior import FermionState
from fermibell.scenarios import random_state
from fermibell.statefile import StateFileError, emit_state, locate, parse_state, parse_text

R2 = 1 / math.sqrt(2)

SINGLET = """{
  "format_version": "1.0",
  "single_dim": 2,
  "encoding": "wedge_terms",
  "payload": [
    {"coefficient": [1, 0], "indices": [1, 2]}
  ],
  "labels": {"1": "up", "2": "down"}
}
"""


def test_singlet_file():
    parsed = parse_text(SINGLET)
    a = parsed.pair().matrix
    assert a[0, 1] == pytest.approx(R2) and a[1, 0] == pytest.approx(-R2)
    assert parsed.labels == {1: "up", 2: "down"}
    assert parsed.normalization_factor == 1.0 and parsed.warnings == ()


def test_reads_path_and_stream(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(SINGLET)
    assert parse_state(p).state == parse_state(str(p)).state == parse_state(io.StringIO(SINGLET)).state


def test_normalization_reported():
    parsed = parse_text(SINGLET.replace("[1, 0]", "[3, 4]"))
    assert parsed.input_norm == pytest.approx(5.0)
    assert parsed.normalization_factor == pytest.approx(0.2)
    assert any("rescaled" in w for w in parsed.warnings)
    assert parsed.state.norm() == pytest.approx(1.0)


def test_duplicate_index_sets_summed_with_warning():
    text = SINGLET.replace('{"coefficient": [1, 0], "indices": [1, 2]}', '{"coefficient": [1, 0], "indices": [1, 2]},\n    {"coefficient": [1, 0], "indices": [2, 1]},\n    {"coefficient": [1, 0], "indices": [1, 2]}')
    parsed = parse_text(text)
    assert parsed.state.terms == {(0, 1): pytest.approx(1.0)}
    assert parsed.input_norm == pytest.approx(1.0)
    assert len(parsed.warnings) == 2


def _err(text) -> StateFileError:
    with pytest.raises(StateFileError) as info:
        parse_text(text)
    return info.value


def test_index_out_of_range_is_located():
    e = _err(SINGLET.replace("[1, 2]", "[1, 3]"))
    assert e.line == 6 and e.path == ("payload", 0, "indices", 1)
    assert "out of range" in str(e)


def test_repeated_index_rejected():
    e = _err(SINGLET.replace("[1, 2]", "[2, 2]"))
    assert e.line == 6 and "repeated index" in e.message


def test_json_syntax_error_has_position():
    e = _err(SINGLET.replace('"single_dim": 2,', '"single_dim": 2'))
    assert (e.line, e.column) == (4, 3)


def test_schema_errors_are_located():
    e = _err(SINGLET.replace('"coefficient": [1, 0]', '"coefficient": [1]'))
    assert e.path == ("payload", 0, "coefficient") and e.line == 6
    e = _err(SINGLET.replace('"1.0"', '"2.0"'))
    assert e.path == ("format_version",) and e.line == 2
    e = _err(SINGLET.replace('"encoding": "wedge_terms"', '"encoding": "sparse"'))
    assert e.path == ("encoding",)


def test_duplicate_keys_rejected():
    _err(SINGLET.replace('"single_dim": 2,', '"single_dim": 2, "single_dim": 3,'))


def test_mixed_degree_rejected():
    e = _err(SINGLET.replace('{"coefficient": [1, 0], "indices": [1, 2]}', '{"coefficient": [1, 0], "indices": [1, 2]}, {"coefficient": [1, 0], "indices": [1]}'))
    assert "expected 2" in e.message


def test_zero_state_rejected():
    _err(SINGLET.replace("[1, 0]", "[0, 0]"))


def test_dense_not_antisymmetric_rejected():
    text = json.dumps({"format_version": "1.0", "single_dim": 2, "encoding": "dense_matrix", "payload": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}, indent=2)
    e = _err(text)
    assert "not antisymmetric" in e.message and e.line is not None


def test_dense_shape_rejected():
    text = json.dumps({"format_version": "1.0", "single_dim": 2, "encoding": "dense_matrix", "payload": [[[0, 0], [1, 0]], [[-1, 0]]]})
    assert "2 x 2" in _err(text).message


def test_missing_file():
    with pytest.raises(StateFileError):
        parse_state("/nonexistent/state.json")


def test_three_particle_terms():
    text = SINGLET.replace('"single_dim": 2', '"single_dim": 3').replace("[1, 2]", "[3, 1, 2]").replace(',\n  "labels": {"1": "up", "2": "down"}', "")
    parsed = parse_text(text)
    assert parsed.state.n_particles == 3 and parsed.state.terms == {(0, 1, 2): pytest.approx(1.0)}


@pytest.mark.parametrize("encoding", ["wedge_terms", "dense_matrix"])
@given(st.integers(2, 8), st.integers(0, 2**31))
def test_round_trip(encoding, d, seed):
    psi = random_state(d, max(1, d // 2), seed)
    back = parse_text(emit_state(psi, encoding, {1: "a"})).pair()
    assert np.abs(back.matrix - psi.matrix).max() <= 1e-12


def test_round_trip_fermion_state_with_labels():
    st_ = FermionState(4, 2, {(0, 3): R2, (1, 2): -R2})
    parsed = parse_text(emit_state(st_, labels={1: "L↑", 4: "R↓"}))
    assert parsed.labels == {1: "L↑", 4: "R↓"}
    assert (parsed.state - st_).norm() < 1e-15


def test_label_index_checked():
    e = _err(SINGLET.replace('"2": "down"', '"3": "down"'))
    assert "exceeds" in e.message


def test_locate():
    text = '{\n  "a": [1,\n    {"b": 2}]\n}'
    assert locate(text, ("a", 1, "b")) == (3, 11)
    assert locate(text, ("zz",)) is None
