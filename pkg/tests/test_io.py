import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fracdiffeq import io as fio
from fracdiffeq.checks import Check
from fracdiffeq.exceptions import UsageError
from fracdiffeq.linop import DenseOperator, Laplacian1D


def test_format_float():
    assert fio.format_float(1.0) == "1.0"
    assert fio.format_float(0.1) == "0.10000000000000001"
    assert fio.format_float(1e300) == "1.0000000000000001e+300"
    assert fio.format_float(math.nan) == "NaN"
    assert fio.format_float(-math.inf) == "-Infinity"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert float(fio.format_float(x)) == x


def test_dumps_sorted_and_deterministic():
    doc = fio.result_document({"b": 1, "a": np.float64(0.5)},
                              {"v": np.arange(3.0), "m": np.eye(2)},
                              [Check("x", 1e-12, 1e-9)])
    text = fio.dumps(doc)
    assert text == fio.dumps(doc)
    assert text.endswith("\n")
    parsed = json.loads(text)
    assert list(parsed) == ["checks", "data", "meta"]
    assert parsed["data"]["m"] == [[1.0, 0.0], [0.0, 1.0]]
    assert parsed["checks"][0]["passed"] is True
    with pytest.raises(UsageError):
        fio.dumps({"x": object()})


@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 4)),
              elements=st.floats(-1e10, 1e10)))
def test_solution_csv_round_trip(u):
    text = fio.solution_csv(u)
    assert text.splitlines()[0].startswith("n,component_0")
    np.testing.assert_array_equal(fio.load_solution_csv(text), u)


def test_solution_csv_rejects_bad_indices(tmp_path):
    with pytest.raises(UsageError):
        fio.load_solution_csv("n,component_0\n0,1.0\n2,3.0\n")
    p = tmp_path / "u.csv"
    p.write_text(fio.solution_csv(np.ones((3, 2))))
    assert fio.load_solution_csv(p).shape == (3, 2)


def test_sidecar_path():
    assert str(fio.sidecar_path("out/sol.csv")) == "out/sol.json"
    assert str(fio.sidecar_path("sol.txt")) == "sol.txt.json"


def _write(tmp_path, text, name="cfg.json"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_schema_error_reports_line(tmp_path):
    text = ('{\n  "alpha": 1.5,\n  "operator": {"type": "zero", "dim": 2},\n'
            '  "u0": [0, 0],\n  "u1": [0, 0],\n  "horizon": 2\n}\n')
    p = _write(tmp_path, text)
    with pytest.raises(UsageError, match=r"cfg\.json:6: horizon"):
        fio.load_json_config(p, fio.PROBLEM_SCHEMA)


def test_nested_schema_error_line(tmp_path):
    text = ('{\n  "alpha": 1.5,\n  "operator": {\n    "type": "dense",\n'
            '    "matrix": "oops"\n  },\n  "u0": [0],\n  "u1": [0],\n  "horizon": 8\n}\n')
    p = _write(tmp_path, text)
    with pytest.raises(UsageError, match=r"cfg\.json:5: "):
        fio.load_json_config(p, fio.PROBLEM_SCHEMA)


def test_json_syntax_error_position(tmp_path):
    p = _write(tmp_path, '{\n  "alpha": 1.5,\n  "horizon": ,\n}\n')
    with pytest.raises(UsageError, match=r"cfg\.json:3:\d+: invalid JSON"):
        fio.load_json_config(p, fio.PROBLEM_SCHEMA)
    with pytest.raises(UsageError):
        fio.load_json_config(tmp_path / "missing.json", fio.PROBLEM_SCHEMA)


def test_unknown_key_rejected(tmp_path):
    text = json.dumps({"alpha": 1.5, "operator": {"type": "zero", "dim": 1}, "u0": [0],
                       "u1": [0], "horizon": 8, "extra": 1}, indent=2)
    with pytest.raises(UsageError, match="extra"):
        fio.load_json_config(_write(tmp_path, text), fio.PROBLEM_SCHEMA)


def test_problem_from_config_variants():
    base = {"alpha": 1.5, "u0": [0.0, 0.0], "u1": [0.0, 0.0], "horizon": 10}
    P, W, method = fio.problem_from_config({**base, "operator": {"type": "zero", "dim": 2}})
    assert P.kind == "homogeneous" and method == "auto" and W.kind == "n_factorial"
    cfg = {**base, "operator": {"type": "laplacian1d", "interval": [0.0, math.pi], "points": 2},
           "forcing": {"type": "saturating", "payload": {"scale": 0.5, "pulse": [1.0, 2.0]}},
           "weight": {"kind": "factorial"}}
    P, W, _ = fio.problem_from_config(cfg)
    assert isinstance(P.A, Laplacian1D) and P.kind == "nonlinear" and P.forcing.L == 1.0
    assert W.kind == "factorial"
    cfg = {**base, "operator": {"type": "dense", "matrix": [[0.1, 0], [0, 0.2]]},
           "forcing": {"type": "sequence", "payload": [[1, 0]] * 9}}
    P, _, _ = fio.problem_from_config(cfg)
    assert isinstance(P.A, DenseOperator) and P.kind == "inhomogeneous"
    bad = {**cfg, "forcing": {"type": "saturating", "payload": {"scale": 1, "pulse": [1.0]}}}
    with pytest.raises(UsageError):
        fio.problem_from_config(bad)
    with pytest.raises(UsageError, match="operator"):
        fio.problem_from_config({**base, "operator": {"type": "laplacian1d", "points": 3}})


def test_saturating_lipschitz_constant():
    f = fio._saturating(0.7)
    assert f.L == pytest.approx(1.4)
    assert f.check_lipschitz(3, 20, rng=np.random.default_rng(0)) <= 1.4
