import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from bayesfpr.core import SoftDataset
from bayesfpr.denoising import NoisyDataset
from bayesfpr.errors import ConfigError, DomainError
from bayesfpr.harness import ExperimentConfig, run_replicates
from bayesfpr.io import dumps, import_csv, load_dataset, load_json, read_report, save_dataset, write_report

tmp_settings = settings(max_examples=100, suppress_health_check=[HealthCheck.function_scoped_fixture])


def same(a, b):
    assert type(a) is type(b)
    assert a.x.dtype == b.x.dtype
    np.testing.assert_array_equal(a.x, b.x)
    assert a.y.tobytes() == b.y.tobytes()
    if isinstance(a, NoisyDataset):
        assert a.bounds == b.bounds and a.label_kind == b.label_kind


@tmp_settings
@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.booleans())
def test_soft_round_trip_bit_exact(tmp_path, ys, categorical):
    n = len(ys)
    x = np.arange(n) % 3 if categorical else np.linspace(0, 1, 2 * n).reshape(n, 2) / 3
    d = SoftDataset(x, ys)
    save_dataset(d, tmp_path / "d.jsonl")
    same(d, load_dataset(tmp_path / "d.jsonl"))


@tmp_settings
@given(st.lists(st.floats(-0.25, 1.25), min_size=1, max_size=30))
def test_noisy_round_trip_bit_exact(tmp_path, ys):
    d = NoisyDataset(np.arange(len(ys)) % 4, ys, (-0.25, 1.25))
    save_dataset(d, tmp_path / "d.jsonl")
    same(d, load_dataset(tmp_path / "d.jsonl"))


def test_binary_round_trip(tmp_path):
    d = NoisyDataset(np.array([0, 1, 1]), [0.0, 1.0, 1.0], label_kind="binary")
    save_dataset(d, tmp_path / "b.jsonl", categories=5)
    header = json.loads((tmp_path / "b.jsonl").read_text().splitlines()[0])
    assert header == {"schema": "binary", "categories": 5}
    same(d, load_dataset(tmp_path / "b.jsonl"))


@pytest.mark.parametrize(
    "lines, msg",
    [
        (['{"schema": "soft", "categories": 2}', '{"x": 0, "y": 1.5}'], "0, 1"),
        (['{"schema": "noisy", "bounds": [0, 1], "categories": 2}', '{"x": 0, "y": 1.5}'], "bounds"),
        (['{"schema": "binary", "categories": 2}', '{"x": 0, "y": 0.5}'], "0 or 1"),
        (['{"schema": "soft", "dim": 2}', '{"x": [0.1], "y": 0.5}'], "2 numbers"),
        (['{"schema": "soft", "categories": 2}', '{"x": [0.1], "y": 0.5}'], "integer"),
        (['{"schema": "soft", "categories": 2}', '{"x": 2, "y": 0.5}'], "integer"),
        (['{"schema": "soft", "dim": 1, "categories": 2}', '{"x": 0, "y": 0.5}'], "exactly one"),
        (['{"schema": "fuzzy", "categories": 2}', '{"x": 0, "y": 0.5}'], "schema"),
        (['{"schema": "noisy", "categories": 2}', '{"x": 0, "y": 0.5}'], "bounds"),
        (['{"schema": "soft", "categories": 2}'], "no samples"),
        (['{"schema": "soft", "categories": 2}', "{oops"], "malformed"),
    ],
)
def test_load_validation(tmp_path, lines, msg):
    p = tmp_path / "bad.jsonl"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(DomainError, match=msg):
        load_dataset(p)


def test_import_csv(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x1,y,x0\n0.5,0.2,0.1\n0.7,0.9,0.3\n")
    d = import_csv(p, "soft")
    np.testing.assert_array_equal(d.x, [[0.1, 0.5], [0.3, 0.7]])
    p.write_text("x,y\n0,1\n2,0\n")
    b = import_csv(p, "binary")
    assert b.label_kind == "binary" and b.x.dtype == np.int64
    n = import_csv(p, "noisy", (-0.5, 1.5))
    assert n.bounds == (-0.5, 1.5)
    p.write_text("x0,x2,y\n0.1,0.2,0.3\n")
    with pytest.raises(DomainError, match="x0"):
        import_csv(p, "soft")


def test_load_json_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_json(tmp_path / "missing.json", "config")
    (tmp_path / "c.json").write_text("{nope")
    with pytest.raises(ConfigError, match="malformed"):
        load_json(tmp_path / "c.json", "config")


def test_dumps_numbers():
    assert dumps(0.1) == "0.10000000000000001"
    assert dumps(2.0) == "2.0"
    assert dumps(1e-300) == "1e-300"
    assert dumps(3) == "3"
    assert dumps(np.float64(0.5)) == "0.5"
    assert dumps({"a": [1, 2.5], "b": None, "c": True}) == '{\n  "a": [1, 2.5],\n  "b": null,\n  "c": true\n}'
    with pytest.raises(ValueError):
        dumps(float("nan"))


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_dumps_float_round_trips(v):
    assert json.loads(dumps(v)) == v


def test_report_round_trip(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "model": {"kind": "finite", "p_x": [0.5, 0.5], "posterior": [0.8, 0.3]},
        "n_grid": [30, 60], "replicates": 100, "seed": 8,
        "estimators": [{"name": "psi1", "checks": ["bias", "variance"]}],
    })
    rep = run_replicates(cfg)
    write_report(rep, tmp_path / "r.json")
    back = read_report(tmp_path / "r.json")
    assert back["spec_version"] == "1.0"
    assert back == json.loads(json.dumps(rep.to_dict()))
    assert "runtime_seconds" not in back
    assert ExperimentConfig.from_dict(back["config"]).to_dict() == back["config"]
    write_report(rep, tmp_path / "t.json", include_timing=True)
    assert "runtime_seconds" in read_report(tmp_path / "t.json")
