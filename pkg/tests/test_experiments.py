import json

import numpy as np
import pytest

from dudenet.association import Direction
from dudenet.experiments import (
    CrossingError,
    ExperimentSpec,
    SpecError,
    apply_swept,
    crossing_point,
    decoupling_gain_sweep,
    library_spec,
    load_spec,
    run_experiment,
    _crossing_ratio,
)
from dudenet.params import TABLE_I, db_to_linear


def test_crossing_point_interpolates():
    x = [0.0, 10.0, 20.0, 30.0]
    pm = [0.9, 0.7, 0.4, 0.2]
    ps = [0.1, 0.3, 0.6, 0.8]
    # diff = -0.8, -0.4, 0.2: zero at 10 + 10 * 0.4 / 0.6
    value, multiple = crossing_point(x, pm, ps)
    assert value == pytest.approx(10 + 10 * 0.4 / 0.6)
    assert not multiple


def test_crossing_point_flags_multiple_changes():
    x = [0.0, 10.0, 20.0, 30.0]
    value, multiple = crossing_point(x, [0.6, 0.4, 0.6, 0.4], [0.4, 0.6, 0.4, 0.6])
    assert value == pytest.approx(5.0) and multiple


def test_crossing_point_exact_zero():
    assert crossing_point([1.0, 2.0, 3.0], [0.7, 0.5, 0.3], [0.3, 0.5, 0.7]) == (2.0, False)


def test_identical_curves_raise():
    with pytest.raises(CrossingError):
        crossing_point([1.0, 2.0], [0.6, 0.6], [0.4, 0.4])
    with pytest.raises(ValueError):
        crossing_point([1.0, 2.0], [0.6], [0.4])


def test_uplink_crosses_before_downlink():
    p = TABLE_I.replace(g_s_max=db_to_linear(18.0))
    assert _crossing_ratio(Direction.UL, p) < _crossing_ratio(Direction.DL, p)


def test_larger_los_ball_gives_no_smaller_gain():
    rows = decoupling_gain_sweep(TABLE_I, alpha_n=(4.0,), alpha_m=(3.0,), mu=(100.0, 200.0),
                                 ratios=(1, 10, 50, 100))
    assert rows[1]["max_gain"] >= rows[0]["max_gain"]
    assert all(0 <= r["max_gain"] <= 1 for r in rows)


def test_spec_validation():
    with pytest.raises(SpecError):
        ExperimentSpec("x", "ratio", (), ("decoupling_brp",))
    with pytest.raises(SpecError):
        ExperimentSpec("x", "ratio", (2.0, 1.0), ("decoupling_brp",))
    with pytest.raises(SpecError):
        ExperimentSpec("x", "ratio", (1.0,), ("no_such_metric",))
    with pytest.raises(SpecError):
        ExperimentSpec("x", "ratio", (1.0,), ("sinr_ccdf_dl",))
    with pytest.raises(SpecError):
        ExperimentSpec("x", "nonsense", (1.0,), ("decoupling_brp",))
    with pytest.raises(SpecError):
        ExperimentSpec("x", "ratio", (1.0,), ("decoupling_brp",), engines=("gpu",))
    with pytest.raises(SpecError):
        library_spec("fig99")


def test_apply_swept():
    assert apply_swept(TABLE_I, "ratio", 20.0).lambda_s == pytest.approx(20 * TABLE_I.lambda_m)
    assert apply_swept(TABLE_I, "tau_db", 3.0) is TABLE_I
    assert apply_swept(TABLE_I, "t_s", 10.0).t_s == pytest.approx(10.0)


def test_load_spec_round_trip(tmp_path):
    doc = {"name": "mini", "swept": "ratio", "grid": [1, 10], "metrics": ["decoupling_brp"],
           "n_drops": 50, "engines": ["analytic"]}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    (spec,) = load_spec(path)
    assert spec.grid == (1.0, 10.0) and spec.engines == ("analytic",)
    with pytest.raises(SpecError):
        load_spec({"name": "broken"})


def _mini(tmp_path, name="mini"):
    spec = ExperimentSpec(name, "tau_db", (-5.0, 0.0, 10.0),
                          ("sinr_ccdf_dl", "sinr_ccdf_ul"), n_drops=60, seed=3)
    return run_experiment(spec, TABLE_I, tmp_path)


def test_outputs_are_reproducible(tmp_path):
    a = _mini(tmp_path / "a")
    b = _mini(tmp_path / "b")
    names = sorted(p.name for p in a.files)
    assert names == sorted(p.name for p in b.files)
    for p in a.files:
        if p.suffix == ".csv":
            assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()
            xs = [float(line.split(",")[0]) for line in p.read_text().splitlines()[1:]]
            assert xs == sorted(xs)
    report = json.loads((tmp_path / "a" / "mini_report.json").read_text())
    assert report["experiment"] == "mini" and report["n_drops"] == 60
    assert set(report["comparison"]) == {"sinr_ccdf_dl", "sinr_ccdf_ul"}
    assert report["passed"] == a.passed


def test_analytic_only_crossing_experiment(tmp_path):
    spec = library_spec("fig3")[0].replace(grid=(10.0, 20.0))
    rep = run_experiment(spec, None, tmp_path)
    ul = rep.curves[("crossing_ratio_ul", "analytic")].estimate
    dl = rep.curves[("crossing_ratio_dl", "analytic")].estimate
    assert np.all(ul < dl) and not rep.comparison


def test_association_experiment_agrees(tmp_path):
    spec = library_spec("fig2a")[0].replace(grid=(10.0,), n_drops=3000, seed=4)
    rep = run_experiment(spec, None, tmp_path)
    assert rep.comparison["decoupling_brp"]["max_abs_discrepancy"] < 0.05


def test_crossing_point_two_point_grid():
    # diff goes -0.6 -> 0.2, so the zero sits three quarters of the way along.
    assert crossing_point([10.0, 20.0], [0.8, 0.4], [0.2, 0.6]) == (pytest.approx(17.5), False)
