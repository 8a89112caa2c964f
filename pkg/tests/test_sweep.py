import csv
import io
import json

import pytest

from manev_isosceles import manifold, sweep
from manev_isosceles.errors import IoFailure, ManevError
from manev_isosceles.manifold import TOPOLOGY_ORDER


def _rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def _plan(**kw):
    data = {"axes": [{"name": "C", "start": 0, "stop": 70, "num": 29}],
            "analyses": ["classify", "equilibria"]}
    data.update(kw)
    return sweep.plan_from_dict(data)


def test_grid_and_indexing():
    plan = sweep.plan_from_dict({"axes": [{"name": "M", "values": [5, 10]},
                                          {"name": "C", "start": 0, "stop": 1, "num": 3}]})
    assert plan.size == 6
    assert plan.point(0)["M"] == 5 and plan.point(0)["C"] == 0
    assert plan.point(4)["M"] == 10 and plan.point(4)["C"] == 0.5


@pytest.mark.parametrize("bad", [
    {"axes": [{"name": "C", "start": 0, "stop": 1, "num": 0}]},
    {"axes": [{"name": "C", "start": 0, "stop": float("inf"), "num": 3}]},
    {"axes": [{"name": "mu", "values": [1]}]},
    {"axes": [{"name": "C", "values": [1]}, {"name": "C", "values": [2]}]},
    {"analyses": ["nope"]},
    {"params": {"mu": 3}},
    {"workers": 0},
])
def test_invalid_plans(bad):
    with pytest.raises(ManevError):
        sweep.plan_from_dict(bad)


def test_class_sequence_is_monotone(tmp_path):
    out = tmp_path / "r.csv"
    sweep.run_sweep(_plan(), out, workers=1)
    classes = [r["topology"] for r in _rows(out)]
    order = [TOPOLOGY_ORDER.index(manifold.TopologyClass(c)) for c in classes]
    assert order == sorted(order)
    assert len(set(classes)) >= 3


def test_e_point_column_flips_at_lower_threshold(tmp_path):
    out = tmp_path / "r.csv"
    sweep.run_sweep(_plan(), out, workers=1)
    rows = _rows(out)
    flips = [i for i in range(1, len(rows)) if rows[i]["has_E"] != rows[i - 1]["has_E"]]
    assert len(flips) == 1
    i = flips[0]
    assert float(rows[i - 1]["C"]) < 1000**0.5 < float(rows[i]["C"])


def test_rerun_and_parallel_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    plan = _plan(analyses=["classify", "equilibria", "spectra", "homographic"])
    sweep.run_sweep(plan, a, workers=1)
    sweep.run_sweep(plan, b, workers=3)
    text = a.read_text()
    assert text == b.read_text()
    sweep.run_sweep(plan, a, workers=2)
    assert a.read_text() == text
    assert text.startswith(f"# manev-sweep format={sweep.FORMAT_VERSION} ")


def test_resume_after_interruption(tmp_path):
    out = tmp_path / "r.csv"
    plan = _plan()
    sweep.run_sweep(plan, out, workers=1)
    full = out.read_text()
    lines = full.splitlines(keepends=True)
    out.write_text("".join(lines[:12]) + lines[12][:7])  # truncated mid-record
    calls = []
    sweep.run_sweep(plan, out, workers=1, progress=lambda d, n: calls.append(d))
    assert out.read_text() == full
    assert len(calls) == plan.size - 10  # ten complete records were reused


def test_foreign_results_file_is_not_clobbered(tmp_path):
    out = tmp_path / "r.csv"
    sweep.run_sweep(_plan(), out, workers=1)
    with pytest.raises(ManevError, match="different plan"):
        sweep.run_sweep(_plan(analyses=["classify"]), out, workers=1)


def test_invalid_points_are_recorded_as_skipped(tmp_path):
    plan = sweep.plan_from_dict({"axes": [{"name": "gamma", "values": [3.0, 1.0, 0.01]}],
                                 "analyses": ["classify"]})
    recs = sweep.run_sweep(plan, None, workers=1)
    assert [r["status"] for r in recs] == ["ok", "skipped", "skipped"]
    assert "gamma != gamma0" in recs[1]["error"]
    assert "16*gamma > gamma0" in recs[2]["error"]


def test_domain_errors_inline(tmp_path):
    plan = sweep.plan_from_dict({"axes": [{"name": "C", "values": [100.0, 300.0]}],
                                 "analyses": ["classify", "homographic"]})
    recs = sweep.run_sweep(plan, tmp_path / "r.csv", workers=1)
    assert recs[0]["status"] == "ok" and recs[0]["homographic_class"] == "Periodic"
    assert recs[1]["status"] == "error" and "homographic" in recs[1]["error"]
    assert recs[1]["topology"] == "TwoLinesOnly"


def test_unwritable_output(tmp_path):
    with pytest.raises(IoFailure):
        sweep.run_sweep(_plan(), tmp_path / "missing" / "r.csv", workers=1)


def test_plan_file_loading(tmp_path):
    f = tmp_path / "plan.json"
    f.write_text(json.dumps({"axes": [{"name": "C", "values": [1]}], "params": {"M": 5}}))
    plan = sweep.load_plan(f)
    assert plan.base["M"] == 5.0 and plan.size == 1
    with pytest.raises(IoFailure):
        sweep.load_plan(tmp_path / "absent.json")
    f.write_text("{")
    with pytest.raises(ManevError):
        sweep.load_plan(f)
