import csv
import json
import math
import xml.etree.ElementTree as ET

import pytest

from quav.cli import main, parse_seeds
from quav.errors import PipelineError, ScenarioParseError, ScenarioValidationError
from quav.geo import GeoPoint, UtmPoint, project_to_utm, unproject_from_utm
from quav.harness.benchmark import (CSV_COLUMNS, read_benchmark_csv, run_benchmark, summarize,
                                    write_benchmark_csv)
from quav.harness.output import emit_geojson, load_geojson_path, result_to_geojson
from quav.harness.pipeline import PlanResult, path_metrics, run_planner, run_quav
from quav.harness.plots import emit_plot_svg, plot_paths
from quav.harness.scenario import (QaoaSettings, bundled_scenarios, load_scenario,
                                   parse_scenario)

ORIGIN = project_to_utm(GeoPoint(23.13, 113.26), 49)
FAST = {"qubits": 8, "layers": 2, "steps": 8, "decode_shots": 256}


def geo(x, y):
    g = unproject_from_utm(UtmPoint(ORIGIN.easting + x, ORIGIN.northing + y, 49))
    return {"lat": g.lat, "lon": g.lon}


def scenario_json(end=(60.0, 0.0), obstacles=(), **extra):
    feats = []
    for ring in obstacles:
        coords = [[geo(x, y)["lon"], geo(x, y)["lat"]] for x, y in ring]
        feats.append({"type": "Feature", "properties": {},
                      "geometry": {"type": "Polygon", "coordinates": [coords + coords[:1]]}})
    d = {"name": "t", "start": geo(0.0, 0.0), "end": geo(*end)}
    if feats:
        d["obstacles"] = {"type": "FeatureCollection", "features": feats}
    d.update(extra)
    return json.dumps(d, indent=2)


BLOCK = [(25.0, -8.0), (35.0, -8.0), (35.0, 8.0), (25.0, 8.0)]


# --- scenario parsing -------------------------------------------------------------

def test_minimal_scenario_gets_defaults():
    s = parse_scenario(scenario_json())
    assert s.qaoa == QaoaSettings()
    assert s.cost.buffer_distance == 5.0
    assert s.obstacles == []
    assert s.distance == pytest.approx(60.0, abs=1e-6)


def test_start_inside_obstacle_rejected():
    ring = [(-5.0, -5.0), (5.0, -5.0), (5.0, 5.0), (-5.0, 5.0)]
    with pytest.raises(ScenarioValidationError, match="start in obstacle"):
        parse_scenario(scenario_json(obstacles=[ring]))


def test_end_within_buffer_rejected():
    ring = [(62.0, -5.0), (70.0, -5.0), (70.0, 5.0), (62.0, 5.0)]
    with pytest.raises(ScenarioValidationError, match="end in obstacle"):
        parse_scenario(scenario_json(obstacles=[ring]))


def test_unknown_key_rejected():
    with pytest.raises(ScenarioParseError, match="bogus"):
        parse_scenario(scenario_json(bogus=1))
    with pytest.raises(ScenarioParseError, match="qaoa"):
        parse_scenario(scenario_json(qaoa={"qbits": 4}))


def test_parse_error_reports_line():
    text = scenario_json().replace('"end"', '"end" :: ', 1)
    line = next(i for i, t in enumerate(text.splitlines(), 1) if "::" in t)
    with pytest.raises(ScenarioParseError, match=f"line {line},"):
        parse_scenario(text)


def test_invalid_values_rejected():
    with pytest.raises(ScenarioValidationError):
        parse_scenario(scenario_json(qaoa={"qubits": 30}))
    with pytest.raises(ScenarioValidationError):
        parse_scenario(scenario_json(qaoa={"encoding": "graph"}))


def test_bundled_scenarios_load():
    names = bundled_scenarios()
    assert names == ["corridor", "dense_cluster", "diagonal_gap", "l_shape", "open_field",
                     "single_block"]
    for n in names:
        s = load_scenario(n)
        assert s.name == n and s.obstacles


# --- pipeline ---------------------------------------------------------------------

def test_run_quav_is_deterministic():
    s = parse_scenario(scenario_json(obstacles=[BLOCK], qaoa=FAST))
    a, b = run_quav(s, 3), run_quav(s, 3)
    assert a.waypoints == b.waypoints
    assert a.trace.losses == b.trace.losses
    assert a.feasible and a.buffer_violations == 0


def test_run_quav_without_obstacles_is_straight():
    s = parse_scenario(scenario_json(qaoa=FAST))
    r = run_quav(s, 0)
    assert r.length <= 1.02 * s.distance
    assert r.feasible


def test_pipeline_error_names_stage(monkeypatch):
    import quav.harness.pipeline as pl

    def boom(*a, **k):
        raise RuntimeError("optimizer exploded")

    monkeypatch.setattr(pl, "optimize", boom)
    s = parse_scenario(scenario_json(qaoa=FAST))
    with pytest.raises(PipelineError) as ei:
        run_quav(s, 0)
    assert ei.value.stage == "optimize"
    assert str(ei.value).startswith("[optimize]")


def test_failed_planner_becomes_infeasible_row():
    s = parse_scenario(scenario_json(obstacles=[BLOCK], planning={"rrt": {"max_iterations": 2}}))
    r = run_planner(s, "rrt", 0)
    assert not r.feasible and math.isnan(r.length)
    assert "MaxIterationsExceeded" in r.diagnostic


def test_path_metrics_counts_buffer_violations():
    from quav.geo import ObstaclePolygon

    box = ObstaclePolygon(((0, 0), (1, 0), (1, 1), (0, 1)))
    assert path_metrics([(-5, 2), (8, 2), (8, 20)], [box], 5.0) == (True, 1)
    assert path_metrics([(-5, 0.5), (5, 0.5)], [box], 5.0) == (False, 1)


# --- benchmark CSV ----------------------------------------------------------------

def _row(planner="astar", seed=0, length=10.0, feasible=True):
    return PlanResult(planner, "t", seed, [(0.0, 0.0), (length, 0.0)], [], length, feasible, 0)


def test_benchmark_csv_header_and_append(tmp_path):
    path = tmp_path / "b.csv"
    write_benchmark_csv([_row(seed=0)], path)
    write_benchmark_csv([_row(seed=1)], path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [r[2] for r in rows[1:]] == ["0", "1"]
    assert read_benchmark_csv(path)[1]["length_m"] == "10.000000"


def test_benchmark_csv_refuses_foreign_header(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        write_benchmark_csv([_row()], path)


def test_summary_uses_feasible_runs_only():
    rows = [_row("rrt", 0, 10.0), _row("rrt", 1, 30.0), _row("rrt", 2, math.nan, False)]
    sm = summarize(rows)["rrt"]
    assert (sm.runs, sm.feasible, sm.median_length) == (3, 2, 20.0)


def test_run_benchmark_rows_sorted():
    s = parse_scenario(scenario_json(obstacles=[BLOCK]))
    rows = run_benchmark(s, [1, 0], planners=("rrt", "astar"))
    assert [(r.planner, r.seed) for r in rows] == [("astar", 0), ("astar", 1), ("rrt", 0),
                                                   ("rrt", 1)]


# --- GeoJSON and SVG ----------------------------------------------------------------

def test_geojson_roundtrip_and_axis_order(tmp_path):
    s = parse_scenario(scenario_json(obstacles=[BLOCK]))
    r = run_planner(s, "astar", 0)
    path = tmp_path / "p.geojson"
    emit_geojson(r, path, s)
    back = load_geojson_path(path)
    assert len(back) == len(r.latlon)
    for (la, lo), (lb, lob) in zip(r.latlon, back):
        assert abs(la - lb) < 1e-9 and abs(lo - lob) < 1e-9
    coords = json.loads(path.read_text())["features"][0]["geometry"]["coordinates"]
    assert coords[0][0] == pytest.approx(113.26) and coords[0][1] == pytest.approx(23.13)


def test_geojson_rejects_empty_path():
    with pytest.raises(ValueError):
        result_to_geojson(PlanResult("quav", "t", 0, [], [], math.nan, False, 0))


def _svg_paths(root):
    ns = "{http://www.w3.org/2000/svg}"
    return {g.get("id"): g for g in root.iter(f"{ns}g") if g.get("id")}


def test_svg_is_well_formed_with_obstacles_and_path(tmp_path):
    s = parse_scenario(scenario_json(obstacles=[BLOCK, [(40, 20), (50, 20), (45, 28)]]))
    r = run_planner(s, "astar", 0)
    out = tmp_path / "p.svg"
    emit_plot_svg(r, s, out)
    root = ET.parse(out).getroot()
    groups = _svg_paths(root)
    assert sum(k.startswith("obstacle-") for k in groups) == 2
    assert "path" in groups and "start" in groups and "end" in groups
    vb = [float(v) for v in root.get("viewBox").split()]
    for el in groups["path"].iter():
        d = el.get("d")
        if d:
            nums = [float(t) for t in d.replace("M", " ").replace("L", " ").split()
                    if t.replace(".", "").replace("-", "").isdigit()]
            xs, ys = nums[0::2], nums[1::2]
            assert all(vb[0] <= x <= vb[0] + vb[2] for x in xs)
            assert all(vb[1] <= y <= vb[1] + vb[3] for y in ys)


def test_overlay_svg_names_each_planner(tmp_path):
    s = parse_scenario(scenario_json(obstacles=[BLOCK]))
    rows = [run_planner(s, p, 0) for p in ("astar", "rrt")]
    plot_paths(rows, s, tmp_path / "o.svg")
    groups = _svg_paths(ET.parse(tmp_path / "o.svg").getroot())
    assert {"path-astar", "path-rrt"} <= set(groups)


def test_svg_is_byte_stable(tmp_path):
    s = parse_scenario(scenario_json(obstacles=[BLOCK]))
    r = run_planner(s, "astar", 0)
    emit_plot_svg(r, s, tmp_path / "a.svg")
    emit_plot_svg(r, s, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


# --- CLI ------------------------------------------------------------------------------

def test_parse_seeds():
    assert parse_seeds("0..3") == [0, 1, 2, 3]
    assert parse_seeds("4,7") == [4, 7]


def test_cli_plan_writes_outputs(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text(scenario_json(obstacles=[BLOCK], qaoa=FAST))
    out = tmp_path / "out"
    assert main(["plan", str(f), "--out", str(out), "--seed", "1"]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"results.csv", "t_quav_s1.geojson", "t_quav_s1.svg", "t_quav_s1_loss.csv",
            "t_quav_s1_loss.svg", "t_quav_s1_params.txt"} <= names
    assert capsys.readouterr().out.splitlines()[0] == ",".join(CSV_COLUMNS)


def test_cli_validation_exit_code(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    assert main(["plan", str(f), "--out", str(tmp_path)]) == 2


def test_cli_infeasible_exit_code(tmp_path):
    f = tmp_path / "s.json"
    f.write_text(scenario_json(obstacles=[BLOCK], planning={"rrt": {"max_iterations": 2}}))
    assert main(["plan", str(f), "--planner", "rrt", "--out", str(tmp_path / "o")]) == 3


def test_cli_benchmark_and_list(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text(scenario_json(obstacles=[BLOCK], qaoa=FAST))
    assert main(["benchmark", str(f), "--seeds", "0..1", "--out", str(tmp_path)]) == 0
    rows = read_benchmark_csv(tmp_path / "benchmark.csv")
    assert len(rows) == 6
    capsys.readouterr()
    assert main(["list"]) == 0
    assert "single_block" in capsys.readouterr().out
