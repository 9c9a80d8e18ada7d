import csv
import io as _io
import json

import pytest

from filippov2d import io, scenarios
from filippov2d.cli import main, trajectory_csv
from filippov2d.errors import IoError
from filippov2d.hybrid import simulate
from filippov2d.policy import Policy
from filippov2d.svg import emit_svg, render


@pytest.fixture
def sysfile(tmp_path):
    def write(name):
        p = tmp_path / f"{name}.json"
        p.write_text(scenarios.scenario_text(name))
        return str(p)
    return write


def test_analyze_prints_partition(sysfile, tmp_path, capsys):
    out = tmp_path / "a.json"
    assert main(["analyze", sysfile("three-zone"), "--json", str(out)]) == 0
    text = capsys.readouterr().out
    assert "6 intervals" in text and "Sliding" in text
    rep = json.loads(out.read_text())
    assert rep["hypotheses"]["ok"] and len(rep["partition"]["intervals"]) == 6


def test_simulate_writes_csv(sysfile, tmp_path):
    out = tmp_path / "t.csv"
    code = main(["simulate", sysfile("linear-center-center"), "--p0", "-2", "-2.2",
                 "--t-budget", "50", "--csv", str(out)])
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "x", "y", "mode", "arc_index", "event_flag"]
    ts = [float(r[0]) for r in rows[1:]]
    assert ts == sorted(ts) and ts[0] == 0.0


def test_trajectory_csv_marks_events(tz):
    traj = simulate(tz, (-1.0, 0.0), 10.0, Policy.scripted("X", True))
    rows = list(csv.DictReader(_io.StringIO(trajectory_csv(traj))))
    assert {r["mode"] for r in rows} <= {"FlowX", "FlowY", "Slide"}
    assert max(int(r["arc_index"]) for r in rows) == len(traj.arcs) - 1
    assert any(r["event_flag"] for r in rows)


def test_classify_expect(sysfile):
    path = sysfile("relay-template")
    args = ["classify-omega", path, "--p0", "3", "1"]
    assert main(args + ["--expect", "PseudoCycle(Crossing)"]) == 0
    assert main(args + ["--expect", "PseudoCycle"]) == 0
    assert main(args + ["--expect", "EquilibriumX"]) == 2


def test_chaos_check(sysfile, capsys):
    assert main(["chaos-check", sysfile("linear-center-center"), "--samples", "0"]) == 0
    assert "Lambda: area 3.7" in capsys.readouterr().out
    assert main(["chaos-check", sysfile("three-zone"), "--samples", "0"]) == 2


def test_scenario_list(capsys):
    assert main(["scenario", "--list"]) == 0
    assert capsys.readouterr().out.split() == list(scenarios.NAMES)


def test_scenario_run(capsys):
    assert main(["scenario", "relay-template", "--no-probes"]) == 0
    assert "MISMATCH" not in capsys.readouterr().out


def test_errors_exit_one(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["analyze", str(bad)]) == 1
    assert main(["simulate", str(bad)]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["scenario", "four-zone"]) == 1


def test_strict_exit_three(tmp_path):
    # X.f = y^2 - 1 has two tangencies on the line
    d = {"f": [[1, 0, 1]], "X": {"u": [[0, 2, 1], [0, 0, -1]], "v": [[0, 0, 1]]},
         "Y": {"u": [[0, 0, 1]], "v": [[0, 0, -1]]},
         "sigma": {"kind": "vertical-line", "x": 0}, "K": [-3, 3, -3, 3]}
    p = tmp_path / "z3.json"
    p.write_text(json.dumps(d))
    assert main(["analyze", str(p), "--strict"]) == 3
    # without --strict the partition itself still refuses it
    assert main(["analyze", str(p)]) == 1


def test_render_contains_layers(cc, cc_lambda):
    traj = simulate(cc, (-2.0, -2.2), 30.0, Policy.stay_sliding())
    text = render(cc, traj, cc_lambda, title="a<b")
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert "<polyline" in text and "a&lt;b" in text


def test_emit_svg(tmp_path, tz):
    p = tmp_path / "tz.svg"
    assert emit_svg(p, tz) == p.read_text()
    with pytest.raises(IoError):
        emit_svg(tmp_path / "no" / "dir" / "x.svg", tz)


def test_cli_svg_output(sysfile, tmp_path):
    p = tmp_path / "out.svg"
    assert main(["analyze", sysfile("fold-fold-connection"), "--svg", str(p)]) == 0
    assert p.read_text().startswith("<svg")
