import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ctnn import network_io
from ctnn.cli import run
from ctnn.core import Edge, Network, UnitConfig
from ctnn.signal import TimeGrid, read_csv

from conftest import two_tone


def write_signal(path, t, *cols):
    lines = ["t," + ",".join(f"x{i + 1}" for i in range(len(cols))) if len(cols) > 1 else "t,value"]
    for row in zip(t, *cols):
        lines.append(",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_table(path):
    rows = path.read_text().splitlines()
    return rows[0], np.array([[float(c) for c in r.split(",")] for r in rows[1:]])


@pytest.fixture
def linear_files(tmp_path):
    net = Network(units={"out": UnitConfig(alpha=None)}, inputs=["x"], output="out",
                  edges=[Edge("x", "out", 0.0)])
    network_io.save_network(net, tmp_path / "lin.ctnn")
    t = np.linspace(0, 1, 11)
    write_signal(tmp_path / "x.csv", t, 1 + t)
    write_signal(tmp_path / "y.csv", t, 2 * (1 + t))
    return tmp_path


def test_eval_writes_signal(linear_files):
    net = Network(units={"out": UnitConfig(alpha=None)}, inputs=["x"], output="out",
                  edges=[Edge("x", "out", 3.0)])
    network_io.save_network(net, linear_files / "w3.ctnn")
    out = linear_files / "out.csv"
    assert run(["eval", "--net", str(linear_files / "w3.ctnn"), "--in", str(linear_files / "x.csv"),
                "--grid", "0:1:0.25", "--out", str(out)]) == 0
    header, data = read_table(out)
    assert header == "t,value"
    np.testing.assert_allclose(data[:, 0], [0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(data[:, 1], 3 * (1 + data[:, 0]), atol=1e-12)


def test_sawtooth_synthesis_converges_to_hybrid_oracle(tmp_path):
    h, T = 1.0, 1.0
    assert run(["hybrid-sim", "--hmax", "1", "--T", "1", "--t-end", "4", "--step", "0.01",
                "--out", str(tmp_path / "traj.csv"), "--signal", str(tmp_path / "arm.csv")]) == 0
    _, (oracle,) = read_csv(tmp_path / "arm.csv")
    grid = TimeGrid(0.0, 3.0, 0.01)
    t = grid.points()
    rms = []
    for n in (1, 2, 4, 8, 16):
        net = tmp_path / f"saw{n}.ctnn"
        assert run(["synth-sawtooth", "--h", "1", "--T", "1", "--n", str(n), "--out", str(net)]) == 0
        out = tmp_path / f"saw{n}.csv"
        assert run(["eval", "--net", str(net), "--grid", "0:3:0.01", "--out", str(out)]) == 0
        _, data = read_table(out)
        np.testing.assert_array_equal(data[:, 0], t)
        rms.append(math.sqrt(np.mean((data[:, 1] - oracle(t)) ** 2)))
    assert all(b < a for a, b in zip(rms, rms[1:]))
    # with no jump inside a sample interval the midpoint value is exact to rounding
    _, data = read_table(tmp_path / "saw16.csv")
    mid = data[np.isclose(data[:, 0] % T, T / 2)]
    np.testing.assert_allclose(mid[:, 1], h / 2, atol=1e-12)


def test_analyze_period(tmp_path):
    t = np.arange(0, 70.0 + 1e-9, 0.005)
    write_signal(tmp_path / "tri.csv", t, [two_tone(s) for s in t])
    args = ["analyze-period", "--in", str(tmp_path / "tri.csv"), "--tmin", "1", "--tmax", "14",
            "--step", "0.01", "--window", "50", "--out", str(tmp_path / "scan.csv"),
            "--minima", str(tmp_path / "min.csv")]
    assert run(args) == 0
    header, scan = read_table(tmp_path / "scan.csv")
    assert header == "T,E" and scan.shape == (1301, 2)
    header, mins = read_table(tmp_path / "min.csv")
    assert header == "T,E,rank"
    assert mins[0, 0] == pytest.approx(12.0, abs=0.05) and mins[1, 0] == pytest.approx(5.0, abs=0.05)
    np.testing.assert_array_equal(mins[:, 2], np.arange(1, len(mins) + 1))


def test_train(linear_files):
    d = linear_files
    args = ["train", "--net", str(d / "lin.ctnn"), "--in", str(d / "x.csv"), "--target", str(d / "y.csv"),
            "--eta", "0.05", "--max-iters", "300", "--fd-step", "1e-5",
            "--out", str(d / "trained.ctnn"), "--trace", str(d / "trace.csv")]
    assert run(args) == 0
    trained = network_io.load_network(d / "trained.ctnn")
    assert trained.edges[0].weight == pytest.approx(2.0, abs=1e-3)
    header, trace = read_table(d / "trace.csv")
    assert header == "iter,E" and trace[0, 0] == 0 and trace[-1, 1] < trace[0, 1]


def test_logic_demo(tmp_path, capsys):
    assert run(["logic-demo", "--gate", "ODD", "--arity", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "gate,inputs,output,truth" and len(lines) == 9
    for line in lines[1:]:
        _, inputs, _, truth = line.split(",")
        n_true = inputs.split().count("+1")
        assert truth == ("true" if n_true % 2 else "false")
    assert run(["logic-demo", "--out", str(tmp_path / "all.csv"), "--table", str(tmp_path / "g.csv")]) == 0
    assert (tmp_path / "g.csv").read_text().splitlines()[0] == "name,arity,a,b,c"


def test_hybrid_sim(tmp_path):
    assert run(["hybrid-sim", "--hmax", "2", "--T", "0.5", "--t-end", "2.2", "--step", "0.1",
                "--out", str(tmp_path / "traj.csv"), "--events", str(tmp_path / "ev.csv")]) == 0
    rows = (tmp_path / "ev.csv").read_text().splitlines()
    assert rows == ["t,event", "0.5,lower", "1,lower", "1.5,lower", "2,lower"]
    assert (tmp_path / "traj.csv").read_text().startswith("t,state,h\n0,raise,0\n")


def test_hybrid_sim_from_file(tmp_path):
    spec = {"format": "ctnn-hybrid", "version": 1, "variables": {"x": 0.0}, "initial_state": "up",
            "states": [{"id": "up", "flow": {"x": 1.0}, "invariant": ["x <= 2"]},
                       {"id": "down", "flow": {"x": -0.5}, "invariant": ["x >= 0"]}],
            "transitions": [{"from": "up", "to": "down", "guard": ["x >= 2"], "event": "peak"},
                            {"from": "down", "to": "up", "guard": ["x <= 0"], "event": "floor"}]}
    (tmp_path / "ha.json").write_text(json.dumps(spec))
    assert run(["hybrid-sim", "--automaton", str(tmp_path / "ha.json"), "--t-end", "7", "--step", "1",
                "--out", str(tmp_path / "t.csv"), "--events", str(tmp_path / "e.csv")]) == 0
    assert (tmp_path / "e.csv").read_text() == "t,event\n2,peak\n6,floor\n"


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["eval", "--net", "missing.ctnn", "--grid", "0:1:0.1", "--out", "o.csv"],
    ["synth-sawtooth", "--h", "1", "--T", "-1", "--n", "3", "--out", "o.ctnn"],
    ["synth-sawtooth", "--h", "1", "--T", "1", "--n", "0", "--out", "o.ctnn"],
    ["hybrid-sim", "--t-end", "1", "--step", "0.1", "--out", "/no/such/dir/x.csv"],
])
def test_usage_errors_exit_1(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 1


def test_bad_grid_exit_1(linear_files):
    assert run(["eval", "--net", str(linear_files / "lin.ctnn"), "--in", str(linear_files / "x.csv"),
                "--grid", "1:0:0.1", "--out", str(linear_files / "o.csv")]) == 1


def test_compute_errors_exit_2(tmp_path):
    cyc = {"format": "ctnn-network", "version": 1, "inputs": [], "output": "b", "on_neurons": {"on": 1.0},
           "units": [{"id": "a"}, {"id": "b"}],
           "edges": [{"from": "on", "to": "a", "weight": 1.0}, {"from": "a", "to": "b", "weight": 1.0},
                     {"from": "b", "to": "a", "weight": 1.0}]}
    (tmp_path / "cyc.ctnn").write_text(json.dumps(cyc))
    assert run(["eval", "--net", str(tmp_path / "cyc.ctnn"), "--grid", "0:1:0.1",
                "--out", str(tmp_path / "o.csv")]) == 2
    assert not (tmp_path / "o.csv").exists()
    (tmp_path / "junk.ctnn").write_text("not json")
    assert run(["eval", "--net", str(tmp_path / "junk.ctnn"), "--grid", "0:1:0.1",
                "--out", str(tmp_path / "o.csv")]) == 2
    # window longer than the data
    write_signal(tmp_path / "s.csv", np.linspace(0, 5, 51), np.zeros(51))
    assert run(["analyze-period", "--in", str(tmp_path / "s.csv"), "--tmin", "1", "--tmax", "2",
                "--step", "0.5", "--window", "10", "--out", str(tmp_path / "o.csv")]) == 2


def test_reruns_are_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        net, out = tmp_path / f"s{i}.ctnn", tmp_path / f"s{i}.csv"
        run(["synth-sawtooth", "--h", "0.7", "--T", "1.3", "--n", "5", "--out", str(net)])
        run(["eval", "--net", str(net), "--grid", "0:2:0.01", "--out", str(out)])
        outs.append((net.read_bytes(), out.read_bytes()))
    assert outs[0] == outs[1]


def test_csv_round_trip_is_lossless(tmp_path):
    net = Network(units={"out": UnitConfig(alpha=None)}, inputs=["x"], output="out",
                  edges=[Edge("x", "out", 1.0)])
    network_io.save_network(net, tmp_path / "id.ctnn")
    rng = np.random.default_rng(0)
    t = np.arange(11) * 0.1
    write_signal(tmp_path / "x.csv", t, rng.normal(size=11) / 3)
    run(["eval", "--net", str(tmp_path / "id.ctnn"), "--in", str(tmp_path / "x.csv"),
         "--grid", "0:1:0.1", "--out", str(tmp_path / "y.csv")])
    x = read_csv(tmp_path / "x.csv")[1][0]
    y = read_csv(tmp_path / "y.csv")[1][0]
    grid_t = TimeGrid(0, 1, 0.1).points()
    np.testing.assert_array_equal(y.values, x(grid_t))


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ctnn.cli", "logic-demo", "--gate", "AND"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == "AND,+1 +1,1,true"
    proc = subprocess.run([sys.executable, "-m", "ctnn.cli", "eval"], capture_output=True, text=True)
    assert proc.returncode == 1 and "usage error" in proc.stderr
