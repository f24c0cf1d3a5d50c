import io
import json
import subprocess
import sys

import pytest

from valdyn.cli import EXIT_LIMITATION, EXIT_OK, EXIT_USAGE, UsageError, degree_cap, run
from valdyn.dynamics import DEFAULT_DEGREE_CAP

CUSP_IDEAL = "z2^2 - z1^3, z1^2*z2"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_local_report_golden():
    code, out, err = call("local", "--map", "z2; z1*z2", "--steps", "6")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["mode"] == "local" and rep["case"] == "fixed-quasimonomial"
    assert rep["sequence"] == [1, 2, 3, 5, 8, 13]
    assert rep["growth"]["a"] == 1 and rep["growth"]["b"] == 1
    assert rep["growth"]["value"]["quad"] == {"p": [1, 2], "q": [1, 2], "D": 5}
    assert "case fixed-quasimonomial" in err


def test_infinity_report_skew():
    code, out, _ = call("infinity", "--map", "z1^2; z1*z2^2")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["case"] == "b"
    assert rep["sequence"] == [(n + 2) * 2 ** (n - 1) for n in range(1, len(rep["sequence"]) + 1)]


def test_sequence_both_modes():
    _, out, _ = call("sequence", "--map", "z2; z1*z2", "--steps", "6")
    assert json.loads(out)["values"] == [1, 2, 3, 5, 8, 13]
    _, out, _ = call("sequence", "--map", "z2; z1*z2", "--steps", "6", "--at-infinity", "--parallel")
    assert json.loads(out)["values"] == [2, 3, 5, 8, 13, 21]


def test_resolve_and_potential_cusp_ideal():
    _, out, _ = call("resolve", "--ideal", CUSP_IDEAL)
    rep = json.loads(out)
    assert rep["Z"] == [2, 3, 6, 7]
    assert [v["b"] for v in rep["graph"]["vertices"]] == [1, 1, 2, 2]
    _, out, err = call("potential", "--ideal", CUSP_IDEAL)
    lap = json.loads(out)["laplacian"]
    assert [a["point"] for a in lap["atoms"]] == ["E3"]
    assert lap["total_mass"]["rat"] == [2, 1]
    assert "total mass 2" in err


def test_repeated_runs_are_byte_identical(tmp_path):
    for argv in (["local", "--map", "z2; z1*z2"], ["infinity", "--map", "z1^2; z1*z2^2"],
                 ["resolve", "--ideal", CUSP_IDEAL], ["potential", "--ideal", CUSP_IDEAL]):
        first = call(*argv)
        assert all(call(*argv) == first for _ in range(2))
        dots = []
        for k in range(2):
            path = tmp_path / f"g{k}.dot"
            call(*argv, "--dot", str(path))
            dots.append(path.read_bytes())
        assert dots[0] == dots[1]


def test_entry_point_matches_in_process_run():
    argv = ["sequence", "--map", "z2; z1*z2", "--steps", "5"]
    runs = [subprocess.run([sys.executable, "-m", "valdyn", *argv], capture_output=True) for _ in range(2)]
    assert runs[0].returncode == 0 and runs[0].stdout == runs[1].stdout
    assert runs[0].stdout.decode() == call(*argv)[1]


def test_replay_reproduces_graph(tmp_path):
    rj, rd, gd = tmp_path / "res.json", tmp_path / "res.dot", tmp_path / "replay.dot"
    code, out, _ = call("resolve", "--ideal", CUSP_IDEAL, "--json", str(rj), "--dot", str(rd))
    assert code == EXIT_OK and rj.read_text() == out
    code, replayed, _ = call("graph", "--replay", str(rj), "--dot", str(gd))
    assert code == EXIT_OK
    assert json.loads(replayed) == json.loads(out)["graph"]
    assert gd.read_bytes() == rd.read_bytes()
    # a bare sequence object replays too
    seq = tmp_path / "seq.json"
    seq.write_text(json.dumps(json.loads(out)["sequence"]))
    assert call("graph", "--replay", str(seq))[1] == replayed


def test_graph_with_marked_curve():
    code, out, _ = call("graph", "--ideal", CUSP_IDEAL, "--marked-curves", "z2^2 - z1^3")
    assert code == EXIT_OK and len(json.loads(out)["curves"]) == 1


@pytest.mark.parametrize("argv", [
    ["bogus"],
    [],
    ["local"],
    ["local", "--map", "z1 +; z2"],
    ["local", "--map", "z2; z1*z2", "--steps", "0"],
    ["sequence", "--map", "z2; z1*z2", "--degree-cap", "0"],
    ["graph", "--replay", "/nonexistent/seq.json"],
])
def test_usage_errors_exit_1(argv):
    code, out, err = call(*argv)
    assert code == EXIT_USAGE and out == "" and "usage error" in err


def test_irrational_ideal_exits_2():
    code, out, err = call("resolve", "--ideal", "z2^2 - 2*z1^2")
    assert code == EXIT_LIMITATION and out == ""
    assert err.startswith("valdyn:")


def test_non_dominant_map_exits_2():
    code, _, err = call("local", "--map", "z1; z1")
    assert code == EXIT_LIMITATION and "cannot complete" in err


def test_degree_cap_precedence(monkeypatch):
    assert degree_cap(None, {}) == DEFAULT_DEGREE_CAP
    assert degree_cap(None, {"VALDYN_DEGREE_CAP": "50"}) == 50
    assert degree_cap(7, {"VALDYN_DEGREE_CAP": "50"}) == 7
    with pytest.raises(UsageError):
        degree_cap(None, {"VALDYN_DEGREE_CAP": "lots"})
    monkeypatch.setenv("VALDYN_DEGREE_CAP", "20")
    _, out, err = call("sequence", "--map", "z2; z1*z2", "--steps", "8", "--at-infinity")
    capped = json.loads(out)
    assert capped["values"] == [2, 3, 5, 8] and capped["complete"] is False
    assert "degree cap hit" in err
    _, out, _ = call("sequence", "--map", "z2; z1*z2", "--steps", "8", "--at-infinity", "--degree-cap", "1000")
    assert json.loads(out)["values"] == [2, 3, 5, 8, 13, 21, 34, 55]
