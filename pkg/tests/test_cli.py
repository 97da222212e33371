import json
import subprocess
import sys

import pytest

from qcsched.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main, resolve_base_graph
from qcsched.ldpc import BaseGraphError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_idle_fixture(capsys):
    code, out, _ = run(capsys, "idle", "--bg", "toy4", "--t", "3")
    assert code == EXIT_OK
    # natural order: every neighbouring pair shares two columns
    assert out.splitlines()[0] == "cyclic=4 linear=3"
    code, out, _ = run(capsys, "idle", "--bg", "toy4", "--t", "3", "--policy", "idle")
    assert out.splitlines()[0] == "cyclic=2 linear=2"


def test_idle_verbose_and_schedule_file(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("1 2 0 3\n")
    code, out, _ = run(capsys, "idle", "--bg", "toy4", "--t", "3", "--schedule", str(path), "--verbose")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] == "cyclic=2 linear=2"
    assert lines[1:] == ["3 -> 1: 0 (wrap)", "1 -> 2: 1", "2 -> 0: 0", "0 -> 3: 1"]


def test_idle_bad_schedule_exits_2(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("0 1 1 3\n")
    code, _, err = run(capsys, "idle", "--bg", "toy4", "--t", "3", "--schedule", str(path))
    assert code == EXIT_DATA and "more than once" in err
    code, _, _ = run(capsys, "idle", "--bg", "toy4", "--t", "3", "--policy", f"file:{tmp_path / 'none.txt'}")
    assert code == EXIT_DATA


def test_bad_base_graph_exits_2(capsys, tmp_path):
    path = tmp_path / "bg.txt"
    path.write_text("2 3 1 1\n0 -1 0\n")
    assert run(capsys, "idle", "--bg", str(path), "--t", "1")[0] == EXIT_DATA
    assert run(capsys, "idle", "--bg", "nonsense", "--t", "1")[0] == EXIT_DATA
    assert run(capsys, "idle", "--bg", "bg1:1000", "--t", "1")[0] == EXIT_DATA


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["idle", "--bg", "toy4", "--t", "3", "--bogus"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["idle", "--bg", "toy4"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--bg", "toy4", "--snr", "1"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["idle", "--bg", "bg1", "--rate", "3/0", "--t", "1"])
    assert exc.value.code == EXIT_USAGE


def test_optimize_writes_schedule(capsys, tmp_path):
    out_path = tmp_path / "sched.txt"
    code, _, _ = run(capsys, "optimize", "--bg", "toy4", "--t", "3", "--mode", "idle-performance",
                     "-o", str(out_path))
    assert code == EXIT_OK
    lines = out_path.read_text().splitlines()
    assert lines[1] == "# n_idle_cyclic=2 t=3 mode=constrained"
    # the written schedule round-trips through idle
    code, out, _ = run(capsys, "idle", "--bg", "toy4", "--t", "3", "--schedule", str(out_path))
    assert out.startswith("cyclic=2 ")


def test_optimize_bg1_matches_ld_bound(capsys):
    code, out, _ = run(capsys, "optimize", "--bg", "bg1", "--rate", "1/2", "--t", "4", "--restarts", "8")
    assert code == EXIT_OK
    order = [int(v) for v in out.splitlines()[0].split()]
    assert sorted(order) == list(range(len(order)))
    _, ld_out, _ = run(capsys, "idle", "--bg", "bg1", "--rate", "1/2", "--t", "4", "--policy", "ld")
    _, opt_out, _ = run(capsys, "idle", "--bg", "bg1", "--rate", "1/2", "--t", "4",
                        "--policy", "idle", "--restarts", "8")
    ld = int(ld_out.split()[0].split("=")[1])
    opt = int(opt_out.split()[0].split("=")[1])
    assert opt <= ld


def test_simulate_outputs_and_repeatability(capsys, tmp_path):
    args = ["simulate", "--bg", "bg1:16", "--rate", "1/2", "--policy", "ld", "--snr", "1,3",
            "--trials", "200", "--chunk", "50", "--seed", "3"]
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert run(capsys, *args, "-o", str(a))[0] == EXIT_OK
    assert run(capsys, *args, "-o", str(b))[0] == EXIT_OK
    assert run(capsys, *args, "--threads", "4", "-o", str(c))[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    assert a.with_suffix(".json").read_bytes() == c.with_suffix(".json").read_bytes()
    doc = json.loads(a.with_suffix(".json").read_text())
    assert doc["config"]["policy"] == "ld" and len(doc["points"]) == 2
    assert a.read_text().splitlines()[0] == "snr_db,trials,block_errors,bler,ber,mean_iters"


def test_simulate_wrong_length_schedule_exits_2(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("0 1 2\n")
    code, _, _ = run(capsys, "simulate", "--bg", "hamming84", "--policy", f"file:{path}", "--snr", "2",
                     "--trials", "10", "-o", str(tmp_path / "r.csv"))
    assert code == EXIT_DATA


def test_analyze_report(capsys):
    code, out, _ = run(capsys, "analyze", "--N", "10", "--di", "2", "--dj", "3", "--t", "3",
                       "--trials", "20000")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["exact"]["fraction"] == "3/5"
    assert doc["pass_flags"]["sample_within_4se"] is True
    assert doc["slope"]["expected"] == -1


def test_analyze_ordering(capsys):
    code, out, _ = run(capsys, "analyze", "--N", "200", "--di", "3", "--dj", "6", "--t", "3",
                       "--degrees", "3,3,6,6", "--codes", "5000")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["means"]["ascending"] < doc["means"]["descending"]
    assert doc["slope"] is None


def test_analyze_gate(capsys):
    code, _, err = run(capsys, "analyze", "--N", "50", "--di", "3", "--dj", "3", "--t", "4",
                       "--degrees", "3,5", "--codes", "100")
    assert code == EXIT_USAGE and "--force" in err
    code, out, _ = run(capsys, "analyze", "--N", "50", "--di", "3", "--dj", "3", "--t", "4",
                       "--degrees", "3,5", "--codes", "100", "--force")
    assert code == EXIT_OK
    assert json.loads(out)["config"]["ordering"]["hypothesis_t_le_dmin"] is False


def test_resolve_base_graph():
    assert resolve_base_graph("bg2:52").lift == 52
    assert resolve_base_graph("BG1").lift == 384
    with pytest.raises(BaseGraphError):
        resolve_base_graph("bg1:abc")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qcsched.cli", "idle", "--bg", "toy4", "--t", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "cyclic=4 linear=3\n"


def test_idle_alternating_schedule(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("0 2 1 3\n")
    assert run(capsys, "idle", "--bg", "toy4", "--t", "3", "--schedule", str(path))[1] == "cyclic=2 linear=1\n"
    assert run(capsys, "idle", "--bg", "toy4", "--t", "0", "--schedule", str(path))[1] == "cyclic=0 linear=0\n"


def test_analyze_zero_latency(capsys):
    code, out, _ = run(capsys, "analyze", "--N", "10", "--di", "2", "--dj", "3", "--t", "0")
    assert code == EXIT_OK and json.loads(out)["exact"]["expected_pair_idle"] == 0
