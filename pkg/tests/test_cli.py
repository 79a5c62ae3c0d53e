import csv
import io

import pytest

from conftest import E1_AAG, E2_AAG
from safetysynth.aiger import parse_aag, read_spec, split_inputs
from safetysynth.bench import RunRecord, run_batch, status_conflicts, write_csv
from safetysynth.cli import main
from safetysynth.oracle import closed_circuit_safe
from safetysynth.strategy import verify_controller


@pytest.fixture
def fixtures(tmp_path):
    (tmp_path / "e1.aag").write_text(E1_AAG)
    (tmp_path / "e2.aag").write_text(E2_AAG)
    return tmp_path


@pytest.mark.parametrize("algo", ["c", "ctl", "a", "atl", "C-TL"])
def test_solve_exit_codes(fixtures, algo, capsys):
    assert main(["solve", str(fixtures / "e1.aag"), "--algo", algo]) == 10
    assert capsys.readouterr().out.strip() == "REALIZABLE"
    assert main(["solve", str(fixtures / "e2.aag"), "--algo", algo]) == 20


def test_solve_counter(tmp_path):
    path = tmp_path / "cnt8.aag"
    assert main(["gen-cnt", "8", "--out", str(path)]) == 0
    for algo in ("c", "ctl", "a", "atl"):
        assert main(["solve", str(path), "--algo", algo]) == 10


def test_solve_resource_exhausted(tmp_path):
    path = tmp_path / "cnt12.aag"
    main(["gen-cnt", "12", "--out", str(path)])
    assert main(["solve", str(path), "--algo", "c", "--timeout", "0"]) == 2
    assert main(["solve", str(path), "--algo", "c", "--node-limit", "100"]) == 2


def test_usage_errors(fixtures, capsys):
    assert main(["solve", str(fixtures / "missing.aag")]) == 1
    assert main(["solve", str(fixtures / "e1.aag"), "--algo", "zz"]) == 1
    assert main([]) == 1
    assert main(["gen-cnt", "0"]) == 1
    assert main(["gen-cnt", "31"]) == 1
    bad = fixtures / "bad.aag"
    bad.write_text("aag 1 1 0 2 0\n2\n2\n3\n")
    assert main(["solve", str(bad)]) == 1


def test_synth_writes_verified_circuit(fixtures):
    out = fixtures / "out.aag"
    assert main(["synth", str(fixtures / "e1.aag"), "--out", str(out)]) == 10
    spec = read_spec(out)
    assert spec.controllable == [] and closed_circuit_safe(spec)
    assert verify_controller(spec, {}).safe


def test_synth_unrealizable_writes_nothing(fixtures):
    out = fixtures / "out2.aag"
    assert main(["synth", str(fixtures / "e2.aag"), "--algo", "atl", "--out", str(out)]) == 20
    assert not out.exists()


@pytest.mark.parametrize("rerun", [[], ["--rerun-reach"]])
def test_synth_counter(tmp_path, rerun):
    src, out = tmp_path / "cnt4.aag", tmp_path / "ctl.aag"
    main(["gen-cnt", "4", "--out", str(src)])
    assert main(["synth", str(src), "--algo", "a", "--out", str(out), *rerun]) == 10
    assert main(["verify", str(out)]) == 0


def test_verify_reports_unsafe(tmp_path, capsys):
    path = tmp_path / "open.aag"
    path.write_text("aag 1 1 0 1 0\n2\n2\n")
    assert main(["verify", str(path)]) == 3
    assert "UNSAFE after 1 steps" in capsys.readouterr().out


def test_verify_rejects_open_circuit(fixtures):
    assert main(["verify", str(fixtures / "e1.aag")]) == 1


def test_gen_cnt_stdout(capsys):
    assert main(["gen-cnt", "1"]) == 0
    aig = parse_aag(capsys.readouterr().out)
    assert len(aig.latches) == 2


def test_bench_csv(fixtures, tmp_path):
    out = tmp_path / "runs.csv"
    assert main(["bench", str(fixtures), "--algos", "c,atl", "--timeout", "30", "--csv", str(out)]) == 0
    text = out.read_bytes()
    assert b"\r\n" not in text
    rows = list(csv.DictReader(io.StringIO(text.decode("utf-8"))))
    assert list(rows[0]) == ["instance", "algo", "status", "time_ms", "iterations", "rounds",
                             "peak_nodes", "gates"]
    assert [(r["instance"], r["algo"], r["status"]) for r in rows] == [
        ("e1", "C", "REALIZABLE"), ("e1", "A-TL", "REALIZABLE"),
        ("e2", "C", "UNREALIZABLE"), ("e2", "A-TL", "UNREALIZABLE")]


def test_bench_records_broken_files(fixtures):
    (fixtures / "broken.aag").write_text("aag nonsense\n")
    recs = run_batch(sorted(fixtures.glob("*.aag")), ["C"], timeout=30)
    assert [r.status for r in recs if r.instance == "broken"] == ["ERROR"]
    assert len(recs) == 3


def test_bench_parallel_matches_serial(fixtures):
    paths = sorted(fixtures.glob("*.aag"))
    serial = run_batch(paths, ["ctl", "a"], timeout=30)
    parallel = run_batch(paths, ["ctl", "a"], timeout=30, jobs=2)
    assert [(r.instance, r.algo, r.status) for r in serial] == \
        [(r.instance, r.algo, r.status) for r in parallel]


def test_bench_synth_counts_gates(fixtures):
    recs = run_batch(sorted(fixtures.glob("*.aag")), ["C-TL"], synth=True)
    assert recs[0].gates is not None and recs[1].gates is None


def test_status_conflicts():
    recs = [RunRecord("x", "C", "REALIZABLE", 1.0), RunRecord("x", "A", "UNREALIZABLE", 1.0),
            RunRecord("y", "C", "TIMEOUT", 1.0), RunRecord("y", "A", "REALIZABLE", 1.0)]
    assert status_conflicts(recs) == {"x": {"REALIZABLE", "UNREALIZABLE"}}
    buf = io.StringIO()
    write_csv(recs, buf)
    assert buf.getvalue().count("\n") == 5


def test_oracle_subcommand(fixtures):
    assert main(["oracle", str(fixtures / "e1.aag")]) == 10
    assert main(["oracle", str(fixtures / "e2.aag")]) == 20


def test_package_level_solve():
    from safetysynth import solve

    spec = split_inputs(parse_aag(E1_AAG))
    assert solve(spec, "atl").status.value == "REALIZABLE"
