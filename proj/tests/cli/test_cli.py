import os
import struct
import subprocess
from pathlib import Path

import pytest

BIN = os.path.abspath(os.environ.get("AXELROD_LAB_BIN", "build/tools/axelrod_lab"))


def run(*args, cwd, env=None, check=None):
    full_env = dict(os.environ)
    full_env.pop("AXELROD_LAB_OUT", None)
    full_env.update(env or {})
    p = subprocess.run([BIN, *map(str, args)], cwd=cwd, env=full_env, capture_output=True, text=True, timeout=600)
    if check is not None:
        assert p.returncode == check, p.stdout + p.stderr
    return p


def test_simulate_is_deterministic(tmp_path):
    for out in ("a", "b"):
        run("simulate", "--L", 40, "--replicas", 3, "--seed", 11, "--out", out, cwd=tmp_path, check=0)
    for name in ("summary.csv", "trajectory_0.log", "trajectory_2.log"):
        assert (tmp_path / "a/simulate" / name).read_bytes() == (tmp_path / "b/simulate" / name).read_bytes()
    assert not (tmp_path / "a/simulate/INCOMPLETE").exists()


def test_invalid_q_is_a_usage_error(tmp_path):
    p = run("simulate", "--q", 1, cwd=tmp_path, check=2)
    assert "q >= 2" in p.stderr


def test_unknown_subcommand_and_suite(tmp_path):
    run("frobnicate", cwd=tmp_path, check=2)
    p = run("verify", "nope", cwd=tmp_path, check=2)
    assert "lemma1" in p.stderr


@pytest.mark.parametrize("engine", ["harris", "gillespie"])
def test_replay_round_trip(tmp_path, engine):
    run("simulate", "--engine", engine, "--L", 30, "--horizon", 40, "--out", "o", cwd=tmp_path, check=0)
    log = tmp_path / "o/simulate/trajectory_0.log"
    p = run("replay", "--walks", log, cwd=tmp_path, check=0)
    assert p.stdout.startswith("ok   replay")


def test_replay_detects_tampering(tmp_path):
    run("simulate", "--L", 30, "--out", "o", cwd=tmp_path, check=0)
    log = tmp_path / "o/simulate/trajectory_0.log"
    lines = log.read_text().splitlines()
    start = next(i for i, l in enumerate(lines) if l.startswith("events")) + 1
    fields = lines[start].split(",")
    fields[0] = "1e9"  # out of time order
    lines[start] = ",".join(fields)
    log.write_text("\n".join(lines) + "\n")
    p = run("replay", log, cwd=tmp_path)
    assert p.returncode == 1, p.stdout + p.stderr
    assert "FAIL" in p.stdout


def test_verify_refined(tmp_path):
    p = run("verify", "refined", cwd=tmp_path, check=0)
    assert "4/243" in p.stdout


def test_phase_table(tmp_path):
    run("phase", "--q-max", 12, "--F-max", 9, "--out", "o", cwd=tmp_path, check=0)
    rows = [l for l in (tmp_path / "o/phase/phase.csv").read_text().splitlines() if l and not l.startswith("#")]
    assert len(rows) == 1 + 11 * 8
    svg = (tmp_path / "o/phase/phase.svg").read_text()
    assert "stroke-dasharray" in svg


def test_sweep_and_resume(tmp_path):
    args = ("sweep", "--cells", "2:2,2:3", "--L", 30, "--replicas", 3, "--out", "o")
    first = run(*args, cwd=tmp_path, check=0)
    assert "2 cells run" in first.stdout
    csv = (tmp_path / "o/sweep/sweep.csv").read_text()
    assert sum(l.startswith("aggregate,") for l in csv.splitlines()) == 2
    (tmp_path / "o/sweep/cells/cell_F2_q3_L30_interval.csv").unlink()
    second = run(*args, cwd=tmp_path, check=0)
    assert "1 cells run, 1 reused" in second.stdout
    assert (tmp_path / "o/sweep/sweep.csv").read_text() == csv


def test_sweep_failure_is_isolated(tmp_path):
    p = run("sweep", "--cells", "2:1,2:2", "--L", 20, "--replicas", 2, "--out", "o", cwd=tmp_path, check=3)
    assert "q >= 2" in (tmp_path / "o/sweep/failures.txt").read_text()
    assert "aggregate,2,2," in (tmp_path / "o/sweep/sweep.csv").read_text()


def test_trace_png_dimensions(tmp_path):
    run("trace", "--F", 3, "--L", 50, "--ring", "--horizon", 20, "--snapshots", 17, "--out", "o", cwd=tmp_path, check=0)
    png = (tmp_path / "o/trace/trace.png").read_bytes()
    assert png[1:4] == b"PNG"
    width, height = struct.unpack(">II", png[16:24])
    assert (width, height) == (50, 17)
    run("replay", tmp_path / "o/trace/trace.log", cwd=tmp_path, check=0)


def test_config_echo_reproduces_run(tmp_path):
    run("simulate", "--F", 3, "--q", 4, "--L", 25, "--engine", "harris", "--seed", 99, "--out", "a",
        "--log", "effective", cwd=tmp_path, check=0)
    config = tmp_path / "a/simulate/config.toml"
    assert 'engine = "harris"' in config.read_text()
    run("--config", config, "--out", "b", "simulate", cwd=tmp_path, check=0)
    assert (tmp_path / "a/simulate/trajectory_0.log").read_bytes() == (tmp_path / "b/simulate/trajectory_0.log").read_bytes()


def test_output_root_from_environment(tmp_path):
    run("race", "--q", 3, "--replicas", 500, cwd=tmp_path, env={"AXELROD_LAB_OUT": "envout"}, check=0)
    assert (tmp_path / "envout/race/six_arrow_race.json").exists()
