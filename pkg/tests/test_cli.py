"""File formats, generators, and the command-line surface."""

import random

import pytest

from psched import io
from psched.cli import run_command
from psched.core import DISC, Schedule, verify_valid
from psched.errors import BadParams
from psched.generators import FAMILIES, gen_instance

from conftest import random_instance


def test_instance_round_trip():
    for seed in range(10):
        inst = random_instance(8, 2, 0.35, seed)
        text = io.format_instance(inst)
        again = io.parse_instance(text)
        assert again.n == inst.n and again.m == inst.m
        assert again.succ == inst.succ
        assert io.format_instance(again) == text


def test_instance_comments_and_blanks():
    inst = io.parse_instance("# header\npsched 1 3 2\n\n0 1  # edge\n1 2\n")
    assert set(inst.edges()) == {(0, 1), (1, 2), (0, 2)}


def test_instance_parse_errors():
    with pytest.raises(ValueError):
        io.parse_instance("nope 1 3 2\n")
    with pytest.raises(ValueError):
        io.parse_instance("psched 1 3 2\n0\n")
    with pytest.raises(ValueError):
        io.parse_instance("")


def test_schedule_round_trip():
    rng = random.Random(4)
    for _ in range(10):
        assign = tuple(rng.choice([DISC, 1, 2, 3]) for _ in range(6))
        sched = Schedule(T=3, assign=assign)
        text = io.format_schedule(sched)
        assert io.parse_schedule(text) == sched
        assert io.format_schedule(io.parse_schedule(text)) == text


def test_schedule_parse_errors():
    with pytest.raises(ValueError):
        io.parse_schedule("sched 1 2 3\n0 1\n")  # missing job 1
    with pytest.raises(ValueError):
        io.parse_schedule("sched 1 2 3\n0 1\n0 2\n1 1\n")  # duplicate


def test_generators_deterministic_and_valid():
    for family in FAMILIES:
        a, ea = gen_instance(family, 8, 2, 0.3, 1)
        b, eb = gen_instance(family, 8, 2, 0.3, 1)
        assert ea == eb and a.succ == b.succ
    _, e1 = gen_instance("random-dag", 10, 2, 0.4, 1)
    _, e2 = gen_instance("random-dag", 10, 2, 0.4, 2)
    assert e1 != e2


def test_generator_families_shape():
    chain, edges = gen_instance("chain", 5, 2)
    assert edges == [(0, 1), (1, 2), (2, 3), (3, 4)]
    anti, edges = gen_instance("antichain", 5, 2)
    assert edges == []
    forest, edges = gen_instance("forest", 8, 2, 0.9, 3)
    kids = [v for _, v in edges]
    assert len(kids) == len(set(kids))  # at most one parent each
    with pytest.raises(BadParams):
        gen_instance("ring", 5, 2)
    with pytest.raises(BadParams):
        gen_instance("chain", 5, 2, density=1.5)


def test_cli_gen_verify_pipeline(tmp_path):
    inst_path = tmp_path / "i.psched"
    sched_path = tmp_path / "s.sched"
    assert run_command([
        "gen", "--family", "random-dag", "--n", "7", "--m", "2",
        "--density", "0.35", "--seed", "3", "--out", str(inst_path),
    ]) == 0
    assert run_command([
        "pipeline", str(inst_path), "--hinted", "--out", str(sched_path),
    ]) == 0
    inst = io.read_instance(str(inst_path))
    final = io.read_schedule(str(sched_path))
    assert final.discard_count == 0
    assert verify_valid(inst, final).ok
    assert run_command(["verify", str(inst_path), str(sched_path)]) == 0


def test_cli_verify_rejects_capacity_breach(tmp_path, capsys):
    inst_path = tmp_path / "i.psched"
    bad_path = tmp_path / "bad.sched"
    (inst_path).write_text("psched 1 2 1\n")
    (bad_path).write_text("sched 1 2 1\n0 1\n1 1\n")
    assert run_command(["verify", str(inst_path), str(bad_path)]) == 1
    out = capsys.readouterr().out
    assert "capacity" in out


def test_cli_solver_flags_and_exit_codes(tmp_path):
    inst_path = tmp_path / "i.psched"
    run_command(["gen", "--family", "random-dag", "--n", "6", "--m", "2",
                 "--seed", "5", "--out", str(inst_path)])
    out_path = tmp_path / "o.sched"
    code = run_command([
        "pipeline", str(inst_path), "--horizon", "8",
        "--param-override", "h=1", "--param-override", "hp=1",
        "--param-override", "p=2", "--param-override", "delta=1/4",
        "--param-override", "deltap=1/8", "--out", str(out_path),
    ])
    assert code == 0
    inst = io.read_instance(str(inst_path))
    final = io.read_schedule(str(out_path))
    assert verify_valid(inst, final).ok and final.discard_count == 0
    assert run_command(["pipeline", str(inst_path), "--budget", "3"]) == 2
    assert run_command(["gen", "--family", "nope", "--n", "3", "--m", "1"]) == 1
    assert run_command(["solve", str(inst_path), "--param-override", "zz=1"]) == 1
    assert run_command(["verify", str(tmp_path / "missing"), str(out_path)]) == 1


def test_cli_outputs_are_deterministic(tmp_path):
    paths = []
    for run in range(2):
        base = tmp_path / f"run{run}"
        base.mkdir()
        inst = base / "i.psched"
        run_command(["gen", "--family", "layered", "--n", "8", "--m", "2",
                     "--density", "0.4", "--seed", "11", "--out", str(inst)])
        graham = base / "g.sched"
        run_command(["graham", str(inst), "--out", str(graham)])
        oracle = base / "o.sched"
        run_command(["oracle", str(inst), "--out", str(oracle)])
        pipe = base / "p.sched"
        run_command(["pipeline", str(inst), "--hinted", "--out", str(pipe)])
        solve = base / "s.sched"
        run_command(["solve", str(inst), "--horizon", "8",
                     "--param-override", "h=1", "--param-override", "hp=1",
                     "--param-override", "p=2", "--out", str(solve)])
        paths.append([inst, graham, oracle, pipe, solve])
    for a, b in zip(*paths):
        assert a.read_bytes() == b.read_bytes()


def test_cli_bench_graham_stays_within_guarantee(tmp_path):
    out = tmp_path / "bench50.csv"
    assert run_command([
        "bench", "--family", "random-dag", "--count", "50", "--n", "8",
        "--m", "2", "--density", "0.35", "--seed", "7",
        "--format", "csv", "--out", str(out),
    ]) == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 51
    header = lines[0].split(",")
    for line in lines[1:]:
        row = dict(zip(header, line.split(",")))
        m, opt = int(row["m"]), int(row["opt"])
        assert m * int(row["graham"]) <= (2 * m - 1) * opt
        assert float(row["ratio"]) >= 1.0
        assert int(row["final_makespan"]) <= opt + int(row["solver_discards"])


def test_cli_bench_csv_schema(tmp_path):
    out = tmp_path / "bench.csv"
    assert run_command([
        "bench", "--family", "random-dag", "--count", "3", "--n", "7",
        "--m", "2", "--seed", "1", "--format", "csv", "--out", str(out),
    ]) == 0
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == [
        "instance", "family", "n", "m", "opt", "graham",
        "solver_discards", "final_makespan", "ratio", "wall_time_ms",
    ]
    assert len(lines) == 4
    for line in lines[1:]:
        row = dict(zip(header, line.split(",")))
        assert int(row["graham"]) * row_m(row) <= (2 * row_m(row) - 1) * int(row["opt"])
        assert float(row["ratio"]) >= 1.0


def row_m(row):
    return int(row["m"])
