import io
import subprocess
import sys

import pytest

from rankselect.cli import main
from rankselect.core import Ranking, write_dataset, write_profile


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def d3_file(tmp_path, d3):
    path = tmp_path / "d3.txt"
    write_dataset(d3, path)
    return str(path)


@pytest.fixture
def profile_file(tmp_path):
    path = tmp_path / "profile.txt"
    write_profile([Ranking(o) for o in [(0, 1, 2), (0, 1, 2), (1, 2, 0)]], path)
    return str(path)


def test_select_extended(d3_file):
    code, out = run("select", "--input", d3_file, "--k", "2")
    assert code == 0 and out == "0 2\t5\n"


def test_select_tuples_lists_ties(d3_file):
    code, out = run("select", "--input", d3_file, "--method", "tuples", "--k", "2")
    assert out == "0 1\t4\n0 2\t4\n2 0\t4\n"


def test_select_kemeny(d3_file):
    code, out = run("select", "--input", d3_file, "--method", "kemeny", "--k", "3")
    assert out == "0 1 2\t2\n0 2 1\t2\n2 0 1\t2\n"
    code, out = run("select", "--input", d3_file, "--method", "kemeny", "--k", "1", "--ties", "lex")
    assert out == "0\t2\n"


def test_select_random_is_seeded(d3_file):
    a = run("select", "--input", d3_file, "--method", "tuples", "--k", "2", "--ties", "random", "--seed", "5")
    b = run("select", "--input", d3_file, "--method", "tuples", "--k", "2", "--ties", "random", "--seed", "5")
    assert a == b and a[1].count("\n") == 1


def test_profile_rules(profile_file):
    assert run("select", "--input", profile_file, "--method", "plurality", "--k", "1")[1] == "0\t2\n"
    assert run("select", "--input", profile_file, "--method", "approval", "--k", "2")[1] == "0 1\t5\n"
    assert run("select", "--input", profile_file, "--method", "borda", "--k", "1")[1] == "0\t4\n1\t4\n"


def test_profile_rule_needs_profile(d3_file, capsys):
    code, _ = run("select", "--input", d3_file, "--method", "maximin", "--k", "1")
    assert code == 2 and "profile" in capsys.readouterr().err


def test_exact(d3_file):
    code, out = run("exact", "--input", d3_file, "--gamma", "0.5", "--objective", "3", "--k", "2")
    lines = out.splitlines()
    assert [l.split("\t")[0] for l in lines] == ["0 1", "0 2", "2 0"]
    assert all(abs(float(l.split("\t")[1]) - 4 / 15) < 1e-12 for l in lines)
    code, out = run("exact", "--input", d3_file, "--p", str(2 / 3), "--objective", "1", "--k", "2")
    assert out.startswith("0 2\t")


def test_exact_needs_noise_level(d3_file, capsys):
    assert run("exact", "--input", d3_file, "--k", "1")[0] == 2
    assert "--gamma" in capsys.readouterr().err


def test_kemeny(d3_file):
    code, out = run("kemeny", "--input", d3_file)
    assert out == "distance 2\n0 1 2\n0 2 1\n2 0 1\n"


def test_sample(d3_file):
    code, out = run("sample", "--input", d3_file, "--gamma", "0.5", "--steps", "50000", "--seed", "1")
    lines = out.splitlines()
    assert lines[0] == "alternative,estimate,stderr" and len(lines) == 4
    est = [float(l.split(",")[1]) for l in lines[1:]]
    assert abs(est[0] - 8 / 15) < 0.03


def test_simulate_config_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("m=4\nn=2\niters=5\nmethods=extended,copeland\nk=1..2\n")
    out_path = tmp_path / "out.csv"
    code, _ = run("simulate", "--config", str(cfg), "--iters", "6", "--objective", "1", "--out", str(out_path))
    lines = out_path.read_text().splitlines()
    assert code == 0 and lines[0] == "objective,method,k,mean,ci_low,ci_high,iters"
    assert len(lines) == 1 + 2 * 2
    assert all(l.endswith(",6") for l in lines[1:])


def test_simulate_stdout_matches_file(tmp_path):
    args = ["simulate", "--m", "4", "--n", "2", "--iters", "8", "--seed", "3"]
    _, out = run(*args)
    run(*args, "--out", str(tmp_path / "x.csv"))
    assert out == (tmp_path / "x.csv").read_text()


def test_simulate_rejects_bad_config(capsys):
    code, _ = run("simulate", "--model", "comparisons", "--methods", "plurality", "--m", "4", "--n", "2")
    assert code == 2 and "plurality" in capsys.readouterr().err


def test_generate_round_trip(tmp_path):
    path = tmp_path / "gen.txt"
    assert run("generate", "--m", "5", "--n", "4", "--p", "0.7", "--out", str(path))[0] == 0
    assert len(path.read_text().splitlines()) == 4
    code, out = run("select", "--input", str(path), "--method", "maximin", "--k", "2")
    assert code == 0 and out


def test_module_entry_point(d3_file):
    proc = subprocess.run(
        [sys.executable, "-m", "rankselect", "kemeny", "--input", d3_file], capture_output=True, text=True, check=True
    )
    assert proc.stdout.startswith("distance 2\n")
