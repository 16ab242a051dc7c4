import io
import json
import subprocess
import sys

import numpy as np
import pytest

from freqcap.cli import main
from freqcap.kernel import KernelFamily, make_family, write_kernel_csv


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def files(tmp_path):
    sub = tmp_path / "sub.csv"
    write_kernel_csv(make_family(KernelFamily.general_substitution(2, 0.1)), sub)
    eras = tmp_path / "eras.csv"
    write_kernel_csv(make_family(KernelFamily.dna_erasure(0.1)), eras)
    x = tmp_path / "x.csv"
    x.write_text("3\n1\n")
    book = tmp_path / "book.csv"
    book.write_text("2,0\n0,2\n")
    return {"sub": str(sub), "eras": str(eras), "x": str(x), "book": str(book)}


def test_reproduce_csv():
    code, text = run("reproduce", "--format", "csv")
    assert code == 0
    header = text.splitlines()[0].split(",")
    assert header[:4] == ["family", "param", "size", "L"]
    assert len(text.splitlines()) > 20


def test_reproduce_json_parses():
    code, text = run("reproduce", "--format", "json")
    assert code == 0 and all(row["agree"] for row in json.loads(text))


def test_bounds_dna():
    code, text = run("bounds", "dna", "--K", "1e6", "--beta", "0.45", "--alphabet", "4", "--reads", "1e6",
                     "--noise", "substitution:0.03")
    assert code == 0
    rep = json.loads(text)
    assert rep["penalty_delta"] == pytest.approx(-0.030617, abs=1e-6)
    assert rep["in_regime"] is False and rep["warnings"]


def test_bounds_dna_strict_fails():
    code, _ = run("bounds", "dna", "--K", "1e6", "--beta", "0.45", "--reads", "1e6", "--strict")
    assert code == 1


def test_bounds_eval(files):
    code, text = run("bounds", "eval", "--kernel", files["sub"], "--g", "10", "--r", "10")
    assert code == 0 and json.loads(text)["achievability"] <= json.loads(text)["converse"]


def test_usage_errors():
    assert run("bounds", "dna", "--bogus")[0] == 2
    assert run("nonsense")[0] == 2
    assert run()[0] == 2


def test_randomized_commands_require_seed(files):
    assert run("channel", "sample", "--kernel", files["sub"], "--x", files["x"], "--g", "2", "--r", "3")[0] == 2


def test_channel_sample_echoes_seed(files):
    code, text = run("channel", "sample", "--kernel", files["sub"], "--x", files["x"], "--g", "2", "--r", "3",
                     "--trials", "5", "--seed", "17")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "# seed=17" and len(lines) == 6
    assert all(sum(map(int, line.split(","))) == 6 for line in lines[1:])


def test_entropy_and_kernel(files):
    code, text = run("entropy", "eval", "--lambda", "1")
    assert code == 0 and set(json.loads(text)) == {"value", "truncation_k", "tail_bound"}
    code, text = run("kernel", "report", "--kernel", files["eras"], "--eta", "1")
    assert code == 0 and json.loads(text)["cmax_achieved"] == pytest.approx(0.9)
    code, text = run("kernel", "family", "--family", "dna_erasure", "--param", "0.1", "--L", "2")
    assert code == 0 and np.loadtxt(io.StringIO(text), delimiter=",").shape == (16, 25)


def test_domain_error_exit(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("0.5,0.4\n0.5,0.5\n")
    assert run("kernel", "report", "--kernel", str(bad))[0] == 1
    assert run("kernel", "report", "--kernel", str(tmp_path / "missing.csv"))[0] == 1


@pytest.mark.parametrize("action", ["mi", "lipschitz", "concentration"])
def test_infodensity_commands(files, action):
    code, text = run("infodensity", action, "--kernel", files["sub"], "--g", "1.5", "--r", "2", "--s", "3",
                     "--prior", "uniform", "--trials", "2000", "--seed", "4")
    assert code == 0 and json.loads(text)["seed"] == 4


def test_experiment_commands(files):
    code, text = run("experiment", "coding", "--kernel", files["sub"], "--g", "1", "--r", "10",
                     "--codebook", files["book"], "--trials", "2000", "--seed", "3")
    assert code == 0 and json.loads(text)["empirical_error"] < 0.05
    code, text = run("experiment", "constraint", "--n", "2", "--g", "2", "--prior", "uniform", "--s", "3",
                     "--trials", "20000", "--seed", "3")
    assert code == 0 and json.loads(text)["estimate"] == pytest.approx(1 / 3, abs=0.02)
    assert run("experiment", "constraint", "--n", "1", "--g", "1.5", "--prior", "uniform", "--s", "2",
               "--seed", "1")[0] == 1


def test_outputs_are_byte_identical(files, monkeypatch):
    argv = ["experiment", "coding", "--kernel", files["sub"], "--g", "1", "--r", "10", "--M", "4",
            "--prior", "uniform", "--s", "2", "--trials", "9000", "--seed", "21"]
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("FREQCAP_THREADS", threads)
        outs.append(run(*argv)[1])
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "freqcap", "entropy", "eval", "--lambda", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["value"] > 0
