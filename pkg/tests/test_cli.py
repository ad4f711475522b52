import json
import os
import subprocess
import sys

import pytest

from freeflags.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_pfr_spectrum(capsys):
    code, rep = run_json(capsys, "pfr", "spectrum", "--ring", "zmod:2^2")
    assert code == 0
    vals = {(e["sign"], e["value_squared_exact"]) for e in rep["results"]["spectrum"]["eigenvalues"]}
    assert vals == {(s, v) for s in (1, -1) for v in (36, 8, 4)}
    assert rep["command"] == ["pfr", "spectrum", "--ring", "zmod:2^2"]
    assert len(rep["config_hash"]) == 16 and "wall_clock" in rep


def test_pfr_bad_ring(capsys):
    code, rep = run_json(capsys, "pfr", "spectrum", "--ring", "zmod:4^1")
    assert code == 2 and "error" in rep


def test_pfr_check_and_export(capsys, tmp_path):
    code, rep = run_json(capsys, "pfr", "check", "--ring", "zmod:3^2")
    assert code == 0
    code, rep = run_json(capsys, "pfr", "export", "--ring", "zmod:2^2", "--out", str(tmp_path))
    assert code == 0 and any(tmp_path.iterdir())


def test_pretty(capsys):
    code, out = run(capsys, "pfr", "spectrum", "--ring", "zmod:2^1", "--pretty")
    assert code == 0 and out.startswith("freeflags ") and "wall clock" in out


def test_ball_and_sphere(capsys, tmp_path):
    code, rep = run_json(capsys, "ball", "-p", "2", "-r", "2")
    assert code == 0
    code, rep = run_json(capsys, "sphere", "-p", "2", "-r", "2", "--out", str(tmp_path))
    assert code == 0 and (tmp_path / "edges.txt").exists()
    header = (tmp_path / "strata.csv").read_text().splitlines()[0]
    assert header == "vertex,a,b,c,degree"
    code, rep = run_json(capsys, "sphere", "-p", "2", "-r", "3", "--out", str(tmp_path))
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert code == 0 and set(cert) == {"cut_edges", "volume", "ratio", "bound"}
    assert cert["ratio"] == cert["bound"] == "1/7"


def test_cayley_gen_and_link(capsys):
    code, rep = run_json(capsys, "cayley", "gen", "-p", "5")
    assert code == 0
    code, rep = run_json(capsys, "cayley", "link", "-p", "5", "-q", "13")
    assert code == 0


def test_budget_exceeded(capsys):
    code, rep = run_json(capsys, "cayley", "complex", "-p", "13", "-q", "5", "--budget-mb", "5")
    assert code == 3 and rep["error"].startswith("budget exceeded")


def test_seed_required():
    with pytest.raises(SystemExit) as e:
        main(["sampler", "double", "-p", "13", "-q", "5"])
    assert e.value.code == 2


def test_cayley_complex_walk_sampler(capsys, tmp_path, cayley_13_5):
    d = os.environ["HDX_DATA_DIR"]
    code, rep = run_json(capsys, "walk", "mix", "--complex", d, "-p", "13", "-q", "5", "-k", "1", "--steps", "3", "--trials", "100", "--seed", "4")
    assert code == 0 and 0 <= rep["results"]["tv"] <= 1
    args = ["sampler", "double", "--complex", d, "-p", "13", "-q", "5", "-k", "2", "-K", "8", "--eps", "0.2", "--alpha", "0.3", "--trials", "3000", "--seed", "9"]
    code, a = run_json(capsys, *args)
    code2, b = run_json(capsys, *args + ["--threads", "4"])
    assert code == code2 == 0
    assert a["results"] == b["results"]
    assert a["results"]["legs_are_only_geodesics"]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "freeflags.cli", "pfr", "spectrum", "--ring", "zmod:3^1"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["results"]["meta"]["n_vertices"] == 26
