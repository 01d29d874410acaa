import csv
import hashlib
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from potlab.cli import main

SQ = {"degree_y": 2, "coeffs": [[[0, 0], [-1, 0]], [[0, 0]], [[1, 0]]]}
EX = {"degree_y": 2, "coeffs": [[[-1, 0]], [[0, 0], [1, 0]], [[0, 0], [1, 0]]]}


@pytest.fixture
def files(tmp_path, monkeypatch):
    monkeypatch.delenv("POTLAB_OUT", raising=False)
    (tmp_path / "sq.json").write_text(json.dumps(SQ))
    (tmp_path / "ex51.json").write_text(json.dumps(EX))
    (tmp_path / "dirac.json").write_text(json.dumps({"atoms": [{"z": [0, 0], "w": 1}]}))
    path = [[x, 1.0] for x in np.linspace(-6, 6, 13)]
    (tmp_path / "path.json").write_text(json.dumps(path))
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out.strip().splitlines(), out.err


def test_fiber(files, capsys):
    code, lines, _ = run(capsys, "fiber", "--poly", files / "sq.json", "--z", 4, "--out", files / "o")
    assert code == 0 and lines == ["-2", "2"]
    man = json.loads((files / "o" / "manifest.json").read_text())
    assert man["command"] == "fiber" and man["exit_code"] == 0
    assert man["tolerances"]["residual_tol"] == 1e-12
    assert str(files / "o" / "fiber.json") in man["artifacts"]


def test_monodromy(files, capsys):
    code, lines, _ = run(capsys, "monodromy", "--poly", files / "sq.json", "--circle", 0, 1,
                         "--out", files / "o")
    assert code == 0 and lines == ["(1 2)"]


def test_continue_residual_column(files, capsys):
    code, _, _ = run(capsys, "continue", "--poly", files / "ex51.json", "--path",
                     files / "path.json", "--out", files / "o")
    assert code == 0
    rows = [r for r in csv.reader(open(files / "o" / "track.csv")) if not r[0].startswith("#")]
    data = np.array(rows[1:], dtype=float)
    z = data[:, 1] + 1j * data[:, 2]
    y = data[:, 3::2] + 1j * data[:, 4::2]
    res = np.abs(z[:, None] * y ** 2 + z[:, None] * y - 1)
    assert res.max() < 1e-9


def test_config_enumerate(files, capsys):
    code, lines, _ = run(capsys, "config", "enumerate", "--k", 3, "--out", files / "o")
    assert code == 0 and len(lines) == 4
    assert sum("middle-active" in l for l in lines) == 3
    code, lines, _ = run(capsys, "config", "enumerate", "--k", 2, "--out", files / "o")
    assert len(lines) == 1


def test_config_assemble(files, capsys):
    code, lines, _ = run(capsys, "config", "assemble", "--example", "2.11", "--pair", "1,2,3|1,3",
                         "--grid", "61,61", "--out", files / "o")
    assert code == 0 and json.loads(lines[0])["pass"] is True
    assert (files / "o" / "field.csv").exists()


def test_config_verify_forward_star_lipschitz(files, capsys):
    o = files / "o"
    _, lines, _ = run(capsys, "config", "verify", "--example", "2.11", "--indices", "1,3",
                      "--kind", "min", "--grid", "61,61", "--out", o)
    assert json.loads(lines[0])["pass"] is False
    _, lines, _ = run(capsys, "config", "forward-star", "--example", "2.11", "--nu", 2,
                      "--grid", "61,61", "--out", o)
    assert json.loads(lines[0])["forward_star"] is True
    _, lines, _ = run(capsys, "config", "lipschitz", "--example", "2.11", "--nu", 2,
                      "--grid", "61,61", "--out", o)
    assert json.loads(lines[0])["pass"] is True


def test_measure_commands(files, capsys):
    o = files / "o"
    code, lines, _ = run(capsys, "measure", "transform", "--measure", files / "dirac.json",
                         "--z", 2, "--out", o)
    assert code == 0 and lines == ["0.5"]
    _, lines, _ = run(capsys, "measure", "potential", "--measure", files / "dirac.json",
                      "--z", "2;3j", "--out", o)
    assert abs(float(lines[0]) - np.log(2)) < 1e-14
    _, lines, _ = run(capsys, "measure", "relation", "--poly", files / "ex51.json", "--measure",
                      "example51", "--out", o)
    assert json.loads(lines[0])["pass"] is True
    _, lines, _ = run(capsys, "measure", "stokes", "--measure", "example51", "--radius", 6,
                      "--center", "-2", "--out", o)
    assert abs(float(lines[0]) - 1) < 1e-6
    _, lines, _ = run(capsys, "measure", "stokes", "--example", "2.11", "--radius", 0.05,
                      "--grid", "81,81", "--out", o)
    assert float(lines[0]) > 0
    _, lines, _ = run(capsys, "measure", "jump", "--example", "2.11", "--curve", "1,3",
                      "--indices", "1,3", "--radius", 0.05, "--grid", "81,81", "--out", o)
    # max(0, -x): jump 1 on a chord of length 0.1, over 2 pi
    assert abs(json.loads(lines[0])["mass"] - 0.1 / (2 * np.pi)) < 1e-9


def test_tree_commands(files, capsys):
    o = files / "o"
    code, lines, _ = run(capsys, "tree", "sigma", "--poly", "y^2+y", "--out", o)
    assert code == 0 and lines == ["-4"]
    _, lines, _ = run(capsys, "tree", "score", "--poly", "y^2+y", "--out", o)
    assert abs(json.loads(lines[0])["mass"][0] - 1) < 1e-8
    code, lines, _ = run(capsys, "tree", "verify-example51", "--out", o)
    assert code == 0 and lines[-1] == "PASS"
    code, lines, _ = run(capsys, "tree", "search", "--poly", "y+y^3", "--iterations", 5,
                         "--seed", 2, "--out", o)
    assert code == 0 and (o / "trace.csv").exists() and (o / "best_tree.json").exists()
    man = json.loads((o / "manifest.json").read_text())
    assert man["seeds"] == {"search": 2}


@pytest.mark.parametrize("argv, code", [
    (["fiber", "--poly", "y^2-", "--z", "1"], 1),
    (["fiber", "--poly", "missing.json", "--z", "1"], 1),
    (["fiber", "--poly", "y^2-z", "--z", "abc"], 1),
    (["bogus"], 1),
    (["config", "enumerate"], 1),
    (["monodromy", "--poly", "y^2-z", "--circle", "0.01", "0.01"], 1),
    (["tree", "sigma", "--poly", "y^2+y+1"], 1),
    (["fiber", "--poly", "y^2-z", "--z", "0"], 2),
])
def test_exit_codes(files, capsys, argv, code):
    got, _, err = run(capsys, *argv, "--out", files / "o") if argv != ["bogus"] else run(capsys, *argv)
    assert got == code
    assert err


def test_potlab_out_overrides(files, capsys, monkeypatch):
    monkeypatch.setenv("POTLAB_OUT", str(files / "env"))
    run(capsys, "tree", "sigma", "--poly", "y^2+y", "--out", files / "flag")
    assert (files / "env" / "sigma.json").exists()
    assert not (files / "flag").exists()


def _digest(d):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(d.iterdir()) if p.name != "manifest.json"}


@pytest.mark.parametrize("argv", [
    ["continue", "--poly", "{ex}", "--circle", "-4", "1"],
    ["config", "assemble", "--example", "2.11", "--pair", "1,3|1,2,3", "--grid", "41,41"],
    ["tree", "search", "--poly", "y+y^3", "--iterations", "5", "--seed", "9"],
])
def test_manifest_reproducibility(files, capsys, argv):
    argv = [a.replace("{ex}", str(files / "ex51.json")) for a in argv]
    run(capsys, *argv, "--out", files / "a")
    man = json.loads((files / "a" / "manifest.json").read_text())
    run(capsys, *man["argv"][:-2], "--out", files / "b")
    assert _digest(files / "a") == _digest(files / "b")


def test_entry_point_subprocess(files):
    env = dict(os.environ, POTLAB_OUT=str(files / "sp"))
    p = subprocess.run([sys.executable, "-m", "potlab.cli", "tree", "sigma", "--poly", "y^2+y"],
                       capture_output=True, text=True, env=env)
    assert p.returncode == 0 and p.stdout.strip() == "-4"
    p = subprocess.run([sys.executable, "-m", "potlab.cli", "fiber", "--poly", "y^2-z", "--z", "0"],
                       capture_output=True, text=True, env=env)
    assert p.returncode == 2
