import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from hybridsat import __version__
from hybridsat.cli import EXIT_ERROR, EXIT_FOUND, EXIT_NOT_FOUND, main
from hybridsat.cnf import count_solutions, parse_dimacs
from hybridsat.rates import GAMMA_C


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def csv_rows(text):
    lines = text.splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    return comments, list(csv.DictReader(io.StringIO("\n".join(body))))


# -- solve -------------------------------------------------------------------------


def test_solve_exit_codes(tmp_path, capsys):
    sat = write(tmp_path, "sat.cnf", "p cnf 1 1\n1 0\n")
    code, out = run(capsys, "solve", "--cnf", sat, "--seed", 1)
    rep = json.loads(out)
    assert code == EXIT_FOUND and rep["model"] == "1" and rep["found"]
    unsat = write(tmp_path, "unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n")
    code, out = run(capsys, "solve", "--cnf", unsat, "--seed", 1, "--walks", 5)
    assert code == EXIT_NOT_FOUND and not json.loads(out)["found"]


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--gen", "planted", "-n", "8"],
        ["solve", "--seed", "0"],
        ["solve", "--seed", "0", "--cnf", "/nonexistent.cnf"],
        ["solve", "--seed", "0", "--gen", "planted", "-n", "8", "--knob", "bad"],
        ["nonsense"],
        ["count"],
        ["markov", "-n", "3"],
        ["solve", "--seed", "0", "--gen", "planted", "-n", "8", "--workers", "0"],
    ],
)
def test_errors_are_json(capsys, argv):
    code, out = run(capsys, *argv)
    err = json.loads(out)
    assert code == EXIT_ERROR and err["tool"] == "hybridsat" and err["message"]


def test_solve_is_reproducible(tmp_path, capsys):
    argv = ["solve", "--gen", "planted", "-n", "12", "--unique", "--scheme", "GI", "--seed", "4"]
    a = run(capsys, *argv)
    b = run(capsys, *argv)
    assert a == b and a[0] == EXIT_FOUND
    rep = json.loads(a[1])
    assert rep["formula"]["planted"] == rep["model"]
    assert rep["seed"] == 4 and rep["version"] == __version__


def test_solve_knobs_and_steps(capsys):
    base = ["solve", "--gen", "planted", "-n", "10", "--seed", "2"]
    _, out = run(capsys, *base, "--steps", "7")
    assert json.loads(out)["params"]["m"] == 7
    code, out = run(capsys, *base, "--scheme", "GI", "--walks", "3")
    assert code == EXIT_ERROR


def test_config_values_apply_and_flags_win(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", json.dumps({"seed": 3, "scheme": "GI", "epsilon": 0.2, "knobs": {"kappa": 0.25}}))
    argv = ["solve", "--gen", "planted", "-n", "12", "--config", cfg]
    _, out = run(capsys, *argv)
    rep = json.loads(out)
    assert rep["seed"] == 3 and rep["scheme"] == "GI" and rep["params"]["epsilon"] == 0.2
    _, out = run(capsys, *argv, "--seed", "9", "--scheme", "classical")
    rep = json.loads(out)
    assert rep["seed"] == 9 and rep["scheme"] == "classical"
    bad = write(tmp_path, "bad.json", json.dumps({"colour": 1}))
    code, _ = run(capsys, "count", "--config", bad)
    assert code == EXIT_ERROR


# -- rates ------------------------------------------------------------------------


def test_rates_gi_minimum(capsys):
    code, out = run(capsys, "rates", "--scheme", "GI", "--grid", 400)
    comments, rows = csv_rows(out)
    assert code == 0 and comments[0].startswith(f"# tool=hybridsat version={__version__} seed=none")
    gi = [r for r in rows if r["scheme"] == "GI"]
    best = min(gi, key=lambda r: float(r["gamma"]))
    assert float(best["gamma"]) == pytest.approx((3 - math.log2(5)) / 2, abs=1e-3)
    assert float(best["chi"]) == pytest.approx(0.139, abs=2e-3)


def test_rates_fgw_lies_on_line_and_efg_endpoints(capsys):
    _, out = run(capsys, "rates", "--scheme", "FGW", "--scheme", "EFG", "--grid", 2, "--line")
    _, rows = csv_rows(out)
    for r in rows:
        if r["scheme"] in ("FGW", "L"):
            assert abs(float(r["gamma"]) - (GAMMA_C - float(r["chi"]))) <= 1e-9
    efg = sorted((float(r["chi"]), float(r["gamma"])) for r in rows if r["scheme"] == "EFG")
    anchors = sorted((float(r["chi"]), float(r["gamma"])) for r in rows if r["scheme"].startswith("anchor-"))
    assert efg == pytest.approx(anchors)
    keys = [(float(r["chi"]), float(r["gamma"]), r["scheme"]) for r in rows]
    assert keys == sorted(keys)


# -- gen / count / trace / markov -----------------------------------------------------


def test_gen_and_count(tmp_path, capsys):
    out = tmp_path / "u.cnf"
    assert run(capsys, "gen", "--planted", "-n", 12, "--unique", "--seed", 7, "--out", out)[0] == 0
    side = json.loads((tmp_path / "u.cnf.json").read_text())
    assert side["seed"] == 7 and side["kind"] == "planted" and side["n"] == 12
    code, text = run(capsys, "count", out)
    assert code == 0 and text == "1\n"
    again = tmp_path / "v.cnf"
    run(capsys, "gen", "--planted", "-n", 12, "--unique", "--seed", 7, "--out", again)
    assert out.read_bytes() == again.read_bytes()
    rnd = tmp_path / "r.cnf"
    run(capsys, "gen", "--random", "-n", 10, "--seed", 1, "--out", rnd)
    f = parse_dimacs(rnd.read_bytes())
    assert run(capsys, "count", rnd)[1] == f"{count_solutions(f)}\n"
    assert run(capsys, "gen", "--random", "-n", 10, "--seed", 1)[0] == EXIT_ERROR


def test_count_example(tmp_path, capsys):
    p = write(tmp_path, "a.cnf", "p cnf 3 1\n1 2 3 0\n")
    assert run(capsys, "count", p) == (0, "7\n")


def test_enum_limit_flag(tmp_path, capsys):
    p = write(tmp_path, "a.cnf", "p cnf 3 1\n1 2 3 0\n")
    before = os.environ.get("HYBRIDSAT_ENUM_LIMIT")
    code, out = run(capsys, "count", p, "--enum-limit", 2)
    assert code == EXIT_ERROR and "error" in json.loads(out)
    assert os.environ.get("HYBRIDSAT_ENUM_LIMIT") == before


def test_trace(tmp_path, capsys):
    p = write(tmp_path, "t.cnf", "p cnf 2 2\n1 0\n2 0\n")
    code, out = run(capsys, "trace", "--cnf", p, "--x0", "00", "--tape", "00")
    tr = json.loads(out)
    assert code == 0 and tr["states"] == ["00", "10", "11"] and tr["hit_step"] == 2
    code, out = run(capsys, "trace", "--cnf", p, "-m", 4, "--seed", 3)
    assert code == 0 and len(json.loads(out)["tape"]) == 4


def test_markov_table(capsys):
    _, out = run(capsys, "markov", "-n", 2, "-m", 2, "--exact")
    _, rows = csv_rows(out)
    # free walk from 0: any path ending at or below 0; absorbing walk: 0 is sticky
    assert [r["probability"] for r in rows] == ["5/9", "1/9", "1/9"]
    assert [r["absorbing"] for r in rows] == ["1", "1/3", "1/9"]


# -- experiments ------------------------------------------------------------------------


def test_experiment_output_independent_of_workers(capsys):
    base = ["experiment", "markov-vs-empirical", "-n", 8, "--instances", 4, "--walks", 500, "--seed", 2]
    a = run(capsys, *base)
    b = run(capsys, *base, "--workers", 2)
    assert a == b and a[0] == 0
    comments, rows = csv_rows(a[1])
    assert comments == ["# tool=hybridsat version=0.1.0 seed=2"]
    assert len(rows) == 4


def test_experiment_fig6_bins_and_fig7(capsys):
    _, out = run(capsys, "experiment", "fig6", "-n", 10, "--formulas", 30, "--table", "bins", "--seed", 0)
    _, rows = csv_rows(out)
    assert rows[0]["t0_bin"] == "1" and sum(int(r["count"]) for r in rows) <= 30
    _, out = run(capsys, "experiment", "fig7", "-n", 20, "--h-max", 3, "--samples", 500, "--seed", 0)
    comments, rows = csv_rows(out)
    assert any("slope=" in c for c in comments) and len(rows) == 4


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "hybridsat", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout
