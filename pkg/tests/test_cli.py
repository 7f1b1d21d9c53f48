import csv
import io
import json
import math

import numpy as np
import pytest

from trunclap import cli
from trunclap.pde_solver import read_binary


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_parse_length():
    assert cli.parse_length("pi") == math.pi
    assert cli.parse_length("2pi") == 2 * math.pi
    assert cli.parse_length("pi/128") == math.pi / 128
    assert cli.parse_length("3*pi/2") == 1.5 * math.pi
    assert cli.parse_length("1.25") == 1.25
    for bad in ("", "-1", "pie", "0"):
        with pytest.raises(Exception):
            cli.parse_length(bad)


def test_eigen_closed_cube(capsys):
    code, rep = run_json(capsys, "eigen-closed", "--cube", "-n", "2", "--side", "pi")
    assert code == 0
    assert rep["mu"] == pytest.approx(0.5, rel=1e-15)
    assert rep["schema_version"] == cli.SCHEMA_VERSION
    assert rep["config"]["n"] == 2 and rep["config"]["side"] == math.pi
    assert rep["max_abs_residual"] <= 1e-10


def test_eigen_closed_rect_and_ball(capsys):
    code, rep = run_json(capsys, "eigen-closed", "--rect", "1,2", "--side", "pi")
    assert code == 0 and rep["mu"] == pytest.approx(0.8)
    np.testing.assert_allclose(rep["exponents"], [0.25, 4.0])
    code, rep = run_json(capsys, "eigen-closed", "--ball", "--rho", "1.5707963", "-n", "2", "-k", "1")
    assert code == 0 and rep["mu"] == pytest.approx(1.0, abs=1e-7)


def test_usage_errors_exit_1(capsys):
    assert run(capsys, "eigen-closed", "--cube", "--bogus")[0] == 1
    assert run(capsys, "eigen-closed", "--cube", "-n", "2", "-k", "2")[0] == 1
    assert run(capsys, "eigen-closed", "--ball", "-n", "2")[0] == 1
    assert run(capsys, "fk", "--alpha", "1,2")[0] == 1
    assert run(capsys, "lieb", "--alpha", "2,1")[0] == 1
    assert run(capsys, "counterexample", "-n", "3", "-k", "2", "-a", "2", "-b", "1")[0] == 1
    assert run(capsys, "nope")[0] == 1


def test_lieb(capsys):
    code, rep = run_json(capsys, "lieb", "--alpha", "1,2")
    assert code == 0 and rep["reversed"] is True
    assert rep["inf_coef"] == "2" and rep["sum_coef"] == "8/5"
    assert rep["grid_search_inf"] == pytest.approx(rep["mu_intersection_inf"])
    code, rep = run_json(capsys, "lieb", "--alpha", "1,3", "--squared")
    assert code == 2 and rep["reversed"] is False
    code, rep = run_json(capsys, "lieb", "--alpha", "1,10,10")
    assert code == 0 and rep["reversed"] is True


def test_counterexample(capsys):
    code, rep = run_json(capsys, "counterexample", "-n", "3", "-k", "2")
    assert code == 0
    assert rep["bound_over_u"] == pytest.approx(0.5)
    assert rep["sandwich"] is True and rep["verified"] is True


def test_fk_and_fk2(capsys):
    code, rep = run_json(capsys, "fk", "--alpha", "1,1,1")
    assert code == 0 and rep["is_equality"] is True
    code, rep = run_json(capsys, "fk", "--random", "200", "-n", "4")
    assert code == 0 and rep["count"] == 200 and rep["max_ratio"] <= 1 + 1e-12
    code, rep = run_json(capsys, "fk2", "--dims", "2-4")
    assert code == 0 and rep["rows"][0]["ratio"] == pytest.approx(1.5708, abs=1e-4)


def test_holder_and_remark(capsys):
    code, rep = run_json(capsys, "holder", "--polygon", "5", "--alpha", "2", "--beta", "0.4", "--fit-dim", "2")
    assert code == 0 and rep["supersolution_holds"] and rep["cubes"] == 5
    code, rep = run_json(capsys, "remark", "-n", "2")
    assert code == 0 and rep["u_center"] == pytest.approx(0.25)
    code, rep = run_json(capsys, "remark", "-n", "2", "--sigma", "1")
    assert code == 2 and rep["concave"] is False


def test_eigen_numeric_refinement_csv(capsys, tmp_path):
    snap = tmp_path / "u.bin"
    plot = tmp_path / "err.png"
    code, out, _ = run(capsys, "eigen-numeric", "--square", "--h", "pi/8", "--refine", "3", "--format", "csv",
                       "--snapshot", str(snap), "--plot", str(plot))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) >= 3 and {"h", "mu_h"} <= set(rows[0])
    errs = [float(r["rel_error"]) for r in rows]
    assert errs[0] > errs[1] > errs[2]
    assert read_binary(snap).dim == 2
    assert plot.stat().st_size > 0


def test_numeric_failure_exit_3(capsys):
    code, _, err = run(capsys, "eigen-numeric", "--disc", "--h", "pi/8", "--max-iter", "1", "--solver-tol", "1e-300")
    assert code == 3
    assert "history" in json.loads(err)


def test_output_file_and_float_format(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "fk2", "--dims", "2", "--output", str(path))
    assert code == 0
    text = path.read_text()
    rep = json.loads(text)
    assert rep["rows"][0]["ratio"] == pytest.approx(math.pi / 2)
    assert "1.5707963267948968" in text  # 17 significant digits


def test_threads_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("TRUNCLAP_THREADS", "3")
    _, rep = run_json(capsys, "lieb", "--alpha", "1,2")
    assert rep["config"]["threads"] == 3
    _, rep = run_json(capsys, "lieb", "--alpha", "1,2", "--threads", "2")
    assert rep["config"]["threads"] == 2


def test_deterministic_given_seed(capsys):
    a = run(capsys, "remark", "-n", "3", "--seed", "5")[1]
    b = run(capsys, "remark", "-n", "3", "--seed", "5")[1]
    assert a == b


def test_plots_written(capsys, tmp_path):
    for args in (["eigen-closed", "--cube", "-n", "2"], ["eigen-closed", "--ball", "-n", "3", "--rho", "1"],
                 ["fk2", "--dims", "2-5"], ["remark", "-n", "1"], ["holder"], ["fk", "--random", "20"]):
        path = tmp_path / f"{args[0]}_{len(args)}.png"
        code, _, _ = run(capsys, *args, "--plot", str(path))
        assert code == 0 and path.stat().st_size > 0


def test_explore_negative_is_exploratory(capsys):
    code, rep = run_json(capsys, "explore-negative", "--h", "pi/4", "--refine", "2")
    assert code == 0 and len(rep["rows"]) == 2
