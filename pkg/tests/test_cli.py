import json
import subprocess
import sys

import numpy as np
import pytest

from quatopt.cli import main
from quatopt.io import read_qvector, save_wlls_manifest
from quatopt.linalg import qeye, qrandn
from quatopt.prox import project_nonneg_parts
from quatopt.solvers import WLLSProblem

SMALL_BPDN = ["bpdn", "--m", "4", "--n", "40", "--sparsity", "0.05", "--reference-iters", "300",
              "--max-iter", "200"]


def test_wlls_identity_manifest(tmp_path, capsys):
    y = qrandn(np.random.default_rng(0), 4)
    man = save_wlls_manifest(WLLSProblem.linear(qeye(4), y), tmp_path)
    code = main(["wlls", str(man), "--eps-abs", "1e-12", "--eps-rel", "0", "--max-iter", "2000",
                 "--output-dir", str(tmp_path / "out")])
    assert code == 0
    assert "converged" in capsys.readouterr().out
    assert read_qvector(tmp_path / "out" / "wlls_solution.csv").allclose(project_nonneg_parts(y), atol=1e-9)
    summary = json.loads((tmp_path / "out" / "wlls_summary.json").read_text())
    assert summary["status"] == "converged" and summary["kkt"]["stationarity_residual"] < 1e-6
    assert (tmp_path / "out" / "wlls_trace.csv").read_text().startswith("k,objective,primal_res,dual_res")


def test_wlls_subsolvers_agree(tmp_path):
    rng = np.random.default_rng(1)
    P = WLLSProblem(*(qrandn(rng, (5, 3), scale=s) for s in (1, .3, .3, .3)), qrandn(rng, 5), "soc_cone")
    man = save_wlls_manifest(P, tmp_path)
    flags = ["--rho", "80", "--eps-abs", "1e-11", "--eps-rel", "1e-11", "--max-iter", "5000"]
    assert main(["wlls", str(man), "--output-dir", str(tmp_path / "e")] + flags) == 0
    assert main(["wlls", str(man), "--subsolver", "gd", "--inner-iters", "500",
                 "--output-dir", str(tmp_path / "g")] + flags) == 0
    a = read_qvector(tmp_path / "e" / "wlls_solution.csv")
    b = read_qvector(tmp_path / "g" / "wlls_solution.csv")
    assert a.allclose(b, atol=1e-6)


def test_malformed_input_exits_1(tmp_path, capsys):
    man = save_wlls_manifest(WLLSProblem.linear(qeye(2), qrandn(np.random.default_rng(2), 2)), tmp_path)
    (tmp_path / "wlls_P1.csv").write_text("2,2\n0,0,1,2\n")
    assert main(["wlls", str(man)]) == 1
    err = capsys.readouterr().err
    assert "wlls_P1.csv:2: expected 6 fields" in err


def test_missing_manifest_exits_1(tmp_path, capsys):
    assert main(["wlls", str(tmp_path / "none.json")]) == 1
    assert "cannot read manifest" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["bpdn", "--rho", "x"], ["wlls"], ["bpdn", "--beta", "0"],
                                  ["bpdn", "--m", "5", "--n", "5"]])
def test_bad_arguments_exit_1(argv, tmp_path):
    try:
        code = main(argv + (["--output-dir", str(tmp_path)] if argv[:1] == ["bpdn"] else []))
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_bpdn_outputs_are_deterministic(tmp_path, capsys):
    codes = [main(SMALL_BPDN + ["--output-dir", str(tmp_path / d)]) for d in ("a", "b")]
    assert codes[0] == codes[1] and codes[0] in (0, 2)
    a = (tmp_path / "a" / "bpdn_trace.csv").read_bytes()
    assert a == (tmp_path / "b" / "bpdn_trace.csv").read_bytes()
    assert a.decode().splitlines()[0] == "k,objective,suboptimality,primal_res,dual_res"
    summary = json.loads((tmp_path / "a" / "bpdn_summary.json").read_text())
    assert summary["max_constraint_norm"] < 1e-10
    assert summary["status"] == ("converged" if codes[0] == 0 else "max_iter")


def test_bpdn_iteration_limit_exit_code(tmp_path):
    assert main(SMALL_BPDN[:-1] + ["3", "--output-dir", str(tmp_path)]) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "quatopt", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "bpdn" in out.stdout
