"""Batch runs: the pure-quaternion BPDN experiment and file-based WLLS solves."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .admm import ADMMConfig
from .io import load_wlls_manifest, write_qarray
from .kkt import kkt_report
from .solvers import BPDNProblem, BPDNQSolver, bpdn_solve, make_pure_instance, wlls_kkt_point, wlls_solve

__all__ = ["ExperimentConfig", "run_bpdn_experiment", "run_wlls", "EXPERIMENT_COLUMNS"]

EXPERIMENT_COLUMNS = ("k", "objective", "suboptimality", "primal_res", "dual_res")


@dataclass(frozen=True)
class ExperimentConfig:
    m: int = 10
    n: int = 1000
    beta: float = 0.05
    rho: float = 1.0
    sigma: float = 0.1
    sparsity: float = 0.03
    seed: int = 0
    max_iter: int = 1000
    eps_abs: float = 1e-6
    eps_rel: float = 1e-4
    reference_iters: int = 1000

    def __post_init__(self):
        self.admm_config()  # validates rho, max_iter and tolerances
        if not self.beta > 0:
            raise ValueError("beta must be strictly positive")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.reference_iters < 1:
            raise ValueError("reference_iters must be positive")
        if not (1 <= self.m < self.n):
            raise ValueError("need 1 <= m < n")

    def admm_config(self) -> ADMMConfig:
        return ADMMConfig(self.rho, self.max_iter, self.eps_abs, self.eps_rel)


def run_bpdn_experiment(cfg: ExperimentConfig, output_dir=None) -> dict:
    """Generate an instance, estimate the optimal value, run the measured solve.

    The optimal value ``nu*`` is the final objective of a run of
    ``reference_iters`` iterations with the stopping rule disabled.  With
    ``output_dir`` set, writes ``bpdn_trace.csv`` (columns
    ``k,objective,suboptimality,primal_res,dual_res``), ``bpdn_solution.csv``
    and ``bpdn_summary.json``.  Returns the summary plus the raw result under
    ``"result"``.
    """
    t0 = time.perf_counter()
    D, q0, y = make_pure_instance(cfg.m, cfg.n, cfg.sparsity, cfg.sigma, cfg.seed)
    problem = BPDNProblem(D, y, cfg.beta)
    qsolver = BPDNQSolver(D, y, cfg.rho)
    ref_cfg = ADMMConfig(cfg.rho, cfg.reference_iters, 0.0, 0.0)
    ref = bpdn_solve(problem, ref_cfg, qsolver=qsolver)
    nu_star = float(ref.trace.column("objective")[-1])
    res = bpdn_solve(problem, cfg.admm_config(), qsolver=qsolver)
    wall = time.perf_counter() - t0

    tr = res.trace
    subopt = tr.column("objective") - nu_star
    summary = {
        "seed": cfg.seed,
        "config": asdict(cfg),
        "status": res.status,
        "iterations": len(tr),
        "final_objective": float(tr.records[-1].objective),
        "final_suboptimality": float(subopt[-1]),
        "final_primal_res": float(tr.records[-1].primal_res),
        "final_dual_res": float(tr.records[-1].dual_res),
        "max_constraint_norm": float(np.max(res.constraint_norms)),
        "nu_star": nu_star,
        "reference": {
            "iterations": len(ref.trace),
            "final_primal_res": float(ref.trace.records[-1].primal_res),
            "final_dual_res": float(ref.trace.records[-1].dual_res),
        },
        "nnz": int(np.count_nonzero(res.p.abs())),
        "wall_time_s": wall,
    }
    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        columns = ("k", "objective")
        text = tr.to_csv(columns=columns, extra={"suboptimality": subopt,
                                                 "primal_res": tr.column("primal_res"),
                                                 "dual_res": tr.column("dual_res")})
        (out / "bpdn_trace.csv").write_text(text)
        write_qarray(out / "bpdn_solution.csv", res.p)
        (out / "bpdn_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    summary["result"] = res
    summary["reference_result"] = ref
    summary["instance"] = (D, q0, y)
    return summary


def run_wlls(manifest, config: ADMMConfig = ADMMConfig(), subsolver: str = "explicit",
             inner_iters: int = 200, output_dir=None) -> dict:
    """Solve the WLLS problem described by ``manifest``.

    Writes ``wlls_solution.csv``, ``wlls_trace.csv`` and ``wlls_summary.json``
    when ``output_dir`` is given.
    """
    P = load_wlls_manifest(manifest)
    res = wlls_solve(P, config, subsolver=subsolver, inner_iters=inner_iters)
    kkt = kkt_report(*wlls_kkt_point(P, res, config.rho))
    summary = {
        "status": res.status,
        "iterations": len(res.trace),
        "subsolver": subsolver,
        "constraint": P.constraint,
        "objective": P.objective(res.state.p),
        "final_primal_res": float(res.trace.records[-1].primal_res),
        "final_dual_res": float(res.trace.records[-1].dual_res),
        "kkt": kkt.to_dict(),
    }
    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_qarray(out / "wlls_solution.csv", res.state.p)
        res.trace.to_csv(out / "wlls_trace.csv")
        (out / "wlls_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    summary["result"] = res
    return summary
