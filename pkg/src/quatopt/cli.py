"""Command line interface.

Exit codes: 0 converged, 2 iteration limit reached, 1 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .admm import ADMMConfig
from .io import QuatFormatError

EXIT_OK, EXIT_ERROR, EXIT_MAX_ITER = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_admm_flags(p, rho=1.0):
    p.add_argument("--rho", type=float, default=rho, help="penalty parameter (default %(default)s)")
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--eps-abs", type=float, default=1e-6)
    p.add_argument("--eps-rel", type=float, default=1e-4)
    p.add_argument("--output-dir", default=".", help="directory for all output files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quatopt", description="Quaternion ADMM solvers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bpdn", help="pure-quaternion basis pursuit denoising experiment")
    b.add_argument("--m", type=int, default=10)
    b.add_argument("--n", type=int, default=1000)
    b.add_argument("--beta", type=float, default=0.05)
    b.add_argument("--sigma", type=float, default=0.1)
    b.add_argument("--sparsity", type=float, default=0.03)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--reference-iters", type=int, default=1000,
                   help="length of the run that estimates the optimal value")
    _add_admm_flags(b)

    w = sub.add_parser("wlls", help="constrained widely linear least squares from a manifest")
    w.add_argument("manifest", help="JSON manifest with P1..P4, y and the constraint set")
    w.add_argument("--subsolver", choices=("explicit", "gd"), default="explicit")
    w.add_argument("--inner-iters", type=int, default=200)
    _add_admm_flags(w)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    from .experiment import ExperimentConfig, run_bpdn_experiment, run_wlls

    try:
        if args.command == "bpdn":
            cfg = ExperimentConfig(m=args.m, n=args.n, beta=args.beta, rho=args.rho, sigma=args.sigma,
                                   sparsity=args.sparsity, seed=args.seed, max_iter=args.max_iter,
                                   eps_abs=args.eps_abs, eps_rel=args.eps_rel,
                                   reference_iters=args.reference_iters)
            summary = run_bpdn_experiment(cfg, args.output_dir)
        else:
            config = ADMMConfig(args.rho, args.max_iter, args.eps_abs, args.eps_rel)
            summary = run_wlls(args.manifest, config, args.subsolver, args.inner_iters, args.output_dir)
    except (QuatFormatError, ValueError, OSError) as exc:
        print(f"quatopt: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{args.command}: {summary['status']} after {summary['iterations']} iterations "
          f"(primal {summary['final_primal_res']:.3e}, dual {summary['final_dual_res']:.3e})")
    return EXIT_OK if summary["status"] == "converged" else EXIT_MAX_ITER


if __name__ == "__main__":
    sys.exit(main())
