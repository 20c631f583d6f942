"""Quaternion ADMM for two-block problems with widely affine coupling.

Solves::

    minimize    f(q) + g(p)
    subject to  A1 q + A2 q^i + A3 q^j + A4 q^k
              + B1 p + B2 p^i + B3 p^j + B4 p^k = c

in scaled form.  The subproblems are supplied as oracles:

* ``q_update(w, rho)`` returns ``argmin_q f(q) + rho/2 ||A(q) + w||^2``
  with ``w = B(p) - c + u``;
* ``p_update(w, rho)`` returns ``argmin_p g(p) + rho/2 ||B(p) + w||^2``
  with ``w = A(q) - c + u``.

``A(.)`` and ``B(.)`` denote the widely linear parts.  An oracle may return
either the minimizer or ``(minimizer, inner_residual)`` when it solves the
subproblem inexactly; the inner residual is recorded in the trace.

Convergence needs ``f`` and ``g`` closed, proper and convex and the
unaugmented Lagrangian to have a saddle point.  The solver cannot check these;
they are the caller's responsibility.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .affine import WidelyAffineMap, WidelyLinearOperator
from .linalg import HermitianSolver, QArray, project_first_block, qeye, qzeros, to_aug_quat

__all__ = [
    "Coupling",
    "ADMMConfig",
    "ADMMState",
    "ADMMProblem",
    "IterationRecord",
    "ConvergenceTrace",
    "ADMMResult",
    "OracleError",
    "coupling_residual",
    "step",
    "solve",
    "proximal_form_step",
    "consensus_problem",
    "quadratic_oracle",
]

TRACE_COLUMNS = ("k", "objective", "primal_res", "dual_res")


class OracleError(RuntimeError):
    """A subproblem oracle failed; the message carries the iteration."""


@dataclass(frozen=True, eq=False)
class Coupling:
    """Constraint ``A(q) + B(p) = c``; ``A`` and ``B`` are 4-tuples of matrices."""

    A: tuple
    B: tuple
    c: QArray

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(self.A))
        object.__setattr__(self, "B", tuple(self.B))
        if len(self.A) != 4 or len(self.B) != 4:
            raise ValueError("A and B must each hold four matrices")
        p, n = self.A[0].shape
        m = self.B[0].shape[1]
        if any(M.shape != (p, n) for M in self.A) or any(M.shape != (p, m) for M in self.B):
            raise ValueError("coupling matrices have inconsistent shapes")
        if self.c.shape != (p,):
            raise ValueError(f"c has shape {self.c.shape}, expected ({p},)")
        object.__setattr__(self, "_opA", WidelyLinearOperator(self.A))
        object.__setattr__(self, "_opB", WidelyLinearOperator(self.B))

    @classmethod
    def consensus(cls, n: int) -> Coupling:
        """``q - p = 0``."""
        z = qzeros((n, n))
        return cls((qeye(n), z, z, z), (-qeye(n), z, z, z), qzeros(n))

    @property
    def dims(self) -> tuple[int, int, int]:
        """``(n, m, p)``: sizes of q, p and the constraint."""
        p, n = self.A[0].shape
        return n, self.B[0].shape[1], p

    def apply_A(self, q: QArray) -> QArray:
        if q.shape != (self.dims[0],):
            raise ValueError(f"q has shape {q.shape}, expected ({self.dims[0]},)")
        return self._opA.apply(q)

    def apply_B(self, p: QArray) -> QArray:
        if p.shape != (self.dims[1],):
            raise ValueError(f"p has shape {p.shape}, expected ({self.dims[1]},)")
        return self._opB.apply(p)

    def adjoint_A(self, v: QArray) -> QArray:
        return self._opA.adjoint(v)

    def adjoint_B(self, v: QArray) -> QArray:
        return self._opB.adjoint(v)

    def a_map(self) -> WidelyAffineMap:
        return WidelyAffineMap(*self.A, qzeros(self.dims[2]))

    def b_map(self) -> WidelyAffineMap:
        return WidelyAffineMap(*self.B, qzeros(self.dims[2]))

    def to_aug_real(self):
        """``(Ar, Br, cr)`` for the equivalent real constraint."""
        Ar, _ = self.a_map().to_aug_real_matrix()
        Br, _ = self.b_map().to_aug_real_matrix()
        return Ar, Br, self.c.data.reshape(-1).copy()


def coupling_residual(coupling: Coupling, q: QArray, p: QArray) -> QArray:
    """Quaternion residual ``A(q) + B(p) - c``."""
    return coupling.apply_A(q) + coupling.apply_B(p) - coupling.c


@dataclass(frozen=True)
class ADMMConfig:
    rho: float = 1.0
    max_iter: int = 1000
    eps_abs: float = 1e-6
    eps_rel: float = 1e-4

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be strictly positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")
        if self.eps_abs < 0 or self.eps_rel < 0:
            raise ValueError("tolerances must be non-negative")


@dataclass(frozen=True, eq=False)
class ADMMState:
    q: QArray
    p: QArray
    u: QArray
    k: int = 0

    def lam(self, rho: float) -> QArray:
        """Unscaled dual variable ``rho * u``."""
        return self.u * rho

    @classmethod
    def zeros(cls, coupling: Coupling) -> ADMMState:
        n, m, p = coupling.dims
        return cls(qzeros(n), qzeros(m), qzeros(p), 0)


@dataclass(frozen=True, eq=False)
class ADMMProblem:
    q_update: Callable
    p_update: Callable
    coupling: Coupling
    objective: Optional[Callable[[QArray, QArray], float]] = None


@dataclass(frozen=True)
class IterationRecord:
    k: int
    objective: float
    primal_res: float
    dual_res: float
    eps_primal: float = math.nan
    eps_dual: float = math.nan
    q_inner: float = math.nan
    p_inner: float = math.nan


@dataclass
class ConvergenceTrace:
    records: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, rec: IterationRecord):
        self.records.append(rec)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def to_csv(self, fp=None, columns=TRACE_COLUMNS, extra: Optional[dict] = None) -> str:
        """Write ``k,objective,primal_res,dual_res`` (plus ``extra`` columns).

        Floats use ``repr`` so reruns are byte-identical.
        """
        extra = extra or {}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(columns) + list(extra))
        for i, r in enumerate(self.records):
            row = [getattr(r, c) for c in columns] + [extra[k][i] for k in extra]
            w.writerow([v if isinstance(v, int) else repr(float(v)) for v in row])
        text = buf.getvalue()
        if fp is not None:
            if isinstance(fp, (str, bytes)) or hasattr(fp, "__fspath__"):
                with open(fp, "w", newline="") as fh:
                    fh.write(text)
            else:
                fp.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> ConvergenceTrace:
        rows = list(csv.DictReader(io.StringIO(text)))
        recs = [IterationRecord(int(r["k"]), float(r["objective"]),
                                float(r["primal_res"]), float(r["dual_res"])) for r in rows]
        return cls(recs)

    def to_json(self) -> str:
        def clean(x):
            return None if isinstance(x, float) and math.isnan(x) else x
        rows = [{k: clean(v) for k, v in r.__dict__.items()} for r in self.records]
        return json.dumps({"records": rows})

    @classmethod
    def from_json(cls, text: str) -> ConvergenceTrace:
        rows = json.loads(text)["records"]
        return cls([IterationRecord(**{k: (math.nan if v is None else v) for k, v in r.items()})
                    for r in rows])


@dataclass
class ADMMResult:
    state: ADMMState
    trace: ConvergenceTrace
    status: str

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def _call_oracle(oracle, w, rho, name, k):
    try:
        out = oracle(w, rho)
    except Exception as exc:
        raise OracleError(f"{name} oracle failed at iteration {k + 1}: {exc}") from exc
    if isinstance(out, tuple):
        return out[0], float(out[1])
    return out, math.nan


def _advance(problem: ADMMProblem, config: ADMMConfig, state: ADMMState):
    cp = problem.coupling
    rho = config.rho
    Bp = cp.apply_B(state.p)
    q, q_inner = _call_oracle(problem.q_update, Bp - cp.c + state.u, rho, "q-update", state.k)
    Aq = cp.apply_A(q)
    p, p_inner = _call_oracle(problem.p_update, Aq - cp.c + state.u, rho, "p-update", state.k)
    Bp_new = cp.apply_B(p)
    r = Aq + Bp_new - cp.c
    new = ADMMState(q, p, state.u + r, state.k + 1)
    return new, dict(Aq=Aq, Bp=Bp_new, Bp_old=Bp, r=r, q_inner=q_inner, p_inner=p_inner)


def step(problem: ADMMProblem, config: ADMMConfig, state: ADMMState) -> ADMMState:
    """One scaled-form iteration: q-update, p-update, then ``u += r(q, p)``."""
    return _advance(problem, config, state)[0]


def solve(problem: ADMMProblem, config: ADMMConfig = ADMMConfig(),
          init: Optional[ADMMState] = None, callback=None) -> ADMMResult:
    """Iterate until the primal and dual residuals meet the tolerances.

    Stopping rule, with ``n`` and ``p`` the numbers of quaternion unknowns in
    ``q`` and quaternion constraints::

        ||r||  <= sqrt(4p) eps_abs + eps_rel max(||A q||, ||B p||, ||c||)
        ||s||  <= sqrt(4n) eps_abs + eps_rel rho ||A^*(u)||

    where ``s = rho A^*(B(p_new - p_old))`` is the dual residual.
    ``callback(state, info)`` is invoked after every iteration.
    """
    cp = problem.coupling
    n, _, pdim = cp.dims
    rho = config.rho
    state = ADMMState.zeros(cp) if init is None else init
    trace = ConvergenceTrace()
    status = "max_iter"
    cnorm = cp.c.norm()
    for _ in range(config.max_iter):
        state, info = _advance(problem, config, state)
        rnorm = info["r"].norm()
        s = cp.adjoint_A(info["Bp"] - info["Bp_old"]) * rho
        snorm = s.norm()
        eps_pri = math.sqrt(4 * pdim) * config.eps_abs + config.eps_rel * max(
            info["Aq"].norm(), info["Bp"].norm(), cnorm)
        eps_dual = math.sqrt(4 * n) * config.eps_abs + config.eps_rel * rho * cp.adjoint_A(state.u).norm()
        obj = math.nan if problem.objective is None else float(problem.objective(state.q, state.p))
        trace.append(IterationRecord(state.k, obj, rnorm, snorm, eps_pri, eps_dual,
                                     info["q_inner"], info["p_inner"]))
        if callback is not None:
            callback(state, info)
        if rnorm <= eps_pri and snorm <= eps_dual:
            status = "converged"
            break
    return ADMMResult(state, trace, status)


def proximal_form_step(f_prox, g_prox, state: ADMMState, rho: float) -> ADMMState:
    """Consensus (``q - p = 0``) iteration written with proximal operators.

    ``f_prox(v, rho)`` must return ``argmin f(x) + rho/2 ||x - v||^2``.
    """
    q = f_prox(state.p - state.u, rho)
    p = g_prox(q + state.u, rho)
    return ADMMState(q, p, state.u + q - p, state.k + 1)


def consensus_problem(f_prox, g_prox, n: int, objective=None) -> ADMMProblem:
    """Wrap two proximal operators as oracles for the ``q - p = 0`` coupling."""
    def q_update(w, rho):
        # A = I: minimize f(q) + rho/2 ||q + w||^2
        return f_prox(-w, rho)

    def p_update(w, rho):
        # B = -I: minimize g(p) + rho/2 ||p - w||^2
        return g_prox(w, rho)

    return ADMMProblem(q_update, p_update, Coupling.consensus(n), objective)


def quadratic_oracle(P: WidelyAffineMap, side_mats) -> Callable:
    """Exact oracle for ``1/2 ||P(x) - y||^2 + rho/2 ||M(x) + w||^2``.

    ``P`` carries the data term (matrices and ``y = P.b``); ``side_mats`` is
    the 4-tuple ``M`` of the coupling block acting on ``x``.  The normal
    equations are solved in the augmented quaternion domain and the first
    block is returned.  Factorizations are cached per ``rho``.
    """
    M = WidelyAffineMap(*side_mats, qzeros(side_mats[0].shape[0]))
    Ph = P.to_aug_quat_matrix()
    Mh = M.to_aug_quat_matrix()
    PhH = Ph.H
    MhH = Mh.H
    PtP = PhH @ Ph
    MtM = MhH @ Mh
    Pty = PhH @ P.aug_quat_offset()
    cache = {}

    def oracle(w: QArray, rho: float) -> QArray:
        if rho not in cache:
            cache.clear()
            cache[rho] = HermitianSolver(PtP + MtM * rho)
        rhs = Pty - (MhH @ to_aug_quat(w)) * rho
        return project_first_block(cache[rho].solve(rhs))

    return oracle

