"""Constrained convex problems, Lagrangians, dual bounds and KKT residuals.

Problem form::

    minimize    f0(q)
    subject to  f_i(q) <= 0,           i = 1..m
                A1 q + A2 q^i + A3 q^j + A4 q^k = b

Inequalities are opaque callables (value plus optional ``conj_grad``); the
equality block is a :class:`~quatopt.affine.WidelyAffineMap`.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .affine import WidelyAffineMap
from .ghr import conj_gradient, gradient_descent
from .linalg import (
    QArray,
    inner_product,
    inner_product_aug_quat,
    qzeros,
    to_aug_quat,
    to_aug_real,
)

__all__ = [
    "ConvexProblem",
    "LagrangePoint",
    "KKTReport",
    "DualBound",
    "OptimalityCheck",
    "lagrangian",
    "lagrangian_conj_gradient",
    "dual_lower_bound",
    "kkt_report",
    "first_order_optimality_check",
]


@dataclass(frozen=True, eq=False)
class ConvexProblem:
    f0: object
    ineqs: Sequence = ()
    eq: Optional[WidelyAffineMap] = None

    @property
    def m(self) -> int:
        return len(self.ineqs)

    @property
    def p(self) -> int:
        return 0 if self.eq is None else self.eq.p

    def is_feasible(self, q: QArray, tol: float = 1e-8) -> bool:
        if any(float(fi(q)) > tol for fi in self.ineqs):
            return False
        return self.eq is None or self.eq.apply(q).norm() <= tol


@dataclass(frozen=True, eq=False)
class LagrangePoint:
    """Primal point ``q`` with inequality duals ``nu`` and equality dual ``lam``."""

    q: QArray
    nu: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lam: Optional[QArray] = None

    def __post_init__(self):
        object.__setattr__(self, "nu", np.asarray(self.nu, dtype=float).reshape(-1))


def _check_dims(P: ConvexProblem, pt: LagrangePoint):
    if pt.nu.shape != (P.m,):
        raise ValueError(f"nu has length {pt.nu.size}, problem has {P.m} inequalities")
    if P.eq is not None:
        if pt.lam is None or pt.lam.shape != (P.p,):
            raise ValueError(f"lam must be a quaternion vector of length {P.p}")
        if pt.q.shape != (P.eq.n,):
            raise ValueError(f"q has shape {pt.q.shape}, constraints expect ({P.eq.n},)")


def lagrangian(P: ConvexProblem, pt: LagrangePoint, representation: str = "H") -> float:
    """Quaternion Lagrangian, evaluated in ``"H"`` (H^n), ``"R"`` or ``"AH"``.

    All three representations give the same value; ``"R"`` and ``"AH"`` exist
    so callers can check that.
    """
    _check_dims(P, pt)
    q = pt.q
    val = float(P.f0(q)) + sum(float(nu) * float(fi(q)) for nu, fi in zip(pt.nu, P.ineqs))
    if P.eq is None:
        return val
    lam = pt.lam
    if representation == "H":
        return val + inner_product(lam, P.eq.apply(q))
    if representation == "R":
        Ar, br = P.eq.to_aug_real_matrix()
        return val + float(to_aug_real(lam) @ (Ar @ to_aug_real(q) - br))
    if representation == "AH":
        Ah = P.eq.to_aug_quat_matrix()
        res = Ah @ to_aug_quat(q) - P.eq.aug_quat_offset()
        return val + inner_product_aug_quat(to_aug_quat(lam), res)
    raise ValueError(f"unknown representation {representation!r}")


def lagrangian_conj_gradient(P: ConvexProblem, pt: LagrangePoint) -> QArray:
    """``grad f0 + sum nu_i grad f_i + (1/4) adjoint(lam)`` at ``pt.q``."""
    q = pt.q
    g = conj_gradient(P.f0, q)
    for nu, fi in zip(pt.nu, P.ineqs):
        if nu != 0.0:
            g = g + conj_gradient(fi, q) * float(nu)
    if P.eq is not None:
        g = g + P.eq.adjoint_apply(pt.lam) / 4.0
    return g


@dataclass(frozen=True)
class KKTReport:
    primal_ineq_violation: float
    primal_eq_residual: float
    dual_nonneg_violation: float
    complementary_slackness: float
    stationarity_residual: float

    def max_residual(self) -> float:
        return max(asdict(self).values())

    def passes(self, tol: float = 1e-6) -> bool:
        return self.max_residual() <= tol

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> KKTReport:
        return cls(**json.loads(text))


def kkt_report(P: ConvexProblem, pt: LagrangePoint) -> KKTReport:
    _check_dims(P, pt)
    q = pt.q
    fvals = np.array([float(fi(q)) for fi in P.ineqs])
    if P.m:
        ineq = float(np.max(np.maximum(fvals, 0.0)))
        dual = float(np.max(np.maximum(-pt.nu, 0.0)))
        slack = float(np.max(np.abs(pt.nu * fvals)))
    else:
        ineq = dual = slack = 0.0
    eq = 0.0 if P.eq is None else P.eq.apply(q).norm()
    stat = lagrangian_conj_gradient(P, pt).norm()
    return KKTReport(ineq, eq, dual, slack, stat)


@dataclass
class DualBound:
    """Approximate dual function value.

    ``value`` is the smallest Lagrangian value found, so it over-estimates the
    infimum; it certifies a lower bound on the primal optimum only when the
    inner solve is accurate (small ``inner_grad_norm`` on a convex problem).
    """

    value: float
    inner_grad_norm: float
    iterations: int
    converged: bool
    q: QArray


def dual_lower_bound(P: ConvexProblem, nu, lam: Optional[QArray], q0: Optional[QArray] = None,
                     max_iter: int = 10000, tol: float = 1e-10) -> DualBound:
    nu = np.asarray(nu, dtype=float).reshape(-1)
    if np.any(nu < 0):
        raise ValueError("nu must be elementwise non-negative")
    if q0 is None:
        if P.eq is None:
            raise ValueError("q0 is required for problems without equality constraints")
        q0 = qzeros(P.eq.n)
    if P.eq is not None and lam is None:
        lam = qzeros(P.p)

    def L(q):
        return lagrangian(P, LagrangePoint(q, nu, lam))

    def grad(q):
        return lagrangian_conj_gradient(P, LagrangePoint(q, nu, lam))

    res = gradient_descent(L, q0, max_iter=max_iter, tol=tol, grad=grad)
    return DualBound(res.objective[-1], res.grad_norm[-1], res.iterations, res.converged, res.q)


@dataclass
class OptimalityCheck:
    holds: bool
    min_inner: float
    n_samples: int
    n_rejected: int


def first_order_optimality_check(P: ConvexProblem, q_cand: QArray, samples,
                                 tol: float = 1e-8, feas_tol: float = 1e-8) -> OptimalityCheck:
    """Sampled check of ``Re(grad f0(q)^H (r - q)) >= 0`` over feasible ``r``.

    A necessary condition evaluated on the supplied samples only; infeasible
    samples are skipped and counted.
    """
    if not P.is_feasible(q_cand, feas_tol):
        raise ValueError("candidate point is infeasible")
    g = conj_gradient(P.f0, q_cand)
    vals = []
    rejected = 0
    for r in samples:
        if not P.is_feasible(r, feas_tol):
            rejected += 1
            continue
        vals.append(inner_product(g, r - q_cand))
    if not vals:
        raise ValueError("no feasible samples supplied")
    mn = float(min(vals))
    return OptimalityCheck(mn >= -tol, mn, len(vals), rejected)
