"""Application solvers built on Q-ADMM.

* Constrained widely linear least squares (WLLS)::

      minimize 1/2 ||P1 q + P2 q^i + P3 q^j + P4 q^k - y||^2   s.t.  q in C

  with ``C`` the non-negative-parts cone, the entrywise second-order cone or
  a user projection.

* 3D basis pursuit denoising (BPDN) with pure-quaternion codes::

      minimize 1/2 ||y - D q||^2 + beta ||q||_1   s.t.  Re(D q) = 0
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg as sla

from .admm import ADMMConfig, ADMMResult, consensus_problem, quadratic_oracle, solve
from .affine import WidelyAffineMap
from .ghr import RealFunction, WLQuadratic, gradient_descent, wl_quadratic_conj_gradient
from .kkt import ConvexProblem, LagrangePoint
from .linalg import HermitianSolver, QArray, from_aug_real, left_real_matrix, matmul, qeye, qrandn, qzeros
from .prox import l1_norm, project_nonneg_parts, project_soc, prox_l1

__all__ = [
    "WLLSProblem",
    "BPDNProblem",
    "BPDNQSolver",
    "BPDNResult",
    "wlls_solve",
    "wlls_kkt_point",
    "bpdn_solve",
    "bpdn_subproblem",
    "bpdn_subgradient_residual",
    "make_pure_instance",
]

CONSTRAINTS = ("nonneg_parts", "soc_cone")


@dataclass(frozen=True, eq=False)
class WLLSProblem:
    P1: QArray
    P2: QArray
    P3: QArray
    P4: QArray
    y: QArray
    constraint: Union[str, Callable[[QArray], QArray]] = "nonneg_parts"

    def __post_init__(self):
        if isinstance(self.constraint, str) and self.constraint not in CONSTRAINTS:
            raise ValueError(f"unknown constraint set {self.constraint!r}; use one of {CONSTRAINTS}")
        if not isinstance(self.constraint, str) and not callable(self.constraint):
            raise TypeError("constraint must be a name or a projection callable")
        object.__setattr__(self, "_quad", WLQuadratic(self.P1, self.P2, self.P3, self.P4, self.y))

    @classmethod
    def linear(cls, P: QArray, y: QArray, constraint="nonneg_parts") -> WLLSProblem:
        z = qzeros(P.shape)
        return cls(P, z, z, z, y, constraint)

    @property
    def quadratic(self) -> WLQuadratic:
        return self._quad

    @property
    def n(self) -> int:
        return self.P1.shape[1]

    def project(self, q: QArray) -> QArray:
        if self.constraint == "nonneg_parts":
            return project_nonneg_parts(q)
        if self.constraint == "soc_cone":
            return project_soc(q)
        return self.constraint(q)

    def objective(self, q: QArray) -> float:
        return self._quad(q)


def _explicit_oracle(P: WLLSProblem):
    quad = P.quadratic
    if quad.map.is_strictly_affine():
        # (P1^H P1 + rho I) q = P1^H y + rho v
        PhP = matmul(P.P1.H, P.P1)
        Phy = matmul(P.P1.H, P.y)
        cache = {}

        def oracle(w, rho):
            if rho not in cache:
                cache.clear()
                cache[rho] = HermitianSolver(PhP + qeye(P.n) * rho)
            return cache[rho].solve(Phy - w * rho)

        return oracle
    z = qzeros((P.n, P.n))
    return quadratic_oracle(quad.map, (qeye(P.n), z, z, z))


def _gd_oracle(P: WLLSProblem, inner_iters: int, inner_tol: float):
    quad = P.quadratic
    warm = {"q": qzeros(P.n)}

    def oracle(w, rho):
        v = -w
        # h(q) = ||P(q) - y||^2 + rho ||q - v||^2
        def h(q):
            return 2.0 * quad(q) + rho * (q - v).norm() ** 2

        def grad(q):
            return wl_quadratic_conj_gradient(quad, q) * 2.0 + (q - v) * (rho / 2.0)

        def exact_step(it, q, g):
            # minimizer of h(q - eta g) for the quadratic h
            gg = g.norm() ** 2
            return 2.0 * gg / (quad.map.linear(g).norm() ** 2 + rho * gg)

        res = gradient_descent(h, warm["q"], step_rule=exact_step, max_iter=inner_iters,
                               tol=inner_tol, grad=grad)
        warm["q"] = res.q
        return res.q, res.grad_norm[-1]

    return oracle


def wlls_solve(P: WLLSProblem, config: ADMMConfig = ADMMConfig(), subsolver: str = "explicit",
               inner_iters: int = 200, inner_tol: float = 1e-12, callback=None) -> ADMMResult:
    """Solve a constrained WLLS problem with Q-ADMM.

    Parameters
    ----------
    subsolver : {"explicit", "gd"}
        ``"explicit"`` solves the q-update exactly through the augmented
        quaternion normal equations (or the n x n system when only ``P1`` is
        nonzero).  ``"gd"`` runs up to ``inner_iters`` warm-started quaternion
        gradient steps with exact line search on the quadratic; the final
        inner gradient norm is recorded in the trace.
    """
    if subsolver == "explicit":
        q_oracle = _explicit_oracle(P)
    elif subsolver in ("gd", "gradient_descent"):
        if inner_iters < 1:
            raise ValueError("inner_iters must be positive")
        q_oracle = _gd_oracle(P, inner_iters, inner_tol)
    else:
        raise ValueError(f"unknown subsolver {subsolver!r}")

    def f_prox(v, rho):
        return q_oracle(-v, rho)

    def g_prox(v, rho):
        return P.project(v)

    problem = consensus_problem(f_prox, g_prox, P.n, lambda q, p: P.objective(q))
    return solve(problem, config, callback=callback)


def _linear_ineq(plane: int, idx: int) -> RealFunction:
    """``-q_idx[plane] <= 0``."""
    def value(q):
        return -float(q.data[plane, idx])

    def conj_grad(q):
        g = np.zeros_like(q.data)
        g[plane, idx] = -0.25
        return QArray(g)

    return RealFunction(value, conj_grad)


def _soc_ineq(idx: int, apex_dir: np.ndarray) -> RealFunction:
    """``||v_idx|| - t_idx <= 0``; ``apex_dir`` picks the subgradient at v = 0."""
    def value(q):
        return float(np.linalg.norm(q.data[1:, idx]) - q.data[0, idx])

    def conj_grad(q):
        g = np.zeros_like(q.data)
        v = q.data[1:, idx]
        s = np.linalg.norm(v)
        g[0, idx] = -0.25
        g[1:, idx] = 0.25 * (v / s if s > 0 else apex_dir)
        return QArray(g)

    return RealFunction(value, conj_grad)


def wlls_kkt_point(P: WLLSProblem, result: ADMMResult, rho: float):
    """KKT data for a WLLS solution.

    Returns ``(ConvexProblem, LagrangePoint)`` at the feasible iterate ``p``.
    The inequality multipliers come from the scaled dual: ``nu = -rho u``
    componentwise for the non-negative cone and ``nu_i = -rho Re(u_i)`` for
    the second-order cone.
    """
    q = result.state.p
    u = result.state.u
    n = P.n
    f0 = P.quadratic.as_function()
    if P.constraint == "nonneg_parts":
        ineqs = [_linear_ineq(c, i) for c in range(4) for i in range(n)]
        nu = -rho * u.data.reshape(-1)
    elif P.constraint == "soc_cone":
        ineqs = []
        nu = -rho * u.data[0].copy()
        for i in range(n):
            d = np.zeros(3)
            if nu[i] > 0:
                # apex: the normal direction fixes the subgradient
                d = -u.data[1:, i] / u.data[0, i]
            ineqs.append(_soc_ineq(i, d))
    else:
        raise ValueError("KKT data is only available for the built-in cones")
    return ConvexProblem(f0, ineqs), LagrangePoint(q, nu)


# --- basis pursuit denoising ------------------------------------------------

@dataclass(frozen=True, eq=False)
class BPDNProblem:
    D: QArray
    y: QArray
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be strictly positive")
        if self.D.ndim != 2 or self.y.shape != (self.D.shape[0],):
            raise ValueError(f"shapes do not conform: D {self.D.shape}, y {self.y.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.D.shape

    def data_fit(self, q: QArray) -> float:
        return 0.5 * (self.y - matmul(self.D, q)).norm() ** 2

    def objective(self, q: QArray, p: Optional[QArray] = None) -> float:
        """``1/2 ||y - D q||^2 + beta ||p||_1`` (``p`` defaults to ``q``)."""
        return self.data_fit(q) + self.beta * l1_norm(q if p is None else p)

    def constraint_map(self) -> WidelyAffineMap:
        """``D q + D^i q^i + D^j q^j + D^k q^k = 4 Re(D q)``."""
        D = self.D
        return WidelyAffineMap(D, D.involution("i"), D.involution("j"), D.involution("k"),
                               qzeros(D.shape[0]))


class BPDNQSolver:
    """Exact solver of the BPDN q-subproblem for a fixed ``D`` and ``rho``::

        minimize 1/2 ||y - D q||^2 + rho/2 ||q - v||^2   s.t.  Re(D q) = 0

    With ``M = D^H D + rho I`` and ``Z = M^{-1} D^H``::

        q_un   = M^{-1} (rho v + D^H y)
        Re lam = 1/4 Re(D Z)^{-1} Re(D q_un)
        q      = q_un - 4 Z Re(lam)

    ``M`` is inverted through the m x m matrix ``rho I + D D^H`` when m < n.
    Both factorizations happen once, here.
    """

    def __init__(self, D: QArray, y: QArray, rho: float):
        if not rho > 0:
            raise ValueError("rho must be strictly positive")
        self.D, self.y, self.rho = D, y, float(rho)
        m, n = D.shape
        DH = D.H
        self._DH = DH
        if m < n:
            self._small = HermitianSolver(matmul(D, DH) + qeye(m) * rho)
            self._big = None
        else:
            self._small = None
            self._big = HermitianSolver(matmul(DH, D) + qeye(n) * rho)
        self.Z = self.apply_Minv(DH)
        K = matmul(D, self.Z).data[0]
        K = 0.5 * (K + K.T)
        try:
            self._K = sla.cho_factor(K)
        except np.linalg.LinAlgError as exc:
            raise ValueError("Re(D (D^H D + rho I)^-1 D^H) is singular: the real part of D "
                             "is rank deficient for this constraint") from exc
        self._c0 = self.apply_Minv(matmul(DH, y))
        self.last_lam = qzeros(m)

    def apply_Minv(self, X: QArray) -> QArray:
        if self._big is not None:
            return self._big.solve(X)
        # Woodbury: M^-1 = (I - D^H (rho I + D D^H)^-1 D) / rho
        return (X - matmul(self._DH, self._small.solve(matmul(self.D, X)))) / self.rho

    def unconstrained(self, v: QArray) -> QArray:
        return self._c0 + self.apply_Minv(v) * self.rho

    def solve(self, v: QArray) -> QArray:
        q_un = self.unconstrained(v)
        re_lam = 0.25 * sla.cho_solve(self._K, matmul(self.D, q_un).data[0])
        lam = np.zeros((4, re_lam.size))
        lam[0] = re_lam
        self.last_lam = QArray(lam)
        return q_un - matmul(self.Z, self.last_lam) * 4.0

    def __call__(self, v: QArray, rho: float) -> QArray:
        if rho != self.rho:
            raise ValueError(f"solver was factored for rho={self.rho}, called with {rho}")
        return self.solve(v)


@dataclass
class BPDNResult:
    """Q-ADMM result plus the constraint certificate.

    ``constraint_norms[k]`` is ``||Re(D q^(k+1))||``; ``lam`` is the multiplier
    of the last q-subproblem and ``v`` its prox centre.
    """

    admm: ADMMResult
    constraint_norms: np.ndarray
    lam: QArray
    v: QArray
    rho: float

    @property
    def q(self) -> QArray:
        return self.admm.state.q

    @property
    def p(self) -> QArray:
        return self.admm.state.p

    @property
    def trace(self):
        return self.admm.trace

    @property
    def status(self) -> str:
        return self.admm.status

    @property
    def converged(self) -> bool:
        return self.admm.converged


def bpdn_solve(P: BPDNProblem, config: ADMMConfig = ADMMConfig(), callback=None,
               qsolver: Optional[BPDNQSolver] = None) -> BPDNResult:
    """Solve BPDN with Q-ADMM: exact constrained q-update, soft-threshold p-update.

    ``qsolver`` may be passed to reuse factorizations across runs on the same
    ``D`` and ``rho``.
    """
    rho = config.rho
    if qsolver is None:
        qsolver = BPDNQSolver(P.D, P.y, rho)
    elif qsolver.rho != rho or qsolver.D is not P.D:
        raise ValueError("qsolver was built for a different D or rho")
    norms = []
    centre = {"v": qzeros(P.shape[1])}

    def f_prox(v, r):
        centre["v"] = v
        return qsolver(v, r)

    def g_prox(v, r):
        return prox_l1(v, P.beta / r)

    def cb(state, info):
        norms.append(float(np.linalg.norm(matmul(P.D, state.q).data[0])))
        if callback is not None:
            callback(state, info)

    problem = consensus_problem(f_prox, g_prox, P.shape[1], P.objective)
    res = solve(problem, config, callback=cb)
    return BPDNResult(res, np.array(norms), qsolver.last_lam, centre["v"], rho)


def bpdn_subproblem(P: BPDNProblem, v: QArray, rho: float) -> ConvexProblem:
    """The q-subproblem as a :class:`ConvexProblem` (for KKT checks)."""
    D, y = P.D, P.y

    def value(q):
        return P.data_fit(q) + 0.5 * rho * (q - v).norm() ** 2

    def conj_grad(q):
        r = matmul(D, q) - y
        return matmul(D.H, r) * 0.25 + (q - v) * (rho / 4.0)

    return ConvexProblem(RealFunction(value, conj_grad), eq=P.constraint_map())


def bpdn_subgradient_residual(P: BPDNProblem, q: QArray, p: QArray, lam: QArray) -> float:
    """Distance from optimality of the full BPDN problem.

    With ``G = D^H (D q - y) + 4 D^H Re(lam)`` optimality requires
    ``-G_i = beta p_i / |p_i|`` on the support of ``p`` and ``|G_i| <= beta``
    off it.  Returns the largest violation.
    """
    D = P.D
    lr = np.zeros_like(lam.data)
    lr[0] = lam.data[0]
    G = matmul(D.H, matmul(D, q) - P.y + QArray(lr) * 4.0).data
    mag = np.sqrt(np.sum(p.data ** 2, axis=0))
    on = mag > 0
    worst = 0.0
    if np.any(on):
        target = -P.beta * p.data[:, on] / mag[on]
        worst = float(np.max(np.linalg.norm(G[:, on] - target, axis=0)))
    if np.any(~on):
        gm = np.linalg.norm(G[:, ~on], axis=0)
        worst = max(worst, float(np.max(np.maximum(gm - P.beta, 0.0))))
    return worst


def make_pure_instance(m: int, n: int, sparsity: float, sigma: float, seed: int,
                       max_resample: int = 100):
    """Random BPDN instance ``(D, q0, y)`` with ``Re(D q0) = 0``.

    ``D`` has quaternion Gaussian entries and unit columns; ``q0`` has
    ``round(sparsity n)`` nonzeros whose coefficients are projected onto the
    null space of ``c -> Re(D_S c)``; ``y = D q0`` plus pure-quaternion noise
    of standard deviation ``sigma`` per imaginary component.
    """
    if not (isinstance(m, (int, np.integer)) and isinstance(n, (int, np.integer))) or m < 1 or m >= n:
        raise ValueError("need integers 1 <= m < n")
    if not 0 < sparsity < 1:
        raise ValueError("sparsity must lie in (0, 1)")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    rng = np.random.default_rng(seed)
    D = qrandn(rng, (m, n))
    cols = np.sqrt(np.sum(D.data ** 2, axis=(0, 1)))
    D = QArray(D.data / cols)
    k = max(1, int(round(sparsity * n)))
    for _ in range(max_resample):
        support = np.sort(rng.choice(n, size=k, replace=False))
        coef = rng.standard_normal(4 * k)
        Ds = QArray(D.data[:, :, support])
        R = left_real_matrix(Ds)[:m]  # real-part rows
        if np.linalg.matrix_rank(R) >= 4 * k:
            continue
        coef = coef - np.linalg.pinv(R) @ (R @ coef)
        if np.linalg.norm(coef) > 1e-8:
            break
    else:
        raise RuntimeError("could not draw a support with a nontrivial null space")
    q0 = np.zeros((4, n))
    q0[:, support] = from_aug_real(coef).data
    q0 = QArray(q0)
    noise = np.zeros((4, m))
    noise[1:] = sigma * rng.standard_normal((3, m))
    y = matmul(D, q0) + QArray(noise)
    return D, q0, y
