"""GHR derivatives and gradients of real-valued functions of quaternion vectors.

Everything here is built from the real partials ``df/dq_a, df/dq_b, ...``:
either central finite differences or, when the function carries one, an
analytic conjugated gradient (from which the partials follow exactly since
``grad_conj = (1/4)(d_a + i d_b + j d_c + k d_d)``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .affine import WidelyAffineMap
from .linalg import QArray, inner_product
from .quaternion import I, J, K, Quaternion, rotate

__all__ = [
    "RealFunction",
    "WLQuadratic",
    "fd_step",
    "real_partials",
    "ghr_derivative",
    "conj_gradient",
    "gradient",
    "real_gradient",
    "aug_quat_gradient",
    "wl_quadratic_conj_gradient",
    "StationarityReport",
    "is_stationary",
    "DescentResult",
    "gradient_descent",
    "directional_fd",
    "predicted_directional",
]


@dataclass(frozen=True)
class RealFunction:
    """A real-valued function of a quaternion vector.

    ``conj_grad``, if given, returns the conjugated gradient at ``q``.
    """

    value: Callable[[QArray], float]
    conj_grad: Optional[Callable[[QArray], QArray]] = None

    def __call__(self, q: QArray) -> float:
        return float(self.value(q))


def fd_step(q: QArray) -> float:
    return 1e-6 * max(1.0, q.norm())


def real_partials(f, q: QArray, h: float | None = None) -> np.ndarray:
    """Central-difference real partials, returned as planes of shape (4, n)."""
    if h is None:
        h = fd_step(q)
    x0 = q.data
    out = np.empty_like(x0)
    for idx in np.ndindex(x0.shape):
        xp = x0.copy()
        xm = x0.copy()
        xp[idx] += h
        xm[idx] -= h
        out[idx] = (f(QArray(xp)) - f(QArray(xm))) / (2.0 * h)
    return out


def _partials(f, q, numeric):
    if not numeric and getattr(f, "conj_grad", None) is not None:
        return 4.0 * f.conj_grad(q).data
    return real_partials(f, q)


def ghr_derivative(f, q: QArray, mu=Quaternion(1.0), conjugated: bool = False,
                   numeric: bool = False) -> QArray:
    """Entrywise GHR derivative of ``f`` w.r.t. ``q^mu`` (or ``conj(q)^mu``).

    Returns the vector ``(df/dq_1^mu, ..., df/dq_n^mu)``.  ``numeric=True``
    forces finite differences even if ``f`` has an analytic gradient.
    """
    return _ghr_from_partials(_partials(f, q, numeric), mu, conjugated)


def _ghr_from_partials(d: np.ndarray, mu, conjugated: bool) -> QArray:
    if isinstance(mu, (int, float)):
        mu = Quaternion(float(mu))
    if abs(mu) == 0.0:
        raise ZeroDivisionError("rotation axis mu must be nonzero")
    s = 1.0 if conjugated else -1.0
    units = [rotate(u, mu).to_array() for u in (I, J, K)]
    shape = (4,) + (1,) * (d.ndim - 1)
    out = np.zeros_like(d)
    out[0] = d[0]
    for comp, u in zip(d[1:], units):
        out = out + s * u.reshape(shape) * comp
    return QArray(out / 4.0)


def conj_gradient(f, q: QArray, numeric: bool = False) -> QArray:
    """Conjugated gradient ``grad_{conj q} f``: the steepest-ascent direction."""
    if not numeric and getattr(f, "conj_grad", None) is not None:
        return f.conj_grad(q)
    return ghr_derivative(f, q, conjugated=True, numeric=True)


def gradient(f, q: QArray, numeric: bool = False) -> QArray:
    return conj_gradient(f, q, numeric).conj()


def real_gradient(f, q: QArray, numeric: bool = False) -> np.ndarray:
    """Stacked real gradient in R^{4n}."""
    return _partials(f, q, numeric).reshape(-1)


def aug_quat_gradient(f, q: QArray, conjugated: bool = True,
                      numeric: bool = False) -> QArray:
    """Stack of the mu-gradients for mu = 1, i, j, k."""
    blocks = [ghr_derivative(f, q, mu, conjugated, numeric).data
              for mu in (Quaternion(1.0), I, J, K)]
    return QArray(np.concatenate(blocks, axis=1))


@dataclass(frozen=True, eq=False)
class WLQuadratic:
    """``f(q) = 1/2 || P1 q + P2 q^i + P3 q^j + P4 q^k - y ||^2``."""

    P1: QArray
    P2: QArray
    P3: QArray
    P4: QArray
    y: QArray

    def __post_init__(self):
        # reuse the shape validation of the affine map
        object.__setattr__(self, "_map", WidelyAffineMap(self.P1, self.P2, self.P3, self.P4, self.y))

    @classmethod
    def linear(cls, P: QArray, y: QArray) -> WLQuadratic:
        m = WidelyAffineMap.strictly_affine(P, y)
        return cls(*m.matrices, y)

    @property
    def map(self) -> WidelyAffineMap:
        return self._map

    @property
    def shape(self) -> tuple[int, int]:
        return self.P1.shape

    def residual(self, q: QArray) -> QArray:
        return self._map.apply(q)

    def __call__(self, q: QArray) -> float:
        r = self.residual(q)
        return 0.5 * r.norm() ** 2

    def conj_grad(self, q: QArray) -> QArray:
        return wl_quadratic_conj_gradient(self, q)

    def as_function(self) -> RealFunction:
        return RealFunction(self.__call__, self.conj_grad)


def wl_quadratic_conj_gradient(Q: WLQuadratic, q: QArray) -> QArray:
    """Closed-form conjugated gradient of a widely linear quadratic.

    ``(1/4) (P1^H r + (P2^H r)^i + (P3^H r)^j + (P4^H r)^k)`` with ``r`` the
    widely linear residual.
    """
    r = Q.residual(q)
    return Q.map.adjoint_apply(r) / 4.0


@dataclass
class StationarityReport:
    stationary: bool
    norms: dict
    tol: float

    @property
    def residual(self) -> float:
        return self.norms["grad_qbar"]


def is_stationary(f, q: QArray, tol: float = 1e-8, numeric: bool = False,
                  agreement_tol: float = 1e-8) -> StationarityReport:
    """Evaluate the five equivalent stationarity residuals at ``q``.

    Norms are reported in the native norm of each representation, scaled so
    they coincide: the augmented real gradient carries a factor 4, and the
    augmented quaternion vectors use ``sqrt(h^H h / 4)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    d = _partials(f, q, numeric)
    axes = (Quaternion(1.0), I, J, K)
    g_r = d.reshape(-1)
    g_qbar = _ghr_from_partials(d, axes[0], True)
    g_q = _ghr_from_partials(d, axes[0], False)
    h_bar = QArray(np.concatenate([_ghr_from_partials(d, mu, True).data for mu in axes], axis=1))
    h = QArray(np.concatenate([_ghr_from_partials(d, mu, False).data for mu in axes], axis=1))
    norms = {
        "grad_q": g_q.norm(),
        "grad_qbar": g_qbar.norm(),
        "grad_R": float(np.linalg.norm(g_r)) / 4.0,
        "grad_H": h.norm() / 2.0,
        "grad_Hbar": h_bar.norm() / 2.0,
    }
    vals = np.array(list(norms.values()))
    if vals.max() - vals.min() > agreement_tol * (1.0 + vals.max()):
        raise RuntimeError(f"gradient representations disagree: {norms}")
    return StationarityReport(norms["grad_qbar"] <= tol, norms, tol)


@dataclass
class DescentResult:
    q: QArray
    converged: bool
    iterations: int
    objective: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    steps: list = field(default_factory=list)


def gradient_descent(f, q0: QArray, step_rule=None, max_iter: int = 1000,
                     tol: float = 1e-8, c1: float = 1e-4, max_halvings: int = 60,
                     grad=None) -> DescentResult:
    """Quaternion gradient descent ``q <- q - eta * grad_{conj q} f(q)``.

    Parameters
    ----------
    step_rule : None, float or callable
        ``None`` selects backtracking (halving from 1.0 until sufficient
        decrease); a float is a constant step; a callable maps the iteration
        index to a step.
    grad : callable, optional
        Conjugated gradient; defaults to :func:`conj_gradient`.

    Returns
    -------
    DescentResult
        Last iterate and per-iteration objective, gradient norm and step.
        Non-convergence is reported through ``converged``.
    """
    if grad is None:
        def grad(x):
            return conj_gradient(f, x)

    q = q0
    fq = float(f(q))
    res = DescentResult(q, False, 0)
    g = grad(q)
    for it in range(max_iter + 1):
        gn = g.norm()
        res.objective.append(fq)
        res.grad_norm.append(gn)
        if gn <= tol:
            res.converged = True
            break
        if it == max_iter:
            break
        g_new = None
        if step_rule is None:
            eta = 1.0
            # once decreases reach the rounding level of f, fall back on a
            # decrease of the gradient norm
            slack = 8.0 * np.finfo(float).eps * abs(fq)
            for _ in range(max_halvings):
                q_new = q - g * eta
                f_new = float(f(q_new))
                # directional derivative along -g is -4 ||g||^2
                if f_new <= fq - c1 * eta * 4.0 * gn * gn:
                    break
                if f_new <= fq + slack:
                    g_new = grad(q_new)
                    if g_new.norm() < gn:
                        break
                    g_new = None
                eta *= 0.5
            else:
                break  # no decrease possible at working precision
        else:
            eta = float(step_rule(it, q, g) if callable(step_rule) else step_rule)
            if eta <= 0:
                raise ValueError("step size must be positive")
            q_new = q - g * eta
            f_new = float(f(q_new))
        res.steps.append(eta)
        q, fq = q_new, f_new
        g = grad(q) if g_new is None else g_new
        res.iterations = it + 1
    res.q = q
    return res


def directional_fd(f, q: QArray, direction: QArray, h: float | None = None) -> float:
    """Central-difference directional derivative, an independent gradient check."""
    if h is None:
        h = fd_step(q)
    return (f(q + direction * h) - f(q - direction * h)) / (2.0 * h)


def predicted_directional(g_conj: QArray, direction: QArray) -> float:
    """Directional derivative implied by a conjugated gradient: ``4 Re(g^H d)``."""
    return 4.0 * inner_product(g_conj, direction)

