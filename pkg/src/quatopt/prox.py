"""Proximal operators and projections on quaternion vectors (entrywise)."""

from __future__ import annotations

import numpy as np

from .linalg import QArray

__all__ = ["l1_norm", "prox_l1", "project_nonneg_parts", "project_soc", "in_nonneg_parts", "in_soc"]


def l1_norm(q: QArray) -> float:
    """Sum of entry moduli (the real l2,1 norm of the n x 4 component array)."""
    return float(np.sum(q.abs()))


def prox_l1(q: QArray, lam: float) -> QArray:
    """Quaternion soft thresholding ``max(0, 1 - lam/|q_i|) q_i``.

    Entries with ``|q_i| <= lam`` (including zeros) map to 0.
    """
    if lam < 0:
        raise ValueError("threshold must be non-negative")
    if lam == 0:
        return q
    mag = q.abs()
    scale = np.zeros_like(mag)
    keep = mag > lam
    scale[keep] = 1.0 - lam / mag[keep]
    return QArray(q.data * scale)


def project_nonneg_parts(q: QArray) -> QArray:
    """Clamp each of the four components at zero."""
    return QArray(np.maximum(q.data, 0.0))


def project_soc(q: QArray) -> QArray:
    """Entrywise projection onto ``{q_a >= sqrt(q_b^2 + q_c^2 + q_d^2)}``."""
    t = q.data[0]
    v = q.data[1:]
    s = np.sqrt(np.sum(v * v, axis=0))
    out = np.zeros_like(q.data)
    inside = t >= s
    out[:, inside] = q.data[:, inside]
    mid = (~inside) & (t > -s)
    alpha = 0.5 * (t[mid] + s[mid])
    out[0, mid] = alpha
    out[1:, mid] = alpha * v[:, mid] / s[mid]
    return QArray(out)


def in_nonneg_parts(q: QArray, tol: float = 0.0) -> bool:
    return bool(np.all(q.data >= -tol))


def in_soc(q: QArray, tol: float = 0.0) -> bool:
    s = np.sqrt(np.sum(q.data[1:] ** 2, axis=0))
    return bool(np.all(q.data[0] >= s - tol))
