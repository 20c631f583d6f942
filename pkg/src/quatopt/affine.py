"""Widely affine maps ``q -> A1 q + A2 q^i + A3 q^j + A4 q^k - b``.

The same object encodes equality constraints (``apply(q) == 0``) and the
coupling blocks of the ADMM solver.  Strictly affine maps ``A q - b`` are the
special case ``A2 = A3 = A4 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    QArray,
    from_aug_real,
    left_real_matrix,
    matmul,
    qeye,
    qzeros,
    to_aug_real,
)
from .quaternion import I, J, K

__all__ = ["WidelyAffineMap", "WidelyLinearOperator", "widely_linear", "widely_linear_adjoint"]

_AXES = ("1", "i", "j", "k")
# sign pattern of q^mu on the augmented real coordinates
_FLIPS = {
    "1": np.array([1.0, 1.0, 1.0, 1.0]),
    "i": np.array([1.0, 1.0, -1.0, -1.0]),
    "j": np.array([1.0, -1.0, 1.0, -1.0]),
    "k": np.array([1.0, -1.0, -1.0, 1.0]),
}


def widely_linear(mats, q: QArray) -> QArray:
    """``M1 q + M2 q^i + M3 q^j + M4 q^k`` for a 4-tuple of matrices."""
    out = None
    for M, ax in zip(mats, _AXES):
        if M is None:
            continue
        term = matmul(M, q.involution(ax))
        out = term if out is None else out + term
    return out


def widely_linear_adjoint(mats, lam: QArray) -> QArray:
    """``M1^H lam + (M2^H lam)^i + (M3^H lam)^j + (M4^H lam)^k``."""
    out = None
    for M, ax in zip(mats, _AXES):
        if M is None:
            continue
        term = matmul(M.H, lam).involution(ax)
        out = term if out is None else out + term
    return out


class WidelyLinearOperator:
    """Precomputed form of ``M1 q + M2 q^i + M3 q^j + M4 q^k`` for repeated use.

    All-zero blocks are dropped, real multiples of the identity are applied as
    scalars, and dense blocks keep their left real matrix so each product
    ``M x`` is a single real matvec (``R(M^H) = R(M)^T`` gives the adjoint).
    """

    def __init__(self, mats):
        self.shape = mats[0].shape
        self._terms = []
        for M, ax in zip(mats, _AXES):
            if M is None or not np.any(M.data):
                continue
            s = _identity_scale(M)
            self._terms.append((ax, s, None if s is not None else left_real_matrix(M)))

    def apply(self, q: QArray) -> QArray:
        return self._run(q, self.shape[0], adjoint=False)

    def adjoint(self, lam: QArray) -> QArray:
        return self._run(lam, self.shape[1], adjoint=True)

    def _run(self, x, out_len, adjoint):
        out = None
        for ax, s, R in self._terms:
            if s is not None:
                term = x.involution(ax) * s
            elif adjoint:
                term = from_aug_real(R.T @ to_aug_real(x)).involution(ax)
            else:
                term = from_aug_real(R @ to_aug_real(x.involution(ax)))
            out = term if out is None else out + term
        return qzeros((out_len,) + x.shape[1:]) if out is None else out


def _identity_scale(M: QArray):
    """``s`` if ``M == s I`` with real ``s``, else ``None``."""
    d = M.data
    if d.shape[1] != d.shape[2] or np.any(d[1:]):
        return None
    s = d[0, 0, 0]
    if np.array_equal(d[0], s * np.eye(d.shape[1])):
        return float(s)
    return None


@dataclass(frozen=True, eq=False)
class WidelyAffineMap:
    """Constraint data ``(A1, A2, A3, A4, b)`` with ``A_l`` of shape (p, n)."""

    A1: QArray
    A2: QArray
    A3: QArray
    A4: QArray
    b: QArray

    def __post_init__(self):
        shape = self.A1.shape
        if len(shape) != 2:
            raise ValueError("A1 must be a matrix")
        for name in ("A2", "A3", "A4"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if self.b.shape != (shape[0],):
            raise ValueError(f"b has shape {self.b.shape}, expected ({shape[0]},)")
        object.__setattr__(self, "_op", WidelyLinearOperator(self.matrices))

    @classmethod
    def strictly_affine(cls, A: QArray, b: QArray | None = None) -> WidelyAffineMap:
        z = qzeros(A.shape)
        return cls(A, z, z, z, qzeros(A.shape[0]) if b is None else b)

    @classmethod
    def identity(cls, n: int) -> WidelyAffineMap:
        return cls.strictly_affine(qeye(n))

    @property
    def p(self) -> int:
        return self.A1.shape[0]

    @property
    def n(self) -> int:
        return self.A1.shape[1]

    @property
    def matrices(self) -> tuple:
        return (self.A1, self.A2, self.A3, self.A4)

    def is_strictly_affine(self) -> bool:
        return all(not np.any(M.data) for M in (self.A2, self.A3, self.A4))

    def linear(self, q: QArray) -> QArray:
        """The map without its offset: ``A1 q + A2 q^i + A3 q^j + A4 q^k``."""
        if q.shape != (self.n,):
            raise ValueError(f"expected a vector of length {self.n}, got shape {q.shape}")
        return self._op.apply(q)

    def apply(self, q: QArray) -> QArray:
        """Constraint residual; zero iff ``q`` is feasible."""
        return self.linear(q) - self.b

    def adjoint_apply(self, lam: QArray) -> QArray:
        """Adjoint of :meth:`linear` under ``<x, y> = Re(x^H y)``."""
        if lam.shape != (self.p,):
            raise ValueError(f"expected a vector of length {self.p}, got shape {lam.shape}")
        return self._op.adjoint(lam)

    def to_aug_real_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(Ar, br)`` with ``apply(q) == 0  <=>  Ar @ to_aug_real(q) == br``."""
        Ar = np.zeros((4 * self.p, 4 * self.n))
        for M, ax in zip(self.matrices, _AXES):
            Ar += left_real_matrix(M) * np.repeat(_FLIPS[ax], self.n)[None, :]
        return Ar, to_aug_real(self.b)

    def to_aug_quat_matrix(self) -> QArray:
        """Band-structured 4p x 4n matrix acting on augmented quaternion vectors."""
        A = self.matrices
        # row r holds (A_{perm[r][0]}, ...)^{axis r}
        perm = ((0, 1, 2, 3), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0))
        rows = []
        for ax, idx in zip(_AXES, perm):
            rows.append(np.concatenate([A[t].involution(ax).data for t in idx], axis=2))
        return QArray(np.concatenate(rows, axis=1))

    def aug_quat_offset(self) -> QArray:
        b = self.b
        return QArray(np.concatenate([b.involution(ax).data for ax in _AXES], axis=1))

    @classmethod
    def from_aug_real_matrix(cls, Ar, br) -> WidelyAffineMap:
        """Inverse of :meth:`to_aug_real_matrix`."""
        Ar = np.asarray(Ar, dtype=float)
        br = np.asarray(br, dtype=float)
        if Ar.ndim != 2 or Ar.shape[0] % 4 or Ar.shape[1] % 4:
            raise ValueError(f"augmented real matrix shape {Ar.shape} is not a multiple of 4")
        if br.shape != (Ar.shape[0],):
            raise ValueError(f"offset has shape {br.shape}, expected ({Ar.shape[0]},)")
        p, n = Ar.shape[0] // 4, Ar.shape[1] // 4
        blocks = Ar.reshape(4, p, 4, n)
        # column block j read as one quaternion matrix, row block r -> component r
        At = [QArray(blocks[:, :, j, :]) for j in range(4)]
        A1 = (At[0] - At[1] * I - At[2] * J - At[3] * K) / 4.0
        A2 = (At[0] - At[1] * I + At[2] * J + At[3] * K) / 4.0
        A3 = (At[0] + At[1] * I - At[2] * J + At[3] * K) / 4.0
        A4 = (At[0] + At[1] * I + At[2] * J - At[3] * K) / 4.0
        return cls(A1, A2, A3, A4, from_aug_real(br))

    def allclose(self, other: WidelyAffineMap, atol: float = 1e-12) -> bool:
        pairs = zip(self.matrices + (self.b,), other.matrices + (other.b,))
        return all(x.shape == y.shape and x.allclose(y, atol=atol) for x, y in pairs)
