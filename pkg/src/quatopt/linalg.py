"""Dense quaternion vectors and matrices and their augmented representations.

A :class:`QArray` keeps four real planes ``(a, b, c, d)`` stacked on a leading
axis, so ``data.shape == (4,) + shape``.  With that layout the augmented real
vector of ``q`` in H^n is ``data.reshape(4 * n)``.

Two augmented forms are used throughout:

* augmented real ``(q_a; q_b; q_c; q_d)`` in R^{4n};
* augmented quaternion ``(q; q^i; q^j; q^k)`` in H^{4n}.

They are linked by ``J_n`` (see :func:`j_matrix`), which is only built for
verification; conversions use the closed-form stacking rules.
"""

from __future__ import annotations

from numbers import Real

import numpy as np
import scipy.linalg as sla

from .quaternion import (
    Quaternion,
    conj_planes,
    hamilton,
    involution_planes,
)

__all__ = [
    "QArray",
    "qzeros",
    "qeye",
    "qrandn",
    "matmul",
    "to_aug_real",
    "from_aug_real",
    "to_aug_quat",
    "project_first_block",
    "j_matrix",
    "inner_product",
    "inner_product_aug_real",
    "inner_product_aug_quat",
    "norm2",
    "left_real_matrix",
    "qsolve",
    "HermitianSolver",
]


class QArray:
    """Dense array of quaternions.

    Parameters
    ----------
    data : array_like, shape (4, ...)
        Component planes.  The array is copied and frozen.
    """

    __slots__ = ("_data",)
    __array_priority__ = 1000  # keep ndarray * QArray from broadcasting elementwise

    def __init__(self, data):
        arr = np.array(data, dtype=float)
        if arr.ndim == 0 or arr.shape[0] != 4:
            raise ValueError(f"expected leading axis of length 4, got shape {arr.shape}")
        arr.flags.writeable = False
        self._data = arr

    @classmethod
    def from_components(cls, a, b=None, c=None, d=None) -> QArray:
        a = np.asarray(a, dtype=float)
        z = np.zeros_like(a)
        planes = [a] + [z if x is None else np.broadcast_to(np.asarray(x, float), a.shape)
                        for x in (b, c, d)]
        return cls(np.stack(planes))

    @classmethod
    def from_quaternions(cls, values) -> QArray:
        """Build from a (nested) sequence of :class:`Quaternion` or reals."""
        obj = np.asarray(values, dtype=object)
        out = np.zeros((4,) + obj.shape)
        for idx in np.ndindex(obj.shape):
            v = obj[idx]
            q = v if isinstance(v, Quaternion) else Quaternion(float(v))
            out[(slice(None),) + idx] = q.to_array()
        return cls(out)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple:
        return self._data.shape[1:]

    @property
    def ndim(self) -> int:
        return self._data.ndim - 1

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=int))

    def __len__(self) -> int:
        return self.shape[0]

    @property
    def a(self):
        return self._data[0]

    @property
    def b(self):
        return self._data[1]

    @property
    def c(self):
        return self._data[2]

    @property
    def d(self):
        return self._data[3]

    @property
    def real(self) -> np.ndarray:
        return self._data[0]

    def imag(self) -> QArray:
        out = self._data.copy()
        out[0] = 0.0
        return QArray(out)

    def conj(self) -> QArray:
        return QArray(conj_planes(self._data))

    def involution(self, axis: str) -> QArray:
        """Entrywise canonical involution, ``axis`` in ``{"1", "i", "j", "k"}``."""
        return QArray(involution_planes(self._data, axis))

    @property
    def T(self) -> QArray:
        if self.ndim != 2:
            raise ValueError("transpose needs a matrix")
        return QArray(self._data.transpose(0, 2, 1))

    @property
    def H(self) -> QArray:
        """Conjugate (Hermitian) transpose."""
        return self.T.conj()

    def reshape(self, *shape) -> QArray:
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return QArray(self._data.reshape((4,) + tuple(shape)))

    def abs(self) -> np.ndarray:
        """Entrywise modulus."""
        return np.sqrt(np.sum(self._data ** 2, axis=0))

    def norm(self) -> float:
        """2-norm for vectors, Frobenius norm for matrices."""
        return float(np.sqrt(np.sum(self._data ** 2)))

    def copy(self) -> QArray:
        return QArray(self._data)

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        sub = self._data[(slice(None),) + idx]
        if sub.ndim == 1:
            return Quaternion.from_array(sub)
        return QArray(sub)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    # arithmetic -----------------------------------------------------------

    @staticmethod
    def _planes(x):
        if isinstance(x, QArray):
            return x._data
        if isinstance(x, Quaternion):
            return x.to_array()
        if isinstance(x, Real):
            return np.array([float(x), 0.0, 0.0, 0.0])
        return None

    @staticmethod
    def _aligned(x, ndim):
        # scalar planes (4,) broadcast against (4, ...) arrays
        if x.ndim == 1:
            return x.reshape((4,) + (1,) * ndim)
        return x

    def __add__(self, other):
        y = self._planes(other)
        if y is None:
            return NotImplemented
        return QArray(self._data + self._aligned(y, self.ndim))

    __radd__ = __add__

    def __sub__(self, other):
        y = self._planes(other)
        if y is None:
            return NotImplemented
        return QArray(self._data - self._aligned(y, self.ndim))

    def __rsub__(self, other):
        y = self._planes(other)
        if y is None:
            return NotImplemented
        return QArray(self._aligned(y, self.ndim) - self._data)

    def __neg__(self):
        return QArray(-self._data)

    def __mul__(self, other):
        """Entrywise Hamilton product ``self * other`` (self on the left)."""
        if isinstance(other, Real):
            return QArray(self._data * float(other))
        y = self._planes(other)
        if y is None:
            return NotImplemented
        return QArray(hamilton(self._data, self._aligned(y, self.ndim)))

    def __rmul__(self, other):
        if isinstance(other, Real):
            return QArray(self._data * float(other))
        y = self._planes(other)
        if y is None:
            return NotImplemented
        return QArray(hamilton(self._aligned(y, self.ndim), self._data))

    def __truediv__(self, other):
        if isinstance(other, Real):
            return QArray(self._data / float(other))
        return NotImplemented

    def __matmul__(self, other):
        if not isinstance(other, QArray):
            return NotImplemented
        return matmul(self, other)

    def __eq__(self, other):
        return isinstance(other, QArray) and np.array_equal(self._data, other._data)

    __hash__ = None

    def allclose(self, other, atol: float = 1e-12, rtol: float = 0.0) -> bool:
        return bool(np.allclose(self._data, QArray._planes(other), atol=atol, rtol=rtol))

    def __repr__(self) -> str:
        return f"QArray(shape={self.shape})"


def qzeros(shape) -> QArray:
    if isinstance(shape, int):
        shape = (shape,)
    return QArray(np.zeros((4,) + tuple(shape)))


def qeye(n: int) -> QArray:
    data = np.zeros((4, n, n))
    data[0] = np.eye(n)
    return QArray(data)


def qrandn(rng: np.random.Generator, shape, scale: float = 1.0) -> QArray:
    """Quaternion unit Gaussian: four i.i.d. N(0, 1) components per entry."""
    if isinstance(shape, int):
        shape = (shape,)
    return QArray(scale * rng.standard_normal((4,) + tuple(shape)))


def _as_matrix(x: QArray):
    if x.ndim == 1:
        return x._data[:, :, None], True
    return x._data, False


def matmul(A: QArray, B: QArray) -> QArray:
    """Quaternion matrix product; vectors are treated as columns."""
    if A.ndim != 2:
        raise ValueError("left operand must be a matrix")
    Bd, squeeze = _as_matrix(B)
    if A.shape[1] != Bd.shape[1]:
        raise ValueError(f"inner dimensions disagree: {A.shape} @ {B.shape}")
    out = hamilton(A._data, Bd, np.matmul)
    return QArray(out[:, :, 0] if squeeze else out)


# --- representations --------------------------------------------------------

def to_aug_real(q: QArray) -> np.ndarray:
    """Stack components: vectors give R^{4n}; matrices give (4m, n) row blocks."""
    d = q.data
    return d.reshape((4 * d.shape[1],) + d.shape[2:]).copy()


def from_aug_real(x) -> QArray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] % 4:
        raise ValueError(f"augmented real length {x.shape[0]} is not divisible by 4")
    return QArray(x.reshape((4, x.shape[0] // 4) + x.shape[1:]))


def to_aug_quat(q: QArray) -> QArray:
    """Return ``(q; q^i; q^j; q^k)`` stacked along the first axis."""
    blocks = [q.data] + [involution_planes(q.data, ax) for ax in "ijk"]
    return QArray(np.concatenate(blocks, axis=1))


def project_first_block(h: QArray) -> QArray:
    """Keep the first quarter of an augmented quaternion vector."""
    n4 = h.shape[0]
    if n4 % 4:
        raise ValueError(f"augmented quaternion length {n4} is not divisible by 4")
    return QArray(h.data[:, : n4 // 4])


def j_matrix(n: int) -> QArray:
    """The 4n x 4n matrix mapping augmented real to augmented quaternion vectors."""
    if n < 1:
        raise ValueError("n must be positive")
    # block (r, c) is sign[r][c] * unit[c] * I_n
    signs = np.array([[1, 1, 1, 1],
                      [1, 1, -1, -1],
                      [1, -1, 1, -1],
                      [1, -1, -1, 1]], dtype=float)
    data = np.zeros((4, 4 * n, 4 * n))
    eye = np.eye(n)
    for r in range(4):
        for c in range(4):
            data[c, r * n:(r + 1) * n, c * n:(c + 1) * n] = signs[r, c] * eye
    return QArray(data)


def inner_product(q: QArray, p: QArray) -> float:
    """``Re(q^H p)``."""
    if q.shape != p.shape:
        raise ValueError(f"length mismatch: {q.shape} vs {p.shape}")
    qH = q.conj().data
    return float(np.sum(hamilton(qH, p.data)[0]))


def inner_product_aug_real(x, y) -> float:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return float(x @ y)


def inner_product_aug_quat(h: QArray, g: QArray) -> float:
    """``(1/4) h^H g``; real for members of the augmented quaternion set."""
    if h.shape != g.shape:
        raise ValueError(f"length mismatch: {h.shape} vs {g.shape}")
    s = hamilton(h.conj().data, g.data).sum(axis=1)
    return float(s[0]) / 4.0


def norm2(q: QArray) -> float:
    return q.norm()


# --- linear solves ----------------------------------------------------------

def left_real_matrix(A: QArray) -> np.ndarray:
    """Real 4m x 4n matrix of ``x -> A x`` acting on augmented real vectors."""
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    Aa, Ab, Ac, Ad = A.data
    return np.block([[Aa, -Ab, -Ac, -Ad],
                     [Ab, Aa, -Ad, Ac],
                     [Ac, Ad, Aa, -Ab],
                     [Ad, -Ac, Ab, Aa]])


def qsolve(A: QArray, B: QArray) -> QArray:
    """Solve ``A X = B`` for square quaternion ``A`` (LU with partial pivoting)."""
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if B.shape[0] != A.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    x = sla.solve(left_real_matrix(A), to_aug_real(B))
    return from_aug_real(x)


class HermitianSolver:
    """Cholesky factorization of a Hermitian positive definite quaternion matrix.

    The real representation of a Hermitian quaternion matrix is symmetric,
    and positive definite whenever the quaternion matrix is.
    """

    def __init__(self, A: QArray):
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        self.n = A.shape[0]
        R = left_real_matrix(A)
        self._factor = sla.cho_factor(0.5 * (R + R.T))

    def solve(self, B: QArray) -> QArray:
        if B.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: n={self.n}, rhs {B.shape}")
        return from_aug_real(sla.cho_solve(self._factor, to_aug_real(B)))
