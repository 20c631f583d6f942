import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import real_matrix_loop
from strategies import rng_from, seeds

from quatopt.linalg import (
    HermitianSolver,
    QArray,
    from_aug_real,
    inner_product,
    inner_product_aug_quat,
    inner_product_aug_real,
    j_matrix,
    left_real_matrix,
    matmul,
    norm2,
    project_first_block,
    qeye,
    qrandn,
    qsolve,
    qzeros,
    to_aug_quat,
    to_aug_real,
)
from quatopt.quaternion import I, J, K, Quaternion, involution


def qvec(*quats):
    return QArray.from_quaternions(list(quats))


def test_matmul_units():
    A = QArray.from_quaternions([[I]])
    B = QArray.from_quaternions([[J]])
    assert matmul(A, B)[0, 0] == K
    assert (A @ B)[0, 0] == K


@given(seeds)
def test_matmul_identity_and_hermitian(seed):
    rng = rng_from(seed)
    A = qrandn(rng, (2, 3))
    B = qrandn(rng, (3, 2))
    assert matmul(A, qeye(3)).allclose(A)
    assert matmul(A, B).H.allclose(matmul(B.H, A.H), atol=1e-12)


@given(seeds)
def test_matmul_is_associative(seed):
    rng = rng_from(seed)
    A, B, C = qrandn(rng, (3, 4)), qrandn(rng, (4, 2)), qrandn(rng, (2, 5))
    lhs = matmul(matmul(A, B), C)
    rhs = matmul(A, matmul(B, C))
    assert (lhs - rhs).norm() <= 1e-12 * max(1.0, lhs.norm())


def test_matmul_entry_order():
    # (AB)_ij = sum_k A_ik B_kj with A on the left
    rng = np.random.default_rng(3)
    A, B = qrandn(rng, (2, 3)), qrandn(rng, (3, 2))
    C = matmul(A, B)
    for i in range(2):
        for j in range(2):
            s = Quaternion()
            for k in range(3):
                s = s + A[i, k] * B[k, j]
            assert C[i, j].isclose(s)


def test_matmul_dimension_mismatch():
    with pytest.raises(ValueError):
        matmul(qzeros((2, 3)), qzeros((2, 3)))


def test_left_real_matrix_matches_loop_builder():
    rng = np.random.default_rng(0)
    A = qrandn(rng, (3, 2))
    np.testing.assert_allclose(left_real_matrix(A), real_matrix_loop(A), atol=1e-14)


def test_aug_real_examples():
    q = qvec(Quaternion(1, 2, 3, 4))
    np.testing.assert_array_equal(to_aug_real(q), [1, 2, 3, 4])
    np.testing.assert_array_equal(to_aug_real(qzeros(3)), np.zeros(12))
    with pytest.raises(ValueError):
        from_aug_real(np.zeros(7))


@given(seeds, st.integers(1, 10))
def test_aug_real_roundtrip(seed, n):
    q = qrandn(rng_from(seed), n)
    assert from_aug_real(to_aug_real(q)) == q


def test_aug_quat_examples():
    h = to_aug_quat(qvec(I))
    assert [h[t] for t in range(4)] == [I, I, -I, -I]
    r = qvec(Quaternion(2.5), Quaternion(-1))
    h = to_aug_quat(r)
    for blk in range(4):
        assert QArray(h.data[:, 2 * blk:2 * blk + 2]) == r
    with pytest.raises(ValueError):
        project_first_block(qzeros(5))


@given(seeds, st.integers(1, 8))
def test_aug_quat_membership_and_roundtrip(seed, n):
    q = qrandn(rng_from(seed), n)
    h = to_aug_quat(q)
    for blk, ax in enumerate("1ijk"):
        assert QArray(h.data[:, blk * n:(blk + 1) * n]) == q.involution(ax)
    assert project_first_block(h) == q


def test_j_matrix_first_row():
    J1 = j_matrix(1)
    assert [J1[0, c] for c in range(4)] == [Quaternion(1), I, J, K]
    x = to_aug_real(qvec(Quaternion(1)))
    h = matmul(J1, QArray(np.stack([x, 0 * x, 0 * x, 0 * x])))
    assert h == qvec(*[Quaternion(1)] * 4)
    with pytest.raises(ValueError):
        j_matrix(0)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_j_matrix_inverse(n):
    Jn = j_matrix(n)
    assert (matmul(Jn.H, Jn) / 4.0).allclose(qeye(4 * n), atol=1e-15)
    assert (matmul(Jn, Jn.H) / 4.0).allclose(qeye(4 * n), atol=1e-15)


def real_as_quat(x):
    return QArray(np.stack([x, 0 * x, 0 * x, 0 * x]))


@given(seeds, st.integers(1, 6))
def test_j_matrix_links_representations(seed, n):
    q = qrandn(rng_from(seed), n)
    Jn = j_matrix(n)
    assert matmul(Jn, real_as_quat(to_aug_real(q))).allclose(to_aug_quat(q), atol=1e-13)
    back = matmul(Jn.H, to_aug_quat(q)) / 4.0
    np.testing.assert_allclose(back.data[0], to_aug_real(q), atol=1e-13)
    np.testing.assert_allclose(back.data[1:], 0.0, atol=1e-13)


def test_inner_product_examples():
    assert inner_product(qvec(I), qvec(I)) == 1.0
    assert inner_product(qvec(Quaternion(1)), qvec(I)) == 0.0
    with pytest.raises(ValueError):
        inner_product(qzeros(2), qzeros(3))


@given(seeds, st.integers(1, 64))
@settings(max_examples=50)
def test_three_inner_products_agree(seed, n):
    rng = rng_from(seed)
    q, p = qrandn(rng, n), qrandn(rng, n)
    h = inner_product(q, p)
    r = inner_product_aug_real(to_aug_real(q), to_aug_real(p))
    a = inner_product_aug_quat(to_aug_quat(q), to_aug_quat(p))
    scale = max(1.0, abs(h))
    assert abs(h - r) <= 1e-12 * scale
    assert abs(h - a) <= 1e-12 * scale


def test_norm2():
    assert norm2(qvec(Quaternion(1, 1, 1, 1))) == 2.0
    assert norm2(qzeros(4)) == 0.0
    q = qrandn(np.random.default_rng(1), 7)
    np.testing.assert_allclose(norm2(q), np.linalg.norm(to_aug_real(q)), rtol=1e-15)


def test_solvers():
    rng = np.random.default_rng(5)
    A = qrandn(rng, (4, 4))
    b = qrandn(rng, 4)
    x = qsolve(A, b)
    assert (matmul(A, x) - b).norm() < 1e-12
    H = matmul(A.H, A) + qeye(4)
    y = HermitianSolver(H).solve(b)
    assert (matmul(H, y) - b).norm() < 1e-12
    with pytest.raises(ValueError):
        qsolve(qzeros((2, 3)), qzeros(2))


def test_qarray_basics():
    q = QArray.from_components([1.0, 2.0], [0.0, 1.0], [3.0, 0.0], [0.0, -1.0])
    assert q.shape == (2,) and len(q) == 2
    assert q[0] == Quaternion(1, 0, 3, 0)
    assert list(q)[1] == Quaternion(2, 1, 0, -1)
    np.testing.assert_array_equal(q.real, [1.0, 2.0])
    assert q.conj()[1] == Quaternion(2, -1, 0, 1)
    assert involution(q[1], "j") == q.involution("j")[1]
    assert (q * I)[0] == Quaternion(1, 0, 3, 0) * I
    assert (I * q)[0] == I * Quaternion(1, 0, 3, 0)
    with pytest.raises(ValueError):
        q.data[0, 0] = 5.0  # frozen buffer
