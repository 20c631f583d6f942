import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import numeric_soc_projection, radial_prox_l1
from strategies import rng_from, seeds

from quatopt.linalg import QArray, qrandn
from quatopt.prox import in_nonneg_parts, in_soc, l1_norm, project_nonneg_parts, project_soc, prox_l1
from quatopt.quaternion import Quaternion


def qv(*quats):
    return QArray.from_quaternions(list(quats))


def test_prox_l1_examples():
    assert prox_l1(qv(Quaternion(0, 2)), 1.0) == qv(Quaternion(0, 1))
    assert prox_l1(qv(Quaternion(0, 0.5)), 1.0) == qv(Quaternion())
    assert prox_l1(qv(Quaternion()), 1.0) == qv(Quaternion())
    assert prox_l1(qv(Quaternion(0, 1)), 1.0) == qv(Quaternion())  # tie maps to 0
    q = qrandn(np.random.default_rng(0), 5)
    assert prox_l1(q, 0.0) == q
    with pytest.raises(ValueError):
        prox_l1(q, -1.0)


@given(seeds, st.floats(0.01, 3.0))
def test_prox_l1_matches_radial_search(seed, lam):
    q = qrandn(rng_from(seed), 6)
    z = prox_l1(q, lam)
    for i in range(6):
        np.testing.assert_allclose(z.data[:, i], radial_prox_l1(q.data[:, i], lam), atol=1e-6)


@given(seeds, st.floats(0.01, 3.0))
@settings(max_examples=30)
def test_prox_l1_local_minimum(seed, lam):
    q = qrandn(rng_from(seed), 4)
    z = prox_l1(q, lam)

    def obj(x):
        return lam * l1_norm(x) + 0.5 * (x - q).norm() ** 2

    base = obj(z)
    for idx in np.ndindex(z.data.shape):
        for eps in (1e-4, -1e-4):
            d = z.data.copy()
            d[idx] += eps
            assert base <= obj(QArray(d)) + 1e-12


def test_nonneg_examples():
    assert project_nonneg_parts(qv(Quaternion(-1, 2))) == qv(Quaternion(0, 2))
    q = qv(Quaternion(1, 2, 0, 3))
    assert project_nonneg_parts(q) == q


@given(seeds)
@settings(max_examples=30)
def test_nonneg_projection_is_nearest(seed):
    rng = rng_from(seed)
    q = qrandn(rng, 5)
    z = project_nonneg_parts(q)
    assert in_nonneg_parts(z)
    d0 = (z - q).norm()
    for _ in range(50):
        w = project_nonneg_parts(z + qrandn(rng, 5, scale=1e-3))
        assert d0 <= (w - q).norm() + 1e-15


def test_soc_examples():
    q = qv(Quaternion(3, 1))
    assert project_soc(q) == q
    assert project_soc(qv(Quaternion(-2))) == qv(Quaternion())
    np.testing.assert_allclose(project_soc(qv(Quaternion(0, 2))).data.ravel(), [1, 1, 0, 0])


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_soc_matches_numeric_projection(seed):
    q = qrandn(rng_from(seed), 3, scale=2.0)
    z = project_soc(q)
    assert in_soc(z, 1e-15)
    for i in range(3):
        np.testing.assert_allclose(z.data[:, i], numeric_soc_projection(q.data[:, i]), atol=1e-5)


@pytest.mark.parametrize("proj", [project_nonneg_parts, project_soc])
def test_projections_idempotent_and_nonexpansive(proj):
    rng = np.random.default_rng(11)
    for _ in range(200):
        x, y = qrandn(rng, 4, scale=3.0), qrandn(rng, 4, scale=3.0)
        px = proj(x)
        assert proj(px).allclose(px, atol=1e-15)
        assert (px - proj(y)).norm() <= (x - y).norm() + 1e-12
