import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from oracles import real_admm
from strategies import rng_from, seeds

from quatopt.admm import (
    ADMMConfig,
    ADMMProblem,
    ADMMState,
    ConvergenceTrace,
    Coupling,
    IterationRecord,
    OracleError,
    consensus_problem,
    coupling_residual,
    proximal_form_step,
    quadratic_oracle,
    solve,
    step,
)
from quatopt.affine import WidelyAffineMap
from quatopt.linalg import QArray, from_aug_real, qrandn, qzeros, to_aug_real
from quatopt.prox import l1_norm, project_nonneg_parts, prox_l1
from quatopt.quaternion import Quaternion

Y = QArray.from_quaternions([Quaternion(0, 3)])


def lasso_proxes(y, beta):
    def f_prox(v, rho):
        return (y + v * rho) / (1.0 + rho)

    def g_prox(v, rho):
        return prox_l1(v, beta / rho)

    return f_prox, g_prox


def lasso(y, beta):
    f_prox, g_prox = lasso_proxes(y, beta)
    return consensus_problem(f_prox, g_prox, y.shape[0],
                             lambda q, p: 0.5 * (q - y).norm() ** 2 + beta * l1_norm(p))


def random_coupling(rng, n, m, p):
    return Coupling([qrandn(rng, (p, n)) for _ in range(4)],
                    [qrandn(rng, (p, m)) for _ in range(4)], qrandn(rng, p))


def test_config_validation():
    with pytest.raises(ValueError):
        ADMMConfig(rho=0.0)
    with pytest.raises(ValueError):
        ADMMConfig(max_iter=0)
    with pytest.raises(ValueError):
        ADMMConfig(eps_abs=-1.0)


def test_coupling_validation():
    z = qzeros((2, 2))
    with pytest.raises(ValueError):
        Coupling([z, z, z], [z, z, z, z], qzeros(2))
    with pytest.raises(ValueError):
        Coupling([z] * 4, [qzeros((3, 2))] * 4, qzeros(2))
    with pytest.raises(ValueError):
        Coupling([z] * 4, [z] * 4, qzeros(3))


def test_consensus_residual():
    rng = np.random.default_rng(0)
    q, p = qrandn(rng, 3), qrandn(rng, 3)
    cp = Coupling.consensus(3)
    assert coupling_residual(cp, q, p) == q - p
    assert coupling_residual(cp, q, q).norm() == 0.0


@given(seeds)
def test_residual_matches_real_form(seed):
    rng = rng_from(seed)
    cp = random_coupling(rng, 3, 2, 4)
    q, p = qrandn(rng, 3), qrandn(rng, 2)
    Ar, Br, cr = cp.to_aug_real()
    r = coupling_residual(cp, q, p)
    np.testing.assert_allclose(to_aug_real(r), Ar @ to_aug_real(q) + Br @ to_aug_real(p) - cr, atol=1e-12)


def test_one_consensus_step():
    st = step(lasso(Y, 1.0), ADMMConfig(rho=1.0), ADMMState.zeros(Coupling.consensus(1)))
    np.testing.assert_allclose(st.q.data.ravel(), [0, 1.5, 0, 0])
    np.testing.assert_allclose(st.p.data.ravel(), [0, 0.5, 0, 0])
    np.testing.assert_allclose(st.u.data.ravel(), [0, 1, 0, 0])
    assert st.k == 1


def test_u_update_is_residual():
    rng = np.random.default_rng(1)
    y = qrandn(rng, 4)
    prob = lasso(y, 0.3)
    st0 = ADMMState(qrandn(rng, 4), qrandn(rng, 4), qrandn(rng, 4))
    st1 = step(prob, ADMMConfig(rho=2.0), st0)
    assert (st1.u - st0.u) == coupling_residual(prob.coupling, st1.q, st1.p)


def test_scalar_lasso_converges():
    res = solve(lasso(Y, 1.0), ADMMConfig(rho=1.0, max_iter=500, eps_abs=1e-10, eps_rel=0.0))
    assert res.converged
    np.testing.assert_allclose(res.state.q.data.ravel(), [0, 2, 0, 0], atol=1e-8)
    np.testing.assert_allclose(res.state.p.data.ravel(), [0, 2, 0, 0], atol=1e-8)
    obj = res.trace.column("objective")
    assert obj[-1] == pytest.approx(0.5 + 2.0)


def test_full_shrinkage():
    res = solve(lasso(Y, 5.0), ADMMConfig(max_iter=500, eps_abs=1e-10, eps_rel=0.0))
    assert res.converged
    assert res.state.p.norm() == 0.0 and res.state.q.norm() < 1e-8


def test_fixed_point():
    y = qrandn(np.random.default_rng(2), 3)
    prob = lasso(y, 0.5)
    cfg = ADMMConfig(rho=1.0, max_iter=2000, eps_abs=1e-14, eps_rel=0.0)
    st = solve(prob, cfg).state
    st2 = step(prob, cfg, st)
    for a, b in ((st.q, st2.q), (st.p, st2.p), (st.u, st2.u)):
        assert a.allclose(b, atol=1e-12)


def test_dual_recovery():
    # at the solution rho * u is the subgradient of beta ||p||_1
    y = qrandn(np.random.default_rng(3), 5)
    rho, beta = 1.5, 0.7
    res = solve(lasso(y, beta), ADMMConfig(rho=rho, max_iter=3000, eps_abs=1e-12, eps_rel=0.0))
    lam = res.state.lam(rho)
    # stationarity of 1/2||q - y||^2 at the solution: q - y + lam = 0
    assert (res.state.q - y + lam).norm() < 1e-5


def test_proximal_form_matches_step():
    rng = np.random.default_rng(4)
    y = qrandn(rng, 4)
    f_prox, g_prox = lasso_proxes(y, 0.4)
    prob = consensus_problem(f_prox, g_prox, 4)
    cfg = ADMMConfig(rho=1.3)
    for _ in range(10):
        st = ADMMState(qrandn(rng, 4), qrandn(rng, 4), qrandn(rng, 4))
        a = proximal_form_step(f_prox, g_prox, st, cfg.rho)
        b = step(prob, cfg, st)
        assert a.q.allclose(b.q, atol=1e-14) and a.p.allclose(b.p, atol=1e-14) and a.u.allclose(b.u, atol=1e-14)


def test_proximal_form_special_cases():
    rng = np.random.default_rng(5)
    st = ADMMState(qrandn(rng, 3), qrandn(rng, 3), qrandn(rng, 3))
    identity = lambda v, rho: v  # noqa: E731
    nxt = proximal_form_step(lambda v, rho: project_nonneg_parts(v), identity, st, 1.0)
    assert nxt.q == project_nonneg_parts(st.p - st.u)
    nxt = proximal_form_step(identity, identity, st, 1.0)
    assert nxt.q == st.p - st.u


def test_oracle_failure_carries_iteration():
    calls = {"n": 0}

    def bad(w, rho):
        calls["n"] += 1
        if calls["n"] == 3:
            raise np.linalg.LinAlgError("singular")
        return -w * 0.5

    prob = ADMMProblem(bad, lambda w, rho: w, Coupling.consensus(2))
    init = ADMMState(qzeros(2), qrandn(np.random.default_rng(0), 2), qzeros(2))
    with pytest.raises(OracleError, match="iteration 3"):
        solve(prob, ADMMConfig(max_iter=10, eps_abs=0.0, eps_rel=0.0), init=init)


def test_inner_residual_is_recorded():
    prob = ADMMProblem(lambda w, rho: (-w, 1e-3), lambda w, rho: w, Coupling.consensus(2))
    res = solve(prob, ADMMConfig(max_iter=3))
    np.testing.assert_array_equal(res.trace.column("q_inner"), 1e-3)
    assert np.all(np.isnan(res.trace.column("p_inner")))


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_lockstep_with_real_admm(seed):
    rng = rng_from(seed)
    n, m, p = (int(v) for v in rng.integers(1, 5, size=3))
    cp = random_coupling(rng, n, m, p)
    Pf = WidelyAffineMap(*(qrandn(rng, (n + 2, n)) for _ in range(4)), qrandn(rng, n + 2))
    Pg = WidelyAffineMap(*(qrandn(rng, (m + 2, m)) for _ in range(4)), qrandn(rng, m + 2))
    prob = ADMMProblem(quadratic_oracle(Pf, cp.A), quadratic_oracle(Pg, cp.B), cp)
    rho = 0.8
    Ar, Br, cr = cp.to_aug_real()
    ref = real_admm(*Pf.to_aug_real_matrix(), *Pg.to_aug_real_matrix(), Ar, Br, cr, rho, 20)
    st = ADMMState.zeros(cp)
    cfg = ADMMConfig(rho=rho)
    for x, z, u in ref:
        st = step(prob, cfg, st)
        for got, want in ((st.q, x), (st.p, z), (st.u, u)):
            assert np.max(np.abs(to_aug_real(got) - want)) < 1e-10 * max(1.0, np.abs(want).max())


def test_trace_serialization():
    tr = ConvergenceTrace([IterationRecord(1, 0.5, 1e-3, 2e-3, 0.1, 0.2),
                           IterationRecord(2, 0.25, 1e-4, math.pi, 0.1, 0.2)])
    text = tr.to_csv()
    assert text.splitlines()[0] == "k,objective,primal_res,dual_res"
    back = ConvergenceTrace.from_csv(text)
    np.testing.assert_array_equal(back.column("dual_res"), tr.column("dual_res"))
    buf = io.StringIO()
    tr.to_csv(buf)
    assert buf.getvalue() == text
    again = ConvergenceTrace.from_json(tr.to_json())
    assert again.records == tr.records or np.isnan(again.records[0].q_inner)
    assert again.column("eps_dual").tolist() == [0.2, 0.2]
    assert len(again) == 2
