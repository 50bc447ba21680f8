import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import eigen_spec_strategy, random_lambdas, random_tin_pair
from tinband.bidiag import EigenSpec, bidiag_from_eigenvalues
from tinband.core import InputPair, validate_tin
from tinband.engine import run
from tinband.errors import DimensionMismatch, SingularMoment
from tinband.sysid import (
    conditioning,
    identify,
    lms_update,
    nested_truncate,
    rls_init,
    rls_solve,
    rls_update,
)


def _weighted_moment(Z, Y, delta):
    t = Z.shape[0]
    w = delta ** np.arange(t - 1, -1, -1)
    P = (Z.T * w) @ Z.conj()
    D = (Z.T * w) @ Y.conj()
    return P, D


def test_single_sample():
    acc = rls_update(rls_init(3, 1), np.array([1.0, 0, 0]), [1.0])
    np.testing.assert_array_equal(acc.moment(), np.diag([1.0, 0, 0]))
    np.testing.assert_array_equal(acc.dvec.ravel(), [1.0, 0, 0])
    assert acc.t == 1


def test_two_unit_samples():
    acc = rls_init(2, 1)
    rls_update(acc, np.array([1.0, 0.0]), [0.0])
    rls_update(acc, np.array([0.0, 1.0]), [0.0])
    np.testing.assert_allclose(acc.moment(), np.eye(2), atol=1e-16)


def test_forgetting_weights():
    acc = rls_init(2, 1, delta=0.5)
    rls_update(acc, np.array([1.0, 0.0]), [1.0])
    rls_update(acc, np.array([1.0, 0.0]), [1.0])
    np.testing.assert_allclose(acc.moment(), np.diag([1.5, 0.0]), atol=1e-16)
    np.testing.assert_allclose(acc.dvec.ravel(), [1.5, 0.0])


def test_bad_arguments():
    with pytest.raises(ValueError):
        rls_init(2, 1, delta=0.0)
    with pytest.raises(DimensionMismatch):
        rls_update(rls_init(2, 1), np.ones(3), [1.0])
    with pytest.raises(ValueError):
        lms_update(np.zeros((1, 2)), np.ones(2), [1.0], 0.0)


@given(st.integers(1, 8), st.integers(1, 3), st.floats(0.5, 1.0), st.booleans(), st.integers(0, 2**32 - 1))
def test_square_root_matches_direct_sum(n, p, delta, cplx, seed):
    rng = np.random.default_rng(seed)
    t = int(rng.integers(1, 51))
    Z = rng.standard_normal((t, n)) + (1j * rng.standard_normal((t, n)) if cplx else 0)
    Y = rng.standard_normal((t, p))
    acc = rls_init(n, p, delta, complex_=cplx)
    for z, y in zip(Z, Y):
        rls_update(acc, z, y)
    P, D = _weighted_moment(Z, Y, delta)
    zmax = np.max(np.sum(np.abs(Z) ** 2, axis=1))
    assert np.abs(acc.moment() - P).max() <= 1e-10 * t * zmax
    np.testing.assert_allclose(acc.dvec, D, atol=1e-12 * t * zmax)
    assert np.all(np.tril(acc.R, -1) == 0)
    assert np.all(np.diag(acc.R).real >= 0) and np.all(np.diag(acc.R).imag == 0)


def test_solve_orthonormal_regressors():
    c = np.array([[2.0, -1.0, 0.5]])
    acc = rls_init(3, 1)
    for i in range(3):
        e = np.eye(3)[i]
        rls_update(acc, e, c[:, i])
    np.testing.assert_allclose(rls_solve(acc), c, atol=1e-15)


def test_short_record_is_singular():
    acc = rls_init(3, 1)
    rls_update(acc, np.ones(3), [1.0])
    rls_update(acc, np.array([1.0, -1.0, 0.0]), [1.0])
    with pytest.raises(SingularMoment):
        rls_solve(acc)
    with pytest.raises(SingularMoment):
        rls_solve(rls_init(2, 1))


def test_ridge_rescues_short_record():
    acc = rls_init(3, 1, ridge=1e-3)
    rls_update(acc, np.ones(3), [1.0])
    C = rls_solve(acc)
    np.testing.assert_allclose(C, np.full((1, 3), 1 / (3 + 1e-3)), rtol=1e-12)


def test_normal_equation_gradient_vanishes(rng):
    n, p, delta = 5, 2, 0.97
    Z = rng.standard_normal((200, n))
    Y = rng.standard_normal((200, p))
    acc = rls_init(n, p, delta)
    for z, y in zip(Z, Y):
        rls_update(acc, z, y)
    C = rls_solve(acc)
    w = delta ** np.arange(199, -1, -1)
    grad = ((Y - Z @ C.T).T * w) @ Z
    assert np.abs(grad).max() <= 1e-8


def test_lms_examples():
    C = np.array([[1.0, 2.0]])
    z = np.array([0.3, -0.1])
    np.testing.assert_array_equal(lms_update(C, z, C @ z, 0.5), C)
    np.testing.assert_array_equal(lms_update(np.zeros((1, 2)), np.array([1.0, 0.0]), [1.0], 1.0), [[1.0, 0.0]])


def test_lms_converges_toward_rls(rng):
    n = 6
    rep = bidiag_from_eigenvalues(random_lambdas(rng, n, rmax=0.8))
    T = 10_000
    u = rng.standard_normal(T)
    Z = run(rep, u)
    Ctrue = rng.standard_normal((1, n))
    Y = Z @ Ctrue.T
    Crls = identify(rep, u, Y).Chat
    C = np.zeros((1, n))
    err = np.empty(T)
    for t in range(T):
        C = lms_update(C, Z[t], Y[t], 0.1 / n)
        err[t] = np.sum((C - Crls) ** 2)
    windows = err.reshape(-1, 100).mean(axis=1)
    # monotone until the error reaches round-off level
    live = windows[windows > 1e-20]
    assert live.size > 5
    assert np.all(np.diff(live) <= 0)
    assert windows[-1] < 1e-12 * windows[0]


def test_identify_zero_output(rng):
    u = rng.standard_normal(40)
    res = identify([0.2, -0.5, 0.7], u, np.zeros(40))
    assert np.all(res.Chat == 0)
    assert np.all(res.impulse == 0)


def test_identify_short_record(rng):
    with pytest.raises(SingularMoment):
        identify([0.2, -0.5, 0.7], rng.standard_normal(2), np.zeros(2))


def test_identify_self_generated(rng):
    spec = EigenSpec(random_lambdas(rng, 8, complex_=True))
    rep = bidiag_from_eigenvalues(spec)
    u = rng.standard_normal(200)
    C = rng.standard_normal((2, 8))
    Y = run(rep, u) @ C.T
    res = identify(spec, u, Y, leads=50, every_step=True)
    np.testing.assert_allclose(res.Chat, C, atol=1e-8)
    pair = rep.to_pair()
    X = pair.B
    for j in range(50):
        np.testing.assert_allclose(res.impulse[j], C @ X, atol=1e-8)
        X = pair.A @ X
    assert res.history[0] is None and res.history[-1] is not None


def test_identify_projection_residual_is_orthogonal(rng):
    # data from a different system: the residual is orthogonal to the regressors
    spec = [0.4, -0.6, 0.2]
    other = bidiag_from_eigenvalues([0.9, 0.5j, -0.5j, 0.1])
    u = rng.standard_normal(5000)
    y = (run(other, u) @ np.array([1.0, 2.0, -1.0, 0.5])).real
    res = identify(spec, u, y)
    resid = y[:, None] - res.states @ res.Chat.T
    assert np.abs(res.states.T @ resid).max() <= 1e-8 * len(u)


def test_regression_is_well_conditioned_for_tin_states():
    # t = 20n samples of white-noise-driven orthonormal states
    n = 10
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        rep = bidiag_from_eigenvalues(random_lambdas(rng, n, complex_=bool(seed % 2)))
        Z = run(rep, rng.standard_normal(20 * n))
        acc = rls_init(n, 1, complex_=True)
        for z in Z:
            rls_update(acc, z, [0.0])
        worst = max(worst, conditioning(acc))
    assert worst <= 10


def test_direct_form_with_clustered_poles_is_ill_conditioned():
    # companion-form states for tightly clustered poles
    n = 6
    poles = 0.9 + 0.01 * np.arange(n)
    a = np.poly(poles)
    A = np.zeros((n, n))
    A[0] = -a[1:]
    A[1:, :-1] = np.eye(n - 1)
    rng = np.random.default_rng(3)
    u = rng.standard_normal(20 * n * 50)
    z = np.zeros(n)
    acc = rls_init(n, 1)
    for ut in u:
        z = A @ z
        z[0] += ut
        rls_update(acc, z, [0.0])
    assert conditioning(acc) > 1e3


@given(eigen_spec_strategy(nmax=20))
def test_nesting_on_bidiag_pairs(lam):
    tin = validate_tin(bidiag_from_eigenvalues(lam).to_pair(), 1e-11)
    for k in range(1, tin.n + 1):
        sub = nested_truncate(tin, k)
        assert sub.n == k
        assert sub.tol == tin.tol


def test_nesting_examples(rng):
    tin = validate_tin(bidiag_from_eigenvalues([0.5, 0.5]).to_pair(), 1e-12)
    sub = nested_truncate(tin, 1)
    assert sub.A.tolist() == [[0.5]]
    assert sub.B[0, 0] == pytest.approx(np.sqrt(3) / 2)
    full = nested_truncate(tin, 2)
    np.testing.assert_array_equal(full.A, tin.A)
    with pytest.raises(ValueError):
        nested_truncate(tin, 3)
    pair = random_tin_pair(rng, 7, 3, complex_=True)
    for k in range(1, 8):
        nested_truncate(validate_tin(pair, 1e-12), k)
    assert isinstance(pair, InputPair)
