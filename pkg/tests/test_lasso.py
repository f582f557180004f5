import numpy as np
import pytest

from sparseh2.errors import NonConvergence
from sparseh2.lasso import lambda_grid, lambda_max, lasso_path, lasso_solve

from oracles import lasso_enumerate, lasso_grid_search, lasso_objective


def _kkt_ok(Y, Z, fit, tol):
    g = 2 * Z.T @ (Y - Z @ fit.coefficients)
    u = fit.coefficients
    zero = u == 0
    lam = fit.lam
    assert np.all(np.abs(g[zero]) <= lam + tol)
    np.testing.assert_allclose(g[~zero], lam * np.sign(u[~zero]), atol=tol)


def test_full_shrinkage_at_lambda_max(rng):
    Y = rng.standard_normal(20)
    Z = rng.standard_normal((20, 6))
    lmax = lambda_max(Y, Z)
    assert lmax == pytest.approx(2 * np.max(np.abs(Z.T @ Y)))
    assert not lasso_solve(Y, Z, lmax).coefficients.any()
    assert not lasso_solve(Y, Z, 3 * lmax).coefficients.any()


@pytest.mark.parametrize("lam", [0.0, 0.3, 1.0, 2.5, 10.0])
def test_single_orthonormal_column_soft_threshold(rng, lam):
    z = rng.standard_normal(7)
    z /= np.linalg.norm(z)
    Y = rng.standard_normal(7) + 1.5 * z
    c = z @ Y
    expected = np.sign(c) * max(abs(c) - lam / 2, 0.0)
    assert lasso_solve(Y, z[:, None], lam).coefficients[0] == pytest.approx(expected, abs=1e-12)


def test_unpenalized_orthogonal_columns_give_least_squares(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((5, 2)))
    Z = Q * np.array([2.0, 0.5])
    Y = rng.standard_normal(5)
    ls = np.linalg.lstsq(Z, Y, rcond=None)[0]
    np.testing.assert_allclose(lasso_solve(Y, Z, 0.0).coefficients, ls, atol=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_matches_exact_enumeration(seed):
    rng = np.random.default_rng(seed)
    n, p = rng.integers(3, 7), rng.integers(1, 4)
    Z = rng.standard_normal((n, p))
    Y = rng.standard_normal(n)
    lam = rng.uniform(0.05, 0.9) * lambda_max(Y, Z)
    fit = lasso_solve(Y, Z, lam, tol=1e-12)
    np.testing.assert_allclose(fit.coefficients, lasso_enumerate(Y, Z, lam), atol=1e-8)


def test_grid_search_oracle_agrees_with_enumeration(rng):
    # the two oracles are independent; check them against each other once
    Z = rng.standard_normal((5, 2))
    Y = rng.standard_normal(5)
    lam = 0.4 * lambda_max(Y, Z)
    np.testing.assert_allclose(lasso_grid_search(Y, Z, lam), lasso_enumerate(Y, Z, lam), atol=2e-3)


def test_kkt_and_monotone_objective(rng):
    Z = rng.standard_normal((40, 60))
    Y = Z[:, :4] @ np.array([2.0, -1.5, 1.0, 0.5]) + 0.3 * rng.standard_normal(40)
    lmax = lambda_max(Y, Z)
    for frac in (0.5, 0.1, 0.01, 0.001):
        fit = lasso_solve(Y, Z, frac * lmax)
        _kkt_ok(Y, Z, fit, 1e-7 * lmax * 1.0001)
        tr = fit.objective_trace
        assert tr.size >= 1
        assert np.all(np.diff(tr) <= 1e-12 * max(1.0, abs(tr[0])))
        assert fit.objective == pytest.approx(lasso_objective(Y, Z, fit.coefficients, fit.lam), rel=1e-10)


def test_column_permutation_invariance(rng):
    Z = rng.standard_normal((30, 12))
    Y = Z[:, [1, 5]] @ np.array([1.0, -2.0]) + 0.5 * rng.standard_normal(30)
    lam = 0.05 * lambda_max(Y, Z)
    perm = rng.permutation(12)
    a = lasso_solve(Y, Z, lam, tol=1e-10).coefficients
    b = lasso_solve(Y, Z[:, perm], lam, tol=1e-10).coefficients
    np.testing.assert_allclose(a[perm], b, atol=1e-8)


def test_warm_start_reaches_same_solution(rng):
    Z = rng.standard_normal((25, 10))
    Y = rng.standard_normal(25)
    lam = 0.2 * lambda_max(Y, Z)
    cold = lasso_solve(Y, Z, lam, tol=1e-10).coefficients
    warm = lasso_solve(Y, Z, lam, init=rng.standard_normal(10), tol=1e-10).coefficients
    np.testing.assert_allclose(cold, warm, atol=1e-8)


def test_path_shape_and_endpoints(rng):
    Z = rng.standard_normal((20, 15))
    Y = rng.standard_normal(20)
    path = lasso_path(Y, Z)
    assert path.lambdas.size == 100
    assert path.lambdas[-1] / path.lambdas[0] == pytest.approx(1e-3)
    assert np.all(np.diff(path.lambdas) < 0)
    assert path.fits[0].active_set.size == 0
    two = lasso_path(Y, Z, n_lambdas=2, tol=1e-10)
    lmax = lambda_max(Y, Z)
    assert not two.fits[0].coefficients.any()
    np.testing.assert_allclose(two.last.coefficients, lasso_solve(Y, Z, 1e-3 * lmax, tol=1e-10).coefficients, atol=1e-7)


def test_lambda_grid_validation():
    with pytest.raises(ValueError):
        lambda_grid(1.0, n_lambdas=1)
    with pytest.raises(ValueError):
        lasso_solve(np.ones(3), np.eye(3), -1.0)


def test_recovers_planted_signals():
    rng = np.random.default_rng(2024)
    n, p = 100, 200
    Z = rng.standard_normal((n, p))
    Z = (Z - Z.mean(0)) / Z.std(0)
    true = rng.choice(p, 10, replace=False)
    u = np.zeros(p)
    u[true] = 1.0
    Y = Z @ u + 0.1 * rng.standard_normal(n)
    active = lasso_path(Y, Z).last.active_set
    assert np.isin(true, active).sum() >= 9


def test_nonconvergence_carries_iterate(rng):
    Z = rng.standard_normal((30, 200))
    Y = rng.standard_normal(30)
    with pytest.raises(NonConvergence) as info:
        lasso_solve(Y, Z, 1e-4 * lambda_max(Y, Z), tol=1e-15, max_iter=1)
    assert info.value.best is not None
