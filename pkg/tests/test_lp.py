import numpy as np
import pytest
from scipy.optimize import linprog

from jointlab.lp import (
    LpConvergenceError,
    LpInfeasibleError,
    LpUnboundedError,
    solve_lp,
    solve_minmax,
)


# ------------------------------------------------------------------ oracle

def scipy_minmax(a, b):
    """Reference solution of the min-max residual problem via HiGHS."""
    m, n = a.shape
    c = np.zeros(n + 1)
    c[n] = 1.0
    a_ub = np.block([[a, -np.ones((m, 1))], [-a, -np.ones((m, 1))]])
    b_ub = np.concatenate([b, -b])
    a_eq = np.zeros((1, n + 1))
    a_eq[0, :n] = 1.0
    res = linprog(
        c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
        bounds=[(0, None)] * (n + 1), method="highs",
    )
    assert res.status == 0
    return res.fun


def random_minmax_instance(rng, n):
    # columns are outcome distributions of single classical points
    cols = rng.dirichlet(np.ones(4), size=n).T
    b = rng.dirichlet(np.ones(4))
    return cols, b


# ------------------------------------------------------------------- tests

def test_minmax_matches_scipy_small():
    rng = np.random.default_rng(10)
    for _ in range(20):
        a, b = random_minmax_instance(rng, 50)
        residual, weights, _ = solve_minmax(a, b)
        assert residual == pytest.approx(scipy_minmax(a, b), abs=1e-8)
        assert weights.min() >= 0.0
        assert weights.sum() == pytest.approx(1.0, abs=1e-9)
        # the residual is attained by the returned weights
        attained = np.max(np.abs(a @ weights - b))
        assert attained <= residual + 1e-9


def test_minmax_matches_scipy_wide():
    rng = np.random.default_rng(20)
    for _ in range(5):
        a, b = random_minmax_instance(rng, 800)
        residual, _, _ = solve_minmax(a, b)
        assert residual == pytest.approx(scipy_minmax(a, b), abs=1e-8)


def test_minmax_exactly_representable_target():
    rng = np.random.default_rng(30)
    a, _ = random_minmax_instance(rng, 100)
    w0 = rng.dirichlet(np.ones(100))
    residual, _, _ = solve_minmax(a, a @ w0)
    assert residual <= 1e-10


def test_generic_lp_matches_scipy():
    rng = np.random.default_rng(40)
    for _ in range(25):
        n = rng.integers(3, 8)
        m = rng.integers(2, 6)
        a_ub = rng.standard_normal((m, n))
        x0 = rng.uniform(0.0, 1.0, size=n)
        b_ub = a_ub @ x0 + rng.uniform(0.1, 1.0, size=m)
        c = rng.uniform(0.0, 1.0, size=n)  # nonnegative keeps it bounded
        x, fun, _ = solve_lp(c, a_ub, b_ub)
        ref = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=[(0, None)] * n, method="highs")
        assert ref.status == 0
        assert fun == pytest.approx(ref.fun, abs=1e-8)
        assert np.all(a_ub @ x <= b_ub + 1e-9)
        assert np.all(x >= -1e-12)


def test_generic_lp_with_equalities():
    # min x1 + 2 x2 with x1 + x2 = 1 -> put everything on x1
    x, fun, _ = solve_lp(np.array([1.0, 2.0]), a_eq=[[1.0, 1.0]], b_eq=[1.0])
    np.testing.assert_allclose(x, [1.0, 0.0], atol=1e-12)
    assert fun == pytest.approx(1.0)


def test_generic_lp_mixed_constraints_vs_scipy():
    rng = np.random.default_rng(50)
    for _ in range(10):
        n = 6
        a_ub = rng.standard_normal((3, n))
        x0 = rng.uniform(0.0, 1.0, size=n)
        x0 /= x0.sum()
        b_ub = a_ub @ x0 + rng.uniform(0.05, 0.5, size=3)
        a_eq = np.ones((1, n))
        c = rng.standard_normal(n)  # bounded: feasible set inside the simplex
        x, fun, _ = solve_lp(c, a_ub, b_ub, a_eq, [1.0])
        ref = linprog(
            c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
            bounds=[(0, None)] * n, method="highs",
        )
        assert ref.status == 0
        assert fun == pytest.approx(ref.fun, abs=1e-8)


def test_infeasible_detection():
    # x1 >= 2 and x1 <= 1
    with pytest.raises(LpInfeasibleError):
        solve_lp(np.array([1.0]), a_ub=[[-1.0], [1.0]], b_ub=[-2.0, 1.0])


def test_unbounded_detection():
    with pytest.raises(LpUnboundedError):
        solve_lp(np.array([-1.0]), a_ub=[[-1.0]], b_ub=[0.0])


def test_iteration_cap_reported_distinctly():
    rng = np.random.default_rng(60)
    a, b = random_minmax_instance(rng, 200)
    with pytest.raises(LpConvergenceError):
        solve_minmax(a, b, max_iter=1)


def test_rejects_empty_problem():
    with pytest.raises(ValueError):
        solve_lp(np.array([1.0]))
