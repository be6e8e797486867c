"""Small dense linear-programming solver (two-phase tableau simplex).

Sized for the separability feasibility problems in this package: a handful
of constraint rows against a few thousand columns.  The pivot loop runs on
the accelerated kernel from ``accel`` (numba or numpy; both use identical
Dantzig pricing and first-minimum tie-breaking, so results match).
"""

import numpy as np

from . import accel

__all__ = [
    "LpError",
    "LpInfeasibleError",
    "LpUnboundedError",
    "LpConvergenceError",
    "solve_lp",
    "solve_minmax",
]

_PIVOT_TOL = 1e-9
_FEAS_TOL = 1e-7


class LpError(RuntimeError):
    """Base class for solver failures."""


class LpInfeasibleError(LpError):
    pass


class LpUnboundedError(LpError):
    pass


class LpConvergenceError(LpError):
    """Iteration cap reached before optimality."""


def _run(tab, basis, n_price, max_iter, phase):
    status, iters = accel.simplex_iterate(tab, basis, n_price, _PIVOT_TOL, max_iter)
    if status == accel.SIMPLEX_ITER_CAP:
        raise LpConvergenceError(f"phase {phase}: iteration cap {max_iter} reached")
    if status == accel.SIMPLEX_UNBOUNDED:
        if phase == 1:
            raise LpError("phase 1 unbounded; malformed problem")
        raise LpUnboundedError("objective unbounded below")
    return iters


def solve_lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, *, max_iter=20000):
    """Minimize c.x subject to a_ub x <= b_ub, a_eq x = b_eq, x >= 0.

    Returns (x, objective, iterations).  Raises LpInfeasibleError,
    LpUnboundedError, or LpConvergenceError.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    rhs = []
    senses = []  # True for <=, False for =
    if a_ub is not None:
        a_ub = np.atleast_2d(np.asarray(a_ub, dtype=float))
        for row, b in zip(a_ub, np.atleast_1d(b_ub)):
            rows.append(row)
            rhs.append(float(b))
            senses.append(True)
    if a_eq is not None:
        a_eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
        for row, b in zip(a_eq, np.atleast_1d(b_eq)):
            rows.append(row)
            rhs.append(float(b))
            senses.append(False)
    m = len(rows)
    if m == 0:
        raise ValueError("no constraints")
    a = np.array(rows)
    b = np.array(rhs)

    # canonical form: flip rows with negative rhs; one slack per inequality
    flip = b < 0.0
    a[flip] *= -1.0
    b[flip] *= -1.0
    n_slack = sum(senses)
    slack_sign = np.zeros(m)
    slack_col = np.full(m, -1, dtype=int)
    k = 0
    for i, is_ub in enumerate(senses):
        if is_ub:
            slack_sign[i] = -1.0 if flip[i] else 1.0
            slack_col[i] = n + k
            k += 1
    # rows whose slack is +1 start basic; the rest get an artificial
    needs_art = [i for i in range(m) if slack_sign[i] != 1.0]
    n_art = len(needs_art)
    n_cols = n + n_slack + n_art

    tab = np.zeros((m + 1, n_cols + 1))
    basis = np.zeros(m, dtype=np.int64)
    tab[1:, :n] = a
    tab[1:, n_cols] = b
    for i in range(m):
        if slack_col[i] >= 0:
            tab[i + 1, slack_col[i]] = slack_sign[i]
    for j, i in enumerate(needs_art):
        tab[i + 1, n + n_slack + j] = 1.0
        basis[i] = n + n_slack + j
    for i in range(m):
        if slack_sign[i] == 1.0:
            basis[i] = slack_col[i]

    total_iters = 0
    if n_art > 0:
        # phase 1: minimize the sum of artificials
        for i in needs_art:
            tab[0, :] -= tab[i + 1, :]
        tab[0, n + n_slack : n_cols] = 0.0
        total_iters += _run(tab, basis, n + n_slack, max_iter, phase=1)
        if -tab[0, n_cols] > _FEAS_TOL:
            raise LpInfeasibleError(
                f"phase 1 optimum {-tab[0, n_cols]:.3e} > 0; constraints infeasible"
            )
        # drive surviving artificials out of the basis (degenerate pivots)
        drop_rows = []
        for i in range(m):
            if basis[i] >= n + n_slack:
                row = tab[i + 1, : n + n_slack]
                cands = np.nonzero(np.abs(row) > _PIVOT_TOL)[0]
                if cands.size == 0:
                    drop_rows.append(i + 1)
                    continue
                j = int(cands[0])
                tab[i + 1, :] /= tab[i + 1, j]
                for r in range(m + 1):
                    if r != i + 1 and tab[r, j] != 0.0:
                        tab[r, :] -= tab[r, j] * tab[i + 1, :]
                basis[i] = j
        if drop_rows:
            keep = [r for r in range(m + 1) if r not in drop_rows]
            keep_basis = [i for i in range(m) if i + 1 not in drop_rows]
            tab = tab[keep]
            basis = basis[keep_basis]
            m = len(basis)

    # phase 2 objective: reduced costs of c against the current basis
    tab[0, :] = 0.0
    tab[0, :n] = c
    for i in range(m):
        cb = c[basis[i]] if basis[i] < n else 0.0
        if cb != 0.0:
            tab[0, :] -= cb * tab[i + 1, :]
    total_iters += _run(tab, basis, n + n_slack, max_iter, phase=2)

    x = np.zeros(n + n_slack)
    for i in range(m):
        if basis[i] < n + n_slack:
            x[basis[i]] = tab[i + 1, -1]
    x = x[:n]
    return x, float(c @ x), total_iters


def solve_minmax(a, b, *, max_iter=20000):
    """Minimize the max entrywise residual |a p - b| over the simplex.

    Variables p >= 0 with sum(p) = 1.  Returns (residual, p, iterations).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape
    c = np.zeros(n + 1)
    c[n] = 1.0
    a_ub = np.block(
        [
            [a, -np.ones((m, 1))],
            [-a, -np.ones((m, 1))],
        ]
    )
    b_ub = np.concatenate([b, -b])
    a_eq = np.zeros((1, n + 1))
    a_eq[0, :n] = 1.0
    x, fun, iters = solve_lp(c, a_ub, b_ub, a_eq, [1.0], max_iter=max_iter)
    weights = np.clip(x[:n], 0.0, None)
    return float(fun), weights, iters
