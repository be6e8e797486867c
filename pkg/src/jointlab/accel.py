"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time: numba is used when it imports
successfully and the environment variable ``JOINTLAB_NO_NUMBA`` is not set
to ``1``/``true``/``yes``.  Both backends implement identical pivot and
tie-breaking rules, so the simplex kernel returns the same solution either
way; the characteristic-function kernels may differ by float rounding in
the summation order.

``benchmarks/bench_kernels.py`` times the two backends side by side.
"""

import os

import numpy as np

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "ecf_grid",
    "ecf_grid_weighted",
    "simplex_iterate",
    "implementations",
    "warmup",
]

# simplex_iterate status codes
SIMPLEX_OPTIMAL = 0
SIMPLEX_ITER_CAP = 1
SIMPLEX_UNBOUNDED = 2


def _ecf_grid_numpy(x, y, u_axis, v_axis):
    """Empirical characteristic function on the product grid u_axis x v_axis.

    Returns the (nu, nv) complex matrix C[i, j] = mean_k exp(i*(u_i*x_k + v_j*y_k)).
    """
    eu = np.exp(1j * np.outer(x, u_axis))
    ev = np.exp(1j * np.outer(y, v_axis))
    return (eu.T @ ev) / x.size


def _ecf_grid_weighted_numpy(x, y, u_axis, v_axis, weights):
    """Weighted ECFs for a batch of weight vectors.

    weights has shape (B, N) with rows summing to N (resample counts);
    returns shape (B, nu, nv).
    """
    n = x.size
    nu, nv = u_axis.size, v_axis.size
    out = np.zeros((weights.shape[0], nu * nv), dtype=np.complex128)
    # chunk over samples to bound the size of the phase-product matrix
    step = max(1, min(n, 1 << 14))
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        eu = np.exp(1j * np.outer(x[lo:hi], u_axis))
        ev = np.exp(1j * np.outer(y[lo:hi], v_axis))
        phases = (eu[:, :, None] * ev[:, None, :]).reshape(hi - lo, nu * nv)
        out += weights[:, lo:hi] @ phases
    return out.reshape(weights.shape[0], nu, nv) / n


def _simplex_numpy(tab, basis, n_price, tol, max_iter):
    """Dantzig-rule tableau simplex; mutates tab/basis in place.

    Row 0 of tab is the objective row, the last column the right-hand side.
    Only the first n_price columns are priced for entry (artificials are
    placed after them).  Returns (status, iterations).
    """
    rhs = tab.shape[1] - 1
    for it in range(max_iter):
        jstar = int(np.argmin(tab[0, :n_price]))
        if tab[0, jstar] >= -tol:
            return SIMPLEX_OPTIMAL, it
        col = tab[1:, jstar]
        ratios = np.where(col > tol, tab[1:, rhs] / np.where(col > tol, col, 1.0), np.inf)
        rstar = int(np.argmin(ratios))
        if not np.isfinite(ratios[rstar]):
            return SIMPLEX_UNBOUNDED, it
        r = rstar + 1
        tab[r, :] /= tab[r, jstar]
        fac = tab[:, jstar].copy()
        fac[r] = 0.0
        tab -= np.outer(fac, tab[r, :])
        basis[rstar] = jstar
    return SIMPLEX_ITER_CAP, max_iter


def _resolve_backend():
    flag = os.environ.get("JOINTLAB_NO_NUMBA", "").strip().lower()
    if flag in {"1", "true", "yes"}:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_AVAILABLE = _resolve_backend()

if NUMBA_AVAILABLE:
    from numba import njit, prange

    @njit(cache=True)
    def _ecf_grid_numba(x, y, u_axis, v_axis):
        n = x.size
        nu = u_axis.size
        nv = v_axis.size
        acc = np.zeros((nu, nv), dtype=np.complex128)
        eu = np.empty(nu, dtype=np.complex128)
        ev = np.empty(nv, dtype=np.complex128)
        for k in range(n):
            for i in range(nu):
                eu[i] = complex(np.cos(u_axis[i] * x[k]), np.sin(u_axis[i] * x[k]))
            for j in range(nv):
                ev[j] = complex(np.cos(v_axis[j] * y[k]), np.sin(v_axis[j] * y[k]))
            for i in range(nu):
                for j in range(nv):
                    acc[i, j] += eu[i] * ev[j]
        return acc / n

    @njit(cache=True, parallel=True)
    def _ecf_grid_weighted_numba(x, y, u_axis, v_axis, weights):
        n = x.size
        nu = u_axis.size
        nv = v_axis.size
        nb = weights.shape[0]
        eu = np.exp(1j * x.reshape(n, 1) * u_axis.reshape(1, nu))
        ev = np.exp(1j * y.reshape(n, 1) * v_axis.reshape(1, nv))
        out = np.zeros((nb, nu, nv), dtype=np.complex128)
        for b in prange(nb):
            for k in range(n):
                w = weights[b, k]
                if w != 0.0:
                    for i in range(nu):
                        wu = w * eu[k, i]
                        for j in range(nv):
                            out[b, i, j] += wu * ev[k, j]
        return out / n

    @njit(cache=True)
    def _simplex_numba(tab, basis, n_price, tol, max_iter):
        m = tab.shape[0] - 1
        rhs = tab.shape[1] - 1
        for it in range(max_iter):
            jstar = 0
            best = tab[0, 0]
            for j in range(1, n_price):
                if tab[0, j] < best:
                    best = tab[0, j]
                    jstar = j
            if best >= -tol:
                return SIMPLEX_OPTIMAL, it
            rstar = -1
            best_ratio = np.inf
            for r in range(1, m + 1):
                a = tab[r, jstar]
                if a > tol:
                    ratio = tab[r, rhs] / a
                    if ratio < best_ratio:
                        best_ratio = ratio
                        rstar = r
            if rstar < 0:
                return SIMPLEX_UNBOUNDED, it
            piv = tab[rstar, jstar]
            for j in range(rhs + 1):
                tab[rstar, j] /= piv
            for r in range(m + 1):
                if r != rstar:
                    f = tab[r, jstar]
                    if f != 0.0:
                        for j in range(rhs + 1):
                            tab[r, j] -= f * tab[rstar, j]
            basis[rstar - 1] = jstar
        return SIMPLEX_ITER_CAP, max_iter

    BACKEND = "numba"
    ecf_grid = _ecf_grid_numba
    ecf_grid_weighted = _ecf_grid_weighted_numba
    simplex_iterate = _simplex_numba
else:
    BACKEND = "numpy"
    ecf_grid = _ecf_grid_numpy
    ecf_grid_weighted = _ecf_grid_weighted_numpy
    simplex_iterate = _simplex_numpy


def implementations():
    """Map backend name -> kernel dict, for benchmarking and parity tests."""
    impls = {
        "numpy": {
            "ecf_grid": _ecf_grid_numpy,
            "ecf_grid_weighted": _ecf_grid_weighted_numpy,
            "simplex_iterate": _simplex_numpy,
        }
    }
    if NUMBA_AVAILABLE:
        impls["numba"] = {
            "ecf_grid": _ecf_grid_numba,
            "ecf_grid_weighted": _ecf_grid_weighted_numba,
            "simplex_iterate": _simplex_numba,
        }
    return impls


def warmup():
    """Trigger JIT compilation of the active kernels on tiny inputs."""
    x = np.array([0.1, -0.2])
    y = np.array([0.3, 0.0])
    ax = np.array([-1.0, 1.0])
    ecf_grid(x, y, ax, ax)
    ecf_grid_weighted(x, y, ax, ax, np.ones((1, 2)))
    tab = np.array([[0.0, -1.0, 0.0, 0.0], [0.0, 1.0, 1.0, 2.0]])
    simplex_iterate(tab, np.array([2], dtype=np.int64), 2, 1e-9, 10)
