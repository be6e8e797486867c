"""Classical separable models on the Bloch sphere and the LP feasibility
test for the observed joint statistics.

A classical model is a probability distribution over unit vectors lambda_j;
its observed statistics is the mixture of per-point product distributions
(1 + x eta lx/sqrt3)(1 + y eta ly/sqrt3)/4.  Inverting such a mixture always
yields a legitimate probability distribution, which is why an inversion
with negative entries rules out every separable explanation.  Whether a
given observed distribution admits a separable decomposition on a finite
sphere grid is decided by a small linear program minimizing the max
entrywise residual.

LP solves are single-threaded per call but independent across calls; grids
are immutable and shareable.
"""

from dataclasses import dataclass

import numpy as np

from .inversion import JointDist2x2, invert_joint
from .lp import LpConvergenceError, solve_minmax
from .qubit import SQRT3, qubit_kernel, _eta_of

__all__ = [
    "SphereGrid",
    "SeparableModel",
    "SeparabilityResult",
    "fibonacci_grid",
    "model_statistics",
    "classical_retrieval_check",
    "separability_lp",
    "feasibility_boundary",
    "LpConvergenceError",
]

_UNIT_TOL = 1e-12

# defaults for the feasibility test; the residual tolerance absorbs grid
# discretization and should shrink no slower than O(1/sqrt(N))
DEFAULT_GRID_N = 2000
DEFAULT_TOL = 2e-3


@dataclass(frozen=True)
class SphereGrid:
    """Finite set of unit vectors standing in for the continuum of
    classical pure directions."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3).copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        norms = np.linalg.norm(pts, axis=1)
        if np.max(np.abs(norms - 1.0)) > _UNIT_TOL:
            raise ValueError("grid points must lie on the unit sphere")

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class SeparableModel:
    """Nonnegative weights over a sphere grid, summing to 1."""

    grid: SphereGrid
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(len(self.grid)).copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")

    def moments(self):
        """(mean lx, mean ly, mean lx*ly) under the model weights."""
        pts = self.grid.points
        return np.array(
            [
                self.weights @ pts[:, 0],
                self.weights @ pts[:, 1],
                self.weights @ (pts[:, 0] * pts[:, 1]),
            ]
        )


@dataclass(frozen=True)
class SeparabilityResult:
    """Outcome of the separability LP.

    feasible is True when the optimal max residual is within tolerance;
    model holds the optimal weights either way (the best separable
    approximation when infeasible).
    """

    feasible: bool
    residual: float
    tol: float
    model: SeparableModel
    iterations: int


def fibonacci_grid(n):
    """Deterministic, approximately uniform n-point grid on the unit sphere.

    Fibonacci lattice: the i-th point has height z = 1 - (2i+1)/n and
    longitude i times the golden angle.  Requires n >= 4.
    """
    if n < 4:
        raise ValueError(f"need at least 4 grid points, got {n}")
    i = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    longitude = i * np.pi * (3.0 - np.sqrt(5.0))
    pts = np.stack([rho * np.cos(longitude), rho * np.sin(longitude), z], axis=1)
    # renormalize away the last float ulp so the unit-sphere invariant holds
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return SphereGrid(pts)


def _point_statistics(points, eta):
    """(4, n) matrix of per-point outcome distributions, outcome order rows."""
    ax = (eta / SQRT3) * points[:, 0]
    ay = (eta / SQRT3) * points[:, 1]
    return np.array(
        [0.25 * (1.0 + x * ax) * (1.0 + y * ay) for x in (-1, 1) for y in (-1, 1)]
    )


def model_statistics(model, m):
    """Observed statistics of a separable model under the eta-measurement.

    The weighted mixture of per-point product distributions; always a true
    probability distribution.
    """
    eta = _eta_of(m)
    stats = _point_statistics(model.grid.points, eta) @ model.weights
    return JointDist2x2(stats)


def classical_retrieval_check(model, m):
    """Run a separable model through the full inversion pipeline.

    Returns invert_joint applied to the model's observed statistics, which
    equals sum_j (w_j/4)(1 + x lx_j)(1 + y ly_j) and is therefore always
    entrywise nonnegative (up to float noise).
    """
    eta = _eta_of(m)
    kernel = qubit_kernel(eta)
    return invert_joint(model_statistics(model, eta), kernel, kernel)


def separability_lp(p_obs, m, grid, tol=DEFAULT_TOL, *, max_iter=20000):
    """Decide whether observed statistics admit a separable model on a grid.

    Minimizes the max entrywise deviation between the model statistics and
    ``p_obs`` over weights on ``grid``; feasible when the optimum is within
    ``tol`` (which accounts for grid discretization).

    Raises LpConvergenceError if the solver hits its iteration cap, which
    is reported distinctly from an infeasible verdict.
    """
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    eta = _eta_of(m)
    a = _point_statistics(grid.points, eta)
    residual, weights, iterations = solve_minmax(a, p_obs.values, max_iter=max_iter)
    total = weights.sum()
    if total <= 0.0:  # pragma: no cover - LP always returns a simplex point
        raise LpConvergenceError("LP returned an empty weight vector")
    model = SeparableModel(grid, weights / total)
    return SeparabilityResult(
        feasible=residual <= tol,
        residual=residual,
        tol=tol,
        model=model,
        iterations=iterations,
    )


def feasibility_boundary(eta, grid, tol=DEFAULT_TOL, *, xtol=1e-3):
    """Largest |s| on the z-axis family still declared separable.

    Bisects |s| in [0, 1] for states (0, 0, |s|), asserting along the way
    that the LP residual is monotone in |s|.  The continuum answer is
    eta/(2 sqrt(3)), set by the sphere maximum of lx*ly = 1/2.
    """
    eta = _eta_of(eta)
    evaluated = []  # (|s|, residual), for the monotonicity check

    def residual_at(s):
        p_obs = _z_axis_statistics(s, eta)
        res = separability_lp(p_obs, eta, grid, tol)
        evaluated.append((s, res.residual))
        for (s1, r1), (s2, r2) in zip(sorted(evaluated), sorted(evaluated)[1:]):
            if r2 < r1 - 1e-9:
                raise AssertionError(
                    f"LP residual not monotone in |s|: r({s1})={r1}, r({s2})={r2}"
                )
        return res.residual

    if residual_at(1.0) <= tol:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if residual_at(mid) <= tol:
            lo = mid
        else:
            hi = mid
    return lo


def _z_axis_statistics(s, eta):
    vals = [
        0.25 * (1.0 + (eta / SQRT3) * x * y * s) for x in (-1, 1) for y in (-1, 1)
    ]
    return JointDist2x2(np.array(vals))
