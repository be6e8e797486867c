"""Kernel-based inversion of observed statistics and characteristic-function
deconvolution.

This is the machinery shared by the discrete (qubit) and continuous
(double-homodyne) pipelines: affine kernels map observed marginal/joint
distributions back to system-variable distributions, and known frequency
responses are divided out of observed characteristic functions.

All operations are pure; values are immutable and safe to share across
threads.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "OUTCOME_ORDER",
    "NEGATIVITY_TOL",
    "JointDist2x2",
    "Kernel2",
    "GaussianChar",
    "GaussianDensityResult",
    "ResponseUnderflowError",
    "invert_marginal",
    "invert_joint",
    "deconvolve_char",
    "gaussian_density",
]

# Fixed storage/serialization order for distributions on {-1,+1}^2.
OUTCOME_ORDER = ((-1, -1), (-1, +1), (+1, -1), (+1, +1))

# Entries above -NEGATIVITY_TOL are treated as nonnegative, so floating-point
# noise never flags a classical state.
NEGATIVITY_TOL = 1e-12

_NORMALIZATION_TOL = 1e-12
_EIG_BOUNDARY_TOL = 1e-12


class ResponseUnderflowError(ArithmeticError):
    """Raised when a deconvolution denominator underflows to ~0."""


def _index(a):
    if a == -1:
        return 0
    if a == 1:
        return 1
    raise ValueError(f"outcome must be -1 or +1, got {a!r}")


@dataclass(frozen=True)
class JointDist2x2:
    """Real-valued normalized function on {-1,+1}^2.

    ``values`` follows OUTCOME_ORDER.  Entries may be negative (retrieved
    quasi-distributions); ``is_probability`` reports whether all entries are
    nonnegative up to NEGATIVITY_TOL.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(4).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        total = float(v.sum())
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise ValueError(f"entries must sum to 1, got {total!r}")

    @property
    def is_probability(self):
        return bool(np.all(self.values >= -NEGATIVITY_TOL))

    def value(self, x, y):
        return float(self.values[2 * _index(x) + _index(y)])

    def as_matrix(self):
        """(2, 2) array indexed [x, y] with index 0 <-> outcome -1."""
        return self.values.reshape(2, 2).copy()

    def marginal_x(self):
        """Length-2 marginal over x, ordered (-1, +1)."""
        return self.values.reshape(2, 2).sum(axis=1)

    def marginal_y(self):
        return self.values.reshape(2, 2).sum(axis=0)

    def min_entry(self):
        return float(self.values.min())

    @classmethod
    def from_function(cls, fn):
        return cls(np.array([fn(x, y) for x, y in OUTCOME_ORDER]))


@dataclass(frozen=True)
class Kernel2:
    """2x2 inversion kernel mu[a, a'] with unit column sums.

    ``mat`` is indexed [a, a'] with index 0 <-> outcome -1.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=float).reshape(2, 2).copy()
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        cols = m.sum(axis=0)
        if np.max(np.abs(cols - 1.0)) > _NORMALIZATION_TOL:
            raise ValueError(f"kernel columns must sum to 1, got {cols}")

    def value(self, a, a_prime):
        return float(self.mat[_index(a), _index(a_prime)])

    @classmethod
    def identity(cls):
        return cls(np.eye(2))


@dataclass(frozen=True)
class GaussianChar:
    """Characteristic function exp(i*(u,v).mean - (u,v) Q (u,v)^T).

    The symmetric quadratic form Q is stored as three numbers
    (quad_uu, quad_vv, quad_uv), so symmetry is exact by construction.
    The value at the origin is 1 for any parameters.
    """

    mean: np.ndarray
    quad_uu: float
    quad_vv: float
    quad_uv: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float).reshape(2).copy()
        m.setflags(write=False)
        object.__setattr__(self, "mean", m)

    def quad_matrix(self):
        return np.array([[self.quad_uu, self.quad_uv], [self.quad_uv, self.quad_vv]])

    def quad_eigenvalues(self):
        """Eigenvalues of the quadratic form, ascending."""
        half_tr = 0.5 * (self.quad_uu + self.quad_vv)
        disc = np.hypot(0.5 * (self.quad_uu - self.quad_vv), self.quad_uv)
        return np.array([half_tr - disc, half_tr + disc])

    def __call__(self, u, v):
        quad = self.quad_uu * u * u + self.quad_vv * v * v + 2.0 * self.quad_uv * u * v
        return np.exp(1j * (u * self.mean[0] + v * self.mean[1]) - quad)


@dataclass(frozen=True)
class GaussianDensityResult:
    """Outcome of Fourier-inverting a GaussianChar.

    kind is "distribution" (positive-definite form, mean/covariance set),
    "boundary" (an eigenvalue within tolerance of zero, the inverse density
    degenerates), or "not_a_distribution" (a negative eigenvalue, the
    inversion integral diverges).
    """

    kind: str
    min_eigenvalue: float
    mean: np.ndarray | None = None
    covariance: np.ndarray | None = None

    @property
    def is_distribution(self):
        return self.kind == "distribution"


def invert_marginal(p_obs, kernel):
    """Apply an inversion kernel to an observed marginal.

    Parameters
    ----------
    p_obs : array_like, shape (2,)
        Observed marginal probabilities, ordered (-1, +1), summing to 1.
    kernel : Kernel2

    Returns
    -------
    ndarray, shape (2,)
        Retrieved marginal p(a) = sum_a' mu(a, a') p_obs(a'); sums to 1
        by the kernel column normalization.
    """
    p = np.asarray(p_obs, dtype=float).reshape(2)
    if abs(p.sum() - 1.0) > _NORMALIZATION_TOL:
        raise ValueError("observed marginal must sum to 1")
    return kernel.mat @ p


def invert_joint(p_obs, kernel_x, kernel_y):
    """Apply inversion kernels in both variables to an observed joint.

    Returns the JointDist2x2 with
    p(x, y) = sum_{x', y'} mu_X(x, x') mu_Y(y, y') p_obs(x', y').
    The output marginals equal invert_marginal applied to the input
    marginals, and the output stays normalized.
    """
    mat = kernel_x.mat @ p_obs.as_matrix() @ kernel_y.mat.T
    return JointDist2x2(mat.reshape(4))


def deconvolve_char(c_obs, response):
    """Divide an observed joint characteristic by the marginal responses.

    Parameters
    ----------
    c_obs : callable (u, v) -> complex
        Observed joint characteristic function.
    response : callable (u, v) -> complex
        Instrument frequency response; must have no zeros on the axes.

    Returns
    -------
    callable (u, v) -> complex
        (u, v) -> c_obs(u, v) / (response(u, 0) * response(0, v)).
        Raises ResponseUnderflowError at evaluation if the denominator
        magnitude falls below 1e-300.
    """

    def retrieved(u, v):
        denom = response(u, 0.0) * response(0.0, v)
        if abs(denom) < 1e-300:
            raise ResponseUnderflowError(
                f"response product underflowed at (u, v) = ({u}, {v})"
            )
        return c_obs(u, v) / denom

    return retrieved


def gaussian_density(char):
    """Classify and Fourier-invert a Gaussian characteristic function.

    If the quadratic form is positive definite the inverse transform is the
    normal density with mean ``char.mean`` and covariance twice the form
    matrix.  A negative eigenvalue means the inversion integral diverges; a
    zero eigenvalue (within 1e-12) is reported as a degenerate boundary
    case.  All three outcomes are values, not errors.
    """
    eigs = char.quad_eigenvalues()
    min_eig = float(eigs[0])
    if min_eig < -_EIG_BOUNDARY_TOL:
        return GaussianDensityResult(kind="not_a_distribution", min_eigenvalue=min_eig)
    if min_eig <= _EIG_BOUNDARY_TOL:
        return GaussianDensityResult(kind="boundary", min_eigenvalue=min_eig)
    return GaussianDensityResult(
        kind="distribution",
        min_eigenvalue=min_eig,
        mean=char.mean.copy(),
        covariance=2.0 * char.quad_matrix(),
    )
