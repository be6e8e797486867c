"""Unbalanced double-homodyne pipeline for continuous variables.

The signal mode is mixed with vacuum on an unbalanced beam splitter
(amplitudes t, r) and the two outputs feed homodyne detectors measuring
rotated quadratures at local-oscillator phase theta.  In frequency space
the observed joint characteristic factors into the signal characteristic
times a Gaussian response; dividing out the marginal responses leaves the
retrieved characteristic exp(i xi.mean - xi^T Q xi) whose cross coefficient
grows with the beam-splitter imbalance.  A negative eigenvalue of Q means
no joint distribution exists for the two quadratures, the continuous
analogue of a negative retrieved entry.

All quadrature conventions follow from the vacuum variance 1/4, defined
once as VACUUM_VARIANCE.  Analytic operations are pure; sampling and the
bootstrap use per-chunk PCG64 substreams seeded by SeedSequence((seed, c))
with CHUNK_SIZE draws per chunk, so merged output is independent of how
chunks are scheduled.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import accel
from .inversion import GaussianChar

__all__ = [
    "VACUUM_VARIANCE",
    "CHUNK_SIZE",
    "CvConfig",
    "ResponseCoeffs",
    "CoherentState",
    "ThermalState",
    "CvClassification",
    "EstimateResult",
    "EstimationError",
    "response_coeffs",
    "instrument_response",
    "signal_char",
    "retrieved_char",
    "classify_cv",
    "observed_gaussian",
    "sample_observed",
    "estimate_retrieved_char",
    "save_samples",
    "load_samples",
]

# Quadrature variance of the vacuum; every 1/8 below is VACUUM_VARIANCE / 2.
VACUUM_VARIANCE = 0.25

CHUNK_SIZE = 1 << 20

_EIG_TOL = 1e-12

# characteristic-function fit grid: 9 x 9 points on |u'|, |v'| <= 2 with the
# zero row/column excluded from the fit
_FIT_GRID_HALF_WIDTH = 2.0
_FIT_GRID_POINTS = 9
_MIN_ECF_MODULUS = 0.1


class EstimationError(RuntimeError):
    """Raised when the characteristic-function fit cannot proceed."""


@dataclass(frozen=True)
class CvConfig:
    """Beam-splitter amplitudes and local-oscillator phase.

    t and r must lie strictly inside (0, 1) with t^2 + r^2 = 1; the
    degenerate t in {0, 1} cases would divide by zero in the response
    coefficients.  Nonclassical retrievals need t != r and theta away from
    multiples of pi/2.
    """

    t: float
    r: float
    theta: float

    def __post_init__(self):
        if not (0.0 < self.t < 1.0 and 0.0 < self.r < 1.0):
            raise ValueError("t and r must lie strictly in (0, 1)")
        if abs(self.t**2 + self.r**2 - 1.0) > 1e-12:
            raise ValueError("require t^2 + r^2 = 1")

    @classmethod
    def from_t2(cls, t2, theta):
        if not 0.0 < t2 < 1.0:
            raise ValueError(f"t^2 must lie strictly in (0, 1), got {t2}")
        return cls(t=np.sqrt(t2), r=np.sqrt(1.0 - t2), theta=float(theta))

    def to_dict(self):
        return {"t": self.t, "r": self.r, "theta": self.theta}


@dataclass(frozen=True)
class ResponseCoeffs:
    """Quadratic-form coefficients of the Gaussian frequency response.

    The joint response is exp(-(uu u^2 + vv v^2 + 2 uv u v)/8); uu and vv
    are positive and uu*vv - uv^2 = 1 identically.  uv vanishes exactly for
    a balanced splitter or theta a multiple of pi/2, and is the sole source
    of the nonclassical cross term after deconvolution.
    """

    uu: float
    vv: float
    uv: float


@dataclass(frozen=True)
class CoherentState:
    """Coherent input with quadrature means (x0, y0)."""

    x0: float = 0.0
    y0: float = 0.0

    def to_dict(self):
        return {"kind": "coherent", "x0": self.x0, "y0": self.y0}


@dataclass(frozen=True)
class ThermalState:
    """Thermal input with mean photon number nbar >= 0."""

    nbar: float

    def __post_init__(self):
        if self.nbar < 0.0:
            raise ValueError(f"nbar must be nonnegative, got {self.nbar}")

    def to_dict(self):
        return {"kind": "thermal", "nbar": self.nbar}


def state_from_dict(d):
    if d["kind"] == "coherent":
        return CoherentState(x0=d.get("x0", 0.0), y0=d.get("y0", 0.0))
    if d["kind"] == "thermal":
        return ThermalState(nbar=d["nbar"])
    raise ValueError(f"unknown state kind {d['kind']!r}")


@dataclass(frozen=True)
class CvClassification:
    """Verdict from the retrieved quadratic form.

    kind is "nonclassical" when the smallest eigenvalue is below -1e-12,
    "boundary" when it is zero within 1e-12, else "classical".  threshold
    is the |cross| value at which the verdict flips for this input family
    (1 for coherent inputs, 1 + 2 nbar for thermal).
    """

    kind: str
    min_eigenvalue: float
    cross: float
    threshold: float

    @property
    def nonclassical(self):
        return self.kind == "nonclassical"


@dataclass(frozen=True)
class EstimateResult:
    """Sample estimate of the retrieved Gaussian characteristic."""

    char: GaussianChar
    mean_se: np.ndarray
    quad_se: np.ndarray | None
    n_samples: int
    n_boot: int
    min_ecf_modulus: float

    @property
    def cross(self):
        """Estimated cross-response coefficient (8x the uv quad term)."""
        return 8.0 * self.char.quad_uv

    @property
    def cross_se(self):
        return None if self.quad_se is None else 8.0 * float(self.quad_se[2])


def response_coeffs(cfg):
    """Frequency-response coefficients of the double-homodyne instrument.

    uu = (t/r)^2 cos^2 + (r/t)^2 sin^2, vv the same with sin/cos swapped,
    uv = (t^2 - r^2)/(2 t^2 r^2) sin(2 theta).
    """
    t2 = cfg.t**2
    r2 = cfg.r**2
    a = t2 / r2
    b = r2 / t2
    cos2 = np.cos(cfg.theta) ** 2
    sin2 = np.sin(cfg.theta) ** 2
    return ResponseCoeffs(
        uu=a * cos2 + b * sin2,
        vv=a * sin2 + b * cos2,
        uv=(t2 - r2) / (2.0 * t2 * r2) * np.sin(2.0 * cfg.theta),
    )


def instrument_response(cfg):
    """Joint Gaussian frequency response H(u, v) as a callable.

    H(0, 0) = 1; the marginals are H(u, 0) = exp(-uu u^2 / 8) and
    H(0, v) = exp(-vv v^2 / 8); the off-axis ratio
    H(u, v)/(H(u, 0) H(0, v)) equals exp(-uv * u * v / 4).
    """
    coeffs = response_coeffs(cfg)

    def response(u, v):
        quad = coeffs.uu * u * u + coeffs.vv * v * v + 2.0 * coeffs.uv * u * v
        return np.exp(-quad / 8.0)

    return response


def signal_char(state):
    """Symmetric-order joint quadrature characteristic of the input state.

    Coherent: mean (x0, y0) and isotropic quadratic form 1/8; thermal:
    zero mean with (1 + 2 nbar)/8.
    """
    half_var = 0.5 * VACUUM_VARIANCE
    if isinstance(state, CoherentState):
        return GaussianChar(
            mean=np.array([state.x0, state.y0]),
            quad_uu=half_var,
            quad_vv=half_var,
        )
    if isinstance(state, ThermalState):
        scale = (1.0 + 2.0 * state.nbar) * half_var
        return GaussianChar(mean=np.zeros(2), quad_uu=scale, quad_vv=scale)
    raise TypeError(f"unsupported input state {state!r}")


def retrieved_char(state, cfg):
    """Characteristic function retrieved by deconvolving the observation.

    Equals the signal characteristic times exp(-uv_coeff * u * v / 4),
    i.e. the signal quadratic form with uv_coeff/8 added off-diagonal.
    """
    base = signal_char(state)
    cross = response_coeffs(cfg).uv
    return GaussianChar(
        mean=base.mean,
        quad_uu=base.quad_uu,
        quad_vv=base.quad_vv,
        quad_uv=base.quad_uv + cross / 8.0,
    )


def classify_cv(state, cfg):
    """Classify an input/configuration pair by the retrieved form's spectrum.

    For the two supported families the smallest eigenvalue is
    (1 + 2 nbar - |cross|)/8 (nbar = 0 for coherent inputs), so the verdict
    flips exactly at |cross| = 1 + 2 nbar.
    """
    char = retrieved_char(state, cfg)
    min_eig = float(char.quad_eigenvalues()[0])
    nbar = state.nbar if isinstance(state, ThermalState) else 0.0
    cross = response_coeffs(cfg).uv
    if min_eig < -_EIG_TOL:
        kind = "nonclassical"
    elif min_eig <= _EIG_TOL:
        kind = "boundary"
    else:
        kind = "classical"
    return CvClassification(
        kind=kind,
        min_eigenvalue=min_eig,
        cross=float(cross),
        threshold=1.0 + 2.0 * nbar,
    )


def observed_gaussian(state, cfg):
    """Mean and covariance of the observed homodyne outcome pair.

    The first outcome is r X_theta + t X_vac, the second t Y_theta - r Y_vac;
    for rotation-invariant inputs the cross covariance vanishes and the
    variances compose as r^2 sigma^2 + t^2/4 and t^2 sigma^2 + r^2/4 with
    sigma^2 the input quadrature variance.
    """
    t, r, theta = cfg.t, cfg.r, cfg.theta
    cos, sin = np.cos(theta), np.sin(theta)
    if isinstance(state, CoherentState):
        sigma2 = VACUUM_VARIANCE
        mean = np.array(
            [
                r * (state.x0 * cos + state.y0 * sin),
                t * (-state.x0 * sin + state.y0 * cos),
            ]
        )
    elif isinstance(state, ThermalState):
        sigma2 = (1.0 + 2.0 * state.nbar) * VACUUM_VARIANCE
        mean = np.zeros(2)
    else:
        raise TypeError(f"unsupported input state {state!r}")
    cov = np.diag(
        [
            r**2 * sigma2 + t**2 * VACUUM_VARIANCE,
            t**2 * sigma2 + r**2 * VACUUM_VARIANCE,
        ]
    )
    return mean, cov


def sample_observed(state, cfg, n, seed):
    """Draw n observed (x, y) pairs; bit-identical for a fixed seed."""
    if n < 1:
        raise ValueError("need at least one draw")
    mean, cov = observed_gaussian(state, cfg)
    std = np.sqrt(np.diag(cov))
    out = np.empty((n, 2))
    start = 0
    chunk = 0
    while start < n:
        size = min(CHUNK_SIZE, n - start)
        rng = np.random.default_rng(np.random.SeedSequence((seed, chunk)))
        out[start : start + size] = mean + rng.standard_normal((size, 2)) * std
        start += size
        chunk += 1
    return out


def _fit_points(cfg):
    """Mapped fit coordinates for the ECF grid.

    Returns (axis, mask, u, v): the 1-D grid axis, the boolean (9, 9) mask
    of points kept for the fit (zero row/column excluded), and the mapped
    frequency coordinates of the kept points.
    """
    axis = np.linspace(-_FIT_GRID_HALF_WIDTH, _FIT_GRID_HALF_WIDTH, _FIT_GRID_POINTS)
    up, vp = np.meshgrid(axis, axis, indexing="ij")
    mask = (up != 0.0) & (vp != 0.0)
    up = up[mask]
    vp = vp[mask]
    cos, sin = np.cos(cfg.theta), np.sin(cfg.theta)
    u = up * cfg.r * cos - vp * cfg.t * sin
    v = up * cfg.r * sin + vp * cfg.t * cos
    return axis, mask, u, v


def _fit_quad_form(u, v, ecf_values, coeffs):
    """Weighted LS fit of the deconvolved log-modulus to a quadratic form."""
    modulus = np.clip(np.abs(ecf_values), 1e-12, None)
    target = -np.log(modulus) - (coeffs.uu * u**2 + coeffs.vv * v**2) / 8.0
    design = np.stack([u**2, v**2, 2.0 * u * v], axis=1)
    root_w = modulus  # LS weights proportional to the squared ECF modulus
    beta, *_ = np.linalg.lstsq(design * root_w[:, None], target * root_w, rcond=None)
    return beta


def estimate_retrieved_char(samples, cfg, *, n_boot=200, seed=None):
    """Estimate the retrieved Gaussian characteristic from observed samples.

    Evaluates the empirical characteristic function on the 9 x 9 grid, maps
    the grid to the signal frequency variables, divides out the marginal
    responses, and fits the negative log-modulus to a quadratic form by
    weighted least squares (weights proportional to the squared ECF
    modulus).  The mean is recovered from the sample means through the
    inverse of the observation map.

    Parameters
    ----------
    samples : ndarray, shape (n, 2)
        Observed (x, y) pairs; n >= 1000.
    cfg : CvConfig
    n_boot : int
        Bootstrap resamples for the quad-form standard errors (0 disables).
    seed : int, SeedSequence or None
        Seed for the bootstrap resampling (anything accepted by
        numpy.random.default_rng); fresh entropy when None.

    Returns
    -------
    EstimateResult

    Raises
    ------
    EstimationError
        If the ECF modulus is below 0.1 at every grid point (grid too
        coarse for the state's spread).
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise ValueError("samples must have shape (n, 2)")
    n = samples.shape[0]
    if n < 1000:
        raise ValueError(f"need at least 1000 samples, got {n}")
    x = np.ascontiguousarray(samples[:, 0])
    y = np.ascontiguousarray(samples[:, 1])
    coeffs = response_coeffs(cfg)
    axis, mask, u, v = _fit_points(cfg)

    ecf_values = accel.ecf_grid(x, y, axis, axis)[mask]
    min_modulus = float(np.abs(ecf_values).min())
    if np.all(np.abs(ecf_values) < _MIN_ECF_MODULUS):
        raise EstimationError(
            "ECF modulus below 0.1 at every grid point; grid too coarse "
            "for this state"
        )
    beta = _fit_quad_form(u, v, ecf_values, coeffs)

    # mean via the inverse of the linear observation map
    obs_map = np.array(
        [
            [cfg.r * np.cos(cfg.theta), cfg.r * np.sin(cfg.theta)],
            [-cfg.t * np.sin(cfg.theta), cfg.t * np.cos(cfg.theta)],
        ]
    )
    sample_mean = np.array([x.mean(), y.mean()])
    mean_hat = np.linalg.solve(obs_map, sample_mean)
    sample_se = np.array([x.std(ddof=1), y.std(ddof=1)]) / np.sqrt(n)
    mean_se = np.abs(np.linalg.inv(obs_map)) @ sample_se

    quad_se = None
    if n_boot > 0:
        rng = np.random.default_rng(seed)
        betas = np.empty((n_boot, 3))
        block = 50
        done = 0
        while done < n_boot:
            b = min(block, n_boot - done)
            weights = np.empty((b, n))
            for i in range(b):
                weights[i] = np.bincount(rng.integers(0, n, n), minlength=n)
            boot_ecf = accel.ecf_grid_weighted(x, y, axis, axis, weights)
            for i in range(b):
                betas[done + i] = _fit_quad_form(u, v, boot_ecf[i][mask], coeffs)
            done += b
        quad_se = betas.std(axis=0, ddof=1)

    char = GaussianChar(
        mean=mean_hat, quad_uu=float(beta[0]), quad_vv=float(beta[1]),
        quad_uv=float(beta[2]),
    )
    return EstimateResult(
        char=char,
        mean_se=mean_se,
        quad_se=quad_se,
        n_samples=n,
        n_boot=n_boot,
        min_ecf_modulus=min_modulus,
    )


def save_samples(path, samples, cfg, state, seed):
    """Write samples as CSV columns x,y preceded by a JSON header line."""
    samples = np.asarray(samples, dtype=float)
    header = json.dumps(
        {
            "config": cfg.to_dict(),
            "state": state.to_dict(),
            "seed": seed,
            "N": int(samples.shape[0]),
        }
    )
    with open(path, "w") as fh:
        fh.write(header + "\n")
        fh.write("x,y\n")
        for row in samples:
            fh.write(f"{float(row[0])!r},{float(row[1])!r}\n")


def load_samples(path):
    """Read a sample file written by save_samples.

    Returns (samples, metadata) with metadata the decoded JSON header.
    """
    with open(path) as fh:
        meta = json.loads(fh.readline())
        header = fh.readline().strip()
        if header != "x,y":
            raise ValueError(f"unexpected column header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[0] != meta["N"]:
        raise ValueError("sample count does not match header")
    return data, meta
