"""One-photon eight-port homodyne simulator.

A single photon in two modes realizes a qubit; an interferometer with two
identical unbalanced input beam splitters, two phase plates and balanced
output beam splitters routes it to one of four detectors.  For one photon
the click statistics are fully determined by the four (unnormalized)
projector vectors of the detectors, so the network is represented through
them; with the default configuration the click distribution reproduces the
eta = 1 qubit measurement exactly.

Monte Carlo sampling is seeded and chunked: draw c of the record is taken
from the PCG64 stream seeded with SeedSequence((seed, c)), each chunk
covering CHUNK_SIZE draws.  Summed counts are therefore independent of how
chunks are distributed across workers.
"""

import json
from dataclasses import dataclass

import numpy as np

from .inversion import JointDist2x2
from .qubit import BlochState, qubit_kernel

__all__ = [
    "CHUNK_SIZE",
    "PureQubit",
    "EightPortConfig",
    "ClickRecord",
    "PipelineResult",
    "DETECTORS",
    "projector_vectors",
    "click_probabilities",
    "sample_clicks",
    "empirical_pipeline",
]

CHUNK_SIZE = 1 << 20

# detector -> outcome (x, y)
DETECTORS = {3: (-1, -1), 4: (1, 1), 5: (-1, 1), 6: (1, -1)}

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PureQubit:
    """Pure state (cos(theta/2), sin(theta/2) e^{i phi}) in the sigma_z basis."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError(f"theta must be in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", float(self.phi) % _TWO_PI)

    def amplitudes(self):
        return np.array(
            [np.cos(self.theta / 2.0), np.sin(self.theta / 2.0) * np.exp(1j * self.phi)]
        )

    def bloch(self):
        return BlochState(
            np.array(
                [
                    np.sin(self.theta) * np.cos(self.phi),
                    np.sin(self.theta) * np.sin(self.phi),
                    np.cos(self.theta),
                ]
            )
        )


@dataclass(frozen=True)
class EightPortConfig:
    """Beam-splitter amplitudes (t, r) and phase-plate shifts (phi1, phi2).

    The default has tan(theta0) = sqrt(2), t = sin(theta0/2),
    r = cos(theta0/2), phi1 = -phi2 = pi/4, which makes the four detector
    directions the eta = 1 measurement vectors.
    """

    t: float
    r: float
    phi1: float
    phi2: float

    def __post_init__(self):
        if abs(self.t**2 + self.r**2 - 1.0) > 1e-12:
            raise ValueError("require t^2 + r^2 = 1")

    @classmethod
    def default(cls):
        theta0 = np.arctan(np.sqrt(2.0))
        return cls(
            t=np.sin(theta0 / 2.0),
            r=np.cos(theta0 / 2.0),
            phi1=np.pi / 4.0,
            phi2=-np.pi / 4.0,
        )

    def to_dict(self):
        return {"t": self.t, "r": self.r, "phi1": self.phi1, "phi2": self.phi2}


@dataclass(frozen=True)
class ClickRecord:
    """Detector counts from a sampling run; n3 + n4 + n5 + n6 = total."""

    n3: int
    n4: int
    n5: int
    n6: int
    total: int
    seed: int | None = None
    config: EightPortConfig | None = None

    def __post_init__(self):
        if self.n3 + self.n4 + self.n5 + self.n6 != self.total:
            raise ValueError("counts must sum to total")

    def counts(self):
        return np.array([self.n3, self.n4, self.n5, self.n6])

    def frequencies(self):
        """Empirical outcome distribution in the standard outcome order."""
        freqs = self.counts() / self.total
        by_outcome = {DETECTORS[d]: freqs[i] for i, d in enumerate((3, 4, 5, 6))}
        return JointDist2x2(
            np.array([by_outcome[o] for o in ((-1, -1), (-1, 1), (1, -1), (1, 1))])
        )

    def to_json(self):
        payload = {
            "n3": self.n3,
            "n4": self.n4,
            "n5": self.n5,
            "n6": self.n6,
            "N": self.total,
            "seed": self.seed,
            "config": self.config.to_dict() if self.config else None,
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        cfg = EightPortConfig(**d["config"]) if d.get("config") else None
        return cls(
            n3=d["n3"], n4=d["n4"], n5=d["n5"], n6=d["n6"],
            total=d["N"], seed=d.get("seed"), config=cfg,
        )


@dataclass(frozen=True)
class PipelineResult:
    """Retrieved joint entries with propagated errors and the 3-sigma flag."""

    entries: np.ndarray
    standard_errors: np.ndarray
    nonclassical: bool
    significance: float
    frequencies: JointDist2x2


def projector_vectors(cfg):
    """Unnormalized detector vectors, rows ordered (|3>, |4>, |5>, |6>).

    |3> = (r, -t e^{-i phi2})/sqrt2, |4> = (r, t e^{-i phi2})/sqrt2,
    |5> = (t, -r e^{-i phi1})/sqrt2, |6> = (t, r e^{-i phi1})/sqrt2.
    They resolve the identity: sum_j |j><j| = I for any valid config.
    """
    e1 = np.exp(-1j * cfg.phi1)
    e2 = np.exp(-1j * cfg.phi2)
    return np.array(
        [
            [cfg.r, -cfg.t * e2],
            [cfg.r, cfg.t * e2],
            [cfg.t, -cfg.r * e1],
            [cfg.t, cfg.r * e1],
        ]
    ) / np.sqrt(2.0)


def click_probabilities(psi, cfg):
    """Exact click distribution p(j) = |<j|psi>|^2 mapped to outcomes.

    Detector 3 -> (-1,-1), 4 -> (1,1), 5 -> (-1,1), 6 -> (1,-1).  With the
    default configuration this equals the eta = 1 qubit measurement
    statistics of the state's Bloch vector.  Pure states only; mixed-state
    statistics are convex combinations of these.
    """
    amps = projector_vectors(cfg).conj() @ psi.amplitudes()
    probs = np.abs(amps) ** 2
    by_outcome = {DETECTORS[d]: probs[i] for i, d in enumerate((3, 4, 5, 6))}
    return JointDist2x2(
        np.array([by_outcome[o] for o in ((-1, -1), (-1, 1), (1, -1), (1, 1))])
    )


def sample_clicks(psi, cfg, n, seed):
    """Draw n independent clicks from the exact distribution.

    Deterministic for a fixed seed (PCG64 substreams per CHUNK_SIZE chunk,
    see the module docstring); merging per-chunk counts in any order gives
    the same record.
    """
    if n < 1:
        raise ValueError("need at least one draw")
    probs = click_probabilities(psi, cfg)
    # detector-ordered probabilities (3, 4, 5, 6)
    pvals = np.array([probs.value(*DETECTORS[d]) for d in (3, 4, 5, 6)])
    counts = np.zeros(4, dtype=np.int64)
    start = 0
    chunk = 0
    while start < n:
        size = min(CHUNK_SIZE, n - start)
        rng = np.random.default_rng(np.random.SeedSequence((seed, chunk)))
        counts += rng.multinomial(size, pvals)
        start += size
        chunk += 1
    return ClickRecord(
        n3=int(counts[0]),
        n4=int(counts[1]),
        n5=int(counts[2]),
        n6=int(counts[3]),
        total=n,
        seed=seed,
        config=cfg,
    )


def _retrieve_frequencies(freqs, n, eta):
    """Kernel inversion of empirical frequencies with delta-method errors.

    freqs is the length-4 empirical distribution in outcome order; returns
    (entries, standard_errors) of the retrieved joint.
    """
    mu = qubit_kernel(eta).mat
    kern = np.kron(mu, mu)  # acts on outcome-ordered vectors
    entries = kern @ freqs
    cov_freq = (np.diag(freqs) - np.outer(freqs, freqs)) / n
    cov = kern @ cov_freq @ kern.T
    return entries, np.sqrt(np.clip(np.diag(cov), 0.0, None))


def empirical_pipeline(record, m):
    """Invert a click record and flag significant negativity.

    Converts counts to frequencies, applies the joint kernel inversion, and
    propagates binomial errors linearly through the (fixed, affine) kernel.
    The nonclassical flag is raised when some retrieved entry sits at or
    below -3 standard errors.  Requires at least 100 counts.
    """
    if record.total < 100:
        raise ValueError("need at least 100 counts for the empirical pipeline")
    eta = m.eta if hasattr(m, "eta") else float(m)
    freqs = record.frequencies()
    entries, errs = _retrieve_frequencies(freqs.values, record.total, eta)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(errs > 0.0, -entries / errs, 0.0)
    significance = float(z.max())
    return PipelineResult(
        entries=entries,
        standard_errors=errs,
        nonclassical=bool(np.any((entries < 0.0) & (z >= 3.0))),
        significance=significance,
        frequencies=freqs,
    )
