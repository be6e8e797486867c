"""Qubit joint-measurement pipeline.

A qubit state is a Bloch vector s with |s| <= 1.  The four-outcome
measurement indexed by (x, y) in {-1,+1}^2 has effect vectors
(eta/sqrt(3)) * (x, y, x*y); its statistics determine the sigma_x and
sigma_y marginals exactly after an affine kernel inversion.  Extending the
same inversion to the joint distribution yields a quasi-distribution whose
negativity certifies nonclassicality: after rotating the state onto the
z-axis the minimum entry drops below zero exactly when eta < sqrt(3)|s|.

Pure functions throughout; no shared state.
"""

from dataclasses import dataclass

import numpy as np

from .inversion import NEGATIVITY_TOL, JointDist2x2, Kernel2, invert_joint

__all__ = [
    "SQRT3",
    "BlochState",
    "QubitPovm",
    "QubitClassification",
    "povm_statistics",
    "qubit_kernel",
    "retrieve_joint",
    "rotate_to_z",
    "classify_qubit",
]

SQRT3 = np.sqrt(3.0)

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class BlochState:
    """Qubit density operator as a real 3-vector, |vec| <= 1."""

    vec: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float).reshape(3).copy()
        v.setflags(write=False)
        object.__setattr__(self, "vec", v)
        if np.linalg.norm(v) > 1.0 + _NORM_TOL:
            raise ValueError(f"Bloch vector norm {np.linalg.norm(v)} exceeds 1")

    @property
    def norm(self):
        return float(np.linalg.norm(self.vec))


@dataclass(frozen=True)
class QubitPovm:
    """Four-outcome measurement with effect vectors (eta/sqrt(3))*(x, y, xy).

    Positivity of the effects requires 0 < eta <= 1.  The inversion-kernel
    formulas extend to any eta > 0; pass a bare float to ``qubit_kernel`` or
    ``retrieve_joint`` to exercise those boundary cases.
    """

    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")

    def effect_vector(self, x, y):
        return (self.eta / SQRT3) * np.array([x, y, x * y], dtype=float)


@dataclass(frozen=True)
class QubitClassification:
    """Verdict of the qubit negativity test.

    min_entry is the smallest entry of the retrieved joint distribution for
    the z-rotated state; threshold_eta = sqrt(3)|s| is the eta below which
    that entry is negative.
    """

    nonclassical: bool
    min_entry: float
    eta: float
    threshold_eta: float


def _eta_of(m):
    if isinstance(m, QubitPovm):
        return m.eta
    eta = float(m)
    if eta <= 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    return eta


def _statistics(s, eta):
    # (1 + (eta/sqrt3)(x sx + y sy + xy sz))/4 in outcome order
    coeff = eta / SQRT3
    vals = [
        0.25 * (1.0 + coeff * (x * s[0] + y * s[1] + x * y * s[2]))
        for x in (-1, 1)
        for y in (-1, 1)
    ]
    return JointDist2x2(np.array(vals))


def povm_statistics(state, povm):
    """Exact outcome distribution of the measurement on a qubit state.

    Always a true probability distribution for |s| <= 1 and eta <= 1.
    """
    return _statistics(state.vec, povm.eta)


def qubit_kernel(m):
    """Marginal inversion kernel mu(a, a') = (1 + (sqrt(3)/eta) a a')/2.

    Accepts a QubitPovm or a bare positive eta.  Columns sum to 1; at
    eta = sqrt(3) this is the identity kernel.
    """
    eta = _eta_of(m)
    k = SQRT3 / eta
    return Kernel2(0.5 * np.array([[1.0 + k, 1.0 - k], [1.0 - k, 1.0 + k]]))


def retrieve_joint(state, m):
    """Invert the observed joint statistics back to the system variables.

    Equals invert_joint(povm_statistics(state, m), k, k) with k the qubit
    kernel; in closed form
    p(x, y) = (1 + x sx + y sy + (sqrt(3)/eta) x y sz) / 4.
    The x and y marginals reproduce the exact sigma_x / sigma_y statistics
    (1 + a s_a)/2; the joint may be negative.  Entries grow like
    sqrt(3)/eta, so below eta ~ 1e-3 float cancellation can break the
    normalization invariant of the result.
    """
    eta = _eta_of(m)
    kernel = qubit_kernel(eta)
    return invert_joint(_statistics(state.vec, eta), kernel, kernel)


def rotate_to_z(state):
    """Rotate a Bloch vector onto the +z axis.

    Returns (rotated_state, rotation) with rotation @ vec = (0, 0, |vec|),
    det = +1.  Conventions: identity for vec = 0 or vec parallel to +z;
    rotation by pi about x for vec parallel to -z; otherwise the minimal
    rotation about the axis vec x z.
    """
    v = state.vec
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return state, np.eye(3)
    unit = v / norm
    cos_angle = unit[2]
    if cos_angle >= 1.0 - 1e-15:
        return BlochState(np.array([0.0, 0.0, norm])), np.eye(3)
    if cos_angle <= -1.0 + 1e-15:
        rot = np.diag([1.0, -1.0, -1.0])
        return BlochState(np.array([0.0, 0.0, norm])), rot
    w = np.array([unit[1], -unit[0], 0.0])  # unit x z_hat, |w| = sin(angle)
    skew = np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )
    rot = np.eye(3) + skew + skew @ skew / (1.0 + cos_angle)
    return BlochState(np.array([0.0, 0.0, norm])), rot


def classify_qubit(state, m):
    """Negativity verdict for a qubit state under the eta-measurement.

    The state is rotated onto the z-axis first, which makes the verdict
    depend on the state only through |s|: nonclassical exactly when the
    retrieved joint has an entry below -1e-12, equivalently when
    eta < sqrt(3)|s|.
    """
    eta = _eta_of(m)
    rotated, _ = rotate_to_z(state)
    min_entry = retrieve_joint(rotated, eta).min_entry()
    return QubitClassification(
        nonclassical=min_entry < -NEGATIVITY_TOL,
        min_entry=min_entry,
        eta=eta,
        threshold_eta=SQRT3 * rotated.norm,
    )
