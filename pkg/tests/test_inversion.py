import numpy as np
import pytest

from jointlab.inversion import (
    OUTCOME_ORDER,
    GaussianChar,
    JointDist2x2,
    Kernel2,
    ResponseUnderflowError,
    deconvolve_char,
    gaussian_density,
    invert_joint,
    invert_marginal,
)

SQRT3 = np.sqrt(3.0)


# ---------------------------------------------------------------- oracles

def brute_force_invert_joint(p_obs, kernel_x, kernel_y):
    """Double sum over outcomes with dict-indexed values, no linear algebra."""
    out = {}
    for x in (-1, 1):
        for y in (-1, 1):
            total = 0.0
            for xp in (-1, 1):
                for yp in (-1, 1):
                    total += (
                        kernel_x.value(x, xp)
                        * kernel_y.value(y, yp)
                        * p_obs.value(xp, yp)
                    )
            out[(x, y)] = total
    return out


def eig2_closed_form(a, d, b):
    """Eigenvalues of [[a, b], [b, d]] from the characteristic polynomial."""
    disc = np.sqrt(((a - d) / 2.0) ** 2 + b * b)
    return (a + d) / 2.0 - disc, (a + d) / 2.0 + disc


def random_kernel(rng):
    c0 = rng.uniform(-2.0, 2.0)
    c1 = rng.uniform(-2.0, 2.0)
    return Kernel2(np.array([[c0, c1], [1.0 - c0, 1.0 - c1]]))


def random_dist(rng):
    v = rng.dirichlet(np.ones(4))
    return JointDist2x2(v)


def qubit_kernel_matrix(eta):
    k = SQRT3 / eta
    return Kernel2(0.5 * np.array([[1.0 + k, 1.0 - k], [1.0 - k, 1.0 + k]]))


# ------------------------------------------------------------- data types

def test_joint_dist_requires_normalization():
    with pytest.raises(ValueError):
        JointDist2x2(np.array([0.3, 0.3, 0.3, 0.3]))


def test_joint_dist_accepts_negative_entries():
    d = JointDist2x2(np.array([0.6, 0.6, -0.1, -0.1]))
    assert not d.is_probability
    assert d.min_entry() == pytest.approx(-0.1)


def test_joint_dist_probability_flag_tolerates_noise():
    d = JointDist2x2(np.array([0.5, 0.5 + 5e-13, -5e-13, 0.0]))
    assert d.is_probability


def test_joint_dist_outcome_indexing():
    d = JointDist2x2(np.array([0.1, 0.2, 0.3, 0.4]))
    assert d.value(-1, -1) == 0.1
    assert d.value(-1, 1) == 0.2
    assert d.value(1, -1) == 0.3
    assert d.value(1, 1) == 0.4
    assert OUTCOME_ORDER == ((-1, -1), (-1, 1), (1, -1), (1, 1))
    with pytest.raises(ValueError):
        d.value(0, 1)


def test_kernel_requires_unit_column_sums():
    with pytest.raises(ValueError):
        Kernel2(np.array([[0.7, 0.2], [0.2, 0.7]]))


# --------------------------------------------------------- invert_marginal

def test_invert_marginal_uniform_fixed_point():
    # the eta-family kernel is symmetric under joint sign flips, so the
    # maximally mixed marginal is a fixed point
    for eta in (0.3, 0.7, 1.0):
        out = invert_marginal(np.array([0.5, 0.5]), qubit_kernel_matrix(eta))
        np.testing.assert_allclose(out, [0.5, 0.5], atol=1e-15)


def test_invert_marginal_recovers_bloch_component():
    # observed (1 + x*eta*sx/sqrt3)/2 with eta = 1, sx = 0.6 inverts to the
    # exact sigma_x statistics (1 + 0.6 x)/2
    eta, sx = 1.0, 0.6
    observed = np.array([0.5 * (1.0 + x * eta * sx / SQRT3) for x in (-1, 1)])
    out = invert_marginal(observed, qubit_kernel_matrix(eta))
    np.testing.assert_allclose(out, [0.2, 0.8], atol=1e-15)


def test_invert_marginal_identity_kernel():
    out = invert_marginal(np.array([1.0, 0.0]), Kernel2.identity())
    np.testing.assert_allclose(out, [1.0, 0.0])


def test_invert_marginal_rejects_unnormalized():
    with pytest.raises(ValueError):
        invert_marginal(np.array([0.7, 0.7]), Kernel2.identity())


# ------------------------------------------------------------ invert_joint

def test_invert_joint_uniform_fixed_point():
    uniform = JointDist2x2(np.full(4, 0.25))
    for eta in (0.4, 1.0):
        k = qubit_kernel_matrix(eta)
        out = invert_joint(uniform, k, k)
        np.testing.assert_allclose(out.values, 0.25, atol=1e-15)


def test_invert_joint_produces_negative_entry():
    # observed (1 + xy/sqrt3)/4 for the z-polarized state at eta = 1
    observed = JointDist2x2.from_function(lambda x, y: 0.25 * (1 + x * y / SQRT3))
    k = qubit_kernel_matrix(1.0)
    out = invert_joint(observed, k, k)
    expected_neg = (1.0 - SQRT3) / 4.0
    assert out.value(1, -1) == pytest.approx(expected_neg, abs=1e-12)
    assert out.value(-1, 1) == pytest.approx(expected_neg, abs=1e-12)
    assert expected_neg == pytest.approx(-0.183013, abs=5e-7)
    assert not out.is_probability


def test_invert_joint_matches_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        p = random_dist(rng)
        kx, ky = random_kernel(rng), random_kernel(rng)
        out = invert_joint(p, kx, ky)
        oracle = brute_force_invert_joint(p, kx, ky)
        for (x, y), val in oracle.items():
            assert out.value(x, y) == pytest.approx(val, abs=1e-12)


def test_invert_joint_preserves_product_structure():
    rng = np.random.default_rng(7)
    for _ in range(100):
        px = rng.dirichlet(np.ones(2))
        py = rng.dirichlet(np.ones(2))
        p = JointDist2x2(np.outer(px, py).reshape(4))
        kx, ky = random_kernel(rng), random_kernel(rng)
        out = invert_joint(p, kx, ky)
        qx = invert_marginal(px, kx)
        qy = invert_marginal(py, ky)
        np.testing.assert_allclose(
            out.values, np.outer(qx, qy).reshape(4), atol=1e-12
        )


def test_invert_joint_normalization_and_marginal_consistency():
    # 1000 random (observed, kernel) instances: output normalized, and
    # marginalizing commutes with inverting
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        p = random_dist(rng)
        kx, ky = random_kernel(rng), random_kernel(rng)
        out = invert_joint(p, kx, ky)
        assert abs(out.values.sum() - 1.0) <= 1e-12
        worst = max(
            worst,
            np.max(np.abs(out.marginal_x() - invert_marginal(p.marginal_x(), kx))),
            np.max(np.abs(out.marginal_y() - invert_marginal(p.marginal_y(), ky))),
        )
    assert worst <= 1e-12


# -------------------------------------------------------- deconvolve_char

def gaussian_response(uu, vv, uv):
    return lambda u, v: np.exp(-(uu * u * u + vv * v * v + 2 * uv * u * v) / 8.0)


def test_deconvolve_vacuum_through_instrument():
    h = gaussian_response(2.125, 2.125, 1.875)
    out = deconvolve_char(h, h)
    for u, v in [(0.3, -1.2), (1.0, 1.0), (0.0, 0.0)]:
        expected = h(u, v) / (h(u, 0.0) * h(0.0, v))
        assert out(u, v) == pytest.approx(expected, rel=1e-14)
    assert out(0.0, 0.0) == pytest.approx(1.0)


def test_deconvolve_gaussian_ratio_is_pure_cross_term():
    uu, vv, uv = 2.125, 2.125, 1.875
    h = gaussian_response(uu, vv, uv)
    out = deconvolve_char(h, h)
    rng = np.random.default_rng(3)
    for _ in range(50):
        u, v = rng.uniform(-2, 2, size=2)
        assert out(u, v) == pytest.approx(np.exp(-uv * u * v / 4.0), rel=1e-12)


def test_deconvolve_separable_instrument_is_transparent():
    rng = np.random.default_rng(5)
    for _ in range(20):
        au, av = rng.uniform(0.5, 3.0, size=2)
        h = gaussian_response(au, av, 0.0)  # separable in u and v
        sig_uu, sig_vv, sig_uv = rng.uniform(0.2, 1.0, size=3)
        signal = gaussian_response(sig_uu, sig_vv, sig_uv)
        observed = lambda u, v: signal(u, v) * h(u, v)
        out = deconvolve_char(observed, h)
        for u, v in rng.uniform(-2, 2, size=(5, 2)):
            assert out(u, v) == pytest.approx(signal(u, v), rel=1e-12)


def test_deconvolve_underflow_guard():
    h = gaussian_response(50.0, 50.0, 0.0)
    out = deconvolve_char(h, h)
    with pytest.raises(ResponseUnderflowError):
        out(300.0, 300.0)


# -------------------------------------------------------- gaussian_density

def test_gaussian_density_balanced_vacuum():
    char = GaussianChar(mean=np.zeros(2), quad_uu=1 / 8, quad_vv=1 / 8)
    res = gaussian_density(char)
    assert res.kind == "distribution"
    np.testing.assert_allclose(res.covariance, np.diag([0.25, 0.25]))
    np.testing.assert_allclose(res.mean, 0.0)


def test_gaussian_density_indefinite_form():
    char = GaussianChar(
        mean=np.zeros(2), quad_uu=1 / 8, quad_vv=1 / 8, quad_uv=1.875 / 8
    )
    res = gaussian_density(char)
    assert res.kind == "not_a_distribution"
    lo, _ = eig2_closed_form(1 / 8, 1 / 8, 1.875 / 8)
    assert lo == pytest.approx((1.0 - 1.875) / 8.0)
    assert res.min_eigenvalue == pytest.approx(-0.109375, abs=1e-15)
    assert res.covariance is None


def test_gaussian_density_thermal_positive_definite():
    char = GaussianChar(
        mean=np.zeros(2), quad_uu=3 / 8, quad_vv=3 / 8, quad_uv=1.875 / 8
    )
    res = gaussian_density(char)
    assert res.kind == "distribution"
    lo, hi = eig2_closed_form(3 / 8, 3 / 8, 1.875 / 8)
    assert lo == pytest.approx((3.0 - 1.875) / 8.0)
    assert lo > 0 and hi > 0
    np.testing.assert_allclose(res.covariance, 2.0 * char.quad_matrix())


def test_gaussian_density_boundary_case():
    char = GaussianChar(mean=np.zeros(2), quad_uu=1 / 8, quad_vv=1 / 8, quad_uv=1 / 8)
    res = gaussian_density(char)
    assert res.kind == "boundary"
    assert abs(res.min_eigenvalue) <= 1e-12


def test_gaussian_density_relabel_invariance():
    # swapping the two variables (u <-> v, quad_uu <-> quad_vv) cannot
    # change the classification
    rng = np.random.default_rng(13)
    for _ in range(200):
        quad_uu, quad_vv = rng.uniform(0.05, 1.0, size=2)
        quad_uv = rng.uniform(-1.0, 1.0)
        a = GaussianChar(np.zeros(2), quad_uu, quad_vv, quad_uv)
        b = GaussianChar(np.zeros(2), quad_vv, quad_uu, quad_uv)
        assert gaussian_density(a).kind == gaussian_density(b).kind


def test_gaussian_char_normalized_at_origin():
    char = GaussianChar(mean=np.array([0.7, -0.3]), quad_uu=0.4, quad_vv=0.2, quad_uv=0.1)
    assert char(0.0, 0.0) == pytest.approx(1.0)
