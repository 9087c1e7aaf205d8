import math

import numpy as np
import pytest

from rkhsid.kernels import (
    SLOPE_BOUNDS,
    KernelSpec,
    RateParameters,
    eval_kernel,
    gram_matrix,
    kernel_vector,
    sup_kernel_bound,
)

SQRT3 = math.sqrt(3.0)
# off-diagonal value for nu=3/2, l=1 at unit distance, by direct substitution
G_UNIT = (1.0 + SQRT3) * math.exp(-SQRT3)


def test_diagonal_is_one_for_both_orders():
    x = np.array([0.3, -0.7])
    for nu in (1.5, 2.5):
        spec = KernelSpec(nu=nu, length_scale=0.4)
        assert eval_kernel(spec, x, x) == 1.0


def test_closed_form_value_nu32():
    # sqrt(3) r / l = 1  ->  2 / e
    spec = KernelSpec(nu=1.5, length_scale=1.0)
    r = 1.0 / SQRT3
    val = eval_kernel(spec, np.zeros(2), np.array([r, 0.0]))
    assert val == pytest.approx(2.0 * math.exp(-1.0), rel=1e-14)


def test_closed_form_value_nu52():
    # sqrt(5) r / l = 1  ->  (1 + 1 + 1/3) / e
    spec = KernelSpec(nu=2.5, length_scale=1.0)
    r = 1.0 / math.sqrt(5.0)
    val = eval_kernel(spec, np.zeros(2), np.array([r, 0.0]))
    assert val == pytest.approx((7.0 / 3.0) * math.exp(-1.0), rel=1e-14)


def test_dimension_mismatch_rejected():
    spec = KernelSpec(nu=1.5, length_scale=1.0, ambient_dim=2)
    with pytest.raises(ValueError):
        eval_kernel(spec, np.zeros(3), np.zeros(3))


def test_invalid_spec_rejected():
    with pytest.raises(ValueError):
        KernelSpec(nu=0.5, length_scale=1.0)
    with pytest.raises(ValueError):
        KernelSpec(nu=1.5, length_scale=0.0)
    with pytest.raises(ValueError):
        KernelSpec(nu=1.5, length_scale=1.0, family="gaussian")


def test_kernel_vector_values_and_errors():
    spec = KernelSpec(nu=1.5, length_scale=1.0)
    centers = np.array([[0.0, 0.0], [1.0, 0.0]])
    k = kernel_vector(spec, centers, np.zeros(2))
    assert k[0] == 1.0
    assert k[1] == pytest.approx(G_UNIT, rel=1e-14)
    with pytest.raises(ValueError):
        kernel_vector(spec, np.empty((0, 2)), np.zeros(2))


def test_kernel_vector_tail_decay():
    spec = KernelSpec(nu=2.5, length_scale=1.0)
    centers = np.array([[0.0, 0.0], [40.0, 0.0]])
    k = kernel_vector(spec, centers, np.zeros(2))
    assert 0.0 < k[1] < 1e-30


def test_gram_2x2_eigenvalues():
    spec = KernelSpec(nu=1.5, length_scale=1.0)
    g = gram_matrix(spec, [[0.0, 0.0], [1.0, 0.0]])
    assert g[0, 1] == pytest.approx(G_UNIT, rel=1e-14)
    # eigendecomposition of the independently constructed 2x2 matrix
    expected = np.linalg.eigvalsh(np.array([[1.0, G_UNIT], [G_UNIT, 1.0]]))
    assert np.allclose(np.linalg.eigvalsh(g), expected, rtol=1e-13)


def test_gram_rejects_duplicates():
    spec = KernelSpec(nu=1.5, length_scale=1.0)
    with pytest.raises(ValueError):
        gram_matrix(spec, [[0.0, 0.0], [0.0, 0.0]])


def test_gram_symmetry_unit_diagonal_positive_definite():
    rng = np.random.default_rng(42)
    for nu in (1.5, 2.5):
        spec = KernelSpec(nu=nu, length_scale=0.7)
        pts = rng.uniform(-2, 2, size=(50, 2))
        g = gram_matrix(spec, pts)
        assert np.array_equal(g, g.T)
        assert np.all(np.diag(g) == 1.0)
        assert np.linalg.eigvalsh(g).min() > 0.0


def test_kernel_symmetry_random_pairs():
    rng = np.random.default_rng(7)
    for nu in (1.5, 2.5):
        spec = KernelSpec(nu=nu, length_scale=0.3)
        for _ in range(25):
            x, y = rng.normal(size=(2, 2))
            assert eval_kernel(spec, x, y) == eval_kernel(spec, y, x)


def test_monotone_radial_decay():
    rng = np.random.default_rng(11)
    radii = np.sort(rng.uniform(0.01, 5.0, size=40))
    for nu in (1.5, 2.5):
        spec = KernelSpec(nu=nu, length_scale=0.9)
        vals = spec.profile(radii)
        assert np.all(np.diff(vals) < 0.0)


def test_sup_kernel_bound_is_one():
    for nu in (1.5, 2.5):
        for l in (0.05, 0.5, 3.0):
            assert sup_kernel_bound(KernelSpec(nu=nu, length_scale=l)) == 1.0


def test_rate_parameters_defaults():
    r32 = RateParameters.for_matern(1.5)
    assert r32.s == pytest.approx(r32.tau - 0.5, abs=0.0)
    assert r32.bound_exponent >= 1.0
    r52 = RateParameters.for_matern(2.5)
    assert r52.bound_exponent >= 2.0
    assert r52.tau == pytest.approx(2.0 * 2.5 - 1.0, abs=1e-5)


def test_rate_parameters_arithmetic_randomized():
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = int(rng.integers(1, 6))
        k = int(rng.integers(1, d + 1))
        tau = rng.uniform(d / 2, d / 2 + 4)
        s = tau - (d - k) / 2
        mu = rng.uniform(0.0, s)
        rp = RateParameters(nu=1.5, tau=tau, d=d, k=k, mu=mu)
        assert rp.s == tau - (d - k) / 2
        assert rp.bound_exponent == pytest.approx(tau - (d - k) / 2 - mu, abs=1e-12)


def test_rate_parameters_rejects_negative_bound():
    with pytest.raises(ValueError):
        RateParameters(nu=1.5, tau=2.0, d=2, k=1, mu=3.0)


def test_slope_bounds_table():
    assert SLOPE_BOUNDS == {1.5: 1.0, 2.5: 2.0}
