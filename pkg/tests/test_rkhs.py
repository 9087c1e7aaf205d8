import math

import numpy as np
import pytest

from rkhsid.exceptions import ConditioningError
from rkhsid.kernels import KernelSpec
from rkhsid.rkhs import (
    CenterSet,
    RkhsFunction,
    evaluate,
    factorize,
    interpolate,
    native_norm,
    project,
)

SQRT3 = math.sqrt(3.0)
G_UNIT = (1.0 + SQRT3) * math.exp(-SQRT3)  # K_{3/2}(r=1, l=1)

SPEC32 = KernelSpec(nu=1.5, length_scale=1.0)
PAIR = CenterSet(points=[[0.0, 0.0], [1.0, 0.0]])


def test_center_set_separation_and_duplicates():
    cs = CenterSet(points=[[0.0, 0.0], [3.0, 4.0]])
    assert cs.separation == 5.0
    assert CenterSet(points=[[1.0, 2.0]]).separation == np.inf
    with pytest.raises(ValueError):
        CenterSet(points=[[0.0, 0.0], [0.0, 0.0]])


def test_factorize_single_center():
    fact = factorize(SPEC32, CenterSet(points=[[0.0, 0.0]]))
    assert fact.jitter == 0.0
    assert fact.gram.shape == (1, 1) and fact.gram[0, 0] == 1.0


def test_factorize_well_separated_no_jitter():
    # spacing >= l keeps the Gram comfortably positive definite
    pts = np.column_stack([np.arange(10.0), np.zeros(10)])
    cs = CenterSet(points=pts)
    fact = factorize(SPEC32, cs)
    assert fact.jitter == 0.0
    # brute-force eigensolve confirms the margin the factorization relies on
    assert np.linalg.eigvalsh(fact.gram).min() > 1e-6


def test_factorize_factor_reproduces_gram():
    rng = np.random.default_rng(5)
    cs = CenterSet(points=rng.uniform(-1, 1, size=(20, 2)))
    fact = factorize(KernelSpec(nu=2.5, length_scale=0.3), cs)
    L = np.tril(fact.cho[0])
    recon = L @ L.T
    target = fact.gram + fact.jitter * np.eye(20)
    assert np.abs(recon - target).max() <= 1e-12 * np.abs(target).max()


def test_factorize_near_duplicate_raises():
    cs = CenterSet(points=[[0.0, 0.0], [1e-9, 0.0]])
    with pytest.raises(ConditioningError):
        factorize(SPEC32, cs)


def test_interpolate_single_center_and_zero_values():
    fact = factorize(SPEC32, CenterSet(points=[[0.5, -0.5]]))
    f = interpolate(fact, [3.25])
    assert f.coefficients[0] == 3.25
    z = interpolate(fact, [0.0])
    assert np.array_equal(z.coefficients, [0.0])


def test_interpolate_two_center_hand_solve():
    # (G a = [1, 1]) with G = [[1, g], [g, 1]] has a_i = 1 / (1 + g)
    fact = factorize(SPEC32, PAIR)
    f = interpolate(fact, [1.0, 1.0])
    assert np.allclose(f.coefficients, 1.0 / (1.0 + G_UNIT), rtol=1e-12)
    assert f(np.array([0.0, 0.0])) == pytest.approx(1.0, abs=1e-10)


def test_interpolate_length_mismatch():
    fact = factorize(SPEC32, PAIR)
    with pytest.raises(ValueError):
        interpolate(fact, [1.0, 2.0, 3.0])


def test_reproduction_property_random_values():
    rng = np.random.default_rng(17)
    pts = rng.uniform(-2, 2, size=(30, 2))
    cs = CenterSet(points=pts)
    for nu in (1.5, 2.5):
        fact = factorize(KernelSpec(nu=nu, length_scale=0.5), cs)
        values = rng.normal(size=30)
        f = interpolate(fact, values)
        reproduced = f(pts)
        assert np.abs(reproduced - values).max() <= 1e-6 * np.abs(values).max()


def test_evaluate_matches_expansion():
    fact = factorize(SPEC32, PAIR)
    f = RkhsFunction(spec=SPEC32, centers=PAIR, coefficients=np.array([0.0, 0.0]))
    assert evaluate(f, np.array([0.3, 0.4])) == 0.0
    g = RkhsFunction(spec=SPEC32, centers=CenterSet(points=[[1.0, 1.0]]), coefficients=[1.0])
    assert evaluate(g, np.array([1.0, 1.0])) == 1.0


def test_project_quadratic_hand_solve():
    # values [0, 1] -> a = [-g, 1] / (1 - g^2)
    f = project(SPEC32, PAIR, lambda x: x[0] ** 2)
    expected = np.array([-G_UNIT, 1.0]) / (1.0 - G_UNIT**2)
    assert np.allclose(f.coefficients, expected, rtol=1e-12)


def test_project_zero_function():
    f = project(SPEC32, PAIR, lambda x: 0.0)
    assert np.array_equal(f.coefficients, [0.0, 0.0])


def test_project_idempotent():
    rng = np.random.default_rng(23)
    cs = CenterSet(points=rng.uniform(-1, 1, size=(15, 2)))
    spec = KernelSpec(nu=2.5, length_scale=0.4)
    fact = factorize(spec, cs)
    once = project(spec, cs, lambda x: np.sin(3 * x[0]) + x[1] ** 2, fact=fact)
    twice = project(spec, cs, once, fact=fact)
    assert np.abs(once.coefficients - twice.coefficients).max() <= 1e-10


def test_projection_reproduces_at_centers():
    rng = np.random.default_rng(29)
    cs = CenterSet(points=rng.uniform(-1, 1, size=(12, 2)))
    spec = KernelSpec(nu=1.5, length_scale=0.6)

    def g(x):
        return float(np.cos(x[0]) * x[1])

    f = project(spec, cs, g)
    targets = np.array([g(p) for p in cs.points])
    assert np.abs(f(cs.points) - targets).max() <= 1e-6 * np.abs(targets).max()


def test_native_norm_cases():
    fact = factorize(SPEC32, PAIR)
    zero = RkhsFunction(spec=SPEC32, centers=PAIR, coefficients=np.zeros(2))
    assert native_norm(fact, zero) == 0.0

    single_cs = CenterSet(points=[[0.0, 0.0]])
    single_fact = factorize(SPEC32, single_cs)
    f = RkhsFunction(spec=SPEC32, centers=single_cs, coefficients=[-2.5])
    assert native_norm(single_fact, f) == pytest.approx(2.5, rel=1e-14)

    # explicit 2x2 quadratic form for the equal-values interpolant
    interp = interpolate(fact, [1.0, 1.0])
    expected = math.sqrt(2.0 / (1.0 + G_UNIT))
    assert native_norm(fact, interp) == pytest.approx(expected, rel=1e-10)


def test_native_norm_center_mismatch():
    fact = factorize(SPEC32, PAIR)
    other = CenterSet(points=[[0.0, 0.0], [2.0, 0.0]])
    f = RkhsFunction(spec=SPEC32, centers=other, coefficients=np.ones(2))
    with pytest.raises(ValueError):
        native_norm(fact, f)


def test_native_norm_zero_iff_zero_coefficients():
    rng = np.random.default_rng(31)
    cs = CenterSet(points=rng.uniform(-1, 1, size=(8, 2)))
    fact = factorize(SPEC32, cs)
    for _ in range(20):
        a = rng.normal(size=8)
        f = RkhsFunction(spec=SPEC32, centers=cs, coefficients=a)
        if np.any(a != 0.0):
            assert native_norm(fact, f) > 0.0
