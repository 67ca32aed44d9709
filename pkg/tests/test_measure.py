import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from bessel_hardy.cuboid import Cuboid
from bessel_hardy.errors import DomainError
from bessel_hardy.measure import (Flavor, NuVector, measure_ball_comparable, measure_ball_exact,
                                  measure_ball_multidim_comparable, measure_balls_exact,
                                  measure_cuboid, measure_interval)


@pytest.mark.parametrize("nu,a,b,expected", [
    (-0.5, 1.0, 2.0, 1.0),
    (-1.0, 1.0, math.e, 1.0),
    (-2.0, 1.0, 2.0, 3 / 8),
    (0.0, 0.0, 1.0, 0.5),
])
def test_interval_examples(nu, a, b, expected):
    assert measure_interval(nu, a, b) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("nu", [-1.0, -2.0, -1.5])
def test_interval_infinite_at_origin(nu):
    assert measure_interval(nu, 0.0, 1.0) == math.inf


@pytest.mark.parametrize("a,b", [(-1.0, 1.0), (2.0, 1.0), (1.0, 1.0)])
def test_interval_domain_errors(a, b):
    with pytest.raises(DomainError):
        measure_interval(0.0, a, b)


def test_cuboid_examples():
    assert measure_cuboid((0.0, 0.0), Cuboid((0.0, 0.0), (1.0, 1.0))) == pytest.approx(0.25)
    assert measure_cuboid((-0.5,), Cuboid((2.0,), (4.0,))) == pytest.approx(2.0)
    assert measure_cuboid((0.0, -2.0), Cuboid((0.0, 1.0), (1.0, 2.0))) == pytest.approx(3 / 16)
    assert measure_cuboid((0.0, -2.0), Cuboid((0.0, 0.0), (1.0, 2.0))) == math.inf


def test_cuboid_uses_effective_exponent_on_exotic_axes():
    nu = NuVector.mixed((0.0,), (2.0,))
    Q = Cuboid((0.0, 1.0), (1.0, 2.0))
    assert measure_cuboid(nu, Q) == pytest.approx(3 / 16)


def test_cuboid_dimension_mismatch():
    with pytest.raises(DomainError):
        measure_cuboid((0.0,), Cuboid((1.0, 1.0), (2.0, 2.0)))


def test_ball_exact_examples():
    assert measure_ball_exact(0.0, 1.0, 2.0) == pytest.approx(4.5)
    assert measure_ball_exact(-1.0, 2.0, 1.0) == pytest.approx(math.log(3))
    assert measure_ball_exact(-1.5, 4.0, 1.0) == pytest.approx(2 / 15)


def test_ball_comparable_examples():
    assert measure_ball_comparable(0.0, 1.0, 3.0) == pytest.approx(16.0)
    assert measure_ball_exact(0.0, 1.0, 3.0) == pytest.approx(8.0)
    assert measure_ball_comparable(0.0, 10.0, 1.0) == pytest.approx(12.1)
    assert measure_ball_exact(0.0, 10.0, 1.0) == pytest.approx(20.0)  # (121 - 81) / 2
    # nu = -2, x = 4, r = 1: comparable 1/36, exact (3^-2 - 5^-2)/2
    assert measure_ball_comparable(-2.0, 4.0, 1.0) == pytest.approx(1 / 36)
    assert measure_ball_exact(-2.0, 4.0, 1.0) == pytest.approx((1 / 9 - 1 / 25) / 2)


@pytest.mark.parametrize("nu", [-1.0, -2.0])
def test_ball_comparable_needs_r_below_x(nu):
    with pytest.raises(DomainError):
        measure_ball_comparable(nu, 1.0, 1.0)


def test_multidim_comparable_examples():
    assert measure_ball_multidim_comparable((0.0, 0.0), (4.0, 4.0), 1.0) == pytest.approx(16.0)
    # the exact sup-norm cube [3,5]^2 under x1 x2 dx has measure 8 * 8
    assert measure_balls_exact((0.0, 0.0), np.array([4.0, 4.0]), 1.0) == pytest.approx(64.0)
    assert measure_ball_multidim_comparable((-0.5,), (3.0,), 1.0) == pytest.approx(1.0)
    assert measure_ball_multidim_comparable((-2.0,), (8.0,), 2.0) == pytest.approx(1 / 256)
    oracle = (6.0 ** -2 - 10.0 ** -2) / 2
    assert measure_ball_exact(-2.0, 8.0, 2.0) == pytest.approx(oracle)


def test_multidim_comparable_preconditions():
    with pytest.raises(DomainError):
        measure_ball_multidim_comparable((-2.0,), (1.0,), 1.0)
    with pytest.raises(DomainError):
        measure_ball_multidim_comparable((0.0,), (1.0, 1.0), 0.1)


def test_nu_vector_validation():
    with pytest.raises(DomainError, match="admissible"):
        NuVector.classical(-1.5)
    with pytest.raises(DomainError):
        NuVector((1.0,), (Flavor.EXOTIC,)).__class__((-1.0,), (Flavor.EXOTIC,))
    nu = NuVector.mixed((0.5,), (1.0,))
    assert nu.effective == (0.5, -1.0)
    assert nu.weight_exponents == (2.0, -1.0)
    assert nu.conjugate() == NuVector.classical(0.5, 1.0)


@pytest.mark.parametrize("nu", [-2.0, -1.0, -0.5, 0.0, 1.0])
def test_ball_comparability_constant(nu):
    ratios = []
    for x in np.logspace(-3, 3, 40):
        for r in np.logspace(-3, 3, 40):
            if nu <= -1 and not r < x:
                continue
            ratios.append(measure_ball_exact(nu, x, r) / measure_ball_comparable(nu, x, r))
    ratios = np.array(ratios)
    assert np.all(np.isfinite(ratios))
    assert ratios.max() / ratios.min() < 10


@pytest.mark.parametrize("nu", [(-0.5,), (0.0,), (2.0,), (0.0, 1.0), (-0.9, 0.5)])
def test_doubling_in_classical_range(nu):
    d = len(nu)
    g = np.logspace(-6, 6, 13, base=2.0)
    x = np.stack(np.meshgrid(*([g] * d), indexing="ij"), -1).reshape(-1, d)
    worst = 0.0
    for r in np.logspace(-8, 8, 17, base=2.0):
        worst = max(worst, float(np.max(measure_balls_exact(nu, x, 2 * r) / measure_balls_exact(nu, x, r))))
    assert worst <= 2.0 ** (d * (2 * max(nu) + 2 + 1))


def test_non_doubling_witness():
    # B(x, 2r) reaches the origin where x^-3 is not integrable
    r = 1.0
    x = (1 + 1e-3) * r
    assert measure_ball_exact(-2.0, x, 2 * r) / measure_ball_exact(-2.0, x, r) > 100
    # finite witnesses too: r just below x
    for eps in (1e-1, 1e-2, 1e-3):
        x = 2 * (1 + eps)
        assert measure_ball_exact(-2.0, x, 2.0) / measure_ball_exact(-2.0, x, 1.0) > 0.3 / eps


@given(st.floats(-3.0, 3.0), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_additivity(nu, a, w1, w2):
    b, c = a + w1, a + w1 + w2
    whole = measure_interval(nu, a, c)
    parts = measure_interval(nu, a, b) + measure_interval(nu, b, c)
    assert parts == pytest.approx(whole, rel=1e-12)


@given(st.floats(-0.99, 4.0), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_exact_within_comparable_band(nu, x, r):
    ratio = measure_ball_exact(nu, x, r) / measure_ball_comparable(nu, x, r)
    p = 2 * nu + 2
    # balls reaching the origin give exactly 1/p, which grows as nu -> -1
    assert 1 / (2 ** p + 2) <= ratio <= max(2.0, 1 / p) * (1 + 1e-12)


@given(st.floats(-4.0, -1.0), st.floats(1e-2, 1e2), st.floats(0.01, 0.99))
def test_exotic_range_comparability(nu, x, frac):
    ratio = measure_ball_exact(nu, x, frac * x) / measure_ball_comparable(nu, x, frac * x)
    assume(math.isfinite(ratio))
    assert 0.1 < ratio < 10
