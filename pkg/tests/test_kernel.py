import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from bessel_hardy.errors import DomainError
from bessel_hardy.kernel import (Branch, GaussianEnvelope, KernelSpec, fit_envelope, gaussian_envelope,
                                 k_conjugated_1d, kernel_product, w_classical_1d, w_exotic_1d)
from bessel_hardy.measure import NuVector

pos = st.floats(1e-2, 1e2)


def conservation(nu, t, x):
    f = lambda y: w_classical_1d(nu, t, x, y) * y ** (2 * nu + 1)
    s = math.sqrt(t)
    pts = sorted({0.0, max(x - 8 * s, 0.0), x, x + 8 * s})
    total = sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
                for a, b in zip(pts[:-1], pts[1:]))
    return total + integrate.quad(f, pts[-1], np.inf, epsabs=1e-14, limit=200)[0]


@pytest.mark.parametrize("nu", [0.0, 0.5, 2.0])
@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("x", [0.5, 4.0])
def test_conservation(nu, t, x):
    assert conservation(nu, t, x) == pytest.approx(1.0, abs=1e-6)


def test_neumann_half_line_kernel():
    rng = np.random.default_rng(3)
    t, x, y = np.exp(rng.uniform(-3, 3, (3, 200)))
    ref = (4 * np.pi * t) ** -0.5 * (np.exp(-(x - y) ** 2 / (4 * t)) + np.exp(-(x + y) ** 2 / (4 * t)))
    assert np.allclose(w_classical_1d(-0.5, t, x, y), ref, rtol=1e-12, atol=0)


def test_large_argument_no_overflow():
    v = w_classical_1d(1.0, 1e-4, 50.0, 50.0)
    assert math.isfinite(v) and v > 0
    # near the diagonal the kernel looks like a Gaussian in Lebesgue measure times x^-(2nu+1)
    assert v * 50.0 ** 3 == pytest.approx((4 * math.pi * 1e-4) ** -0.5, rel=1e-3)


def test_exotic_defining_identity():
    assert w_exotic_1d(1.0, 1.0, 1.0, 1.0) == w_classical_1d(1.0, 1.0, 1.0, 1.0)
    rng = np.random.default_rng(5)
    t, x, y = np.exp(rng.uniform(-2, 2, (3, 500)))
    ratio = w_exotic_1d(1.5, t, x, y) / ((x * y) ** 3 * w_classical_1d(1.5, t, x, y))
    assert np.max(np.abs(ratio - 1)) <= 4e-16


def test_conjugation_identity_random():
    rng = np.random.default_rng(7)
    t, x, y = np.exp(rng.uniform(-3, 3, (3, 10_000)))
    for nu in (0.5, 1.0, 2.0):
        lhs = k_conjugated_1d(nu, t, x, y)
        rhs = (y / x) ** (2 * nu) * w_classical_1d(nu, t, x, y)
        # compare where the Gaussian factor has not underflowed
        ok = rhs > 1e-280
        assert ok.sum() > 9000
        assert np.max(np.abs(lhs[ok] / rhs[ok] - 1)) < 1e-12


def test_conjugated_diagonal():
    for x in (0.3, 1.0, 7.0):
        assert k_conjugated_1d(1.0, 0.5, x, x) == pytest.approx(w_classical_1d(1.0, 0.5, x, x), rel=1e-13)


@given(st.floats(0.1, 3.0), pos, pos, pos)
def test_weighted_symmetry_of_K(nu, t, x, y):
    lhs = x ** (4 * nu) * k_conjugated_1d(nu, t, x, y)
    rhs = y ** (4 * nu) * k_conjugated_1d(nu, t, y, x)
    assert lhs == pytest.approx(rhs, rel=1e-11)


@given(st.floats(-0.95, 4.0), pos, pos, pos)
def test_classical_symmetry_and_positivity(nu, t, x, y):
    a, b = w_classical_1d(nu, t, x, y), w_classical_1d(nu, t, y, x)
    assert a == b
    assert a >= 0


@given(st.floats(0.1, 4.0), pos, pos, pos)
def test_exotic_symmetry(nu, t, x, y):
    assert w_exotic_1d(nu, t, x, y) == pytest.approx(w_exotic_1d(nu, t, y, x), rel=1e-14)


@given(st.floats(-0.95, 3.0), st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.floats(0.1, 10.0),
       st.floats(0.1, 10.0))
def test_scaling_homogeneity(nu, t, x, y, lam):
    lhs = w_classical_1d(nu, lam * lam * t, lam * x, lam * y)
    rhs = lam ** (-(2 * nu + 2)) * w_classical_1d(nu, t, x, y)
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-300)


@pytest.mark.parametrize("nu,t,s,x,y", [(0.0, 0.3, 0.7, 1.0, 1.5), (1.0, 1.0, 2.0, 0.5, 2.0),
                                        (-0.5, 0.2, 0.2, 0.4, 0.3), (2.5, 0.5, 1.5, 3.0, 2.0)])
def test_chapman_kolmogorov(nu, t, s, x, y):
    f = lambda z: w_classical_1d(nu, t, x, z) * w_classical_1d(nu, s, z, y) * z ** (2 * nu + 1)
    val = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=400, points=None)[0]
    assert val == pytest.approx(w_classical_1d(nu, t + s, x, y), rel=1e-5)


def test_chapman_kolmogorov_conjugated():
    nu, t, s, x, y = 1.0, 0.4, 0.6, 1.2, 0.7
    f = lambda z: k_conjugated_1d(nu, t, x, z) * k_conjugated_1d(nu, s, z, y) * z ** (2 * nu + 1)
    val = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=400)[0]
    assert val == pytest.approx(k_conjugated_1d(nu, t + s, x, y), rel=1e-5)


def test_domain_errors():
    with pytest.raises(DomainError):
        w_classical_1d(0.0, 0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        w_classical_1d(-1.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        w_exotic_1d(-0.5, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        k_conjugated_1d(0.5, 1.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        KernelSpec((0.5,), (Branch.CONJUGATED_K, Branch.CLASSICAL_W))


def test_product_matches_axes():
    spec = KernelSpec.classical(0.0, 1.0)
    x, y = np.array([1.0, 2.0]), np.array([1.5, 0.5])
    assert kernel_product(spec, 0.7, x, y) == pytest.approx(
        w_classical_1d(0.0, 0.7, 1.0, 1.5) * w_classical_1d(1.0, 0.7, 2.0, 0.5), rel=1e-15)
    mixed = KernelSpec.conjugated_route(NuVector.mixed((0.0,), (1.0,)))
    assert mixed.branches == (Branch.CLASSICAL_W, Branch.CONJUGATED_K)
    xx = np.array([1.0, 2.0])
    assert kernel_product(mixed, 0.7, xx, xx) == pytest.approx(kernel_product(spec, 0.7, xx, xx), rel=1e-13)
    with pytest.raises(DomainError):
        kernel_product(spec, 1.0, np.ones(3), np.ones(3))


def test_direct_spec_for_mixed_vector():
    spec = KernelSpec.direct(NuVector.mixed((0.5,), (1.0,)))
    assert spec.branches == (Branch.CLASSICAL_W, Branch.EXOTIC_W)
    assert spec.measure_nu == (0.5, -1.0)


def test_product_conservation_2d():
    spec = KernelSpec.classical(0.0, 0.5)
    x = np.array([1.0, 0.7])
    t = 0.5
    g, w = np.polynomial.legendre.leggauss(80)
    z = 0.5 * (g + 1) * 12.0
    wz = 0.5 * w * 12.0
    Z1, Z2 = np.meshgrid(z, z, indexing="ij")
    K = kernel_product(spec, t, x, np.stack([Z1, Z2], -1))
    total = np.einsum("ij,i,j->", K * Z1 * Z2 ** 2, wz, wz)
    assert total == pytest.approx(1.0, abs=1e-5)


def test_envelope_decreasing_and_infinite_flag():
    env = GaussianEnvelope(1.0, 4.0)
    vals = [gaussian_envelope((0.0,), env, 1.0, 1.0, 1.0 + d)[0] for d in (0.0, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    v, inf = gaussian_envelope((-2.0,), env, 1.0, 0.5, 0.6)
    assert v == 0.0 and inf
    with pytest.raises(DomainError):
        GaussianEnvelope(0.0, 1.0)


def test_envelope_fit_bounds_kernel():
    rng = np.random.default_rng(11)
    t, x, y = np.exp(rng.uniform(-2, 2, (3, 4000)))
    kv = w_classical_1d(0.0, t, x, y)
    upper = fit_envelope(kv, (0.0,), t, x[:, None], y[:, None], 4.0, "upper")
    lower = fit_envelope(kv, (0.0,), t, x[:, None], y[:, None], 1.0, "lower")
    up, _ = gaussian_envelope((0.0,), upper, t, x[:, None], y[:, None])
    lo, _ = gaussian_envelope((0.0,), lower, t, x[:, None], y[:, None])
    assert np.all(kv <= up * (1 + 1e-12))
    assert np.all(lo <= kv * (1 + 1e-12))
    assert 0 < lower.bigC <= upper.bigC < 10
