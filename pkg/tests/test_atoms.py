import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bessel_hardy.atoms import (Atom, conjugate_atom, conjugation_factor_range, haar_decompose,
                                localize_and_decompose, mean_split, validate_atom)
from bessel_hardy.covering import DyadicCovering, dyadic_power, qb_covering
from bessel_hardy.cuboid import Cuboid
from bessel_hardy.errors import DomainError
from bessel_hardy.grid import GridFunction
from bessel_hardy.measure import NuVector, measure_cuboid, measure_interval

NU0 = NuVector.classical(0.0)
Q12 = Cuboid((1.0,), (2.0,))


def test_local_atom_valid():
    cert = validate_atom(Atom.local(Q12, NU0), DyadicCovering(), NU0)
    assert cert.valid and cert.size == pytest.approx(1.0)


def haar_step(nu, K, split, scale=1.0):
    left, right = measure_interval(nu, K[0], split), measure_interval(nu, split, K[1])
    c = left / right
    muK = left + right
    vals = np.array([1.0, -c]) / (muK * max(1.0, c)) * scale
    return GridFunction((np.array([K[0], split, K[1]]),), vals, NuVector.classical(nu))


def test_haar_type_atom_valid_and_oversized():
    g = haar_step(0.0, (1.0, 2.0), 1.5)
    a = Atom("cancellative", Q12, Q12, NU0, g)
    cert = validate_atom(a, DyadicCovering(), NU0)
    assert cert.valid, cert.violations
    assert cert.integral_residual < 1e-15
    big = Atom("cancellative", Q12, Q12, NU0, g.scaled(2.0))
    cert = validate_atom(big, DyadicCovering(), NU0)
    assert not cert.valid and any(v.startswith("size") for v in cert.violations)


def test_validate_reports_support_and_host_violations():
    g = haar_step(0.0, (1.0, 3.0), 2.0)
    a = Atom("cancellative", Q12, Cuboid((1.0,), (3.0,)), NU0, g)
    cert = validate_atom(a, DyadicCovering(), NU0)
    assert not cert.support_in_star
    off = Atom.local(Cuboid((1.0,), (3.0,)), NU0)
    assert not validate_atom(off, DyadicCovering(), NU0).host_in_covering


def test_mean_split_examples():
    muQ = measure_cuboid(NU0, Q12)
    lam, g = mean_split(GridFunction.indicator(Q12, NU0, 1 / muQ), Q12, NU0)
    assert lam == pytest.approx(1.0) and np.max(np.abs(g.values)) < 1e-15
    h = haar_step(0.0, (1.0, 2.0), 1.5)
    lam, g = mean_split(h, Q12, NU0)
    assert abs(lam) < 1e-15 and np.allclose(g.values, h.values)
    lam, g = mean_split(GridFunction.indicator(Cuboid((1.0,), (1.5,)), NU0), Q12, NU0)
    assert lam == pytest.approx(0.625, rel=1e-15)
    assert abs(g.integral()) < 1e-15
    with pytest.raises(DomainError):
        mean_split(GridFunction.indicator(Cuboid((1.0,), (3.0,)), NU0), Q12, NU0)


def test_haar_examples():
    zero = GridFunction.uniform(Q12, 2, NU0)
    dec = haar_decompose(zero, Q12, NU0)
    assert len(dec) == 0 and dec.total_l1 == 0
    g = haar_step(0.0, (1.0, 2.0), 1.5, scale=3.0)
    dec = haar_decompose(g, Q12, NU0)
    assert len(dec) == 1
    lam, _ = dec.terms[0]
    assert lam == pytest.approx(np.max(np.abs(g.values)) * 1.5, rel=1e-14)
    with pytest.raises(DomainError):
        haar_decompose(GridFunction.indicator(Q12, NU0), Q12, NU0)


def random_mean_zero(rng, nu, Q, depth):
    g = GridFunction.uniform(Q, depth, nu, rng.normal(size=(2 ** depth,) * Q.dim))
    mass = g.cell_measures()
    return g.with_values(g.values - np.sum(g.values * mass) / np.sum(mass))


@pytest.mark.parametrize("nu", [NU0, NuVector.classical(-0.5, 1.0), NuVector.classical(2.0)])
def test_haar_random_reconstruction(rng, nu):
    Q = Cuboid((1.0,) * nu.dim, (2.0,) * nu.dim)
    g = random_mean_zero(rng, nu, Q, 4 if nu.dim == 1 else 3)
    dec = haar_decompose(g, Q, nu)
    pts = g.cell_centers()
    err = np.max(np.abs(dec.evaluate(pts) - g.values.reshape(-1)))
    assert err <= 1e-12 * np.max(np.abs(g.values))
    cov = DyadicCovering() if nu.dim == 1 else dyadic_power(nu.dim)
    assert all(validate_atom(a, cov, nu).valid for _, a in dec.terms)


def test_localize_indicator_on_dyadic():
    f = GridFunction.indicator(Cuboid((1.0,), (4.0,)), NU0)
    loc = localize_and_decompose(f, DyadicCovering(), NU0)
    assert loc.reconstruction_error() <= 1e-12
    hosts = [tuple(h.lower) for h in loc.hosts]
    assert (1.0,) in hosts and (2.0,) in hosts
    assert math.fsum(loc.lambda0) == pytest.approx(7.5, rel=1e-14)
    lam = dict(zip(hosts, loc.lambda0))
    # away from the collars the masses are those of [1,2] and [2,4]
    assert lam[(1.0,)] == pytest.approx(1.5, rel=0.05)
    assert lam[(2.0,)] == pytest.approx(6.0, rel=0.05)
    for _, a in loc.decomposition.terms:
        assert validate_atom(a, DyadicCovering(), NU0).valid


def test_localize_interior_support_single_host():
    f = GridFunction.indicator(Cuboid((1.2,), (1.8,)), NU0)
    loc = localize_and_decompose(f, DyadicCovering(), NU0)
    assert [tuple(h.lower) for h in loc.hosts] == [(1.0,)]


def test_localize_single_local_atom():
    a = Atom.local(Q12, NU0).as_grid()
    loc = localize_and_decompose(a, DyadicCovering(), NU0)
    big = [lam for lam, at in loc.decomposition.terms if at.kind == "local" and at.host == Q12]
    assert big and big[0] == pytest.approx(1.0, rel=0.05)
    assert loc.reconstruction_error() <= 1e-12


def test_localize_rejects_origin_on_dyadic():
    f = GridFunction.indicator(Cuboid((0.0,), (1.0,)), NU0)
    with pytest.raises(DomainError):
        localize_and_decompose(f, DyadicCovering(), NU0)


def test_conjugation_factor_uniform_across_levels():
    nu = NuVector.mixed((0.5,), (1.0,))
    D = DyadicCovering()
    lo, hi = [], []
    for n in range(-4, 5):
        c = D.cell(n)
        a, b = conjugation_factor_range(Cuboid((0.0, c.lower[0]), (1.0, c.upper[0])), nu)
        lo.append(a)
        hi.append(b)
    # y^4 varies by exactly 2^4 across a dyadic interval
    assert max(hi) / min(lo) == pytest.approx(2 ** 4, rel=1e-12)
    assert max(lo) / min(lo) == pytest.approx(1.0, rel=1e-12)


def test_conjugate_atom_preserves_cancellation():
    nu = NuVector.mixed((0.5,), (1.0,))
    conj = nu.conjugate()
    Q = Cuboid((0.0, 1.0), (1.0, 2.0))
    rng = np.random.default_rng(8)
    g = random_mean_zero(rng, conj, Q, 2)
    g = g.scaled(1 / (g.sup_norm() * measure_cuboid(conj, Q)))
    at = Atom("cancellative", Q, Q, conj, g)
    assert validate_atom(at, qb_covering(1, 1), conj).valid
    ca = conjugate_atom(at, nu)
    assert abs(ca.integral) < 1e-12
    assert ca.size <= ca.factor_max * 1.0000001
    pts = np.array([[0.5, 1.5]])
    assert ca.evaluate(pts)[0] == pytest.approx(at.evaluate(pts)[0] * 1.5 ** 4)
    with pytest.raises(DomainError):
        conjugate_atom(Atom.local(Q, nu), nu)


@given(st.integers(0, 2 ** 31), st.sampled_from([0.0, -0.5, 1.5]), st.integers(1, 4))
def test_mean_split_contract(seed, nuv, depth):
    rng = np.random.default_rng(seed)
    nu = NuVector.classical(nuv)
    Q = Cuboid((2.0,), (4.0,))
    star = Q.star(1, 17 / 16)
    f = GridFunction.uniform(star, depth, nu, rng.normal(size=2 ** depth))
    lam, g = mean_split(f, Q, nu)
    assert abs(lam) <= f.l1_norm() * (1 + 1e-12)
    assert abs(g.integral()) <= 1e-12 * f.l1_norm()


@given(st.integers(0, 2 ** 31))
def test_decomposition_atoms_always_valid(seed):
    rng = np.random.default_rng(seed)
    nu = NuVector.classical(rng.choice([0.0, 0.5, -0.5]), 1.0)
    lo = np.exp(rng.uniform(-1, 1, 2))
    Q = Cuboid(tuple(lo), tuple(lo * np.exp(rng.uniform(0.2, 1.0, 2))))
    f = GridFunction.uniform(Q, 2, nu, rng.normal(size=(4, 4)))
    cov = dyadic_power(2)
    loc = localize_and_decompose(f, cov, nu)
    assert loc.reconstruction_error() <= 1e-12
    assert all(validate_atom(a, cov, nu).valid for _, a in loc.decomposition.terms)
