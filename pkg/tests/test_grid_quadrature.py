import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bessel_hardy.cuboid import Cuboid
from bessel_hardy.errors import ConfigError, DomainError
from bessel_hardy.grid import GridFunction
from bessel_hardy.measure import NuVector
from bessel_hardy.quadrature import QuadratureSpec, panel_nodes, singular_panel_nodes

NU = NuVector.classical(0.5, -0.5)


def test_indicator_integral_and_support():
    Q = Cuboid((1.0, 2.0), (2.0, 5.0))
    f = GridFunction.indicator(Q, NU, 2.0)
    # (int_1^2 y^2 dy) * (int_2^5 dy) * 2
    assert f.integral() == pytest.approx(7 / 3 * 3.0 * 2.0)
    assert f.support_box() == Q
    assert GridFunction.uniform(Q, 1, NU).support_box() is None


def test_validation():
    with pytest.raises(DomainError):
        GridFunction((np.array([1.0, 2.0]),), np.zeros(2), NuVector.classical(0.0))
    with pytest.raises(DomainError):
        GridFunction((np.array([1.0, 2.0]),), np.array([np.nan]), NuVector.classical(0.0))
    with pytest.raises(DomainError):
        GridFunction((np.array([1.0, 2.0]),), np.zeros(1), NU)


def test_refine_preserves_integral_and_values():
    rng = np.random.default_rng(0)
    f = GridFunction.uniform(Cuboid((1.0, 1.0), (3.0, 2.0)), 2, NU, rng.normal(size=(4, 4)))
    g = f.refine([[1.3, 2.71, 4.0], [1.05]])
    assert g.integral() == pytest.approx(f.integral(), rel=1e-13)
    pts = g.cell_centers()
    inside = np.all(pts <= np.array([3.0, 2.0]), axis=1)
    assert np.array_equal(g.evaluate(pts)[inside], f.evaluate(pts[inside]))
    assert np.all(g.evaluate(pts)[~inside] == 0)


def test_evaluate_outside_is_zero_and_density_powers():
    f = GridFunction.indicator(Cuboid((1.0,), (2.0,)), NuVector.classical(0.0))
    assert list(f.evaluate(np.array([[0.5], [1.5], [2.0], [2.5]]))) == [0.0, 1.0, 1.0, 0.0]
    h = f.with_density((2.0,))
    assert h.evaluate(np.array([[1.5]]))[0] == pytest.approx(2.25)
    # int_1^2 y^2 * y dy
    assert h.integral() == pytest.approx(15 / 4)
    assert h.sup_norm() == pytest.approx(4.0)


def test_sub_grid():
    f = GridFunction.uniform(Cuboid((0.0,), (4.0,)), 2, NuVector.classical(0.0), np.arange(4.0))
    s = f.sub_grid([1], [3])
    assert list(s.edges[0]) == [1.0, 2.0, 3.0] and list(s.values) == [1.0, 2.0]


@given(st.integers(0, 2 ** 31))
def test_l1_dominates_integral(seed):
    rng = np.random.default_rng(seed)
    f = GridFunction.uniform(Cuboid((0.5, 0.5), (2.0, 3.0)), 2, NU, rng.normal(size=(4, 4)))
    assert abs(f.integral()) <= f.l1_norm() * (1 + 1e-14)
    assert f.l1_norm() <= f.sup_norm() * f.cell_measures().sum() * (1 + 1e-14)


def test_panel_rules_exact_on_polynomials():
    x, wk, wg = panel_nodes(np.array([0.0, 1.0]), np.array([1.0, 3.0]))
    for k in range(13):
        exact = np.array([1.0, 3.0 ** (k + 1) - 1.0]) / (k + 1)
        assert np.allclose(np.sum(wk * x ** k, axis=1), exact, rtol=1e-13)
    assert np.allclose(np.sum(wg * x ** 5, axis=1), [1 / 6, (3 ** 6 - 1) / 6], rtol=1e-13)


def test_singular_panel_rule():
    # weights include y^alpha; integrate y^alpha * y^2 on [0, b]
    alpha = -0.6
    y, wk, wg = singular_panel_nodes(np.array([2.0]), alpha)
    exact = 2.0 ** (alpha + 3) / (alpha + 3)
    assert np.sum(wk * y ** 2) == pytest.approx(exact, rel=1e-10)


def test_quadrature_spec_validation_and_grid():
    q = QuadratureSpec()
    t = q.t_grid(2.0)
    assert t[0] == pytest.approx(4e-6) and t[-1] == pytest.approx(4e6)
    assert len(t) == 12 * 16 + 1
    local = q.t_grid(1.0, t_max=0.5)
    assert local[-1] == pytest.approx(0.5)
    r = q.refined()
    assert r.points_per_decade == 32 and r.panel == q.panel / 2
    for bad in ({"eps_tail": 0.1}, {"t_lo_factor": 0.0}, {"points_per_decade": 0}, {"window": 2.0}):
        with pytest.raises(ConfigError):
            QuadratureSpec(**bad)


def test_cuboid_geometry():
    Q = Cuboid((1.0, 2.0), (3.0, 6.0))
    assert Q.center == (2.0, 4.0) and Q.radii == (1.0, 2.0)
    assert Q.diameter == pytest.approx(math.sqrt(4 + 16))
    S = Q.star(1, 1.5)
    assert S.radii == (1.5, 3.0)
    assert Q.star(3, 1.5).contains_cuboid(S)
    assert Q.intersects(Cuboid((3.0, 6.0), (4.0, 7.0)))
    assert not Q.intersects(Cuboid((3.5, 6.0), (4.0, 7.0)))
