import numpy as np
import pytest
from hypothesis import given, strategies as st

from bessel_hardy.covering import (DEFAULT_KAPPA, DyadicCovering, PartitionOfUnity, bump, box_product,
                                   check_covering, cylinder_covering, dyadic_power, make_covering,
                                   qb_covering)
from bessel_hardy.cuboid import Cuboid
from bessel_hardy.errors import ConfigError


def box(c):
    return (tuple(map(float, c.lower)), tuple(map(float, c.upper)))


def test_dyadic_cells():
    D = DyadicCovering()
    assert box(D.cell(0)) == ((1.0,), (2.0,))
    assert box(D.cell(-2)) == ((0.25,), (0.5,))


def test_dyadic_locate_and_tie_break():
    D = DyadicCovering()
    assert box(D.locate(np.array([3.0]))) == ((2.0,), (4.0,))
    assert box(D.locate(np.array([2.0]))) == ((1.0,), (2.0,))


def test_dyadic_neighbors():
    D = DyadicCovering()
    nb = sorted(box(c) for c in D.neighbors(D.cell(0)))
    assert nb == [((0.5,), (1.0,)), ((1.0,), (2.0,)), ((2.0,), (4.0,))]


def test_box_product_split_examples():
    B = dyadic_power(2)
    cells = {box(c) for c in B.cells_in_box(np.array([4.0, 1.0]), np.array([8.0, 2.0])).cuboids()}
    for k in range(4, 8):
        assert ((float(k), 1.0), (k + 1.0, 2.0)) in cells
    strips = [c for c in B.cells_in_box(np.array([8.0, 1.0]), np.array([16.0, 2.0])).cuboids()
              if c.lower[1] == 1.0 and 8.0 <= c.lower[0] < 16.0]
    assert len(strips) == 8
    assert all(c.upper[0] - c.lower[0] == 1.0 for c in strips)
    assert box(B.locate(np.array([1.5, 1.5]))) == ((1.0, 1.0), (2.0, 2.0))
    assert box(B.locate(np.array([4.5, 1.5]))) == ((4.0, 1.0), (5.0, 2.0))


def test_box_product_constructor_matches_power():
    D = DyadicCovering()
    a = box_product(D, D)
    b = dyadic_power(2)
    x = np.array([[5.3, 0.7], [0.1, 9.0], [2.5, 2.5]])
    assert [box(c) for c in a.locate_many(x).cuboids()] == [box(c) for c in b.locate_many(x).cuboids()]


def test_cylinder_covering_strip():
    D = DyadicCovering()
    C = cylinder_covering(1, D)
    cells = C.cells_in_box(np.array([0.0, 1.0]), np.array([4.0, 2.0])).cuboids()
    strip = sorted(box(c) for c in cells if c.lower[1] == 1.0 and c.upper[0] <= 4.0)
    assert strip == [((float(k), 1.0), (k + 1.0, 2.0)) for k in range(4)]
    assert cylinder_covering(0, D) is D


def test_qb_diameter_follows_exotic_level():
    Q = qb_covering(1, 2)
    rng = np.random.default_rng(0)
    x = np.exp(rng.uniform(-3, 3, (300, 3)))
    cells = Q.locate_many(x)
    levels = np.floor(np.log2(x[:, 1:]))
    ratio = cells.diameter / 2.0 ** levels.min(axis=1)
    assert ratio.min() > 0.3 and ratio.max() < 4


def test_qb_needs_exotic_axis():
    with pytest.raises(ConfigError):
        qb_covering(1, 0)
    with pytest.raises(ConfigError):
        make_covering("dyadic", dim=2)
    with pytest.raises(ConfigError):
        make_covering("hexagonal")


@pytest.mark.parametrize("cov", [DyadicCovering(), dyadic_power(2), qb_covering(1, 1)],
                         ids=["D", "DxD", "QB11"])
def test_axioms(cov):
    rep = check_covering(cov, levels=(-2, 2), n_points=500)
    assert rep.passed, rep
    assert rep.uncovered_points == 0
    assert rep.volume_rel_error < 1e-12
    assert rep.eq23_mismatches == 0
    assert rep.max_interior_multiplicity == 1


def test_associativity_up_to_retiling():
    D = DyadicCovering()
    left = box_product(box_product(D, D), D)
    right = box_product(D, box_product(D, D))
    rng = np.random.default_rng(2)
    x = np.exp(rng.uniform(-3, 3, (400, 3)))
    r = left.locate_many(x).diameter / right.locate_many(x).diameter
    assert r.max() / r.min() < 4


def test_neighbor_count_bounded():
    B = dyadic_power(2)
    cells = B.window_cells((-2, 2))
    counts = [len(B.neighbors(cells.cuboid(i))) for i in range(0, len(cells), 7)]
    assert max(counts) <= 30
    Q = cells.cuboid(3)
    assert any(box(c) == box(Q) for c in B.neighbors(Q))


def test_partition_of_unity_sums_to_one():
    for cov in (DyadicCovering(), dyadic_power(2), qb_covering(1, 1)):
        pou = PartitionOfUnity(cov)
        rng = np.random.default_rng(4)
        for x in np.exp(rng.uniform(-4, 4, (300, cov.dim))):
            nb, w = pou.weights(x)
            assert abs(w.sum() - 1) <= 1e-12
            assert np.all(w >= 0) and np.all(w <= 1)


def test_partition_of_unity_interior_and_support():
    D = DyadicCovering()
    pou = PartitionOfUnity(D)
    Q = D.cell(0)
    assert pou.psi(Q, np.array([1.5])) == 1.0
    assert pou.psi(Q, np.array([3.0])) == 0.0
    star = Q.star(1, DEFAULT_KAPPA)
    assert pou.psi(Q, np.array([star.upper[0] + 1e-9])) == 0.0


def test_bump_gradient_scale():
    D = DyadicCovering()
    for n in (-3, 0, 3):
        Q = D.cell(n)
        block = D.cells_in_box(np.array([Q.lower[0]]), np.array([Q.upper[0]]))
        block = block.take([i for i in range(len(block)) if block.lower[i, 0] == Q.lower[0]])
        xs = np.linspace(Q.lower[0] * 0.9, Q.upper[0] * 1.1, 4001)[:, None]
        phi = bump(block, xs, DEFAULT_KAPPA)[0]
        grad = np.max(np.abs(np.diff(phi) / np.diff(xs[:, 0])))
        # smoothstep slope 3/2 over a collar of width (kappa - 1) d / 2
        assert grad * Q.diameter <= 1.5 * 2 / (DEFAULT_KAPPA - 1) * 1.01


@given(st.floats(-6, 6))
def test_dyadic_locate_contains(e):
    x = 2.0 ** e
    c = DyadicCovering().locate(np.array([x]))
    assert c.lower[0] <= x <= c.upper[0]
    assert c.upper[0] == 2 * c.lower[0]


@given(st.floats(-4, 4), st.floats(-4, 4))
def test_qb_locate_contains(a, b):
    x = np.array([2.0 ** a, 2.0 ** b])
    c = qb_covering(1, 1).locate(x)
    assert np.all(np.array(c.lower) <= x) and np.all(x <= np.array(c.upper))
