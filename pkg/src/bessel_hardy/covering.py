"""Admissible coverings of the positive orthant by cuboids.

Coverings are countably infinite, so every enumeration is relative to a box
(``cells_in_box``) or to a dyadic level window ``(lo, hi)``.  Cells are handled
in vectorised :class:`CellBlock` form and materialised as :class:`Cuboid`
only at the API boundary.

Three constructions are provided:

* :class:`DyadicCovering` -- intervals ``[2^n, 2^(n+1)]``;
* :class:`BoxProduct` -- the product ``Q1 x Q2`` in which the factor with the
  larger diameter is cut into ``m`` equal pieces per axis, ``m`` the smallest
  integer making the pieces no wider (in diameter) than the other factor;
* :class:`CylinderCovering` -- cylinders ``R_+^d1 x Q2`` cut into cubes of side
  ``diam(Q2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cuboid import Cuboid
from .errors import ConfigError, DomainError

DEFAULT_KAPPA = 17 / 16


@dataclass(frozen=True)
class CellBlock:
    lower: np.ndarray  # (N, d)
    upper: np.ndarray  # (N, d)
    tags: np.ndarray   # (N, k) integer indices

    def __len__(self):
        return self.lower.shape[0]

    @property
    def dim(self):
        return self.lower.shape[1]

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def radii(self):
        return 0.5 * (self.upper - self.lower)

    @property
    def diameter(self):
        return np.sqrt(np.sum((self.upper - self.lower) ** 2, axis=1))

    def star(self, k, kappa):
        z, r = self.center, self.radii * kappa ** k
        return np.maximum(z - r, 0.0), z + r

    def cuboid(self, i) -> Cuboid:
        return Cuboid(tuple(self.lower[i]), tuple(self.upper[i]), tuple(int(v) for v in self.tags[i]))

    def cuboids(self):
        return [self.cuboid(i) for i in range(len(self))]

    def take(self, idx):
        return CellBlock(self.lower[idx], self.upper[idx], self.tags[idx])

    @staticmethod
    def empty(d, k):
        return CellBlock(np.zeros((0, d)), np.zeros((0, d)), np.zeros((0, k), dtype=np.int64))


def _ranges_product(starts, counts):
    """Enumerate per-row multi-indices ``starts[r] + j`` with ``0 <= j < counts[r]``.

    Returns ``(row, idx)`` with ``idx`` of shape ``(total, naxes)``.
    """
    n, naxes = counts.shape
    tot = np.prod(counts, axis=1)
    row = np.repeat(np.arange(n), tot)
    if row.size == 0:
        return row, np.zeros((0, naxes), dtype=np.int64)
    offs = np.concatenate([[0], np.cumsum(tot)[:-1]])
    local = np.arange(row.size) - offs[row]
    idx = np.empty((row.size, naxes), dtype=np.int64)
    for a in range(naxes - 1, -1, -1):
        c = counts[row, a]
        idx[:, a] = starts[row, a] + local % c
        local //= c
    return row, idx


class Covering:
    """Common interface; subclasses provide the generators."""

    dim: int
    tag_len: int
    kappa: float
    name: str

    # -- generators -------------------------------------------------------
    def cells_in_box(self, lo, hi) -> CellBlock:
        """All cells whose closure meets the closed box ``[lo, hi]``."""
        raise NotImplementedError

    def window_cells(self, levels) -> CellBlock:
        raise NotImplementedError

    def window_box(self, levels):
        raise NotImplementedError

    def locate_many(self, x) -> CellBlock:
        raise NotImplementedError

    # -- queries ----------------------------------------------------------
    def locate(self, x) -> Cuboid:
        x = np.asarray(x, dtype=float).reshape(1, self.dim)
        if np.any(~(x > 0)):
            raise DomainError("locate needs a point of the open positive orthant")
        return self.locate_many(x).cuboid(0)

    def contains_cell(self, Q: Cuboid, rel_tol=1e-12) -> bool:
        c = self.locate(Q.center)
        tol = rel_tol * max(Q.upper)
        return all(abs(a - b) <= tol for a, b in zip(c.lower + c.upper, Q.lower + Q.upper))

    def neighbor_block(self, Q: Cuboid) -> CellBlock:
        """Cells ``R`` with ``R*** cap Q*** != empty`` (closed intersection)."""
        s3 = Q.star(3, self.kappa)
        lo, hi = np.array(s3.lower), np.array(s3.upper)
        margin = 2.0 * Q.diameter * (self.kappa ** 3 - 1.0) * 4.0
        box_lo = np.where(lo > 0, np.maximum(lo - margin, 0.5 * lo), 0.0)
        cand = self.cells_in_box(box_lo, hi + margin)
        clo, chi = cand.star(3, self.kappa)
        keep = np.all((np.maximum(clo, lo) <= np.minimum(chi, hi)), axis=1)
        return cand.take(np.nonzero(keep)[0])

    def neighbors(self, Q: Cuboid) -> list:
        return self.neighbor_block(Q).cuboids()

    def describe(self) -> dict:
        return {"type": self.name, "dim": self.dim, "kappa": self.kappa}


class DyadicCovering(Covering):
    """``{[2^n, 2^(n+1)] : n in Z}`` on ``R_+``."""

    def __init__(self, kappa: float = DEFAULT_KAPPA):
        _check_kappa(kappa)
        self.dim, self.tag_len, self.kappa, self.name = 1, 1, float(kappa), "dyadic"

    @staticmethod
    def _block(levels):
        n = np.asarray(levels, dtype=np.int64)
        lo = np.ldexp(1.0, n)
        return CellBlock(lo[:, None], 2.0 * lo[:, None], n[:, None])

    def cell(self, n: int) -> Cuboid:
        return self._block([n]).cuboid(0)

    @staticmethod
    def level_of(x):
        """Index ``n`` with ``x in [2^n, 2^(n+1)]``, the smaller one on ties."""
        m, e = np.frexp(np.asarray(x, dtype=float))
        return np.where(m == 0.5, e - 2, e - 1).astype(np.int64)

    def cells_in_box(self, lo, hi):
        a, b = float(np.ravel(lo)[0]), float(np.ravel(hi)[0])
        if not a > 0:
            raise DomainError("dyadic enumeration needs a box away from 0")
        n0 = int(np.ceil(np.log2(a))) - 1
        if 2.0 ** (n0 + 1) < a:
            n0 += 1
        n1 = int(np.floor(np.log2(b)))
        if 2.0 ** n1 > b:
            n1 -= 1
        return self._block(np.arange(n0, n1 + 1))

    def window_cells(self, levels):
        return self._block(np.arange(levels[0], levels[1] + 1))

    def window_box(self, levels):
        return np.array([2.0 ** levels[0]]), np.array([2.0 ** (levels[1] + 1)])

    def locate_many(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, 1)
        return self._block(self.level_of(x[:, 0]))


SPLIT_RULES = ("dyadic", "minimal")


def _split_count(d_big, d_small, rule="dyadic"):
    """Pieces per axis so that the coarse factor's pieces have diameter <= d_small.

    ``minimal`` takes the smallest such integer; ``dyadic`` rounds it up to a
    power of two, which keeps all edges of nested products on a common dyadic
    grid.
    """
    ratio = d_big / d_small * (1 - 1e-12)
    if rule == "minimal":
        m = np.ceil(ratio)
    else:
        m = np.exp2(np.ceil(np.log2(np.maximum(ratio, 1.0))))
    return np.maximum(m, 1).astype(np.int64)


class BoxProduct(Covering):
    """Product covering ``q1 [x] q2`` with re-tiling of the coarser factor."""

    def __init__(self, q1: Covering, q2: Covering, kappa: float | None = None,
                 split: str = "dyadic"):
        kappa = q1.kappa if kappa is None else kappa
        _check_kappa(kappa)
        if split not in SPLIT_RULES:
            raise ConfigError(f"split rule must be one of {SPLIT_RULES}")
        self.split = split
        self.q1, self.q2 = q1, q2
        self.d1, self.d2 = q1.dim, q2.dim
        self.dim = self.d1 + self.d2
        self.tag_len = q1.tag_len + q2.tag_len + self.dim
        self.kappa = float(kappa)
        self.name = f"({q1.name})x({q2.name})"

    def _combine(self, b1: CellBlock, b2: CellBlock, i1, i2, lo=None, hi=None):
        """Pieces of ``b1[i1] x b2[i2]`` meeting ``[lo, hi]`` (all pieces if None)."""
        lo1, up1, lo2, up2 = b1.lower[i1], b1.upper[i1], b2.lower[i2], b2.upper[i2]
        lower = np.concatenate([lo1, lo2], axis=1)
        upper = np.concatenate([up1, up2], axis=1)
        d1 = b1.diameter[i1]
        d2 = b2.diameter[i2]
        m = np.ones((len(i1), self.dim), dtype=np.int64)
        big1 = d1 > d2
        big2 = d2 > d1
        m[big1, : self.d1] = _split_count(d1[big1], d2[big1], self.split)[:, None]
        m[big2, self.d1:] = _split_count(d2[big2], d1[big2], self.split)[:, None]
        width = (upper - lower) / m
        if lo is None:
            starts = np.zeros_like(m)
            counts = m
        else:
            with np.errstate(invalid="ignore"):
                j0 = np.floor((lo - lower) / width).astype(np.int64)
                j1 = np.ceil((hi - lower) / width).astype(np.int64) - 1
            # closed boxes: include pieces that merely touch the query box
            j0 = np.clip(j0 - 1, 0, m - 1)
            j1 = np.clip(j1 + 1, 0, m - 1)
            starts, counts = j0, j1 - j0 + 1
        row, idx = _ranges_product(starts, counts)
        plo = lower[row] + idx * width[row]
        pup = np.where(idx + 1 == m[row], upper[row], lower[row] + (idx + 1) * width[row])
        tags = np.concatenate([b1.tags[i1][row], b2.tags[i2][row], idx], axis=1)
        block = CellBlock(plo, pup, tags)
        if lo is not None:
            keep = np.all((np.maximum(plo, lo) <= np.minimum(pup, hi)), axis=1)
            block = block.take(np.nonzero(keep)[0])
        return block

    def _pairs(self, b1, b2, lo=None, hi=None):
        i1 = np.repeat(np.arange(len(b1)), len(b2))
        i2 = np.tile(np.arange(len(b2)), len(b1))
        return self._combine(b1, b2, i1, i2, lo, hi)

    def cells_in_box(self, lo, hi):
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        b1 = self.q1.cells_in_box(lo[: self.d1], hi[: self.d1])
        b2 = self.q2.cells_in_box(lo[self.d1:], hi[self.d1:])
        return self._pairs(b1, b2, lo, hi)

    def window_cells(self, levels):
        return self._pairs(self.q1.window_cells(levels), self.q2.window_cells(levels))

    def window_box(self, levels):
        a1, b1 = self.q1.window_box(levels)
        a2, b2 = self.q2.window_box(levels)
        return np.concatenate([a1, a2]), np.concatenate([b1, b2])

    def locate_many(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        b1 = self.q1.locate_many(x[:, : self.d1])
        b2 = self.q2.locate_many(x[:, self.d1:])
        n = x.shape[0]
        lower = np.concatenate([b1.lower, b2.lower], axis=1)
        upper = np.concatenate([b1.upper, b2.upper], axis=1)
        d1, d2 = b1.diameter, b2.diameter
        m = np.ones((n, self.dim), dtype=np.int64)
        big1, big2 = d1 > d2, d2 > d1
        m[big1, : self.d1] = _split_count(d1[big1], d2[big1], self.split)[:, None]
        m[big2, self.d1:] = _split_count(d2[big2], d1[big2], self.split)[:, None]
        width = (upper - lower) / m
        # the piece containing x, smaller index on shared faces
        j = np.clip(np.ceil((x - lower) / width).astype(np.int64) - 1, 0, m - 1)
        plo = lower + j * width
        pup = np.where(j + 1 == m, upper, lower + (j + 1) * width)
        return CellBlock(plo, pup, np.concatenate([b1.tags, b2.tags, j], axis=1))


class CylinderCovering(Covering):
    """Cylinders ``R_+^d1 x Q2`` cut into cubes of side ``diam(Q2)``."""

    def __init__(self, d1: int, q2: Covering, kappa: float | None = None):
        if d1 < 0:
            raise ConfigError("d1 must be nonnegative")
        kappa = q2.kappa if kappa is None else kappa
        _check_kappa(kappa)
        self.d1, self.q2 = int(d1), q2
        self.dim = self.d1 + q2.dim
        self.tag_len = self.d1 + q2.tag_len
        self.kappa = float(kappa)
        self.name = f"cylinder({d1},{q2.name})"

    def _expand(self, b2, starts, counts):
        row, idx = _ranges_product(starts, counts)
        s = b2.diameter[row][:, None]
        lower = np.concatenate([idx * s, b2.lower[row]], axis=1)
        upper = np.concatenate([(idx + 1) * s, b2.upper[row]], axis=1)
        tags = np.concatenate([idx, b2.tags[row]], axis=1)
        return CellBlock(lower, upper, tags)

    def cells_in_box(self, lo, hi):
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        b2 = self.q2.cells_in_box(lo[self.d1:], hi[self.d1:])
        s = b2.diameter[:, None]
        k0 = np.maximum(np.ceil(lo[: self.d1] / s).astype(np.int64) - 1, 0)
        k1 = np.floor(hi[: self.d1] / s).astype(np.int64)
        return self._expand(b2, k0, np.maximum(k1 - k0 + 1, 0))

    def window_box(self, levels):
        a2, b2 = self.q2.window_box(levels)
        top = 2.0 ** (levels[1] + 1)
        return (np.concatenate([np.zeros(self.d1), a2]),
                np.concatenate([np.full(self.d1, top), b2]))

    def window_cells(self, levels):
        b2 = self.q2.window_cells(levels)
        top = 2.0 ** (levels[1] + 1)
        s = b2.diameter[:, None]
        k1 = np.ceil(top / s * (1 - 1e-12)).astype(np.int64) * np.ones((1, self.d1), dtype=np.int64)
        return self._expand(b2, np.zeros_like(k1), k1)

    def locate_many(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        b2 = self.q2.locate_many(x[:, self.d1:])
        s = b2.diameter[:, None]
        k = np.maximum(np.ceil(x[:, : self.d1] / s).astype(np.int64) - 1, 0)
        return self._expand(b2, k, np.ones_like(k))


def _check_kappa(kappa):
    if not 1.0 < kappa < 2.0:
        raise ConfigError(f"kappa must lie in (1, 2), got {kappa}")


def dyadic_covering_1d(kappa: float = DEFAULT_KAPPA) -> DyadicCovering:
    return DyadicCovering(kappa)


def box_product(q1: Covering, q2: Covering, kappa: float | None = None,
                split: str = "dyadic") -> BoxProduct:
    return BoxProduct(q1, q2, kappa, split)


def cylinder_covering(d1: int, q2: Covering, kappa: float | None = None) -> Covering:
    """``R_+^d1 [x] q2``; ``d1 = 0`` returns ``q2`` unchanged."""
    if d1 == 0:
        return q2
    return CylinderCovering(d1, q2, kappa)


def dyadic_power(d: int, kappa: float = DEFAULT_KAPPA, split: str = "dyadic") -> Covering:
    """Left-nested box product of ``d`` dyadic factors."""
    cov = DyadicCovering(kappa)
    for _ in range(d - 1):
        cov = BoxProduct(cov, DyadicCovering(kappa), kappa, split)
    return cov


def qb_covering(d1: int, d2: int, kappa: float = DEFAULT_KAPPA) -> Covering:
    """Covering for the mixed classical/exotic setting: cylinders over dyadic products."""
    if d2 < 1:
        raise ConfigError("the exotic part needs d2 >= 1")
    return cylinder_covering(d1, dyadic_power(d2, kappa), kappa)


def make_covering(kind: str, dim: int = 1, d1: int = 1, d2: int = 1,
                  kappa: float = DEFAULT_KAPPA) -> Covering:
    """Build a covering by name: ``dyadic``, ``box`` (d-fold), ``cylinder`` or ``QB``."""
    if kind == "dyadic":
        if dim != 1:
            raise ConfigError("the dyadic covering is one-dimensional; use 'box'")
        return DyadicCovering(kappa)
    if kind == "box":
        return dyadic_power(dim, kappa)
    if kind in ("cylinder", "QB"):
        return qb_covering(d1, d2, kappa)
    raise ConfigError(f"unknown covering type {kind!r}")


# ---------------------------------------------------------------------------
# partition of unity

def _ramp(s, kappa):
    """1 on ``[0, 1]``, C^1 cubic descent to 0 on ``[1, kappa]``."""
    u = np.clip((s - 1.0) / (kappa - 1.0), 0.0, 1.0)
    return 1.0 - u * u * (3.0 - 2.0 * u)


def bump(block: CellBlock, x, kappa):
    """Unnormalised profiles ``phi_Q(x)`` for each cell (rows) and point (cols)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    z, r = block.center, block.radii
    out = np.ones((len(block), x.shape[0]))
    for i in range(block.dim):
        s = np.abs(x[None, :, i] - z[:, i, None]) / r[:, i, None]
        out *= _ramp(s, kappa)
    return out


class PartitionOfUnity:
    """``psi_Q = phi_Q / sum_R phi_R`` with ``phi_Q`` a product of C^1 ramps.

    ``phi_Q = 1`` on ``Q`` and vanishes outside ``Q*``; the normaliser only
    involves neighbours of the cell containing the point.
    """

    def __init__(self, cov: Covering):
        self.cov = cov

    def weights(self, x):
        """Return ``(cells, psi)`` for a single point: supporting cells and values."""
        x = np.asarray(x, dtype=float).reshape(1, self.cov.dim)
        home = self.cov.locate_many(x).cuboid(0)
        nb = self.cov.neighbor_block(home)
        phi = bump(nb, x, self.cov.kappa)[:, 0]
        keep = np.nonzero(phi > 0)[0]
        nb = nb.take(keep)
        phi = phi[keep]
        return nb, phi / np.sum(phi)

    def psi(self, Q: Cuboid, x) -> float:
        nb, w = self.weights(x)
        for i in range(len(nb)):
            if np.array_equal(nb.lower[i], Q.lower) and np.array_equal(nb.upper[i], Q.upper):
                return float(w[i])
        return 0.0


# ---------------------------------------------------------------------------
# axiom checks

@dataclass
class CoveringReport:
    name: str
    levels: tuple
    n_cells: int
    kappa: float
    volume_rel_error: float
    uncovered_points: int
    max_interior_multiplicity: int
    C1: float
    C2: float
    eq23_mismatches: int
    eq23_pairs: int
    overlap_constant: int
    max_neighbors: int
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def check_covering(cov: Covering, levels=(-4, 4), n_points: int = 2000,
                   n_cells: int = 300, seed: int = 0) -> CoveringReport:
    """Check the four axioms, the star-3 equivalence and bounded overlap.

    Cells come from the level window; random points are drawn log-uniformly
    (uniformly on axes whose window starts at 0) inside the window box.
    """
    rng = np.random.default_rng(seed)
    cells = cov.window_cells(levels)
    wlo, whi = cov.window_box(levels)
    # volume identity: clipped cell volumes tile the window box
    clo = np.maximum(cells.lower, wlo)
    chi = np.minimum(cells.upper, whi)
    vol = np.prod(np.clip(chi - clo, 0, None), axis=1)
    box_vol = float(np.prod(whi - wlo))
    vol_err = abs(math.fsum(vol) - box_vol) / box_vol

    pts = _sample_points(rng, wlo, whi, n_points)
    home = cov.locate_many(pts)
    inside = np.all((home.lower <= pts) & (pts <= home.upper), axis=1)
    uncovered = int(np.sum(~inside))

    radii = cells.radii
    C1 = float(np.max(np.max(radii, axis=1) / np.min(radii, axis=1)))

    idx = rng.choice(len(cells), size=min(n_cells, len(cells)), replace=False)
    C2 = 1.0
    mism = pairs = 0
    max_nb = 0
    for i in np.sort(idx):
        Q = cells.cuboid(i)
        s3 = Q.star(3, cov.kappa)
        margin = 4.0 * Q.diameter
        lo = np.array(s3.lower)
        box_lo = np.where(lo > 0, np.maximum(lo - margin, 0.5 * lo), 0.0)
        cand = cov.cells_in_box(box_lo, np.array(s3.upper) + margin)
        tlo, thi = cand.star(3, cov.kappa)
        star_meet = np.all(np.maximum(tlo, s3.lower) <= np.minimum(thi, s3.upper), axis=1)
        meet = np.all(np.maximum(cand.lower, Q.lower) <= np.minimum(cand.upper, Q.upper), axis=1)
        mism += int(np.sum(star_meet != meet))
        pairs += len(cand)
        if meet.any():
            dq = cand.diameter[meet]
            C2 = max(C2, float(np.max(np.maximum(dq / Q.diameter, Q.diameter / dq))))
        max_nb = max(max_nb, int(np.sum(star_meet)))

    # interior multiplicity (measure-zero overlaps) and bounded overlap of Q***
    multi = 0
    overlap = 0
    for p in pts[: min(len(pts), 1000)]:
        Q = cov.locate_many(p[None]).cuboid(0)
        nb = cov.neighbor_block(Q)
        interior = np.all((nb.lower < p) & (p < nb.upper), axis=1)
        multi = max(multi, int(np.sum(interior)))
        slo, shi = nb.star(3, cov.kappa)
        overlap = max(overlap, int(np.sum(np.all((slo <= p) & (p <= shi), axis=1))))

    passed = (vol_err < 1e-12 and uncovered == 0 and multi <= 1 and mism == 0
              and math.isfinite(C1) and math.isfinite(C2))
    return CoveringReport(cov.name, tuple(levels), len(cells), cov.kappa, vol_err, uncovered,
                          multi, C1, C2, mism, pairs, overlap, max_nb, passed)


def _sample_points(rng, lo, hi, n):
    d = len(lo)
    pts = np.empty((n, d))
    for i in range(d):
        if lo[i] > 0:
            pts[:, i] = np.exp(rng.uniform(np.log(lo[i]), np.log(hi[i]), n))
        else:
            pts[:, i] = rng.uniform(0, hi[i], n)
    pts = np.clip(pts, np.maximum(lo, 1e-300), hi)
    return pts
