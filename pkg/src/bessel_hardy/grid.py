"""Piecewise-constant functions on rectilinear grids in the positive orthant.

A cell's value may carry an extra per-axis power ``prod y_i^q_i``; this is how
the conjugated route represents ``y^-4nu_e f`` without resampling.  All
integrals against ``mu_nu`` are exact (antiderivatives per cell).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cuboid import Cuboid
from .errors import DomainError
from .measure import NuVector, measure_intervals


def _as_edges(e):
    e = np.asarray(e, dtype=float)
    if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0) or e[0] < 0:
        raise DomainError("grid edges must be increasing, nonnegative, with >= 2 entries")
    return e


@dataclass(frozen=True)
class GridFunction:
    edges: tuple
    values: np.ndarray
    nu: NuVector
    density_powers: tuple = field(default=None)

    def __post_init__(self):
        edges = tuple(_as_edges(e) for e in self.edges)
        vals = np.asarray(self.values, dtype=float)
        shape = tuple(len(e) - 1 for e in edges)
        if vals.shape != shape:
            raise DomainError(f"values shape {vals.shape} does not match grid {shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid values must be finite")
        if self.nu.dim != len(edges):
            raise DomainError("nu dimension does not match grid")
        q = self.density_powers
        q = (0.0,) * len(edges) if q is None else tuple(float(v) for v in q)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "density_powers", q)

    # -- constructors -----------------------------------------------------
    @classmethod
    def uniform(cls, domain: Cuboid, depth: int, nu: NuVector, values=None):
        """``2^depth`` equal cells per axis on ``domain``."""
        n = 2 ** int(depth)
        edges = tuple(np.linspace(a, b, n + 1) for a, b in zip(domain.lower, domain.upper))
        if values is None:
            values = np.zeros((n,) * domain.dim)
        return cls(edges, values, nu)

    @classmethod
    def sample(cls, edges, func, nu: NuVector):
        """Cell values from ``func`` evaluated at cell centres (shape ``(N, d)``)."""
        edges = tuple(_as_edges(e) for e in edges)
        mids = [0.5 * (e[1:] + e[:-1]) for e in edges]
        mesh = np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1)
        vals = np.asarray(func(mesh.reshape(-1, len(edges))), dtype=float)
        return cls(edges, vals.reshape(mesh.shape[:-1]), nu)

    @classmethod
    def indicator(cls, Q: Cuboid, nu: NuVector, value: float = 1.0):
        edges = tuple(np.array([a, b]) for a, b in zip(Q.lower, Q.upper))
        return cls(edges, np.full((1,) * Q.dim, float(value)), nu)

    # -- geometry ---------------------------------------------------------
    @property
    def dim(self):
        return len(self.edges)

    @property
    def shape(self):
        return self.values.shape

    @property
    def domain(self) -> Cuboid:
        return Cuboid(tuple(e[0] for e in self.edges), tuple(e[-1] for e in self.edges))

    def support_box(self):
        """Bounding box of the nonzero cells, or ``None`` if the function vanishes."""
        nz = np.nonzero(self.values)
        if nz[0].size == 0:
            return None
        lo = tuple(e[idx.min()] for e, idx in zip(self.edges, nz))
        hi = tuple(e[idx.max() + 1] for e, idx in zip(self.edges, nz))
        return Cuboid(lo, hi)

    def axis_measures(self):
        """Per-axis cell integrals of ``y^q dmu``; products give cell masses."""
        out = []
        for e, v, q in zip(self.edges, self.nu.effective, self.density_powers):
            out.append(measure_intervals(v + 0.5 * q, e[:-1], e[1:]))
        return out

    def cell_measures(self):
        m = self.axis_measures()
        out = m[0]
        for mi in m[1:]:
            out = np.multiply.outer(out, mi)
        return out

    def plain_cell_measures(self):
        """Cell ``mu_nu`` masses ignoring density powers."""
        out = None
        for e, v in zip(self.edges, self.nu.effective):
            mi = measure_intervals(v, e[:-1], e[1:])
            out = mi if out is None else np.multiply.outer(out, mi)
        return out

    # -- functionals ------------------------------------------------------
    def integral(self) -> float:
        nz = self.values != 0
        return math.fsum((self.values[nz] * self.cell_measures()[nz]).ravel())

    def l1_norm(self) -> float:
        nz = self.values != 0
        return math.fsum((np.abs(self.values[nz]) * self.cell_measures()[nz]).ravel())

    def sup_norm(self) -> float:
        """``max |f|``; with density powers the sup of the power over each cell is used."""
        if not any(self.density_powers):
            return float(np.max(np.abs(self.values))) if self.values.size else 0.0
        fac = None
        for e, q in zip(self.edges, self.density_powers):
            with np.errstate(divide="ignore"):
                f = np.maximum(e[:-1] ** q, e[1:] ** q)
            fac = f if fac is None else np.multiply.outer(fac, f)
        return float(np.max(np.abs(self.values) * fac))

    # -- transforms -------------------------------------------------------
    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.edges, values, self.nu, self.density_powers)

    def scaled(self, alpha: float) -> "GridFunction":
        return self.with_values(alpha * self.values)

    def with_density(self, powers, nu: NuVector | None = None) -> "GridFunction":
        return GridFunction(self.edges, self.values, self.nu if nu is None else nu, tuple(powers))

    def refine(self, new_edges) -> "GridFunction":
        """Common refinement with ``new_edges``; the domain grows to cover them.

        Cells outside the original domain get value 0.
        """
        edges = []
        for e, extra in zip(self.edges, new_edges):
            edges.append(np.unique(np.concatenate([e, np.asarray(extra, dtype=float)])))
        mids = [0.5 * (e[1:] + e[:-1]) for e in edges]
        idx = []
        inside = None
        for m, e in zip(mids, self.edges):
            j = np.searchsorted(e, m, side="right") - 1
            ok = (j >= 0) & (j < len(e) - 1)
            idx.append(np.clip(j, 0, len(e) - 2))
            inside = ok if inside is None else np.logical_and.outer(inside, ok)
        vals = self.values[np.ix_(*idx)] * inside
        return GridFunction(tuple(edges), vals, self.nu, self.density_powers)

    def sub_grid(self, lo_idx, hi_idx) -> "GridFunction":
        """Cells ``lo_idx[i] <= j < hi_idx[i]`` along each axis."""
        sl = tuple(slice(a, b) for a, b in zip(lo_idx, hi_idx))
        edges = tuple(e[a: b + 1] for e, a, b in zip(self.edges, lo_idx, hi_idx))
        return GridFunction(edges, self.values[sl], self.nu, self.density_powers)

    def evaluate(self, points):
        """Point values; 0 outside the domain.  On shared faces the upper cell wins."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        idx = []
        inside = np.ones(p.shape[0], dtype=bool)
        for i, e in enumerate(self.edges):
            j = np.searchsorted(e, p[:, i], side="right") - 1
            j = np.where(p[:, i] == e[-1], len(e) - 2, j)
            inside &= (j >= 0) & (j < len(e) - 1)
            idx.append(np.clip(j, 0, len(e) - 2))
        out = self.values[tuple(idx)] * inside
        for i, q in enumerate(self.density_powers):
            if q:
                out = out * np.where(inside, p[:, i], 1.0) ** q
        return out

    def cell_centers(self):
        mids = [0.5 * (e[1:] + e[:-1]) for e in self.edges]
        return np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1).reshape(-1, self.dim)
