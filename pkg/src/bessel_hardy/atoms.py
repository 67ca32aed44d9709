"""Atoms, their validation, and a constructive atomic decomposition.

The decomposition of a piecewise-constant ``f`` follows three steps:

1. localise with the partition of unity, ``f = sum_Q psi_Q f`` (``psi_Q`` is
   sampled at cell centres of a grid that contains every edge of ``Q`` and
   ``Q*``, so the sampled family still sums to one cell by cell);
2. split off the mean, ``psi_Q f = lambda_0 mu(Q)^-1 1_Q + g`` with ``g`` of
   integral zero;
3. expand ``g`` in mu-weighted Haar differences over a bisection tree of its
   cells.  Each tree node yields one cancellative atom supported on the node's
   box.

The Haar step is a constructive replacement for a non-constructive
decomposition theorem; it reconstructs ``f`` exactly at grid resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .covering import Covering, bump
from .cuboid import Cuboid
from .errors import DomainError
from .grid import GridFunction
from .measure import NuVector, measure_cuboid, measure_intervals

SIZE_TOL = 1e-12
CANCEL_TOL = 1e-10


@dataclass(frozen=True)
class Atom:
    """``kind`` is ``"local"`` (``mu(Q)^-1 1_Q``) or ``"cancellative"``."""

    kind: str
    host: Cuboid
    support: Cuboid
    nu: NuVector
    values: GridFunction | None = None

    @classmethod
    def local(cls, Q: Cuboid, nu: NuVector) -> "Atom":
        return cls("local", Q, Q, nu, None)

    def as_grid(self) -> GridFunction:
        if self.values is not None:
            return self.values
        return GridFunction.indicator(self.support, self.nu, 1.0 / measure_cuboid(self.nu, self.support))

    def evaluate(self, points):
        return self.as_grid().evaluate(points)

    def integral(self) -> float:
        return self.as_grid().integral()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "host": [list(self.host.lower), list(self.host.upper)],
                "support": [list(self.support.lower), list(self.support.upper)]}


@dataclass
class AtomCertificate:
    valid: bool
    violations: list
    support: Cuboid
    size: float               # sup|a| * mu(K)
    integral_residual: float  # |int a dmu| (cancellative atoms)
    host_in_covering: bool
    support_in_star: bool

    def to_dict(self):
        return {"valid": self.valid, "violations": list(self.violations),
                "support": [list(self.support.lower), list(self.support.upper)],
                "size": self.size, "integral_residual": self.integral_residual,
                "host_in_covering": self.host_in_covering,
                "support_in_star": self.support_in_star}


def validate_atom(a: Atom, cov: Covering | None, nu: NuVector) -> AtomCertificate:
    """Check the atom conditions; violations are collected, never raised."""
    violations = []
    host_ok = True
    if cov is not None:
        try:
            host_ok = cov.contains_cell(a.host)
        except DomainError:
            host_ok = False
        if not host_ok:
            violations.append("host: cuboid is not an element of the covering")
    kappa = cov.kappa if cov is not None else 17 / 16
    star_ok = a.host.star(1, kappa).contains_cuboid(a.support)
    if not star_ok:
        violations.append("support: K is not contained in Q*")
    muK = measure_cuboid(nu, a.support)
    if a.kind == "local":
        if a.support != a.host:
            violations.append("local: support must equal the host cuboid")
        size = 1.0 if a.values is None else a.values.sup_norm() * muK
        residual = 0.0
    elif a.kind == "cancellative":
        g = a.values
        box = g.support_box()
        if box is not None and not a.support.contains_cuboid(box):
            violations.append("support: values extend outside K")
        size = g.sup_norm() * muK
        residual = abs(g.integral())
        if residual > CANCEL_TOL:
            violations.append(f"cancellation: |int a dmu| = {residual:.3e}")
    else:
        violations.append(f"kind: unknown atom kind {a.kind!r}")
        size, residual = math.nan, math.nan
    if not size <= 1.0 + SIZE_TOL:
        violations.append(f"size: sup|a| * mu(K) = {size:.6g} > 1")
    return AtomCertificate(not violations, violations, a.support, float(size), float(residual),
                           host_ok, star_ok)


@dataclass
class AtomicDecomposition:
    terms: list = field(default_factory=list)   # (lambda, Atom)

    @property
    def total_l1(self) -> float:
        return math.fsum(abs(lam) for lam, _ in self.terms)

    def __len__(self):
        return len(self.terms)

    def extend(self, other: "AtomicDecomposition"):
        self.terms.extend(other.terms)

    def evaluate(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(p.shape[0])
        for lam, a in self.terms:
            lo, hi = np.array(a.support.lower), np.array(a.support.upper)
            sel = np.nonzero(np.all((p >= lo) & (p <= hi), axis=1))[0]
            if sel.size:
                out[sel] += lam * a.evaluate(p[sel])
        return out

    def counts(self) -> dict:
        kinds = [a.kind for _, a in self.terms]
        return {"local": kinds.count("local"), "cancellative": kinds.count("cancellative")}

    def to_dict(self) -> dict:
        return {"total_l1": self.total_l1, "n_terms": len(self.terms), **self.counts(),
                "terms": [{"lambda": lam, **a.to_dict()} for lam, a in self.terms]}


# ---------------------------------------------------------------------------
# mean split and Haar expansion

def mean_split(f: GridFunction, Q: Cuboid, nu: NuVector, kappa: float = 17 / 16):
    """``f = lambda_0 mu(Q)^-1 1_Q + g`` with ``lambda_0 = int f dmu``.

    Returns ``(lambda_0, g)``; ``g`` lives on ``f``'s grid refined by the faces of
    ``Q`` and has zero integral.
    """
    box = f.support_box()
    if box is not None and not Q.star(1, kappa).contains_cuboid(box):
        raise DomainError("mean_split needs f supported in Q*")
    lam0 = f.integral()
    fr = f.refine([[a, b] for a, b in zip(Q.lower, Q.upper)])
    if lam0 == 0.0:
        return 0.0, fr
    muQ = measure_cuboid(nu, Q)
    inside = None
    for e, a, b in zip(fr.edges, Q.lower, Q.upper):
        m = 0.5 * (e[1:] + e[:-1])
        ok = (m > a) & (m < b)
        inside = ok if inside is None else np.logical_and.outer(inside, ok)
    g = fr.with_values(fr.values - (lam0 / muQ) * inside)
    return lam0, g


def haar_decompose(g: GridFunction, host: Cuboid, nu: NuVector,
                   mean_tol: float = 1e-10) -> AtomicDecomposition:
    """Expand a mean-zero grid function into cancellative atoms.

    The cells are bisected (by index) along every axis with at least two
    cells until single cells remain.  Node ``N`` with children ``C`` contributes
    ``sum_C (E_C - E_N) 1_C`` where ``E`` are mu-weighted means; normalising by
    ``max_C |E_C - E_N| * mu(N)`` gives an atom supported on ``N``.
    """
    mass = g.cell_measures()
    if not np.all(np.isfinite(mass)):
        raise DomainError("Haar expansion needs finite cell masses")
    total = float(np.sum(mass))
    scale = max(float(np.max(np.abs(g.values))), 1e-300) if g.values.size else 1.0
    if abs(g.integral()) > mean_tol * scale * total:
        raise DomainError("haar_decompose needs a mean-zero input")
    out = AtomicDecomposition()
    if not np.any(g.values):
        return out
    weighted = g.values * mass
    stack = [(tuple(0 for _ in g.shape), tuple(g.shape))]
    while stack:
        lo, hi = stack.pop()
        splits = [((a + b) // 2) if b - a >= 2 else None for a, b in zip(lo, hi)]
        if all(s is None for s in splits):
            continue
        sl = tuple(slice(a, b) for a, b in zip(lo, hi))
        if not np.any(g.values[sl]):
            continue
        # children boxes in C order
        axes_parts = [[(a, s), (s, b)] if s is not None else [(a, b)]
                      for a, b, s in zip(lo, hi, splits)]
        children = list(_product(axes_parts))
        cm = np.array([np.sum(mass[tuple(slice(a, b) for a, b in ch)]) for ch in children])
        cw = np.array([np.sum(weighted[tuple(slice(a, b) for a, b in ch)]) for ch in children])
        node_mass = float(np.sum(cm))
        dev = cw / cm - float(np.sum(cw)) / node_mass
        dev -= float(np.sum(dev * cm)) / node_mass
        M = float(np.max(np.abs(dev)))
        if M > 0:
            edges = []
            for e, (a, b), s in zip(g.edges, zip(lo, hi), splits):
                edges.append(np.array([e[a], e[s], e[b]]) if s is not None else np.array([e[a], e[b]]))
            shape = tuple(len(e) - 1 for e in edges)
            K = Cuboid(tuple(e[0] for e in edges), tuple(e[-1] for e in edges))
            muK = measure_cuboid(nu, K)
            vals = (dev / (M * muK)).reshape(shape)
            atom = Atom("cancellative", host, K, nu, GridFunction(tuple(edges), vals, nu))
            out.terms.append((M * muK, atom))
        for ch in children:
            stack.append((tuple(a for a, _ in ch), tuple(b for _, b in ch)))
    return out


def _product(parts):
    if not parts:
        yield ()
        return
    for head in parts[0]:
        for tail in _product(parts[1:]):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# localisation

@dataclass
class LocalDecomposition:
    decomposition: AtomicDecomposition
    grid: GridFunction          # f on the common refinement
    hosts: list                 # relevant covering cells
    lambda0: list               # mean-split coefficients per host

    @property
    def total_l1(self):
        return self.decomposition.total_l1

    def reconstruction_error(self) -> float:
        """Max abs error of ``sum lambda a`` at cell centres, relative to ``max|f|``."""
        pts = self.grid.cell_centers()
        rec = self.decomposition.evaluate(pts)
        ref = self.grid.values.reshape(-1)
        scale = max(float(np.max(np.abs(ref))), 1e-300)
        return float(np.max(np.abs(rec - ref))) / scale


def relevant_cells(f: GridFunction, cov: Covering):
    """Covering cells whose enlargement ``Q*`` meets the support of ``f``."""
    box = f.support_box()
    if box is None:
        return None, box
    lo, hi = np.array(box.lower), np.array(box.upper)
    margin = 2.0 * (cov.kappa - 1.0) * 2.0 * float(np.max(hi))
    qlo = np.where(lo > 0, np.maximum(lo - margin, 0.5 * lo), 0.0)
    cand = cov.cells_in_box(qlo, hi + margin)
    slo, shi = cand.star(1, cov.kappa)
    keep = np.all(np.maximum(slo, lo) < np.minimum(shi, hi), axis=1)
    return cand.take(np.nonzero(keep)[0]), box


def localize_and_decompose(f: GridFunction, cov: Covering, nu: NuVector) -> LocalDecomposition:
    """Atomic decomposition of ``f`` subordinate to ``cov``.

    Raises ``DomainError`` when the support of ``f`` touches a point where the
    covering cannot be enumerated (e.g. the origin of a dyadic axis).
    """
    block, box = relevant_cells(f, cov)
    if block is None:
        return LocalDecomposition(AtomicDecomposition(), f, [], [])
    dom = f.domain
    slo, shi = block.star(1, cov.kappa)
    extra = []
    for i in range(f.dim):
        cand = np.concatenate([block.lower[:, i], block.upper[:, i], slo[:, i], shi[:, i]])
        extra.append(cand[(cand > dom.lower[i]) & (cand < dom.upper[i])])
    G = f.refine(extra)
    centers = G.cell_centers()
    phi = bump(block, centers, cov.kappa)
    norm = np.sum(phi, axis=0)
    fv = G.values.reshape(-1)
    if np.any((fv != 0) & (norm == 0)):
        raise DomainError("covering window does not reach the support of f")
    psi = phi / np.where(norm > 0, norm, 1.0)
    out = AtomicDecomposition()
    hosts, lambdas = [], []
    for j in range(len(block)):
        Q = block.cuboid(j)
        fq = (psi[j] * fv).reshape(G.shape)
        if not np.any(fq):
            continue
        lo_idx, hi_idx = [], []
        for i, e in enumerate(G.edges):
            a = int(np.searchsorted(e, max(slo[j, i], e[0]), side="left"))
            b = int(np.searchsorted(e, min(shi[j, i], e[-1]), side="right")) - 1
            lo_idx.append(a)
            hi_idx.append(max(b, a + 1))
        local = G.with_values(fq).sub_grid(lo_idx, hi_idx)
        lam0, g = mean_split(local, Q, nu, cov.kappa)
        hosts.append(Q)
        lambdas.append(lam0)
        if lam0 != 0.0:
            out.terms.append((lam0, Atom.local(Q, nu)))
        out.extend(haar_decompose(g, Q, nu))
    return LocalDecomposition(out, G, hosts, lambdas)


# ---------------------------------------------------------------------------
# conjugation between the exotic and the conjugated measures

@dataclass
class ConjugatedAtom:
    """``a(y) = a~(y) * y_exotic^(4 nu_e)`` with its measured certificate."""

    source: Atom
    nu_direct: NuVector       # mixed: classical axes and exotic (-nu_e) axes
    factor_min: float
    factor_max: float
    size: float               # sup|a| * mu_direct(K)
    integral: float           # int a dmu_direct (equals int a~ dmu_conj)

    def evaluate(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        out = self.source.evaluate(p)
        for i, ex in enumerate(self.nu_direct.exotic_mask):
            if ex:
                out = out * p[:, i] ** (4 * self.nu_direct.values[i])
        return out


def conjugation_factor_range(Q: Cuboid, nu_direct: NuVector):
    """Range over ``y`` in ``Q`` of ``y_e^(4nu_e) mu_(-nu_e)(Q_e) / mu_(nu_e)(Q_e)``."""
    lo = hi = 1.0
    for i, ex in enumerate(nu_direct.exotic_mask):
        if not ex:
            continue
        v = nu_direct.values[i]
        a, b = Q.lower[i], Q.upper[i]
        ratio = measure_interval_pair(-v, v, a, b)
        lo *= a ** (4 * v) * ratio
        hi *= b ** (4 * v) * ratio
    return lo, hi


def measure_interval_pair(nu1, nu2, a, b):
    return float(measure_intervals(nu1, a, b) / measure_intervals(nu2, a, b))


def conjugate_atom(a_tilde: Atom, nu_direct: NuVector) -> ConjugatedAtom:
    """Transport an atom for the conjugated measure to the exotic measure.

    ``a_tilde`` must be expressed with respect to ``nu_direct.conjugate()`` (all
    axes classical with ``+nu_e``).
    """
    if not any(nu_direct.exotic_mask):
        raise DomainError("conjugation needs at least one exotic axis")
    conj = nu_direct.conjugate()
    if a_tilde.nu != conj:
        raise DomainError("atom must be normalised for the conjugated measure")
    if any(a == 0 for a, ex in zip(a_tilde.host.lower, nu_direct.exotic_mask) if ex):
        raise DomainError("host must stay away from 0 on exotic axes")
    g = a_tilde.as_grid()
    powers = tuple(4 * v if ex else 0.0 for v, ex in zip(nu_direct.values, nu_direct.exotic_mask))
    direct = GridFunction(g.edges, g.values, nu_direct, powers)
    fmin, fmax = conjugation_factor_range(a_tilde.host, nu_direct)
    size = direct.sup_norm() * measure_cuboid(nu_direct, a_tilde.support)
    return ConjugatedAtom(a_tilde, nu_direct, fmin, fmax, size, direct.integral())
