"""Numerical checkers for the kernel conditions behind the atomic characterisation.

Each checker samples cubes of a covering (one representative per dyadic
level), a set of ``y`` points in ``Q*`` and evaluates a normalised statistic
per cube.  A condition passes when the statistics are finite and their
max/min spread over the cube window stays below ``spread_bound``.

All ``sup_t`` operations are maxima over a log-spaced ``t`` grid; spatial
integrals use Gauss-Kronrod panels graded toward ``y`` and toward the region
edges, with geometric panels toward 0 and infinity whose last two shells
give a geometric tail estimate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .covering import Covering, CylinderCovering, DyadicCovering, bump, cylinder_covering
from .cuboid import Cuboid
from .errors import ConfigError, DomainError
from .kernel import Branch, KernelSpec
from .measure import measure_balls_exact, measure_intervals
from .quadrature import panel_nodes

CONDITIONS = ("A0", "A1", "A2", "A1p", "A2p", "a3a4", "lemma24", "supT", "prop42")


@dataclass(frozen=True)
class CheckSettings:
    """Sampling and quadrature controls shared by all checkers."""

    spread_bound: float = 10.0
    envelope_c: float = 8.0          # the c of the Gaussian envelope
    n_random: int = 7                # random y samples per cube (plus 3^d deterministic)
    seed: int = 0
    t_lo_factor: float = 1e-8        # t grid spans [t_lo d^2, t_hi d^2] at least
    t_hi_factor: float = 1e8
    points_per_decade: int = 16
    y_grading: int = 30              # geometric panels toward y, down to d 2^-y_grading
    edge_grading: int = 8
    doublings: int = 20              # geometric panels toward 0 and infinity
    max_tail_ratio: float = 0.97
    threads: int = 1

    def __post_init__(self):
        if self.spread_bound < 1:
            raise ConfigError("spread_bound must be at least 1")
        if self.envelope_c <= 0:
            raise ConfigError("envelope_c must be positive")
        if self.n_random < 0 or self.points_per_decade < 1:
            raise ConfigError("sample counts must be nonnegative")
        if not 0 < self.t_lo_factor < self.t_hi_factor:
            raise ConfigError("t grid factors must satisfy 0 < lo < hi")

    def to_dict(self):
        return asdict(self)


@dataclass
class ConditionReport:
    condition: str
    covering: dict
    kernel: dict
    levels: list
    deltas: list
    entries: list = field(default_factory=list)   # one dict per (cube, delta)
    constants: dict = field(default_factory=dict)  # delta -> max statistic
    spreads: dict = field(default_factory=dict)    # delta -> max/min
    passed: bool = False
    spread_bound: float = 10.0
    max_rel_error: float = 0.0
    notes: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    def finalize(self, key="delta"):
        """Fill constants, spreads and the pass flag from ``entries``."""
        groups = {}
        for e in self.entries:
            groups.setdefault(_key(e.get(key)), []).append(e["statistic"])
        ok = True
        for k, vals in groups.items():
            v = np.asarray(vals, dtype=float)
            finite = bool(np.all(np.isfinite(v)))
            if not finite:
                spread = math.inf
            elif np.all(v == 0):
                spread = 1.0
            elif np.min(v) <= 0:
                spread = math.inf
            else:
                spread = float(np.max(v) / np.min(v))
            self.constants[k] = float(np.max(v)) if finite else math.inf
            self.spreads[k] = spread
            ok &= finite and spread <= self.spread_bound
        errs = [e.get("rel_error", 0.0) for e in self.entries]
        self.max_rel_error = float(max(errs)) if errs else 0.0
        self.passed = bool(ok and not self.witnesses)
        return self


def _key(v):
    if v is None:
        return "all"
    return v if isinstance(v, str) else repr(float(v))


# ---------------------------------------------------------------------------
# sampling helpers

def representative_cubes(cov: Covering, levels):
    """One cell per level: the cell of ``cov`` containing ``1.5 * 2^n (1, ..., 1)``."""
    out = []
    for n in range(levels[0], levels[1] + 1):
        if isinstance(cov, DyadicCovering):
            out.append((n, cov.cell(n)))
        else:
            out.append((n, cov.locate(np.full(cov.dim, 1.5 * 2.0 ** n))))
    return out


def y_samples(Q: Cuboid, n_random: int, rng) -> np.ndarray:
    """``3^d`` lattice points of ``Q*`` (corners, midpoints, centre) then random ones.

    In one dimension the lattice is 9 evenly spaced points.
    """
    lo, hi = np.array(Q.lower), np.array(Q.upper)
    if Q.dim == 1:
        det = np.linspace(lo[0], hi[0], 9)[:, None]
    else:
        axes = [np.linspace(a, b, 3) for a, b in zip(lo, hi)]
        det = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, Q.dim)
    rnd = lo + (hi - lo) * rng.random((n_random, Q.dim))
    pts = np.concatenate([det, rnd])
    # the orthant boundary is not a sample point
    return pts[np.all(pts > 0, axis=1)]


def _rng(settings: CheckSettings, level: int, salt: int):
    return np.random.default_rng([settings.seed, level + 4096, salt])


def _star(cov, Q, k):
    return Q.star(k, cov.kappa)


# ---------------------------------------------------------------------------
# quadrature engine

def _axis_breaks(lo, hi, yi, d, s: CheckSettings, outer: bool):
    g = d * 2.0 ** -np.arange(0, s.y_grading + 1)
    pts = [np.array([lo, hi, yi]), yi - g, yi + g]
    w = hi - lo
    e = w * 2.0 ** -np.arange(1, s.edge_grading + 1)
    pts += [lo + e, hi - e]
    if outer:
        pts += [lo - e, hi + e, hi + w * 2.0 ** np.arange(0, s.doublings + 1)]
        if lo > 0:
            pts.append(lo * 2.0 ** -np.arange(1, s.doublings + 1))
    bp = np.unique(np.concatenate(pts))
    if outer:
        bp = bp[bp > 0]
    else:
        bp = bp[(bp >= lo) & (bp <= hi)]
    return bp


class _Mesh:
    """Tensor GK15 mesh with measure weights and a mask for the region."""

    def __init__(self, bps, alphas, box: Cuboid, outside: bool):
        self.axes = []
        for bp, a in zip(bps, alphas):
            x, wk, wg = panel_nodes(bp[:-1], bp[1:])
            pw = x ** a
            self.axes.append((x.ravel(), (wk * pw).ravel(), (wg * pw).ravel(),
                              np.repeat(np.arange(bp.size - 1), 15)))
        inside = None
        for (x, *_), a, b in zip(self.axes, box.lower, box.upper):
            m = (x >= a) & (x <= b)
            inside = m if inside is None else np.logical_and.outer(inside, m)
        self.mask = ~inside if outside else inside
        self.outside = outside

    @property
    def nodes(self):
        return [a[0] for a in self.axes]

    def integrate(self, F, ratio_limit):
        """Kronrod value, Gauss-Kronrod difference, tail estimate, certified flag."""
        F = np.where(self.mask, F, 0.0)
        wk = [a[1] for a in self.axes]
        wg = [a[2] for a in self.axes]
        val = _tsum(F, wk)
        err = abs(val - _tsum(F, wg))
        tail, certified = 0.0, True
        for i, (x, w, _, panel) in enumerate(self.axes if self.outside else ()):
            others = [v for j, v in enumerate(wk) if j != i]
            Fi = np.moveaxis(F, i, 0).reshape(F.shape[i], -1)
            marg = Fi @ _outer(others) if others else Fi[:, 0]
            shells = np.bincount(panel, weights=marg * w)
            if shells.size < 2:
                continue
            for last, prev in ((shells[-1], shells[-2]), (shells[0], shells[1])):
                if last <= 0:
                    continue
                rho = last / prev if prev > 0 else math.inf
                if rho >= ratio_limit:
                    certified = False
                    tail += last
                else:
                    tail += last * rho / (1 - rho)
        return val + tail, err + tail, certified


def _tsum(F, ws):
    out = F
    for w in ws:
        out = np.tensordot(w, out, axes=([0], [0]))
    return float(out)


def _outer(ws):
    out = ws[0]
    for w in ws[1:]:
        out = np.multiply.outer(out, w)
    return out.reshape(-1)


def _times(d, s: CheckSettings, t_cap=None, t_floor=None, x_far=None):
    lo = s.t_lo_factor * d * d
    lo = min(lo, (d * 2.0 ** -s.y_grading) ** 2)
    hi = s.t_hi_factor * d * d
    if x_far is not None:
        hi = max(hi, 4 * x_far * x_far)
    if t_cap is not None:
        hi = min(hi, t_cap)
    if t_floor is not None:
        lo = max(lo, t_floor)
    n = max(int(math.ceil(math.log10(hi / lo) * s.points_per_decade)), 1)
    return np.geomspace(lo, hi, n + 1)


def _axis_values(spec: KernelSpec, t, X, y):
    return [spec.axis(i, t, X[i], y[i]) for i in range(spec.dim)]


def _outer_product(vecs):
    out = vecs[0]
    for v in vecs[1:]:
        out = np.multiply.outer(out, v)
    return out


def _sup_profiles(spec, X, y, times, powers, mode="kernel", extra=None):
    """``max_t t^p |kernel-ish|`` on the tensor mesh for each power ``p``.

    ``mode='kernel'`` uses ``T_t(x, y)``; ``mode='diff'`` uses
    ``|T_t - W^cls_t|``; ``extra`` multiplies the integrand (same shape).
    Also returns the values on every other time for a grid-error estimate.
    """
    shape = tuple(x.size for x in X)
    M = [np.zeros(shape) for _ in powers]
    H = [np.zeros(shape) for _ in powers]
    companion = spec.classical_companion() if mode == "diff" else None
    logs = None
    if mode == "diff" and all(b in (Branch.CLASSICAL_W, Branch.CONJUGATED_K) for b in spec.branches):
        logs = _outer_sum([2 * v * np.log(y[i] / X[i]) if b is Branch.CONJUGATED_K
                           else np.zeros_like(X[i])
                           for i, (v, b) in enumerate(zip(spec.nus, spec.branches))])
        factor = np.abs(np.expm1(logs))
    for k, t in enumerate(times):
        if mode == "kernel":
            F = _outer_product(_axis_values(spec, t, X, y))
        elif logs is not None:
            F = _outer_product(_axis_values(companion, t, X, y)) * factor
        else:
            F = np.abs(_outer_product(_axis_values(spec, t, X, y))
                       - _outer_product(_axis_values(companion, t, X, y)))
        if extra is not None:
            F = F * extra
        for j, p in enumerate(powers):
            v = F * t ** p if p else F
            np.maximum(M[j], v, out=M[j])
            if k % 2 == 0:
                np.maximum(H[j], v, out=H[j])
    return M, H


def _outer_sum(vs):
    out = vs[0]
    for v in vs[1:]:
        out = np.add.outer(out, v)
    return out


def _region_integrals(spec, Q, y, region_box, outside, powers, s, mode="kernel",
                      t_cap=None, t_floor=None, extra_fn=None):
    """``int_region max_t t^p F(t, x, y) dmu(x)`` for each power; with error and flag."""
    d = Q.diameter
    bps = [_axis_breaks(a, b, yi, d, s, outside)
           for a, b, yi in zip(region_box.lower, region_box.upper, y)]
    alphas = [2 * v + 1 for v in spec.measure_nu]
    mesh = _Mesh(bps, alphas, region_box, outside)
    X = mesh.nodes
    x_far = max(float(x[-1]) for x in X) if outside else None
    times = _times(d, s, t_cap, t_floor, x_far)
    extra = extra_fn(X) if extra_fn is not None else None
    M, H = _sup_profiles(spec, X, y, times, powers, mode, extra)
    out = []
    for Mj, Hj in zip(M, H):
        val, err, cert = mesh.integrate(Mj, s.max_tail_ratio)
        half, _, _ = mesh.integrate(Hj, s.max_tail_ratio)
        out.append((val, err + abs(val - half), cert))
    return out


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def _base_report(name, spec, cov, levels, deltas, s):
    return ConditionReport(name, cov.describe(), spec.to_dict() if spec is not None else {},
                           list(levels), [float(v) for v in deltas], spread_bound=s.spread_bound)


def _validate_spec(spec: KernelSpec, cov: Covering):
    if spec.dim != cov.dim:
        raise DomainError(f"kernel dimension {spec.dim} does not match covering dimension {cov.dim}")


# ---------------------------------------------------------------------------
# (A0)

def neighbor_points(cov: Covering, Q: Cuboid, per_cell: int = 5):
    """Lattice points inside the cells of ``N(Q)``."""
    nb = cov.neighbor_block(Q)
    g = (np.arange(per_cell) + 0.5) / per_cell
    pts = []
    for i in range(len(nb)):
        lo, hi = nb.lower[i], nb.upper[i]
        axes = [a + (b - a) * g for a, b in zip(lo, hi)]
        pts.append(np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, cov.dim))
    return np.concatenate(pts)


def check_A0(spec: KernelSpec, cov: Covering, levels=(-3, 3), settings: CheckSettings | None = None,
             per_cell: int = 5) -> ConditionReport:
    """Fit ``C`` in ``T_t(x,y) <= C mu(B(x, sqrt t))^-1 exp(-|x-y|^2 / ct)`` per cube."""
    s = settings or CheckSettings()
    _validate_spec(spec, cov)
    rep = _base_report("A0", spec, cov, levels, [], s)
    nu = spec.measure_nu

    def work(item):
        n, Q = item
        ys = y_samples(_star(cov, Q, 1), s.n_random, _rng(s, n, 0))
        xs = neighbor_points(cov, Q, per_cell)
        d = Q.diameter
        times = np.geomspace(s.t_lo_factor * d * d, s.t_hi_factor * d * d,
                             int(math.log10(s.t_hi_factor / s.t_lo_factor) * s.points_per_decade) + 1)
        X = np.repeat(xs, ys.shape[0], axis=0)
        Y = np.tile(ys, (xs.shape[0], 1))
        best, neg, wit = 0.0, 0, None
        d2 = np.sum((X - Y) ** 2, axis=1)
        for t in times:
            k = np.ones(X.shape[0])
            for i in range(spec.dim):
                k = k * spec.axis(i, t, X[:, i], Y[:, i])
            neg += int(np.sum(k < 0))
            ball = measure_balls_exact(nu, X, math.sqrt(t))
            with np.errstate(over="ignore", invalid="ignore"):
                r = k * ball * np.exp(d2 / (s.envelope_c * t))
            r = np.where(np.isfinite(ball), r, 0.0)
            j = int(np.argmax(r))
            if r[j] > best:
                best, wit = float(r[j]), (float(t), X[j].tolist(), Y[j].tolist())
        return n, Q, best, neg, wit

    for n, Q, best, neg, wit in _map(work, representative_cubes(cov, levels), s.threads):
        rep.entries.append({"level": n, "cube": [list(Q.lower), list(Q.upper)], "delta": None,
                            "statistic": best, "argmax": wit, "rel_error": 0.0})
        if neg:
            rep.witnesses.append({"level": n, "negative_values": neg})
    rep.notes.append(f"c = {s.envelope_c:g}; statistic = fitted C on N(Q) x Q*")
    return rep.finalize()


# ---------------------------------------------------------------------------
# (A1), (A2) and their primed forms

def _check_deltas(deltas, lo, hi, lo_open=True):
    for v in deltas:
        ok = (lo < v if lo_open else lo <= v) and v < hi
        if not ok:
            raise DomainError(f"delta {v} outside the admissible range")


def check_A1(spec: KernelSpec, cov: Covering, gamma: float, deltas, levels=(-3, 3),
             settings: CheckSettings | None = None, name: str = "A1") -> ConditionReport:
    """``sup_y int_{(Q**)^c} sup_t t^delta T_t(x,y) dmu(x) / d_Q^(2 delta)``."""
    s = settings or CheckSettings()
    _validate_spec(spec, cov)
    _check_deltas(deltas, -gamma, gamma)
    rep = _base_report(name, spec, cov, levels, deltas, s)

    def work(item):
        n, Q = item
        ys = y_samples(_star(cov, Q, 1), s.n_random, _rng(s, n, 1))
        Qss = _star(cov, Q, 2)
        res = [_region_integrals(spec, Q, y, Qss, True, list(deltas), s) for y in ys]
        return n, Q, ys, res

    for n, Q, ys, res in _map(work, representative_cubes(cov, levels), s.threads):
        d = Q.diameter
        for j, delta in enumerate(deltas):
            _add_sup_entry(rep, n, Q, ys, [r[j] for r in res], d ** (2 * delta), delta)
    rep.notes.append("t grid extends to (2 max x)^2 so far-field maxima are captured")
    return rep.finalize()


def _add_sup_entry(rep, n, Q, ys, vals, norm, delta, extra=None):
    v = np.array([r[0] for r in vals])
    e = np.array([r[1] for r in vals])
    cert = all(r[2] for r in vals)
    j = int(np.argmax(v))
    stat = float(v[j] / norm) if cert else math.inf
    entry = {"level": n, "cube": [list(Q.lower), list(Q.upper)],
             "delta": None if delta is None else float(delta), "statistic": stat,
             "raw": float(v[j]), "y_argmax": ys[j].tolist(),
             "rel_error": float(e[j] / v[j]) if v[j] > 0 else 0.0, "certified": cert}
    if extra:
        entry.update(extra)
    rep.entries.append(entry)
    if not cert:
        rep.notes.append(f"level {n}: far-field tail not certifiable (integral may diverge)")


def check_A2(spec: KernelSpec, cov: Covering, gamma: float, deltas, levels=(-3, 3),
             settings: CheckSettings | None = None, name: str = "A2") -> ConditionReport:
    """``sup_y int_{Q**} sup_{t<=d^2} t^-delta |T_t - W^cls_t| dmu / d_Q^(-2 delta)``.

    On conjugated axes the difference is formed as ``W^cls expm1(2 nu log(y/x))``,
    which stays accurate as ``x -> y``.
    """
    s = settings or CheckSettings()
    _validate_spec(spec, cov)
    _check_deltas(deltas, 0, gamma, lo_open=False)
    rep = _base_report(name, spec, cov, levels, deltas, s)

    def work(item):
        n, Q = item
        ys = y_samples(_star(cov, Q, 1), s.n_random, _rng(s, n, 2))
        Qss = _star(cov, Q, 2)
        d = Q.diameter
        res = [_region_integrals(spec, Q, y, Qss, False, [-v for v in deltas], s, mode="diff",
                                 t_cap=d * d) for y in ys]
        return n, Q, ys, res

    for n, Q, ys, res in _map(work, representative_cubes(cov, levels), s.threads):
        d = Q.diameter
        for j, delta in enumerate(deltas):
            _add_sup_entry(rep, n, Q, ys, [r[j] for r in res], d ** (-2 * delta), delta)
    return rep.finalize()


def check_A1p(spec, cov, levels=(-3, 3), settings=None):
    """(A1) at ``delta = 0``."""
    return check_A1(spec, cov, 1.0, [0.0], levels, settings, name="A1p")


def check_A2p(spec, cov, levels=(-3, 3), settings=None):
    """(A2) at ``delta = 0``."""
    return check_A2(spec, cov, 1.0, [0.0], levels, settings, name="A2p")


# ---------------------------------------------------------------------------
# (a3), (a4)

def psi_on_mesh(cov: Covering, Q: Cuboid, X):
    """``psi_Q`` on the tensor mesh ``X`` (list of per-axis nodes)."""
    nb = cov.neighbor_block(Q)
    pts = np.stack(np.meshgrid(*X, indexing="ij"), -1).reshape(-1, cov.dim)
    phi = bump(nb, pts, cov.kappa)
    total = phi.sum(axis=0)
    me = np.nonzero(np.all(nb.lower == np.array(Q.lower), axis=1)
                    & np.all(nb.upper == np.array(Q.upper), axis=1))[0]
    if me.size == 0:
        raise DomainError("cube is not a cell of the covering")
    with np.errstate(invalid="ignore", divide="ignore"):
        psi = np.where(total > 0, phi[me[0]] / total, 0.0)
    return psi.reshape(tuple(x.size for x in X))


def psi_at(cov: Covering, Q: Cuboid, y):
    return float(psi_on_mesh(cov, Q, [np.array([v]) for v in y]).ravel()[0])


def check_a3_a4(spec: KernelSpec, cov: Covering, levels=(-3, 3),
                settings: CheckSettings | None = None) -> ConditionReport:
    """(a3) as entries with ``part='a3'`` and (a4) with ``part='a4'``.

    The (a4) sum runs over ``N(Q0)`` for ``y in Q0``; the remaining cubes are
    bounded by ``int_{(Q0**)^c} sup_t T_t dmu`` (added to the statistic).
    """
    s = settings or CheckSettings()
    _validate_spec(spec, cov)
    rep = _base_report("a3a4", spec, cov, levels, [], s)

    def work(item):
        n, Q0 = item
        d = Q0.diameter
        ys = y_samples(_star(cov, Q0, 1), s.n_random, _rng(s, n, 3))
        Qss = _star(cov, Q0, 2)
        a3 = [_region_integrals(spec, Q0, y, Qss, False, [0.0], s, t_floor=d * d)[0] for y in ys]
        ys0 = y_samples(Q0, s.n_random, _rng(s, n, 4))
        nb = cov.neighbor_block(Q0).cuboids()
        a4, rest = [], []
        for y in ys0:
            total, err, cert = 0.0, 0.0, True
            for Q in nb:
                dq = Q.diameter
                py = psi_at(cov, Q, y)
                r = _region_integrals(
                    spec, Q, y, _star(cov, Q, 2), False, [0.0], s, t_cap=dq * dq,
                    extra_fn=lambda X, Q=Q, py=py: np.abs(psi_on_mesh(cov, Q, X) - py))[0]
                total += r[0]
                err += r[1]
                cert &= r[2]
            a4.append((total, err, cert))
            rest.append(_region_integrals(spec, Q0, y, Qss, True, [0.0], s)[0])
        return n, Q0, ys, a3, ys0, a4, rest

    for n, Q0, ys, a3, ys0, a4, rest in _map(work, representative_cubes(cov, levels), s.threads):
        _add_sup_entry(rep, n, Q0, ys, a3, 1.0, None, {"part": "a3"})
        j = int(np.argmax([r[0] for r in a4]))
        r = rest[j]
        _add_sup_entry(rep, n, Q0, ys0, a4, 1.0, None,
                       {"part": "a4", "remainder_bound": r[0] if r[2] else math.inf})
    rep.notes.append("a4 statistic = sum over N(Q0); remainder_bound is the (A1') integral "
                     "bounding the other cubes (infinite when (A1') fails)")
    return rep.finalize(key="part")


# ---------------------------------------------------------------------------
# envelope integrals inside and outside a cube (the "lemma24" check)

def _envelope_profiles(nu, c, X, y, times, powers):
    shape = tuple(x.size for x in X)
    M = [np.zeros(shape) for _ in powers]
    H = [np.zeros(shape) for _ in powers]
    d2 = _outer_sum([(x - yi) ** 2 for x, yi in zip(X, y)])
    for k, t in enumerate(times):
        r = math.sqrt(t)
        balls = [measure_intervals(v, np.maximum(x - r, 0.0), x + r) for v, x in zip(nu, X)]
        F = np.exp(-d2 / (c * t)) / _outer_product(balls)
        for j, p in enumerate(powers):
            v = F * t ** p
            np.maximum(M[j], v, out=M[j])
            if k % 2 == 0:
                np.maximum(H[j], v, out=H[j])
    return M, H


def check_lemma_integrable(nu, cov: Covering, delta: float, c: float | None = None, levels=(-3, 3),
                           settings: CheckSettings | None = None) -> ConditionReport:
    """Inner (``t^delta`` on ``Q**``) and outer (``t^-delta`` off ``Q**``) envelope integrals.

    ``nu`` is a tuple of classical parameters.  Entries carry ``part`` in
    ``{'in', 'out'}``, normalised by ``d_Q^(2 delta)`` and ``d_Q^(-2 delta)``.
    """
    s = settings or CheckSettings()
    nu = tuple(float(v) for v in np.atleast_1d(nu))
    if len(nu) != cov.dim:
        raise DomainError("nu dimension does not match covering")
    bound = min([0.5] + [v + 1 for v in nu])
    if not 0 < delta < bound:
        raise DomainError(f"delta must lie in (0, {bound:g})")
    c = s.envelope_c if c is None else float(c)
    rep = _base_report("lemma24", None, cov, levels, [delta], s)
    rep.kernel = {"envelope_nu": list(nu), "c": c}
    alphas = [2 * v + 1 for v in nu]

    def work(item):
        n, Q = item
        d = Q.diameter
        ys = y_samples(_star(cov, Q, 1), s.n_random, _rng(s, n, 5))
        Qss = _star(cov, Q, 2)
        out = {"in": [], "out": []}
        for y in ys:
            for part, outside, p in (("in", False, delta), ("out", True, -delta)):
                bps = [_axis_breaks(a, b, yi, d, s, outside)
                       for a, b, yi in zip(Qss.lower, Qss.upper, y)]
                mesh = _Mesh(bps, alphas, Qss, outside)
                X = mesh.nodes
                x_far = max(float(x[-1]) for x in X) if outside else None
                times = _times(d, s, x_far=x_far)
                M, H = _envelope_profiles(nu, c, X, y, times, [p])
                val, err, cert = mesh.integrate(M[0], s.max_tail_ratio)
                half = mesh.integrate(H[0], s.max_tail_ratio)[0]
                out[part].append((val, err + abs(val - half), cert))
        return n, Q, ys, out

    for n, Q, ys, out in _map(work, representative_cubes(cov, levels), s.threads):
        d = Q.diameter
        _add_sup_entry(rep, n, Q, ys, out["in"], d ** (2 * delta), delta, {"part": "in"})
        _add_sup_entry(rep, n, Q, ys, out["out"], d ** (-2 * delta), delta, {"part": "out"})
    return rep.finalize(key="part")


# ---------------------------------------------------------------------------
# the pointwise sup-t bound

def check_sup_t_bound(nu_j: float, eps_j: float, cov: Covering, levels=(-3, 3),
                      settings: CheckSettings | None = None, per_cell: int = 9) -> ConditionReport:
    """``P / min(x, |x-y|)^(eps-1)`` with the sup over ``t <= d_Q^2``; one dimension."""
    s = settings or CheckSettings()
    if cov.dim != 1:
        raise DomainError("the sup-t bound is checked per axis (one-dimensional covering)")
    if not 0 < eps_j < 2 * nu_j + 2:
        raise DomainError("eps_j must lie in (0, 2 nu_j + 2)")
    rep = _base_report("supT", None, cov, levels, [eps_j], s)
    rep.kernel = {"nu_j": nu_j, "eps_j": eps_j, "c": s.envelope_c}

    def work(item):
        n, Q = item
        d = Q.diameter
        xs = neighbor_points(cov, Q, per_cell)[:, 0]
        ys = y_samples(_star(cov, Q, 1), s.n_random, _rng(s, n, 6))[:, 0]
        X = np.repeat(xs, ys.size)
        Y = np.tile(ys, xs.size)
        keep = X != Y
        skipped = int(np.sum(~keep))
        X, Y = X[keep], Y[keep]
        dist = np.abs(X - Y)
        times = np.geomspace(s.t_lo_factor * d * d, d * d,
                             int(math.log10(1 / s.t_lo_factor) * s.points_per_decade) + 1)
        P = np.zeros(X.size)
        for t in times:
            ball = measure_intervals(nu_j, np.maximum(X - math.sqrt(t), 0.0), X + math.sqrt(t))
            P = np.maximum(P, np.exp(-dist ** 2 / (s.envelope_c * t)) / ball)
        P = P * dist ** eps_j * X ** (2 * nu_j + 1)
        ratio = P / np.minimum(X, dist) ** (eps_j - 1)
        j = int(np.argmax(ratio))
        return n, Q, float(ratio[j]), (float(X[j]), float(Y[j])), skipped

    for n, Q, best, wit, skipped in _map(work, representative_cubes(cov, levels), s.threads):
        rep.entries.append({"level": n, "cube": [list(Q.lower), list(Q.upper)], "delta": None,
                            "statistic": best, "argmax": list(wit), "rel_error": 0.0,
                            "skipped_diagonal": skipped})
    rep.notes.append("pairs with x = y have an infinite right side and are skipped")
    return rep.finalize()


# ---------------------------------------------------------------------------
# product with a classical factor

def check_prop_locnonloc(spec2: KernelSpec, cov2: Covering, d1: int, nu1=None, gamma: float = 0.25,
                         deltas_a1=None, deltas_a2=None, levels=(-3, 3),
                         settings: CheckSettings | None = None):
    """(A0)-(A2) for ``W^cls_{nu1} (x) spec2`` against the cylinder covering.

    Returns a list of reports.  With ``d1 = 0`` this reduces to ``spec2``
    on ``cov2``.
    """
    s = settings or CheckSettings()
    deltas_a1 = [-gamma / 2, 0.0, gamma / 2] if deltas_a1 is None else list(deltas_a1)
    deltas_a2 = [0.0, gamma / 2] if deltas_a2 is None else list(deltas_a2)
    if d1 < 0:
        raise ConfigError("d1 must be nonnegative")
    nu1 = tuple([0.0] * d1 if nu1 is None else np.atleast_1d(nu1).tolist())
    if len(nu1) != d1:
        raise ConfigError("nu1 must have d1 entries")
    if d1 == 0:
        spec, cov = spec2, cov2
    else:
        spec = KernelSpec(tuple(nu1) + spec2.nus,
                          (Branch.CLASSICAL_W,) * d1 + spec2.branches)
        cov = cylinder_covering(d1, cov2)
    reps = [check_A0(spec, cov, levels, s),
            check_A1(spec, cov, gamma, deltas_a1, levels, s),
            check_A2(spec, cov, gamma, deltas_a2, levels, s)]
    for r in reps:
        r.condition = "prop42:" + r.condition
        if isinstance(cov, CylinderCovering):
            r.notes.append("regions split by the product structure of Q** (per-axis panels)")
    return reps


def default_gamma(nu: float) -> float:
    """``min(0.3, nu/2)``: inside both ``(0, 1/3)`` and ``(0, min(1/2, nu))``."""
    return min(0.3, 0.5 * nu)
