"""Semigroup action, maximal functions and H^1-norm estimates.

Kernels are products of 1-D kernels and ``f`` is piecewise constant on a
rectilinear grid, so ``T_t f`` on a tensor mesh factorises:

    T_t f(x) = sum_c f_c prod_i A_i[x_i, c_i],
    A_i[x, c] = int_{cell c_i} k_i(t, x, y) y^alpha_i dy.

Each ``A_i`` is computed by Gauss-Kronrod panels restricted to
``|x - y| <= window sqrt(t)``.  The outer ``L^1(mu)`` integral uses composite
Gauss-Kronrod panels on a mesh graded toward the edges of ``f`` and
geometric toward 0 and infinity; the two far shells on each side give a
power-law extrapolation of the truncated tails.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, QuadratureError
from .grid import GridFunction
from .kernel import KernelSpec
from .measure import NuVector
from .quadrature import QuadratureSpec, panel_nodes, singular_panel_nodes


class SemigroupEvaluator:
    """``T_t f`` for a product kernel and a grid function, on tensor meshes."""

    def __init__(self, spec: KernelSpec, f: GridFunction, quad: QuadratureSpec | None = None):
        if spec.dim != f.dim:
            raise DomainError("kernel and grid function dimensions differ")
        self.spec, self.f = spec, f
        self.quad = quad or QuadratureSpec()
        self.alpha = tuple(2 * v + 1 + q for v, q in zip(spec.measure_nu, f.density_powers))
        self._absF = np.abs(f.values)

    def axis_matrix(self, i: int, t: float, xs):
        """``A[x, c]`` and its error estimate ``|K15 - G7|`` for axis ``i``."""
        q = self.quad
        xs = np.asarray(xs, dtype=float)
        e = self.f.edges[i]
        nx, nc = xs.size, e.size - 1
        sq = math.sqrt(t)
        half_w = q.window * sq
        lo = np.maximum(e[None, :-1], xs[:, None] - half_w)
        hi = np.minimum(e[None, 1:], xs[:, None] + half_w)
        J, C = np.nonzero(hi > lo)
        A = np.zeros((nx, nc))
        E = np.zeros((nx, nc))
        if J.size == 0:
            return A, E
        plo, phi = lo[J, C], hi[J, C]
        npan = np.clip(np.ceil((phi - plo) / (q.panel * sq)), 1, q.max_panels).astype(np.int64)
        pair = np.repeat(np.arange(J.size), npan)
        offs = np.concatenate([[0], np.cumsum(npan)[:-1]])
        k = np.arange(pair.size) - offs[pair]
        w = (phi - plo)[pair] / npan[pair]
        a = plo[pair] + k * w
        b = np.where(k + 1 == npan[pair], phi[pair], a + w)
        y, wk, wg = panel_nodes(a, b)
        alpha = self.alpha[i]
        if alpha != 0:
            wk = wk * y ** alpha
            wg = wg * y ** alpha
        if alpha < 0:
            sing = np.nonzero(a == 0)[0]
            if sing.size:
                ys, wks, wgs = singular_panel_nodes(b[sing], alpha)
                y[sing], wk[sing], wg[sing] = ys, wks, wgs
        vals = self.spec.axis(i, t, xs[J][pair][:, None], y)
        ik = np.sum(vals * wk, axis=1)
        ig = np.sum(vals * wg, axis=1)
        A[J, C] = np.bincount(pair, weights=ik, minlength=J.size)
        E[J, C] = np.bincount(pair, weights=np.abs(ik - ig), minlength=J.size)
        return A, E

    def apply_tensor(self, t: float, X):
        """``T_t f`` on the tensor mesh ``X[0] x ... x X[d-1]`` with an error bound."""
        mats = [self.axis_matrix(i, t, X[i]) for i in range(self.f.dim)]
        T = _contract(self.f.values, [m[0] for m in mats])
        absA = [np.abs(m[0]) for m in mats]
        err = np.zeros_like(T)
        for i in range(self.f.dim):
            ops = list(absA)
            ops[i] = mats[i][1]
            err += _contract(self._absF, ops)
        return T, err


def _contract(F, mats):
    """``sum_c F[c] prod_i M_i[x_i, c_i]``."""
    T = F
    for i, M in enumerate(mats):
        T = np.tensordot(M, T, axes=([1], [i]))
        T = np.moveaxis(T, 0, i)
    return T


def apply_semigroup(spec: KernelSpec, t: float, f: GridFunction, x,
                    quad: QuadratureSpec | None = None, with_error: bool = False):
    """``T_t f(x)`` for a single point ``x``."""
    if not t > 0:
        raise DomainError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)):
        raise DomainError("x must lie in the open positive orthant")
    ev = SemigroupEvaluator(spec, f, quad)
    T, err = ev.apply_tensor(t, [np.array([v]) for v in x])
    val, e = float(T.reshape(-1)[0]), float(err.reshape(-1)[0])
    return (val, e) if with_error else val


@dataclass
class MaximalValue:
    value: float
    t_argmax: float


def maximal_function(spec: KernelSpec, f: GridFunction, x, quad: QuadratureSpec | None = None,
                     t_max: float | None = None) -> MaximalValue:
    """``max_t |T_t f(x)|`` over the log grid (``t <= t_max`` if given)."""
    quad = quad or QuadratureSpec()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ev = SemigroupEvaluator(spec, f, quad)
    s = _support_scale(f)
    far = float(np.max(np.abs(x - np.array(f.support_box().center)))) + s
    best, targ = -1.0, math.nan
    for t in quad.t_grid(s, t_max, t_top=4 * far * far):
        T, _ = ev.apply_tensor(t, [np.array([v]) for v in x])
        v = abs(float(T.reshape(-1)[0]))
        if v > best:
            best, targ = v, float(t)
    return MaximalValue(best, targ)


# ---------------------------------------------------------------------------
# outer mesh

def _support_scale(f: GridFunction) -> float:
    box = f.support_box()
    if box is None:
        raise DomainError("function vanishes identically")
    return box.diameter


def outer_breakpoints(f: GridFunction, axis: int, quad: QuadratureSpec):
    """Panel breakpoints for the outer integral along one axis."""
    box = f.support_box()
    e = f.edges[axis]
    s_lo, s_hi = box.lower[axis], box.upper[axis]
    inner = e[(e >= s_lo) & (e <= s_hi)]
    pts = [inner]
    g = 2.0 ** -np.arange(1, quad.cell_grading + 1)
    for a, b in zip(inner[:-1], inner[1:]):
        h = 0.5 * (b - a)
        pts.append(a + h * g)
        pts.append(b - h * g)
        pts.append([a + h])
    w = s_hi - s_lo
    pts.append(s_hi + w * 2.0 ** np.arange(-quad.edge_grading, quad.outer_doublings + 1))
    if s_lo > 0:
        d = min(w, 0.5 * s_lo)
        pts.append(s_lo - d * 2.0 ** np.arange(-quad.edge_grading, 1))
        pts.append((s_lo - d) * 2.0 ** -np.arange(1, quad.outer_doublings + 1))
    else:
        first = inner[1]
        pts.append(first * 2.0 ** -np.arange(1, quad.outer_doublings + 1))
    bp = np.unique(np.concatenate([np.atleast_1d(p) for p in pts]))
    return bp[bp > 0]


@dataclass
class OuterAxis:
    breakpoints: np.ndarray
    nodes: np.ndarray
    wk: np.ndarray     # Kronrod weights times x^alpha
    wg: np.ndarray     # Gauss weights times x^alpha
    panel: np.ndarray  # panel index of each node


def outer_axis(bp, alpha: float) -> OuterAxis:
    x, wk, wg = panel_nodes(bp[:-1], bp[1:])
    wk = wk * x ** alpha
    wg = wg * x ** alpha
    panel = np.repeat(np.arange(bp.size - 1), 15)
    return OuterAxis(bp, x.ravel(), wk.ravel(), wg.ravel(), panel)


def _tensor_sum(M, weights):
    out = M
    for w in weights:
        out = np.tensordot(w, out, axes=([0], [0]))
    return float(out)


@dataclass
class NormResult:
    value: float
    error: float
    inner_error: float
    outer_error: float
    t_error: float
    tail: float
    tail_error: float
    n_times: int
    nodes_per_axis: list
    t_argmax_hist: dict = field(default_factory=dict)
    profile: tuple | None = None   # (axis nodes, maximal values) when requested

    def to_dict(self):
        d = {k: v for k, v in self.__dict__.items() if k != "profile"}
        return d


def maximal_norm(spec: KernelSpec, f: GridFunction, quad: QuadratureSpec | None = None,
                 t_max: float | None = None, outer_nu=None, keep_profile: bool = False,
                 threads: int = 1) -> NormResult:
    """``|| max_t |T_t f| ||_{L^1(mu)}`` with an error breakdown.

    ``outer_nu`` overrides the measure parameters of the outer integral
    (defaults to the kernel's own measure).
    """
    quad = quad or QuadratureSpec()
    if not np.any(f.values):
        return NormResult(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0, [0] * f.dim)
    ev = SemigroupEvaluator(spec, f, quad)
    mnu = spec.measure_nu if outer_nu is None else tuple(outer_nu)
    axes = [outer_axis(outer_breakpoints(f, i, quad), 2 * mnu[i] + 1) for i in range(f.dim)]
    X = [ax.nodes for ax in axes]
    s = _support_scale(f)
    far = max(float(ax.breakpoints[-1]) for ax in axes)
    times = quad.t_grid(s, t_max, t_top=4 * far * far)
    shape = tuple(x.size for x in X)
    M = np.zeros(shape)
    Merr = np.zeros(shape)
    Mhalf = np.zeros(shape)
    targ = np.zeros(shape, dtype=np.int64)

    def work(t):
        return ev.apply_tensor(t, X)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for start in range(0, times.size, max(1, threads)):
            chunk = times[start: start + max(1, threads)]
            results = list(pool.map(work, chunk)) if threads > 1 else [work(t) for t in chunk]
            for j, (T, err) in enumerate(results):
                k = start + j
                a = np.abs(T)
                upd = a > M
                M[upd] = a[upd]
                Merr[upd] = err[upd]
                targ[upd] = k
                if k % 2 == 0:
                    np.maximum(Mhalf, a, out=Mhalf)

    wk = [ax.wk for ax in axes]
    wg = [ax.wg for ax in axes]
    value = _tensor_sum(M, wk)
    outer_err = abs(value - _tensor_sum(M, wg))
    inner_err = _tensor_sum(Merr, wk)
    t_err = abs(value - _tensor_sum(Mhalf, wk))

    tail, tail_err = 0.0, 0.0
    for i, ax in enumerate(axes):
        others = [w for j, w in enumerate(wk) if j != i]
        Mi = np.moveaxis(M, i, 0)
        marg = Mi.reshape(Mi.shape[0], -1) @ _outer_weights(others) if others else Mi
        shells = np.bincount(ax.panel, weights=marg * ax.wk)
        for s_last, s_prev in ((shells[-1], shells[-2]), (shells[0], shells[1])):
            t_est, t_unc = _tail(s_last, s_prev, value, quad)
            tail += t_est
            tail_err += t_unc
    hist = _hist(times[targ.reshape(-1)], s)
    profile = (X, M) if keep_profile else None
    total_err = inner_err + outer_err + t_err + tail_err
    return NormResult(value + tail, total_err, inner_err, outer_err, t_err, tail, tail_err,
                      int(times.size), [int(x.size) for x in X], hist, profile)


def _outer_weights(ws):
    out = ws[0]
    for w in ws[1:]:
        out = np.multiply.outer(out, w)
    return out.reshape(-1)


def _tail(s_last, s_prev, total, quad):
    """Geometric extrapolation of the mass beyond the last shell."""
    if s_last <= 0:
        return 0.0, 0.0
    rho = s_last / s_prev if s_prev > 0 else math.inf
    if rho >= quad.max_tail_ratio:
        if s_last > quad.eps_tail * abs(total):
            raise QuadratureError(
                f"tail not certifiable: shell ratio {rho:.3g}, last shell {s_last:.3e}",
                achieved=s_last / max(abs(total), 1e-300))
        return 0.0, s_last
    est = s_last * rho / (1 - rho)
    return est, est


def _hist(tstar, s):
    r = np.round(np.log10(tstar / (s * s))).astype(int)
    vals, counts = np.unique(r, return_counts=True)
    return {str(int(v)): int(c) for v, c in zip(vals, counts)}


# ---------------------------------------------------------------------------
# L^1 norms and the H^1 estimate

def l1_norm(g, nu, quad: QuadratureSpec | None = None, breakpoints=None):
    """``int |g| dmu``; returns ``(value, error)``.

    Grid functions are integrated exactly.  For a callable ``g`` (points of
    shape ``(N, d)`` to values) ``breakpoints`` gives per-axis panel edges.
    """
    if isinstance(g, GridFunction):
        return g.l1_norm(), 0.0
    eff = nu.effective if isinstance(nu, NuVector) else tuple(np.atleast_1d(nu))
    if breakpoints is None:
        raise DomainError("callable integrands need breakpoints")
    axes = [outer_axis(np.asarray(bp, dtype=float), 2 * v + 1) for bp, v in zip(breakpoints, eff)]
    mesh = np.stack(np.meshgrid(*[a.nodes for a in axes], indexing="ij"), axis=-1)
    vals = np.abs(np.asarray(g(mesh.reshape(-1, len(axes))), dtype=float)).reshape(mesh.shape[:-1])
    k = _tensor_sum(vals, [a.wk for a in axes])
    gg = _tensor_sum(vals, [a.wg for a in axes])
    return k, abs(k - gg)


@dataclass
class H1Estimate:
    direct: NormResult
    conjugated: NormResult | None

    @property
    def agree(self) -> bool:
        if self.conjugated is None:
            return True
        d, c = self.direct, self.conjugated
        return abs(d.value - c.value) <= 3 * (d.error + c.error)

    def to_dict(self):
        out = {"direct": self.direct.value, "direct_error": self.direct.error,
               "direct_detail": self.direct.to_dict()}
        if self.conjugated is not None:
            out.update(conjugated=self.conjugated.value, conjugated_error=self.conjugated.error,
                       conjugated_detail=self.conjugated.to_dict(),
                       route_difference=abs(self.direct.value - self.conjugated.value),
                       routes_agree=self.agree)
        return out


def conjugated_input(f: GridFunction, nu: NuVector) -> GridFunction:
    """``y_e^(-4 nu_e) f`` expressed against the conjugated (all-classical) measure."""
    powers = tuple(-4 * v if ex else 0.0 for v, ex in zip(nu.values, nu.exotic_mask))
    return GridFunction(f.edges, f.values, nu.conjugate(), powers)


def h1_norm_estimate(f: GridFunction, nu: NuVector, quad: QuadratureSpec | None = None,
                     t_max: float | None = None, conjugated: bool = True,
                     threads: int = 1) -> H1Estimate:
    """``|| sup_t |W_t f| ||_{L^1(mu_nu)}`` for the semigroup attached to ``nu``.

    With exotic axes the conjugated route is evaluated as well: kernel ``K``
    on those axes, input ``y^(-4 nu_e) f`` and measure ``mu_(+nu_e)``.
    """
    if f.nu != nu:
        raise DomainError("grid function must be expressed with respect to nu")
    if any(v == 0 for v, ex in zip(f.support_box().lower if np.any(f.values) else (), nu.exotic_mask) if ex):
        raise DomainError("support must stay away from 0 on exotic axes")
    direct = maximal_norm(KernelSpec.direct(nu), f, quad, t_max, threads=threads)
    conj = None
    if conjugated and any(nu.exotic_mask):
        conj = maximal_norm(KernelSpec.conjugated_route(nu), conjugated_input(f, nu), quad, t_max,
                            threads=threads)
    return H1Estimate(direct, conj)
