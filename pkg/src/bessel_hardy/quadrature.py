"""Gauss-Kronrod panels and the quadrature configuration."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1] (QUADPACK).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
G_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes
G_WEIGHTS[1::2] = np.concatenate([_WG[:3], [_WG[3]], _WG[:3][::-1]])


def panel_nodes(a, b):
    """Nodes and (Kronrod, Gauss) weights for panels ``[a_k, b_k]``; shapes ``(P, 15)``."""
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[:, None]
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * GK_NODES
    return x, half * GK_WEIGHTS, half * G_WEIGHTS


def singular_panel_nodes(b, alpha):
    """Rule for ``int_0^b g(y) y^alpha dy`` with ``-1 < alpha < 0``.

    The substitution ``y = b s^(1/(alpha+1))`` absorbs the weight; returned
    weights already include ``y^alpha``.
    """
    b = np.asarray(b, dtype=float)[:, None]
    s = 0.5 * (GK_NODES + 1.0)
    p = 1.0 / (alpha + 1.0)
    y = b * s ** p
    c = b ** (alpha + 1.0) / (alpha + 1.0) * 0.5
    return y, c * GK_WEIGHTS, c * G_WEIGHTS


@dataclass(frozen=True)
class QuadratureSpec:
    """Numerical controls for semigroup and maximal-function evaluation.

    Lengths below are in units of ``sqrt(t)`` (inner integrals) or of the
    support width of ``f`` (outer mesh).
    """

    window: float = 13.0            # inner integrals stop at |x - y| = window sqrt(t)
    panel: float = 2.5              # inner panel width
    max_panels: int = 12
    t_lo_factor: float = 1e-6       # t-grid starts at t_lo_factor * s^2
    t_hi_factor: float = 1e6        # ... and reaches at least t_hi_factor * s^2
    points_per_decade: int = 16
    outer_doublings: int = 20       # geometric panels beyond the support
    edge_grading: int = 8           # graded panels next to the support edges
    cell_grading: int = 2           # graded panels inside each cell, per side
    eps_tail: float = 1e-3          # tails above eps_tail * integral are uncertified
    max_tail_ratio: float = 0.85    # shell ratio above which tails are uncertified

    def __post_init__(self):
        if not 0 < self.eps_tail <= 1e-3:
            raise ConfigError("eps_tail must lie in (0, 1e-3]")
        if self.t_lo_factor <= 0 or self.t_hi_factor <= self.t_lo_factor:
            raise ConfigError("t-grid factors must satisfy 0 < lo < hi")
        if self.points_per_decade < 1 or self.max_panels < 1:
            raise ConfigError("grid densities must be positive")
        if self.window < 6:
            raise ConfigError("window must be at least 6 sqrt(t)")

    def t_grid(self, scale: float, t_max: float | None = None, t_top: float | None = None):
        """Log-spaced times in ``[t_lo_factor s^2, max(t_hi_factor s^2, t_top)]``.

        With ``t_max`` the grid is cut at ``t_max`` and ``t_max`` itself is
        included (local maximal functions).
        """
        lo = self.t_lo_factor * scale * scale
        hi = self.t_hi_factor * scale * scale
        if t_top is not None:
            hi = max(hi, t_top)
        if t_max is not None:
            hi = min(hi, t_max)
            lo = min(lo, t_max * 1e-6)
        n = max(int(math.ceil(math.log10(hi / lo) * self.points_per_decade)), 1)
        return np.geomspace(lo, hi, n + 1)

    def to_dict(self):
        return asdict(self)

    def refined(self) -> "QuadratureSpec":
        """Twice the t density and half the panel widths."""
        d = asdict(self)
        d.update(points_per_decade=2 * self.points_per_decade, panel=self.panel / 2,
                 max_panels=2 * self.max_panels, cell_grading=self.cell_grading + 1,
                 edge_grading=self.edge_grading + 2)
        return QuadratureSpec(**d)
