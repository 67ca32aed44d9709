"""Power-weight measures ``d mu_nu(x) = x^(2 nu + 1) dx`` on the positive orthant.

Exact values come from the antiderivative; ``+inf`` is returned, not
raised, for sets touching the origin when the weight is not locally
integrable there (``2 nu + 2 <= 0``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


class Flavor(str, enum.Enum):
    CLASSICAL = "classical"
    EXOTIC = "exotic"


@dataclass(frozen=True)
class NuVector:
    """Per-axis Bessel parameters.

    ``values[i]`` is the stored parameter: ``nu > -1`` for a classical axis and
    ``nu_e > 0`` for an exotic axis, whose measure exponent uses ``-nu_e``.
    """

    values: tuple
    flavors: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        flv = tuple(Flavor(f) for f in self.flavors)
        if len(vals) != len(flv) or not vals:
            raise DomainError("nu values and flavors must have equal, nonzero length")
        for v, f in zip(vals, flv):
            if f is Flavor.CLASSICAL and not v > -1:
                raise DomainError(
                    f"classical axis needs nu > -1 (admissible Bessel order), got {v:g}")
            if f is Flavor.EXOTIC and not v > 0:
                raise DomainError(f"exotic axis stores nu_e > 0, got {v:g}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "flavors", flv)

    @classmethod
    def classical(cls, *nus) -> "NuVector":
        return cls(tuple(nus), (Flavor.CLASSICAL,) * len(nus))

    @classmethod
    def mixed(cls, nu_c, nu_e) -> "NuVector":
        """Classical axes first, then exotic ones."""
        nu_c, nu_e = tuple(nu_c), tuple(nu_e)
        return cls(nu_c + nu_e, (Flavor.CLASSICAL,) * len(nu_c) + (Flavor.EXOTIC,) * len(nu_e))

    @property
    def dim(self) -> int:
        return len(self.values)

    @property
    def effective(self) -> tuple:
        """Exponent parameters entering the measure (``-nu_e`` on exotic axes)."""
        return tuple(-v if f is Flavor.EXOTIC else v for v, f in zip(self.values, self.flavors))

    @property
    def weight_exponents(self) -> tuple:
        return tuple(2 * v + 1 for v in self.effective)

    @property
    def exotic_mask(self) -> tuple:
        return tuple(f is Flavor.EXOTIC for f in self.flavors)

    def conjugate(self) -> "NuVector":
        """All-classical companion: exotic ``-nu_e`` replaced by ``+nu_e``."""
        return NuVector.classical(*self.values)

    def to_dict(self) -> dict:
        return {"values": list(self.values), "flavors": [f.value for f in self.flavors]}


def _as_effective(nu) -> tuple:
    if isinstance(nu, NuVector):
        return nu.effective
    if np.ndim(nu) == 0:
        return (float(nu),)
    return tuple(float(v) for v in nu)


def measure_intervals(nu: float, a, b):
    """Vectorised ``mu_nu([a, b])``; entries with ``a == 0`` may be ``+inf``.

    Uses ``a^p * expm1(p * log1p((b-a)/a)) / p`` with ``p = 2 nu + 2`` so that short
    intervals far from 0 and orders near ``nu = -1`` keep full accuracy.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(~(b > a)) or np.any(~np.isfinite(b)):
        raise DomainError("intervals must satisfy 0 <= a < b < inf")
    p = 2.0 * nu + 2.0
    out = np.empty(np.broadcast(a, b).shape)
    a, b = np.broadcast_arrays(a, b)
    zero = a == 0
    pos = ~zero
    if p == 0.0:
        out[zero] = np.inf
        out[pos] = np.log1p((b[pos] - a[pos]) / a[pos])
    else:
        if p > 0:
            out[zero] = b[zero] ** p / p
        else:
            out[zero] = np.inf
        ap, bp = a[pos], b[pos]
        with np.errstate(over="ignore"):
            out[pos] = ap ** p * np.expm1(p * np.log1p((bp - ap) / ap)) / p
    return out


def measure_interval(nu: float, a: float, b: float) -> float:
    """``mu_nu([a, b]) = int_a^b x^(2 nu + 1) dx`` for ``0 <= a < b < inf``."""
    return float(measure_intervals(float(nu), a, b))


def measure_cuboid(nu, Q) -> float:
    """Product measure of a cuboid; ``nu`` is a :class:`NuVector` or exponents."""
    eff = _as_effective(nu)
    if len(eff) != Q.dim:
        raise DomainError(f"nu has {len(eff)} axes but cuboid has {Q.dim}")
    out = 1.0
    for v, a, b in zip(eff, Q.lower, Q.upper):
        out *= measure_interval(v, a, b)
    return out


def measure_boxes(nu, lower, upper):
    """Product measures for stacked boxes ``lower, upper`` of shape ``(N, d)``."""
    eff = _as_effective(nu)
    lower = np.atleast_2d(lower)
    upper = np.atleast_2d(upper)
    out = np.ones(lower.shape[0])
    for i, v in enumerate(eff):
        out = out * measure_intervals(v, lower[:, i], upper[:, i])
    return out


def measure_ball_exact(nu: float, x: float, r: float) -> float:
    """``mu_nu(B(x, r) cap R_+)`` in one dimension."""
    if not (x > 0 and r > 0):
        raise DomainError("ball needs x > 0 and r > 0")
    return measure_interval(nu, max(x - r, 0.0), x + r)


def measure_balls_exact(nu, x, r):
    """Vectorised product-of-intervals ball measure.

    In several dimensions the ball is the sup-norm cube ``prod [x_i - r, x_i + r]``,
    comparable to the Euclidean ball with dimension-only constants.
    ``x`` has shape ``(..., d)``; ``r`` broadcasts against ``x[..., 0]``.
    """
    eff = _as_effective(nu)
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if len(eff) == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    out = 1.0
    for i, v in enumerate(eff):
        xi = x[..., i]
        a = np.maximum(xi - r, 0.0)
        out = out * measure_intervals(v, a, xi + r)
    return out


def measure_ball_comparable(nu: float, x: float, r: float) -> float:
    """Closed-form quantity comparable to the 1-D ball measure.

    ``(1 ^ r/x)(x+r)^(2nu+2)`` for ``nu > -1``, ``log((x+r)/(x-r))`` for
    ``nu = -1`` and ``(1 ^ r/x)(x-r)^(2nu+2)`` for ``nu < -1``; the last two
    require ``r < x``.
    """
    nu = float(nu)
    if not (x > 0 and r > 0):
        raise DomainError("ball needs x > 0 and r > 0")
    if nu <= -1 and not r < x:
        raise DomainError(f"nu={nu:g} <= -1 requires r < x (got x={x:g}, r={r:g})")
    p = 2 * nu + 2
    if nu > -1:
        return min(1.0, r / x) * (x + r) ** p
    if nu == -1:
        return math.log((x + r) / (x - r))
    return min(1.0, r / x) * (x - r) ** p


def measure_ball_multidim_comparable(nu, x, r: float) -> float:
    """Quantity comparable to ``mu_nu(B(x, r))`` in ``d`` dimensions.

    ``r^d prod x_j^(2nu_j+1)`` when ``r < min(x)/2`` (any ``nu``), otherwise
    ``r^d prod (x_j + r)^(2nu_j+1)``, which needs every ``nu_j > -1``.
    """
    eff = _as_effective(nu)
    x = tuple(float(v) for v in np.atleast_1d(x))
    if len(x) != len(eff):
        raise DomainError("dimension mismatch between nu and x")
    if not (r > 0 and min(x) > 0):
        raise DomainError("ball needs positive centre and radius")
    d = len(x)
    if r < min(x) / 2:
        return r ** d * math.prod(xi ** (2 * v + 1) for xi, v in zip(x, eff))
    if all(v > -1 for v in eff):
        return r ** d * math.prod((xi + r) ** (2 * v + 1) for xi, v in zip(x, eff))
    raise DomainError("r >= min(x)/2 is only covered for nu in (-1, inf)^d")
