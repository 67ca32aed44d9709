"""One-dimensional Bessel heat kernels, their products, and Gaussian envelopes.

With ``z = xy/2t`` and ``R_nu(z) = e^-z I_nu(z) (z/2)^-nu`` the classical kernel is

    W_t(x, y) = (2t)^-1 (4t)^-nu R_nu(z) exp(-(x - y)^2 / 4t),

which never forms ``e^z`` and stays finite for every positive input.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .measure import Flavor, NuVector, measure_balls_exact
from .specfun import bessel_i_reduced


class Branch(str, enum.Enum):
    CLASSICAL_W = "classical"
    EXOTIC_W = "exotic"
    CONJUGATED_K = "conjugated"


def _positive(*arrays):
    out = [np.asarray(a, dtype=float) for a in arrays]
    for a in out:
        if np.any(~(a > 0)):
            raise DomainError("kernel arguments t, x, y must be positive")
    return out


def _w_classical(nu, t, x, y):
    z = x * y / (2.0 * t)
    r = bessel_i_reduced(nu, z)
    d = x - y
    return np.exp(-d * d / (4.0 * t) - nu * np.log(4.0 * t)) * r / (2.0 * t)


def _k_conjugated(nu, t, x, y):
    # Independent arithmetic path from the defining formula:
    # y^nu x^-3nu I_nu(z) e^-(x^2+y^2)/4t with I_nu(z) = e^z (z/2)^nu R_nu(z).
    z = x * y / (2.0 * t)
    r = bessel_i_reduced(nu, z)
    d = x - y
    expo = nu * (np.log(y) - 3.0 * np.log(x) + np.log(0.5 * z)) - d * d / (4.0 * t)
    return np.exp(expo) * r / (2.0 * t)


def w_classical_1d(nu, t, x, y):
    """Classical Bessel heat kernel ``W^cls_{t,nu}(x, y)``, ``nu > -1``.

    Broadcasts over array arguments.
    """
    t, x, y = _positive(t, x, y)
    if not nu > -1:
        raise DomainError(f"classical kernel needs nu > -1, got {nu:g}")
    out = _w_classical(float(nu), t, x, y)
    return float(out) if out.ndim == 0 else out


def w_exotic_1d(nu_e, t, x, y):
    """Exotic kernel ``W^exo_{t,-nu_e}(x, y) = (xy)^(2 nu_e) W^cls_{t,nu_e}(x, y)``."""
    t, x, y = _positive(t, x, y)
    if not nu_e > 0:
        raise DomainError(f"exotic kernel needs nu_e > 0, got {nu_e:g}")
    out = (x * y) ** (2.0 * nu_e) * _w_classical(float(nu_e), t, x, y)
    return float(out) if out.ndim == 0 else out


def k_conjugated_1d(nu, t, x, y):
    """Conjugated kernel ``(2t)^-1 y^nu x^(-3 nu) I_nu(xy/2t) e^(-(x^2+y^2)/4t)``.

    Equal to ``(y/x)^(2 nu) W^cls_{t,nu}(x, y)``; it is the kernel of the exotic
    semigroup after the substitution ``f -> y^(-4 nu) f`` and is integrated
    against ``mu_nu``.
    """
    t, x, y = _positive(t, x, y)
    if not nu > 0:
        raise DomainError(f"conjugated kernel needs nu > 0, got {nu:g}")
    out = _k_conjugated(float(nu), t, x, y)
    return float(out) if out.ndim == 0 else out


_EVAL = {
    Branch.CLASSICAL_W: lambda nu, t, x, y: _w_classical(nu, t, x, y),
    Branch.EXOTIC_W: lambda nu, t, x, y: (x * y) ** (2.0 * nu) * _w_classical(nu, t, x, y),
    Branch.CONJUGATED_K: _k_conjugated,
}


@dataclass(frozen=True)
class KernelSpec:
    """Per-axis kernel branch and order."""

    nus: tuple
    branches: tuple

    def __post_init__(self):
        nus = tuple(float(v) for v in self.nus)
        brs = tuple(Branch(b) for b in self.branches)
        if len(nus) != len(brs) or not nus:
            raise DomainError("kernel spec needs one branch per axis")
        for v, b in zip(nus, brs):
            if b is Branch.CLASSICAL_W and not v > -1:
                raise DomainError(f"classical axis needs nu > -1, got {v:g}")
            if b is not Branch.CLASSICAL_W and not v > 0:
                raise DomainError(f"{b.value} axis needs nu > 0, got {v:g}")
        object.__setattr__(self, "nus", nus)
        object.__setattr__(self, "branches", brs)

    @classmethod
    def classical(cls, *nus):
        return cls(nus, (Branch.CLASSICAL_W,) * len(nus))

    @classmethod
    def conjugated(cls, *nus):
        return cls(nus, (Branch.CONJUGATED_K,) * len(nus))

    @classmethod
    def direct(cls, nu: NuVector):
        """Kernel of the semigroup attached to ``nu`` (classical or exotic axes)."""
        return cls(nu.values, tuple(Branch.EXOTIC_W if f is Flavor.EXOTIC else Branch.CLASSICAL_W
                                    for f in nu.flavors))

    @classmethod
    def conjugated_route(cls, nu: NuVector):
        """Exotic axes replaced by the conjugated kernel."""
        return cls(nu.values, tuple(Branch.CONJUGATED_K if f is Flavor.EXOTIC
                                    else Branch.CLASSICAL_W for f in nu.flavors))

    @property
    def dim(self) -> int:
        return len(self.nus)

    @property
    def measure_nu(self) -> tuple:
        """Effective measure parameters (``-nu`` on exotic axes)."""
        return tuple(-v if b is Branch.EXOTIC_W else v for v, b in zip(self.nus, self.branches))

    def measure(self) -> NuVector:
        return NuVector(self.nus, tuple(Flavor.EXOTIC if b is Branch.EXOTIC_W else Flavor.CLASSICAL
                                        for b in self.branches))

    def classical_companion(self) -> "KernelSpec":
        return KernelSpec.classical(*self.nus)

    def axis(self, i: int, t, x, y):
        """Vectorised evaluation of axis ``i``; inputs must already be positive."""
        return _EVAL[self.branches[i]](self.nus[i], t, x, y)

    def to_dict(self) -> dict:
        return {"nus": list(self.nus), "branches": [b.value for b in self.branches]}


def kernel_product(spec: KernelSpec, t, x, y):
    """Product kernel; ``x`` and ``y`` have shape ``(..., d)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != spec.dim or y.shape[-1] != spec.dim:
        raise DomainError(f"points must have {spec.dim} coordinates")
    t, x, y = _positive(t, x, y)
    out = 1.0
    for i in range(spec.dim):
        out = out * spec.axis(i, t, x[..., i], y[..., i])
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GaussianEnvelope:
    """Constants of ``C mu(B(x, sqrt t))^-1 exp(-|x - y|^2 / (c t))``."""

    bigC: float
    littleC: float

    def __post_init__(self):
        if not (self.bigC > 0 and self.littleC > 0):
            raise DomainError("envelope constants must be positive")


def gaussian_envelope(nu, env: GaussianEnvelope, t, x, y):
    """Envelope value and a flag marking points where the ball measure is infinite.

    Returns ``(value, infinite)``; ``value`` is 0 where ``infinite`` is set,
    since nothing can be bounded against an infinite-measure ball.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    if x.ndim == 0:
        x, y = x[None], y[None]
    ball = measure_balls_exact(nu, x, np.sqrt(t))
    d2 = np.sum((x - y) ** 2, axis=-1)
    infinite = ~np.isfinite(ball)
    with np.errstate(divide="ignore"):
        val = np.where(infinite, 0.0,
                       env.bigC / np.where(infinite, 1.0, ball) * np.exp(-d2 / (env.littleC * t)))
    if np.ndim(val) == 0:
        return float(val), bool(infinite)
    return val, infinite


def fit_envelope(kernel_values, nu, t, x, y, littleC: float, side: str = "upper") -> GaussianEnvelope:
    """Smallest (upper) or largest (lower) ``C`` for fixed ``c`` over samples.

    ``kernel_values`` are kernel evaluations at the sampled ``(t, x, y)``.
    """
    base, infinite = gaussian_envelope(nu, GaussianEnvelope(1.0, littleC), t, x, y)
    base = np.atleast_1d(base)
    kv = np.atleast_1d(kernel_values)
    ok = ~np.atleast_1d(infinite) & (base > 0)
    ratio = kv[ok] / base[ok]
    if ratio.size == 0:
        raise DomainError("no finite envelope samples")
    c = float(np.max(ratio)) if side == "upper" else float(np.min(ratio))
    if not (c > 0 and math.isfinite(c)):
        raise DomainError(f"envelope fit failed (C={c})")
    return GaussianEnvelope(c, littleC)
