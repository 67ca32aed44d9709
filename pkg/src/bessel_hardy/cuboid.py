"""Axis-aligned cuboids in the closed positive orthant."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Cuboid:
    """Product of closed intervals ``[lower_i, upper_i]``.

    Two cuboids compare equal when their bounds coincide; ``tag`` carries the
    generating index of a covering element and is ignored for equality.
    """

    lower: tuple
    upper: tuple
    tag: tuple | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise DomainError("cuboid bounds must have equal, positive length")
        for a, b in zip(lo, hi):
            if not (a >= 0 and b > a):
                raise DomainError(f"invalid cuboid side [{a}, {b}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_center(cls, center, radii, tag=None):
        return cls(tuple(z - r for z, r in zip(center, radii)),
                   tuple(z + r for z, r in zip(center, radii)), tag)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def center(self) -> tuple:
        return tuple(0.5 * (a + b) for a, b in zip(self.lower, self.upper))

    @property
    def radii(self) -> tuple:
        return tuple(0.5 * (b - a) for a, b in zip(self.lower, self.upper))

    @property
    def diameter(self) -> float:
        """Euclidean diameter."""
        return math.sqrt(sum((b - a) ** 2 for a, b in zip(self.lower, self.upper)))

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lower, self.upper))

    def star(self, k: int = 1, kappa: float = 17 / 16) -> "Cuboid":
        """Enlargement with every radius scaled by ``kappa**k``, clipped at 0."""
        s = kappa ** k
        z, r = self.center, self.radii
        lo = tuple(max(zi - s * ri, 0.0) for zi, ri in zip(z, r))
        hi = tuple(zi + s * ri for zi, ri in zip(z, r))
        return Cuboid(lo, hi, self.tag)

    def contains(self, x, tol: float = 0.0) -> bool:
        return all(a - tol <= xi <= b + tol for xi, a, b in zip(x, self.lower, self.upper))

    def contains_cuboid(self, other: "Cuboid", rel_tol: float = 1e-12) -> bool:
        tol = rel_tol * max(self.upper)
        return all(a - tol <= oa and ob <= b + tol for a, b, oa, ob
                   in zip(self.lower, self.upper, other.lower, other.upper))

    def intersects(self, other: "Cuboid") -> bool:
        """Closed intersection test (touching counts)."""
        return all(max(a, oa) <= min(b, ob) for a, b, oa, ob
                   in zip(self.lower, self.upper, other.lower, other.upper))

    def as_arrays(self):
        return np.array(self.lower), np.array(self.upper)

    def __repr__(self):
        sides = " x ".join(f"[{a:g}, {b:g}]" for a, b in zip(self.lower, self.upper))
        return f"Cuboid({sides})"
