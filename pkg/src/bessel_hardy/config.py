"""Run configuration: loading, validation, defaults and command-line overrides.

A config file is a JSON object; every key is optional.  Example::

    {
      "nu": [0.5, 1.0], "flavors": ["classical", "exotic"],
      "covering": {"type": "QB", "levels": [-3, 3], "kappa": 1.0625},
      "gamma": null, "deltas": null, "depth": 0, "seed": 0, "threads": 1,
      "quadrature": {"points_per_decade": 16},
      "checks": {"spread_bound": 10.0},
      "checks_2d": {"y_grading": 10}
    }

``gamma = null`` resolves to ``min(0.3, nu_e / 2)`` (smallest exotic or
classical parameter when there is no exotic axis); ``deltas = null``
resolves to ``{-gamma/2, 0, gamma/2}``.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace

from .covering import DEFAULT_KAPPA
from .errors import ConfigError
from .measure import NuVector
from .quadrature import QuadratureSpec
from .serialize import nu_from_lists
from .verify import CheckSettings, default_gamma

COVERING_TYPES = ("dyadic", "box", "cylinder", "QB")
THREADS_ENV = "BESSEL_HARDY_THREADS"

# coarser spatial grading for two-dimensional condition checks
DEFAULT_CHECKS_2D = {"y_grading": 10, "doublings": 12, "edge_grading": 4, "points_per_decade": 8}


@dataclass
class Config:
    nu: tuple = (0.5, 1.0)
    flavors: tuple = ("classical", "exotic")
    covering: str = "QB"
    levels: tuple = (-3, 3)
    kappa: float = DEFAULT_KAPPA
    gamma: float | None = None
    deltas: tuple | None = None
    depth: int = 0
    seed: int = 0
    threads: int = 1
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    checks: CheckSettings = field(default_factory=CheckSettings)
    checks_2d: dict = field(default_factory=lambda: dict(DEFAULT_CHECKS_2D))
    out: str | None = None

    def __post_init__(self):
        self.validate()

    # -- derived ----------------------------------------------------------
    @property
    def nu_vector(self) -> NuVector:
        return nu_from_lists(self.nu, self.flavors)

    @property
    def d1(self) -> int:
        return sum(1 for f in self.flavors if f == "classical")

    @property
    def d2(self) -> int:
        return sum(1 for f in self.flavors if f == "exotic")

    @property
    def resolved_gamma(self) -> float:
        if self.gamma is not None:
            return float(self.gamma)
        ex = [v for v, f in zip(self.nu, self.flavors) if f == "exotic"]
        base = min(ex) if ex else min(v for v in self.nu)
        if base <= 0:
            raise ConfigError("cannot derive gamma from a nonpositive nu; set gamma explicitly")
        return default_gamma(base)

    @property
    def resolved_deltas(self) -> tuple:
        if self.deltas is not None:
            return tuple(float(v) for v in self.deltas)
        g = self.resolved_gamma
        return (-g / 2, 0.0, g / 2)

    def check_settings(self, dim: int = 1) -> CheckSettings:
        s = replace(self.checks, seed=self.seed, threads=self.threads)
        if dim >= 2:
            s = replace(s, **self.checks_2d)
        return s

    # -- validation -------------------------------------------------------
    def validate(self):
        if len(self.nu) == 0:
            raise ConfigError("nu must have at least one entry")
        if len(self.nu) != len(self.flavors):
            raise ConfigError("nu and flavors must have the same length")
        try:
            self.nu_vector
        except ValueError as exc:
            raise ConfigError(f"invalid nu vector: {exc}") from exc
        if self.covering not in COVERING_TYPES:
            raise ConfigError(f"covering must be one of {COVERING_TYPES}")
        lo, hi = self.levels
        if int(lo) != lo or int(hi) != hi or lo > hi:
            raise ConfigError("levels must be integers with lo <= hi")
        if not 1.0 < self.kappa < 2.0:
            raise ConfigError("kappa must lie in (1, 2)")
        if self.gamma is not None and not 0 < self.gamma < 1:
            raise ConfigError("gamma must lie in (0, 1)")
        if self.depth < 0 or self.depth > 12:
            raise ConfigError("depth must lie in [0, 12]")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        bad = set(self.checks_2d) - {f.name for f in fields(CheckSettings)}
        if bad:
            raise ConfigError(f"unknown checks_2d keys {sorted(bad)}")

    # -- (de)serialisation ------------------------------------------------
    def to_dict(self) -> dict:
        return {"nu": list(self.nu), "flavors": list(self.flavors), "covering": self.covering,
                "levels": list(self.levels), "kappa": self.kappa, "gamma": self.gamma,
                "resolved_gamma": _safe(lambda: self.resolved_gamma),
                "deltas": None if self.deltas is None else list(self.deltas),
                "depth": self.depth, "seed": self.seed, "threads": self.threads,
                "quadrature": self.quadrature.to_dict(),
                "checks": {k: v for k, v in asdict(self.checks).items() if k not in ("seed", "threads")},
                "checks_2d": dict(self.checks_2d)}

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        d = dict(d)
        d.pop("schema", None)
        d.pop("resolved_gamma", None)
        kw = {}
        cov = d.pop("covering", None)
        if isinstance(cov, dict):
            if "type" in cov:
                kw["covering"] = cov["type"]
            if "levels" in cov:
                kw["levels"] = tuple(cov["levels"])
            if "kappa" in cov:
                kw["kappa"] = float(cov["kappa"])
        elif cov is not None:
            kw["covering"] = str(cov)
        for key in ("levels", "nu", "flavors", "deltas"):
            if key in d and d[key] is not None:
                kw[key] = tuple(d.pop(key))
            elif key in d:
                kw[key] = d.pop(key)
        try:
            if "quadrature" in d:
                kw["quadrature"] = QuadratureSpec(**d.pop("quadrature"))
            if "checks" in d:
                kw["checks"] = CheckSettings(**d.pop("checks"))
        except TypeError as exc:
            raise ConfigError(f"unknown setting: {exc}") from exc
        if "checks_2d" in d:
            kw["checks_2d"] = {**DEFAULT_CHECKS_2D, **d.pop("checks_2d")}
        for key in ("kappa", "gamma", "depth", "seed", "threads", "out"):
            if key in d:
                kw[key] = d.pop(key)
        if d:
            raise ConfigError(f"unknown config keys {sorted(d)}")
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _safe(fn):
    try:
        return fn()
    except ConfigError:
        return None


def load_config(path: str | None) -> Config:
    if path is None:
        return Config()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return Config.from_dict(data)


def apply_overrides(cfg: Config, **kw) -> Config:
    """Return a copy with the non-``None`` overrides applied and re-validated."""
    upd = {k: v for k, v in kw.items() if v is not None}
    if "threads" not in upd and os.environ.get(THREADS_ENV) and cfg.threads == 1:
        try:
            upd["threads"] = int(os.environ[THREADS_ENV])
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from exc
    if "nu" in upd and "flavors" not in upd and len(upd["nu"]) != len(cfg.flavors):
        upd["flavors"] = ("classical",) * len(upd["nu"])
    try:
        return replace(cfg, **upd)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
