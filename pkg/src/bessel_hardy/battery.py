"""Condition batteries assembled from a :class:`Config`.

Single conditions run on the exotic factor when the configuration has one
(the conjugated kernel ``K_{t,nu_e}`` with the dyadic covering, once per
distinct ``nu_e``); otherwise on the classical product kernel with the
configured covering.
"""

from __future__ import annotations

from .config import Config
from .covering import DyadicCovering, make_covering
from .errors import ConfigError
from .kernel import KernelSpec
from .verify import (CONDITIONS, check_A0, check_A1, check_A1p, check_A2, check_A2p, check_a3_a4,
                     check_lemma_integrable, check_prop_locnonloc, check_sup_t_bound)


def _targets(cfg: Config):
    ex = sorted({v for v, f in zip(cfg.nu, cfg.flavors) if f == "exotic"})
    if ex:
        return [(KernelSpec.conjugated(v), DyadicCovering(cfg.kappa)) for v in ex]
    dim = len(cfg.nu)
    kind = cfg.covering if cfg.covering in ("dyadic", "box") else ("dyadic" if dim == 1 else "box")
    if kind == "dyadic" and dim > 1:
        kind = "box"
    return [(KernelSpec.classical(*cfg.nu), make_covering(kind, dim, kappa=cfg.kappa))]


def _axis_params(cfg: Config):
    """Per-axis classical parameters of the measure used by the checks (``+nu_e`` on exotic axes)."""
    return sorted(set(float(v) for v in cfg.nu))


def run_condition(cfg: Config, name: str) -> list:
    """Reports for one condition id."""
    if name not in CONDITIONS:
        raise ConfigError(f"unknown condition {name!r}; choose from {CONDITIONS} or 'all'")
    levels = tuple(cfg.levels)
    gamma = cfg.resolved_gamma
    deltas = cfg.resolved_deltas
    for dl in deltas:
        if not -gamma < dl < gamma:
            raise ConfigError(f"delta {dl} outside (-gamma, gamma) with gamma = {gamma}")
    reps = []
    if name in ("A0", "A1", "A2", "A1p", "A2p", "a3a4"):
        for spec, cov in _targets(cfg):
            s = cfg.check_settings(cov.dim)
            if name == "A0":
                reps.append(check_A0(spec, cov, levels, s))
            elif name == "A1":
                reps.append(check_A1(spec, cov, gamma, deltas, levels, s))
            elif name == "A2":
                reps.append(check_A2(spec, cov, gamma, [v for v in deltas if v >= 0], levels, s))
            elif name == "A1p":
                reps.append(check_A1p(spec, cov, levels, s))
            elif name == "A2p":
                reps.append(check_A2p(spec, cov, levels, s))
            else:
                reps.append(check_a3_a4(spec, cov, levels, s))
    elif name == "lemma24":
        s = cfg.check_settings(1)
        cov = DyadicCovering(cfg.kappa)
        for v in _axis_params(cfg):
            delta = min(0.2, 0.5 * min(0.5, v + 1))
            reps.append(check_lemma_integrable((v,), cov, delta, levels=levels, settings=s))
    elif name == "supT":
        s = cfg.check_settings(1)
        cov = DyadicCovering(cfg.kappa)
        for v in _axis_params(cfg):
            reps.append(check_sup_t_bound(v, min(0.5, v + 1), cov, levels, s))
    elif name == "prop42":
        ex = [v for v, f in zip(cfg.nu, cfg.flavors) if f == "exotic"]
        nu1 = [v for v, f in zip(cfg.nu, cfg.flavors) if f == "classical"]
        if len(ex) != 1 or len(nu1) > 1:
            raise ConfigError("prop42 runs for one exotic axis and at most one classical axis")
        s = cfg.check_settings(1 + len(nu1))
        a1 = list(deltas)
        a2 = [v for v in deltas if v >= 0]
        reps.extend(check_prop_locnonloc(KernelSpec.conjugated(ex[0]), DyadicCovering(cfg.kappa),
                                         len(nu1), nu1, gamma, a1, a2, levels, s))
    return reps


def battery_order(cfg: Config):
    names = ["A0", "A1", "A2", "A1p", "A2p", "a3a4", "lemma24", "supT"]
    ex = [f for f in cfg.flavors if f == "exotic"]
    if len(ex) == 1 and len(cfg.flavors) <= 2:
        names.append("prop42")
    return names


def run_all(cfg: Config) -> list:
    out = []
    for name in battery_order(cfg):
        out.extend(run_condition(cfg, name))
    return out
