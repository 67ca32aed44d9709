"""Markdown and CSV rendering of JSON reports."""

from __future__ import annotations

from .errors import ConfigError
from .serialize import as_float, csv_text, lambda_histogram


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    try:
        x = as_float(v)
    except (TypeError, ValueError):
        return str(v)
    return format(x, ".6g")


def _condition_section(rep: dict):
    for key in ("condition", "entries"):
        if key not in rep:
            raise ConfigError(f"condition report lacks {key!r}")
    lines = [f"## {rep['condition']} on {rep.get('covering', {}).get('type', '?')}", ""]
    kern = rep.get("kernel") or {}
    if kern:
        lines.append("Kernel: " + ", ".join(f"{k} = {_fmt(v)}" for k, v in kern.items()))
        lines.append("")
    lines.append("| level | group | statistic | rel. error |")
    lines.append("|---|---|---|---|")
    rows = []
    for e in rep["entries"]:
        group = e.get("part", e.get("delta"))
        group = "all" if group is None else group
        lines.append(f"| {e['level']} | {_fmt(group)} | {_fmt(e['statistic'])} | "
                     f"{_fmt(e.get('rel_error'))} |")
        rows.append([e["level"], group, as_float(e["statistic"]), as_float(e.get("rel_error", 0.0))])
    lines.append("")
    lines.append("| group | constant | spread |")
    lines.append("|---|---|---|")
    for k in rep.get("constants", {}):
        lines.append(f"| {k} | {_fmt(rep['constants'][k])} | {_fmt(rep.get('spreads', {}).get(k))} |")
    lines.append("")
    verdict = "PASS" if rep.get("passed") else "FAIL"
    lines.append(f"Result: **{verdict}** (spread bound {_fmt(rep.get('spread_bound'))})")
    for n in rep.get("notes", []):
        lines.append(f"- {n}")
    lines.append("")
    table = csv_text(["level", "group", "statistic", "rel_error"], rows)
    return lines, table


def render(doc: dict):
    """Return ``(markdown, {name: csv_text})`` for a report document."""
    if not doc:
        return "# Report\n\nNo results.\n", {}
    kind = doc.get("kind")
    result = doc.get("result")
    lines = ["# Report", ""]
    if kind:
        lines += [f"Kind: {kind}", ""]
    tables = {}
    if kind in ("condition_reports", "condition_report"):
        reps = result.get("reports", []) if isinstance(result, dict) else result
        if not isinstance(reps, list):
            raise ConfigError("condition reports must be a list")
        if not reps:
            lines.append("No results.")
        for i, rep in enumerate(reps):
            sec, table = _condition_section(rep)
            lines += sec
            tables[f"{i:02d}_{rep['condition'].replace(':', '_')}.csv"] = table
        if isinstance(result, dict) and "passed" in result:
            lines.append(f"Overall: **{'PASS' if result['passed'] else 'FAIL'}**")
    elif kind == "decomposition":
        if not isinstance(result, dict) or "terms" not in result:
            raise ConfigError("decomposition report lacks terms")
        lines.append(f"Atoms: {result.get('n_terms', len(result['terms']))} "
                     f"(local {result.get('local', 0)}, cancellative {result.get('cancellative', 0)})")
        lines.append(f"Sum of |lambda|: {_fmt(result.get('total_l1'))}")
        header, rows = lambda_histogram(result)
        tables["lambda_histogram.csv"] = csv_text(header, rows)
    elif kind == "h1norm":
        lines.append(f"Direct: {_fmt(result.get('direct'))} +- {_fmt(result.get('direct_error'))}")
        if "conjugated" in result:
            lines.append(f"Conjugated: {_fmt(result.get('conjugated'))} "
                         f"+- {_fmt(result.get('conjugated_error'))}")
            lines.append(f"Routes agree: {_fmt(result.get('routes_agree'))}")
    else:
        if kind is None and result is None:
            return "# Report\n\nNo results.\n", {}
        raise ConfigError(f"unknown report kind {kind!r}")
    return "\n".join(lines).rstrip() + "\n", tables
