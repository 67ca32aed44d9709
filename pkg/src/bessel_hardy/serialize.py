"""JSON and CSV input/output with a fixed float format.

Floats are written with 17 significant digits so values round-trip exactly.
JSON has no literal for non-finite numbers; they are written as the strings
``"inf"``, ``"-inf"`` and ``"nan"`` and read back by :func:`as_float`.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from datetime import datetime, timezone

import numpy as np

from .atoms import Atom, AtomicDecomposition
from .cuboid import Cuboid
from .errors import ConfigError, DomainError
from .grid import GridFunction
from .measure import Flavor, NuVector

SCHEMA = 1
VOLATILE_KEYS = ("generated",)


def format_float(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    s = format(v, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def to_plain(obj):
    """Convert dataclasses, numpy values and enums to JSON-ready Python objects."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, str):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if obj is None:
        return None
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return to_plain(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text (insertion-ordered keys, 17-digit floats)."""
    return _dump(to_plain(obj), 0, indent) + "\n"


def _dump(o, level, indent):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(o, dict):
        if not o:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(v, level + 1, indent)}" for k, v in o.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(o, list):
        if not o:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in o):
            return "[" + ", ".join(_dump(v, level + 1, indent) for v in o) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, level + 1, indent) for v in o) + "\n" + end + "]"
    if isinstance(o, bool) or o is None:
        return json.dumps(o)
    if isinstance(o, int):
        return str(o)
    if isinstance(o, float):
        return format_float(o)
    return json.dumps(o)


def as_float(v) -> float:
    if isinstance(v, str):
        if v in ("inf", "+inf"):
            return math.inf
        if v == "-inf":
            return -math.inf
        if v == "nan":
            return math.nan
        try:
            return float(v)
        except ValueError:
            raise DomainError(f"not a number: {v!r}") from None
    return float(v)


def envelope(kind: str, result, config=None, timestamp: bool = True) -> dict:
    """Versioned report wrapper that embeds the resolved config."""
    out = {"schema": SCHEMA, "kind": kind}
    if timestamp:
        out["generated"] = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    out["config"] = to_plain(config) if config is not None else None
    out["result"] = to_plain(result)
    return out


def strip_volatile(doc):
    """Copy of a report without fields excluded from determinism checks."""
    if isinstance(doc, dict):
        return {k: strip_volatile(v) for k, v in doc.items() if k not in VOLATILE_KEYS}
    if isinstance(doc, list):
        return [strip_volatile(v) for v in doc]
    return doc


def load_report(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("report must be a JSON object")
    if doc and doc.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError(f"unsupported schema {doc.get('schema')!r}")
    return doc


# ---------------------------------------------------------------------------
# CSV

def csv_text(header, rows) -> str:
    """RFC 4180 CSV (CRLF line endings, minimal quoting)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(v) for v in r])
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return v


def grid_to_csv(f: GridFunction, include_zero: bool = False) -> str:
    """One row per cell: ``x1_lo, x1_hi, ..., value``."""
    header = [f"x{i + 1}_{s}" for i in range(f.dim) for s in ("lo", "hi")] + ["value"]
    rows = []
    for idx in np.ndindex(*f.shape):
        v = float(f.values[idx])
        if v == 0 and not include_zero:
            continue
        row = []
        for e, j in zip(f.edges, idx):
            row += [float(e[j]), float(e[j + 1])]
        rows.append(row + [v])
    return csv_text(header, rows)


def grid_from_csv(text: str, nu: NuVector) -> GridFunction:
    """Inverse of :func:`grid_to_csv`; missing cells are zero."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration as exc:
        raise DomainError("empty grid CSV") from exc
    header = [h.strip() for h in header]
    if len(header) < 3 or header[-1] != "value" or (len(header) - 1) % 2:
        raise DomainError("grid CSV header must be x1_lo,x1_hi,...,value")
    d = (len(header) - 1) // 2
    if d != nu.dim:
        raise DomainError(f"grid CSV has {d} axes but nu has {nu.dim}")
    rows = [[as_float(c) for c in r] for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise DomainError("grid CSV has no cells")
    arr = np.array(rows, dtype=float)
    edges = [np.unique(arr[:, 2 * i: 2 * i + 2]) for i in range(d)]
    values = np.zeros(tuple(len(e) - 1 for e in edges))
    for r in arr:
        sl = []
        for i, e in enumerate(edges):
            a = int(np.searchsorted(e, r[2 * i]))
            b = int(np.searchsorted(e, r[2 * i + 1]))
            if b <= a:
                raise DomainError("grid CSV cell with empty extent")
            sl.append(slice(a, b))
        values[tuple(sl)] = r[-1]
    return GridFunction(tuple(edges), values, nu)


# ---------------------------------------------------------------------------
# nu vectors, cuboids, atoms

def nu_from_lists(values, flavors=None) -> NuVector:
    values = tuple(float(v) for v in values)
    if flavors is None:
        flavors = ("classical",) * len(values)
    if len(flavors) != len(values):
        raise ConfigError("nu and flavors must have the same length")
    try:
        fl = tuple(Flavor(str(f).lower()) for f in flavors)
    except ValueError as exc:
        raise ConfigError(f"unknown flavor in {list(flavors)}") from exc
    return NuVector(values, fl)


def cuboid_from(pair) -> Cuboid:
    return Cuboid(tuple(as_float(v) for v in pair[0]), tuple(as_float(v) for v in pair[1]))


def atom_to_dict(a: Atom) -> dict:
    d = a.to_dict()
    d["nu"] = a.nu.to_dict()
    if a.values is not None:
        d["edges"] = [e.tolist() for e in a.values.edges]
        d["values"] = a.values.values.tolist()
    return d


def atom_from_dict(d: dict, nu: NuVector | None = None) -> Atom:
    if nu is None:
        if "nu" not in d:
            raise ConfigError("atom needs a nu vector")
        nu = nu_from_lists(d["nu"]["values"], d["nu"]["flavors"])
    host, support = cuboid_from(d["host"]), cuboid_from(d["support"])
    vals = None
    if d.get("values") is not None:
        vals = GridFunction(tuple(np.array(e, dtype=float) for e in d["edges"]),
                            np.array(d["values"], dtype=float), nu)
    return Atom(d["kind"], host, support, nu, vals)


def decomposition_to_dict(dec: AtomicDecomposition) -> dict:
    return {"total_l1": dec.total_l1, "n_terms": len(dec), **dec.counts(),
            "terms": [{"lambda": lam, **atom_to_dict(a)} for lam, a in dec.terms]}


def lambda_histogram(dec_dict: dict, bins: int = 10):
    """``(header, rows)`` of a log10 |lambda| histogram."""
    lams = np.array([abs(as_float(t["lambda"])) for t in dec_dict.get("terms", [])])
    lams = lams[lams > 0]
    header = ["log10_lambda_lo", "log10_lambda_hi", "count"]
    if lams.size == 0:
        return header, []
    lg = np.log10(lams)
    lo, hi = math.floor(lg.min()), math.ceil(lg.max())
    if hi == lo:
        hi = lo + 1
    counts, edges = np.histogram(lg, bins=bins, range=(lo, hi))
    return header, [[float(edges[i]), float(edges[i + 1]), int(counts[i])] for i in range(bins)]
