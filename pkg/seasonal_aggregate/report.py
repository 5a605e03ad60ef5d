"""
Report formatting: output headers, aligned tables and key-value result files.
"""

from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError
from .model import format_scalar, params_to_kv


def output_header(version: str, config_hash: str, seed: int, subcommand: str = "") -> List[str]:
    """Comment lines every output file starts with."""
    lines = [f"# seasonal-aggregate {version}"]
    if subcommand:
        lines.append(f"# subcommand={subcommand}")
    lines.append(f"# config_hash={config_hash}")
    lines.append(f"# seed={seed}")
    return lines


def format_number(value: Any, digits: int = 6) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if np.isnan(value):
            return "nan"
        return f"{float(value):.{digits}g}"
    return str(value)


def format_table(headers: Sequence[str], rows: Iterable[Sequence[Any]], digits: int = 6) -> str:
    """Right-aligned text table with a dashed rule under the header."""
    body = [[format_number(v, digits) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in body:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in body]
    return "\n".join(lines)


def format_delimited(headers: Sequence[str], rows: Iterable[Sequence[Any]], sep: str = ",") -> str:
    """Machine-readable delimited table (full precision)."""
    lines = [sep.join(headers)]
    for row in rows:
        lines.append(sep.join(format_scalar(float(v)) if isinstance(v, (float, np.floating)) else format_scalar(v)
                              for v in row))
    return "\n".join(lines)


def format_kv(items: Iterable[Tuple[str, Any]]) -> str:
    """``key=value`` lines; floats keep full precision."""
    out = []
    for key, value in items:
        if isinstance(value, np.ndarray):
            value = value.tolist()
        if isinstance(value, (np.floating, np.integer)):
            value = value.item()
        out.append(f"{key}={value if isinstance(value, str) else format_scalar(value)}")
    return "\n".join(out)


def fit_items(fit) -> List[Tuple[str, Any]]:
    """Key-value rendering of a FitResult."""
    items: List[Tuple[str, Any]] = [
        ("kind", fit.kind.label),
        ("r", fit.R.r),
    ]
    items += [(f"R.{j}", v) for j, v in enumerate(fit.R.R, start=1)]
    items += [(k, v) for k, v in params_to_kv(fit.params)]
    items += [
        ("d+ΣD", fit.params.total_memory),
        ("neg_loglik", fit.neg_loglik),
        ("aic", fit.aic),
        ("n_used", fit.n_used),
        ("boundary", ",".join(fit.boundary) or "none"),
    ]
    items += [(f"warning.{i}", w) for i, w in enumerate(fit.warnings, start=1)]
    return items


def cell_rows(fit) -> List[List[Any]]:
    rows = []
    for cell in fit.cells:
        p = cell.params
        rows.append([
            cell.R.r,
            "/".join(str(v) for v in cell.R.R) or "-",
            p.d if p else float("nan"),
            ",".join(format_number(v) for v in p.D) if p and p.D else "-",
            cell.objective,
            "yes" if cell.converged else "no",
            ",".join(cell.boundary) or "-",
        ])
    return rows


CELL_HEADERS = ["r", "R", "d", "D", "objective", "converged", "boundary"]


def interval_rows(intervals) -> List[List[Any]]:
    return [[iv.name, iv.estimate, iv.se, iv.lower, iv.upper, iv.flag or "-"] for iv in intervals]


INTERVAL_HEADERS = ["parameter", "estimate", "se", "lower", "upper", "flag"]


def interval_items(intervals, prefix: str = "") -> List[Tuple[str, Any]]:
    items = []
    for iv in intervals:
        key = f"{prefix}{iv.name}"
        items += [(f"{key}.estimate", iv.estimate), (f"{key}.lower", iv.lower), (f"{key}.upper", iv.upper)]
        if iv.se is not None:
            items.append((f"{key}.se", iv.se))
        if iv.flag:
            items.append((f"{key}.flag", iv.flag))
    return items


def render(header: Sequence[str], *sections: str) -> str:
    parts = ["\n".join(header)] + [s for s in sections if s]
    return "\n".join(parts) + "\n"


def write_output(path: Optional[str], text: str) -> None:
    """Write to path, or stdout when path is None."""
    if path is None:
        print(text, end="")
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e
