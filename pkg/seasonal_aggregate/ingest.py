"""
Series files and timestamp-log ingestion.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError

logger = logging.getLogger(__name__)

_SEPARATOR = re.compile(r"[,\t ]+")


def _data_lines(text: str) -> Iterable[Tuple[int, str]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e


def parse_series(text: str, source: str = "<series>") -> np.ndarray:
    """
    Parse one value per line or ``time,value`` pairs (comma, tab or space
    separated); blank lines and ``#`` comments are skipped.

    Raises:
        InputError: On an unparseable line (with its line number) or no data
    """
    values: List[float] = []
    for lineno, line in _data_lines(text):
        fields = _SEPARATOR.split(line)
        if len(fields) > 2:
            raise InputError(f"{source}:{lineno}: expected a value or time,value pair, got {line!r}")
        try:
            value = float(fields[-1])
        except ValueError:
            raise InputError(f"{source}:{lineno}: not a number: {fields[-1]!r}") from None
        if not np.isfinite(value):
            raise InputError(f"{source}:{lineno}: non-finite value {fields[-1]!r}")
        values.append(value)
    if not values:
        raise InputError(f"{source}: no data")
    return np.asarray(values)


def read_series(path: str) -> np.ndarray:
    return parse_series(_read_text(path), source=str(path))


def format_series(values: Sequence[float], header: Sequence[str] = ()) -> str:
    lines = [f"# {h}" if not h.startswith("#") else h for h in header]
    lines += [repr(float(v)) for v in values]
    return "\n".join(lines) + "\n"


def write_series(path: Optional[str], values: Sequence[float], header: Sequence[str] = ()) -> str:
    """
    Write the header block then one value per line.

    Args:
        path: Destination; None writes nothing and only returns the text
        values: Series values
        header: Header lines (``# `` is prepended when missing)

    Returns:
        The text written
    """
    text = format_series(values, header)
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as e:
            raise InputError(f"cannot write {path}: {e}") from e
    return text


@dataclass(frozen=True)
class IngestResult:
    """Window counts with the metadata written next to the series."""

    values: np.ndarray
    counts: np.ndarray
    window_seconds: float
    start: float
    log_transform: bool

    @property
    def n_windows(self) -> int:
        return self.counts.size

    def metadata(self) -> List[Tuple[str, str]]:
        return [
            ("window_seconds", repr(float(self.window_seconds))),
            ("start_epoch", repr(float(self.start))),
            ("n_windows", str(self.n_windows)),
            ("log_transform", "true" if self.log_transform else "false"),
            ("transform", "log(count+1)" if self.log_transform else "none"),
        ]


def parse_timestamps(text: str, source: str = "<timestamps>") -> np.ndarray:
    """
    One epoch-seconds timestamp per line, in any order.

    Raises:
        InputError: On an unparseable line (with its line number) or empty input
    """
    stamps = []
    for lineno, line in _data_lines(text):
        try:
            stamps.append(float(line))
        except ValueError:
            raise InputError(f"{source}:{lineno}: not a timestamp: {line!r}") from None
    if not stamps:
        raise InputError(f"{source}: no timestamps")
    return np.asarray(stamps)


def count_windows(timestamps: Sequence[float], window_seconds: float, log_transform: bool = False) -> IngestResult:
    """
    Events per consecutive window starting at the earliest timestamp.

    Empty windows count 0; the optional transform is log(count + 1).
    """
    if window_seconds <= 0:
        raise InputError(f"window_seconds must be positive, got {window_seconds}")
    t = np.asarray(timestamps, dtype=float)
    if t.size == 0:
        raise InputError("no timestamps")
    start = float(t.min())
    index = np.floor((t - start) / window_seconds).astype(np.int64)
    counts = np.bincount(index).astype(float)
    values = np.log1p(counts) if log_transform else counts
    logger.info("counted %d events in %d windows of %gs", t.size, counts.size, window_seconds)
    return IngestResult(values, counts, float(window_seconds), start, bool(log_transform))


def ingest(
    path: str,
    window_seconds: float,
    log_transform: bool = False,
    output: Optional[str] = None,
    header: Sequence[str] = (),
) -> IngestResult:
    """
    Timestamp log → aggregate series file plus ``<output>.meta`` sidecar.

    Args:
        path: One epoch-seconds timestamp per line
        window_seconds: Window length
        log_transform: Apply log(count + 1)
        output: Series file to write (nothing written when None)
        header: Header lines for both files

    Returns:
        IngestResult
    """
    result = count_windows(parse_timestamps(_read_text(path), str(path)), window_seconds, log_transform)
    if output is not None:
        write_series(output, result.values, header)
        meta = [f"# {h}" if not h.startswith("#") else h for h in header]
        meta += [f"{k}={v}" for k, v in result.metadata()]
        try:
            Path(f"{output}.meta").write_text("\n".join(meta) + "\n", encoding="utf-8")
        except OSError as e:
            raise InputError(f"cannot write {output}.meta: {e}") from e
    return result
