"""CSV ingestion and the exact (non-private) statistic queries."""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ColumnMissing, EmptySeries, NoNumericRows

logger = logging.getLogger(__name__)


class QueryKind(str, enum.Enum):
    MAX = "max"
    MIN = "min"
    MEAN = "mean"
    MODE = "mode"
    VARIANCE = "variance"
    COUNT = "count"

    @classmethod
    def parse(cls, name) -> "QueryKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(f"unknown query {name!r}; expected one of {[q.value for q in cls]}")


@dataclass(frozen=True)
class Series:
    """Numeric values of one column plus the row bookkeeping."""

    values: np.ndarray
    n_rows: int
    dropped: int
    column: Optional[str]

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def max(self) -> float:
        return float(self.values.max())


def _parse(cell: str) -> Optional[float]:
    cell = cell.strip()
    if not cell:
        return None
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def ingest_csv(path, column: Optional[str] = None) -> Series:
    """Read a header-row CSV; keep the numeric cells of ``column``.

    Rows whose cell is blank or unparseable are dropped and counted. With no
    column only the rows are counted (enough for the count query).
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise NoNumericRows(f"{path} is empty")
        header = [h.strip() for h in header]
        if column is None:
            n = sum(1 for row in reader if any(c.strip() for c in row))
            return Series(np.empty(0), n, 0, None)
        if column not in header:
            raise ColumnMissing(f"column {column!r} not in {path.name} (have {header})")
        j = header.index(column)
        values, n_rows = [], 0
        for row in reader:
            if not any(c.strip() for c in row):
                continue
            n_rows += 1
            v = _parse(row[j]) if j < len(row) else None
            if v is not None:
                values.append(v)
    dropped = n_rows - len(values)
    if dropped:
        logger.info("dropped %d of %d rows with missing/non-numeric %r", dropped, n_rows, column)
    if not values:
        raise NoNumericRows(f"column {column!r} has no numeric rows")
    return Series(np.asarray(values, dtype=float), n_rows, dropped, column)


def _is_integral(values: np.ndarray) -> bool:
    return bool(np.all(np.floor(values) == values))


def mode(values: np.ndarray) -> float:
    """Most frequent value.

    Integer-valued data uses exact counts (ties go to the smallest value).
    Continuous data is binned with the Freedman-Diaconis rule and the
    centre of the fullest bin is returned.
    """
    if _is_integral(values):
        uniq, counts = np.unique(values, return_counts=True)
        return float(uniq[np.argmax(counts)])
    counts, edges = np.histogram(values, bins="fd")
    i = int(np.argmax(counts))
    return float(0.5 * (edges[i] + edges[i + 1]))


def run_query(kind: QueryKind, series: Series) -> float:
    kind = QueryKind.parse(kind)
    if kind is QueryKind.COUNT:
        n = series.n_rows if series.column is None else len(series.values)
        if n == 0:
            raise EmptySeries("no rows to count")
        return float(n)
    v = series.values
    if v.size == 0:
        raise EmptySeries("series is empty")
    if kind is QueryKind.MAX:
        return float(v.max())
    if kind is QueryKind.MIN:
        return float(v.min())
    if kind is QueryKind.MEAN:
        return float(v.mean())
    if kind is QueryKind.MODE:
        return mode(v)
    return float(v.var())


def auto_sensitivity(kind: QueryKind, series: Series) -> float:
    """Heuristic sensitivity from the observed range.

    max/min/mode: range; mean: range/n; variance: range^2/n; count: 1.
    This looks at the data, so it is a convenience for experiments rather
    than a private choice; pass explicit values where it matters.
    """
    kind = QueryKind.parse(kind)
    if kind is QueryKind.COUNT:
        return 1.0
    v = series.values
    if v.size == 0:
        raise EmptySeries("series is empty")
    rng = float(v.max() - v.min()) or 1.0
    n = v.size
    if kind is QueryKind.MEAN:
        return rng / n
    if kind is QueryKind.VARIANCE:
        return rng * rng / n
    return rng


def auto_bounds(kind: QueryKind, series: Series, pad: float = 0.01) -> tuple[float, float]:
    """Data-derived [l, u] for a query, padded by ``pad`` of its span."""
    kind = QueryKind.parse(kind)
    if kind is QueryKind.COUNT:
        n = run_query(kind, series)
        return n * (1.0 - pad), n * (1.0 + pad)
    v = series.values
    if v.size == 0:
        raise EmptySeries("series is empty")
    lo, hi = float(v.min()), float(v.max())
    if kind is QueryKind.VARIANCE:
        lo, hi = 0.0, (hi - lo) ** 2 / 4.0
    span = (hi - lo) or max(abs(hi), 1.0)
    return lo - pad * span, hi + pad * span
