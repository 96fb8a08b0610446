"""Sweep runner: (query, mechanism, epsilon) cells with derived seeds."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .. import analysis, baselines, mechanism, shapes
from ..domain import PrivacyParams
from ..errors import CompositeDPError, InvalidParameter
from ..optimizer import OptimizerConfig
from .data import QueryKind, Series, auto_bounds, auto_sensitivity, ingest_csv, run_query
from .metrics import compute_metrics

logger = logging.getLogger(__name__)

DEFAULT_EPSILONS = (0.2, 0.3, 0.4, 0.5, 1.0, 2.0, 3.0, 5.0)
DEFAULT_MECHANISMS = shapes.BUILTIN_PAIRS + tuple(k.value for k in baselines.BaselineKind)
ANCHORS = ("value", "center", "lower")
FORMATS = ("table", "jsonl", "csv")

ROW_FIELDS = (
    "dataset", "query", "mechanism", "epsilon", "sensitivity", "true_value",
    "lower", "upper", "repetitions", "re", "mse", "al_mean", "al_q1", "al_median",
    "al_q3", "al_max", "al_outliers", "al_absolute", "bias_rate", "variance",
    "h1_rate", "h2_rate", "out_of_bounds", "status",
)

PerQuery = Union[str, float, dict]


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark sweep.

    ``sensitivity`` and ``bounds`` are either a single setting for every
    query or a ``{query: setting}`` mapping; a setting is ``"auto"`` or an
    explicit value (a ``[l, u]`` pair for bounds).

    ``anchor`` places the linked output range of the composite mechanisms:
    ``"value"`` centres it on the true answer, ``"center"`` on the middle of
    ``[l, u]`` and ``"lower"`` starts it at ``l``. Only raw answers inside
    the accepted window (one sensitivity wide) can be published; cells that
    fall outside are reported with an error status.
    """

    dataset: str
    column: Optional[str] = None
    queries: tuple = ("count",)
    epsilons: tuple = DEFAULT_EPSILONS
    mechanisms: tuple = DEFAULT_MECHANISMS
    repetitions: int = 1000
    sensitivity: PerQuery = "auto"
    bounds: PerQuery = "auto"
    delta: float = 1e-5
    L: float = 1.0
    seed: int = 0
    output_format: str = "table"
    anchor: str = "value"
    jobs: int = 1
    worst_case: bool = False
    include_timing: bool = False

    def __post_init__(self):
        set_ = lambda name, v: object.__setattr__(self, name, v)  # noqa: E731
        set_("queries", tuple(QueryKind.parse(q).value for q in _as_tuple(self.queries)))
        set_("epsilons", tuple(float(e) for e in _as_tuple(self.epsilons)))
        set_("mechanisms", tuple(_canonical_mechanism(m) for m in _as_tuple(self.mechanisms)))
        if isinstance(self.sensitivity, dict):
            set_("sensitivity", {QueryKind.parse(q).value: v for q, v in self.sensitivity.items()})
        if isinstance(self.bounds, dict):
            set_("bounds", {QueryKind.parse(q).value: v for q, v in self.bounds.items()})
        if self.repetitions < 1:
            raise InvalidParameter("repetitions must be >= 1")
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            raise InvalidParameter("epsilons must be positive")
        if not self.queries or not self.mechanisms:
            raise InvalidParameter("need at least one query and one mechanism")
        if self.anchor not in ANCHORS:
            raise InvalidParameter(f"anchor must be one of {ANCHORS}")
        if self.output_format not in FORMATS:
            raise InvalidParameter(f"output_format must be one of {FORMATS}")
        if self.jobs < 1:
            raise InvalidParameter("jobs must be >= 1")
        if self.column is None and any(q != "count" for q in self.queries):
            raise InvalidParameter("queries other than count need a column")

    def setting(self, name: str, query: str):
        value = getattr(self, name)
        return value.get(query, "auto") if isinstance(value, dict) else value

    @classmethod
    def from_mapping(cls, data: dict) -> "BenchConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidParameter(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def _as_tuple(v) -> tuple:
    if isinstance(v, str):
        return tuple(x for x in (s.strip() for s in v.split(",")) if x)
    if isinstance(v, (int, float)):
        return (v,)
    return tuple(v)


def _canonical_mechanism(name: str) -> str:
    name = str(name).strip()
    if name.upper() in shapes.BUILTIN_PAIRS:
        return name.upper()
    try:
        return baselines.BaselineKind.parse(name).value
    except ValueError:
        raise InvalidParameter(f"unknown mechanism {name!r}")


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)

    def to_jsonl(self) -> str:
        return "".join(json.dumps({k: _jsonable(r.get(k)) for k in _fields(r)}) + "\n"
                       for r in self.rows)

    def to_csv(self) -> str:
        """Long format: one (cell, metric, value) per line."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = ("dataset", "query", "mechanism", "epsilon")
        w.writerow(keys + ("metric", "value"))
        for r in self.rows:
            for k in _fields(r):
                if k in keys:
                    continue
                w.writerow([r[x] for x in keys] + [k, _fmt_csv(r[k])])
        return buf.getvalue()

    def to_table(self) -> str:
        cols = ("query", "mechanism", "epsilon", "re", "mse", "al_mean", "al_max",
                "bias_rate", "variance", "h1_rate", "h2_rate", "out_of_bounds", "status")
        if self.rows and "wall_time" in self.rows[0]:
            cols += ("wall_time",)
        cells = [[_fmt_table(r.get(c)) for c in cols] for r in self.rows]
        widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
        line = lambda xs: "  ".join(x.rjust(w) for x, w in zip(xs, widths))  # noqa: E731
        return "\n".join([line(cols), line(["-" * w for w in widths])]
                         + [line(row) for row in cells]) + "\n"

    def serialize(self, fmt: str) -> str:
        return {"table": self.to_table, "jsonl": self.to_jsonl, "csv": self.to_csv}[fmt]()


def _fields(row: dict) -> tuple:
    return ROW_FIELDS + (("wall_time",) if "wall_time" in row else ())


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _fmt_csv(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def _fmt_table(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def cell_seed(seed: int, query: str, mech: str, epsilon: float) -> np.random.SeedSequence:
    """Per-cell seed: the run seed combined with a hash of the cell coordinates."""
    key = zlib.crc32(f"{query}|{mech}|{epsilon!r}".encode())
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(key,))


@dataclass(frozen=True)
class _Cell:
    query: str
    mechanism: str
    epsilon: float
    true_value: float
    sensitivity: float
    lower: float
    upper: float


def _resolve_cells(cfg: BenchConfig, series: Series) -> list:
    cells = []
    for q in cfg.queries:
        truth = run_query(q, series)
        s = cfg.setting("sensitivity", q)
        sens = auto_sensitivity(q, series) if s == "auto" else float(s)
        b = cfg.setting("bounds", q)
        lo, hi = auto_bounds(q, series) if b == "auto" else (float(b[0]), float(b[1]))
        if not hi > lo:
            raise InvalidParameter(f"bounds for {q} must satisfy lower < upper")
        for mech in cfg.mechanisms:
            for eps in cfg.epsilons:
                cells.append(_Cell(q, mech, eps, truth, sens, lo, hi))
    return cells


def _composite(cell: _Cell, cfg: BenchConfig, rng: np.random.Generator) -> dict:
    privacy = PrivacyParams(cell.epsilon, cell.sensitivity)
    anchor = {"value": dict(center=cell.true_value),
              "center": dict(center=0.5 * (cell.lower + cell.upper)),
              "lower": dict(lower=cell.lower)}[cfg.anchor]
    opt = OptimizerConfig(worst_case=cfg.worst_case)
    mech = mechanism.build(privacy, cell.mechanism[:2], cell.mechanism[2:], L=cfg.L,
                           cfg=opt, **anchor)
    out = mechanism.publish(mech, cell.true_value, rng, cfg.repetitions)
    out = np.atleast_1d(out)
    spec = mech.spec
    cp_hi = shapes.cp_bounds(spec)[1]
    a_h2 = shapes.solve_activation_offset(spec, 0.5 * cp_hi)
    bounds = mech.bounds
    return dict(
        perturbed=out, lower=bounds.lower, upper=bounds.upper,
        variance=mech.variance(cell.true_value),
        h1_rate=analysis.h1_rate(spec),
        h2_rate=analysis.h2_rate(spec, a_h2, 0.5 * cp_hi),
        out_of_bounds=int(np.count_nonzero((out < bounds.lower) | (out > bounds.upper))),
    )


def _baseline(cell: _Cell, cfg: BenchConfig, rng: np.random.Generator) -> dict:
    kind = baselines.BaselineKind.parse(cell.mechanism)
    privacy = PrivacyParams(cell.epsilon, cell.sensitivity,
                            cfg.delta if kind.needs_delta else None)
    bound = baselines.truncation_bound(cell.lower, cell.upper) \
        if kind is baselines.BaselineKind.TRUNCATED_DISCRETE_LAPLACE else None
    out = np.atleast_1d(baselines.add_noise(kind, cell.true_value, privacy, rng,
                                            cfg.repetitions, bound))
    return dict(
        perturbed=out.astype(float), lower=cell.lower, upper=cell.upper,
        variance=baselines.noise_variance(kind, privacy, bound),
        h1_rate=None, h2_rate=None,
        out_of_bounds=int(np.count_nonzero((out < cell.lower) | (out > cell.upper))),
    )


def _run_cell(cell: _Cell, cfg: BenchConfig, dataset: str) -> dict:
    row = dict.fromkeys(ROW_FIELDS)
    row.update(dataset=dataset, query=cell.query, mechanism=cell.mechanism,
               epsilon=cell.epsilon, sensitivity=cell.sensitivity,
               true_value=cell.true_value, lower=cell.lower, upper=cell.upper,
               repetitions=cfg.repetitions)
    rng = np.random.default_rng(cell_seed(cfg.seed, cell.query, cell.mechanism, cell.epsilon))
    t0 = time.perf_counter()
    try:
        run = _composite if cell.mechanism in shapes.BUILTIN_PAIRS else _baseline
        res = run(cell, cfg, rng)
    except CompositeDPError as exc:
        row["status"] = f"error: {type(exc).__name__}: {exc}"
        logger.warning("%s/%s/eps=%g failed: %s", cell.query, cell.mechanism, cell.epsilon, exc)
    else:
        m = compute_metrics(cell.true_value, res.pop("perturbed"))
        row.update(dataclasses.asdict(m))
        row.update(res)
        row["status"] = "ok"
    if cfg.include_timing:
        row["wall_time"] = time.perf_counter() - t0
    return row


def run_benchmark(cfg: BenchConfig) -> BenchReport:
    """Run every (query, mechanism, epsilon) cell.

    Each cell draws from its own generator seeded by :func:`cell_seed`, so
    the report does not depend on ``cfg.jobs`` or on execution order.
    """
    series = ingest_csv(cfg.dataset, cfg.column)
    cells = _resolve_cells(cfg, series)
    dataset = str(cfg.dataset).replace("\\", "/").rsplit("/", 1)[-1]
    if cfg.jobs == 1:
        rows = [_run_cell(c, cfg, dataset) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_run_cell, cells, [cfg] * len(cells),
                                 [dataset] * len(cells)))
    return BenchReport(rows)
