import json
import math

import numpy as np
import pytest

from composite_dp.bench import (BenchConfig, QueryKind, Series, auto_bounds, auto_sensitivity,
                                compute_metrics, ingest_csv, mode, run_benchmark, run_query)
from composite_dp.bench.runner import ROW_FIELDS, cell_seed
from composite_dp.errors import (ColumnMissing, EmptySeries, InvalidParameter, NoNumericRows)
from composite_dp.shapes import BUILTIN_PAIRS


# -- ingestion and queries -----------------------------------------------------

def test_ingest_five_rows(fixtures_dir):
    s = ingest_csv(fixtures_dir / "ages5.csv", "age")
    assert len(s.values) == 5 and s.n_rows == 5 and s.dropped == 0
    assert (s.min, s.max) == (10.0, 50.0)


def test_ingest_errors(fixtures_dir, tmp_path):
    with pytest.raises(ColumnMissing):
        ingest_csv(fixtures_dir / "ages5.csv", "height")
    with pytest.raises(NoNumericRows):
        ingest_csv(fixtures_dir / "blank_age.csv", "age")
    with pytest.raises(FileNotFoundError):
        ingest_csv(tmp_path / "missing.csv", "age")


def test_ingest_drops_bad_cells(tmp_path, caplog):
    f = tmp_path / "mixed.csv"
    f.write_text('x,y\n1,a\n"2",b\n,c\nfoo,d\n3.5,e\n', encoding="utf-8")
    with caplog.at_level("INFO"):
        s = ingest_csv(f, "x")
    assert list(s.values) == [1.0, 2.0, 3.5]
    assert s.dropped == 2 and s.n_rows == 5
    assert "dropped 2" in caplog.text


def test_synthetic_fixture_shape(synthetic_csv):
    assert ingest_csv(synthetic_csv).n_rows == 1000
    speed = ingest_csv(synthetic_csv, "speed")
    assert speed.dropped > 0 and len(speed.values) + speed.dropped == 1000


def test_queries_on_five_rows(fixtures_dir):
    s = ingest_csv(fixtures_dir / "ages5.csv", "age")
    assert run_query("max", s) == 50
    assert run_query("min", s) == 10
    assert run_query("mean", s) == 30
    assert run_query("variance", s) == pytest.approx(200.0)
    assert run_query("count", s) == 5
    assert run_query(QueryKind.COUNT, ingest_csv(fixtures_dir / "ages5.csv")) == 5


def test_mode_rules():
    assert mode(np.array([3.0, 1.0, 1.0, 3.0, 2.0])) == 1.0
    rng = np.random.default_rng(0)
    x = rng.normal(7.3, 0.5, 20000)
    assert mode(x) == pytest.approx(7.3, abs=0.15)


def test_empty_series():
    with pytest.raises(EmptySeries):
        run_query("mean", Series(np.empty(0), 0, 0, "x"))
    with pytest.raises(EmptySeries):
        run_query("count", Series(np.empty(0), 0, 0, None))


def test_auto_rules(fixtures_dir):
    s = ingest_csv(fixtures_dir / "ages5.csv", "age")
    assert auto_sensitivity("max", s) == 40
    assert auto_sensitivity("mean", s) == 8
    assert auto_sensitivity("variance", s) == 320
    assert auto_sensitivity("count", s) == 1
    assert auto_bounds("max", s) == pytest.approx((9.6, 50.4))
    assert auto_bounds("count", s) == pytest.approx((4.95, 5.05))
    assert auto_bounds("variance", s) == pytest.approx((-4.0, 404.0))


# -- metrics ---------------------------------------------------------------------

def test_metrics_identity():
    m = compute_metrics(5.0, np.full(10, 5.0))
    assert m.re == m.mse == m.al_mean == m.bias_rate == 0


def test_metrics_example():
    m = compute_metrics(10.0, [9.0, 11.0])
    assert (m.re, m.mse, m.al_mean) == (pytest.approx(1), pytest.approx(1), pytest.approx(0.1))
    assert m.bias_rate == 0


def test_metrics_zero_truth_flag():
    m = compute_metrics(0.0, [1.0, -3.0])
    assert m.al_absolute and m.al_mean == 2.0 and m.bias_rate == 100.0


def test_metrics_quartiles_and_outliers():
    x = np.concatenate([np.full(99, 10.0) + np.linspace(-1, 1, 99), [100.0]])
    m = compute_metrics(10.0, x)
    assert m.al_q1 <= m.al_median <= m.al_q3 <= m.al_max
    assert m.al_outliers == 1
    assert m.re >= 0 and m.mse >= 0


# -- config ------------------------------------------------------------------------

def test_config_validation(synthetic_csv):
    with pytest.raises(InvalidParameter):
        BenchConfig(str(synthetic_csv), repetitions=0)
    with pytest.raises(InvalidParameter):
        BenchConfig(str(synthetic_csv), epsilons=[0.5, -1])
    with pytest.raises(InvalidParameter):
        BenchConfig(str(synthetic_csv), mechanisms=["A9B1"])
    with pytest.raises(InvalidParameter):
        BenchConfig(str(synthetic_csv), queries=["max"])
    with pytest.raises(InvalidParameter):
        BenchConfig.from_mapping({"dataset": "x", "colour": "red"})
    cfg = BenchConfig(str(synthetic_csv), mechanisms="a1b1, laplace", epsilons="0.5,1")
    assert cfg.mechanisms == ("A1B1", "Laplace") and cfg.epsilons == (0.5, 1.0)


def test_cell_seeds_differ():
    a = cell_seed(7, "count", "A1B1", 0.5).generate_state(2)
    b = cell_seed(7, "count", "A1B1", 1.0).generate_state(2)
    c = cell_seed(7, "count", "A1B1", 0.5).generate_state(2)
    assert not np.array_equal(a, b) and np.array_equal(a, c)


# -- sweeps --------------------------------------------------------------------------

def _small_cfg(path, **kw):
    base = dict(queries=["count"], mechanisms=["A1B1", "Laplace"], epsilons=[0.5, 1],
                repetitions=100, seed=7)
    base.update(kw)
    return BenchConfig(str(path), **base)


def test_four_rows_bit_identical(synthetic_csv):
    a = run_benchmark(_small_cfg(synthetic_csv))
    b = run_benchmark(_small_cfg(synthetic_csv))
    assert len(a.rows) == 4
    for fmt in ("table", "jsonl", "csv"):
        assert a.serialize(fmt) == b.serialize(fmt)


def test_parallel_matches_serial(synthetic_csv):
    a = run_benchmark(_small_cfg(synthetic_csv, mechanisms=["A1B1", "A3B2", "Gaussian"]))
    b = run_benchmark(_small_cfg(synthetic_csv, mechanisms=["A1B1", "A3B2", "Gaussian"],
                                 jobs=3))
    assert a.to_jsonl() == b.to_jsonl()


def test_jsonl_stable_fields(synthetic_csv):
    rep = run_benchmark(_small_cfg(synthetic_csv))
    for line in rep.to_jsonl().splitlines():
        rec = json.loads(line)
        assert tuple(rec) == ROW_FIELDS
    timed = run_benchmark(_small_cfg(synthetic_csv, include_timing=True))
    assert "wall_time" in json.loads(timed.to_jsonl().splitlines()[0])


def test_long_csv(synthetic_csv):
    text = run_benchmark(_small_cfg(synthetic_csv)).to_csv()
    lines = text.splitlines()
    assert lines[0] == "dataset,query,mechanism,epsilon,metric,value"
    assert len(lines) == 1 + 4 * (len(ROW_FIELDS) - 4)


def test_variance_column_ordering_across_activations(synthetic_csv):
    rep = run_benchmark(_small_cfg(synthetic_csv, mechanisms=list(BUILTIN_PAIRS),
                                   epsilons=[1.0]))
    var = {r["mechanism"]: r["variance"] for r in rep.rows}
    for b in ("B1", "B2"):
        assert var["A1" + b] < var["A2" + b] < var["A3" + b]


def test_out_of_bounds_counts(synthetic_csv):
    cfg = _small_cfg(synthetic_csv, mechanisms=list(BUILTIN_PAIRS) + ["Laplace"],
                     epsilons=[0.2], repetitions=1000, bounds={"count": [990, 1010]})
    rows = {r["mechanism"]: r for r in run_benchmark(cfg).rows}
    for pair in BUILTIN_PAIRS:
        assert rows[pair]["out_of_bounds"] == 0
    # Laplace(b = 5): Pr[|X| > 10] = e^-2, so about 135 of 1000 expected
    expected = 1000 * math.exp(-2)
    assert abs(rows["Laplace"]["out_of_bounds"] - expected) < 5 * math.sqrt(expected)


def test_bounded_al_cap_and_contrast(synthetic_csv):
    cfg = _small_cfg(synthetic_csv, mechanisms=list(BUILTIN_PAIRS) + ["Laplace", "Gaussian"],
                     epsilons=[0.2, 0.5, 1.0, 2.0], repetitions=1000)
    rows = run_benchmark(cfg).rows
    for eps in (0.2, 0.5, 1.0, 2.0):
        cell = {r["mechanism"]: r for r in rows if r["epsilon"] == eps}
        unbounded = min(cell["Laplace"]["al_max"], cell["Gaussian"]["al_max"])
        for pair in BUILTIN_PAIRS:
            r = cell[pair]
            cap = max(abs(r["lower"] - r["true_value"]), abs(r["upper"] - r["true_value"]))
            assert r["al_max"] <= cap / r["true_value"] + 1e-15
            assert r["al_max"] < unbounded


def test_failed_cells_are_flagged(synthetic_csv):
    cfg = BenchConfig(str(synthetic_csv), column="age", queries=["mean", "max"],
                      mechanisms=["A1B1", "Laplace"], epsilons=[1.0], repetitions=10,
                      anchor="center", seed=1)
    rows = run_benchmark(cfg).rows
    by = {(r["query"], r["mechanism"]): r for r in rows}
    # the mean is nowhere near the middle of [min, max] relative to range / n
    assert by[("mean", "A1B1")]["status"].startswith("error: OutOfBounds")
    assert by[("mean", "A1B1")]["re"] is None
    assert by[("mean", "Laplace")]["status"] == "ok"
    assert len(rows) == 4


def test_explicit_settings_per_query(synthetic_csv):
    cfg = BenchConfig(str(synthetic_csv), column="age", queries=["max", "count"],
                      mechanisms=["A2B1"], epsilons=[1.0], repetitions=50,
                      sensitivity={"max": 55.6}, bounds={"max": [0, 150]})
    rows = {r["query"]: r for r in run_benchmark(cfg).rows}
    assert rows["max"]["sensitivity"] == 55.6 and rows["count"]["sensitivity"] == 1.0
    assert rows["max"]["status"] == "ok"
