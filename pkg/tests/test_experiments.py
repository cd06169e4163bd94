import csv
import json
import math

import numpy as np
import pytest

from cpdetect import (
    BlockLengthRule,
    DegenerateVarianceError,
    InputError,
    Overlap,
    gen_ar1,
    ChangePointModel,
    ks_quantile,
    run_single_test,
)
from cpdetect.core_stats import Kind
from cpdetect.experiments import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    ResultTable,
    emit_results,
    load_results,
    run_power_experiment,
    run_size_experiment,
    unadjusted_scale,
    variant_settings,
    worker_count,
    write_tables,
)


def small_config(**kw):
    base = dict(n=60, rhos=[0.0, 0.5], innovations=["gauss", "t3"], statistics=["T1", "T2"],
                variants=["unadjusted", "fixed-nol", "adaptive-ol"], fixed_l=5,
                replicates=30, mu_grid=[0.0, 1.0, 2.0], master_seed=5)
    base.update(kw)
    return ExperimentConfig(**base)


def test_constant_series_degenerate():
    for stat in ("T1", "T2"):
        with pytest.raises(DegenerateVarianceError):
            run_single_test([1.0] * 50, stat)
    with pytest.raises(DegenerateVarianceError):
        run_single_test([1.0] * 50, "T2", BlockLengthRule.adaptive())


def test_alpha_validated():
    with pytest.raises(InputError):
        run_single_test([1.0, 2.0, 3.0], "T1", alpha=1.5)


def test_single_test_fields(rng):
    x = gen_ar1(ChangePointModel(200, mu=3.0), 1)
    res = run_single_test(x, "cusum", BlockLengthRule.fixed(9), Overlap.NON_OVERLAPPING, 0.05)
    assert res.reject and res.decision == "reject"
    assert res.normalized == pytest.approx(res.statistic / res.sigma_hat)
    assert res.critical_value == pytest.approx(ks_quantile(0.95))
    assert 0 <= res.p_value < 0.05
    assert res.block_length_used == 9 and res.rho_hat is None
    assert abs(res.change_point_estimate - 100) <= 5


def test_single_test_unadjusted_scales(rng):
    x = rng.standard_normal(200)
    t2 = run_single_test(x, "T2")
    assert t2.sigma_hat == pytest.approx(np.std(x, ddof=1))
    assert t2.block_length_used is None
    t1 = run_single_test(x, "T1")
    # sqrt(pi/2) * mean |F_n(X) - mean| for a permutation of 1/n..1
    y = np.arange(1, 201) / 200
    assert t1.sigma_hat == pytest.approx(math.sqrt(math.pi / 2) * np.mean(np.abs(y - y.mean())))
    assert unadjusted_scale(x, Kind.WILCOXON, "moment") == pytest.approx(math.sqrt((200**2 - 1) / (12 * 200**2)))
    with pytest.raises(InputError):
        unadjusted_scale(x, Kind.WILCOXON, "other")


def test_p_value_consistent_with_decision(rng):
    for _ in range(50):
        x = rng.standard_normal(80) + np.r_[np.zeros(40), np.full(40, rng.uniform(0, 1))]
        res = run_single_test(x, "T1", BlockLengthRule.adaptive())
        assert res.reject == (res.p_value < 0.05)


def test_variant_settings():
    assert variant_settings("unadjusted", 9)[0] is None
    rule, ov = variant_settings("fixed-ol", 9)
    assert rule == BlockLengthRule.fixed(9) and ov is Overlap.OVERLAPPING
    rule, ov = variant_settings("adaptive-nol", 9)
    assert rule.is_adaptive and ov is Overlap.NON_OVERLAPPING
    with pytest.raises(InputError):
        variant_settings("bogus", 9)


def test_config_defaults():
    c = ExperimentConfig()
    assert c.n == 200 and c.rhos == [0.0, 0.4, 0.8] and c.fixed_l == 9
    assert c.alpha == 0.05 and c.replicates == 4000 and c.change_index == 100
    assert c.mu_grid == [0.25 * i for i in range(9)]


def test_config_errors_listed_per_field():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict({"replicates": 0, "alpha": 2, "rhos": [1.0], "variants": ["x"]})
    fields = {e.split(":")[0] for e in exc.value.errors}
    assert fields == {"replicates", "alpha", "rhos", "variants"}
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict({"replicate": 10})
    assert exc.value.errors == ["replicate: unknown field"]
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"mu_grid": [1.0, 0.5]})


def test_size_experiment_reproducible_and_coherent():
    cfg = small_config()
    a = run_size_experiment(cfg)
    b = run_size_experiment(cfg)
    assert a.cells == b.cells
    assert len(a.cells) == 2 * 2 * 2 * 3
    for c in a.cells:
        assert 0 <= c.value <= 1
        assert c.se == math.sqrt(c.value * (1 - c.value) / c.replicates)
        assert c.failures == 0 and c.replicates == 30 and c.mu is None


def test_cells_do_not_share_streams():
    full = run_size_experiment(small_config())
    part = run_size_experiment(small_config(rhos=[0.5], variants=["fixed-nol"], innovations=["t3"]))
    assert part.cells == [full.lookup(0.5, "t3", s, "fixed-nol") for s in ("T1", "T2")]


def test_power_at_zero_equals_size():
    cfg = small_config()
    size = run_size_experiment(cfg)
    power = run_power_experiment(cfg)
    for c in size.cells:
        p = power.lookup(c.rho, c.innovation, c.statistic, c.variant, 0.0)
        assert (p.rejections, p.replicates) == (c.rejections, c.replicates)
    curve = power.curve(0.0, "gauss", "T2", "fixed-nol")
    assert [c.mu for c in curve] == [0.0, 1.0, 2.0]
    assert curve[-1].value > 0.9


def test_parallel_matches_serial():
    cfg = small_config(replicates=10)
    assert run_size_experiment(cfg, workers=2).cells == run_size_experiment(cfg, workers=1).cells


def test_worker_count(monkeypatch):
    monkeypatch.delenv("CPDETECT_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("CPDETECT_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("CPDETECT_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("CPDETECT_THREADS", "x")
    with pytest.raises(InputError):
        worker_count()


@pytest.mark.parametrize("runner", [run_size_experiment, run_power_experiment])
def test_json_round_trip(tmp_path, runner):
    table = runner(small_config(replicates=8))
    path = emit_results(table, tmp_path / "t.json")
    back = load_results(path)
    assert back.kind == table.kind
    assert back.cells == table.cells
    assert back.config == json.loads(json.dumps(table.config))
    doc = json.loads(path.read_text())
    assert doc["master_seed"] == 5
    assert set(doc["cells"]) == {"0.0", "0.5"}


def test_csv_rows(tmp_path):
    table = run_size_experiment(small_config(replicates=8))
    path = emit_results(table, tmp_path / "size.csv")
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == len(table.cells)
    header = path.read_text().splitlines()[0].split(",")
    assert header == [c for c in CSV_COLUMNS if c != "mu"]
    assert {"value", "se", "replicates"} <= set(header)


def test_empty_table_header_only(tmp_path):
    path = emit_results(ResultTable("power", {}, []), tmp_path / "p.csv")
    assert path.read_text().strip() == ",".join(CSV_COLUMNS)


def test_emit_errors(tmp_path):
    table = ResultTable("size", {}, [])
    with pytest.raises(InputError):
        emit_results(table, tmp_path / "t.xml")
    with pytest.raises(OSError, match="missing"):
        emit_results(table, tmp_path / "missing" / "t.csv")


def test_write_tables(tmp_path):
    paths = write_tables(run_power_experiment(small_config(replicates=4)), tmp_path / "out")
    assert sorted(p.name for p in paths) == ["power_curves.csv", "power_curves.json"]
