import os
import pathlib

import numpy as np
import pytest

import fair_onb

DATA = pathlib.Path(__file__).resolve().parents[2] / "tests" / "data"


@pytest.fixture(scope="module")
def small():
    return fair_onb.load_csv(str(DATA / "small.csv"), str(DATA / "small_schema.json"))


def blobs(n=300, seed=4):
    rng = np.random.default_rng(seed)
    p = rng.integers(0, 2, n)
    y = (rng.random(n) < np.where(p == 0, 0.4, 0.1)).astype(int)
    X = rng.normal((0.5 + 0.2 * (y - 0.5))[:, None], 0.1, size=(n, 2)).clip(0, 1)
    return fair_onb.from_arrays(np.column_stack([X, p]), y, ["x0", "x1", "p"], protected=["p"])


def test_load_and_inspect(small):
    assert small.num_rows == 160
    assert small.feature_names == ["age", "priors", "score", "sex", "race"]
    assert small.values.shape == (160, 5)
    assert small.values.min() >= 0.0 and small.values.max() <= 1.0
    assert sum(g["rows"] for g in fair_onb.groups(small)) == 160
    bias = fair_onb.assess_bias(small)
    assert [b["feature"] for b in bias] == ["sex", "race"]


def test_missing_schema_names_path():
    with pytest.raises(fair_onb.SchemaError, match="absent.json"):
        fair_onb.load_csv(str(DATA / "small.csv"), str(DATA / "absent.json"))


def test_coverage_partitions_rows(small):
    balls = fair_onb.coverage(small)
    rows = sorted(r for b in balls for r in b["rows"])
    assert rows == sorted(small.row_ids.tolist())


def test_preprocess_removes_only_targets(small):
    reduced, info = fair_onb.preprocess(small, pct=(10, 10, 10), strategy="union")
    assert reduced.num_rows + len(info["removed_rows"]) == small.num_rows
    group_of = {}
    for b in fair_onb.coverage(small):
        for r in b["rows"]:
            group_of[r] = b["group"]
    assert {group_of[r] for r in info["removed_rows"]} <= set(info["targets"])
    assert set(info["thresholds"]) == {"radius", "count", "density"}


def test_preprocess_rejects_bad_strategy(small):
    with pytest.raises(fair_onb.FonbError):
        fair_onb.preprocess(small, strategy="sideways")


def test_oversample_is_deterministic(small):
    a, info = fair_onb.oversample(small, weights=(0, 0.6, 0.4), factor=1.0, seed=3)
    b, _ = fair_onb.oversample(small, weights=(0, 0.6, 0.4), factor=1.0, seed=3)
    assert a == b
    assert a.num_rows == small.num_rows + len(info["synthetics"])
    assert all(0.0 <= s["gap"] <= 1.0 for s in info["synthetics"])


def test_tree_and_metrics():
    ds = blobs()
    tree = fair_onb.DecisionTree.fit(ds, seed=1)
    pred = tree.predict(ds)
    assert fair_onb.accuracy(pred, ds.labels.tolist()) == 1.0
    assert len(fair_onb.fairness(ds, pred)) == 1
    assert tree.serialize(ds.feature_names)


def test_grid_and_selection():
    ds = blobs()
    reports = fair_onb.run_grid(ds, folds=3, levels=[0, 10])
    assert len(reports) == 1 + 2 ** 3
    assert reports[0].config_id == "baseline"
    text = fair_onb.report_csv(reports)
    assert text.startswith("config_id,strategy,pct_radius")
    assert text == fair_onb.report_csv(fair_onb.run_grid(ds, folds=3, levels=[0, 10], jobs=2))
    best = fair_onb.select_best(reports)
    assert best["global"] in {r.config_id for r in reports}
    rows, table = fair_onb.compare(reports, fair_onb.run_fawos_grid(ds, folds=3))
    assert rows[0]["method"] == "Baseline"
    assert "FAWOS" in table


def test_imports_expected_build():
    expected = os.environ.get("FONB_EXPECT_MODULE_DIR")
    if expected:
        assert pathlib.Path(fair_onb.__file__).resolve().is_relative_to(pathlib.Path(expected).resolve())
