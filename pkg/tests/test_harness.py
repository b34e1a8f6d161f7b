import numpy as np
import pytest

from rdil import datasets
from rdil._seeding import derive_seed
from rdil.data import inject_noise
from rdil.harness import experiment as ex
from rdil.harness.config import ConfigError, ExperimentConfig, dump_config, load_config
from rdil.harness.experiment import Record, ResultsStore, run_experiment
from rdil.harness.report import SUMMARY_FIELDS, render_report
from rdil.harness.stats import noise_identification_metrics
from rdil.learners import LearnerSpec, train

from conftest import blobs


def small_cfg(**kw):
    base = dict(datasets=["iris"], learners=["naive_bayes"], methods=["orig"], noise_levels=[0.0], runs=1,
                master_seed=3, ensemble=["tree_c45", "knn5", "naive_bayes"])
    base.update(kw)
    return ExperimentConfig(**base)


def iris_subset():
    return datasets.load("iris").subset(np.arange(0, 150, 2))


# ---------------------------------------------------------------------------
# experiment


def test_orig_clean_record_equals_plain_training():
    cfg = small_cfg()
    d = datasets.load("iris")
    rs = run_experiment(cfg, datasets=[d], keep_predictions=True)
    rec = rs.get("iris", "naive_bayes", "orig", 0.0, 0)
    tr, te = ex._partition(d, cfg.train_fraction, derive_seed(cfg.master_seed, 0, 0))
    model = train(LearnerSpec("naive_bayes"), tr)
    assert rec.accuracy == float(np.mean(model.predict(te.X) == te.y))
    assert (rec.n_train, rec.n_test) == (99, 51)
    assert rec.retained == 99 and rec.precision is None


def test_accuracy_recount_from_predictions():
    d = iris_subset()
    cfg = small_cfg(learners=["tree_c45", "knn5"], methods=["orig", "rdil_ensemble", "renn"], noise_levels=[0.2])
    rs = run_experiment(cfg, datasets=[d], keep_predictions=True)
    _, te = ex._partition(d, cfg.train_fraction, derive_seed(cfg.master_seed, 0, 0))
    for rec in rs.records():
        assert rec.accuracy == float(np.mean(rs.predictions[rec.key] == te.y))


def test_test_labels_only_read_for_scoring(monkeypatch):
    d = iris_subset()
    seen = []
    real_part, real_acc = ex._partition, ex._accuracy

    def partition(*a):
        tr, te = real_part(*a)
        seen.append(("test", te))
        return tr, te

    def accuracy(model, test):
        assert any(test is t for _, t in seen)
        seen.append(("scored", test))
        return real_acc(model, test)

    monkeypatch.setattr(ex, "_partition", partition)
    monkeypatch.setattr(ex, "_accuracy", accuracy)
    cfg = small_cfg(methods=["orig", "rdil_ensemble", "pwem", "filter_ensemble", "filter_biased", "renn"],
                    noise_levels=[0.0, 0.3])
    rs = run_experiment(cfg, datasets=[d])
    assert sum(tag == "scored" for tag, _ in seen) == len(rs)


def test_noise_touches_training_part_only():
    d = iris_subset()
    cfg = small_cfg(noise_levels=[0.0, 0.4], runs=2)
    rs = run_experiment(cfg, datasets=[d])
    for r in range(2):
        tr, te = ex._partition(d, cfg.train_fraction, derive_seed(cfg.master_seed, 0, r))
        assert len(te) == rs.get("iris", "naive_bayes", "orig", 0.4, r).n_test
        cell = ex._Cell(cfg, 0, r, 0.4, tr)
        assert len(cell.record.flipped) == round(0.4 * len(tr))
        assert np.array_equal(cell.noisy.X, tr.X)


def test_deterministic_and_parallel_identical():
    d = iris_subset()
    cfg = small_cfg(learners=["tree_c45"], methods=["orig", "rdil_ensemble", "filter_ensemble"],
                    noise_levels=[0.1, 0.3], runs=2)
    a = run_experiment(cfg, datasets=[d]).to_csv()
    b = run_experiment(cfg, datasets=[d]).to_csv()
    c = run_experiment(cfg, n_jobs=2, datasets=[d]).to_csv()
    assert a == b == c


def test_adding_a_method_leaves_other_cells_unchanged():
    d = iris_subset()
    a = run_experiment(small_cfg(methods=["orig"], noise_levels=[0.2]), datasets=[d])
    b = run_experiment(small_cfg(methods=["rdil_biased", "orig"], noise_levels=[0.2]), datasets=[d])
    assert a.get("iris", "naive_bayes", "orig", 0.2, 0) == b.get("iris", "naive_bayes", "orig", 0.2, 0)


def test_filter_metrics_at_high_noise():
    d = datasets.load("iris")
    cfg = small_cfg(learners=["tree_c45"], methods=["filter_ensemble", "rdil_ensemble"], noise_levels=[0.4])
    rs = run_experiment(cfg, datasets=[d])
    rec = rs.get("iris", "tree_c45", "filter_ensemble", 0.4, 0)
    assert rec.retained < rec.n_train and rec.threshold == 0.5
    tr, _ = ex._partition(d, cfg.train_fraction, derive_seed(cfg.master_seed, 0, 0))
    cell = ex._Cell(cfg, 0, 0, 0.4, tr)
    est = cell.ensemble_estimate()
    from rdil.filters import ensemble_filter

    res = ensemble_filter(est, 0.5, cell.noisy.y)
    assert (rec.precision, rec.recall) == noise_identification_metrics(res.removed_ids, cell.record)
    assert rec.precision > 0.4
    w = rs.get("iris", "tree_c45", "rdil_ensemble", 0.4, 0)
    assert w.precision is not None and w.retained <= w.n_train


def test_oracle_threshold_picks_from_grid():
    cfg = small_cfg(learners=["tree_c45"], methods=["filter_ensemble"], noise_levels=[0.3], oracle_threshold=True)
    rec = run_experiment(cfg, datasets=[iris_subset()]).records()[0]
    assert rec.threshold in (0.5, 0.7, 0.9)


def test_failed_cells_are_recorded():
    d = blobs(3, 2, 2, seed=0)  # too small for 10-fold estimation
    cfg = small_cfg(datasets=[{"name": "tiny", "path": "unused.csv"}],
                    methods=["orig", "rdil_ensemble"])
    rs = run_experiment(cfg, datasets=[d])
    statuses = {r.method: r.status for r in rs.records()}
    assert statuses == {"orig": "ok", "rdil_ensemble": "failed"}
    failed = rs.get("tiny", "naive_bayes", "rdil_ensemble", 0.0, 0)
    assert failed.accuracy is None and failed.reason
    assert rs.mean_accuracy("tiny", "naive_bayes", "rdil_ensemble", 0.0) is None


# ---------------------------------------------------------------------------
# results store


def test_results_csv_round_trip():
    rs = run_experiment(small_cfg(methods=["orig", "filter_ensemble"], noise_levels=[0.2]),
                        datasets=[iris_subset()])
    back = ResultsStore.from_csv(rs.to_csv())
    assert back.records() == rs.records()
    assert back.to_csv() == rs.to_csv()


def test_store_rejects_duplicates_and_bad_accuracy():
    rs = ResultsStore([Record("d", "l", "orig", 0.0, 0, accuracy=0.5)])
    with pytest.raises(ValueError):
        rs.add(Record("d", "l", "orig", 0.0, 0, accuracy=0.6))
    with pytest.raises(ValueError):
        rs.add(Record("d", "l", "orig", 0.0, 1, accuracy=1.5))


# ---------------------------------------------------------------------------
# report


def store(acc):
    """acc[method] is a per-dataset accuracy list (one run each)."""
    rs = ResultsStore()
    for method, values in acc.items():
        for i, v in enumerate(values):
            rs.add(Record(f"d{i}", "mlp", method, 0.3, 0, accuracy=v))
    return rs


def test_single_method_has_no_marks():
    rep = render_report(store({"orig": [0.5, 0.6, 0.7]}))
    assert [r["mark"] for r in rep.rows] == [""]
    table = rep.markdown.split("## mlp", 1)[1]
    assert "✓" not in table and "✗" not in table and "g,e,l |" not in table


def test_marks_follow_wilcoxon():
    base = [0.60, 0.62, 0.64, 0.66, 0.68, 0.70]
    better = [b + 0.05 for b in base]
    worse = [b - 0.05 for b in base]
    rep = render_report(store({"orig": base, "up": better, "down": worse}))
    rows = {r["method"]: r for r in rep.rows}
    assert rows["up"]["mark"] == "✓" and (rows["up"]["g"], rows["up"]["e"], rows["up"]["l"]) == (0, 0, 6)
    assert rows["down"]["mark"] == "✗" and rows["down"]["g"] == 6
    assert rows["up"]["p"] == "0.0312"
    assert "| up | 70.00 ✓ |" in rep.markdown


def test_five_datasets_cannot_reach_significance():
    base = [0.6, 0.62, 0.64, 0.66, 0.68]
    rep = render_report(store({"orig": base, "up": [b + 0.05 for b in base]}))
    assert {r["method"]: r["mark"] for r in rep.rows}["up"] == ""


def test_csv_and_markdown_agree():
    rep = render_report(store({"orig": [0.6, 0.7], "up": [0.65, 0.72]}))
    lines = rep.csv.splitlines()
    assert lines[0].split(",") == SUMMARY_FIELDS
    for r in rep.rows:
        assert f"| {r['method']} | {r['mean_accuracy']}" in rep.markdown
    assert "0.3" in lines[1]


def test_report_notes_missing_and_failed():
    rs = store({"orig": [0.6, 0.7]})
    rs.add(Record("d0", "mlp", "pwem", 0.3, 0, status="failed", reason="EMFailure: x"))
    rs.add(Record("d1", "mlp", "pwem", 0.3, 0, accuracy=0.8))
    rep = render_report(rs)
    assert rep.missing == [("d0", "mlp", "pwem", 0.3)]
    assert "1 failed cell" in rep.markdown
    with pytest.raises(ValueError):
        render_report(rs, baseline="renn")


# ---------------------------------------------------------------------------
# config


def test_config_round_trip(tmp_path):
    cfg = small_cfg(learners=[{"kind": "knn5", "params": {"k": 3}}], train_fraction="2/3")
    path = tmp_path / "c.yaml"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg


def test_config_paths_resolve_relative_to_file(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("datasets: [{name: local, path: data/x.csv}]\nlearners: [mlp]\n")
    cfg = load_config(path)
    assert cfg.datasets[0].path == str(tmp_path / "data" / "x.csv")
    assert cfg.noise_levels == (0.0, 0.1, 0.2, 0.3, 0.4) and cfg.runs == 10


@pytest.mark.parametrize("text", [
    "learners: [mlp]\n",
    "datasets: [iris]\nlearners: [mlp]\nmethods: [magic]\n",
    "datasets: [iris]\nlearners: [mlp]\nnoise_levels: [1.0]\n",
    "datasets: [iris]\nlearners: [mlp]\nruns: 0\n",
    "datasets: [iris]\nlearners: [perceptron]\n",
    "datasets: [iris]\nlearners: [mlp]\ncolour: red\n",
    "datasets: [nonexistent]\nlearners: [mlp]\ntrain_fraction: 2/3\nfolds: 1\n",
    "datasets: [iris\n",
])
def test_config_errors(tmp_path, text):
    path = tmp_path / "c.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path)
