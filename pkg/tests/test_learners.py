import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdil import kernels
from rdil.data import Dataset
from rdil.errors import DegenerateClassError, DegenerateWeightsError, SchemaMismatchError
from rdil.learners import (
    COUNT_BASED,
    KINDS,
    LearnerSpec,
    dumps_model,
    loads_model,
    predict,
    save_model,
    load_model,
    score,
    train,
)
from rdil.learners.forest import bootstrap_indices
from rdil.learners.mlp import MLPModel, instance_gradient
from rdil.learners.preprocess import Preprocessor

from conftest import blobs, numeric_dataset

FAST = {"mlp": {"epochs": 60}, "random_forest": {"n_trees": 10}}


def fast(kind, seed=0):
    return LearnerSpec(kind, FAST.get(kind, {}), seed)


def probes(d, n=40, seed=0):
    """Training rows plus random rows drawn inside each attribute's range."""
    rng = np.random.default_rng(seed)
    cols = []
    for j, a in enumerate(d.schema.attributes):
        col = d.X[:, j]
        col = col[~np.isnan(col)]
        if a.is_nominal:
            cols.append(rng.integers(0, len(a.values), n).astype(float))
        else:
            cols.append(rng.uniform(col.min() - 0.5, col.max() + 0.5, n))
    return np.vstack([d.X, np.column_stack(cols)])


def without_fingerprint(state):
    return {k: v for k, v in state.items() if k != "fingerprint"}


# ---------------------------------------------------------------------------
# weight-1 equivalence


@pytest.mark.parametrize("kind", KINDS)
def test_unit_weights_match_unweighted(kind, small_sets):
    for d in small_sets:
        P = probes(d)
        for seed in range(5):
            spec = LearnerSpec(kind, seed=seed)
            a = train(spec, d)
            b = train(spec, d, np.ones(len(d)))
            assert np.array_equal(a.predict(P), b.predict(P))
            if kind in COUNT_BASED or kind == "random_forest":
                assert np.array_equal(a.class_scores(P), b.class_scores(P))
            else:
                assert np.array_equal(a.W1, b.W1) and np.array_equal(a.W2, b.W2)


# ---------------------------------------------------------------------------
# zero-weight inertness


def _with_zero_instance(d, x, label):
    extra = Dataset(d.schema, np.asarray(x, dtype=float)[None, :], [label])
    return d.append(extra)


@pytest.mark.parametrize("kind", ["tree_c45", "ripper", "naive_bayes"])
def test_zero_weight_instance_leaves_statistics_unchanged(kind, small_sets):
    for d in small_sets:
        rng = np.random.default_rng(1)
        w = rng.uniform(0.2, 1.0, len(d))
        x = probes(d, 1, seed=9)[-1]
        aug = _with_zero_instance(d, x, int(d.y[0]) ^ 1)
        a = train(LearnerSpec(kind, seed=4), d, w)
        b = train(LearnerSpec(kind, seed=4), aug, np.append(w, 0.0))
        assert a.state_dict() == b.state_dict()
        P = probes(d)
        assert np.array_equal(a.class_scores(P), b.class_scores(P))


def test_zero_weight_instance_is_inert_for_ripper_coverage(small_sets):
    d = small_sets[0]
    w = np.ones(len(d))
    aug = _with_zero_instance(d, d.X[3], (int(d.y[3]) + 1) % d.n_classes)
    a = train(LearnerSpec("ripper", seed=2), d, w)
    b = train(LearnerSpec("ripper", seed=2), aug, np.append(w, 0.0))
    assert np.array_equal(a.coverage(d.X), b.coverage(d.X))
    assert [r[2].tolist() for r in a.rules] == [r[2].tolist() for r in b.rules]


def test_zero_weight_instance_mlp_trajectory():
    d = blobs(10, 3, 3, seed=2)
    w = np.random.default_rng(0).uniform(0.1, 1, len(d))
    aug = _with_zero_instance(d, d.X[0] + 0.3, 2)
    spec = LearnerSpec("mlp", {"epochs": 40}, seed=11)
    ta, tb = [], []
    MLPModel.fit(spec, d, w, trajectory=lambda e, *p: ta.append([q.copy() for q in p]))
    MLPModel.fit(spec, aug, np.append(w, 0.0), trajectory=lambda e, *p: tb.append([q.copy() for q in p]))
    assert len(ta) == len(tb) == 40
    for pa, pb in zip(ta, tb):
        for qa, qb in zip(pa, pb):
            assert np.max(np.abs(qa - qb)) < 1e-12


def test_mlp_zero_weight_gives_zero_update():
    d = blobs(5, 2, 2, seed=1)
    prep = Preprocessor.fit(d.schema, d.X)
    Z = prep.encoded(d.X)
    T = np.eye(2)[d.y]
    rng = np.random.default_rng(0)
    params = [rng.uniform(-0.5, 0.5, s) for s in [(3, 2), (3,), (2, 3), (2,)]]
    vel = [np.zeros_like(p) for p in params]
    before = [p.copy() for p in params]
    w = np.zeros(len(d))
    w[0] = 1.0
    order = np.array([3], dtype=np.int64)  # only a zero-weight instance
    kernels.mlp_epoch(Z, T, w, True, order, *params, *vel, 0.3, 0.2)
    assert all(np.array_equal(a, b) for a, b in zip(before, params))
    g = instance_gradient(Z[3], T[3], 0.0, *params)
    assert all(np.all(x == 0) for x in g)


def test_knn_zero_weight_far_instance_unchanged(small_sets):
    d = small_sets[2]
    w = np.random.default_rng(3).uniform(0.2, 1.0, len(d))
    far = d.X.max(axis=0) + 1e6
    aug = _with_zero_instance(d, far, 0)
    a = train("knn5", d, w)
    b = train("knn5", aug, np.append(w, 0.0))
    assert np.array_equal(a.vote_mass(d.X), b.vote_mass(d.X))


def test_knn_zero_weight_occupies_slot_without_vote():
    d = numeric_dataset([[0.0], [1.0], [2.0], [3.0], [4.0], [5.0], [10.0]], [0, 0, 0, 1, 1, 1, 1])
    w = np.array([0.0, 1, 1, 1, 1, 1, 1])
    m = train("knn5", d, w)
    mass = m.vote_mass([[0.0]])[0]
    assert mass.tolist() == [2.0, 2.0]  # neighbours 0..4, instance 0 votes nothing


# ---------------------------------------------------------------------------
# scale covariance


@pytest.mark.parametrize("kind", COUNT_BASED)
@pytest.mark.parametrize("lam", [1.0, 0.5, 0.3, 1e-3])
def test_scaling_weights_keeps_predictions(kind, lam, small_sets):
    for d in small_sets:
        w = np.random.default_rng(5).uniform(0.05, 1.0, len(d))
        P = probes(d)
        a = train(LearnerSpec(kind, seed=1), d, w)
        b = train(LearnerSpec(kind, seed=1), d, lam * w)
        assert np.array_equal(a.predict(P), b.predict(P))
        np.testing.assert_allclose(a.class_scores(P), b.class_scores(P), rtol=1e-9, atol=1e-12)


# ---------------------------------------------------------------------------
# MLP gradient


def _loss(x, t, W1, b1, W2, b2):
    h = 1 / (1 + np.exp(-(W1 @ x + b1)))
    o = 1 / (1 + np.exp(-(W2 @ h + b2)))
    return 0.5 * np.sum((t - o) ** 2)


def fd_gradient(x, t, params, h=1e-6):
    grads = []
    for p in params:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            up = _loss(x, t, *params)
            p[idx] = old - h
            down = _loss(x, t, *params)
            p[idx] = old
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def relative_error(a, b):
    scale = max(np.max(np.abs(b)), 1e-8)
    return np.max(np.abs(a - b)) / scale


@pytest.mark.parametrize("backend", ["python", "cython"])
def test_weighted_gradient_matches_finite_differences(backend):
    if backend == "cython" and not kernels.compiled_available():
        pytest.skip("compiled core not built")
    mod = kernels.backend_module(backend)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        params = [rng.uniform(-1, 1, s) for s in [(5, 3), (5,), (2, 5), (2,)]]
        x = rng.uniform(0, 1, 3)
        t = np.eye(2)[rng.integers(2)]
        w = rng.uniform(0, 1)
        g = mod.mlp_instance_gradient(x, t, w, *params)
        fd = fd_gradient(x, t, params)
        for a, b in zip(g, fd):
            worst = max(worst, relative_error(a, w * b))
    assert worst < 1e-4


def test_epoch_step_is_minus_lr_times_weighted_gradient():
    rng = np.random.default_rng(0)
    params = [rng.uniform(-0.5, 0.5, s) for s in [(4, 3), (4,), (2, 4), (2,)]]
    X = rng.uniform(0, 1, (1, 3))
    T = np.array([[1.0, 0.0]])
    w = np.array([0.37])
    g = instance_gradient(X[0], T[0], w[0], *params)
    before = [p.copy() for p in params]
    vel = [np.zeros_like(p) for p in params]
    kernels.mlp_epoch(X, T, w, True, np.array([0], dtype=np.int64), *params, *vel, 0.3, 0.2)
    for p0, p1, gi in zip(before, params, g):
        np.testing.assert_allclose(p1 - p0, -0.3 * gi, rtol=1e-10, atol=1e-14)


# ---------------------------------------------------------------------------
# worked examples


def _constant_feature(labels):
    return numeric_dataset(np.zeros((len(labels), 1)), labels)


def test_tree_weighted_node_distribution():
    d = _constant_feature([0, 0, 1])
    m = train("tree_c45", d, np.array([0.5, 0.5, 1.0]))
    np.testing.assert_allclose(m.class_scores([[0.0]])[0], [0.5, 0.5])
    assert predict(m, [0.0])[0] == 0


def test_tree_leaf_score_ratio():
    d = _constant_feature([0] * 7 + [1] * 3)
    m = train("tree_c45", d)
    assert score(m, [0.0], 0)[0] == pytest.approx(0.7)
    assert score(m, [0.0], 1)[0] == pytest.approx(0.3)


def test_tree_learns_threshold():
    d = numeric_dataset(np.arange(20.0), [0] * 10 + [1] * 10)
    m = train("tree_c45", d)
    assert m.predict([[2.0], [17.0]]).tolist() == [0, 1]


def _knn_fixture(labels, weights):
    d = numeric_dataset(np.concatenate([np.arange(1.0, len(labels) + 1), [100.0]]),
                        list(labels) + [1])
    return train("knn5", d, np.append(weights, 1.0))


def test_knn_weighted_majority():
    m = _knn_fixture([0, 1, 0, 1, 0], [0.7, 0.5, 0.7, 0.5, 0.7])
    np.testing.assert_allclose(m.vote_mass([[0.0]])[0], [2.1, 1.0])
    assert m.predict([[0.0]])[0] == 0


def test_knn_tie_goes_to_lowest_class():
    m = _knn_fixture([1, 0, 1, 0, 0], [0.5, 0.25, 0.5, 0.75, 0.0])
    np.testing.assert_allclose(m.vote_mass([[0.0]])[0], [1.0, 1.0])
    assert m.predict([[0.0]])[0] == 0


def test_knn_score_fraction():
    m = _knn_fixture([1, 0, 1, 0, 1], [1, 1, 1, 1, 1])
    assert score(m, [[0.0]], 1)[0] == pytest.approx(0.6)


def _mlp_with_outputs(outputs):
    outputs = np.asarray(outputs, dtype=float)
    Y = len(outputs)
    d = numeric_dataset(np.arange(Y, dtype=float), np.arange(Y))
    prep = Preprocessor.fit(d.schema, d.X)
    logit = np.log(outputs / (1 - outputs))
    return MLPModel(LearnerSpec("mlp"), d.schema, d.fingerprint(), prep,
                    np.zeros((2, 1)), np.zeros(2), np.zeros((Y, 2)), logit)


def test_mlp_argmax_and_normalized_score():
    m = _mlp_with_outputs([0.9, 0.1])
    np.testing.assert_allclose(m.outputs([[0.0]])[0], [0.9, 0.1])
    assert m.predict([[0.0]])[0] == 0
    m = _mlp_with_outputs([0.6, 0.2, 0.2])
    assert score(m, [[0.0]], 0)[0] == pytest.approx(0.6, abs=1e-12)


def test_forest_never_samples_zero_weight():
    d = blobs(15, 2, 2, seed=4)
    w = np.ones(len(d))
    zero = [0, 5, 17, 29]
    w[zero] = 0.0
    m = train(LearnerSpec("random_forest", {"n_trees": 30}, 3), d, w, record_samples=True)
    drawn = np.concatenate(m.bootstrap_samples)
    assert not np.isin(zero, drawn).any()
    assert all(len(s) == len(d) for s in m.bootstrap_samples)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 60), st.integers(0, 2**32))
def test_bootstrap_unit_weights_match_uniform(n, seed):
    a = bootstrap_indices(np.random.default_rng(seed), n)
    b = bootstrap_indices(np.random.default_rng(seed), n, np.ones(n))
    assert np.array_equal(a, b)


def test_bootstrap_follows_weights():
    w = np.array([0.1, 0.0, 0.9])
    idx = bootstrap_indices(np.random.default_rng(0), 20000, np.tile(w, 1)[np.arange(20000) % 3])
    counts = np.bincount(idx % 3, minlength=3) / len(idx)
    np.testing.assert_allclose(counts, [0.1, 0.0, 0.9], atol=0.02)


def test_naive_bayes_accumulates_weights():
    d = numeric_dataset(np.zeros((4, 1)), [0, 0, 1, 1])
    m = train("naive_bayes", d, np.array([1.0, 1.0, 1.0, 0.2]))
    # smoothed priors: (2+1)/(2.2+2) vs (1.2+1)/(2.2+2) after unit-mean rescale
    scale = 4 / 3.2
    c0, c1 = 2 * scale, 1.2 * scale
    expect = np.array([c0 + 1, c1 + 1]) / (c0 + c1 + 2)
    np.testing.assert_allclose(np.exp(m.log_prior), expect)


# ---------------------------------------------------------------------------
# scores, serialization, errors


@pytest.mark.parametrize("kind", KINDS)
def test_scores_are_distributions(kind, small_sets):
    for d in small_sets:
        m = train(fast(kind, 3), d)
        S = m.class_scores(probes(d, 60, seed=1))
        assert np.all(S >= 0) and np.all(S <= 1)
        np.testing.assert_allclose(S.sum(axis=1), 1.0, atol=1e-9)
        assert np.array_equal(m.predict(probes(d, 60, seed=1)), np.argmax(S, axis=1))


@pytest.mark.parametrize("kind", KINDS)
def test_serialization_round_trip(kind, small_sets, tmp_path):
    d = small_sets[1]
    w = np.random.default_rng(0).uniform(0, 1, len(d))
    m = train(fast(kind, 7), d, w)
    path = tmp_path / f"{kind}.json"
    save_model(m, path)
    back = load_model(path)
    P = probes(d)
    assert back.kind == kind and back.spec == m.spec and back.fingerprint == m.fingerprint
    assert np.array_equal(m.predict(P), back.predict(P))
    np.testing.assert_allclose(m.class_scores(P), back.class_scores(P), rtol=0, atol=1e-12)
    assert dumps_model(loads_model(dumps_model(m))) == dumps_model(m)


def test_loads_rejects_foreign_documents():
    with pytest.raises(ValueError):
        loads_model('{"format": "other"}')
    with pytest.raises(ValueError):
        loads_model('{"format": "rdil-model", "version": 99}')


@pytest.mark.parametrize("kind", KINDS)
def test_training_is_deterministic(kind, small_sets):
    d = small_sets[0]
    P = probes(d)
    a = train(fast(kind, 5), d)
    b = train(fast(kind, 5), d)
    assert np.array_equal(a.class_scores(P), b.class_scores(P))


def test_schema_mismatch(iris, mixed):
    m = train("naive_bayes", iris)
    with pytest.raises(SchemaMismatchError):
        m.predict(np.zeros((2, 3)))
    with pytest.raises(SchemaMismatchError):
        m.predict(mixed)
    nb = train("naive_bayes", mixed)
    bad = mixed.X[:1].copy()
    j = next(i for i, a in enumerate(mixed.schema.attributes) if a.is_nominal)
    bad[0, j] = 99
    with pytest.raises(SchemaMismatchError):
        nb.predict(bad)
    with pytest.raises(ValueError):
        score(m, iris.X[:1], 7)


def test_degenerate_training_inputs():
    d = numeric_dataset(np.arange(4.0), [0, 0, 1, 1])
    with pytest.raises(DegenerateWeightsError):
        train("tree_c45", d, np.zeros(4))
    with pytest.raises(DegenerateClassError):
        train("tree_c45", d, np.array([1.0, 1.0, 0.0, 0.0]))
    with pytest.raises(DegenerateClassError):
        train("mlp", numeric_dataset(np.arange(3.0), [0, 0, 0], n_classes=2))
    with pytest.raises(ValueError):
        train("tree_c45", d, np.array([1.0, 1.0, 1.5, 1.0]))
    with pytest.raises(ValueError):
        train("tree_c45", d, np.ones(3))


@pytest.mark.parametrize(
    "kind, params",
    [("knn5", {"k": 0}), ("mlp", {"epochs": 0}), ("random_forest", {"n_trees": 0}),
     ("tree_c45", {"confidence": 0.9}), ("ripper", {"grow_fraction": 1.0}), ("mlp", {"depth": 2})],
)
def test_hyperparameter_validation(kind, params):
    with pytest.raises(ValueError):
        LearnerSpec(kind, params)
    with pytest.raises(ValueError):
        LearnerSpec("svm")


@pytest.mark.parametrize("kind", KINDS)
def test_learners_fit_bundled_data(kind, iris):
    m = train(fast(kind), iris)
    assert np.mean(m.predict(iris.X) == iris.y) > 0.85


def test_mlp_default_hidden_units():
    d = numeric_dataset(np.random.default_rng(0).normal(size=(12, 4)), np.repeat([0, 1, 2], 4))
    m = train(LearnerSpec("mlp", {"epochs": 1}), d)
    assert m.W1.shape == (math.ceil((4 + 3) / 2), 4)
