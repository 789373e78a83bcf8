import numpy as np
import pytest

from evenif.dataset import Dataset
from evenif.encoding import Encoder
from evenif.errors import PredictorError
from evenif.predictors import (
    LogisticModel,
    TreeModel,
    load_model,
    model_from_dict,
    train,
)
from evenif import synth


def _toy_dataset(n=80, seed=0):
    rng = np.random.default_rng(seed)
    schema = synth.unit_box_schema(2)
    X = rng.uniform(size=(n, 2))
    y = (X[:, 0] + X[:, 1] > 1.0).astype(int)
    records = [{"f0": float(a), "f1": float(b)} for a, b in X]
    return Dataset(schema, Encoder(schema), records, y)


def test_zero_logistic_scores_half():
    m = LogisticModel(np.zeros(3), 0.0)
    assert m.score(np.array([5.0, -2.0, 7.0])) == pytest.approx(0.5)
    m2 = LogisticModel(np.array([1.0, 0.0]), 0.0)
    assert m2.score(np.array([0.0, 0.0])) == pytest.approx(0.5)


def test_scores_bounded_and_label_strict():
    ds = _toy_dataset()
    for kind in ("logistic", "tree", "naive-bayes", "mlp"):
        hp = {"epochs": 200} if kind == "mlp" else None
        model = train(ds, kind, hp, seed=0)
        s = model.scores(np.random.default_rng(1).uniform(-3, 3, size=(200, 2)))
        assert (s >= 0).all() and (s <= 1).all()
        assert (model.labels(ds.X) == (model.scores(ds.X) > model.psi)).all()


def test_training_single_class_errors():
    ds = _toy_dataset()
    ds.labels[:] = 1
    with pytest.raises(PredictorError):
        train(ds, "logistic", seed=0)


def test_training_is_seed_deterministic():
    ds = _toy_dataset()
    a = train(ds, "mlp", {"epochs": 150}, seed=3)
    b = train(ds, "mlp", {"epochs": 150}, seed=3)
    assert a.to_dict() == b.to_dict()
    t1 = train(ds, "tree", seed=1)
    t2 = train(ds, "tree", seed=1)
    assert t1.to_dict() == t2.to_dict()


def test_logistic_separable_holdout_accuracy():
    rng = np.random.default_rng(0)
    schema = synth.unit_box_schema(2)
    X = np.vstack([rng.normal(0.25, 0.05, size=(40, 2)), rng.normal(0.75, 0.05, size=(40, 2))])
    y = np.r_[np.zeros(40, int), np.ones(40, int)]
    ds = Dataset(schema, Encoder(schema), [{"f0": float(a), "f1": float(b)} for a, b in X], y)
    model = train(ds, "logistic", seed=0)
    assert model.holdout_accuracy == 1.0


def test_naive_bayes_constant_feature_guard():
    schema = synth.unit_box_schema(2)
    X = np.zeros((40, 2))
    X[:, 1] = np.linspace(0, 1, 40)
    y = (X[:, 1] > 0.5).astype(int)
    ds = Dataset(schema, Encoder(schema), [{"f0": float(a), "f1": float(b)} for a, b in X], y)
    model = train(ds, "naive-bayes", seed=0)  # variance floor handles the constant column
    s = model.scores(ds.X)
    assert np.isfinite(s).all()


def test_mlp_two_moons_accuracy():
    ds = synth.two_moons_dataset(400, seed=0)
    model = train(ds, "mlp", {"hidden": 16}, seed=0)
    assert model.holdout_accuracy >= 0.9


def test_tree_leaf_fraction_hand_trace():
    # 8 points on a line, labels 000 11111: the best gini split is the pure
    # one at 0.35; leaves carry Laplace-smoothed (+1/+2) class fractions
    schema = synth.unit_box_schema(1)
    vals = [0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9]
    y = np.array([0, 0, 0, 1, 1, 1, 1, 1])
    ds = Dataset(schema, Encoder(schema), [{"f0": v} for v in vals], y)
    tree = TreeModel.fit(ds.X, y, max_depth=2, min_leaf=2)
    # left leaf {0,0,0}: (0+1)/(3+2); right leaf {1*5}: (5+1)/(5+2)
    assert tree.score(np.array([0.15])) == pytest.approx(1 / 5)
    assert tree.score(np.array([0.85])) == pytest.approx(6 / 7)


def test_logistic_gradient_analytic():
    w = np.array([1.5, -2.0])
    m = LogisticModel(w, 0.3)
    x = np.array([0.2, 0.7])
    s = m.score(x)
    assert np.allclose(m.gradient(x), s * (1 - s) * w)


def test_constant_model_zero_gradient():
    m = LogisticModel(np.zeros(2), 0.0)
    assert np.allclose(m.gradient(np.array([1.0, 2.0])), 0.0)


def test_mlp_gradient_matches_finite_differences():
    ds = _toy_dataset()
    model = train(ds, "mlp", {"epochs": 300}, seed=0)
    rng = np.random.default_rng(5)
    X = rng.uniform(size=(100, 2))
    analytic = model.gradients(X)
    step = 1e-4
    for j in range(2):
        hi, lo = X.copy(), X.copy()
        hi[:, j] += step
        lo[:, j] -= step
        fd = (model.scores(hi) - model.scores(lo)) / (2 * step)
        denom = np.maximum(np.abs(fd), 1e-6)
        assert (np.abs(analytic[:, j] - fd) / denom).max() < 1e-4


def test_tree_fd_fallback_gradient_defined():
    ds = _toy_dataset()
    model = train(ds, "tree", seed=0)
    g = model.gradient(ds.X[0])
    assert g.shape == (2,)
    assert np.isfinite(g).all()


def test_json_persistence_roundtrip(tmp_path):
    ds = _toy_dataset()
    for kind in ("logistic", "tree", "naive-bayes", "mlp"):
        hp = {"epochs": 100} if kind == "mlp" else None
        model = train(ds, kind, hp, seed=0)
        path = tmp_path / f"{kind}.json"
        model.save(path)
        loaded = load_model(path, ds.schema)
        assert np.allclose(loaded.scores(ds.X), model.scores(ds.X))


def test_schema_hash_mismatch_rejected(tmp_path, mixed_schema):
    ds = _toy_dataset()
    model = train(ds, "logistic", seed=0)
    path = tmp_path / "m.json"
    model.save(path)
    with pytest.raises(PredictorError):
        load_model(path, mixed_schema)


def test_unknown_kind_rejected():
    with pytest.raises(PredictorError):
        model_from_dict({"kind": "svm", "params": {}})
