import time

import numpy as np
import pytest

from evenif.actions import build_action_space
from evenif.dataset import Dataset
from evenif.encoding import Encoder
from evenif.engines import (
    CausalConfig,
    explain_causal,
    explain_noncausal,
    project_action,
)
from evenif.errors import NoEffectiveSemifactualError, NotPositiveOutcomeError
from evenif.objective import ObjectiveConfig, ball_offsets
from evenif.predictors import LogisticModel
from evenif.schema import FeatureSchema, FeatureSpec
from evenif.scm import Scm, ScmNode, independent_scm
from evenif import synth

from conftest import make_line_dataset


def pick_deep(ds, model, rank: int = 0):
    """A positively classified individual well inside the positive region."""
    pos = ds.positive_indices(model)
    order = pos[np.argsort(-model.scores(ds.X[pos]), kind="stable")]
    return ds.individual(int(order[rank]))


def grid_oracle_gain(model, dataset, m_dims, x_vals, epsilon, n_mc=100, h_p_min=0.99,
                     step=1e-3, seed=1234):
    """Exhaustive grid search for the best feasible gain, independent of the
    engines: every grid point must keep the label and have an all-but-one
    safe Monte Carlo neighborhood at the stated epsilon."""
    schema = dataset.schema
    enc = dataset.encoder
    space = build_action_space(enc.encode_record(
        {f.name: v for f, v in zip(schema.features, x_vals)}), schema, enc)
    axes = [np.arange(c.lo, c.hi + step / 2, step) for c in space.coords]
    mesh = np.meshgrid(*axes, indexing="ij")
    thetas = np.stack([g.ravel() for g in mesh], axis=1)
    ends = space.apply(thetas)
    labels_ok = model.scores(ends) > model.psi
    gains = np.linalg.norm(ends - space.x_vec[None, :], axis=1)
    offsets = ball_offsets(n_mc, enc.width, epsilon, np.random.default_rng(seed))
    lo, hi = enc.coordinate_box()
    best = 0.0
    order = np.argsort(-gains)
    for i in order:
        if not labels_ok[i]:
            continue
        if gains[i] <= best:
            break
        pts = np.clip(ends[i][None, :] + offsets, lo[None, :], hi[None, :])
        if (model.scores(pts) > model.psi).mean() >= h_p_min:
            best = gains[i]
            break
    return best


@pytest.fixture(scope="module")
def oracle_1d(line_model_module):
    ds = make_line_dataset(41, 1, direction="decrease")
    cfg = ObjectiveConfig(epsilon=0.05, n_mc=100)
    oracle = grid_oracle_gain(line_model_module, ds, 1, [0.9], cfg.epsilon)
    return ds, cfg, oracle


@pytest.fixture(scope="module")
def line_model_module():
    return LogisticModel(np.array([10.0]), -5.0, psi=0.5, encoding="onehot")


def test_ga_refuses_negative_individual(line_model_module):
    ds = make_line_dataset()
    with pytest.raises(NotPositiveOutcomeError, match="not a positive outcome"):
        explain_noncausal({"f0": 0.2}, line_model_module, ds, ds.schema, 1, seed=0)


def test_ga_oracle_near_optimality_1d(oracle_1d, line_model_module):
    ds, cfg, oracle = oracle_1d
    t0 = time.time()
    expl = explain_noncausal({"f0": 0.9}, line_model_module, ds, ds.schema, 1,
                             config=cfg, seed=0)
    elapsed = time.time() - t0
    assert elapsed < 10.0
    item = expl.items[0]
    assert item.robustness_abs == 1
    assert item.robustness_mc >= 0.99
    assert item.gain >= 0.95 * oracle


def test_causal_engine_matches_shared_oracle(oracle_1d):
    ds, cfg, oracle = oracle_1d
    model = LogisticModel(np.array([10.0]), -5.0, psi=0.5, encoding="ordinal")
    enc = Encoder(ds.schema, mode="ordinal")
    scm = independent_scm([f.name for f in ds.schema.features])
    cfg_l1 = ObjectiveConfig(epsilon=0.05, n_mc=100, norm="l1")
    expl = explain_causal({"f0": 0.9}, model, scm, ds.schema, enc, config=cfg_l1, seed=0)
    item = expl.items[0]
    assert item.robustness_abs == 1
    assert item.gain >= 0.95 * oracle  # L1 == L2 in one dimension


def test_ga_oracle_near_optimality_2d():
    schema = synth.unit_box_schema(2, direction="both")
    # grid-uniform reference data keeps the plausibility factor flat
    g = np.linspace(0.0, 1.0, 15)
    pts = np.array([[a, b] for a in g for b in g])
    ds = Dataset(schema, Encoder(schema),
                 [{"f0": float(a), "f1": float(b)} for a, b in pts],
                 (pts.sum(axis=1) > 1.0).astype(int))
    model = LogisticModel(np.array([4.0, 4.0]), -2.0, psi=0.5, encoding="onehot")
    cfg = ObjectiveConfig(epsilon=0.05, n_mc=100)
    oracle = grid_oracle_gain(model, ds, 2, [0.6, 0.6], cfg.epsilon, step=2e-3)
    t0 = time.time()
    expl = explain_noncausal({"f0": 0.6, "f1": 0.6}, model, ds, ds.schema, 1,
                             config=cfg, seed=0)
    assert time.time() - t0 < 10.0
    assert expl.items[0].gain >= 0.95 * oracle


def test_ga_duplicates_fill_m():
    """One categorical feature with a single surviving level: requesting
    m=4 must return exactly 4 items with duplicates."""
    schema = FeatureSchema(
        features=(FeatureSpec("c", "categorical", levels=("a", "b", "z"),
                              actionable=True, direction="increase"),),
        label="y",
    )
    enc = Encoder(schema)
    ds = Dataset(schema, enc, [{"c": "a"}, {"c": "b"}, {"c": "z"}], np.array([1, 1, 0]))
    # one-hot weights: level b scores high, level z flips the label
    model = LogisticModel(np.array([2.0, 2.0, -2.0]), 0.0, psi=0.5, encoding="onehot")
    expl = explain_noncausal({"c": "a"}, model, ds, schema, 4, seed=0)
    assert len(expl.items) == 4
    assert all(it.semifactual["c"] == "b" for it in expl.items)


def test_ga_deterministic(credit_small):
    import evenif

    model = evenif.train(credit_small, "logistic", seed=0)
    pos = credit_small.positive_indices(model)
    x = credit_small.individual(int(pos[0]))
    a = explain_noncausal(x, model, credit_small, credit_small.schema, 3, seed=11)
    b = explain_noncausal(x, model, credit_small, credit_small.schema, 3, seed=11)
    assert a.to_dict() == b.to_dict()
    c = explain_noncausal(x, model, credit_small, credit_small.schema, 3, seed=12)
    assert c.to_dict() != a.to_dict()


def test_ga_elitism_keeps_best_fitness_monotone(credit_small):
    import evenif

    model = evenif.train(credit_small, "tree", seed=0)
    pos = credit_small.positive_indices(model)
    x = credit_small.individual(int(pos[1]))
    expl = explain_noncausal(x, model, credit_small, credit_small.schema, 2, seed=5)
    history = expl.meta["best_fitness_history"]
    assert len(history) == 20
    assert all(b >= a - 1e-12 for a, b in zip(history, history[1:]))


def test_empty_effective_space_raises():
    """Boundary immediately below the individual: every feasible decrease
    crosses, so the engine must refuse with diagnostics instead of returning
    a constraint-violating item."""
    ds = make_line_dataset(41, 1, direction="decrease")
    model = LogisticModel(np.array([1000.0]), -899.0, psi=0.5, encoding="onehot")
    assert model.label(np.array([0.9])) == 1
    with pytest.raises(NoEffectiveSemifactualError) as err:
        explain_noncausal({"f0": 0.9}, model, ds, ds.schema, 2,
                          config=ObjectiveConfig(epsilon=0.05), seed=0)
    assert err.value.diagnostics["feasible"] == 0


def test_causal_empty_effective_space_raises():
    ds = make_line_dataset(41, 1, direction="decrease")
    model = LogisticModel(np.array([1000.0]), -899.0, psi=0.5, encoding="ordinal")
    enc = Encoder(ds.schema, mode="ordinal")
    scm = independent_scm(["f0"])
    with pytest.raises(NoEffectiveSemifactualError):
        explain_causal({"f0": 0.9}, model, scm, ds.schema, enc,
                       config=ObjectiveConfig(epsilon=0.05, norm="l1"), seed=0)


def test_lambda_decay_recurrence(adult_bundle):
    import evenif

    ds, scm = adult_bundle
    model = evenif.train(ds, "logistic", seed=0)
    x = pick_deep(ds, model)
    causal = CausalConfig(eta=0.9, lambda0=1.0)
    expl = explain_causal(x, model, scm, ds.schema, ds.encoder,
                          config=ObjectiveConfig(norm="l1"), causal=causal, seed=0)
    for it in expl.items:
        t = it.meta["iterations"]
        assert it.meta["final_lambda"] == pytest.approx(0.9 ** t, rel=1e-12)


def test_causal_chain_gain_exceeds_substitution():
    """Root intervention with a nonzero child edge: the structural end state
    moves the child too, so gain strictly exceeds the substitution's."""
    schema = FeatureSchema(
        features=(
            FeatureSpec("f0", "continuous", actionable=True, direction="increase",
                        bounds=(0.0, 1.0), scale=(0.0, 1.0)),
            FeatureSpec("f1", "continuous", bounds=(0.0, 2.0), scale=(0.0, 1.0)),
        ),
        label="y",
    )
    enc = Encoder(schema, mode="ordinal")
    scm = Scm((ScmNode("f0"), ScmNode("f1", parents=("f0",), weights=(0.5,))))
    model = LogisticModel(np.array([0.0, 0.0]), 5.0, psi=0.5, encoding="ordinal")
    cfg = ObjectiveConfig(norm="l1")
    expl = explain_causal({"f0": 0.2, "f1": 0.6}, model, scm, schema, enc,
                          config=cfg, seed=0)
    item = expl.items[0]
    moved = abs(item.action["f0"])
    assert item.gain > moved > 0.0
    assert item.gain == pytest.approx(moved * 1.5, rel=1e-6)


def test_causal_items_verified_safe(adult_bundle):
    import evenif

    ds, scm = adult_bundle
    model = evenif.train(ds, "logistic", seed=0)
    x = pick_deep(ds, model, rank=2)
    expl = explain_causal(x, model, scm, ds.schema, ds.encoder,
                          config=ObjectiveConfig(norm="l1"), seed=3)
    for it in expl.items:
        assert it.robustness_abs == 1
        assert model.label(it.end_state) == 1
        assert it.robustness_mc == 1.0  # final verified batch was clean
        assert it.gain > 0


def test_causal_deterministic(adult_bundle):
    import evenif

    ds, scm = adult_bundle
    model = evenif.train(ds, "logistic", seed=0)
    x = pick_deep(ds, model, rank=4)
    a = explain_causal(x, model, scm, ds.schema, ds.encoder, seed=2)
    b = explain_causal(x, model, scm, ds.schema, ds.encoder, seed=2)
    assert a.to_dict() == b.to_dict()


def test_project_action_idempotent(mixed_schema, mixed_encoder):
    x = mixed_encoder.encode_record({"age": 40.0, "housing": "own", "country": "a"})
    space = build_action_space(x, mixed_schema, mixed_encoder)
    rng = np.random.default_rng(0)
    for _ in range(100):
        theta = rng.uniform(-2, 2, size=len(space))
        once = project_action(theta, space)
        assert np.array_equal(project_action(once, space), once)
    # in-bounds action is unchanged
    inside = space.sample(rng, 1)[0]
    assert np.allclose(project_action(inside, space), inside)


def test_every_returned_item_within_bounds(credit_small):
    import evenif

    model = evenif.train(credit_small, "logistic", seed=0)
    pos = credit_small.positive_indices(model)
    x = credit_small.individual(int(pos[5]))
    expl = explain_noncausal(x, model, credit_small, credit_small.schema, 4, seed=9)
    space = build_action_space(x.x, credit_small.schema, credit_small.encoder)
    for it in expl.items:
        assert (it.theta >= space.lo - 1e-9).all()
        assert (it.theta <= space.hi + 1e-9).all()
        assert it.robustness_abs == 1
