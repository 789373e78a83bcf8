"""Synthetic benchmark data.

Shipped stand-ins for the restricted / external benchmark sources: a
credit-approval table in the German-credit style (3 continuous + 17 ordered
categorical features, 15 of them actionable), and two small linear
structural models ("adult-like", "compas-like") whose equations live in the
scaled feature space.  The structural configs are labeled *-like on
purpose: they follow the published graph shapes but make no claim of
matching the original equations numerically.
"""

from __future__ import annotations

import numpy as np

from .dataset import Dataset
from .encoding import Encoder
from .schema import FeatureSchema, FeatureSpec
from .scm import Scm, ScmNode


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


# ---------------------------------------------------------------------------
# credit approval (non-causal lane)
# ---------------------------------------------------------------------------

_CREDIT_CATEGORICALS = [
    # name, ordered levels, actionable, direction
    ("status", ["none", "low", "medium", "high"], True, "decrease"),
    ("credit_history", ["poor", "fair", "good", "excellent"], True, "decrease"),
    ("purpose", ["car", "furniture", "business", "education"], False, "frozen"),
    ("savings", ["none", "small", "medium", "large"], True, "decrease"),
    ("employment_duration", ["unemployed", "short", "medium", "long"], True, "decrease"),
    ("installment_rate", ["low", "medium", "high", "very_high"], True, "decrease"),
    ("personal_status_sex", ["single", "married", "divorced"], False, "frozen"),
    ("other_debtors", ["none", "co_applicant", "guarantor"], True, "increase"),
    ("present_residence", ["settled", "recent", "new"], True, "increase"),
    ("property", ["real_estate", "car", "savings_only", "none"], True, "increase"),
    ("other_installment_plans", ["none", "one", "several"], True, "increase"),
    ("housing", ["own", "rent", "free"], True, "increase"),
    ("number_credits", ["one", "two", "three", "four_plus"], True, "increase"),
    ("job", ["unemployed", "unskilled", "skilled", "management"], True, "decrease"),
    ("people_liable", ["none", "one", "two_plus"], True, "increase"),
    ("telephone", ["none", "yes"], False, "frozen"),
    ("foreign_worker", ["no", "yes"], False, "frozen"),
]

# weights on the scaled level index (or scaled value) in the label rule;
# positive means higher values help approval
_CREDIT_WEIGHTS = {
    "duration": -1.1,
    "amount": -1.5,
    "age": 0.4,
    "status": 2.2,
    "credit_history": 1.8,
    "savings": 1.5,
    "employment_duration": 1.2,
    "installment_rate": -0.8,
    "other_debtors": 0.4,
    "present_residence": -0.4,
    "property": -0.9,
    "other_installment_plans": -0.7,
    "housing": -0.5,
    "number_credits": -0.6,
    "job": 0.9,
    "people_liable": -0.6,
}


def credit_schema() -> FeatureSchema:
    feats = [
        FeatureSpec("duration", "continuous", actionable=True, direction="increase",
                    bounds=(6.0, 72.0), scale=(6.0, 72.0)),
        FeatureSpec("amount", "continuous", actionable=True, direction="increase",
                    bounds=(250.0, 20000.0), scale=(250.0, 20000.0)),
        FeatureSpec("age", "continuous", actionable=False, direction="frozen",
                    bounds=(18.0, 75.0), scale=(18.0, 75.0)),
    ]
    for name, levels, actionable, direction in _CREDIT_CATEGORICALS:
        feats.append(
            FeatureSpec(name, "categorical", levels=tuple(levels),
                        actionable=actionable, direction=direction)
        )
    return FeatureSchema(
        features=tuple(feats),
        label="approved",
        psi=0.5,
        positive_label_meaning="loan approved",
    )


def credit_records(n: int = 1000, seed: int = 7) -> tuple[list[dict], np.ndarray]:
    """Sample applicants with a latent quality driving both levels and label."""
    rng = np.random.default_rng(seed)
    schema = credit_schema()
    q = rng.normal(size=n)
    records = [{} for _ in range(n)]
    z = np.zeros(n)
    for spec in schema.features:
        w = _CREDIT_WEIGHTS.get(spec.name, 0.0)
        drift = np.sign(w) if w else 0.0
        if spec.kind == "continuous":
            lo, hi = spec.scale
            scaled = np.clip(_sigmoid(0.8 * drift * q + rng.normal(0, 0.9, n)), 0.01, 0.99)
            col = [float(round(lo + s * (hi - lo), 2)) for s in scaled]
            z += w * scaled
        else:
            L = spec.n_levels
            frac = _sigmoid(0.8 * drift * q + rng.normal(0, 1.0, n))
            idx = np.clip(np.floor(frac * L).astype(int), 0, L - 1)
            col = [spec.levels[i] for i in idx]
            z += w * idx / max(L - 1, 1)
        for i in range(n):
            records[i][spec.name] = col[i]
    labels = (_sigmoid(1.8 * (z + 0.5) + rng.normal(0, 0.35, n)) > 0.5).astype(int)
    return records, labels


def credit_dataset(n: int = 1000, seed: int = 7, mode: str = "onehot") -> Dataset:
    schema = credit_schema()
    records, labels = credit_records(n, seed)
    encoder = Encoder(schema, mode=mode)
    return Dataset(schema, encoder, records, labels)


# ---------------------------------------------------------------------------
# causal lane: adult-like and compas-like structural models
# ---------------------------------------------------------------------------


def adult_schema() -> FeatureSchema:
    # every feature is treated as real-valued in the causal lane
    def cont(name, lo, hi, **kw):
        return FeatureSpec(name, "continuous", bounds=(lo, hi), scale=(lo, hi), **kw)

    return FeatureSchema(
        features=(
            cont("sex", 0.0, 1.0),
            cont("age", 18.0, 80.0, actionable=True, direction="increase", polarity="positive"),
            cont("native_country", 0.0, 1.0),
            cont("marital_status", 0.0, 1.0),
            cont("education_num", 1.0, 16.0),
            cont("hours_per_week", 0.0, 80.0, actionable=True, direction="decrease",
                 polarity="negative"),
        ),
        label="high_income",
        psi=0.5,
        positive_label_meaning="income above threshold",
    )


def adult_scm() -> Scm:
    """Adult-like chain: age feeds marital status, education and hours."""
    return Scm(
        (
            ScmNode("sex", noise_scale=0.18, intercept=0.5),
            ScmNode("age", noise_scale=0.15, intercept=0.45),
            ScmNode("native_country", noise_scale=0.18, intercept=0.5),
            ScmNode("marital_status", parents=("sex", "age"), weights=(0.1, 0.35),
                    intercept=0.15, noise_scale=0.1),
            ScmNode("education_num", parents=("age", "native_country"), weights=(0.3, 0.2),
                    intercept=0.2, noise_scale=0.1),
            # older individuals work fewer hours: the net age effect on hours
            # (direct plus the education/marital paths) is negative
            ScmNode("hours_per_week", parents=("age", "marital_status", "education_num"),
                    weights=(-0.3, 0.1, 0.35), intercept=0.35, noise_scale=0.1),
        )
    )


_ADULT_W = np.array([0.1, 0.6, 0.0, 0.3, 1.6, 1.8])
_ADULT_B = -1.88


def adult_records(n: int = 1500, seed: int = 11) -> tuple[list[dict], np.ndarray]:
    rng = np.random.default_rng(seed)
    schema = adult_schema()
    Z = np.clip(adult_scm().sample(n, rng), 0.0, 1.0)
    labels = (_sigmoid(3.0 * (Z @ _ADULT_W + _ADULT_B) + rng.normal(0, 0.3, n)) > 0.5).astype(int)
    enc = Encoder(schema, mode="ordinal")
    records = []
    for row in Z:
        records.append(
            {spec.name: round(enc.unscale_value(spec.name, v), 4) for spec, v in zip(schema.features, row)}
        )
    return records, labels


def adult_dataset(n: int = 1500, seed: int = 11) -> Dataset:
    schema = adult_schema()
    records, labels = adult_records(n, seed)
    return Dataset(schema, Encoder(schema, mode="ordinal"), records, labels)


def compas_schema() -> FeatureSchema:
    def cont(name, lo, hi, **kw):
        return FeatureSpec(name, "continuous", bounds=(lo, hi), scale=(lo, hi), **kw)

    return FeatureSchema(
        features=(
            cont("age", 18.0, 70.0, actionable=True, direction="increase", polarity="positive"),
            cont("sex", 0.0, 1.0),
            cont("race", 0.0, 1.0),
            cont("priors_count", 0.0, 15.0, actionable=True, direction="increase",
                 polarity="positive"),
        ),
        label="low_risk",
        psi=0.5,
        positive_label_meaning="assessed low risk",
    )


def compas_scm() -> Scm:
    return Scm(
        (
            ScmNode("age", noise_scale=0.16, intercept=0.42),
            ScmNode("sex", noise_scale=0.18, intercept=0.5),
            ScmNode("race", parents=("age", "sex"), weights=(0.2, 0.1),
                    intercept=0.3, noise_scale=0.12),
            ScmNode("priors_count", parents=("age", "sex", "race"), weights=(0.3, 0.15, 0.2),
                    intercept=0.05, noise_scale=0.1),
        )
    )


_COMPAS_W = np.array([0.8, 0.0, 0.0, -2.6])
_COMPAS_B = 0.61


def compas_records(n: int = 1200, seed: int = 13) -> tuple[list[dict], np.ndarray]:
    rng = np.random.default_rng(seed)
    schema = compas_schema()
    Z = np.clip(compas_scm().sample(n, rng), 0.0, 1.0)
    labels = (_sigmoid(3.0 * (Z @ _COMPAS_W + _COMPAS_B) + rng.normal(0, 0.3, n)) > 0.5).astype(int)
    enc = Encoder(schema, mode="ordinal")
    records = [
        {spec.name: round(enc.unscale_value(spec.name, v), 4) for spec, v in zip(schema.features, row)}
        for row in Z
    ]
    return records, labels


def compas_dataset(n: int = 1200, seed: int = 13) -> Dataset:
    schema = compas_schema()
    records, labels = compas_records(n, seed)
    return Dataset(schema, Encoder(schema, mode="ordinal"), records, labels)


# ---------------------------------------------------------------------------
# small geometry problems for model checks
# ---------------------------------------------------------------------------


def two_moons(n: int = 400, noise: float = 0.15, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    n_half = n // 2
    t = rng.uniform(0, np.pi, size=n_half)
    upper = np.c_[np.cos(t), np.sin(t)]
    lower = np.c_[1.0 - np.cos(t), 0.5 - np.sin(t)]
    X = np.vstack([upper, lower]) + rng.normal(0, noise, size=(2 * n_half, 2))
    y = np.r_[np.zeros(n_half, int), np.ones(n_half, int)]
    order = rng.permutation(len(y))
    return X[order], y[order]


def two_moons_dataset(n: int = 400, noise: float = 0.15, seed: int = 0) -> Dataset:
    X, y = two_moons(n, noise, seed)
    schema = FeatureSchema(
        features=(
            FeatureSpec("x1", "continuous", actionable=True, direction="both",
                        bounds=(-2.0, 3.0), scale=(-2.0, 3.0)),
            FeatureSpec("x2", "continuous", actionable=True, direction="both",
                        bounds=(-1.5, 2.0), scale=(-1.5, 2.0)),
        ),
        label="label",
    )
    records = [{"x1": float(a), "x2": float(b)} for a, b in X]
    return Dataset(schema, Encoder(schema, mode="onehot"), records, y)


def unit_box_schema(k: int = 1, direction: str = "both", polarity: str | None = None) -> FeatureSchema:
    """k continuous features on [0, 1] with identity scaling; handy for oracles."""
    feats = tuple(
        FeatureSpec(f"f{i}", "continuous", actionable=True, direction=direction,
                    bounds=(0.0, 1.0), scale=(0.0, 1.0), polarity=polarity)
        for i in range(k)
    )
    return FeatureSchema(features=feats, label="label")
