"""Shared fixtures: small schemas, toy datasets, and quick models."""

from __future__ import annotations

import numpy as np
import pytest

#: lines appended by the acceptance tests; echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from evenif.dataset import Dataset
from evenif.encoding import Encoder
from evenif.predictors import LogisticModel
from evenif.schema import FeatureSchema, FeatureSpec
from evenif import synth


@pytest.fixture(scope="session")
def mixed_schema() -> FeatureSchema:
    """One continuous + one 3-level categorical + one frozen feature."""
    return FeatureSchema(
        features=(
            FeatureSpec("age", "continuous", actionable=True, direction="increase",
                        bounds=(18.0, 45.0), scale=(18.0, 80.0)),
            FeatureSpec("housing", "categorical", levels=("own", "rent", "free"),
                        actionable=True, direction="increase"),
            FeatureSpec("country", "categorical", levels=("a", "b"), actionable=False),
        ),
        label="ok",
        psi=0.5,
        positive_label_meaning="application accepted",
    )


@pytest.fixture(scope="session")
def mixed_encoder(mixed_schema) -> Encoder:
    return Encoder(mixed_schema, mode="onehot")


def make_line_dataset(n: int = 41, k: int = 1, direction: str = "decrease") -> Dataset:
    """k continuous features on [0, 1] (identity scale), labels via f0 > 0.5."""
    schema = synth.unit_box_schema(k, direction=direction)
    grid = np.linspace(0.0, 1.0, n)
    records = [{f"f{j}": float(v) for j in range(k)} for v in grid]
    labels = (grid > 0.5).astype(int)
    return Dataset(schema, Encoder(schema, mode="onehot"), records, labels)


@pytest.fixture(scope="session")
def line_dataset() -> Dataset:
    return make_line_dataset()


@pytest.fixture(scope="session")
def line_model() -> LogisticModel:
    # score = sigmoid(10 * (f0 - 0.5)): boundary exactly at 0.5
    return LogisticModel(np.array([10.0]), -5.0, psi=0.5, encoding="onehot")


@pytest.fixture(scope="session")
def credit_small():
    ds = synth.credit_dataset(400, seed=7)
    return ds


@pytest.fixture(scope="session")
def adult_bundle():
    return synth.adult_dataset(800, seed=11), synth.adult_scm()
