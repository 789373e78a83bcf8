"""evenif: semifactual ("even if ...") recourse for positive outcomes.

Given a tabular individual a binary classifier already accepts, the engines
search for the largest-benefit feature changes that keep the accepted
outcome, subject to per-individual actionability constraints, robustness in
an epsilon-neighborhood, plausibility, and diversity across the returned
set.  A structural-model-aware engine propagates interventions through
causal dependencies before measuring the benefit.
"""

from .actions import ActionSpace, build_action_space
from .dataset import Dataset, Individual, load_dataset
from .encoding import Encoder
from .engines import (
    CausalConfig,
    ExplanationItem,
    ExplanationSet,
    GaConfig,
    even_if_sentence,
    explain_causal,
    explain_noncausal,
    project_action,
)
from .errors import (
    DataValidationError,
    EmptyActionSpaceError,
    EvenIfError,
    NoEffectiveSemifactualError,
    NotPositiveOutcomeError,
    PredictorError,
    SchemaError,
    ScmConfigError,
)
from .evaluation import (
    BenchmarkReport,
    adversarial_radius,
    aggregate_normalized,
    cohens_d,
    evaluate_explanations,
    run_benchmark,
)
from .objective import (
    ObjectiveConfig,
    cost,
    diversity,
    fitness,
    gain,
    objective_j,
    plausibility_empirical,
    robustness_absolute,
    robustness_probabilistic,
    sample_neighborhood,
)
from .predictors import Predictor, load_model, train
from .schema import FeatureSchema, FeatureSpec
from .scm import Scm, ScmNode, independent_scm, load_scm

__version__ = "0.1.0"

__all__ = [
    "ActionSpace",
    "BenchmarkReport",
    "CausalConfig",
    "Dataset",
    "DataValidationError",
    "EmptyActionSpaceError",
    "Encoder",
    "EvenIfError",
    "ExplanationItem",
    "ExplanationSet",
    "FeatureSchema",
    "FeatureSpec",
    "GaConfig",
    "Individual",
    "NoEffectiveSemifactualError",
    "NotPositiveOutcomeError",
    "ObjectiveConfig",
    "Predictor",
    "PredictorError",
    "SchemaError",
    "Scm",
    "ScmConfigError",
    "ScmNode",
    "adversarial_radius",
    "aggregate_normalized",
    "build_action_space",
    "cohens_d",
    "cost",
    "diversity",
    "evaluate_explanations",
    "even_if_sentence",
    "explain_causal",
    "explain_noncausal",
    "fitness",
    "gain",
    "independent_scm",
    "load_dataset",
    "load_model",
    "load_scm",
    "objective_j",
    "plausibility_empirical",
    "project_action",
    "robustness_absolute",
    "robustness_probabilistic",
    "run_benchmark",
    "sample_neighborhood",
    "train",
]
