"""Exception hierarchy shared across the package."""

from __future__ import annotations


class EvenIfError(Exception):
    """Base class for all package errors."""

    #: machine-readable error kind, used by the CLI/service error envelopes
    kind = "internal"


class SchemaError(EvenIfError):
    """Invalid feature schema or schema/record mismatch."""

    kind = "schema"


class DataValidationError(EvenIfError):
    """One or more dataset rows failed validation.

    ``rows`` maps row index -> human-readable reason.
    """

    kind = "data"

    def __init__(self, message: str, rows: dict[int, str] | None = None):
        super().__init__(message)
        self.rows = dict(rows or {})


class EmptyActionSpaceError(EvenIfError):
    """No feasible action exists for this individual."""

    kind = "action-space"


class NotPositiveOutcomeError(EvenIfError):
    """Explanation requested for an individual the model classifies negatively."""

    kind = "not-positive"


class NoEffectiveSemifactualError(EvenIfError):
    """The effective solution space is empty: every candidate action either
    crosses the decision boundary or yields non-positive gain.

    ``diagnostics`` carries search statistics for the error report.
    """

    kind = "no-effective-semifactual"

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ScmConfigError(EvenIfError):
    """Structural model config is not a valid DAG of known nodes."""

    kind = "scm"


class PredictorError(EvenIfError):
    """Model training or inference failed."""

    kind = "predictor"
