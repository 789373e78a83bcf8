"""Dataset ingestion: CSV loading, row validation, and encoded matrices."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .encoding import Encoder, fit_extrema
from .errors import DataValidationError, SchemaError
from .schema import KIND_CONTINUOUS, FeatureSchema


@dataclass(frozen=True)
class Individual:
    """One row: raw record, its encoded vector, and an opaque id."""

    id: str
    raw: dict
    x: np.ndarray


@dataclass
class Dataset:
    """Immutable-after-load collection of encoded individuals plus labels."""

    schema: FeatureSchema
    encoder: Encoder
    records: list[dict]
    labels: np.ndarray
    ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.ids:
            self.ids = [f"row-{i}" for i in range(len(self.records))]
        self.X = self.encoder.encode_rows(self.records)
        self.labels = np.asarray(self.labels, dtype=int)

    def __len__(self) -> int:
        return len(self.records)

    def individual(self, key: int | str) -> Individual:
        if isinstance(key, str):
            try:
                idx = self.ids.index(key)
            except ValueError:
                raise DataValidationError(f"unknown individual id {key!r}") from None
        else:
            idx = int(key)
            if not (0 <= idx < len(self.records)):
                raise DataValidationError(f"individual index {idx} out of range")
        return Individual(id=self.ids[idx], raw=dict(self.records[idx]), x=self.X[idx].copy())

    def positive_indices(self, model) -> np.ndarray:
        """Indices the *model* classifies positively (not the stored labels)."""
        return np.flatnonzero(model.scores(self.X) > model.psi)

    def reencoded(self, mode: str) -> "Dataset":
        """Same rows under the other layout (shares records, refits nothing)."""
        enc = Encoder(self.schema, mode=mode, extrema=_extrema_of(self.encoder))
        return Dataset(self.schema, enc, self.records, self.labels, list(self.ids))


def _extrema_of(encoder: Encoder) -> dict[str, tuple[float, float]]:
    return {
        s.spec.name: (s.lo, s.hi)
        for s in encoder.slots
        if s.spec.kind == KIND_CONTINUOUS
    }


def _validate_row(schema: FeatureSchema, row: dict) -> tuple[dict, str | None]:
    record = {}
    for spec in schema.features:
        value = row.get(spec.name)
        if value is None or value == "":
            return {}, f"missing value for feature {spec.name!r}"
        if spec.kind == KIND_CONTINUOUS:
            try:
                record[spec.name] = float(value)
            except ValueError:
                return {}, f"feature {spec.name!r}: non-numeric value {value!r}"
        else:
            if str(value) not in spec.levels:
                return {}, f"feature {spec.name!r}: unknown categorical level {value!r}"
            record[spec.name] = str(value)
    return record, None


def load_dataset(
    path,
    schema: FeatureSchema,
    mode: str = "onehot",
    fit_scaling: bool = True,
) -> Dataset:
    """Load a CSV (header row, UTF-8) against *schema*.

    The header must contain every feature name plus the label column.  Rows
    failing validation abort the load with a ``DataValidationError`` naming
    each offending row index and reason.  When ``fit_scaling`` is true,
    continuous scaling extrema are fitted from the loaded rows (specs with a
    pinned ``scale`` keep it either way).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return _load_csv(fh, schema, mode=mode, fit_scaling=fit_scaling)


def loads_dataset(text: str, schema: FeatureSchema, **kwargs) -> Dataset:
    return _load_csv(io.StringIO(text), schema, **kwargs)


def _load_csv(fh, schema: FeatureSchema, mode: str = "onehot", fit_scaling: bool = True) -> Dataset:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None:
        raise DataValidationError("no data rows")
    missing = ({f.name for f in schema.features} | {schema.label}) - set(reader.fieldnames)
    if missing:
        raise SchemaError(f"CSV missing column(s): {sorted(missing)}")

    records, labels, bad = [], [], {}
    for i, row in enumerate(reader):
        record, err = _validate_row(schema, row)
        label_raw = row.get(schema.label)
        if err is None and label_raw not in ("0", "1"):
            err = f"label {label_raw!r} is not 0/1"
        if err is not None:
            bad[i] = err
            continue
        records.append(record)
        labels.append(int(label_raw))
    if bad:
        lines = "; ".join(f"row {i}: {msg}" for i, msg in sorted(bad.items())[:20])
        raise DataValidationError(f"{len(bad)} invalid row(s): {lines}", rows=bad)
    if not records:
        raise DataValidationError("no data rows")

    extrema = fit_extrema(schema, records) if fit_scaling else None
    encoder = Encoder(schema, mode=mode, extrema=extrema)
    return Dataset(schema, encoder, records, np.array(labels), [])


def write_csv(path, schema: FeatureSchema, records: list[dict], labels) -> None:
    """Write rows in schema column order with a trailing label column."""
    names = schema.names + [schema.label]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for record, label in zip(records, labels):
            row = []
            for spec in schema.features:
                v = record[spec.name]
                row.append(f"{v:.10g}" if spec.kind == KIND_CONTINUOUS else str(v))
            row.append(str(int(label)))
            writer.writerow(row)
