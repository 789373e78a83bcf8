"""Record <-> vector encoding with two layouts.

``onehot``  — continuous coordinates (min-max scaled) plus a one-hot block
              per categorical feature; the layout used by the non-causal
              engines and their L2 geometry.
``ordinal`` — exactly one coordinate per feature; categorical features are
              their level index scaled to [0, 1], i.e. treated as
              real-valued.  The layout the structural model and the causal
              engines operate on.

All distances, neighborhoods and gains downstream are computed in the
encoded (scaled) space; reports convert back to raw units via ``decode``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .schema import KIND_CATEGORICAL, KIND_CONTINUOUS, FeatureSchema, FeatureSpec

MODES = ("onehot", "ordinal")


@dataclass(frozen=True)
class _Slot:
    spec: FeatureSpec
    offset: int
    width: int
    # scaling extrema for continuous features (raw units)
    lo: float = 0.0
    hi: float = 1.0


class Encoder:
    """Schema-bound encoder for one layout mode.

    Continuous features are scaled by ``(v - lo) / (hi - lo)`` where the
    extrema come from, in order of precedence: the spec's pinned ``scale``,
    the ``extrema`` argument (typically training-data min/max), or the
    spec's bounds.
    """

    def __init__(
        self,
        schema: FeatureSchema,
        mode: str = "onehot",
        extrema: dict[str, tuple[float, float]] | None = None,
    ):
        if mode not in MODES:
            raise SchemaError(f"unknown encoding mode {mode!r}")
        self.schema = schema
        self.mode = mode
        extrema = extrema or {}
        slots = []
        offset = 0
        for spec in schema.features:
            if spec.kind == KIND_CONTINUOUS:
                lo, hi = spec.scale or extrema.get(spec.name) or spec.bounds or (0.0, 1.0)
                if not (hi > lo):
                    hi = lo + 1.0  # constant feature: avoid a zero denominator
                width = 1
            else:
                lo, hi = 0.0, 1.0
                width = spec.n_levels if mode == "onehot" else 1
            slots.append(_Slot(spec, offset, width, float(lo), float(hi)))
            offset += width
        self._slots = tuple(slots)
        self.width = offset

    # -- scalar helpers --------------------------------------------------

    def slot(self, name: str) -> _Slot:
        for s in self._slots:
            if s.spec.name == name:
                return s
        raise SchemaError(f"unknown feature {name!r}")

    def scale_value(self, name: str, raw: float) -> float:
        s = self.slot(name)
        if s.spec.kind == KIND_CATEGORICAL:
            denom = max(s.spec.n_levels - 1, 1)
            return float(raw) / denom
        return (float(raw) - s.lo) / (s.hi - s.lo)

    def unscale_value(self, name: str, scaled: float) -> float:
        s = self.slot(name)
        if s.spec.kind == KIND_CATEGORICAL:
            return float(scaled) * max(s.spec.n_levels - 1, 1)
        return float(scaled) * (s.hi - s.lo) + s.lo

    def level_step(self, name: str) -> float:
        """Scaled distance between two adjacent levels of a categorical."""
        s = self.slot(name)
        return 1.0 / max(s.spec.n_levels - 1, 1)

    # -- record <-> vector ------------------------------------------------

    def encode_record(self, record: dict) -> np.ndarray:
        vec = np.zeros(self.width)
        for s in self._slots:
            name = s.spec.name
            if name not in record:
                raise SchemaError(f"record missing feature {name!r}")
            value = record[name]
            if s.spec.kind == KIND_CONTINUOUS:
                try:
                    raw = float(value)
                except (TypeError, ValueError):
                    raise SchemaError(f"feature {name!r}: non-numeric value {value!r}") from None
                vec[s.offset] = (raw - s.lo) / (s.hi - s.lo)
            else:
                idx = s.spec.level_index(str(value))
                if self.mode == "onehot":
                    vec[s.offset + idx] = 1.0
                else:
                    vec[s.offset] = idx / max(s.spec.n_levels - 1, 1)
        return vec

    def decode_vector(self, vec: np.ndarray) -> dict:
        """Inverse of ``encode_record``; relaxed categorical blocks project
        to the nearest level (one-hot: argmax, ties to the lowest index)."""
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.width,):
            raise SchemaError(f"vector width {vec.shape} != expected ({self.width},)")
        record = {}
        for s in self._slots:
            name = s.spec.name
            if s.spec.kind == KIND_CONTINUOUS:
                record[name] = float(vec[s.offset]) * (s.hi - s.lo) + s.lo
            else:
                record[name] = s.spec.levels[self.level_of(s, vec)]
        return record

    def level_of(self, slot: _Slot, vec: np.ndarray) -> int:
        if self.mode == "onehot":
            return int(np.argmax(vec[slot.offset : slot.offset + slot.width]))
        denom = max(slot.spec.n_levels - 1, 1)
        idx = int(round(float(vec[slot.offset]) * denom))
        return min(max(idx, 0), slot.spec.n_levels - 1)

    def encode_rows(self, records: list[dict]) -> np.ndarray:
        return np.stack([self.encode_record(r) for r in records]) if records else np.zeros((0, self.width))

    # -- vectorized views --------------------------------------------------

    def feature_values(self, X: np.ndarray) -> np.ndarray:
        """Per-feature scaled values, shape (..., n_features).

        Continuous coordinates pass through; one-hot blocks collapse to
        their argmax level scaled to [0, 1].  Identity reshaping in ordinal
        mode.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.mode == "ordinal":
            return X
        out = np.empty((X.shape[0], len(self._slots)))
        for j, s in enumerate(self._slots):
            if s.spec.kind == KIND_CONTINUOUS:
                out[:, j] = X[:, s.offset]
            else:
                block = X[:, s.offset : s.offset + s.width]
                out[:, j] = np.argmax(block, axis=1) / max(s.spec.n_levels - 1, 1)
        return out

    def feature_deltas(self, X_from: np.ndarray, X_to: np.ndarray) -> np.ndarray:
        """Signed per-feature change in scaled feature units, shape (..., n_features)."""
        return self.feature_values(X_to) - self.feature_values(X_from)

    def polarity_weights(self) -> np.ndarray:
        return np.array([s.spec.polarity_weight for s in self._slots], dtype=float)

    def coordinate_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-coordinate valid interval for clipping relaxed vectors.

        Continuous coordinates use the schema bounds mapped into scaled
        units (falling back to the scaling extrema); categorical
        coordinates live in [0, 1] in both layouts.
        """
        lo = np.zeros(self.width)
        hi = np.ones(self.width)
        for s in self._slots:
            if s.spec.kind == KIND_CONTINUOUS:
                blo, bhi = s.spec.bounds if s.spec.bounds is not None else (s.lo, s.hi)
                lo[s.offset] = (blo - s.lo) / (s.hi - s.lo)
                hi[s.offset] = (bhi - s.lo) / (s.hi - s.lo)
        return lo, hi

    @property
    def slots(self) -> tuple[_Slot, ...]:
        return self._slots

    def set_feature(self, X: np.ndarray, name: str, scaled_values: np.ndarray) -> None:
        """In-place substitution of one feature across rows of ``X``.

        ``scaled_values`` are in scaled feature units; in one-hot mode they
        are rounded onto the level grid and written as exact one-hot blocks.
        """
        s = self.slot(name)
        scaled_values = np.asarray(scaled_values, dtype=float)
        if s.spec.kind == KIND_CONTINUOUS or self.mode == "ordinal":
            X[:, s.offset] = scaled_values
            return
        denom = max(s.spec.n_levels - 1, 1)
        idx = np.clip(np.rint(scaled_values * denom), 0, s.spec.n_levels - 1).astype(int)
        X[:, s.offset : s.offset + s.width] = 0.0
        X[np.arange(X.shape[0]), s.offset + idx] = 1.0


def fit_extrema(schema: FeatureSchema, records: list[dict]) -> dict[str, tuple[float, float]]:
    """Training-data min/max per continuous feature, for min-max scaling."""
    extrema: dict[str, tuple[float, float]] = {}
    for spec in schema.features:
        if spec.kind != KIND_CONTINUOUS:
            continue
        values = [float(r[spec.name]) for r in records if spec.name in r]
        if values:
            extrema[spec.name] = (min(values), max(values))
    return extrema
