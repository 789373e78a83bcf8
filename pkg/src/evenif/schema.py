"""Feature schema: per-feature kind, actionability, bounds, and gain polarity.

The schema is the contract between datasets, constraints, and the engines.
Categorical features carry an explicit level order; directions ("increase" /
"decrease") and gain polarity are interpreted against that order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

from .errors import SchemaError

KIND_CONTINUOUS = "continuous"
KIND_CATEGORICAL = "categorical"

DIRECTIONS = ("increase", "decrease", "both", "frozen")
POLARITIES = ("positive", "negative", "neutral")


@dataclass(frozen=True)
class FeatureSpec:
    """One feature: kind, encoding levels, actionability and polarity.

    ``bounds`` are raw units for continuous features and level-index range
    for categorical ones.  ``polarity`` states which direction of change
    counts as positive gain for the individual; by default it follows the
    direction the feature is allowed to move.  ``scale`` optionally pins the
    min-max scaling extrema used for the internal [0, 1] representation
    (otherwise they are fitted from training data at load time).
    """

    name: str
    kind: str
    levels: tuple[str, ...] | None = None
    actionable: bool = False
    direction: str = "frozen"
    bounds: tuple[float, float] | None = None
    polarity: str | None = None
    scale: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in (KIND_CONTINUOUS, KIND_CATEGORICAL):
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.direction not in DIRECTIONS:
            raise SchemaError(f"feature {self.name!r}: unknown direction {self.direction!r}")
        if self.kind == KIND_CATEGORICAL:
            if not self.levels:
                raise SchemaError(f"feature {self.name!r}: categorical feature needs ordered levels")
            if len(set(self.levels)) != len(self.levels):
                raise SchemaError(f"feature {self.name!r}: duplicate levels")
        bounds = self.bounds
        if bounds is None:
            bounds = (0.0, float(len(self.levels) - 1)) if self.kind == KIND_CATEGORICAL else None
            object.__setattr__(self, "bounds", bounds)
        if self.kind == KIND_CATEGORICAL and bounds is not None:
            lo, hi = bounds
            if not (0 <= lo <= hi <= len(self.levels) - 1):
                raise SchemaError(f"feature {self.name!r}: bounds {bounds} outside level range")
        if self.actionable:
            if self.direction == "frozen":
                raise SchemaError(f"feature {self.name!r}: actionable feature cannot be frozen")
            if self.bounds is None:
                raise SchemaError(f"feature {self.name!r}: actionable feature needs bounds")
            lo, hi = self.bounds
            if not (hi > lo):
                raise SchemaError(f"feature {self.name!r}: degenerate bounds {self.bounds}")
        if self.polarity is None:
            object.__setattr__(self, "polarity", _default_polarity(self.direction))
        elif self.polarity not in POLARITIES:
            raise SchemaError(f"feature {self.name!r}: unknown polarity {self.polarity!r}")

    @property
    def n_levels(self) -> int:
        return len(self.levels) if self.levels else 0

    def level_index(self, value: str) -> int:
        try:
            return self.levels.index(value)
        except ValueError:
            raise SchemaError(
                f"feature {self.name!r}: unknown categorical level {value!r}"
            ) from None

    @property
    def polarity_weight(self) -> int:
        """+1 if increasing is positive gain, -1 if decreasing is, 0 if neutral."""
        return {"positive": 1, "negative": -1, "neutral": 0}[self.polarity]


def _default_polarity(direction: str) -> str:
    # The direction a feature is allowed to move is, by convention, the
    # direction of positive gain for the individual.
    return {"increase": "positive", "decrease": "negative"}.get(direction, "neutral")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature specs plus the label column and decision threshold."""

    features: tuple[FeatureSpec, ...]
    label: str = "label"
    psi: float = 0.5
    positive_label_meaning: str = "a positive outcome"

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        if self.label in names:
            raise SchemaError(f"label column {self.label!r} collides with a feature name")
        if not (0.0 < self.psi < 1.0):
            raise SchemaError(f"psi must lie in (0, 1), got {self.psi}")

    def __iter__(self):
        return iter(self.features)

    def __len__(self):
        return len(self.features)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def feature(self, name: str) -> FeatureSpec:
        for f in self.features:
            if f.name == name:
                return f
        raise SchemaError(f"unknown feature {name!r}")

    def actionable_features(self) -> list[FeatureSpec]:
        return [f for f in self.features if f.actionable]

    def onehot_width(self) -> int:
        return sum(1 if f.kind == KIND_CONTINUOUS else f.n_levels for f in self.features)

    def to_dict(self) -> dict:
        return {
            "features": [
                {
                    "name": f.name,
                    "kind": f.kind,
                    **({"levels": list(f.levels)} if f.levels else {}),
                    "actionable": f.actionable,
                    "direction": f.direction,
                    "bounds": list(f.bounds) if f.bounds is not None else None,
                    "polarity": f.polarity,
                    **({"scale": list(f.scale)} if f.scale is not None else {}),
                }
                for f in self.features
            ],
            "label": self.label,
            "psi": self.psi,
            "positive_label_meaning": self.positive_label_meaning,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureSchema":
        if not isinstance(doc, dict) or "features" not in doc:
            raise SchemaError("schema document must be an object with a 'features' list")
        feats = []
        for raw in doc["features"]:
            try:
                feats.append(
                    FeatureSpec(
                        name=raw["name"],
                        kind=raw["kind"],
                        levels=tuple(raw["levels"]) if raw.get("levels") else None,
                        actionable=bool(raw.get("actionable", False)),
                        direction=raw.get("direction", "frozen"),
                        bounds=tuple(raw["bounds"]) if raw.get("bounds") is not None else None,
                        polarity=raw.get("polarity"),
                        scale=tuple(raw["scale"]) if raw.get("scale") is not None else None,
                    )
                )
            except KeyError as exc:
                raise SchemaError(f"feature entry missing field {exc}") from None
        return cls(
            features=tuple(feats),
            label=doc.get("label", "label"),
            psi=float(doc.get("psi", 0.5)),
            positive_label_meaning=doc.get("positive_label_meaning", "a positive outcome"),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "FeatureSchema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def hash(self) -> str:
        """Stable digest of the schema; models persist it to detect drift."""
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, overrides: dict) -> "FeatureSchema":
        """Apply per-feature constraint overrides, validating the result.

        ``overrides`` maps feature name -> partial spec
        ({"actionable", "direction", "bounds", "polarity"}).
        """
        if not overrides:
            return self
        unknown = set(overrides) - set(self.names)
        if unknown:
            raise SchemaError(f"override for unknown feature(s): {sorted(unknown)}")
        new_feats = []
        for f in self.features:
            ov = overrides.get(f.name)
            if not ov:
                new_feats.append(f)
                continue
            allowed = {"actionable", "direction", "bounds", "polarity"}
            bad = set(ov) - allowed
            if bad:
                raise SchemaError(f"feature {f.name!r}: unsupported override field(s) {sorted(bad)}")
            kwargs = dict(ov)
            if "bounds" in kwargs and kwargs["bounds"] is not None:
                kwargs["bounds"] = tuple(float(v) for v in kwargs["bounds"])
            if kwargs.get("direction") == "frozen":
                if "bounds" in kwargs:
                    raise SchemaError(
                        f"feature {f.name!r}: cannot adjust bounds while freezing the feature"
                    )
                if "actionable" not in kwargs:
                    kwargs["actionable"] = False
            try:
                new_feats.append(replace(f, **kwargs))
            except SchemaError as exc:
                raise SchemaError(f"invalid override for {f.name!r}: {exc}") from None
        return replace(self, features=tuple(new_feats))
