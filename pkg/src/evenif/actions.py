"""Per-individual action spaces derived from actionability constraints.

An action assigns a target value to every actionable feature; coordinates
are expressed in scaled feature units (continuous: the min-max scaled
value; categorical: level index / (n_levels - 1)).  Feasible intervals are
relative to the individual's current value and honor the allowed direction,
e.g. an increase-only feature at scaled value v with upper bound b yields
the interval [v, b].  The identity action (no coordinate moved) is
explicitly excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import Encoder
from .errors import EmptyActionSpaceError
from .schema import KIND_CATEGORICAL, FeatureSchema

NO_CHANGE_TOL = 1e-9


@dataclass(frozen=True)
class ActionCoord:
    feature: str
    kind: str
    current: float
    lo: float
    hi: float
    grid: tuple[float, ...] | None = None  # feasible scaled levels (categorical)

    @property
    def extent(self) -> float:
        return self.hi - self.lo


class ActionSpace:
    """Feasible box (plus categorical grids) around one individual.

    ``snap_categorical`` keeps categorical coordinates on their level grid
    (the genetic engine operates natively on levels); the causal engines
    relax them to real values and only project at decode time.
    """

    def __init__(
        self,
        x_vec: np.ndarray,
        encoder: Encoder,
        coords: list[ActionCoord],
        snap_categorical: bool = True,
        schema: FeatureSchema | None = None,
    ):
        self.x_vec = np.asarray(x_vec, dtype=float)
        self.encoder = encoder
        self.schema = schema or encoder.schema  # may carry per-request overrides
        self.coords = tuple(coords)
        self.snap_categorical = snap_categorical
        self.lo = np.array([c.lo for c in coords])
        self.hi = np.array([c.hi for c in coords])
        self.current = np.array([c.current for c in coords])
        if not coords:
            raise EmptyActionSpaceError("no actionable features")
        if all(c.extent <= NO_CHANGE_TOL for c in coords):
            raise EmptyActionSpaceError(
                "every actionable feature is already pinned at its bound; no feasible change exists"
            )

    def __len__(self) -> int:
        return len(self.coords)

    @property
    def feature_names(self) -> list[str]:
        return [c.feature for c in self.coords]

    def polarity_weights(self) -> np.ndarray:
        """Per-feature gain polarity under this space's (possibly overridden) schema."""
        return np.array([f.polarity_weight for f in self.schema.features], dtype=float)

    def clip(self, theta: np.ndarray) -> np.ndarray:
        """Coordinate-wise projection onto the feasible set; idempotent."""
        theta = np.clip(np.asarray(theta, dtype=float), self.lo, self.hi)
        if self.snap_categorical:
            theta = theta.copy()
            flat = theta.reshape(-1, len(self.coords))
            for j, c in enumerate(self.coords):
                if c.grid is not None:
                    grid = np.asarray(c.grid)
                    idx = np.argmin(np.abs(flat[:, j, None] - grid[None, :]), axis=1)
                    flat[:, j] = grid[idx]
        return theta

    def is_change(self, theta: np.ndarray) -> bool:
        return bool(np.max(np.abs(np.asarray(theta) - self.current)) >= NO_CHANGE_TOL)

    def change_mask(self, thetas: np.ndarray) -> np.ndarray:
        """Row mask of actions that move at least one coordinate."""
        thetas = np.atleast_2d(thetas)
        return np.max(np.abs(thetas - self.current[None, :]), axis=1) >= NO_CHANGE_TOL

    def sample(self, rng: np.random.Generator, n: int = 1) -> np.ndarray:
        """Draw n feasible actions uniformly, excluding the identity action."""
        out = np.empty((n, len(self.coords)))
        for j, c in enumerate(self.coords):
            if c.grid is not None and self.snap_categorical:
                out[:, j] = rng.choice(np.asarray(c.grid), size=n)
            else:
                out[:, j] = rng.uniform(c.lo, c.hi, size=n)
        dead = ~self.change_mask(out)
        for _ in range(100):
            if not dead.any():
                break
            k = int(dead.sum())
            for j, c in enumerate(self.coords):
                if c.grid is not None and self.snap_categorical:
                    out[dead, j] = rng.choice(np.asarray(c.grid), size=k)
                else:
                    out[dead, j] = rng.uniform(c.lo, c.hi, size=k)
            dead = ~self.change_mask(out)
        return out

    def apply(self, thetas: np.ndarray) -> np.ndarray:
        """Non-causal substitution: overwrite actionable features of x.

        Returns full encoded vectors, shape (n, width).
        """
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        X = np.tile(self.x_vec, (thetas.shape[0], 1))
        for j, c in enumerate(self.coords):
            self.encoder.set_feature(X, c.feature, thetas[:, j])
        return X

    def initial_step(self, fraction: float = 0.1, subset: list[int] | None = None) -> np.ndarray:
        """A small feasible move in each feature's gain-positive direction.

        Only the coordinates in ``subset`` (indices into this space) move;
        the rest stay at their current values.  Used to seed the gradient
        engines with a constraint-satisfying start.
        """
        theta = self.current.copy()
        idxs = range(len(self.coords)) if subset is None else subset
        for j in idxs:
            c = self.coords[j]
            w = self.schema.feature(c.feature).polarity_weight
            room_up = c.hi - c.current
            room_dn = c.current - c.lo
            if w == 0:
                w = 1 if room_up >= room_dn else -1
            room = room_up if w > 0 else room_dn
            step = w * fraction * room
            if c.grid is not None and self.snap_categorical and abs(step) > 0:
                # smallest on-grid move in that direction
                grid = np.asarray(c.grid)
                ahead = grid[grid > c.current + NO_CHANGE_TOL] if w > 0 else grid[grid < c.current - NO_CHANGE_TOL]
                if ahead.size:
                    theta[j] = ahead[0] if w > 0 else ahead[-1]
                continue
            theta[j] = c.current + step
        return self.clip(theta)


def build_action_space(
    x_vec: np.ndarray,
    schema: FeatureSchema,
    encoder: Encoder,
    snap_categorical: bool | None = None,
) -> ActionSpace:
    """Construct the feasible action set for one encoded individual."""
    if snap_categorical is None:
        snap_categorical = encoder.mode == "onehot"
    values = encoder.feature_values(np.asarray(x_vec))[0]
    coords = []
    for j, spec in enumerate(schema.features):
        if not spec.actionable:
            continue
        cur = float(values[j])
        if spec.kind == KIND_CATEGORICAL:
            denom = max(spec.n_levels - 1, 1)
            lo_idx, hi_idx = int(spec.bounds[0]), int(spec.bounds[1])
            cur_idx = int(round(cur * denom))
            if spec.direction == "increase":
                lo_idx = max(lo_idx, cur_idx)
            elif spec.direction == "decrease":
                hi_idx = min(hi_idx, cur_idx)
            lo_idx = min(lo_idx, cur_idx)
            hi_idx = max(hi_idx, cur_idx)
            grid = tuple(i / denom for i in range(lo_idx, hi_idx + 1))
            coords.append(
                ActionCoord(spec.name, spec.kind, cur, lo_idx / denom, hi_idx / denom, grid)
            )
        else:
            lo = encoder.scale_value(spec.name, spec.bounds[0])
            hi = encoder.scale_value(spec.name, spec.bounds[1])
            if spec.direction == "increase":
                lo = cur
            elif spec.direction == "decrease":
                hi = cur
            lo = min(lo, cur)
            hi = max(hi, cur)
            coords.append(ActionCoord(spec.name, spec.kind, cur, lo, hi))
    return ActionSpace(x_vec, encoder, coords, snap_categorical=snap_categorical, schema=schema)
