"""Scalar terms of the semifactual objective and their compositions.

Gain is the polarity-gated distance between the individual and the
(structurally processed) end state; cost is the sign-negated distance of
the user's own feature change only, so the two differ exactly when an
intervened feature has causal descendants.  Robustness is enforced both
probabilistically (Monte Carlo over an epsilon-neighborhood) and absolutely
(the semifactual itself must keep the positive label).  Plausibility is an
empirical nearest-training-point proxy; diversity is the mean pairwise
distance of the returned set.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .actions import NO_CHANGE_TOL, ActionSpace
from .scm import Scm

GATE_TOL = 1e-9
BCE_CLAMP = 1e-12


@dataclass
class ObjectiveConfig:
    """Weights and sampling knobs; defaults follow the credit-domain preset."""

    lambda_p: float = 30.0   # probabilistic-robustness multiplier
    lambda_s: float = 10.0   # absolute-robustness multiplier
    gamma: float = 1.0       # diversity weight
    gamma_p: float = 0.1     # plausibility stabilizer (zero-distance guard)
    epsilon: float = 0.1     # robustness neighborhood radius, scaled units
    n_mc: int = 100          # Monte Carlo samples per neighborhood
    psi_margin: float = 0.0  # added to psi when labeling neighborhood samples
    norm: str = "l2"         # distance norm for gain/cost: l2 (non-causal) / l1 (causal)
    ball_norm: str = "l2"    # robustness neighborhoods are hyperspheres in either lane
    h_p_min: float = 1.0     # minimum sampled-neighborhood survival rate to accept an item
    # sampling-radius multiplier for the causal engine's break check: a Monte
    # Carlo certificate at radius eps only witnesses boundaries ~0.9*eps away,
    # so engines that must be eps-robust on output sample a slightly larger ball
    epsilon_inflation: float = 1.0
    plausibility_positive_only: bool = False  # restrict the reference set to label-1 rows

    def __post_init__(self):
        if min(self.lambda_p, self.lambda_s, self.gamma) < 0:
            raise ValueError("multipliers must be non-negative")
        if self.gamma_p <= 0:
            raise ValueError("gamma_p must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.n_mc < 1:
            raise ValueError("n_mc must be at least 1")
        if self.norm not in ("l1", "l2") or self.ball_norm not in ("l1", "l2"):
            raise ValueError("norms must be 'l1' or 'l2'")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ObjectiveConfig":
        return cls(**doc)


def norm_of(D: np.ndarray, norm: str = "l2") -> np.ndarray:
    D = np.atleast_2d(D)
    if norm == "l1":
        return np.abs(D).sum(axis=1)
    return np.sqrt((D * D).sum(axis=1))


# -- semifactual end states ---------------------------------------------------


def semifactual_matrix(
    space: ActionSpace,
    thetas: np.ndarray,
    scm: Scm | None = None,
    intervene: list[int] | None = None,
) -> np.ndarray:
    """End-state vectors for a batch of actions.

    Without a structural model this is plain substitution; with one, each
    intervened coordinate becomes a hard intervention on its node and the
    remaining nodes are re-evaluated from the abducted noise.  ``intervene``
    names the action coordinates under do(); by default a coordinate counts
    as intervened only where it actually moves (an unchanged coordinate is
    an absent intervention, not a pin at the current value).
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if scm is None or scm.is_independent:
        return space.apply(thetas)
    node_idx = [scm.node_index(name) for name in space.feature_names]
    out = np.empty((thetas.shape[0], len(scm)))
    for r in range(thetas.shape[0]):
        if intervene is None:
            cols = [j for j in range(thetas.shape[1])
                    if abs(thetas[r, j] - space.current[j]) >= NO_CHANGE_TOL]
        else:
            cols = intervene
        out[r] = scm.process_semifactual(
            space.x_vec, {node_idx[j]: thetas[r, j] for j in cols}
        )
    return out


def polarity_gate(space: ActionSpace, end_states: np.ndarray) -> np.ndarray:
    """+1 per row, or -1 where any feature moved against its declared polarity."""
    enc = space.encoder
    deltas = enc.feature_deltas(space.x_vec[None, :], np.atleast_2d(end_states))
    w = space.polarity_weights()[None, :]
    violated = ((w != 0) & (w * deltas < -GATE_TOL)).any(axis=1)
    return np.where(violated, -1.0, 1.0)


def gain_batch(
    space: ActionSpace,
    thetas: np.ndarray,
    config: ObjectiveConfig,
    scm: Scm | None = None,
    end_states: np.ndarray | None = None,
    intervene: list[int] | None = None,
) -> np.ndarray:
    if end_states is None:
        end_states = semifactual_matrix(space, thetas, scm, intervene)
    magnitude = norm_of(end_states - space.x_vec[None, :], config.norm)
    return polarity_gate(space, end_states) * magnitude


def gain(space: ActionSpace, theta: np.ndarray, config: ObjectiveConfig, scm: Scm | None = None) -> float:
    """Benefit of acting: polarity-gated distance to the processed end state."""
    return float(gain_batch(space, np.asarray(theta)[None, :], config, scm)[0])


def cost(space: ActionSpace, theta: np.ndarray, config: ObjectiveConfig) -> float:
    """Recourse-style cost: the user's own feature change only, sign-negated.

    Always evaluated on the plain substitution, never through the
    structural model, which is exactly why |gain| can exceed |cost|.
    """
    return -float(gain_batch(space, np.asarray(theta)[None, :], config, scm=None)[0])


# -- plausibility ---------------------------------------------------------------


def nearest_sq_dists(points: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Min squared L2 distance from each point to the reference rows."""
    points = np.atleast_2d(points)
    if reference.size == 0:
        raise ValueError("empty reference dataset")
    sq = (
        (points * points).sum(axis=1)[:, None]
        - 2.0 * points @ reference.T
        + (reference * reference).sum(axis=1)[None, :]
    )
    return np.maximum(sq.min(axis=1), 0.0)


def plausibility_batch(points: np.ndarray, reference: np.ndarray, gamma_p: float) -> np.ndarray:
    return np.exp(1.0 / (nearest_sq_dists(points, reference) + gamma_p))


def plausibility_empirical(dataset, point: np.ndarray, config: ObjectiveConfig) -> float:
    """exp{1 / (min squared distance to training data + gamma_p)}.

    Strictly decreasing in the nearest-neighbor distance; the stabilizer
    keeps the exponent finite when the point coincides with a training row.
    """
    X = dataset.X
    if config.plausibility_positive_only:
        X = X[dataset.labels == 1]
    return float(plausibility_batch(np.asarray(point)[None, :], X, config.gamma_p)[0])


# -- robustness -----------------------------------------------------------------


def ball_offsets(n: int, dim: int, epsilon: float, rng: np.random.Generator, norm: str = "l2") -> np.ndarray:
    """n offsets drawn uniformly from the epsilon-ball of the given norm."""
    radii = epsilon * rng.uniform(size=n) ** (1.0 / dim)
    if norm == "l1":
        e = rng.exponential(size=(n, dim))
        u = e / e.sum(axis=1, keepdims=True)
        u *= rng.choice([-1.0, 1.0], size=(n, dim))
    else:
        g = rng.normal(size=(n, dim))
        u = g / np.linalg.norm(g, axis=1, keepdims=True)
    return radii[:, None] * u


def sample_neighborhood(
    center: np.ndarray,
    epsilon: float,
    n: int,
    rng: np.random.Generator,
    norm: str = "l2",
    box: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Uniform epsilon-ball samples around a semifactual, clipped to bounds."""
    center = np.asarray(center, dtype=float)
    pts = center[None, :] + ball_offsets(n, center.size, epsilon, rng, norm)
    if box is not None:
        pts = np.clip(pts, box[0][None, :], box[1][None, :])
    return pts


def robustness_probabilistic(model, x_label: int, samples: np.ndarray, psi_margin: float = 0.0) -> float:
    """Fraction of neighborhood samples whose predicted label matches h(x)."""
    if len(samples) == 0:
        raise ValueError("empty sample set")
    labels = (model.scores(samples) > model.psi + psi_margin).astype(int)
    return float((labels == x_label).mean())


def robustness_absolute(model, end_state: np.ndarray, x_label: int = 1) -> int:
    """1 iff the semifactual itself keeps the individual's predicted label."""
    return int(model.label(end_state) == x_label)


# -- diversity ------------------------------------------------------------------


def diversity(points: np.ndarray, norm: str = "l2") -> float:
    """Mean pairwise distance of the set; exactly 0 for a single point."""
    points = np.atleast_2d(points)
    m = points.shape[0]
    if m <= 1:
        return 0.0
    total = 0.0
    for i in range(m - 1):
        total += norm_of(points[i + 1 :] - points[i], norm).sum()
    return float(2.0 * total / (m * (m - 1)))


# -- fitness (non-causal engine) ---------------------------------------------


@dataclass
class FitnessBreakdown:
    """Per-item terms behind one action-set's fitness value."""

    end_states: np.ndarray
    gains: np.ndarray
    plausibilities: np.ndarray
    h_p: np.ndarray
    h_a: np.ndarray
    item_scores: np.ndarray = field(init=False)
    set_diversity: float = 0.0
    fitness: float = 0.0


def fitness_breakdown(
    space: ActionSpace,
    thetas_set: np.ndarray,
    reference: np.ndarray,
    model,
    config: ObjectiveConfig,
    offsets: np.ndarray,
) -> FitnessBreakdown:
    """Evaluate one set of m actions.

    ``offsets`` is a fixed bank of epsilon-ball offsets so that candidates
    are scored identically whenever re-evaluated within a run (which keeps
    elite fitness monotone across generations).
    """
    thetas_set = np.atleast_2d(thetas_set)
    sf = semifactual_matrix(space, thetas_set)
    out = FitnessBreakdown(
        end_states=sf,
        gains=gain_batch(space, thetas_set, config, end_states=sf),
        plausibilities=plausibility_batch(sf, reference, config.gamma_p),
        h_p=np.empty(len(sf)),
        h_a=(model.scores(sf) > model.psi).astype(float),
    )
    lo, hi = space.encoder.coordinate_box()
    for i in range(len(sf)):
        pts = np.clip(sf[i][None, :] + offsets, lo[None, :], hi[None, :])
        out.h_p[i] = (model.scores(pts) > model.psi + config.psi_margin).mean()
    moved = space.change_mask(thetas_set)
    out.item_scores = _item_scores(out, moved, config)
    out.set_diversity = diversity(sf, "l2")
    out.fitness = float(
        (out.item_scores.mean() + config.gamma * out.set_diversity) * out.h_p.mean()
    )
    return out


def effective_membership(gains, h_a, h_p, moved, config: ObjectiveConfig) -> np.ndarray:
    """The effective solution space: positive gain, label kept, and the
    sampled neighborhood surviving at the configured rate."""
    return moved & (h_a > 0.5) & (gains > 0.0) & (h_p >= config.h_p_min - 1e-12)


def _item_scores(parts, moved, config: ObjectiveConfig) -> np.ndarray:
    # the gain reward is confined to the effective space (the maximization
    # domain of the objective); the robustness rewards stay soft so the
    # search can climb back toward feasibility
    member = effective_membership(parts.gains, parts.h_a, parts.h_p, moved, config)
    score = np.where(member, parts.plausibilities * parts.gains, 0.0)
    score += config.lambda_p * parts.h_p + config.lambda_s * parts.h_a
    return np.where(moved, score, 0.0)


def fitness(
    space: ActionSpace,
    thetas_set: np.ndarray,
    dataset,
    model,
    config: ObjectiveConfig,
    rng: np.random.Generator,
) -> float:
    """Set fitness: mean item score plus weighted diversity, the whole
    thing scaled by the set's mean neighborhood survival rate."""
    reference = dataset.X
    if config.plausibility_positive_only:
        reference = reference[dataset.labels == 1]
    offsets = ball_offsets(config.n_mc, space.encoder.width, config.epsilon, rng, config.ball_norm)
    return fitness_breakdown(space, thetas_set, reference, model, config, offsets).fitness


# -- Lagrangian objective (causal engine) ------------------------------------


def bce(scores: np.ndarray, target: int) -> np.ndarray:
    s = np.clip(np.asarray(scores, dtype=float), BCE_CLAMP, 1.0 - BCE_CLAMP)
    return -np.log(s) if target == 1 else -np.log(1.0 - s)


def objective_j(
    space: ActionSpace,
    thetas_set: np.ndarray,
    lambdas: np.ndarray,
    config: ObjectiveConfig,
    scm: Scm | None,
    model,
    batches: list[np.ndarray] | None = None,
    plausibilities: np.ndarray | None = None,
) -> float:
    """Value of the adversarially reformulated set objective.

    Per item: -lambda_i * BCE(h(end state), h(x)) minus the mean BCE over
    its sampled neighborhood batch, plus plausibility-weighted gain; plus
    the diversity term over the set.  With every score at 1 the BCE terms
    vanish and the objective reduces to mean plausibility-weighted gain
    plus weighted diversity.
    """
    thetas_set = np.atleast_2d(thetas_set)
    lambdas = np.broadcast_to(np.asarray(lambdas, dtype=float), (thetas_set.shape[0],))
    if (lambdas < 0).any():
        raise ValueError("lambdas must be non-negative")
    target = 1  # engines only run for positively classified individuals
    sf = semifactual_matrix(space, thetas_set, scm)
    gains = gain_batch(space, thetas_set, config, scm, end_states=sf)
    if plausibilities is None:
        plausibilities = np.ones(len(gains))
    total = 0.0
    for i in range(thetas_set.shape[0]):
        term = -lambdas[i] * float(bce(model.scores(sf[i][None, :]), target)[0])
        if batches is not None and len(batches[i]):
            term -= lambdas[i] * float(bce(model.scores(batches[i]), target).mean())
        term += plausibilities[i] * gains[i]
        total += term
    return float(total / thetas_set.shape[0] + config.gamma * diversity(sf, "l2"))
