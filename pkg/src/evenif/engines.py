"""The two explanation engines.

``explain_noncausal`` evolves sets of actions with a genetic algorithm
against the set fitness (plausibility-weighted gain, soft robustness
rewards, diversity), then collects the best unique candidates that keep the
positive label.  ``explain_causal`` runs one projected-gradient ascent of
the per-item Lagrangian per actionable feature subset, chaining model
gradients through the structural model's Jacobian, and backs off to the
last verified iterate the moment the semifactual or any sampled neighbor
crosses the boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .actions import ActionSpace, build_action_space
from .dataset import Dataset, Individual
from .encoding import Encoder
from .errors import NoEffectiveSemifactualError, NotPositiveOutcomeError
from .objective import (
    ObjectiveConfig,
    ball_offsets,
    diversity,
    effective_membership,
    gain_batch,
    plausibility_batch,
    polarity_gate,
    semifactual_matrix,
)
from .schema import KIND_CONTINUOUS, FeatureSchema
from .scm import Scm, align_with_schema

UNIQUE_TOL = 1e-6


@dataclass
class ExplanationItem:
    """One accepted semifactual with its per-item scores."""

    action: dict[str, float]        # raw-unit deltas, keyed by feature name
    semifactual: dict               # decoded end-state record
    gain: float
    plausibility: float
    robustness_mc: float            # engine's final Monte Carlo certificate
    robustness_abs: int
    score: float
    theta: np.ndarray = field(repr=False, default=None)
    end_state: np.ndarray = field(repr=False, default=None)
    note: str = ""
    meta: dict = field(repr=False, default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "action": self.action,
            "semifactual": self.semifactual,
            "gain": self.gain,
            "plausibility": self.plausibility,
            "robustness_mc": self.robustness_mc,
            "robustness_abs": self.robustness_abs,
            "score": self.score,
        }
        if self.note:
            doc["note"] = self.note
        return doc


@dataclass
class ExplanationSet:
    method: str
    seed: int
    m: int
    items: list[ExplanationItem]
    diversity: float
    config: dict
    individual_id: str = ""
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "m": self.m,
            "individual": self.individual_id,
            "diversity": self.diversity,
            "items": [it.to_dict() for it in self.items],
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def raw_action_deltas(space: ActionSpace, theta: np.ndarray) -> dict[str, float]:
    """Scaled action coordinates -> raw-unit deltas for display/transport."""
    enc = space.encoder
    deltas = {}
    for j, c in enumerate(space.coords):
        raw_new = enc.unscale_value(c.feature, float(theta[j]))
        raw_cur = enc.unscale_value(c.feature, float(c.current))
        delta = raw_new - raw_cur
        if enc.schema.feature(c.feature).kind != KIND_CONTINUOUS:
            delta = float(int(round(delta)))
        deltas[c.feature] = float(delta)
    return deltas


def resolve_vector(x, encoder: Encoder) -> tuple[np.ndarray, str]:
    if isinstance(x, Individual):
        return np.asarray(x.x, dtype=float), x.id
    if isinstance(x, dict):
        return encoder.encode_record(x), ""
    return np.asarray(x, dtype=float), ""


def project_action(theta: np.ndarray, space: ActionSpace) -> np.ndarray:
    """Coordinate-wise projection onto the feasible action set (idempotent)."""
    return space.clip(theta)


def even_if_sentence(schema: FeatureSchema, x_record: dict, item: ExplanationItem) -> str:
    """Human-readable 'Even if ...' rendering of one suggestion."""
    clauses = []
    for spec in schema.features:
        before = x_record.get(spec.name)
        after = item.semifactual.get(spec.name)
        if before is None or after is None:
            continue
        if spec.kind == KIND_CONTINUOUS:
            if abs(float(after) - float(before)) < 1e-9:
                continue
            verb = "increased" if float(after) > float(before) else "decreased"
            clauses.append(f"{verb} {spec.name} from {float(before):g} to {float(after):g}")
        elif str(after) != str(before):
            clauses.append(f"changed {spec.name} from {before} to {after}")
    if not clauses:
        return f"Even with no change, you would still have: {schema.positive_label_meaning}."
    joined = clauses[0] if len(clauses) == 1 else ", ".join(clauses[:-1]) + " and " + clauses[-1]
    return f"Even if you {joined}, you would still have: {schema.positive_label_meaning}."


# ---------------------------------------------------------------------------
# non-causal: genetic search
# ---------------------------------------------------------------------------


@dataclass
class GaConfig:
    generations: int = 20
    population: int | None = None   # default: 12 per requested suggestion
    mutation_rate: float = 0.05
    elites: int = 4
    crossover_prob: float = 0.5
    sigma_factor: float = 0.05      # mutation sd = factor * actionable range
    tournament: int = 3

    def population_for(self, m: int) -> int:
        pop = self.population if self.population is not None else 12 * m
        if pop < max(m, self.elites + 1):
            raise ValueError(f"population {pop} too small for m={m} and elites={self.elites}")
        return pop

    def to_dict(self) -> dict:
        return asdict(self)


def _population_eval(
    pop: np.ndarray,
    space: ActionSpace,
    reference: np.ndarray,
    model,
    config: ObjectiveConfig,
    offsets: np.ndarray,
    box,
):
    """Vectorized scoring of a (P, m, k) population.

    Returns flat per-item arrays plus per-set fitness; the fixed offset bank
    keeps every candidate's score stable across generations.
    """
    P, m, _ = pop.shape
    flat = pop.reshape(P * m, -1)
    sf = semifactual_matrix(space, flat)
    gains = gain_batch(space, flat, config, end_states=sf)
    phat = plausibility_batch(sf, reference, config.gamma_p)
    scores = model.scores(sf)
    h_a = (scores > model.psi).astype(float)
    samples = sf[:, None, :] + offsets[None, :, :]
    np.clip(samples, box[0][None, None, :], box[1][None, None, :], out=samples)
    sample_scores = model.scores(samples.reshape(-1, sf.shape[1])).reshape(P * m, -1)
    h_p = (sample_scores > model.psi + config.psi_margin).mean(axis=1)
    moved = space.change_mask(flat)
    member = effective_membership(gains, h_a, h_p, moved, config)
    item_scores = np.where(member, phat * gains, 0.0)
    item_scores += config.lambda_p * h_p + config.lambda_s * h_a
    item_scores = np.where(moved, item_scores, 0.0)
    sf_sets = sf.reshape(P, m, -1)
    if m > 1:
        div = np.zeros(P)
        for i in range(m - 1):
            for j in range(i + 1, m):
                div += np.linalg.norm(sf_sets[:, i, :] - sf_sets[:, j, :], axis=1)
        div *= 2.0 / (m * (m - 1))
    else:
        div = np.zeros(P)
    fitness = (item_scores.reshape(P, m).mean(axis=1) + config.gamma * div) * h_p.reshape(
        P, m
    ).mean(axis=1)
    return {
        "sf": sf, "gains": gains, "phat": phat, "h_a": h_a, "h_p": h_p,
        "item_scores": item_scores, "moved": moved, "fitness": fitness,
    }


def _mutate(pop: np.ndarray, space: ActionSpace, ga: GaConfig, rng: np.random.Generator) -> np.ndarray:
    P, m, k = pop.shape
    out = pop.copy()
    mask = rng.uniform(size=(P, m, k)) < ga.mutation_rate
    # guarantee at least one mutated gene per child so short chromosomes
    # still explore at the configured rate
    untouched = ~mask.reshape(P, -1).any(axis=1)
    if untouched.any():
        rows = np.flatnonzero(untouched)
        forced = rng.integers(0, m * k, size=len(rows))
        mask.reshape(P, -1)[rows, forced] = True
    extents = space.hi - space.lo
    for j, coord in enumerate(space.coords):
        col = mask[:, :, j]
        if not col.any():
            continue
        if coord.grid is not None and space.snap_categorical:
            out[:, :, j][col] = rng.choice(np.asarray(coord.grid), size=int(col.sum()))
        elif extents[j] > 0:
            out[:, :, j][col] += rng.normal(
                0.0, ga.sigma_factor * extents[j], size=int(col.sum())
            )
    return space.clip(out.reshape(P * m, k)).reshape(P, m, k)


def explain_noncausal(
    x,
    model,
    dataset: Dataset,
    schema: FeatureSchema,
    m: int,
    config: ObjectiveConfig | None = None,
    ga: GaConfig | None = None,
    seed: int = 0,
) -> ExplanationSet:
    """Genetic search for m semifactual suggestions (model-agnostic)."""
    config = config or ObjectiveConfig()
    ga = ga or GaConfig()
    encoder = dataset.encoder
    x_vec, xid = resolve_vector(x, encoder)
    if model.label(x_vec) != 1:
        raise NotPositiveOutcomeError(
            "not a positive outcome: semifactuals explain positively classified individuals"
        )
    space = build_action_space(x_vec, schema, encoder)
    rng = np.random.default_rng(seed)
    reference = dataset.X
    if config.plausibility_positive_only:
        reference = reference[dataset.labels == 1]
    offsets = ball_offsets(config.n_mc, encoder.width, config.epsilon, rng, config.ball_norm)
    box = encoder.coordinate_box()

    P = ga.population_for(m)
    k = len(space)
    pop = space.sample(rng, P * m).reshape(P, m, k)
    best_history: list[float] = []
    for _ in range(ga.generations):
        fitness = _population_eval(pop, space, reference, model, config, offsets, box)["fitness"]
        order = np.argsort(-fitness, kind="stable")
        best_history.append(float(fitness[order[0]]))
        elites = pop[order[: ga.elites]]
        # tournament selection
        n_children = P - ga.elites
        contenders = rng.integers(0, P, size=(n_children, 2, ga.tournament))
        parents = pop[
            np.take_along_axis(
                contenders.reshape(-1, ga.tournament),
                np.argmax(fitness[contenders.reshape(-1, ga.tournament)], axis=1)[:, None],
                axis=1,
            ).reshape(n_children, 2)
        ]
        children = parents[:, 0].copy()
        cross = rng.uniform(size=n_children) < ga.crossover_prob
        gene_mask = rng.uniform(size=(n_children, m, k)) < 0.5
        swap = cross[:, None, None] & gene_mask
        children[swap] = parents[:, 1][swap]
        children = _mutate(children, space, ga, rng)
        pop = np.concatenate([elites, children], axis=0)

    final = _population_eval(pop, space, reference, model, config, offsets, box)
    flat = pop.reshape(P * m, k)
    ok = effective_membership(final["gains"], final["h_a"], final["h_p"],
                              final["moved"], config)
    diagnostics = {
        "candidates": int(len(flat)),
        "moved": int(final["moved"].sum()),
        "kept_label": int(final["h_a"].sum()),
        "positive_gain": int((final["gains"] > 0).sum()),
        "robust_neighborhood": int((final["h_p"] >= config.h_p_min - 1e-12).sum()),
        "feasible": int(ok.sum()),
        "best_fitness_history": best_history,
    }
    if not ok.any():
        raise NoEffectiveSemifactualError(
            "no effective semifactual: every candidate action either crosses the "
            "decision boundary or yields non-positive gain",
            diagnostics=diagnostics,
        )

    cand_idx = np.flatnonzero(ok)
    cand_idx = cand_idx[np.argsort(-final["item_scores"][cand_idx], kind="stable")]
    chosen: list[int] = []
    for i in cand_idx:
        if len(chosen) >= m:
            break
        if all(np.max(np.abs(flat[i] - flat[j])) > UNIQUE_TOL for j in chosen):
            chosen.append(int(i))
    while len(chosen) < m:  # fewer distinct optima than requested: duplicate
        chosen.append(int(rng.choice(np.array(chosen))))

    items = [
        ExplanationItem(
            action=raw_action_deltas(space, flat[i]),
            semifactual=encoder.decode_vector(final["sf"][i]),
            gain=float(final["gains"][i]),
            plausibility=float(final["phat"][i]),
            robustness_mc=float(final["h_p"][i]),
            robustness_abs=int(final["h_a"][i]),
            score=float(final["item_scores"][i]),
            theta=flat[i].copy(),
            end_state=final["sf"][i].copy(),
        )
        for i in chosen
    ]
    return ExplanationSet(
        method="sgen",
        seed=seed,
        m=m,
        items=items,
        diversity=diversity(np.stack([it.end_state for it in items]), "l2"),
        config={"objective": config.to_dict(), "ga": ga.to_dict()},
        individual_id=xid,
        meta=diagnostics,
    )


# ---------------------------------------------------------------------------
# causal: projected-gradient maximin per actionable subset
# ---------------------------------------------------------------------------


@dataclass
class CausalConfig:
    tau: float = 0.01          # ascent learning rate, scaled units
    eta: float = 0.9           # lambda decay per iteration
    lambda0: float = 1.0
    max_iter: int = 500
    step_tol: float = 1e-6
    init_fraction: float = 0.1  # initial feasible step toward positive gain

    def to_dict(self) -> dict:
        return asdict(self)


def actionable_subsets(k: int) -> list[list[int]]:
    """Singleton subsets plus the full actionable set (when it adds one)."""
    subsets = [[j] for j in range(k)]
    if k > 1:
        subsets.append(list(range(k)))
    return subsets


def _gain_gradient(space, sf: np.ndarray, jac: np.ndarray, config: ObjectiveConfig) -> np.ndarray:
    """d gain / d(intervention values) at the current end state."""
    d = sf - space.x_vec
    gate = float(polarity_gate(space, sf[None, :])[0])
    if config.norm == "l1":
        grad_full = np.sign(d)
    else:
        nrm = np.linalg.norm(d)
        grad_full = d / nrm if nrm > 0 else np.zeros_like(d)
    return gate * (grad_full @ jac)


def explain_causal(
    x,
    model,
    scm: Scm,
    schema: FeatureSchema,
    encoder: Encoder,
    config: ObjectiveConfig | None = None,
    causal: CausalConfig | None = None,
    seed: int = 0,
) -> ExplanationSet:
    """One gradient run per actionable feature subset; m is the subset count.

    Each run ascends the per-item Lagrangian (label cross-entropy of the
    end state and of its epsilon-neighborhood batch, plus gain), projects
    onto the actionable bounds, decays lambda, and on any boundary breach
    returns the previous verified iterate.
    """
    config = config or ObjectiveConfig(norm="l1")
    causal = causal or CausalConfig()
    align_with_schema(scm, schema.names)
    if encoder.mode != "ordinal":
        raise ValueError("causal engine requires the ordinal (real-valued) encoding")
    x_vec, xid = resolve_vector(x, encoder)
    if model.label(x_vec) != 1:
        raise NotPositiveOutcomeError(
            "not a positive outcome: semifactuals explain positively classified individuals"
        )
    space = build_action_space(x_vec, schema, encoder, snap_categorical=False)
    node_idx = [scm.node_index(name) for name in space.feature_names]
    box = encoder.coordinate_box()
    subsets = actionable_subsets(len(space))
    m = len(subsets)
    seeds = np.random.SeedSequence(seed).spawn(m + 1)
    items: list[ExplanationItem] = []
    skipped = 0

    for run, subset in enumerate(subsets):
        rng = np.random.default_rng(seeds[run])
        jac_nodes = scm.jacobian([node_idx[j] for j in subset])  # (d, |subset|)
        theta = space.initial_step(causal.init_fraction, subset)
        lam = causal.lambda0
        last_safe = None
        iterations = 0
        ball_eps = config.epsilon * config.epsilon_inflation
        for _ in range(causal.max_iter):
            sf = semifactual_matrix(space, theta[None, :], scm, intervene=subset)[0]
            score = model.score(sf)
            batch = sf[None, :] + ball_offsets(config.n_mc, encoder.width, ball_eps, rng, config.ball_norm)
            np.clip(batch, box[0][None, :], box[1][None, :], out=batch)
            batch_scores = model.scores(batch)
            if score <= model.psi or (batch_scores <= model.psi + config.psi_margin).any():
                break  # boundary breached: fall back to the last verified step
            h_p = float((batch_scores > model.psi + config.psi_margin).mean())
            last_safe = (theta.copy(), sf.copy(), h_p)
            grad = _gain_gradient(space, sf, jac_nodes, config)
            grad = grad + lam * (1.0 / max(score, 1e-12)) * (model.gradient(sf) @ jac_nodes)
            sample_grads = model.gradients(batch) @ jac_nodes
            grad = grad + (lam / len(batch)) * (
                (1.0 / np.clip(batch_scores, 1e-12, None))[:, None] * sample_grads
            ).sum(axis=0)
            new_theta = theta.copy()
            new_theta[subset] = theta[subset] + causal.tau * grad
            new_theta = space.clip(new_theta)
            lam *= causal.eta
            iterations += 1
            if np.linalg.norm(new_theta - theta) < causal.step_tol:
                theta = new_theta
                break
            theta = new_theta
        if last_safe is None:
            skipped += 1  # even the initial feasible step violates the constraints
            continue
        theta, sf, h_p = last_safe
        gain_v = float(gain_batch(space, theta[None, :], config, end_states=sf[None, :])[0])
        if gain_v <= 0 or model.label(sf) != 1:
            skipped += 1
            continue
        subset_names = [space.feature_names[j] for j in subset]
        items.append(
            ExplanationItem(
                action=raw_action_deltas(space, theta),
                semifactual=encoder.decode_vector(sf),
                gain=gain_v,
                plausibility=1.0,  # the structural model guarantees in-distribution moves
                robustness_mc=h_p,
                robustness_abs=1,
                score=gain_v,
                theta=theta.copy(),
                end_state=sf.copy(),
                note="subset=" + ",".join(subset_names),
                meta={"subset": subset_names, "iterations": iterations, "final_lambda": lam},
            )
        )

    if not items:
        raise NoEffectiveSemifactualError(
            "no effective semifactual: every actionable subset breaches the boundary "
            "at its first feasible step",
            diagnostics={"subsets": m, "skipped": skipped},
        )
    rng_fill = np.random.default_rng(seeds[m])
    while len(items) < m:
        items.append(items[int(rng_fill.integers(0, len(items)))])
    return ExplanationSet(
        method="sgen_causal",
        seed=seed,
        m=m,
        items=items,
        diversity=diversity(np.stack([it.end_state for it in items]), "l2"),
        config={"objective": config.to_dict(), "causal": causal.to_dict()},
        individual_id=xid,
    )
