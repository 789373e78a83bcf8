"""Modified comparison methods behind the same explain interface.

Counterfactual techniques are stopped before they cross the decision
boundary (turning them into semifactual generators) and the reject-style
semifactual method is adapted to tabular one-hot data; the causal recourse
baselines walk the score downhill through the structural model and stop
one step before a crossing (optionally with an epsilon-ball probe).
"""

from __future__ import annotations

import numpy as np

from .actions import ActionSpace, build_action_space
from .dataset import Dataset
from .encoding import Encoder
from .engines import (
    ExplanationItem,
    ExplanationSet,
    actionable_subsets,
    raw_action_deltas,
    resolve_vector,
)
from .errors import NotPositiveOutcomeError
from .objective import (
    ObjectiveConfig,
    ball_offsets,
    diversity,
    gain_batch,
    plausibility_batch,
    semifactual_matrix,
)
from .schema import KIND_CONTINUOUS, FeatureSchema
from .scm import Scm, align_with_schema


def _require_positive(model, x_vec):
    if model.label(x_vec) != 1:
        raise NotPositiveOutcomeError(
            "not a positive outcome: semifactuals explain positively classified individuals"
        )


def _reference(dataset: Dataset, config: ObjectiveConfig) -> np.ndarray:
    X = dataset.X
    if config.plausibility_positive_only:
        X = X[dataset.labels == 1]
    return X


def _finalize(
    method: str,
    seed: int,
    m: int,
    thetas: list[np.ndarray],
    notes: list[str],
    space: ActionSpace,
    model,
    config: ObjectiveConfig,
    reference: np.ndarray | None,
    rng: np.random.Generator,
    scm: Scm | None = None,
    individual_id: str = "",
    intervenes: list[list[int]] | None = None,
) -> ExplanationSet:
    """Build an ExplanationSet from final action vectors, padding to m items."""
    encoder = space.encoder
    box = encoder.coordinate_box()
    items = []
    for idx, (theta, note) in enumerate(zip(thetas, notes)):
        intervene = intervenes[idx] if intervenes is not None else None
        sf = semifactual_matrix(space, theta[None, :], scm, intervene=intervene)[0]
        gain = float(gain_batch(space, theta[None, :], config, end_states=sf[None, :])[0])
        if reference is not None:
            plaus = float(plausibility_batch(sf[None, :], reference, config.gamma_p)[0])
        else:
            plaus = 1.0
        pts = np.clip(
            sf[None, :] + ball_offsets(config.n_mc, encoder.width, config.epsilon, rng, config.ball_norm),
            box[0][None, :], box[1][None, :],
        )
        items.append(
            ExplanationItem(
                action=raw_action_deltas(space, theta),
                semifactual=encoder.decode_vector(sf),
                gain=gain,
                plausibility=plaus,
                robustness_mc=float((model.scores(pts) > model.psi + config.psi_margin).mean()),
                robustness_abs=int(model.score(sf) > model.psi),
                score=gain,
                theta=theta.copy(),
                end_state=sf.copy(),
                note=note,
            )
        )
    while len(items) < m:
        items.append(items[int(rng.integers(0, len(items)))])
    items = items[:m]
    return ExplanationSet(
        method=method,
        seed=seed,
        m=m,
        items=items,
        diversity=diversity(np.stack([it.end_state for it in items]), "l2"),
        config={"objective": config.to_dict()},
        individual_id=individual_id,
    )


def _label_theta(space: ActionSpace, model, theta: np.ndarray) -> int:
    return int(model.scores(space.apply(theta[None, :]))[0] > model.psi)


def _bisect_boundary(space, model, inside: np.ndarray, outside: np.ndarray, want: int, iters: int = 40):
    """Point of label ``want`` adjacent to the boundary on the segment.

    ``inside`` has label ``want``; ``outside`` does not.  Returns the point
    on the ``want`` side after bisection.
    """
    lo, hi = inside.copy(), outside.copy()
    for _ in range(iters):
        mid = space.clip(0.5 * (lo + hi))
        if _label_theta(space, model, mid) == want:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# DiCE*: counterfactuals first, then back across the boundary
# ---------------------------------------------------------------------------


def dice_star(
    x,
    model,
    dataset: Dataset,
    schema: FeatureSchema,
    m: int,
    config: ObjectiveConfig | None = None,
    seed: int = 0,
) -> ExplanationSet:
    """Generate m diverse counterfactuals, then step each one back to the
    first positively labeled point on the way toward the individual."""
    config = config or ObjectiveConfig()
    encoder = dataset.encoder
    x_vec, xid = resolve_vector(x, encoder)
    _require_positive(model, x_vec)
    space = build_action_space(x_vec, schema, encoder)
    rng = np.random.default_rng(seed)

    # step 1: diverse minimal counterfactuals by random restart + bisection
    flips: list[np.ndarray] = []
    for _ in range(max(8 * m, 32)):
        cand = space.sample(rng, 1)[0]
        if _label_theta(space, model, cand) == 0:
            flips.append(space.clip(_bisect_boundary(space, model, cand, space.current, want=0)))
        if len(flips) >= 4 * m:
            break
    if not flips:
        # nothing in the action space flips the label: fall back to a minimal step
        theta = space.initial_step(0.05)
        return _finalize(
            "dice_star", seed, m, [theta], ["no counterfactual found; minimal feasible step"],
            space, model, config, _reference(dataset, config), rng, individual_id=xid,
        )
    # greedy max-min selection for diversity among the counterfactuals
    chosen = [min(range(len(flips)), key=lambda i: np.linalg.norm(flips[i] - space.current))]
    while len(chosen) < min(m, len(flips)):
        best, best_d = None, -1.0
        for i in range(len(flips)):
            if i in chosen:
                continue
            d = min(np.linalg.norm(flips[i] - flips[j]) for j in chosen)
            if d > best_d:
                best, best_d = i, d
        chosen.append(best)

    # step 2: from each counterfactual, search back toward class 1
    thetas, notes = [], []
    for i in chosen:
        theta = _bisect_boundary(space, model, space.current, flips[i], want=1)
        thetas.append(theta)
        notes.append("back-crossing from counterfactual")
    return _finalize(
        "dice_star", seed, m, thetas, notes, space, model, config,
        _reference(dataset, config), rng, individual_id=xid,
    )


# ---------------------------------------------------------------------------
# PIECE*: expected statistical values in the contrast class, low-probability first
# ---------------------------------------------------------------------------


def _beta_moments(values: np.ndarray) -> tuple[float, float] | None:
    """Method-of-moments Beta fit on (0, 1)-clipped values; None when degenerate."""
    v = np.clip(values, 1e-6, 1.0 - 1e-6)
    mean = float(v.mean())
    var = float(v.var())
    if var < 1e-12:
        return None
    common = mean * (1.0 - mean) / var - 1.0
    if common <= 0:
        return None
    return mean * common, (1.0 - mean) * common


def piece_star(
    x,
    model,
    dataset: Dataset,
    schema: FeatureSchema,
    m: int,
    config: ObjectiveConfig | None = None,
    seed: int = 0,
) -> ExplanationSet:
    """Move features to their expected value in the contrast class, least
    probable first, stopping before the boundary would be crossed."""
    from scipy.stats import beta as beta_dist

    config = config or ObjectiveConfig()
    encoder = dataset.encoder
    x_vec, xid = resolve_vector(x, encoder)
    _require_positive(model, x_vec)
    space = build_action_space(x_vec, schema, encoder)
    rng = np.random.default_rng(seed)

    pred = model.labels(dataset.X)
    contrast = dataset.X[pred == 0]
    if len(contrast) == 0:
        contrast = dataset.X  # degenerate: no predicted-negative rows to model

    feature_values = encoder.feature_values(contrast)
    x_features = encoder.feature_values(x_vec[None, :])[0]
    coord_of = {c.feature: j for j, c in enumerate(space.coords)}

    ranked: list[tuple[float, int, float]] = []  # (probability, coord index, target value)
    skipped = []
    for fi, spec in enumerate(schema.features):
        if spec.name not in coord_of:
            continue
        col = feature_values[:, fi]
        if spec.kind == KIND_CONTINUOUS:
            fit = _beta_moments(col)
            if fit is None:
                skipped.append(spec.name)
                continue
            a, b = fit
            v = float(np.clip(x_features[fi], 1e-6, 1 - 1e-6))
            cdf = float(beta_dist.cdf(v, a, b))
            prob = min(cdf, 1.0 - cdf)  # minimum of the two integrals either side
            target = a / (a + b)  # expected value under the contrast-class fit
        else:
            denom = max(spec.n_levels - 1, 1)
            lvl = np.rint(col * denom).astype(int)
            counts = np.bincount(lvl, minlength=spec.n_levels).astype(float)
            probs = (counts + 1.0) / (counts.sum() + spec.n_levels)
            cur = int(round(x_features[fi] * denom))
            prob = float(probs[cur])
            target = float(np.rint(probs @ np.arange(spec.n_levels))) / denom
        ranked.append((prob, coord_of[spec.name], target))
    ranked.sort(key=lambda t: (t[0], t[1]))

    theta = space.current.copy()
    path = []
    for _, j, target in ranked:
        cand = theta.copy()
        cand[j] = target
        cand = space.clip(cand)  # actionability: clip to the closest value allowed
        if np.max(np.abs(cand - theta)) < 1e-12:
            continue  # already at the contrast expectation (or pinned)
        if _label_theta(space, model, cand) != 1:
            break  # the next modification would cross the boundary
        theta = cand
        path.append(theta.copy())

    if not path:
        return _finalize(
            "piece_star", seed, m, [space.current.copy()],
            ["no effective semifactual: every modification crosses the boundary"],
            space, model, config, _reference(dataset, config), rng, individual_id=xid,
        )
    # m suggestions from the modification path, most-modified first
    thetas = list(reversed(path))[:m]
    notes = [f"{len(path) - i} feature value(s) at contrast-class expectation" for i in range(len(thetas))]
    if skipped:
        notes[0] += f"; skipped degenerate fit(s): {','.join(skipped)}"
    return _finalize(
        "piece_star", seed, m, thetas, notes, space, model, config,
        _reference(dataset, config), rng, individual_id=xid,
    )


# ---------------------------------------------------------------------------
# DSER*: relaxed one-hot hill climbing with repulsion from earlier solutions
# ---------------------------------------------------------------------------


def dser_star(
    x,
    model,
    dataset: Dataset,
    schema: FeatureSchema,
    m: int,
    config: ObjectiveConfig | None = None,
    seed: int = 0,
    repulsion: float = 0.5,
    iters: int = 120,
) -> ExplanationSet:
    """Sequential hill climbs maximizing distance from the individual (plus
    repulsion from solutions already found) subject to the positive label;
    categorical blocks are optimized as real values and projected at the end."""
    config = config or ObjectiveConfig()
    encoder = dataset.encoder
    x_vec, xid = resolve_vector(x, encoder)
    _require_positive(model, x_vec)
    space = build_action_space(x_vec, schema, encoder, snap_categorical=False)
    proj_space = build_action_space(x_vec, schema, encoder, snap_categorical=True)
    rng = np.random.default_rng(seed)
    k = len(space)

    found: list[np.ndarray] = []
    found_sf: list[np.ndarray] = []

    def objective_batch(thetas):
        sf = space.apply(thetas)
        val = np.linalg.norm(sf - x_vec[None, :], axis=1)
        if found_sf:
            rep = np.min(
                [np.linalg.norm(sf - s[None, :], axis=1) for s in found_sf], axis=0
            )
            val = val + repulsion * rep
        return val, sf

    for _ in range(m):
        theta = space.current.copy()
        best_val = float(objective_batch(theta[None, :])[0][0])
        step = 0.25 * np.maximum(space.hi - space.lo, 1e-12)
        for _ in range(iters):
            directions = rng.normal(size=(6, k))
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
            axes = np.eye(k) * np.where(rng.uniform(size=k) < 0.5, 1.0, -1.0)[:, None]
            cands = space.clip(theta[None, :] + step[None, :] * np.vstack([directions, axes]))
            vals, sfs = objective_batch(cands)
            ok = (model.scores(sfs) > model.psi) & (vals > best_val + 1e-12)
            if ok.any():
                pick = int(np.argmax(np.where(ok, vals, -np.inf)))
                theta, best_val = cands[pick], float(vals[pick])
            else:
                step *= 0.5
                if float(step.max()) < 1e-5:
                    break
        # project categorical coordinates onto their nearest feasible level
        projected = proj_space.clip(theta)
        if _label_theta(proj_space, model, projected) != 1:
            projected = _bisect_boundary(proj_space, model, proj_space.current, projected, want=1)
        found.append(projected)
        found_sf.append(proj_space.apply(projected[None, :])[0])

    return _finalize(
        "dser_star", seed, m, found, ["hill-climbed distance maximum"] * len(found),
        proj_space, model, config, _reference(dataset, config), rng, individual_id=xid,
    )


# ---------------------------------------------------------------------------
# causal recourse baselines: score descent through the structural model
# ---------------------------------------------------------------------------


def _causal_walk(
    x,
    model,
    scm: Scm,
    schema: FeatureSchema,
    encoder: Encoder,
    config: ObjectiveConfig,
    seed: int,
    robust: bool,
    method: str,
    tau: float = 0.01,
    max_iter: int = 500,
) -> ExplanationSet:
    align_with_schema(scm, schema.names)
    if encoder.mode != "ordinal":
        raise ValueError("causal baselines require the ordinal (real-valued) encoding")
    x_vec, xid = resolve_vector(x, encoder)
    _require_positive(model, x_vec)
    space = build_action_space(x_vec, schema, encoder, snap_categorical=False)
    node_idx = [scm.node_index(name) for name in space.feature_names]

    def probe_ok(sf: np.ndarray) -> bool:
        """Robust variant: an individual epsilon-close (with the same recourse
        applied, which carries the perturbation through to the end state)
        must also keep the positive label; solved to first order."""
        if not robust:
            return True
        g = model.gradient(sf)
        nrm = np.linalg.norm(g)
        if nrm == 0:
            return True
        adv_sf = sf - config.epsilon * g / nrm
        return model.score(adv_sf) > model.psi

    subsets = actionable_subsets(len(space))
    m = len(subsets)
    rng = np.random.default_rng(seed)
    thetas, notes = [], []
    intervenes = []
    for subset in subsets:
        nodes = [node_idx[j] for j in subset]
        jac = scm.jacobian(nodes)
        theta = space.current.copy()
        sf0 = semifactual_matrix(space, theta[None, :], scm, intervene=subset)[0]
        if robust and not probe_ok(sf0):
            thetas.append(theta)
            notes.append("already within epsilon of the boundary; zero gain")
            intervenes.append(subset)
            continue
        for _ in range(max_iter):
            sf = semifactual_matrix(space, theta[None, :], scm, intervene=subset)[0]
            grad = model.gradient(sf) @ jac  # walk toward the boundary
            cand = theta.copy()
            cand[subset] = theta[subset] - tau * grad
            cand = space.clip(cand)
            if np.linalg.norm(cand - theta) < 1e-9:
                break
            sf_next = semifactual_matrix(space, cand[None, :], scm, intervene=subset)[0]
            if model.score(sf_next) <= model.psi or not probe_ok(sf_next):
                break  # the next step would take it over (or within epsilon of) the boundary
            theta = cand
        thetas.append(theta)
        notes.append("subset=" + ",".join(space.feature_names[j] for j in subset))
        intervenes.append(subset)
    return _finalize(
        method, seed, m, thetas, notes, space, model, config,
        None, rng, scm=scm, individual_id=xid, intervenes=intervenes,
    )


def karimi_star(x, model, scm, schema, encoder, config=None, seed: int = 0) -> ExplanationSet:
    """Cost-minimizing recourse stopped one step before crossing the boundary."""
    return _causal_walk(x, model, scm, schema, encoder, config or ObjectiveConfig(norm="l1"),
                        seed, robust=False, method="karimi_star")


def dominguez_star(x, model, scm, schema, encoder, config=None, seed: int = 0) -> ExplanationSet:
    """As karimi_star, but also stops before any epsilon-ball probe crosses."""
    return _causal_walk(x, model, scm, schema, encoder, config or ObjectiveConfig(norm="l1"),
                        seed, robust=True, method="dominguez_star")
