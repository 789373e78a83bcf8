"""Benchmark metrics, the adversarial-radius probe, and the grid runner.

Metrics follow the reporting conventions of the comparison protocol: gain
is the mean query-to-semifactual distance (larger is better), plausibility
the distance to the nearest training example (smaller is better),
robustness the label-survival rate under single-feature perturbations, and
diversity the mean pairwise distance of the returned set.  Gain,
plausibility and diversity are min-max normalized within each
(dataset, model) cell before cross-dataset averaging; robustness is already
0-1 and stays raw.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import baselines as _baselines
from .dataset import Dataset
from .encoding import Encoder
from .engines import CausalConfig, GaConfig, explain_causal, explain_noncausal
from .errors import EvenIfError
from .objective import ObjectiveConfig, norm_of
from .schema import KIND_CONTINUOUS
from .scm import Scm

METRICS_NORMALIZED = ("gain", "plausibility", "diversity")
REQUIRED_COLUMNS = ("dataset", "model", "method", "m", "seed",
                    "gain", "plausibility", "robustness", "diversity")
EXTRA_COLUMNS = ("action_gain", "adv_radius", "adv_pass")


@dataclass
class ExplanationMetrics:
    gain: float
    plausibility: float
    robustness: float
    diversity: float

    def to_dict(self) -> dict:
        return {
            "gain": self.gain,
            "plausibility": self.plausibility,
            "robustness": self.robustness,
            "diversity": self.diversity,
        }


def _single_feature_perturbations(
    encoder: Encoder, point: np.ndarray, n: int, epsilon: float, rng: np.random.Generator
) -> np.ndarray:
    """n copies of ``point``, each with exactly one feature perturbed."""
    slots = encoder.slots
    lo, hi = encoder.coordinate_box()
    out = np.tile(point, (n, 1))
    picks = rng.integers(0, len(slots), size=n)
    for i in range(n):
        s = slots[picks[i]]
        if s.spec.kind == KIND_CONTINUOUS:
            j = s.offset
            out[i, j] = np.clip(out[i, j] + rng.uniform(-epsilon, epsilon), lo[j], hi[j])
        else:
            levels = s.spec.n_levels
            cur = encoder.level_of(s, point)
            others = [l for l in range(levels) if l != cur]
            new = others[rng.integers(0, len(others))] if others else cur
            if encoder.mode == "onehot":
                out[i, s.offset : s.offset + s.width] = 0.0
                out[i, s.offset + new] = 1.0
            else:
                out[i, s.offset] = new / max(levels - 1, 1)
    return out


def evaluate_explanations(
    expl,
    x_vec: np.ndarray,
    model,
    dataset: Dataset,
    config: ObjectiveConfig | None = None,
    seed: int = 0,
) -> ExplanationMetrics:
    """Benchmark metrics for one explanation set.

    Robustness perturbs ONE feature at a time (uniform within +-epsilon for
    continuous features, a random other level for categorical ones), 100
    samples per item, and reports the label-match rate against h(x).
    """
    config = config or ObjectiveConfig()
    if not expl.items:
        raise ValueError("empty explanation set")
    rng = np.random.default_rng(seed)
    encoder = dataset.encoder
    ends = np.stack([it.end_state for it in expl.items])
    gains = norm_of(ends - np.asarray(x_vec)[None, :], config.norm)
    nearest = np.sqrt(
        np.maximum(
            (ends * ends).sum(axis=1)[:, None]
            - 2.0 * ends @ dataset.X.T
            + (dataset.X * dataset.X).sum(axis=1)[None, :],
            0.0,
        ).min(axis=1)
    )
    x_label = int(model.label(x_vec))
    match_rates = []
    for it in expl.items:
        pts = _single_feature_perturbations(encoder, it.end_state, 100, config.epsilon, rng)
        match_rates.append(float((model.labels(pts) == x_label).mean()))
    m = len(expl.items)
    div = 0.0
    if m > 1:
        total = sum(
            float(np.linalg.norm(ends[i] - ends[j]))
            for i in range(m - 1)
            for j in range(i + 1, m)
        )
        div = 2.0 * total / (m * (m - 1))
    return ExplanationMetrics(
        gain=float(gains.mean()),
        plausibility=float(nearest.mean()),
        robustness=float(np.mean(match_rates)),
        diversity=div,
    )


# ---------------------------------------------------------------------------
# adversarial-radius probe
# ---------------------------------------------------------------------------


def adversarial_radius(
    model,
    point: np.ndarray,
    epsilon: float,
    seed: int = 0,
    restarts: int = 10,
    max_steps: int = 300,
) -> tuple[float, bool]:
    """Distance to the nearest label flip found; passes iff it exceeds epsilon.

    Gradient descent on the score from several randomized starts (coordinate
    scans for non-differentiable models), refined by bisection toward the
    boundary.  The reported value upper-bounds the true minimal radius; if
    no flip is found within budget the radius is +inf and the probe passes.
    """
    point = np.asarray(point, dtype=float)
    rng = np.random.default_rng(seed)
    if model.label(point) != 1:
        return 0.0, False

    def bisect(inside, outside):
        for _ in range(60):
            mid = 0.5 * (inside + outside)
            if model.label(mid) == 1:
                inside = mid
            else:
                outside = mid
        return float(np.linalg.norm(outside - point))

    best = np.inf
    if getattr(model, "differentiable", False):
        for r in range(restarts):
            z = point + (rng.normal(0, 0.01 * epsilon, point.size) if r else 0.0)
            step = 0.25 * epsilon
            for _ in range(max_steps):
                g = model.gradient(z)
                nrm = np.linalg.norm(g)
                if nrm < 1e-12:
                    break
                z = z - step * g / nrm
                if model.label(z) == 0:
                    best = min(best, bisect(point, z))
                    break
                if np.linalg.norm(z - point) > best:
                    break  # already farther than the best flip found
    else:
        # bisection along signed coordinate directions
        for j in range(point.size):
            for sign in (1.0, -1.0):
                step = epsilon
                z = point.copy()
                for _ in range(30):
                    z[j] = point[j] + sign * step
                    if model.label(z) == 0:
                        best = min(best, bisect(point, z))
                        break
                    step *= 2.0
    return float(best), bool(best > epsilon)


def cohens_d(a, b, paired: bool = False) -> float:
    """Effect size; the paired form is mean(diff) / std(diff)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if paired:
        diff = a - b
        sd = diff.std(ddof=1)
        return float(diff.mean() / sd) if sd > 0 else float("inf") * np.sign(diff.mean())
    na, nb = len(a), len(b)
    pooled = np.sqrt(((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / (na + nb - 2))
    return float((a.mean() - b.mean()) / pooled) if pooled > 0 else 0.0


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


@dataclass
class BenchmarkReport:
    rows: list[dict] = field(default_factory=list)
    normalized_rows: list[dict] = field(default_factory=list)
    aggregates: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def aggregate_for(self, method: str, m, metric: str) -> dict | None:
        for row in self.aggregates:
            if row["method"] == method and row["m"] == m and row["metric"] == metric:
                return row
        return None

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "aggregates": self.aggregates,
            "failures": self.failures,
            "warnings": self.warnings,
        }


def aggregate_normalized(rows: list[dict]) -> BenchmarkReport:
    """Min-max normalize gain/plausibility/diversity within each
    (dataset, model) cell, leave robustness raw, then average across cells
    and report mean +- standard error over seeds per (method, m, metric)."""
    report = BenchmarkReport(rows=list(rows))
    cells: dict[tuple, list[dict]] = {}
    for row in rows:
        cells.setdefault((row["dataset"], row["model"]), []).append(row)

    normalized = []
    for key, cell_rows in sorted(cells.items()):
        spans = {}
        for metric in METRICS_NORMALIZED:
            values = [r[metric] for r in cell_rows if r.get(metric) is not None]
            lo, hi = (min(values), max(values)) if values else (0.0, 0.0)
            if hi - lo <= 0:
                report.warnings.append(
                    f"degenerate normalization for {metric!r} in cell {key}: all values equal"
                )
            spans[metric] = (lo, hi)
        for r in cell_rows:
            out = dict(r)
            for metric in METRICS_NORMALIZED:
                lo, hi = spans[metric]
                if r.get(metric) is None:
                    continue
                out[metric] = (r[metric] - lo) / (hi - lo) if hi > lo else 0.0
            normalized.append(out)
    report.normalized_rows = normalized

    # per (method, m, seed): average the normalized values across cells
    per_seed: dict[tuple, dict[str, list[float]]] = {}
    for r in normalized:
        key = (r["method"], r["m"], r["seed"])
        bucket = per_seed.setdefault(key, {})
        for metric in METRICS_NORMALIZED + ("robustness",):
            if r.get(metric) is not None:
                bucket.setdefault(metric, []).append(r[metric])
    combined: dict[tuple, dict[str, list[float]]] = {}
    for (method, m, seed), bucket in per_seed.items():
        tgt = combined.setdefault((method, m), {})
        for metric, vals in bucket.items():
            tgt.setdefault(metric, []).append(float(np.mean(vals)))
    for (method, m), buckets in sorted(combined.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))):
        for metric, vals in sorted(buckets.items()):
            arr = np.asarray(vals)
            stderr = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
            report.aggregates.append(
                {
                    "method": method,
                    "m": m,
                    "metric": metric,
                    "mean": float(arr.mean()),
                    "stderr": stderr,
                    "n": int(len(arr)),
                }
            )
    return report


# ---------------------------------------------------------------------------
# benchmark runner
# ---------------------------------------------------------------------------


@dataclass
class DatasetBundle:
    """Everything a benchmark cell needs about one dataset."""

    id: str
    dataset: Dataset
    scm: Scm | None = None

    @property
    def causal(self) -> bool:
        return self.scm is not None


def builtin_bundle(dataset_id: str, n: int | None = None, data_seed: int | None = None) -> DatasetBundle:
    from . import synth

    if dataset_id == "credit":
        return DatasetBundle("credit", synth.credit_dataset(n or 1000, 7 if data_seed is None else data_seed))
    if dataset_id == "adult":
        return DatasetBundle("adult", synth.adult_dataset(n or 1500, 11 if data_seed is None else data_seed),
                             scm=synth.adult_scm())
    if dataset_id == "compas":
        return DatasetBundle("compas", synth.compas_dataset(n or 1200, 13 if data_seed is None else data_seed),
                             scm=synth.compas_scm())
    raise EvenIfError(f"unknown built-in dataset {dataset_id!r}")


def run_method(
    method: str,
    bundle: DatasetBundle,
    model,
    x,
    m: int,
    config: ObjectiveConfig,
    seed: int,
    ga: GaConfig | None = None,
    causal: CausalConfig | None = None,
):
    ds = bundle.dataset
    if method == "sgen":
        if bundle.causal:
            return explain_causal(x, model, bundle.scm, ds.schema, ds.encoder,
                                  config=config, causal=causal, seed=seed)
        return explain_noncausal(x, model, ds, ds.schema, m, config=config, ga=ga, seed=seed)
    if method == "dice_star":
        return _baselines.dice_star(x, model, ds, ds.schema, m, config=config, seed=seed)
    if method == "piece_star":
        return _baselines.piece_star(x, model, ds, ds.schema, m, config=config, seed=seed)
    if method == "dser_star":
        return _baselines.dser_star(x, model, ds, ds.schema, m, config=config, seed=seed)
    if method == "karimi_star":
        return _baselines.karimi_star(x, model, bundle.scm, ds.schema, ds.encoder,
                                      config=config, seed=seed)
    if method == "dominguez_star":
        return _baselines.dominguez_star(x, model, bundle.scm, ds.schema, ds.encoder,
                                         config=config, seed=seed)
    raise EvenIfError(f"unknown method {method!r}")


def run_benchmark(plan: dict, progress=None) -> BenchmarkReport:
    """Execute the full (dataset x model x method x m x seed) grid.

    Per-cell failures are recorded and the run continues.  The row list is
    assembled in deterministic sorted order, so repeated runs of the same
    plan serialize to byte-identical artifacts.
    """
    from .predictors import train

    config = ObjectiveConfig.from_dict(plan.get("objective", {})) if plan.get("objective") else None
    ga = GaConfig(**plan["ga"]) if plan.get("ga") else None
    causal_cfg = CausalConfig(**plan["causal"]) if plan.get("causal") else None
    seeds = list(plan.get("seeds", range(int(plan.get("n_seeds", 5)))))
    methods = list(plan.get("methods", ["sgen"]))
    m_values = list(plan.get("m_values", [3]))
    model_seed = int(plan.get("model_seed", 0))
    adversarial_eps = plan.get("adversarial_epsilon")

    rows: list[dict] = []
    report = BenchmarkReport()
    for ds_spec in plan.get("datasets", []):
        if isinstance(ds_spec, str):
            ds_spec = {"id": ds_spec}
        bundle = _resolve_bundle(ds_spec)
        cfg = config or (ObjectiveConfig(norm="l1") if bundle.causal else ObjectiveConfig())
        for kind in plan.get("models", ["logistic"]):
            model = train(bundle.dataset, kind, plan.get("hyperparams", {}).get(kind), seed=model_seed)
            positives = bundle.dataset.positive_indices(model)
            min_score = float(plan.get("min_score", 0.0))
            if min_score > 0.0 and len(positives):
                scores = model.scores(bundle.dataset.X[positives])
                deep = positives[scores >= min_score]
                positives = deep if len(deep) else positives
            if len(positives) == 0:
                report.failures.append(
                    {"dataset": bundle.id, "model": kind, "error": "no positively classified rows"}
                )
                continue
            for seed in seeds:
                pick = positives[np.random.default_rng(seed).integers(0, len(positives))]
                x = bundle.dataset.individual(int(pick))
                for method in methods:
                    for m in m_values:
                        cell = {
                            "dataset": bundle.id, "model": kind, "method": method,
                            "m": m, "seed": int(seed),
                        }
                        if progress:
                            progress(cell)
                        try:
                            expl = run_method(method, bundle, model, x, m, cfg, int(seed),
                                              ga=ga, causal=causal_cfg)
                            metrics = evaluate_explanations(expl, x.x, model, bundle.dataset,
                                                            cfg, seed=int(seed))
                            row = {**cell, **metrics.to_dict(),
                                   "action_gain": None, "adv_radius": None, "adv_pass": None}
                            if bundle.causal:
                                row["m"] = expl.m
                                row["action_gain"] = _mean_action_gain(expl, bundle, cfg)
                                if adversarial_eps:
                                    # probe only effective suggestions; a zero-gain
                                    # "no change" fallback is not an explanation
                                    items = [it for it in expl.items if it.gain > 1e-9] or expl.items
                                    radii = [
                                        adversarial_radius(model, it.end_state, adversarial_eps,
                                                           seed=int(seed))
                                        for it in items
                                    ]
                                    finite = [r for r, _ in radii if np.isfinite(r)]
                                    row["adv_radius"] = float(np.mean(finite)) if finite else float("inf")
                                    row["adv_pass"] = float(np.mean([p for _, p in radii]))
                            rows.append(row)
                        except EvenIfError as exc:
                            report.failures.append({**cell, "error": str(exc)})
    rows.sort(key=lambda r: (r["dataset"], r["model"], r["method"], str(r["m"]), r["seed"]))
    agg = aggregate_normalized(rows)
    agg.failures = report.failures
    return agg


def _mean_action_gain(expl, bundle: DatasetBundle, config: ObjectiveConfig) -> float:
    """Gain of the user's own change alone (no structural propagation)."""
    from .actions import build_action_space
    from .objective import gain_batch

    ds = bundle.dataset
    x_vec = _individual_vector(expl, ds)
    space = build_action_space(x_vec, ds.schema, ds.encoder, snap_categorical=False)
    gains = [
        abs(float(gain_batch(space, it.theta[None, :], config, scm=None)[0]))
        for it in expl.items
    ]
    return float(np.mean(gains))


def _individual_vector(expl, ds: Dataset) -> np.ndarray:
    ind = ds.individual(expl.individual_id) if expl.individual_id else None
    if ind is None:
        raise EvenIfError("explanation set lacks an individual id for re-evaluation")
    return ind.x


def _resolve_bundle(spec: dict) -> DatasetBundle:
    if "id" in spec and "csv" not in spec:
        return builtin_bundle(spec["id"], spec.get("n"), spec.get("data_seed"))
    from .dataset import load_dataset
    from .schema import FeatureSchema
    from .scm import load_scm

    schema = FeatureSchema.load(spec["schema"])
    mode = spec.get("encoding", "ordinal" if spec.get("scm") else "onehot")
    ds = load_dataset(spec["csv"], schema, mode=mode)
    scm = load_scm(spec["scm"]) if spec.get("scm") else None
    return DatasetBundle(spec.get("id", spec["csv"]), ds, scm=scm)
