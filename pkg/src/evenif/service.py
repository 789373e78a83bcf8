"""HTTP service for training-free exploration: predict, probe, explain.

Stateless request handling over a read-only workspace of datasets and
models; constraint overrides arrive per request and are never persisted.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor, TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import baselines as _baselines
from .dataset import Dataset, load_dataset
from .engines import even_if_sentence, explain_causal, explain_noncausal
from .errors import (
    DataValidationError,
    EvenIfError,
    NoEffectiveSemifactualError,
    NotPositiveOutcomeError,
    SchemaError,
)
from .evaluation import DatasetBundle, builtin_bundle
from .objective import ObjectiveConfig
from .predictors import Predictor, load_model, train
from .schema import FeatureSchema
from .scm import load_scm

EXPLAIN_METHODS = ("sgen", "dice_star", "piece_star", "dser_star", "karimi_star", "dominguez_star")


@dataclass
class WorkspaceEntry:
    bundle: DatasetBundle
    models: dict[str, Predictor] = field(default_factory=dict)
    default_model: str = "logistic"

    @property
    def dataset(self) -> Dataset:
        return self.bundle.dataset

    def model(self, kind: str | None = None) -> Predictor:
        kind = kind or self.default_model
        if kind not in self.models:
            raise DataValidationError(f"dataset has no model of kind {kind!r}")
        return self.models[kind]


class Workspace:
    """Datasets, models and benchmark artifacts served read-only."""

    def __init__(self, benchmarks_dir: str | Path | None = None):
        self.entries: dict[str, WorkspaceEntry] = {}
        self.benchmarks_dir = Path(benchmarks_dir) if benchmarks_dir else None

    def add(self, entry_id: str, bundle: DatasetBundle, model_kinds: list[str], seed: int = 0):
        entry = WorkspaceEntry(bundle)
        for kind in model_kinds:
            entry.models[kind] = train(bundle.dataset, kind, seed=seed)
        entry.default_model = model_kinds[0]
        self.entries[entry_id] = entry
        return entry

    def add_files(self, entry_id: str, csv_path, schema_path, model_path=None, scm_path=None,
                  model_kinds: list[str] | None = None, seed: int = 0):
        schema = FeatureSchema.load(schema_path)
        scm = load_scm(scm_path) if scm_path else None
        mode = "ordinal" if scm else "onehot"
        ds = load_dataset(csv_path, schema, mode=mode)
        bundle = DatasetBundle(entry_id, ds, scm=scm)
        entry = WorkspaceEntry(bundle)
        if model_path:
            model = load_model(model_path, schema)
            entry.models[model.kind] = model
            entry.default_model = model.kind
        else:
            for kind in model_kinds or ["logistic"]:
                entry.models[kind] = train(ds, kind, seed=seed)
            entry.default_model = (model_kinds or ["logistic"])[0]
        self.entries[entry_id] = entry
        return entry

    @classmethod
    def demo(cls, seed: int = 0) -> "Workspace":
        ws = cls()
        ws.add("credit", builtin_bundle("credit", n=600), ["logistic", "tree", "naive-bayes"], seed)
        ws.add("adult", builtin_bundle("adult", n=800), ["logistic", "mlp"], seed)
        ws.add("compas", builtin_bundle("compas", n=800), ["logistic"], seed)
        return ws

    def entry(self, dataset_id: str) -> WorkspaceEntry:
        if dataset_id not in self.entries:
            raise KeyError(dataset_id)
        return self.entries[dataset_id]


def _error(status: int, message: str, field_name: str | None = None, kind: str = "error"):
    body = {"error": message, "kind": kind}
    if field_name:
        body["field"] = field_name
    return JSONResponse(status_code=status, content=body)


def create_app(workspace: Workspace, explain_timeout: float = 30.0) -> FastAPI:
    app = FastAPI(title="evenif", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    executor = ThreadPoolExecutor(max_workers=4)
    app.state.workspace = workspace

    def get_entry(dataset_id: str) -> WorkspaceEntry:
        return workspace.entry(dataset_id)

    @app.exception_handler(KeyError)
    async def unknown_dataset(_req: Request, exc: KeyError):
        return _error(404, f"unknown dataset {exc.args[0]!r}", field_name="dataset", kind="not-found")

    @app.exception_handler(NotPositiveOutcomeError)
    async def not_positive(_req: Request, exc: NotPositiveOutcomeError):
        return _error(409, str(exc), kind=exc.kind)

    @app.exception_handler(NoEffectiveSemifactualError)
    async def no_effective(_req: Request, exc: NoEffectiveSemifactualError):
        return JSONResponse(
            status_code=409,
            content={"error": str(exc), "kind": exc.kind, "diagnostics": exc.diagnostics},
        )

    @app.exception_handler(EvenIfError)
    async def domain_error(_req: Request, exc: EvenIfError):
        return _error(400, str(exc), kind=exc.kind)

    @app.get("/v1/datasets")
    def list_datasets():
        out = []
        for entry_id, entry in sorted(workspace.entries.items()):
            out.append(
                {
                    "id": entry_id,
                    "rows": len(entry.dataset),
                    "encoding": entry.dataset.encoder.mode,
                    "causal": entry.bundle.causal,
                    "models": sorted(entry.models),
                    "default_model": entry.default_model,
                    "positive_label_meaning": entry.dataset.schema.positive_label_meaning,
                }
            )
        return out

    @app.get("/v1/datasets/{dataset_id}/schema")
    def get_schema(dataset_id: str):
        return get_entry(dataset_id).dataset.schema.to_dict()

    @app.get("/v1/datasets/{dataset_id}/individuals")
    def list_individuals(dataset_id: str, label: str | None = None, limit: int = 25, model: str | None = None):
        entry = get_entry(dataset_id)
        mdl = entry.model(model)
        ds = entry.dataset
        scores = mdl.scores(ds.X)
        out = []
        for i in range(len(ds)):
            lbl = int(scores[i] > mdl.psi)
            if label == "positive" and lbl != 1:
                continue
            if label == "negative" and lbl != 0:
                continue
            out.append({"id": ds.ids[i], "record": ds.records[i], "score": float(scores[i]), "label": lbl})
            if len(out) >= limit:
                break
        return out

    def _score_record(dataset_id: str, payload: dict):
        entry = get_entry(dataset_id)
        record = payload.get("record")
        if not isinstance(record, dict):
            raise DataValidationError("body must include a 'record' object")
        mdl = entry.model(payload.get("model"))
        vec = entry.dataset.encoder.encode_record(record)
        score = mdl.score(vec)
        return {"score": score, "label": int(score > mdl.psi)}

    @app.post("/v1/predict")
    async def predict(request: Request):
        payload = await request.json()
        dataset_id = payload.get("dataset")
        if not dataset_id:
            return _error(422, "missing field 'dataset'", field_name="dataset")
        try:
            return _score_record(dataset_id, payload)
        except SchemaError as exc:
            return _error(422, str(exc), field_name="record", kind="schema")

    @app.post("/v1/probe")
    async def probe(request: Request):
        # manual what-if: identical contract to /v1/predict
        return await predict(request)

    @app.post("/v1/explain")
    async def explain(request: Request):
        payload = await request.json()
        dataset_id = payload.get("dataset")
        if not dataset_id:
            return _error(422, "missing field 'dataset'", field_name="dataset")
        entry = get_entry(dataset_id)
        ds = entry.dataset
        method = payload.get("method", "sgen")
        if method not in EXPLAIN_METHODS:
            return _error(422, f"unknown method {method!r}", field_name="method")
        if method in ("karimi_star", "dominguez_star") and not entry.bundle.causal:
            return _error(422, f"method {method!r} needs a causal dataset", field_name="method")
        seed = int(payload.get("seed", 0))
        m = int(payload.get("m", 3))
        if m < 1:
            return _error(422, "m must be >= 1", field_name="m")
        try:
            schema = ds.schema.with_overrides(payload.get("overrides") or {})
        except SchemaError as exc:
            return _error(422, str(exc), field_name="overrides", kind="schema")
        individual = payload.get("individual")
        try:
            if isinstance(individual, dict):
                x = ds.encoder.encode_record(individual)
                x_record = individual
            elif isinstance(individual, str):
                ind = ds.individual(individual)
                x, x_record = ind, ind.raw
            else:
                return _error(422, "missing field 'individual'", field_name="individual")
        except (SchemaError, DataValidationError) as exc:
            return _error(422, str(exc), field_name="individual", kind="schema")
        base = {"norm": "l1"} if entry.bundle.causal else {}
        try:
            config = ObjectiveConfig.from_dict({**base, **(payload.get("config") or {})})
        except (TypeError, ValueError) as exc:
            return _error(422, f"invalid config: {exc}", field_name="config")
        mdl = entry.model(payload.get("model"))

        def work():
            if method == "sgen" and entry.bundle.causal:
                return explain_causal(x, mdl, entry.bundle.scm, schema, ds.encoder,
                                      config=config, seed=seed)
            if method == "sgen":
                return explain_noncausal(x, mdl, ds, schema, m, config=config, seed=seed)
            if method == "karimi_star":
                return _baselines.karimi_star(x, mdl, entry.bundle.scm, schema, ds.encoder,
                                              config=config, seed=seed)
            if method == "dominguez_star":
                return _baselines.dominguez_star(x, mdl, entry.bundle.scm, schema, ds.encoder,
                                                 config=config, seed=seed)
            fn = getattr(_baselines, method)
            return fn(x, mdl, ds, schema, m, config=config, seed=seed)

        future = executor.submit(work)
        try:
            expl = future.result(timeout=explain_timeout)
        except FutureTimeout:
            return _error(504, f"explanation timed out after {explain_timeout}s", kind="timeout")
        doc = expl.to_dict()
        doc["individual_record"] = x_record
        doc["sentences"] = [even_if_sentence(schema, x_record, it) for it in expl.items]
        return doc

    @app.get("/v1/benchmarks/{run}")
    def get_benchmark(run: str):
        if workspace.benchmarks_dir is None:
            return _error(404, "no benchmarks directory configured", kind="not-found")
        path = workspace.benchmarks_dir / run / "summary.json"
        if not path.exists():
            return _error(404, f"unknown benchmark run {run!r}", kind="not-found")
        return json.loads(path.read_text(encoding="utf-8"))

    return app
