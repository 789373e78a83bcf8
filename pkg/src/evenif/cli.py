"""Command line interface.

Exit codes: 0 ok, 1 user error (bad inputs, schema violations), 2 internal.
User-facing failures are emitted as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import EvenIfError


def _load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _objective_from(args, causal: bool = False):
    from .objective import ObjectiveConfig

    base = {"norm": "l1"} if causal else {}
    if args.config:
        base.update(_load_json(args.config))
    return ObjectiveConfig.from_dict(base) if base else (ObjectiveConfig(norm="l1") if causal else None)


def cmd_validate_schema(args) -> int:
    from .schema import FeatureSchema

    schema = FeatureSchema.load(args.schema)
    print(json.dumps({
        "ok": True,
        "features": len(schema),
        "actionable": [f.name for f in schema.actionable_features()],
        "onehot_width": schema.onehot_width(),
        "hash": schema.hash(),
    }, indent=2))
    return 0


def cmd_train(args) -> int:
    from .dataset import load_dataset
    from .predictors import train
    from .schema import FeatureSchema

    schema = FeatureSchema.load(args.schema)
    dataset = load_dataset(args.data, schema, mode=args.encoding)
    hyper = _load_json(args.config) if args.config else None
    model = train(dataset, args.kind, hyper, seed=args.seed)
    model.save(args.out)
    print(json.dumps({
        "kind": model.kind,
        "out": str(args.out),
        "holdout_accuracy": model.holdout_accuracy,
        "schema_hash": model.schema_hash,
    }, indent=2))
    return 0


def cmd_explain(args) -> int:
    from .dataset import load_dataset
    from .engines import even_if_sentence, explain_causal, explain_noncausal
    from .predictors import load_model
    from .schema import FeatureSchema
    from .scm import load_scm
    from . import baselines

    schema = FeatureSchema.load(args.schema)
    scm = load_scm(args.scm) if args.scm else None
    mode = args.encoding or ("ordinal" if scm else "onehot")
    dataset = load_dataset(args.data, schema, mode=mode)
    model = load_model(args.model, schema)
    if args.overrides:
        schema = schema.with_overrides(_load_json(args.overrides))
    if args.individual:
        record = _load_json(args.individual)
        x = dataset.encoder.encode_record(record)
    else:
        ind = dataset.individual(args.index)
        record, x = ind.raw, ind
    config = _objective_from(args, causal=scm is not None)

    if args.method == "sgen" and scm is not None:
        expl = explain_causal(x, model, scm, schema, dataset.encoder, config=config, seed=args.seed)
    elif args.method == "sgen":
        expl = explain_noncausal(x, model, dataset, schema, args.m, config=config, seed=args.seed)
    elif args.method in ("karimi_star", "dominguez_star"):
        fn = getattr(baselines, args.method)
        expl = fn(x, model, scm, schema, dataset.encoder, config=config, seed=args.seed)
    else:
        fn = getattr(baselines, args.method)
        expl = fn(x, model, dataset, schema, args.m, config=config, seed=args.seed)

    doc = expl.to_dict()
    doc["sentences"] = [even_if_sentence(schema, record, it) for it in expl.items]
    print(json.dumps(doc, indent=2))
    for sentence in doc["sentences"]:
        print(sentence, file=sys.stderr)
    return 0


def cmd_benchmark(args) -> int:
    from .evaluation import run_benchmark
    from .report import emit_artifacts

    plan = _load_json(args.plan)
    if args.config:
        plan["objective"] = {**plan.get("objective", {}), **_load_json(args.config)}
    if args.seed is not None and "seeds" not in plan:
        plan["seeds"] = list(range(args.seed, args.seed + int(plan.get("n_seeds", 5))))
    report = run_benchmark(plan)
    out_dir = Path(args.out_dir)
    artifacts = emit_artifacts(report, out_dir, plan)
    print(json.dumps({
        "rows": len(report.rows),
        "failures": len(report.failures),
        "warnings": report.warnings,
        "artifacts": artifacts,
    }, indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import Workspace, create_app

    if args.demo or not args.workspace:
        workspace = Workspace.demo(seed=args.seed)
    else:
        workspace = _workspace_from_dir(Path(args.workspace), seed=args.seed)
    if args.benchmarks:
        workspace.benchmarks_dir = Path(args.benchmarks)
    app = create_app(workspace, explain_timeout=args.timeout)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _workspace_from_dir(root: Path, seed: int = 0):
    """Each subdirectory with data.csv + schema.json becomes one dataset."""
    from .service import Workspace

    ws = Workspace(benchmarks_dir=root / "benchmarks" if (root / "benchmarks").exists() else None)
    for sub in sorted(p for p in root.iterdir() if p.is_dir() and (p / "data.csv").exists()):
        ws.add_files(
            sub.name,
            sub / "data.csv",
            sub / "schema.json",
            model_path=(sub / "model.json") if (sub / "model.json").exists() else None,
            scm_path=(sub / "scm.json") if (sub / "scm.json").exists() else None,
            seed=seed,
        )
    if not ws.entries:
        raise EvenIfError(f"no datasets found under {root}")
    return ws


def cmd_make_demo(args) -> int:
    from . import synth
    from .dataset import write_csv
    from .predictors import train

    out = Path(args.out)
    specs = [
        ("credit", synth.credit_schema(), synth.credit_records(args.rows or 1000, 7), None, "logistic"),
        ("adult", synth.adult_schema(), synth.adult_records(args.rows or 1500, 11), synth.adult_scm(), "logistic"),
        ("compas", synth.compas_schema(), synth.compas_records(args.rows or 1200, 13), synth.compas_scm(), "logistic"),
    ]
    written = []
    for name, schema, (records, labels), scm, kind in specs:
        d = out / name
        d.mkdir(parents=True, exist_ok=True)
        schema.save(d / "schema.json")
        write_csv(d / "data.csv", schema, records, labels)
        if scm is not None:
            scm.save(d / "scm.json")
        from .dataset import Dataset
        from .encoding import Encoder

        ds = Dataset(schema, Encoder(schema, mode="ordinal" if scm else "onehot"), records, labels)
        train(ds, kind, seed=args.seed).save(d / "model.json")
        written.append(str(d))
    print(json.dumps({"workspace": str(out), "datasets": written}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evenif", description="Semifactual recourse engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-schema", help="check a schema JSON document")
    p.add_argument("schema")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_validate_schema)

    p = sub.add_parser("train", help="train a model on a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--kind", default="logistic",
                   choices=["logistic", "tree", "naive-bayes", "mlp"])
    p.add_argument("--encoding", default="onehot", choices=["onehot", "ordinal"])
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="hyperparameter JSON")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("explain", help="generate semifactual suggestions")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--scm")
    p.add_argument("--encoding", choices=["onehot", "ordinal"])
    p.add_argument("--method", default="sgen",
                   choices=["sgen", "dice_star", "piece_star", "dser_star",
                            "karimi_star", "dominguez_star"])
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--individual", help="JSON file with one record")
    p.add_argument("--index", type=int, default=0, help="row index when no record is given")
    p.add_argument("--overrides", help="constraint override JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="objective config JSON")
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("benchmark", help="run a benchmark plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--out-dir", default="reports")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_benchmark)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--workspace", help="directory of dataset subfolders")
    p.add_argument("--demo", action="store_true", help="serve the built-in demo datasets")
    p.add_argument("--benchmarks", help="directory with benchmark run artifacts")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("make-demo", help="write demo CSVs, schemas, models and SCMs")
    p.add_argument("--out", default="demo-workspace")
    p.add_argument("--rows", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_make_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except EvenIfError as exc:
        payload = {"error": str(exc), "kind": exc.kind}
        diagnostics = getattr(exc, "diagnostics", None)
        if diagnostics:
            payload["diagnostics"] = diagnostics
        print(json.dumps(payload), file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(json.dumps({"error": str(exc), "kind": "file-not-found"}), file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - internal failures
        print(json.dumps({"error": f"internal error: {exc}", "kind": "internal"}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
