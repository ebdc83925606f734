"""Command-line interface.

Verbs: ingest, descriptors, synth, train, sweep, eval, predict, serve.
Exit codes: 0 success, 1 validation failure (bad data, bad config, parse
errors), 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import assets, bundle as bundle_mod, copula, pipeline
from .chem import parse_smiles, strip_wildcards
from .data import load_feature_table, write_feature_table
from .descriptors import compute_descriptors, default_catalog, descriptor_table
from .errors import ConfigError, PolyflamError
from .pipeline import ExperimentConfig


def _load_config(path: str) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return ExperimentConfig.from_json(text)


def _apply_seed(config: ExperimentConfig, seed: int | None) -> ExperimentConfig:
    if seed is None:
        return config
    return replace(config, seed=seed)


def _write_json(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_ingest(args) -> int:
    report = assets.verify_assets()
    for check in report.checks:
        status = "PASS" if check.ok else "FAIL"
        print(f"{status} {check.name}: {check.detail}")
    print(f"{'OK' if report.ok else 'FAILED'}: {len(report.checks)} checks")
    return 0 if report.ok else 1


def cmd_descriptors(args) -> int:
    catalog = default_catalog()
    if args.smiles:
        graph, _ = strip_wildcards(parse_smiles(args.smiles))
        vec = compute_descriptors(graph, catalog)
        doc = {"catalog_id": catalog.catalog_id, "descriptors": dict(zip(catalog.names, vec.values))}
        _write_json(doc, args.output)
        return 0
    with open(args.input, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    if not rows or "smiles" not in rows[0]:
        raise ConfigError(f"{args.input}: expected CSV with 'name,smiles' header")
    names = [r.get("name", f"row{i}") for i, r in enumerate(rows, 1)]
    graphs = [strip_wildcards(parse_smiles(r["smiles"]))[0] for r in rows]
    table = descriptor_table(graphs, catalog)
    table.names = names
    if not args.output:
        raise ConfigError("--output is required with --input")
    write_feature_table(table, args.output)
    print(f"wrote {table.n_rows} x {len(table.column_names)} descriptor table to {args.output}")
    return 0


def _real_table(args, config: ExperimentConfig | None, target: str):
    if getattr(args, "input", None):
        return load_feature_table(args.input, target_column=target)
    return assets.build_target_table(target)


def cmd_synth(args) -> int:
    table = _real_table(args, None, args.target)
    model = copula.fit(table)
    synth = copula.sample(model, args.n, args.seed)
    write_feature_table(synth, args.output)
    if args.model_out:
        copula.save_copula(model, args.model_out)
    print(f"wrote {synth.n_rows} synthetic rows to {args.output}")
    return 0


def cmd_train(args) -> int:
    config = _apply_seed(_load_config(args.config), args.seed)
    sweep_dir = Path(args.sweep_dir) if args.sweep_dir else None
    if sweep_dir:
        sweep_dir.mkdir(parents=True, exist_ok=True)

    fitted_targets = {}
    report: dict = {"config_seed": config.seed, "catalog_id": config.catalog_id, "targets": {}}
    for target in config.targets:
        table = assets.build_target_table(target)
        size_sweep = pipeline.synth_size_sweep(table, target, config.sizes, config.hp, config.seed)
        topk_sweep = pipeline.top_k_sweep(
            table, target, size_sweep.best, config.k_values, config.hp, config.seed
        )
        fitted, eval_report = pipeline.train_final(
            table, target, size_sweep.best, topk_sweep.best, config.hp, config.seed
        )
        fitted_targets[target] = fitted
        report["targets"][target] = {
            "size_sweep": [list(p) for p in size_sweep.points],
            "best_size": size_sweep.best,
            "top_k_sweep": [list(p) for p in topk_sweep.points],
            "best_top_k": topk_sweep.best,
            **pipeline.report_to_dict(eval_report),
        }
        if sweep_dir:
            pipeline.sweep_to_csv(size_sweep, sweep_dir / f"{target}_size_sweep.csv")
            pipeline.sweep_to_csv(topk_sweep, sweep_dir / f"{target}_topk_sweep.csv")
        print(
            f"{target}: best size {size_sweep.best}, best k {topk_sweep.best}, "
            f"train R2 {eval_report.r2_train_synth:.4f}, real-test R2 {eval_report.r2_test_real:.4f}"
        )

    trained = bundle_mod.TrainedBundle(catalog_id=config.catalog_id, targets=fitted_targets)
    bundle_mod.save_bundle(trained, args.bundle)
    print(f"bundle written to {args.bundle}")
    if args.report:
        _write_json(report, args.report)
    return 0


def cmd_sweep(args) -> int:
    config = _apply_seed(_load_config(args.config), args.seed)
    table = assets.build_target_table(args.target)
    if args.axis == "size":
        result = pipeline.synth_size_sweep(table, args.target, config.sizes, config.hp, config.seed)
    else:
        n_synth = args.n_synth
        if n_synth is None:
            raise ConfigError("--n-synth is required for the top-k sweep axis")
        result = pipeline.top_k_sweep(
            table, args.target, n_synth, config.k_values, config.hp, config.seed
        )
    pipeline.sweep_to_csv(result, args.output)
    print(f"{result.axis} sweep for {args.target}: best {result.best}; wrote {args.output}")
    return 0


def cmd_eval(args) -> int:
    config = _apply_seed(_load_config(args.config), args.seed)
    trained = bundle_mod.load_bundle(args.bundle)
    report: dict = {"config_seed": config.seed, "n_repeats": config.n_repeats, "targets": {}}
    for target in config.targets:
        if target not in trained.targets:
            raise ConfigError(f"bundle has no model for target '{target}'")
        ft = trained.targets[target]
        table = assets.build_target_table(target)
        averaged = pipeline.repeated_eval(
            table,
            target,
            ft.n_synth,
            ft.top_k,
            config.hp,
            config.seed,
            n_repeats=config.n_repeats,
            test_size=config.test_size,
        )
        report["targets"][target] = pipeline.report_to_dict(averaged)
        print(
            f"{target}: avg synth-test R2 {averaged.r2_test_synth:.4f}, "
            f"avg real-test R2 {averaged.r2_test_real:.4f} over {config.n_repeats} repeats"
        )
    if args.report:
        _write_json(report, args.report)
    return 0


def cmd_predict(args) -> int:
    trained = bundle_mod.load_bundle(args.bundle)
    if args.smiles:
        prediction = bundle_mod.predict_all(trained, smiles=args.smiles)
    else:
        prediction = bundle_mod.predict_all(trained, pdb=Path(args.pdb).read_bytes())
    _write_json(prediction.as_dict(), args.output)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(bundle_path=args.bundle)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyflam",
        description="Polymer flammability prediction: datasets, synthetic training data, "
        "random-forest models, and serving.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="verify the shipped reference data")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("descriptors", help="compute descriptors for SMILES input")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--smiles", help="one repeat-unit SMILES string")
    group.add_argument("--input", help="CSV with name,smiles columns")
    p.add_argument("--output", help="output path (JSON for --smiles, CSV for --input)")
    p.set_defaults(func=cmd_descriptors)

    p = sub.add_parser("synth", help="fit the copula and sample synthetic rows")
    p.add_argument("--target", required=True, choices=list(pipeline.TARGETS))
    p.add_argument("--n", type=int, required=True, help="number of synthetic rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input", help="feature CSV to fit on (default: shipped dataset)")
    p.add_argument("--output", required=True, help="synthetic feature CSV path")
    p.add_argument("--model-out", help="also save the fitted copula model (JSON)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="run sweeps and train the final per-target models")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--bundle", required=True, help="output bundle path")
    p.add_argument("--report", help="output report JSON path")
    p.add_argument("--sweep-dir", help="directory for sweep curve CSVs")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="write one sweep curve as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--target", required=True, choices=list(pipeline.TARGETS))
    p.add_argument("--axis", required=True, choices=["size", "topk"])
    p.add_argument("--n-synth", type=int, help="synthetic rows for the top-k axis")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="repeated evaluation of a trained bundle")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--bundle", required=True)
    p.add_argument("--report", help="output report JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="predict flammability metrics for one structure")
    p.add_argument("--bundle", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--smiles")
    group.add_argument("--pdb", help="path to a PDB file")
    p.add_argument("--output", help="write the prediction JSON here instead of stdout")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="start the HTTP prediction service")
    p.add_argument("--bundle", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PolyflamError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
