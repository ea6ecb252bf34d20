"""Command-line entry point.

Every subcommand prints one machine-readable JSON summary to stdout on
success.  Exit codes are stable: 0 ok, 1 usage error, 2 data/validation
error, 3 endpoint/transport error, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from .benchmark import (
    assemble_benchmark,
    build_all_tasks,
    read_benchmark,
    verify_ground_truth,
    write_benchmark,
)
from .config import RunConfig, load_config
from .errors import DataError, LocalLifeError, UsageError
from .gateway import Gateway
from .harness import (
    PromptStrategy,
    correlation_analysis,
    evaluate_model,
    load_published_table,
    parse_report_csv,
    rank_runs,
    read_run,
    render_report,
    score_run,
    score_table_from_dict,
    verify_published_table,
    write_run,
)
from .ioutil import read_json, read_jsonl, sha256_file, write_json, write_jsonl
from .manifest import build_manifest, write_manifest
from .platform_data import export_store, load_bundle, load_denylist
from .synthesis import SynthesisBudget, export_training_file, synthesize_dataset
from .workflows import apply_over_store, run_workflow, trace_to_instruction


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        raise UsageError(f"{message}\n\n{self.format_help()}")


def _existing(path_text: str, what: str) -> Path:
    path = Path(path_text)
    if not path.exists():
        raise UsageError(f"{what} not found: {path}")
    return path


def _print_summary(summary: dict[str, Any]) -> None:
    print(json.dumps(summary, ensure_ascii=False, sort_keys=True))


def _load(args) -> RunConfig:
    overrides = {
        "seed": getattr(args, "seed", None),
        "city": getattr(args, "city", None),
        "strict": getattr(args, "strict", None),
        "mode": getattr(args, "mode", None),
        "output_dir": getattr(args, "out_dir", None),
    }
    return load_config(Path(args.config), overrides)


def _gateway(config: RunConfig) -> Gateway:
    config.output_dir.mkdir(parents=True, exist_ok=True)
    return Gateway(log_path=config.output_dir / "call_log.jsonl")


def _bundle(config: RunConfig):
    denylist = load_denylist(config.denylist_path)
    return load_bundle(config.store_paths, denylist, city=config.city)


def _store_input_paths(config: RunConfig) -> dict[str, Path]:
    inputs = dict(config.store_paths)
    if config.denylist_path is not None:
        inputs["denylist"] = config.denylist_path
    return inputs


def _config_manifest(command: str, config: RunConfig, seed, inputs, extra=None) -> dict[str, Any]:
    extra = dict(extra or {})
    extra["config_resolved"] = config.resolved
    return build_manifest(command, config.config_hash, seed, inputs, extra)


# -- commands -----------------------------------------------------------------


def cmd_ingest(args) -> dict[str, Any]:
    config = _load(args)
    bundle, reports = _bundle(config)
    out_dir = config.output_dir / "stores"
    for kind, store in (
        ("merchants", bundle.merchants),
        ("users", bundle.users),
        ("interactions", bundle.interactions),
        ("reviews", bundle.reviews),
        ("calendar", bundle.calendar),
    ):
        path = out_dir / f"{kind}.jsonl"
        export_store(store, path)
        write_manifest(path, _config_manifest("ingest", config, config.seed, {kind: config.store_paths[kind]}))
    report_path = config.output_dir / "ingest_report.json"
    write_json(report_path, {kind: report.as_dict() for kind, report in reports.items()})
    write_manifest(report_path, _config_manifest("ingest", config, config.seed, _store_input_paths(config)))
    return {
        "command": "ingest",
        "stores": {kind: report.accepted for kind, report in reports.items()},
        "rejected": {kind: report.rejected + report.malformed + report.scrubbed
                     for kind, report in reports.items()},
        "report": str(report_path),
        "output_dir": str(out_dir),
    }


def cmd_synthesize(args) -> dict[str, Any]:
    config = _load(args)
    seed = config.require_seed()
    bundle, _ = _bundle(config)
    gateway = _gateway(config)
    endpoint = config.endpoint(args.endpoint)
    budget = SynthesisBudget(
        n_merchants=config.synthesis["n_merchants"],
        n_users=config.synthesis["n_users"],
        n_interactions=config.synthesis["n_interactions"],
        target_pairs=config.synthesis["target_pairs"],
    )
    mode = config.synthesis["mode"]
    pairs, report = synthesize_dataset(mode, bundle, budget, gateway, endpoint, seed)
    out = Path(args.out) if args.out else config.output_dir / f"dataset_{mode}.jsonl"
    manifest_extra = export_training_file(pairs, out, mode=mode, seed=seed)
    report_path = Path(str(out) + ".report.json")
    write_json(report_path, report.as_dict())
    write_manifest(report_path, _config_manifest("synthesize", config, seed, _store_input_paths(config)))
    write_manifest(out, _config_manifest("synthesize", config, seed, _store_input_paths(config),
                     extra={"training": manifest_extra}))
    return {
        "command": "synthesize",
        "mode": mode,
        "pairs_written": manifest_extra["pairs_written"],
        "duplicates_removed": manifest_extra["duplicates_removed"],
        "pairs_by_agent": report.pairs_by_agent,
        "rejections": len(report.rejections),
        "dataset": str(out),
        "report": str(report_path),
    }


def cmd_bench_build(args) -> dict[str, Any]:
    config = _load(args)
    seed = config.require_seed()
    if not config.city:
        raise DataError("bench build requires a city (config `city` or --city)")
    bundle, _ = _bundle(config)
    per_task = args.per_task or config.bench["questions_per_task"]
    questions, shortfalls = build_all_tasks(bundle, config.qc, per_task, seed)
    store_hash = "+".join(
        sha256_file(config.store_paths[k])[:16] for k in sorted(config.store_paths)
    )
    body = assemble_benchmark(questions, config.city, seed, config.qc, store_hash)
    out = Path(args.out) if args.out else config.output_dir / f"benchmark_{config.city}.json"
    write_benchmark(body, out)
    shortfall_path = Path(str(out) + ".shortfalls.json")
    write_json(shortfall_path, shortfalls)
    write_manifest(shortfall_path, _config_manifest("bench build", config, seed, _store_input_paths(config)))
    write_manifest(out, _config_manifest("bench build", config, seed, _store_input_paths(config),
                     extra={"version": body["version"]}))
    mismatches: list[str] = []
    if args.verify_ground_truth:
        mismatches = verify_ground_truth(body["questions"], bundle, config.qc)
        if mismatches:
            raise DataError(
                f"ground-truth verification failed for {len(mismatches)} question(s): "
                + "; ".join(mismatches[:3])
            )
    return {
        "command": "bench build",
        "version": body["version"],
        "city": config.city,
        "counts": body["counts"],
        "shortfall_tasks": sorted(shortfalls),
        "ground_truth_verified": bool(args.verify_ground_truth),
        "benchmark": str(out),
    }


def _strategy_from_args(config: RunConfig, args) -> PromptStrategy:
    kind = args.strategy or config.strategy["kind"]
    k = args.k if args.k is not None else config.strategy["k"]
    role = args.role or config.strategy["role"]
    return PromptStrategy(kind=kind, k=k, role=role)


def cmd_eval_run(args) -> dict[str, Any]:
    config = _load(args)
    seed = config.require_seed()
    endpoint = config.endpoint(args.endpoint)
    benchmark = read_benchmark(_existing(args.benchmark, "benchmark file"))
    strategy = _strategy_from_args(config, args)
    exemplar_pool = None
    pool_path = args.exemplars or config.strategy["exemplar_pool"]
    if strategy.kind == "k_shot":
        if not pool_path:
            raise UsageError("k_shot evaluation needs --exemplars (a benchmark-format file)")
        exemplar_pool = read_benchmark(_existing(pool_path, "exemplar pool"))["questions"]
    gateway = _gateway(config)
    run = evaluate_model(
        benchmark, endpoint, strategy, gateway,
        max_parallel=endpoint.max_parallel, seed=seed, exemplar_pool=exemplar_pool,
    )
    out = (
        Path(args.out)
        if args.out
        else config.output_dir / f"run_{endpoint.endpoint_id}_{strategy.describe()}.json"
    )
    write_run(run, out)
    write_manifest(out, _config_manifest("eval run", config, seed, {"benchmark": Path(args.benchmark)},
                     extra={"endpoint_id": endpoint.endpoint_id, "strategy": strategy.as_dict()}))
    return {
        "command": "eval run",
        "endpoint_id": endpoint.endpoint_id,
        "strategy": strategy.describe(),
        "questions": len(run["answers"]),
        "unparsed": run["unparsed"],
        "transport_failures": run["transport_failures"],
        "degraded": run["degraded"],
        "run": str(out),
    }


def cmd_eval_score(args) -> dict[str, Any]:
    run = read_run(_existing(args.run, "run file"))
    benchmark = read_benchmark(_existing(args.benchmark, "benchmark file"))
    table = score_run(run, benchmark)
    out = Path(args.out) if args.out else Path(args.run).with_suffix(".scores.json")
    write_json(out, table.as_dict())
    write_manifest(out, build_manifest(
        "eval score", None, run.get("seed"),
        {"run": Path(args.run), "benchmark": Path(args.benchmark)},
    ))
    return {
        "command": "eval score",
        "endpoint_id": table.endpoint_id,
        "overall": round(table.overall, 2),
        "per_category": {k: round(v, 2) for k, v in table.per_category.items()},
        "scores": str(out),
    }


def cmd_eval_verify_table(args) -> dict[str, Any]:
    rows = load_published_table(_existing(args.fixture, "fixture") if args.fixture else None)
    result = verify_published_table(rows, tolerance=args.tolerance)
    return {
        "command": "eval verify-table",
        "rows": result["rows"],
        "all_passed": result["all_passed"],
        "worst": result["worst"],
        "tolerance": result["tolerance"],
    }


def cmd_eval_correlate(args) -> dict[str, Any]:
    benchmark = read_benchmark(_existing(args.benchmark, "benchmark file"))
    tables = [score_run(read_run(_existing(p, "run file")), benchmark) for p in args.runs]
    analysis = correlation_analysis(tables)
    out = Path(args.out) if args.out else Path(args.runs[0]).parent / "correlation.json"
    write_json(out, analysis)
    write_manifest(out, build_manifest(
        "eval correlate", None, None,
        {f"run{i}": Path(p) for i, p in enumerate(args.runs)} | {"benchmark": Path(args.benchmark)},
    ))
    return {
        "command": "eval correlate",
        "runs": analysis["runs"],
        "task_stats": analysis["task_stats"],
        "category_stats": analysis["category_stats"],
        "excluded_constant_tasks": analysis["excluded_constant_tasks"],
        "analysis": str(out),
    }


def cmd_workflow_run(args) -> dict[str, Any]:
    config = _load(args)
    seed = config.require_seed()
    endpoint = config.endpoint(args.endpoint)
    benchmark = read_benchmark(_existing(args.benchmark, "benchmark file"))
    bundle, _ = _bundle(config) if config.store_paths else (None, None)
    questions = [q for q in benchmark["questions"] if q["task_id"] == args.workflow]
    if not questions:
        raise DataError(f"benchmark has no {args.workflow!r} questions")
    gateway = _gateway(config)
    traces = []
    correct = 0
    for question in questions:
        prediction, trace = run_workflow(args.workflow, question, gateway, endpoint, bundle)
        traces.append(trace.as_dict())
        if prediction == question["correct_index"]:
            correct += 1
    out = Path(args.out) if args.out else config.output_dir / f"traces_{args.workflow}.jsonl"
    write_jsonl(out, traces)
    write_manifest(out, _config_manifest("workflow run", config, seed, {"benchmark": Path(args.benchmark)},
                     extra={"workflow": args.workflow}))
    return {
        "command": "workflow run",
        "workflow": args.workflow,
        "questions": len(questions),
        "correct": correct,
        "accuracy": round(100.0 * correct / len(questions), 2),
        "traces": str(out),
    }


def cmd_flywheel_export(args) -> dict[str, Any]:
    benchmark = read_benchmark(_existing(args.benchmark, "benchmark file"))
    questions = {q["question_id"]: q for q in benchmark["questions"]}
    traces = read_jsonl(_existing(args.traces, "traces file"))
    pairs = []
    excluded = 0
    skipped_truncated = 0
    for trace in traces:
        if trace.get("error"):
            skipped_truncated += 1
            continue
        question = questions.get(trace["question_id"])
        if question is None:
            raise DataError(f"trace references unknown question {trace['question_id']!r}")
        if trace.get("prediction") is None:
            skipped_truncated += 1
            continue
        pair = trace_to_instruction(trace, question, include_incorrect=args.include_incorrect)
        if pair is None:
            excluded += 1
            continue
        pairs.append(pair)
    if not pairs:
        raise DataError("no usable traces to export")
    out = Path(args.out)
    manifest_extra = export_training_file(pairs, out, mode="flywheel", seed=0)
    write_manifest(out, build_manifest(
        "flywheel export", None, None,
        {"traces": Path(args.traces), "benchmark": Path(args.benchmark)},
        extra={"training": manifest_extra},
    ))
    return {
        "command": "flywheel export",
        "pairs_written": manifest_extra["pairs_written"],
        "excluded_incorrect": excluded,
        "skipped_truncated": skipped_truncated,
        "dataset": str(out),
    }


def cmd_apply(args) -> dict[str, Any]:
    config = _load(args)
    endpoint = config.endpoint(args.endpoint)
    bundle, _ = _bundle(config)
    store = bundle.reviews if args.what == "review-scores" else bundle.merchants
    if args.limit:
        from .platform_data import Store

        store = Store(store.kind, list(store)[: args.limit])
    gateway = _gateway(config)
    results, errors = apply_over_store(args.what, store, gateway, endpoint)
    out = Path(args.out) if args.out else config.output_dir / f"apply_{args.what}.jsonl"
    write_jsonl(out, results)
    errors_path = Path(str(out) + ".errors.json")
    write_json(errors_path, [
        {"item_id": e.item_id, "reason": e.reason, "last_output": e.last_output} for e in errors
    ])
    write_manifest(errors_path, _config_manifest(f"apply {args.what}", config, config.seed, _store_input_paths(config)))
    write_manifest(out, _config_manifest(f"apply {args.what}", config, config.seed, _store_input_paths(config)))
    return {
        "command": f"apply {args.what}",
        "items": len(store),
        "succeeded": len(results),
        "failed": len(errors),
        "output": str(out),
    }


def cmd_report(args) -> dict[str, Any]:
    tables = []
    for path in args.scores:
        if str(path).endswith(".csv"):
            tables.extend(parse_report_csv(Path(path).read_text(encoding="utf-8")))
        else:
            tables.append(score_table_from_dict(read_json(Path(path))))
    document = render_report(rank_runs(tables), args.format)
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
    else:
        sys.stdout.write(document)
    return {
        "command": "report",
        "format": args.format,
        "tables": len(tables),
        "out": str(args.out) if args.out else "stdout",
    }


# -- argument wiring ----------------------------------------------------------


def _add_config_arg(parser) -> None:
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--city", default=None, help="override config city")
    parser.add_argument("--strict", dest="strict", action="store_true", default=None)
    parser.add_argument("--relaxed", dest="strict", action="store_false")
    parser.add_argument("--out-dir", default=None, help="override output directory")


def build_parser() -> _Parser:
    parser = _Parser(prog="locallife", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and canonicalize the raw store files")
    _add_config_arg(p)
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("synthesize", help="generate an instruction-tuning dataset")
    _add_config_arg(p)
    p.add_argument("--endpoint", required=True)
    p.add_argument("--mode", choices=("multi_agent", "template_only", "single_llm"), default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_synthesize)

    bench = sub.add_parser("bench", help="benchmark construction")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    p = bench_sub.add_parser("build", help="build the multiple-choice benchmark")
    _add_config_arg(p)
    p.add_argument("--per-task", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--verify-ground-truth", action="store_true")
    p.set_defaults(handler=cmd_bench_build)

    ev = sub.add_parser("eval", help="model evaluation")
    ev_sub = ev.add_subparsers(dest="eval_command", required=True)

    p = ev_sub.add_parser("run", help="evaluate an endpoint on a benchmark")
    _add_config_arg(p)
    p.add_argument("--endpoint", required=True)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--strategy", choices=("zero_shot", "role_play", "cot", "k_shot"), default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--role", default=None)
    p.add_argument("--exemplars", default=None, help="benchmark-format exemplar pool for k_shot")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_eval_run)

    p = ev_sub.add_parser("score", help="score a completed run")
    p.add_argument("--run", required=True)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_eval_score)

    p = ev_sub.add_parser("verify-table", help="check the published score table's arithmetic")
    p.add_argument("--fixture", default=None, help="CSV path (defaults to the bundled table)")
    p.add_argument("--tolerance", type=float, default=0.5)
    p.set_defaults(handler=cmd_eval_verify_table)

    p = ev_sub.add_parser("correlate", help="cross-run correlation analysis")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_eval_correlate)

    wf = sub.add_parser("workflow", help="composite-task agent workflows")
    wf_sub = wf.add_subparsers(dest="workflow_command", required=True)
    p = wf_sub.add_parser("run", help="run one workflow over its benchmark questions")
    _add_config_arg(p)
    p.add_argument("--workflow", choices=("recommendation", "search", "content_marketing"),
                   required=True)
    p.add_argument("--endpoint", required=True)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_workflow_run)

    fw = sub.add_parser("flywheel", help="convert workflow traces into training data")
    fw_sub = fw.add_subparsers(dest="flywheel_command", required=True)
    p = fw_sub.add_parser("export", help="export traces as a training file")
    p.add_argument("--traces", required=True)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--include-incorrect", action="store_true")
    p.set_defaults(handler=cmd_flywheel_export)

    ap = sub.add_parser("apply", help="batch feature generation")
    ap_sub = ap.add_subparsers(dest="apply_command", required=True)
    for what in ("tags", "queries", "review-scores"):
        p = ap_sub.add_parser(what)
        _add_config_arg(p)
        p.add_argument("--endpoint", required=True)
        p.add_argument("--limit", type=int, default=0)
        p.add_argument("--out", default=None)
        p.set_defaults(handler=cmd_apply, what=what)

    p = sub.add_parser("report", help="render score tables as markdown or csv")
    p.add_argument("--scores", nargs="+", required=True)
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        summary = args.handler(args)
    except LocalLifeError as exc:
        print(json.dumps({"error": str(exc), "exit_code": exc.exit_code}), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": f"i/o failure: {exc}", "exit_code": DataError.exit_code}),
              file=sys.stderr)
        return DataError.exit_code
    _print_summary(summary)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
