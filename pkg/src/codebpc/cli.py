"""Command-line entry point.

Subcommands: ``corpus build|stats``, ``trace gen``, ``bpc compute``,
``score aggregate|extract``, ``fit``, ``run``.  Exit codes distinguish
failure classes: 2 config, 3 input, 4 compute, 5 output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__ as TOOL_VERSION
from .analysis import (
    LINEAR,
    LOG_LINEAR,
    compare_models,
    emit_plot_data,
    fit_linear_model,
    fit_log_model,
    load_points,
    slice_points,
)
from .bpc import WindowConfig, full_context_bpc, sliding_window_bpc, truncated_bpc
from .corpus import (
    build_corpus,
    load_documents,
    load_manifest,
    load_sidecar_metadata,
    parse_date_bound,
    save_manifest,
    summarize_manifest,
)
from .errors import CodeBpcError, ConfigError, InputError
from .ngram import load_model, ngram_train, save_model, trace_from_model
from .pipeline import (
    _provenance,
    config_hash,
    env_out_dir,
    env_workers,
    run_end_to_end,
)
from .scoring import BenchmarkResult, composite_score, empty_ratio, make_response_record, stop_predicate
from .trace import load_trace, write_trace


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _args_hash(args: argparse.Namespace) -> str:
    safe = {k: str(v) for k, v in vars(args).items() if k != "func"}
    return config_hash(safe)


# ---------------------------------------------------------------------------
# corpus


def cmd_corpus_build(args) -> int:
    meta = load_sidecar_metadata(args.meta) if args.meta else None
    docs, skips, diagnostics = load_documents(args.input, meta)
    window = None
    if args.since or args.until:
        if not (args.since and args.until):
            raise ConfigError("--since and --until must be given together")
        window = (parse_date_bound(args.since), parse_date_bound(args.until, end=True))
    dedup = None
    if args.dedup_threshold is not None:
        dedup = {
            "bands": args.bands,
            "rows": args.rows,
            "threshold": args.dedup_threshold,
            "shingle_width": args.shingle_width,
            "workers": env_workers(),
        }
    manifest, attrition = build_corpus(
        docs,
        min_tokens=args.min_tokens,
        window=window,
        dedup=dedup,
        seed=args.seed,
    )
    for key, value in skips.items():
        attrition[f"skipped_{key}"] = value
    save_manifest(manifest, args.out)
    summary = summarize_manifest(manifest, attrition)
    summary["diagnostics"] = diagnostics
    summary.update(_provenance(_args_hash(args)))
    _write_json(Path(args.out).with_suffix(".summary.json"), summary)
    print(f"wrote {len(manifest)} documents to {args.out}")
    return 0


def cmd_corpus_stats(args) -> int:
    manifest = load_manifest(args.manifest)
    print(json.dumps(summarize_manifest(manifest), indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# trace


def cmd_trace_gen(args) -> int:
    if args.model != "ngram":
        raise ConfigError(f"unknown model kind {args.model!r}; only 'ngram' is supported")
    eval_manifest = load_manifest(args.corpus)
    train_manifest = load_manifest(args.train_corpus) if args.train_corpus else eval_manifest
    model = ngram_train(train_manifest, args.order, args.alpha, args.token_mode)
    if args.save_model:
        save_model(model, args.save_model)
    trace = trace_from_model(model, eval_manifest, context_limit=args.context_limit)
    write_trace(trace, args.out)
    print(f"wrote {len(trace.events)} events to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# bpc


def cmd_bpc_compute(args) -> int:
    manifest = load_manifest(args.corpus)
    if args.trace:
        expected = {d.doc_id: d.char_count for d in manifest}
        source = load_trace(args.trace, expected_char_counts=expected)
    else:
        kind, _, path = args.model.partition(":")
        if kind != "ngram" or not path:
            raise ConfigError(f"--model must look like ngram:PATH, got {args.model!r}")
        source = load_model(path)

    if args.mode == "sliding":
        if args.window is None:
            raise ConfigError("--window is required for sliding mode")
        cfg = WindowConfig(args.window, args.stride)
        report = sliding_window_bpc(source, manifest, cfg)
    elif args.mode == "full":
        report = full_context_bpc(source, manifest)
    else:
        if args.window is None:
            raise ConfigError("--window is required for truncated mode")
        report = truncated_bpc(source, manifest, args.window)

    payload = report.to_dict()
    payload.update(_provenance(_args_hash(args)))
    _write_json(Path(args.out), payload)
    print(f"bpc={report.bpc:.6f} bits/char over {report.char_count} chars")
    return 0


# ---------------------------------------------------------------------------
# score


def cmd_score_aggregate(args) -> int:
    results = []
    path = Path(args.results)
    if not path.exists():
        raise InputError(f"results file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                results.append(
                    BenchmarkResult(
                        task=rec["task"],
                        benchmark=rec["benchmark"],
                        instance_count=int(rec["instance_count"]),
                        score=float(rec["score"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: bad result record: {exc}") from exc
    score = composite_score(results)
    payload = score.to_dict()
    payload.update(_provenance(_args_hash(args)))
    _write_json(Path(args.out), payload)
    print(f"composite={score.value:.6f} log={score.log_value:.6f}")
    return 0


def cmd_score_extract(args) -> int:
    path = Path(args.responses)
    if not path.exists():
        raise InputError(f"responses file not found: {path}")
    records = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                records.append(
                    make_response_record(rec["benchmark"], rec["response"], args.lang_hint)
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise InputError(f"{path}:{lineno}: bad response record: {exc}") from exc
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "benchmark": r.benchmark,
                        "response": r.response,
                        "extracted_code": r.extracted_code,
                        "empty_flag": r.empty_flag,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
    ratio = empty_ratio(records)
    summary = {
        "records": len(records),
        "empty": sum(1 for r in records if r.empty_flag),
        "empty_ratio": ratio,
        "stop": stop_predicate(ratio),
        **_provenance(_args_hash(args)),
    }
    _write_json(out.with_suffix(".summary.json"), summary)
    print(f"empty_ratio={ratio:.4f} stop={summary['stop']}")
    return 0


# ---------------------------------------------------------------------------
# fit


def cmd_fit(args) -> int:
    points = load_points(args.points)
    if args.slice:
        points = slice_points(points, args.slice)
    if len(points) < 3:
        raise InputError(f"need at least 3 points to fit, got {len(points)}")
    if args.model == "both":
        comparison = compare_models(points)
        reports = comparison.reports
        payload = comparison.to_dict()
    elif args.model == "log":
        reports = (fit_log_model(points),)
        payload = reports[0].to_dict()
    else:
        reports = (fit_linear_model(points),)
        payload = reports[0].to_dict()
    payload.update(_provenance(_args_hash(args)))
    out_dir = Path(args.out)
    _write_json(out_dir / "fit_report.json", payload)
    emit_plot_data(reports, points, out_dir)
    best = reports[0]
    print(
        f"{best.model_form}: slope={best.slope:.4f} r={best.pearson_r:.4f} "
        f"rmse={best.rmse_backtransformed:.4f}"
    )
    return 0


# ---------------------------------------------------------------------------
# run


def cmd_run(args) -> int:
    cfg_path = Path(args.config)
    if not cfg_path.exists():
        raise InputError(f"config file not found: {cfg_path}")
    with cfg_path.open(encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{cfg_path}: bad JSON config: {exc}") from exc
    if isinstance(raw, dict) and "config" in raw and "config_hash" in raw:
        raw = raw["config"]  # accept a resolved snapshot as input
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.window is not None:
        raw.setdefault("window", {})["window_size"] = args.window
    if args.stride is not None:
        raw.setdefault("window", {})["stride"] = args.stride
    out_dir = env_out_dir(args.out if args.out else raw.get("out_dir", "runs/latest"))
    index = run_end_to_end(raw, out_dir)
    skipped = sum(1 for s in index["stages"].values() if s["skipped"])
    print(
        f"run complete: {len(index['stages'])} stages ({skipped} cached), "
        f"figure at {index['artifacts']['figure']}"
    )
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codebpc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"codebpc {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("corpus", help="build or inspect validation corpora")
    corpus_sub = corpus.add_subparsers(dest="subcommand", required=True)
    build = corpus_sub.add_parser("build", help="run the corpus pipeline")
    build.add_argument("--input", required=True, help="directory tree or archive of source files")
    build.add_argument("--meta", help="JSON Lines sidecar metadata (path, repo_id, language, created_at)")
    build.add_argument("--min-tokens", type=int, default=128)
    build.add_argument("--since", help="inclusive start date (YYYY-MM-DD or YYYY-MM)")
    build.add_argument("--until", help="inclusive end date (YYYY-MM-DD or YYYY-MM)")
    build.add_argument("--dedup-threshold", type=float, default=0.85)
    build.add_argument("--bands", type=int, default=16)
    build.add_argument("--rows", type=int, default=8)
    build.add_argument("--shingle-width", type=int, default=12)
    build.add_argument("--seed", type=int, default=0)
    build.add_argument("--out", required=True, help="manifest JSONL output path")
    build.set_defaults(func=cmd_corpus_build)
    stats = corpus_sub.add_parser("stats", help="print manifest statistics")
    stats.add_argument("manifest")
    stats.set_defaults(func=cmd_corpus_stats)

    trace = sub.add_parser("trace", help="generate log-probability traces")
    trace_sub = trace.add_subparsers(dest="subcommand", required=True)
    gen = trace_sub.add_parser("gen", help="score a corpus with a trained model")
    gen.add_argument("--model", default="ngram")
    gen.add_argument("--order", type=int, required=True)
    gen.add_argument("--alpha", type=float, required=True)
    gen.add_argument("--corpus", required=True, help="manifest to score")
    gen.add_argument("--train-corpus", help="manifest to train on (defaults to --corpus)")
    gen.add_argument("--token-mode", choices=["char", "split"], default="char")
    gen.add_argument("--context-limit", type=int)
    gen.add_argument("--save-model", help="also write the trained model JSON here")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_trace_gen)

    bpc = sub.add_parser("bpc", help="compute bits-per-character reports")
    bpc_sub = bpc.add_subparsers(dest="subcommand", required=True)
    compute = bpc_sub.add_parser("compute")
    source = compute.add_mutually_exclusive_group(required=True)
    source.add_argument("--trace", help="trace file to replay")
    source.add_argument("--model", help="ngram:PATH of a trained model")
    compute.add_argument("--corpus", required=True)
    compute.add_argument("--window", type=int)
    compute.add_argument("--stride", type=int)
    compute.add_argument("--mode", choices=["sliding", "full", "truncated"], default="sliding")
    compute.add_argument("--out", required=True)
    compute.set_defaults(func=cmd_bpc_compute)

    score = sub.add_parser("score", help="aggregate benchmarks or extract code")
    score_sub = score.add_subparsers(dest="subcommand", required=True)
    aggregate = score_sub.add_parser("aggregate")
    aggregate.add_argument("results", help="JSON Lines of {task, benchmark, instance_count, score}")
    aggregate.add_argument("--out", required=True)
    aggregate.set_defaults(func=cmd_score_aggregate)
    extract = score_sub.add_parser("extract")
    extract.add_argument("responses", help="JSON Lines of {benchmark, response}")
    extract.add_argument("--lang-hint")
    extract.add_argument("--out", required=True)
    extract.set_defaults(func=cmd_score_extract)

    fit = sub.add_parser("fit", help="fit relationship hypotheses to points")
    fit.add_argument("--points", required=True)
    fit.add_argument("--model", choices=["log", "linear", "both"], default="both")
    fit.add_argument("--slice", help="restrict to a slice, e.g. task=generation")
    fit.add_argument("--out", required=True, help="output directory")
    fit.set_defaults(func=cmd_fit)

    run = sub.add_parser("run", help="end-to-end pipeline from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (env CODEBPC_OUT_DIR overrides)")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--window", type=int, help="override the window size")
    run.add_argument("--stride", type=int, help="override the stride")
    run.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CodeBpcError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
