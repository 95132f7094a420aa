"""End-to-end run orchestration with content-addressed stage caching.

A run executes corpus synthesis, zoo evaluation (BPC + benchmark
scores), point assembly, and fitting, in dependency order.  Each stage
writes into a directory keyed by the hash of everything that determines
its output (tool version, stage parameters, upstream stage keys), so
re-running an unchanged configuration skips every stage and leaves
byte-identical artifacts.  Stages communicate only via files.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
from pathlib import Path
from typing import Callable

from . import __version__ as TOOL_VERSION
from .analysis import ObservationPoint, compare_models, emit_plot_data, load_points, save_points
from .bpc import WindowConfig, sliding_window_bpc
from .corpus import load_manifest, save_manifest, summarize_manifest
from .errors import ConfigError, InputError
from .zoo import ZooSpec, benchmark_results_for, build_zoo, generate_corpus
from .scoring import composite_score

DEFAULT_CONFIG = {
    "scenario": "zoo",
    "seed": 7,
    "corpus": {
        "train_documents": 24,
        "validation_documents": 8,
        "bench_documents": 6,
        "functions_per_doc": 12,
    },
    "window": {"window_size": 16, "stride": 4},
    "zoo": {"orders": [1, 2, 3, 4], "alphas": [1.0, 0.05], "token_mode": "char"},
}


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_hash(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def resolve_config(raw: dict) -> dict:
    """Fill defaults so the snapshot records every effective setting."""
    resolved = json.loads(json.dumps(DEFAULT_CONFIG))
    for key, value in raw.items():
        if isinstance(value, dict) and isinstance(resolved.get(key), dict):
            resolved[key].update(value)
        else:
            resolved[key] = value
    if resolved["scenario"] != "zoo":
        raise ConfigError(f"unknown scenario {resolved['scenario']!r}; only 'zoo' is supported")
    window = resolved["window"]
    WindowConfig(int(window["window_size"]), window.get("stride"))  # validates early
    return resolved


def _provenance(cfg_hash: str) -> dict:
    return {"tool_version": TOOL_VERSION, "config_hash": cfg_hash}


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


class StageRunner:
    def __init__(self, out_dir: Path, cfg_hash: str):
        self.stage_root = out_dir / "stages"
        self.cfg_hash = cfg_hash
        self.executed: dict[str, dict] = {}

    def run(self, name: str, key_payload: dict, build: Callable[[Path], None]) -> Path:
        key = config_hash({"stage": name, "tool": TOOL_VERSION, "inputs": key_payload})
        stage_dir = self.stage_root / f"{name}-{key[:12]}"
        marker = stage_dir / ".complete"
        skipped = marker.exists()
        if not skipped:
            # partial outputs from an interrupted run are discarded
            if stage_dir.exists():
                shutil.rmtree(stage_dir)
            tmp_dir = stage_dir.with_name(stage_dir.name + ".tmp")
            if tmp_dir.exists():
                shutil.rmtree(tmp_dir)
            tmp_dir.mkdir(parents=True)
            build(tmp_dir)
            tmp_dir.rename(stage_dir)
            marker.write_text(key + "\n", encoding="utf-8")
        self.executed[name] = {"dir": str(stage_dir), "key": key, "skipped": skipped}
        return stage_dir


def run_end_to_end(raw_config: dict, out_dir: str | Path) -> dict:
    """Execute the configured run; returns the stage index with skip flags."""
    cfg = resolve_config(raw_config)
    cfg_hash = config_hash(cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "config.resolved.json", {"config": cfg, **_provenance(cfg_hash)})

    runner = StageRunner(out_dir, cfg_hash)
    seed = int(cfg["seed"])
    corpus_cfg = cfg["corpus"]
    window_cfg = cfg["window"]
    zoo_cfg = cfg["zoo"]

    # --- stage: corpus ----------------------------------------------------
    def build_corpus_stage(stage_dir: Path) -> None:
        train = generate_corpus(
            seed,
            documents=int(corpus_cfg["train_documents"]),
            functions_per_doc=int(corpus_cfg["functions_per_doc"]),
            prefix="train",
        )
        validation = generate_corpus(
            seed + 1,
            documents=int(corpus_cfg["validation_documents"]),
            functions_per_doc=int(corpus_cfg["functions_per_doc"]),
            prefix="val",
        )
        bench_code = generate_corpus(
            seed + 2,
            documents=int(corpus_cfg["bench_documents"]),
            functions_per_doc=int(corpus_cfg["functions_per_doc"]),
            prefix="bench",
        )
        bench_text = generate_corpus(
            seed + 3,
            documents=int(corpus_cfg["bench_documents"]),
            functions_per_doc=int(corpus_cfg["functions_per_doc"]),
            prefix="benchtext",
            style="comments",
        )
        for name, manifest in [
            ("train", train),
            ("validation", validation),
            ("bench_code", bench_code),
            ("bench_text", bench_text),
        ]:
            save_manifest(manifest, stage_dir / f"{name}.jsonl")
            _write_json(
                stage_dir / f"{name}.summary.json",
                {**summarize_manifest(manifest), **_provenance(cfg_hash)},
            )

    corpus_dir = runner.run("corpus", {"seed": seed, "corpus": corpus_cfg}, build_corpus_stage)

    # --- stage: evaluate (train zoo, BPC + benchmark scores) ---------------
    def build_evaluate_stage(stage_dir: Path) -> None:
        train = load_manifest(corpus_dir / "train.jsonl")
        validation = load_manifest(corpus_dir / "validation.jsonl")
        bench_code = load_manifest(corpus_dir / "bench_code.jsonl")
        bench_text = load_manifest(corpus_dir / "bench_text.jsonl")
        spec = ZooSpec(
            orders=tuple(int(k) for k in zoo_cfg["orders"]),
            alphas=tuple(float(a) for a in zoo_cfg["alphas"]),
            token_mode=zoo_cfg["token_mode"],
        )
        window = WindowConfig(int(window_cfg["window_size"]), window_cfg.get("stride"))
        rows = []
        for model in build_zoo(train, spec):
            report = sliding_window_bpc(model, validation, window)
            results = benchmark_results_for(
                model, bench_code, bench_text, spec.token_mode, seed
            )
            comp = composite_score(results)
            rows.append(
                {
                    "model": model.name,
                    "order": model.order,
                    "alpha": model.alpha,
                    "bpc_report": report.to_dict(),
                    "benchmarks": [
                        {
                            "task": r.task,
                            "benchmark": r.benchmark,
                            "instance_count": r.instance_count,
                            "score": r.score,
                        }
                        for r in results
                    ],
                    "composite": comp.to_dict(),
                }
            )
        _write_json(stage_dir / "evaluations.json", {"models": rows, **_provenance(cfg_hash)})

    evaluate_dir = runner.run(
        "evaluate",
        {
            "corpus_key": runner.executed["corpus"]["key"],
            "window": window_cfg,
            "zoo": zoo_cfg,
            "seed": seed,
        },
        build_evaluate_stage,
    )

    # --- stage: points ------------------------------------------------------
    def build_points_stage(stage_dir: Path) -> None:
        with (evaluate_dir / "evaluations.json").open(encoding="utf-8") as fh:
            rows = json.load(fh)["models"]
        points = [
            ObservationPoint(
                model_name=row["model"],
                bpc=row["bpc_report"]["bpc"],
                score=row["composite"]["composite"],
            )
            for row in rows
        ]
        save_points(points, stage_dir / "points.jsonl")

    points_dir = runner.run(
        "points", {"evaluate_key": runner.executed["evaluate"]["key"]}, build_points_stage
    )

    # --- stage: fit ---------------------------------------------------------
    def build_fit_stage(stage_dir: Path) -> None:
        points = load_points(points_dir / "points.jsonl")
        if len(points) < 3:
            raise InputError(f"need at least 3 zoo points to fit, got {len(points)}")
        comparison = compare_models(points)
        _write_json(
            stage_dir / "fit_report.json",
            {**comparison.to_dict(), **_provenance(cfg_hash)},
        )
        emit_plot_data(comparison.reports, points, stage_dir)

    fit_dir = runner.run(
        "fit", {"points_key": runner.executed["points"]["key"]}, build_fit_stage
    )

    index = {
        "config_hash": cfg_hash,
        "tool_version": TOOL_VERSION,
        "stages": runner.executed,
        "artifacts": {
            "points": str(points_dir / "points.jsonl"),
            "fit_report": str(fit_dir / "fit_report.json"),
            "figure": str(fit_dir / "fit.svg"),
            "csv": str(fit_dir / "points.csv"),
        },
    }
    _write_json(out_dir / "run.json", index)
    return index


def env_out_dir(default: str | Path) -> Path:
    return Path(os.environ.get("CODEBPC_OUT_DIR", str(default)))


def env_workers(default: int = 1) -> int:
    raw = os.environ.get("CODEBPC_WORKERS")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"CODEBPC_WORKERS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"CODEBPC_WORKERS must be >= 1, got {value}")
    return value
