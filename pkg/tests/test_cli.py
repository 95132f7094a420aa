import json
from pathlib import Path

import pytest

from codebpc.cli import main
from codebpc.corpus import load_manifest

HEADER = "# Copyright 2024 Someone\n# Licensed under MIT License\n"


def write_source_tree(root: Path):
    files = {
        "repo1/alpha.py": HEADER + "def alpha(x):\n    return x + 1\n" + "x = 0\n" * 70,
        "repo1/beta.py": "def beta(y):\n    return y * 2\n" + "y = 1\n" * 70,
        "repo1/beta_copy.py": "def beta(y):\n    return y * 2\n" + "y = 1\n" * 70,
        "repo2/gamma.sql": "SELECT a, b FROM t WHERE a > 1;\n" * 40,
        "repo2/tiny.py": "x = 1\n",  # below the min-token cutoff
        "repo2/notes.txt": "not code\n",  # unknown extension
    }
    for rel, content in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content)
    meta_lines = [
        {"path": "repo1/alpha.py", "repo_id": "repo1", "created_at": "2024-06-15"},
        {"path": "repo1/beta.py", "repo_id": "repo1", "created_at": "2024-07-01"},
        {"path": "repo1/beta_copy.py", "repo_id": "repo1", "created_at": "2024-08-01"},
        {"path": "repo2/gamma.sql", "repo_id": "repo2", "created_at": "2024-09-20"},
        {"path": "repo2/tiny.py", "repo_id": "repo2", "created_at": "2024-06-02"},
    ]
    meta = root / "meta.jsonl"
    meta.write_text("".join(json.dumps(m) + "\n" for m in meta_lines))
    return meta


def build_manifest(tmp_path, capsys) -> Path:
    src = tmp_path / "src"
    src.mkdir()
    meta = write_source_tree(src)
    out = tmp_path / "corpus.jsonl"
    code = main(
        [
            "corpus", "build",
            "--input", str(src),
            "--meta", str(meta),
            "--min-tokens", "64",
            "--since", "2024-05",
            "--until", "2024-11",
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    capsys.readouterr()
    return out


def test_corpus_build_and_stats(tmp_path, capsys):
    out = build_manifest(tmp_path, capsys)
    manifest = load_manifest(out)
    ids = [d.doc_id for d in manifest]
    assert "repo1/alpha.py" in ids
    assert "repo1/beta.py" in ids
    assert "repo1/beta_copy.py" not in ids  # exact duplicate removed
    assert "repo2/tiny.py" not in ids  # too short
    assert "repo2/notes.txt" not in ids  # unknown extension
    alpha = next(d for d in manifest if d.doc_id == "repo1/alpha.py")
    assert "Copyright" not in alpha.content  # header stripped

    summary = json.loads(out.with_suffix(".summary.json").read_text())
    assert summary["attrition"]["near_duplicates"] == 1
    assert summary["tool_version"]
    assert summary["config_hash"]

    assert main(["corpus", "stats", str(out)]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["documents"] == len(manifest)


def test_trace_gen_and_bpc_compute(tmp_path, capsys):
    manifest_path = build_manifest(tmp_path, capsys)
    trace_path = tmp_path / "trace.jsonl"
    model_path = tmp_path / "model.json"
    assert (
        main(
            [
                "trace", "gen",
                "--model", "ngram",
                "--order", "2",
                "--alpha", "0.5",
                "--corpus", str(manifest_path),
                "--out", str(trace_path),
                "--save-model", str(model_path),
            ]
        )
        == 0
    )
    assert trace_path.exists() and model_path.exists()

    report_a = tmp_path / "from_trace.json"
    assert (
        main(
            [
                "bpc", "compute",
                "--trace", str(trace_path),
                "--corpus", str(manifest_path),
                "--mode", "full",
                "--out", str(report_a),
            ]
        )
        == 0
    )
    report_b = tmp_path / "from_model.json"
    assert (
        main(
            [
                "bpc", "compute",
                "--model", f"ngram:{model_path}",
                "--corpus", str(manifest_path),
                "--mode", "full",
                "--out", str(report_b),
            ]
        )
        == 0
    )
    a = json.loads(report_a.read_text())
    b = json.loads(report_b.read_text())
    assert a["bpc"] == b["bpc"]  # trace replay reproduces the model exactly
    assert abs(a["bpc"] - a["bits_per_token"] * a["tokens_per_char"]) <= 1e-12 * a["bpc"]

    report_c = tmp_path / "sliding.json"
    assert (
        main(
            [
                "bpc", "compute",
                "--model", f"ngram:{model_path}",
                "--corpus", str(manifest_path),
                "--mode", "sliding",
                "--window", "16",
                "--stride", "4",
                "--out", str(report_c),
            ]
        )
        == 0
    )
    c = json.loads(report_c.read_text())
    assert c["bpc"] == a["bpc"]  # order-2 keeps all needed context at stride 4


def test_bpc_compute_rejects_bad_stride(tmp_path, capsys):
    manifest_path = build_manifest(tmp_path, capsys)
    code = main(
        [
            "bpc", "compute",
            "--model", "ngram:/nonexistent.json",
            "--corpus", str(manifest_path),
            "--mode", "sliding",
            "--window", "4",
            "--stride", "9",
            "--out", str(tmp_path / "r.json"),
        ]
    )
    assert code == 3  # missing model file surfaces as input error first


def test_exit_codes_by_failure_class(tmp_path, capsys):
    # config error: malformed --model spec
    assert (
        main(
            [
                "bpc", "compute",
                "--model", "bogus",
                "--corpus", str(tmp_path / "nope.jsonl"),
                "--out", str(tmp_path / "r.json"),
            ]
        )
        == 3  # manifest missing reported before model parsing
    )
    (tmp_path / "m.jsonl").write_text("")
    assert (
        main(
            [
                "bpc", "compute",
                "--model", "bogus",
                "--corpus", str(tmp_path / "m.jsonl"),
                "--out", str(tmp_path / "r.json"),
            ]
        )
        == 2  # config error: --model must look like ngram:PATH
    )
    assert main(["corpus", "stats", str(tmp_path / "missing.jsonl")]) == 3


def test_score_aggregate_and_extract(tmp_path, capsys):
    results = tmp_path / "results.jsonl"
    rows = [
        {"task": "generation", "benchmark": "a1", "instance_count": 100, "score": 0.8},
        {"task": "generation", "benchmark": "a2", "instance_count": 300, "score": 0.4},
        {"task": "repair", "benchmark": "b1", "instance_count": 50, "score": 0.6},
    ]
    results.write_text("".join(json.dumps(r) + "\n" for r in rows))
    report = tmp_path / "score.json"
    assert main(["score", "aggregate", str(results), "--out", str(report)]) == 0
    payload = json.loads(report.read_text())
    assert abs(payload["composite"] - 0.55) < 1e-12

    responses = tmp_path / "responses.jsonl"
    lines = [
        {"benchmark": "mbpp", "response": "```python\ndef f():\n    return 1\n```"},
        {"benchmark": "mbpp", "response": "I cannot write code."},
        {"benchmark": "mbpp", "response": "```python\ndef g():\n    pass\n```"},
    ]
    responses.write_text("".join(json.dumps(r) + "\n" for r in lines))
    records_out = tmp_path / "records.jsonl"
    assert (
        main(
            ["score", "extract", str(responses), "--lang-hint", "python", "--out", str(records_out)]
        )
        == 0
    )
    records = [json.loads(l) for l in records_out.read_text().splitlines()]
    assert [r["empty_flag"] for r in records] == [False, True, True]
    summary = json.loads(records_out.with_suffix(".summary.json").read_text())
    assert summary["empty"] == 2
    assert not summary["stop"]


def test_fit_command(tmp_path, capsys):
    import math

    points = tmp_path / "points.jsonl"
    rows = [
        {"model": f"m{i}", "bpc": x, "score": math.exp(-1.1 * x + 0.2), "slices": {}}
        for i, x in enumerate([0.4, 0.9, 1.5, 2.2, 3.0])
    ]
    points.write_text("".join(json.dumps(r) + "\n" for r in rows))
    out_dir = tmp_path / "fit"
    assert main(["fit", "--points", str(points), "--model", "both", "--out", str(out_dir)]) == 0
    payload = json.loads((out_dir / "fit_report.json").read_text())
    assert payload["winner"] == "log-linear"
    assert (out_dir / "fit.svg").exists()
    assert (out_dir / "points.csv").exists()


def test_fit_rejects_thin_slices(tmp_path, capsys):
    points = tmp_path / "points.jsonl"
    points.write_text(
        json.dumps({"model": "m", "bpc": 1.0, "score": 0.5, "slices": {}}) + "\n"
    )
    code = main(["fit", "--points", str(points), "--out", str(tmp_path / "o")])
    assert code == 3
