"""Walk through the validation-corpus pipeline on a tiny synthetic tree.

Shows each attrition stage: boilerplate stripping, the minimum-token
filter, the creation-date window, near-duplicate removal, and the
language-balanced sampler.
"""

import json
import tempfile
from datetime import date
from pathlib import Path

from codebpc import (
    build_corpus,
    distribution_report,
    make_document,
    weighted_sample,
)
from codebpc.corpus import load_documents

HEADER = "# Copyright 2024 Example Corp\n# Licensed under the MIT License\n\n"
PY_BODY = "def count_widgets(items):\n    return len(items)\n" + "x = 0\n" * 80
SQL_BODY = "SELECT id, name FROM widgets WHERE price > 10;\n" * 30

files = {
    "repo_a/widgets.py": HEADER + PY_BODY,
    "repo_a/widgets_copy.py": HEADER + PY_BODY,  # an exact duplicate
    "repo_a/tiny.py": "x = 1\n",  # will fail the token cutoff
    "repo_b/report.sql": SQL_BODY,
}
meta = [
    {"path": "repo_a/widgets.py", "repo_id": "repo_a", "created_at": "2024-06-15"},
    {"path": "repo_a/widgets_copy.py", "repo_id": "repo_a", "created_at": "2024-08-02"},
    {"path": "repo_a/tiny.py", "repo_id": "repo_a", "created_at": "2024-06-20"},
    {"path": "repo_b/report.sql", "repo_id": "repo_b", "created_at": "2023-12-01"},  # too old
]

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    for rel, content in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content)

    by_path = {m["path"]: m for m in meta}
    docs, skips, diagnostics = load_documents(root, meta=by_path)
    print(f"ingested {len(docs)} documents, skipped: {skips}")

    manifest, attrition = build_corpus(
        docs,
        min_tokens=64,
        window=(date(2024, 5, 1), date(2024, 11, 30)),
        dedup={"bands": 16, "rows": 8, "threshold": 0.85, "shingle_width": 12},
        seed=0,
    )
    print("attrition by stage:")
    print(json.dumps(attrition, indent=2))
    print("survivors:", [d.doc_id for d in manifest])
    print("note: the license header is gone ->", repr(manifest.documents[0].content[:40]))

# language rebalancing on a skewed pool: 90% python tokens, 10% sql
pool = []
for i in range(30):
    pool.append(make_document(f"py{i:03d}", "x = 1\n" * 100, language="python"))
for i in range(10):
    pool.append(make_document(f"sq{i:03d}", "SELECT 1;\n" * 25, language="sql"))
from codebpc import manifest_from_documents  # noqa: E402

pool_manifest = manifest_from_documents(pool)
print("\npool distribution:", distribution_report(pool_manifest))
balanced = weighted_sample(pool_manifest, {"python": 0.5, "sql": 0.5}, 1200, seed=1)
print("after 50/50 sampling:", distribution_report(balanced))
