"""Synthetic compressor zoo: a desk-scale stand-in for a fleet of LLMs.

Generates a seeded code-like corpus with strong local structure, trains
a ladder of bounded-context compressors on it, measures each one's
sliding-window BPC on held-out text, and scores each on a toy
next-token completion benchmark (mean probability assigned to the
reference continuation).  The resulting (bpc, composite score) cloud is
what the fitting module consumes.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .bpc import WindowConfig, sliding_window_bpc
from .corpus import CorpusManifest, make_document, manifest_from_documents
from .ngram import NGramModel, ngram_train
from .scoring import BenchmarkResult, composite_score

_NAMES = ["total", "value", "items", "count", "index", "result", "buffer", "node"]
_FUNCS = ["update", "compute", "filter", "merge", "scan", "reduce"]
_OPS = ["+", "-", "*"]
_COMPARES = ["<", ">", "=="]


def _gen_statement(rng: random.Random) -> str:
    kind = rng.randrange(6)
    a, b = rng.choice(_NAMES), rng.choice(_NAMES)
    f = rng.choice(_FUNCS)
    n = rng.randrange(1, 100)
    if kind == 0:
        return f"    {a} = {b} {rng.choice(_OPS)} {n}\n"
    if kind == 1:
        return f"    {a} = {f}({b})\n"
    if kind == 2:
        return f"    if {a} {rng.choice(_COMPARES)} {n}:\n        {b} = {f}({a})\n"
    if kind == 3:
        return f"    for i in range({n}):\n        {a} = {a} {rng.choice(_OPS)} i\n"
    if kind == 4:
        return f"    # {f} the {a} before use\n"
    return f"    return {a} {rng.choice(_OPS)} {b}\n"


def _gen_function(rng: random.Random) -> str:
    name = f"{rng.choice(_FUNCS)}_{rng.choice(_NAMES)}"
    arg = rng.choice(_NAMES)
    body = "".join(_gen_statement(rng) for _ in range(rng.randrange(3, 7)))
    return f"def {name}({arg}):\n{body}\n"


def _gen_comment_doc(rng: random.Random) -> str:
    words = _NAMES + _FUNCS + ["the", "a", "each", "every", "first", "next", "then"]
    lines = []
    for _ in range(rng.randrange(8, 16)):
        lines.append("# " + " ".join(rng.choice(words) for _ in range(rng.randrange(4, 9))))
    return "\n".join(lines) + "\n"


def generate_corpus(
    seed: int,
    documents: int = 24,
    functions_per_doc: int = 12,
    language: str = "python",
    prefix: str = "doc",
    style: str = "code",
) -> CorpusManifest:
    """Seeded code-like (or comment-prose) corpus with repeated identifiers."""
    rng = random.Random(seed)
    docs = []
    for d in range(documents):
        if style == "comments":
            body = "".join(_gen_comment_doc(rng) for _ in range(max(1, functions_per_doc // 4)))
        else:
            body = "".join(_gen_function(rng) for _ in range(functions_per_doc))
            if d % 4 == 3:
                body = _gen_comment_doc(rng) + body
        docs.append(
            make_document(f"{prefix}-{d:04d}", body, repo_id="synthetic", language=language)
        )
    return manifest_from_documents(docs, {"generator": "zoo", "seed": seed, "style": style})


@dataclass(frozen=True)
class ZooSpec:
    orders: tuple[int, ...] = (1, 2, 3, 4)
    alphas: tuple[float, ...] = (1.0, 0.05)
    token_mode: str = "char"


def build_zoo(train: CorpusManifest, spec: ZooSpec = ZooSpec()) -> list[NGramModel]:
    """Train the ladder of compressors (orders x smoothing levels)."""
    models = []
    for order in spec.orders:
        for alpha in spec.alphas:
            models.append(ngram_train(train, order, alpha, spec.token_mode))
    return models


def completion_queries(
    bench: CorpusManifest, token_mode: str, queries_per_doc: int, seed: int
) -> list[tuple[list[str], int]]:
    """Deterministic (tokens, position) query set over the benchmark docs."""
    from .tokenize import tokenize

    rng = random.Random(seed)
    queries = []
    for doc in bench:
        tokens = tokenize(doc.content, token_mode)
        if len(tokens) < 8:
            continue
        positions = sorted(rng.sample(range(4, len(tokens)), min(queries_per_doc, len(tokens) - 4)))
        for pos in positions:
            queries.append((tokens, pos))
    return queries


def completion_score(model, queries: list[tuple[list[str], int]]) -> float:
    """Mean probability the model assigns to the reference next token."""
    if not queries:
        return 0.0
    total = 0.0
    for tokens, pos in queries:
        order = getattr(model, "order", 1)
        start = max(0, pos - (order - 1))
        total += math.exp(model.logprob_nats(tokens[start:pos], tokens[pos]))
    return total / len(queries)


def benchmark_results_for(
    model,
    bench_code: CorpusManifest,
    bench_text: CorpusManifest,
    token_mode: str,
    seed: int,
) -> list[BenchmarkResult]:
    """Toy benchmark suite: code completion (two sizes) plus comment completion."""
    code_queries = completion_queries(bench_code, token_mode, queries_per_doc=40, seed=seed)
    text_queries = completion_queries(bench_text, token_mode, queries_per_doc=40, seed=seed + 1)
    split = (2 * len(code_queries)) // 3
    head, tail = code_queries[:split], code_queries[split:]
    results = [
        BenchmarkResult("generation", "next_token_code_large", len(head), completion_score(model, head)),
        BenchmarkResult("generation", "next_token_code_small", len(tail), completion_score(model, tail)),
        BenchmarkResult("explanation", "next_token_comment", len(text_queries), completion_score(model, text_queries)),
    ]
    return results


@dataclass(frozen=True)
class ZooOutcome:
    model_name: str
    bpc: float
    score: float
    per_benchmark: tuple[BenchmarkResult, ...]


def evaluate_zoo(
    models,
    validation: CorpusManifest,
    bench_code: CorpusManifest,
    bench_text: CorpusManifest,
    window: WindowConfig,
    seed: int,
) -> list[ZooOutcome]:
    outcomes = []
    for model in models:
        report = sliding_window_bpc(model, validation, window)
        results = benchmark_results_for(model, bench_code, bench_text, model.token_mode, seed)
        composite = composite_score(results)
        outcomes.append(
            ZooOutcome(
                model_name=model.name,
                bpc=report.bpc,
                score=composite.value,
                per_benchmark=tuple(results),
            )
        )
    return outcomes
