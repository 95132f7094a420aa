"""Bounded-context n-gram compressors with add-alpha smoothing.

These are desk-scale probability sources whose conditioning depends on
at most the previous ``order - 1`` tokens, which makes sliding-window
correctness exactly verifiable: whenever the window keeps at least that
much context, windowed and full-prefix conditioning coincide.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InputError
from .tokenize import tokenize
from .trace import LogProbTrace, TokenEvent

UNK = "<unk>"


@dataclass(frozen=True)
class NGramModel:
    """Add-alpha n-gram model over tokens.

    Counts are kept for every context length from 0 to ``order - 1`` so a
    position near a document start is scored from its exact available
    prefix.  Immutable after training; safe for concurrent readers.
    """

    order: int
    alpha: float
    token_mode: str
    vocab: tuple[str, ...]
    counts: dict[int, dict[tuple[str, ...], Counter]] = field(repr=False)
    context_totals: dict[int, dict[tuple[str, ...], int]] = field(repr=False)
    name: str = "ngram"

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def tokenize(self, content: str) -> list[str]:
        return tokenize(content, self.token_mode)

    def _vocab_set(self) -> frozenset:
        cached = getattr(self, "_vocab_cache", None)
        if cached is None:
            cached = frozenset(self.vocab)
            object.__setattr__(self, "_vocab_cache", cached)
        return cached

    def logprob_nats(self, context: Sequence[str], token: str) -> float:
        """log p(token | at most the last order-1 tokens of context)."""
        vocab = self._vocab_set()
        tok = token if token in vocab else UNK
        m = min(self.order - 1, len(context))
        ctx = tuple(context[len(context) - m :])
        total = self.context_totals.get(m, {}).get(ctx, 0)
        count = self.counts[m][ctx][tok] if total else 0
        p = (count + self.alpha) / (total + self.alpha * self.vocab_size)
        return math.log(p)


def ngram_train(
    corpus, order: int, alpha: float, token_mode: str = "char", name: str | None = None
) -> NGramModel:
    """Train on every document of a manifest (or iterable of documents).

    Counts reflect every window up to length ``order`` in each document;
    deterministic because documents are visited in doc_id order.
    """
    if order < 1:
        raise InputError(f"order must be >= 1, got {order}")
    if alpha <= 0:
        raise InputError(f"alpha must be > 0, got {alpha}")
    docs = sorted(corpus, key=lambda d: d.doc_id)
    if not docs:
        raise InputError("cannot train on an empty corpus")

    vocab_seen: set[str] = set()
    counts: dict[int, dict[tuple[str, ...], Counter]] = {
        m: {} for m in range(order)
    }
    for doc in docs:
        tokens = tokenize(doc.content, token_mode)
        vocab_seen.update(tokens)
        for i, tok in enumerate(tokens):
            for m in range(order):
                if i < m:
                    break
                ctx = tuple(tokens[i - m : i])
                table = counts[m].get(ctx)
                if table is None:
                    table = counts[m][ctx] = Counter()
                table[tok] += 1

    context_totals = {
        m: {ctx: sum(table.values()) for ctx, table in tables.items()}
        for m, tables in counts.items()
    }
    vocab = tuple(sorted(vocab_seen | {UNK}))
    return NGramModel(
        order=order,
        alpha=alpha,
        token_mode=token_mode,
        vocab=vocab,
        counts=counts,
        context_totals=context_totals,
        name=name or f"ngram-k{order}-a{alpha:g}",
    )


def ngram_logprob(
    model: NGramModel,
    tokens: Sequence[str],
    context_limit: int | None = None,
    doc_id: str = "doc",
) -> LogProbTrace:
    """Score a token sequence; event i conditions on
    min(order-1, i, context_limit-1) preceding tokens."""
    if context_limit is not None and context_limit < 1:
        raise InputError(f"context_limit must be >= 1, got {context_limit}")
    events = []
    for i, tok in enumerate(tokens):
        avail = i if context_limit is None else min(i, context_limit - 1)
        start = i - min(model.order - 1, avail)
        lp = model.logprob_nats(tokens[start:i], tok)
        events.append(
            TokenEvent(doc_id=doc_id, token_index=i, char_len=len(tok), logprob_nats=lp)
        )
    return LogProbTrace(
        model_name=model.name,
        context_window_used=context_limit,
        events=tuple(events),
    )


@dataclass(frozen=True)
class UniformModel:
    """Assigns 1/symbols to every token regardless of context."""

    symbols: int
    token_mode: str = "char"
    name: str = "uniform"
    order: int = 1  # context-free

    @property
    def vocab_size(self) -> int:
        return self.symbols

    def tokenize(self, content: str) -> list[str]:
        return tokenize(content, self.token_mode)

    def logprob_nats(self, context: Sequence[str], token: str) -> float:
        return -math.log(self.symbols)


# ---------------------------------------------------------------------------
# model serialization (JSON; deterministic ordering)


def save_model(model: NGramModel, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "order": model.order,
        "alpha": model.alpha,
        "token_mode": model.token_mode,
        "name": model.name,
        "vocab": list(model.vocab),
        "counts": [
            [m, list(ctx), sorted(table.items())]
            for m in sorted(model.counts)
            for ctx, table in sorted(model.counts[m].items())
        ],
    }
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def load_model(path: str | Path) -> NGramModel:
    path = Path(path)
    if not path.exists():
        raise InputError(f"model file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        payload = json.load(fh)
    counts: dict[int, dict[tuple[str, ...], Counter]] = {
        m: {} for m in range(int(payload["order"]))
    }
    for m, ctx, items in payload["counts"]:
        counts[int(m)][tuple(ctx)] = Counter(dict((k, int(v)) for k, v in items))
    context_totals = {
        m: {ctx: sum(table.values()) for ctx, table in tables.items()}
        for m, tables in counts.items()
    }
    return NGramModel(
        order=int(payload["order"]),
        alpha=float(payload["alpha"]),
        token_mode=payload["token_mode"],
        vocab=tuple(payload["vocab"]),
        counts=counts,
        context_totals=context_totals,
        name=payload.get("name", "ngram"),
    )


def trace_from_model(
    model, corpus: Iterable, context_limit: int | None = None
) -> LogProbTrace:
    """Full-prefix (or context-limited) trace over a whole manifest."""
    events: list[TokenEvent] = []
    for doc in sorted(corpus, key=lambda d: d.doc_id):
        tokens = model.tokenize(doc.content)
        doc_trace = ngram_logprob(model, tokens, context_limit, doc_id=doc.doc_id)
        events.extend(doc_trace.events)
    return LogProbTrace(
        model_name=getattr(model, "name", "model"),
        context_window_used=context_limit,
        events=tuple(events),
    )
