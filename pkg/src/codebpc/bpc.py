"""Bits-per-character under sliding-window, full-context, and truncated protocols.

The sliding-window protocol scores the whole first window, then advances
by a stride and scores only the trailing stride segment of each later
window, so every non-initial scored token keeps at least
``window - stride`` in-window predecessors.  A final window anchored at
the sequence end covers any leftover suffix, giving exact once-per-token
coverage.  BPC factors into mean per-token loss (bits/token) times the
tokens-per-character ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Protocol

from .errors import ComputeError, ConfigError
from .trace import LN2, LogProbTrace


def default_stride(window_size: int) -> int:
    """Quarter-window stride, floored, at least one token."""
    return max(1, window_size // 4)


@dataclass(frozen=True)
class WindowConfig:
    window_size: int
    stride: int | None = None  # None means window_size // 4

    def __post_init__(self):
        if self.window_size < 1:
            raise ConfigError(f"window_size must be >= 1, got {self.window_size}")
        if self.stride is None:
            object.__setattr__(self, "stride", default_stride(self.window_size))
        if not 1 <= self.stride <= self.window_size:
            raise ConfigError(
                f"stride must satisfy 1 <= stride <= window_size, "
                f"got stride={self.stride}, window_size={self.window_size}"
            )


class Segment(NamedTuple):
    """Score positions [score_start, score_end) with context clipped at context_start."""

    context_start: int
    score_start: int
    score_end: int


def window_schedule(length: int, window_size: int, stride: int) -> list[Segment]:
    """Sliding-window segments covering each of ``length`` positions exactly once.

    A sequence no longer than the window is scored in a single pass.
    Otherwise the first window scores everything it holds, each further
    window placed ``stride`` tokens later scores its trailing stride
    segment, and one end-anchored window picks up any remaining suffix.
    """
    if length < 1:
        raise ComputeError("cannot schedule an empty token sequence")
    cfg = WindowConfig(window_size, stride)  # validates
    window_size, stride = cfg.window_size, cfg.stride

    if length <= window_size:
        return [Segment(0, 0, length)]

    segments = [Segment(0, 0, window_size)]
    t = stride
    while t + window_size <= length:
        segments.append(Segment(t, t + window_size - stride, t + window_size))
        t += stride
    covered = segments[-1].score_end
    if covered < length:
        segments.append(Segment(length - window_size, covered, length))
    return segments


def truncated_schedule(length: int, window_size: int) -> list[Segment]:
    """Disjoint chunks with context reset at every chunk boundary."""
    if length < 1:
        raise ComputeError("cannot schedule an empty token sequence")
    if window_size < 1:
        raise ConfigError(f"window_size must be >= 1, got {window_size}")
    return [
        Segment(start, start, min(start + window_size, length))
        for start in range(0, length, window_size)
    ]


def min_context_per_scored_token(cfg: WindowConfig) -> int:
    """Minimum in-window preceding context of any non-initial scored token."""
    return cfg.window_size - cfg.stride


def mean_context_fraction(cfg: WindowConfig) -> float:
    """Mean in-window context of a non-initial window's scored tokens, as a
    fraction of the window (7/8 at the default quarter-window stride)."""
    offsets = range(cfg.window_size - cfg.stride, cfg.window_size)
    return sum(offsets) / len(offsets) / cfg.window_size


# ---------------------------------------------------------------------------
# log-probability sources


class LogProbSource(Protocol):
    name: str

    def token_count(self, doc) -> int: ...

    def score_bits(self, doc, segments: list[Segment]) -> tuple[list[float], list[int]]:
        """Per-position loss in bits and per-position character lengths."""
        ...


class ModelSource:
    """Adapts any model with ``tokenize`` and ``logprob_nats`` methods."""

    def __init__(self, model):
        self.model = model
        self.name = getattr(model, "name", "model")
        self._token_cache: dict[str, list[str]] = {}

    def tokens_for(self, doc) -> list[str]:
        cached = self._token_cache.get(doc.doc_id)
        if cached is None:
            cached = self._token_cache[doc.doc_id] = self.model.tokenize(doc.content)
        return cached

    def token_count(self, doc) -> int:
        return len(self.tokens_for(doc))

    def score_bits(self, doc, segments):
        tokens = self.tokens_for(doc)
        order = getattr(self.model, "order", None)
        bits: list[float] = []
        char_lens: list[int] = []
        for context_start, score_start, score_end in segments:
            for i in range(score_start, score_end):
                lo = context_start
                if order is not None:
                    lo = max(lo, i - (order - 1))
                lp = self.model.logprob_nats(tokens[lo:i], tokens[i])
                bits.append(-lp / LN2)
                char_lens.append(len(tokens[i]))
        return bits, char_lens


class TraceSource:
    """Replays captured per-token log-probabilities.

    The conditioning context was fixed when the trace was captured, so
    window boundaries only select which positions are consumed; the
    schedule still guarantees each position is used exactly once.
    """

    def __init__(self, trace: LogProbTrace):
        self.trace = trace
        self.name = trace.model_name
        self._by_doc = trace.events_by_doc()

    def token_count(self, doc) -> int:
        events = self._by_doc.get(doc.doc_id)
        if not events:
            raise ComputeError(f"trace has no events for doc {doc.doc_id}")
        return len(events)

    def require_full_prefix(self, doc) -> None:
        window = self.trace.context_window_used
        n = self.token_count(doc)
        if window is not None and n > window:
            raise ComputeError(
                f"oracle unavailable: doc {doc.doc_id} has {n} tokens but the "
                f"trace was captured with a {window}-token context window"
            )

    def score_bits(self, doc, segments):
        events = self._by_doc[doc.doc_id]
        consumed = [False] * len(events)
        bits: list[float] = []
        char_lens: list[int] = []
        for _, score_start, score_end in segments:
            if score_end > len(events):
                raise ComputeError(
                    f"trace shorter than token sequence for doc {doc.doc_id}: "
                    f"need position {score_end - 1}, have {len(events)} events"
                )
            for i in range(score_start, score_end):
                if consumed[i]:
                    raise ComputeError(f"doc {doc.doc_id}: position {i} scored twice")
                consumed[i] = True
                bits.append(events[i].bits)
                char_lens.append(events[i].char_len)
        return bits, char_lens


def as_source(model_or_trace) -> LogProbSource:
    if isinstance(model_or_trace, LogProbTrace):
        return TraceSource(model_or_trace)
    if isinstance(model_or_trace, (ModelSource, TraceSource)):
        return model_or_trace
    return ModelSource(model_or_trace)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class DocBpc:
    doc_id: str
    char_count: int
    token_count: int
    total_bits: float
    bits_per_token: float
    tokens_per_char: float
    bpc: float


@dataclass(frozen=True)
class BpcReport:
    """Pooled corpus result plus a per-document breakdown.

    ``bpc`` equals ``bits_per_token * tokens_per_char`` (the per-token
    loss times the tokens-per-character ratio) up to float rounding.
    """

    char_count: int
    token_count: int
    total_bits: float
    bits_per_token: float
    tokens_per_char: float
    bpc: float
    per_document: tuple[DocBpc, ...]
    mode: str
    model_name: str
    window_size: int | None = None
    stride: int | None = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "model_name": self.model_name,
            "window_size": self.window_size,
            "stride": self.stride,
            "char_count": self.char_count,
            "token_count": self.token_count,
            "total_bits": self.total_bits,
            "bits_per_token": self.bits_per_token,
            "tokens_per_char": self.tokens_per_char,
            "bpc": self.bpc,
            "per_document": [
                {
                    "doc_id": d.doc_id,
                    "char_count": d.char_count,
                    "token_count": d.token_count,
                    "total_bits": d.total_bits,
                    "bits_per_token": d.bits_per_token,
                    "tokens_per_char": d.tokens_per_char,
                    "bpc": d.bpc,
                }
                for d in self.per_document
            ],
        }


def decompose_bpc(report: BpcReport) -> tuple[float, float]:
    """The two factors: (bits per token, tokens per character)."""
    return report.bits_per_token, report.tokens_per_char


def _evaluate(source, docs, schedule_for, mode, window_size=None, stride=None) -> BpcReport:
    per_doc: list[DocBpc] = []
    for doc in sorted(docs, key=lambda d: d.doc_id):
        n = source.token_count(doc)
        if n < 1:
            raise ComputeError(f"doc {doc.doc_id} has no tokens to score")
        segments = schedule_for(n)
        bits, char_lens = source.score_bits(doc, segments)
        if len(bits) != n:
            raise ComputeError(
                f"doc {doc.doc_id}: scored {len(bits)} positions for {n} tokens"
            )
        m = sum(char_lens)
        if m != doc.char_count:
            raise ComputeError(
                f"trace/corpus character mismatch for doc {doc.doc_id}: "
                f"tokens cover {m} chars, document has {doc.char_count}"
            )
        if m == 0:
            raise ComputeError(f"doc {doc.doc_id} has no characters")
        total = math.fsum(bits)  # fixed ascending-index order, compensated
        per_doc.append(
            DocBpc(
                doc_id=doc.doc_id,
                char_count=m,
                token_count=n,
                total_bits=total,
                bits_per_token=total / n,
                tokens_per_char=n / m,
                bpc=total / m,
            )
        )
    if not per_doc:
        raise ComputeError("no documents to evaluate")

    big_m = sum(d.char_count for d in per_doc)
    big_n = sum(d.token_count for d in per_doc)
    total_bits = math.fsum(d.total_bits for d in per_doc)
    return BpcReport(
        char_count=big_m,
        token_count=big_n,
        total_bits=total_bits,
        bits_per_token=total_bits / big_n,
        tokens_per_char=big_n / big_m,
        bpc=total_bits / big_m,
        per_document=tuple(per_doc),
        mode=mode,
        model_name=source.name,
        window_size=window_size,
        stride=stride,
    )


def sliding_window_bpc(model_or_trace, docs: Iterable, cfg: WindowConfig) -> BpcReport:
    """Stride-masked sliding-window BPC; every token scored exactly once."""
    source = as_source(model_or_trace)
    return _evaluate(
        source,
        docs,
        lambda n: window_schedule(n, cfg.window_size, cfg.stride),
        mode="sliding",
        window_size=cfg.window_size,
        stride=cfg.stride,
    )


def full_context_bpc(model_or_trace, docs: Iterable) -> BpcReport:
    """Every token conditioned on its entire prefix; the oracle reference."""
    source = as_source(model_or_trace)
    docs = list(docs)
    if isinstance(source, TraceSource):
        for doc in docs:
            source.require_full_prefix(doc)
    return _evaluate(source, docs, lambda n: [Segment(0, 0, n)], mode="full")


def truncated_bpc(model_or_trace, docs: Iterable, window_size: int) -> BpcReport:
    """Disjoint-chunk baseline: context resets at every chunk boundary."""
    source = as_source(model_or_trace)
    return _evaluate(
        source,
        docs,
        lambda n: truncated_schedule(n, window_size),
        mode="truncated",
        window_size=window_size,
        stride=window_size,
    )
