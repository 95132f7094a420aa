"""Per-token log-probability traces.

A trace file is JSON Lines: one header line naming the producing model
and its context window, then one token event per line.  Log
probabilities are stored in nats; the engine divides by ln 2 exactly
once when converting to bits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import InputError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class TokenEvent:
    doc_id: str
    token_index: int
    char_len: int
    logprob_nats: float

    @property
    def bits(self) -> float:
        return -self.logprob_nats / LN2


@dataclass(frozen=True)
class LogProbTrace:
    model_name: str
    context_window_used: int | None  # None means unbounded conditioning
    events: tuple[TokenEvent, ...] = field(default_factory=tuple)

    def events_by_doc(self) -> dict[str, list[TokenEvent]]:
        grouped: dict[str, list[TokenEvent]] = {}
        for ev in self.events:
            grouped.setdefault(ev.doc_id, []).append(ev)
        return grouped


def validate_events(events: Iterable[TokenEvent]) -> None:
    last_index: dict[str, int] = {}
    for ev in events:
        if ev.logprob_nats > 0:
            raise InputError(
                f"doc {ev.doc_id} token {ev.token_index}: positive logprob {ev.logprob_nats}"
            )
        if ev.char_len < 0:
            raise InputError(
                f"doc {ev.doc_id} token {ev.token_index}: negative char_len {ev.char_len}"
            )
        prev = last_index.get(ev.doc_id)
        if prev is not None and ev.token_index <= prev:
            raise InputError(
                f"doc {ev.doc_id}: token_index {ev.token_index} not increasing after {prev}"
            )
        last_index[ev.doc_id] = ev.token_index


def write_trace(trace: LogProbTrace, path: str | Path) -> None:
    """Serialize deterministically; identical traces yield identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "model_name": trace.model_name,
        "context_window_used": trace.context_window_used,
    }
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for ev in trace.events:
            rec = {
                "doc_id": ev.doc_id,
                "token_index": ev.token_index,
                "char_len": ev.char_len,
                "logprob_nats": ev.logprob_nats,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_trace(
    path: str | Path, expected_char_counts: Mapping[str, int] | None = None
) -> LogProbTrace:
    """Parse and validate a trace file.

    Violations are rejected with their line number.  When
    ``expected_char_counts`` is given, the summed ``char_len`` of each
    document must match its declared character count.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"trace file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if not lines:
        raise InputError(f"{path}: empty trace file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:1: bad trace header: {exc}") from exc
    if "model_name" not in header:
        raise InputError(f"{path}:1: trace header lacks model_name")

    events: list[TokenEvent] = []
    last_index: dict[str, int] = {}
    char_sums: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            ev = TokenEvent(
                doc_id=str(rec["doc_id"]),
                token_index=int(rec["token_index"]),
                char_len=int(rec["char_len"]),
                logprob_nats=float(rec["logprob_nats"]),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}:{lineno}: bad token event: {exc}") from exc
        if ev.logprob_nats > 0:
            raise InputError(f"{path}:{lineno}: positive logprob {ev.logprob_nats}")
        if ev.char_len < 0:
            raise InputError(f"{path}:{lineno}: negative char_len")
        prev = last_index.get(ev.doc_id)
        if prev is not None and ev.token_index <= prev:
            raise InputError(
                f"{path}:{lineno}: token_index {ev.token_index} not increasing after {prev}"
            )
        last_index[ev.doc_id] = ev.token_index
        char_sums[ev.doc_id] = char_sums.get(ev.doc_id, 0) + ev.char_len
        events.append(ev)

    if expected_char_counts is not None:
        for doc_id, expected in expected_char_counts.items():
            got = char_sums.get(doc_id, 0)
            if got != expected:
                raise InputError(
                    f"{path}: trace/corpus character mismatch for doc {doc_id}: "
                    f"trace covers {got}, corpus declares {expected}"
                )

    return LogProbTrace(
        model_name=str(header["model_name"]),
        context_window_used=header.get("context_window_used"),
        events=tuple(events),
    )
