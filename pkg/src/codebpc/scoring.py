"""Benchmark aggregation and response-format analytics.

The composite score weights task categories uniformly and benchmarks
within a task proportionally to their instance counts.  The analytics
side measures how often model responses yield no usable code (empty or
placeholder-only extractions) and provides the early-stop predicate
tied to that ratio.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InputError

CANONICAL_TASKS = ("generation", "explanation", "reasoning", "repair")


@dataclass(frozen=True)
class BenchmarkResult:
    task: str
    benchmark: str
    instance_count: int
    score: float

    def __post_init__(self):
        if not self.task:
            raise InputError("benchmark result has an empty task label")
        if self.instance_count < 1:
            raise InputError(
                f"{self.task}/{self.benchmark}: instance_count must be >= 1"
            )
        if not 0.0 <= self.score <= 1.0:
            raise InputError(
                f"{self.task}/{self.benchmark}: score {self.score} outside [0, 1]"
            )


@dataclass(frozen=True)
class CompositeScore:
    value: float
    log_value: float
    per_task: dict[str, float]
    weights: dict[tuple[str, str], float]

    def to_dict(self) -> dict:
        return {
            "composite": self.value,
            "log_composite": self.log_value,
            "per_task": dict(sorted(self.per_task.items())),
            "weights": [
                {"task": t, "benchmark": b, "weight": w}
                for (t, b), w in sorted(self.weights.items())
            ],
        }


def composite_score(results: Sequence[BenchmarkResult]) -> CompositeScore:
    """Two-stage weighted mean: uniform across tasks, instance-count
    proportional within each task.  Weights sum to one."""
    if not results:
        raise InputError("no benchmark results to aggregate")
    seen = set()
    for r in results:
        key = (r.task, r.benchmark)
        if key in seen:
            raise InputError(f"duplicate benchmark result for {key}")
        seen.add(key)

    tasks = sorted({r.task for r in results})
    n_tasks = len(tasks)
    weights: dict[tuple[str, str], float] = {}
    per_task: dict[str, float] = {}
    for task in tasks:
        members = [r for r in results if r.task == task]
        task_instances = sum(r.instance_count for r in members)
        subtotal = 0.0
        for r in members:
            w = (1.0 / n_tasks) * (r.instance_count / task_instances)
            weights[(r.task, r.benchmark)] = w
            subtotal += (r.instance_count / task_instances) * r.score
        per_task[task] = subtotal

    numerator = math.fsum(weights[(r.task, r.benchmark)] * r.score for r in results)
    denominator = math.fsum(weights.values())
    value = numerator / denominator
    log_value = math.log(value) if value > 0 else float("-inf")
    return CompositeScore(value=value, log_value=log_value, per_task=per_task, weights=weights)


def intelligence_metric(score: CompositeScore | float) -> float:
    """Natural log of the composite score."""
    value = score.value if isinstance(score, CompositeScore) else float(score)
    if value < 0:
        raise InputError(f"composite score {value} is negative")
    if value == 0:
        raise InputError("log of zero score is undefined")
    return math.log(value)


# ---------------------------------------------------------------------------
# code extraction and placeholder detection

_FENCE_RE = re.compile(r"```([^\n`]*)\n(.*?)```", re.DOTALL)
_DEFINITION_RE = re.compile(r"^\s*(?:async\s+)?(?:def|class|function|fn|func)\b", re.MULTILINE)


def extract_code(response: str, language_hint: str | None = None) -> str:
    """Pull code out of a model response.

    Preference order: first fenced block whose info string matches the
    hint, then the first fenced block, then the suffix starting at the
    earliest function/class definition line, else empty.
    """
    blocks = [(info.strip().lower(), body) for info, body in _FENCE_RE.findall(response)]
    if blocks:
        if language_hint:
            hint = language_hint.strip().lower()
            for info, body in blocks:
                if info == hint or info.split()[:1] == [hint]:
                    return body.strip("\n")
        return blocks[0][1].strip("\n")
    match = _DEFINITION_RE.search(response)
    if match:
        return response[match.start() :].strip("\n")
    return ""


_LINE_COMMENT_PREFIXES = ("#", "//", "--", "*", "/*", "*/", ";")

_STRUCTURAL_RES = (
    re.compile(r"^\s*(?:async\s+)?(?:def|class|function|fn|func)\b.*$"),
    re.compile(r"^\s*@\w[\w.]*.*$"),  # decorators
    re.compile(r"^[\s{}()\[\];]*$"),  # brace/bracket scaffolding
)

_PLACEHOLDER_RES = (
    re.compile(r"^\s*pass\s*;?\s*$"),
    re.compile(r"^\s*\.\.\.\s*;?\s*$"),
    re.compile(r"^\s*(?:raise|throw)\b.*not\s*_?implemented", re.IGNORECASE),
    re.compile(r"^\s*(?:raise|throw)\s+NotImplementedError\b.*$"),
    re.compile(r"^\s*(?:#|//|--)?\s*(?:todo|fixme)\b.*$", re.IGNORECASE),
    re.compile(r"^\s*[\"'](?:todo|fixme)\b.*[\"']\s*;?\s*$", re.IGNORECASE),
)


def placeholder_scan(code: str) -> bool:
    """True iff nothing but stubs remain once comments and blanks are gone.

    Structural lines (definition headers, decorators, lone braces) do not
    count as substance; any other statement does.
    """
    for line in code.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith(_LINE_COMMENT_PREFIXES):
            continue
        if any(r.match(line) for r in _PLACEHOLDER_RES):
            continue
        if any(r.match(line) for r in _STRUCTURAL_RES):
            continue
        return False
    return True


@dataclass(frozen=True)
class ResponseRecord:
    benchmark: str
    response: str
    extracted_code: str
    empty_flag: bool


def make_response_record(
    benchmark: str, response: str, language_hint: str | None = None
) -> ResponseRecord:
    """Extract code and derive the empty flag (placeholder-only counts as empty)."""
    code = extract_code(response, language_hint)
    empty = not code.strip() or placeholder_scan(code)
    return ResponseRecord(
        benchmark=benchmark, response=response, extracted_code=code, empty_flag=empty
    )


def empty_ratio(records: Iterable[ResponseRecord]) -> float:
    records = list(records)
    if not records:
        raise InputError("no response records")
    return sum(1 for r in records if r.empty_flag) / len(records)


def stop_predicate(ratio: float) -> bool:
    """Halt once the empty ratio is at most 1 percent."""
    if not 0.0 <= ratio <= 1.0:
        raise InputError(f"ratio {ratio} outside [0, 1]")
    return ratio <= 0.01
