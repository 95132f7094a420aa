import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from codebpc.errors import InputError
from codebpc.scoring import (
    BenchmarkResult,
    composite_score,
    empty_ratio,
    extract_code,
    intelligence_metric,
    make_response_record,
    placeholder_scan,
    stop_predicate,
)


def oracle_composite(results):
    """Brute-force transliteration of the two-stage weighting formula."""
    tasks = sorted({r.task for r in results})
    n = len(tasks)
    numerator = 0.0
    denominator = 0.0
    for r in results:
        task_total = sum(q.instance_count for q in results if q.task == r.task)
        w = (1.0 / n) * (r.instance_count / task_total)
        numerator += w * r.score
        denominator += w
    return numerator / denominator


def random_results(rng):
    tasks = rng.sample(["generation", "explanation", "reasoning", "repair"], rng.randint(1, 4))
    results = []
    for t_idx, task in enumerate(tasks):
        for b_idx in range(rng.randint(1, 4)):
            results.append(
                BenchmarkResult(
                    task=task,
                    benchmark=f"bench_{t_idx}_{b_idx}",
                    instance_count=rng.randint(1, 500),
                    score=rng.random(),
                )
            )
    return results


# ---------------------------------------------------------------------------
# composite score


def test_single_benchmark_passthrough():
    score = composite_score([BenchmarkResult("generation", "only", 10, 0.5)])
    assert score.value == 0.5


def test_two_tasks_equal_weight():
    results = [
        BenchmarkResult("generation", "g", 100, 1.0),
        BenchmarkResult("repair", "r", 500, 0.0),
    ]
    assert composite_score(results).value == 0.5


def test_hand_computed_two_stage_example():
    # task A: (100, 0.8) and (300, 0.4); task B: (50, 0.6)
    # C = 0.5*(100*0.8 + 300*0.4)/400 + 0.5*0.6 = 0.55
    results = [
        BenchmarkResult("generation", "a1", 100, 0.8),
        BenchmarkResult("generation", "a2", 300, 0.4),
        BenchmarkResult("repair", "b1", 50, 0.6),
    ]
    score = composite_score(results)
    assert abs(score.value - 0.55) < 1e-12
    assert abs(intelligence_metric(score) - math.log(0.55)) < 1e-12


def test_matches_bruteforce_oracle_randomized():
    rng = random.Random(0)
    for _ in range(100):
        results = random_results(rng)
        assert abs(composite_score(results).value - oracle_composite(results)) <= 1e-12


def test_weights_sum_to_one():
    rng = random.Random(1)
    for _ in range(20):
        score = composite_score(random_results(rng))
        assert abs(math.fsum(score.weights.values()) - 1.0) <= 1e-12


def test_composite_bounded_by_scores():
    rng = random.Random(2)
    for _ in range(20):
        results = random_results(rng)
        score = composite_score(results).value
        values = [r.score for r in results]
        assert min(values) - 1e-12 <= score <= max(values) + 1e-12


def test_task_label_permutation_preserves_value():
    results = [
        BenchmarkResult("generation", "a", 10, 0.3),
        BenchmarkResult("repair", "b", 20, 0.9),
    ]
    swapped = [
        BenchmarkResult("repair", "a", 10, 0.3),
        BenchmarkResult("generation", "b", 20, 0.9),
    ]
    assert composite_score(results).value == composite_score(swapped).value


def test_within_task_split_is_invariant():
    merged = [
        BenchmarkResult("generation", "whole", 200, 0.7),
        BenchmarkResult("repair", "other", 50, 0.2),
    ]
    split = [
        BenchmarkResult("generation", "half1", 120, 0.7),
        BenchmarkResult("generation", "half2", 80, 0.7),
        BenchmarkResult("repair", "other", 50, 0.2),
    ]
    assert abs(composite_score(merged).value - composite_score(split).value) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_monotone_in_any_score(data):
    rng = random.Random(data.draw(st.integers(0, 10_000)))
    results = random_results(rng)
    idx = data.draw(st.integers(0, len(results) - 1))
    bumped = results[:]
    old = bumped[idx]
    if old.score >= 0.999:
        return
    bumped[idx] = BenchmarkResult(old.task, old.benchmark, old.instance_count, old.score + 0.001)
    assert composite_score(bumped).value > composite_score(results).value


def test_composite_input_validation():
    with pytest.raises(InputError):
        composite_score([])
    with pytest.raises(InputError, match="duplicate"):
        composite_score(
            [
                BenchmarkResult("generation", "x", 5, 0.5),
                BenchmarkResult("generation", "x", 5, 0.7),
            ]
        )
    with pytest.raises(InputError, match="outside"):
        BenchmarkResult("generation", "x", 5, 1.5)
    with pytest.raises(InputError, match="instance_count"):
        BenchmarkResult("generation", "x", 0, 0.5)


def test_intelligence_metric_values():
    assert intelligence_metric(1.0) == 0.0
    assert abs(intelligence_metric(math.exp(-1)) + 1.0) < 1e-12
    with pytest.raises(InputError, match="zero score"):
        intelligence_metric(0.0)


# ---------------------------------------------------------------------------
# code extraction


def test_extract_single_fenced_block():
    response = "Here you go:\n```python\ndef f():\n    return 1\n```\nEnjoy."
    assert extract_code(response) == "def f():\n    return 1"


def test_extract_prefers_hinted_block():
    response = (
        "First some JS:\n```javascript\nconsole.log(1)\n```\n"
        "then python:\n```python\nprint(1)\n```\n"
    )
    assert extract_code(response, "python") == "print(1)"
    assert extract_code(response) == "console.log(1)"


def test_extract_falls_back_to_definition_suffix():
    response = "No fences here, but:\ndef g(x):\n    return x * 2\nthat is all"
    assert extract_code(response).startswith("def g(x):")


def test_extract_no_code_is_empty():
    assert extract_code("Just prose, nothing else.") == ""
    assert extract_code("") == ""


def test_extract_idempotent_on_definition_outputs():
    responses = [
        "```python\ndef f():\n    return 1\n```",
        "prose\n```go\nfunc main() {\n\treturn\n}\n```",
        "def h():\n    pass",
    ]
    for response in responses:
        once = extract_code(response)
        assert extract_code(once) == once


# ---------------------------------------------------------------------------
# placeholder detection


def test_pass_only_body_is_placeholder():
    assert placeholder_scan("def f():\n    pass")
    assert placeholder_scan("pass")


def test_return_expression_is_substance():
    assert not placeholder_scan("def f():\n    return x + 1")


def test_comment_only_is_placeholder():
    assert placeholder_scan("# nothing here\n# just notes\n")
    assert placeholder_scan("")


def test_ellipsis_todo_and_raise_variants():
    assert placeholder_scan("def f():\n    ...")
    assert placeholder_scan("def f():\n    raise NotImplementedError")
    assert placeholder_scan("function f() {\n    throw new Error('not implemented');\n}")
    assert placeholder_scan("def f():\n    # TODO fill in\n    pass")
    assert not placeholder_scan("def f():\n    x = 1\n    pass")


# ---------------------------------------------------------------------------
# empty ratio and stop predicate


def make_records(empty, total):
    records = []
    for i in range(empty):
        records.append(make_response_record("b", "no code at all"))
    for i in range(total - empty):
        records.append(make_response_record("b", f"```python\nreturn {i}\n```"))
    return records


def test_empty_ratio_counts_placeholders_as_empty():
    records = [
        make_response_record("b", "```python\ndef f():\n    pass\n```"),
        make_response_record("b", "```python\ndef f():\n    return 1\n```"),
    ]
    assert records[0].empty_flag and not records[1].empty_flag
    assert empty_ratio(records) == 0.5


def test_empty_ratio_examples():
    assert empty_ratio(make_records(0, 100)) == 0.0
    ratio = empty_ratio(make_records(2, 200))
    assert ratio == 0.01
    assert stop_predicate(ratio)


def test_annealing_table_fixture_ratios():
    denominator = 399
    before = empty_ratio(make_records(136, denominator))
    after = empty_ratio(make_records(1, denominator))
    assert abs(before - 136 / 399) < 1e-12
    assert round(before, 4) == 0.3409
    assert round(after, 4) == 0.0025
    assert not stop_predicate(before)
    assert stop_predicate(after)


def test_stop_predicate_boundary():
    assert stop_predicate(0.010)
    assert not stop_predicate(0.011)
    assert stop_predicate(0.0)
    with pytest.raises(InputError):
        stop_predicate(1.5)
