"""Deterministic tokenizers.

Two roles, two splitters:

* ``tokenize_simple`` backs the corpus filters (minimum-token cutoffs,
  token totals).  It drops whitespace, so its tokens do NOT partition the
  text.
* ``tokenize_coverage`` and ``tokenize_chars`` back per-token
  log-probability accounting, where every Unicode scalar value must be
  covered by exactly one token so character counts reconcile.
"""

from __future__ import annotations

import re

# identifier run | digit run | single punctuation/operator character
_SIMPLE_RE = re.compile(r"[^\W\d]\w*|\d+|[^\w\s]")
# same, plus whitespace runs kept as tokens so the output partitions the input
_COVERAGE_RE = re.compile(r"[^\W\d]\w*|\d+|\s+|[^\w\s]")


def tokenize_simple(content: str) -> list[str]:
    """Split into identifier runs, digit runs, and single punctuation chars.

    Whitespace is discarded.  Empty input yields an empty list.
    """
    return _SIMPLE_RE.findall(content)


def tokenize_coverage(content: str) -> list[str]:
    """Like ``tokenize_simple`` but whitespace runs become tokens.

    The concatenation of the result equals the input, so summed token
    lengths always reconcile with the character count.
    """
    return _COVERAGE_RE.findall(content)


def tokenize_chars(content: str) -> list[str]:
    """One token per Unicode scalar value."""
    return list(content)


TOKEN_MODES = {
    "char": tokenize_chars,
    "split": tokenize_coverage,
}


def tokenize(content: str, mode: str) -> list[str]:
    try:
        fn = TOKEN_MODES[mode]
    except KeyError:
        raise ValueError(f"unknown token mode {mode!r}; expected one of {sorted(TOKEN_MODES)}")
    return fn(content)
