"""Validation-corpus construction: documents, filters, sampling, manifests.

A corpus is built from raw source files in several attrition stages:
boilerplate stripping, minimum-token filtering, creation-date filtering,
near-duplicate removal (see :mod:`codebpc.minhash`), and optional
language-balanced sampling.  Every stage is a pure function of the
document and its parameters, and all merge points order by ``doc_id``,
so the surviving set is independent of input order and worker schedule.
"""

from __future__ import annotations

import calendar
import json
import re
import tarfile
import zipfile
from dataclasses import dataclass, field, replace
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import InputError
from .tokenize import tokenize_simple

# ---------------------------------------------------------------------------
# documents and manifests


@dataclass(frozen=True)
class CodeDocument:
    """One source file: the unit all corpus operations act on.

    ``char_count`` is the number of Unicode scalar values in ``content``
    and is always recomputable; ``token_count`` is under
    :func:`codebpc.tokenize.tokenize_simple`.
    """

    doc_id: str
    repo_id: str
    language: str
    created_at: date | None
    content: str
    char_count: int
    token_count: int


def make_document(
    doc_id: str,
    content: str,
    *,
    repo_id: str = "unknown",
    language: str = "unknown",
    created_at: date | None = None,
) -> CodeDocument:
    """Build a document with derived counts filled in."""
    return CodeDocument(
        doc_id=doc_id,
        repo_id=repo_id,
        language=language,
        created_at=created_at,
        content=content,
        char_count=len(content),
        token_count=len(tokenize_simple(content)),
    )


def with_content(doc: CodeDocument, content: str) -> CodeDocument:
    """Copy of ``doc`` with new content and recomputed counts."""
    return replace(
        doc,
        content=content,
        char_count=len(content),
        token_count=len(tokenize_simple(content)),
    )


@dataclass(frozen=True)
class CorpusManifest:
    """An ordered, validated collection of documents.

    Documents are always held sorted by ``doc_id`` so that downstream
    reductions are bit-identical regardless of how the inputs arrived.
    """

    documents: tuple[CodeDocument, ...]
    provenance: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        ids = [d.doc_id for d in self.documents]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise InputError(f"duplicate doc_id in manifest: {dupes[:5]}")
        if ids != sorted(ids):
            object.__setattr__(
                self, "documents", tuple(sorted(self.documents, key=lambda d: d.doc_id))
            )

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[CodeDocument]:
        return iter(self.documents)

    @property
    def total_tokens(self) -> int:
        return sum(d.token_count for d in self.documents)

    @property
    def total_chars(self) -> int:
        return sum(d.char_count for d in self.documents)

    def language_token_totals(self) -> dict[str, int]:
        totals: dict[str, int] = {}
        for d in self.documents:
            totals[d.language] = totals.get(d.language, 0) + d.token_count
        return dict(sorted(totals.items()))


def manifest_from_documents(
    docs: Iterable[CodeDocument], provenance: Mapping[str, object] | None = None
) -> CorpusManifest:
    return CorpusManifest(tuple(sorted(docs, key=lambda d: d.doc_id)), dict(provenance or {}))


# ---------------------------------------------------------------------------
# manifest serialization (JSON Lines, one document per line)


def save_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for d in manifest:
            rec = {
                "doc_id": d.doc_id,
                "repo_id": d.repo_id,
                "language": d.language,
                "created_at": d.created_at.isoformat() if d.created_at else None,
                "char_count": d.char_count,
                "token_count": d.token_count,
                "content": d.content,
            }
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def load_manifest(path: str | Path) -> CorpusManifest:
    path = Path(path)
    if not path.exists():
        raise InputError(f"manifest not found: {path}")
    docs = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: bad manifest line: {exc}") from exc
            created = rec.get("created_at")
            doc = CodeDocument(
                doc_id=rec["doc_id"],
                repo_id=rec.get("repo_id", "unknown"),
                language=rec.get("language", "unknown"),
                created_at=date.fromisoformat(created) if created else None,
                content=rec["content"],
                char_count=len(rec["content"]),
                token_count=len(tokenize_simple(rec["content"])),
            )
            if "char_count" in rec and rec["char_count"] != doc.char_count:
                raise InputError(
                    f"{path}:{lineno}: declared char_count {rec['char_count']} "
                    f"!= recomputed {doc.char_count}"
                )
            docs.append(doc)
    return manifest_from_documents(docs)


# ---------------------------------------------------------------------------
# filters


def filter_min_tokens(doc: CodeDocument, min_tokens: int = 128) -> bool:
    """Keep documents with at least ``min_tokens`` tokens (strict cutoff below)."""
    return doc.token_count >= min_tokens


def filter_timestamp(doc: CodeDocument, window: tuple[date, date]) -> bool:
    """Keep iff the creation date lies inside the window, bounds inclusive.

    Documents without a creation date are rejected when a window is
    enforced; callers surface that as a diagnostic.
    """
    start, end = window
    if start > end:
        raise InputError(f"timestamp window is not well-ordered: {start} > {end}")
    if doc.created_at is None:
        return False
    return start <= doc.created_at <= end


def parse_date_bound(text: str, *, end: bool = False) -> date:
    """Parse ``YYYY-MM-DD`` or ``YYYY-MM``.

    A month-only bound expands to the first day (start bound) or the last
    day (end bound) of that month, keeping month windows inclusive.
    """
    text = text.strip()
    try:
        if re.fullmatch(r"\d{4}-\d{2}", text):
            year, month = int(text[:4]), int(text[5:7])
            day = calendar.monthrange(year, month)[1] if end else 1
            return date(year, month, day)
        return date.fromisoformat(text)
    except ValueError as exc:
        raise InputError(f"malformed date {text!r}: {exc}") from exc


DEFAULT_HEADER_KEYWORDS = (
    "copyright",
    "license",
    "licence",
    "spdx-license-identifier",
    "all rights reserved",
    "permission is hereby granted",
    "apache license",
    "gnu general public license",
)

DEFAULT_TRAILER_PATTERNS = (
    r"vim?\s*:",
    r"-\*-.*-\*-",
    r"@generated",
    r"generated by",
    r"end of file",
)

_COMMENT_MARKERS = ("#", "//", "/*", "*/", "*", "--", ";", "%", "<!--")


def _is_comment_or_blank(line: str) -> bool:
    stripped = line.strip()
    return stripped == "" or stripped.startswith(_COMMENT_MARKERS)


def strip_boilerplate(
    doc: CodeDocument,
    header_keywords: tuple[str, ...] = DEFAULT_HEADER_KEYWORDS,
    trailer_patterns: tuple[str, ...] = DEFAULT_TRAILER_PATTERNS,
) -> CodeDocument:
    """Drop a leading license/copyright comment block and trailing metadata lines.

    The leading run of blank-or-comment lines is removed only when it
    mentions one of ``header_keywords`` (case-insensitive).  Trailing
    comment lines are removed only when they match a ``trailer_patterns``
    regex.  Everything between is untouched, so the surviving content is
    byte-identical to the original.  A document reduced to nothing is
    returned with empty content for downstream rejection.
    """
    lines = doc.content.splitlines(keepends=True)

    head_end = 0
    while head_end < len(lines) and _is_comment_or_blank(lines[head_end]):
        head_end += 1
    head_block = "".join(lines[:head_end]).lower()
    if head_end and any(kw in head_block for kw in header_keywords):
        lines = lines[head_end:]

    trailer_res = [re.compile(p, re.IGNORECASE) for p in trailer_patterns]
    while lines:
        last = lines[-1]
        if (
            _is_comment_or_blank(last)
            and last.strip()
            and any(r.search(last) for r in trailer_res)
        ):
            lines = lines[:-1]
        else:
            break

    new_content = "".join(lines)
    if new_content == doc.content:
        return doc
    return with_content(doc, new_content)


# ---------------------------------------------------------------------------
# distribution and sampling


def distribution_report(manifest: CorpusManifest) -> dict[str, float]:
    """Per-language token fractions, descending; fractions sum to 1."""
    if len(manifest) == 0:
        raise InputError("cannot report distribution of an empty manifest")
    totals = manifest.language_token_totals()
    grand = sum(totals.values())
    if grand == 0:
        raise InputError("manifest has zero tokens")
    items = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return {lang: count / grand for lang, count in items}


def weighted_sample(
    manifest: CorpusManifest,
    target_distribution: Mapping[str, float],
    total_tokens: int,
    seed: int,
) -> CorpusManifest:
    """Sample documents without replacement to approximate a language mix.

    For each language the greedy pass adds seeded-shuffled documents until
    the language's token total reaches ``fraction * total_tokens``, so the
    achieved share is within one document of the target.  Deterministic
    for a fixed seed.
    """
    import random

    frac_sum = sum(target_distribution.values())
    if abs(frac_sum - 1.0) > 1e-9:
        raise InputError(f"target fractions sum to {frac_sum!r}, expected 1.0")

    by_language: dict[str, list[CodeDocument]] = {}
    for d in manifest:
        by_language.setdefault(d.language, []).append(d)

    rng = random.Random(seed)
    chosen: list[CodeDocument] = []
    for language in sorted(target_distribution):
        fraction = target_distribution[language]
        if fraction <= 0:
            continue
        if language not in by_language:
            raise InputError(f"language {language!r} not present in the pool")
        pool = sorted(by_language[language], key=lambda d: d.doc_id)
        rng.shuffle(pool)
        target = fraction * total_tokens
        got = 0
        idx = 0
        while got < target:
            if idx >= len(pool):
                raise InputError(
                    f"pool exhausted for language {language!r}: "
                    f"short by {target - got:.0f} tokens"
                )
            chosen.append(pool[idx])
            got += pool[idx].token_count
            idx += 1

    provenance = dict(manifest.provenance)
    provenance["weighted_sample"] = {
        "seed": seed,
        "total_tokens": total_tokens,
        "target_distribution": dict(sorted(target_distribution.items())),
    }
    return manifest_from_documents(chosen, provenance)


# ---------------------------------------------------------------------------
# ingestion from directory trees, archives, and sidecar metadata

LANGUAGE_BY_EXTENSION = {
    ".py": "python",
    ".js": "javascript",
    ".ts": "typescript",
    ".tsx": "typescript",
    ".java": "java",
    ".c": "c",
    ".h": "c",
    ".cc": "cpp",
    ".cpp": "cpp",
    ".hpp": "cpp",
    ".cs": "csharp",
    ".go": "go",
    ".rs": "rust",
    ".rb": "ruby",
    ".php": "php",
    ".swift": "swift",
    ".kt": "kotlin",
    ".scala": "scala",
    ".sql": "sql",
    ".sh": "shell",
    ".bash": "shell",
    ".pl": "perl",
    ".pm": "perl",
    ".r": "r",
    ".lua": "lua",
    ".vue": "vue",
    ".html": "html",
    ".css": "css",
}


def load_sidecar_metadata(path: str | Path) -> dict[str, dict]:
    """Read JSON Lines metadata keyed by document path."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"metadata file not found: {path}")
    meta: dict[str, dict] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: bad metadata line: {exc}") from exc
            key = rec.get("path") or rec.get("doc_id")
            if not key:
                raise InputError(f"{path}:{lineno}: metadata record lacks 'path'")
            meta[str(key)] = rec
    return meta


def _iter_raw_files(input_path: Path) -> Iterator[tuple[str, bytes]]:
    if input_path.is_dir():
        for p in sorted(input_path.rglob("*")):
            if p.is_file():
                yield p.relative_to(input_path).as_posix(), p.read_bytes()
    elif zipfile.is_zipfile(input_path):
        with zipfile.ZipFile(input_path) as zf:
            for name in sorted(zf.namelist()):
                if not name.endswith("/"):
                    yield name, zf.read(name)
    elif tarfile.is_tarfile(input_path):
        with tarfile.open(input_path) as tf:
            for member in sorted(tf.getmembers(), key=lambda m: m.name):
                if member.isfile():
                    fh = tf.extractfile(member)
                    if fh is not None:
                        yield member.name, fh.read()
    else:
        raise InputError(f"input is neither a directory nor a supported archive: {input_path}")


def load_documents(
    input_path: str | Path,
    meta: Mapping[str, dict] | None = None,
    *,
    language_by_extension: Mapping[str, str] = LANGUAGE_BY_EXTENSION,
) -> tuple[list[CodeDocument], dict[str, int], list[str]]:
    """Read source files from a directory tree or archive.

    Returns ``(documents, skip_counts, diagnostics)``.  Files with
    unrecognized extensions or undecodable bytes are skipped and counted;
    malformed sidecar dates reject the document with a diagnostic.
    """
    input_path = Path(input_path)
    if not input_path.exists():
        raise InputError(f"input path not found: {input_path}")
    meta = meta or {}
    docs: list[CodeDocument] = []
    skips = {"unknown_extension": 0, "undecodable": 0, "bad_metadata": 0}
    diagnostics: list[str] = []

    for rel_name, raw in _iter_raw_files(input_path):
        ext = Path(rel_name).suffix.lower()
        rec = meta.get(rel_name, {})
        language = rec.get("language") or language_by_extension.get(ext)
        if language is None:
            skips["unknown_extension"] += 1
            continue
        try:
            content = raw.decode("utf-8")
        except UnicodeDecodeError:
            skips["undecodable"] += 1
            continue
        created_at = None
        created_raw = rec.get("created_at")
        if created_raw is not None:
            try:
                created_at = _parse_created(created_raw)
            except InputError as exc:
                skips["bad_metadata"] += 1
                diagnostics.append(f"{rel_name}: {exc}")
                continue
        repo_id = rec.get("repo_id") or rel_name.split("/")[0]
        docs.append(
            make_document(
                rel_name,
                content,
                repo_id=str(repo_id),
                language=str(language),
                created_at=created_at,
            )
        )
    return docs, skips, diagnostics


def _parse_created(value: object) -> date:
    if isinstance(value, str):
        try:
            return datetime.fromisoformat(value.replace("Z", "+00:00")).date()
        except ValueError:
            pass
        try:
            return date.fromisoformat(value)
        except ValueError as exc:
            raise InputError(f"malformed created_at {value!r}") from exc
    raise InputError(f"malformed created_at {value!r}")


# ---------------------------------------------------------------------------
# full pipeline


def build_corpus(
    documents: Iterable[CodeDocument],
    *,
    min_tokens: int = 128,
    window: tuple[date, date] | None = None,
    dedup: Mapping[str, object] | None = None,
    sample: Mapping[str, object] | None = None,
    seed: int = 0,
) -> tuple[CorpusManifest, dict[str, int]]:
    """Run the attrition stages and return the manifest plus stage counts.

    ``dedup`` takes ``bands``, ``rows``, ``threshold``, ``shingle_width``;
    ``sample`` takes ``target_distribution`` and ``total_tokens``.
    """
    from .minhash import lsh_dedup

    attrition: dict[str, int] = {}
    docs = sorted(documents, key=lambda d: d.doc_id)
    attrition["ingested"] = len(docs)

    stripped = [strip_boilerplate(d) for d in docs]
    nonempty = [d for d in stripped if d.content.strip()]
    attrition["empty_after_strip"] = len(stripped) - len(nonempty)

    kept = [d for d in nonempty if filter_min_tokens(d, min_tokens)]
    attrition["below_min_tokens"] = len(nonempty) - len(kept)

    if window is not None:
        dated = [d for d in kept if filter_timestamp(d, window)]
        attrition["outside_timestamp_window"] = len(kept) - len(dated)
        kept = dated

    manifest = manifest_from_documents(
        kept,
        {
            "filters": {
                "min_tokens": min_tokens,
                "window": [w.isoformat() for w in window] if window else None,
            },
            "seed": seed,
        },
    )

    if dedup is not None:
        before = len(manifest)
        manifest = lsh_dedup(
            manifest,
            bands=int(dedup.get("bands", 16)),
            rows=int(dedup.get("rows", 8)),
            threshold=float(dedup.get("threshold", 0.85)),
            shingle_width=int(dedup.get("shingle_width", 12)),
            seed=seed,
            workers=int(dedup.get("workers", 1)),
        )
        attrition["near_duplicates"] = before - len(manifest)

    if sample is not None:
        manifest = weighted_sample(
            manifest,
            sample["target_distribution"],
            int(sample["total_tokens"]),
            seed,
        )

    attrition["surviving"] = len(manifest)
    return manifest, attrition


def summarize_manifest(
    manifest: CorpusManifest, attrition: Mapping[str, int] | None = None
) -> dict:
    """Summary payload for the sidecar report."""
    return {
        "documents": len(manifest),
        "total_tokens": manifest.total_tokens,
        "total_chars": manifest.total_chars,
        "per_language_tokens": manifest.language_token_totals(),
        "per_language_fractions": distribution_report(manifest) if len(manifest) else {},
        "attrition": dict(attrition or {}),
        "provenance": dict(manifest.provenance),
    }
