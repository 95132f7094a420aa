"""MinHash signatures and banded LSH near-duplicate removal.

Documents are shingled into overlapping character windows; each shingle
is hashed to 64 bits and run through seeded affine permutations.  The
fraction of matching signature components estimates the Jaccard
similarity of the shingle sets.  Banding groups signature rows so that
similar documents collide in at least one band with high probability;
candidate pairs are then verified with the exact shingle-set Jaccard
before anything is removed, so banding false positives never delete
documents.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .corpus import CorpusManifest, manifest_from_documents
from .errors import InputError


@dataclass(frozen=True)
class MinHashSignature:
    doc_id: str
    permutations: int
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != self.permutations:
            raise InputError(
                f"signature length {len(self.values)} != permutations {self.permutations}"
            )


def shingle_hashes(content: str, width: int) -> np.ndarray:
    """64-bit hashes of the distinct character shingles of ``content``."""
    if len(content) < width:
        raise InputError(
            f"document too short to shingle: {len(content)} chars < width {width}"
        )
    seen = {content[i : i + width] for i in range(len(content) - width + 1)}
    out = np.empty(len(seen), dtype=np.uint64)
    for i, sh in enumerate(sorted(seen)):
        digest = hashlib.blake2b(sh.encode("utf-8"), digest_size=8).digest()
        out[i] = int.from_bytes(digest, "big")
    return out


def _permutation_params(permutations: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2**63, size=permutations, dtype=np.uint64) * np.uint64(2) + np.uint64(1)
    b = rng.integers(0, 2**64, size=permutations, dtype=np.uint64)
    return a, b


def minhash_signature(
    doc, shingle_width: int = 12, permutations: int = 128, seed: int = 0
) -> MinHashSignature:
    """Signature over the document's character-shingle set.

    Identical shingle sets give identical signatures for the same seed;
    the per-component collision probability equals the sets' Jaccard
    similarity.
    """
    hashes = shingle_hashes(doc.content, shingle_width)
    a, b = _permutation_params(permutations, seed)
    # odd multiplier + wraparound mod 2**64 is a bijection on uint64
    permuted = a[None, :] * hashes[:, None] + b[None, :]
    values = permuted.min(axis=0)
    return MinHashSignature(doc.doc_id, permutations, tuple(int(v) for v in values))


def estimate_jaccard(sig_a: MinHashSignature, sig_b: MinHashSignature) -> float:
    """Fraction of matching signature components."""
    if sig_a.permutations != sig_b.permutations:
        raise InputError("signatures have different permutation counts")
    matches = sum(x == y for x, y in zip(sig_a.values, sig_b.values))
    return matches / sig_a.permutations


def exact_jaccard(content_a: str, content_b: str, shingle_width: int) -> float:
    """Exact Jaccard similarity of the two documents' shingle sets."""
    a = {content_a[i : i + shingle_width] for i in range(len(content_a) - shingle_width + 1)}
    b = {content_b[i : i + shingle_width] for i in range(len(content_b) - shingle_width + 1)}
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def lsh_candidate_pairs(
    signatures: list[MinHashSignature], bands: int, rows: int
) -> set[tuple[str, str]]:
    """Unordered doc_id pairs colliding in at least one band."""
    lengths = {s.permutations for s in signatures}
    if len(lengths) > 1:
        raise InputError(f"inconsistent signature lengths: {sorted(lengths)}")
    if lengths and bands * rows != lengths.pop():
        raise InputError(
            f"bands*rows = {bands * rows} does not match signature length"
        )
    pairs: set[tuple[str, str]] = set()
    for band in range(bands):
        buckets: dict[tuple[int, ...], list[str]] = {}
        lo, hi = band * rows, (band + 1) * rows
        for sig in signatures:
            buckets.setdefault(sig.values[lo:hi], []).append(sig.doc_id)
        for ids in buckets.values():
            if len(ids) > 1:
                ids = sorted(ids)
                for i in range(len(ids)):
                    for j in range(i + 1, len(ids)):
                        pairs.add((ids[i], ids[j]))
    return pairs


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # deterministic: smaller id becomes the root
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx


def lsh_dedup(
    manifest: CorpusManifest,
    *,
    bands: int = 16,
    rows: int = 8,
    threshold: float = 0.85,
    shingle_width: int = 12,
    seed: int = 0,
    workers: int = 1,
) -> CorpusManifest:
    """Remove near-duplicates; the lowest doc_id of each cluster survives.

    Candidate pairs from banding are verified with the exact shingle-set
    Jaccard, and clusters are the connected components of verified pairs
    at or above ``threshold``.  Exact duplicates always collide in every
    band, so their removal is certain.  Idempotent: a second pass removes
    nothing.
    """
    docs = list(manifest)
    if not docs:
        return manifest
    permutations = bands * rows

    # documents too short to shingle can only be exact duplicates of each other
    shingleable = [d for d in docs if len(d.content) >= shingle_width]
    short = [d for d in docs if len(d.content) < shingle_width]

    def _sig(doc):
        return minhash_signature(doc, shingle_width, permutations, seed)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            signatures = list(pool.map(_sig, shingleable))
    else:
        signatures = [_sig(d) for d in shingleable]

    by_id = {d.doc_id: d for d in docs}
    uf = _UnionFind([d.doc_id for d in docs])
    for id_a, id_b in sorted(lsh_candidate_pairs(signatures, bands, rows)):
        j = exact_jaccard(by_id[id_a].content, by_id[id_b].content, shingle_width)
        if j >= threshold:
            uf.union(id_a, id_b)

    short_by_content: dict[str, str] = {}
    for d in sorted(short, key=lambda d: d.doc_id):
        first = short_by_content.setdefault(d.content, d.doc_id)
        if first != d.doc_id:
            uf.union(first, d.doc_id)

    keep: dict[str, str] = {}
    for doc_id in sorted(by_id):
        root = uf.find(doc_id)
        keep.setdefault(root, doc_id)  # first (lowest) id per cluster wins
    survivors = [by_id[i] for i in sorted(keep.values())]

    provenance = dict(manifest.provenance)
    provenance["dedup"] = {
        "bands": bands,
        "rows": rows,
        "threshold": threshold,
        "shingle_width": shingle_width,
        "seed": seed,
        "removed": len(docs) - len(survivors),
    }
    return manifest_from_documents(survivors, provenance)
