"""Small shared helpers: hashing, seed derivation, parallel mapping, JSON."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

T = TypeVar("T")
U = TypeVar("U")


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def derive_seed(*parts) -> int:
    """Derive a 64-bit child seed from integer/string parts, reproducibly.

    SHA-256 based so the derivation is stable across platforms and Python
    versions, and child streams for distinct part tuples are independent.
    """
    token = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_key128(*parts) -> tuple[int, int]:
    """Like derive_seed but returns two 64-bit words (counter-RNG key)."""
    token = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return (
        int.from_bytes(digest[:8], "big"),
        int.from_bytes(digest[8:16], "big"),
    )


def parallel_map(fn: Callable[[T], U], items: Sequence[T], threads: int | None = 1) -> List[U]:
    """Order-preserving map, optionally fanned out over a thread pool.

    Results are always collected in input order, so output is independent
    of scheduling; reports built from it are reproducible for any thread
    count.
    """
    seq = list(items)
    if threads is None:
        threads = 1
    if threads <= 1 or len(seq) <= 1:
        return [fn(x) for x in seq]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, seq))


def dump_json(doc) -> str:
    """Canonical JSON rendering: sorted keys, two-space indent, newline."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n"
