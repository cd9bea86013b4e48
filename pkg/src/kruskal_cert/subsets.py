"""Subset and set-partition enumeration in a fixed, reproducible order.

Subsets come out by increasing size and, within one size, in lexicographic
order of their sorted index tuples (the order of ``itertools.combinations``).
Full enumeration over n items is capped; the cap defaults to 22 and can be
raised through ``KRUSKAL_CERT_MAX_SUBSET_N`` or an explicit ``limit``.
"""

from __future__ import annotations

import os
from itertools import combinations
from typing import Iterator, List, Optional, Sequence, Tuple

from .errors import EnumerationCapError

__all__ = [
    "DEFAULT_MAX_SUBSET_N",
    "subset_cap",
    "check_cap",
    "iter_subsets",
    "mask_of",
    "indices_of",
    "set_partitions",
    "tripartitions",
]

DEFAULT_MAX_SUBSET_N = 22
CAP_ENV = "KRUSKAL_CERT_MAX_SUBSET_N"


def subset_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_SUBSET_N
    try:
        return int(raw)
    except ValueError as exc:
        raise EnumerationCapError(f"{CAP_ENV}={raw!r} is not an integer") from exc


def check_cap(n: int, limit: Optional[int] = None) -> None:
    cap = subset_cap() if limit is None else limit
    if n > cap:
        raise EnumerationCapError(
            f"n={n} exceeds the subset enumeration cap of {cap}; "
            f"set {CAP_ENV} or pass an explicit limit to proceed"
        )


def iter_subsets(n: int, min_size: int, max_size: int, limit: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """Subsets of range(n) with min_size <= |S| <= max_size, size then lex."""
    check_cap(n, limit)
    for k in range(max(min_size, 0), min(max_size, n) + 1):
        yield from combinations(range(n), k)


def mask_of(indices) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def indices_of(mask: int) -> Tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _partitions(items: Sequence[int]) -> Iterator[List[List[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def set_partitions(m: int, blocks: Optional[int] = None) -> List[Tuple[Tuple[int, ...], ...]]:
    """All set partitions of range(m), finest first, then lexicographic.

    Each partition is a tuple of sorted blocks, blocks ordered by their least
    element.  With ``blocks`` given, only partitions into that many blocks.
    """
    out = set()
    for part in _partitions(list(range(m))):
        if blocks is not None and len(part) != blocks:
            continue
        out.add(tuple(sorted(tuple(sorted(b)) for b in part)))
    return sorted(out, key=lambda p: (-len(p), p))


def tripartitions(m: int) -> List[Tuple[Tuple[int, ...], ...]]:
    return set_partitions(m, blocks=3)
