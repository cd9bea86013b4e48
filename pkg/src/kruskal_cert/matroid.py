"""Connectivity of vector multisets: separators, components, ears, circuits.

Everything works on the linear matroid of a :class:`VectorList`.  Vectors
are first replaced by their coordinates in a greedy basis of their span,
which keeps all dependencies and makes later rank computations cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ParameterError
from .linalg import Echelon, VectorList, coordinatize, rank_rows
from .tensor import ProductFamily

__all__ = [
    "ComponentPartition",
    "EarDecomposition",
    "Separator",
    "separator_search",
    "connected_components",
    "ear_decomposition",
    "is_circuit",
    "family_components",
    "separates",
]


@dataclass(frozen=True)
class Separator:
    S: Tuple[int, ...]
    complement: Tuple[int, ...]


@dataclass(frozen=True)
class ComponentPartition:
    blocks: Tuple[Tuple[int, ...], ...]

    def block_of(self, i: int) -> Tuple[int, ...]:
        return next(b for b in self.blocks if i in b)

    @property
    def connected(self) -> bool:
        return len(self.blocks) == 1


@dataclass(frozen=True)
class EarDecomposition:
    circuits: Tuple[Tuple[int, ...], ...]


def _check_nonzero(V: VectorList) -> None:
    for i, v in enumerate(V.vectors):
        if not any(v):
            raise ParameterError(f"vector {i} is zero")


def separates(V: VectorList, S: Sequence[int]) -> bool:
    """True iff span(V) = span(V_S) (+) span(V_{S^c})."""
    inside = set(S)
    a = [v for i, v in enumerate(V.vectors) if i in inside]
    b = [v for i, v in enumerate(V.vectors) if i not in inside]
    return rank_rows(a, V.field) + rank_rows(b, V.field) == rank_rows(list(V.vectors), V.field)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _fundamental_circuits(V: VectorList) -> Tuple[List[int], List[Tuple[int, ...]]]:
    """Greedy basis and the fundamental circuit of each non-basis element."""
    basis, coords = coordinatize(list(V.vectors), V.field)
    circuits = []
    bset = set(basis)
    for i, c in enumerate(coords):
        if i in bset:
            continue
        support = [basis[k] for k, x in enumerate(c) if x != 0]
        circuits.append(tuple(sorted(support + [i])))
    return basis, circuits


def _blocks_from_union_find(n: int, groups) -> Tuple[Tuple[int, ...], ...]:
    uf = _UnionFind(n)
    for g in groups:
        for x in g[1:]:
            uf.union(g[0], x)
    by_root: Dict[int, List[int]] = {}
    for i in range(n):
        by_root.setdefault(uf.find(i), []).append(i)
    return tuple(sorted(tuple(b) for b in by_root.values()))


def _exhaustive_separator(V: VectorList, ground: Sequence[int]) -> Optional[Tuple[int, ...]]:
    ground = list(ground)
    sub = V.subset(ground)
    n = len(ground)
    for k in range(1, n // 2 + 1):
        for S in combinations(range(n), k):
            if separates(sub, S):
                return tuple(ground[i] for i in S)
    return None


def _exhaustive_components(V: VectorList, ground: Sequence[int]) -> List[Tuple[int, ...]]:
    ground = tuple(ground)
    if len(ground) <= 1:
        return [ground]
    S = _exhaustive_separator(V, ground)
    if S is None:
        return [ground]
    rest = tuple(i for i in ground if i not in S)
    return _exhaustive_components(V, S) + _exhaustive_components(V, rest)


def _verify_partition(V: VectorList, blocks, circuits) -> bool:
    total = rank_rows(list(V.vectors), V.field)
    parts = sum(rank_rows([V.vectors[i] for i in b], V.field) for b in blocks)
    if parts != total:
        return False
    # every merge must come from a genuine circuit
    return all(is_circuit(V.subset(c)) for c in circuits)


def connected_components(V: VectorList) -> ComponentPartition:
    """Unique partition of V into connected components, blocks sorted."""
    _check_nonzero(V)
    n = len(V)
    if n == 0:
        return ComponentPartition(())
    _, circuits = _fundamental_circuits(V)
    blocks = _blocks_from_union_find(n, circuits)
    if not _verify_partition(V, blocks, circuits):
        blocks = tuple(sorted(_exhaustive_components(V, range(n))))
    return ComponentPartition(blocks)


def separator_search(V: VectorList) -> Optional[Separator]:
    """Smallest separator (ties: lexicographic), or None when V is connected.

    Separators are exactly the nonempty proper unions of components, so the
    smallest ones are the smallest single components.
    """
    if len(V) < 2:
        raise ParameterError("separator search needs at least two vectors")
    parts = connected_components(V)
    if parts.connected:
        return None
    S = min(parts.blocks, key=lambda b: (len(b), b))
    return Separator(S, tuple(i for i in range(len(V)) if i not in S))


def is_circuit(V: VectorList) -> bool:
    """Dependent, with every proper subset independent."""
    _check_nonzero(V)
    n = len(V)
    if n == 0:
        raise ParameterError("is_circuit needs at least one vector")
    if rank_rows(list(V.vectors), V.field) != n - 1:
        return False
    return all(rank_rows(list(sub), V.field) == n - 1 for sub in combinations(V.vectors, n - 1))


def ear_decomposition(V: VectorList) -> EarDecomposition:
    """Greedy ear decomposition of a connected multiset.

    C_1 is the fundamental circuit of the first dependent vector.  Given
    E_p, take a basis B of it and scan the remaining indices in ascending
    order, keeping those that stay independent of the previously kept ones;
    stop as soon as the kept u_q falls into span(B, u_1..u_{q-1}).  The next
    ear is the unique circuit of B, u_1..u_q through u_q.
    """
    _check_nonzero(V)
    n = len(V)
    if n < 2:
        raise ParameterError("an ear decomposition needs at least two vectors")
    if not connected_components(V).connected:
        raise ParameterError("vector list is not connected; decompose into components first")
    f = V.field
    _, coords = coordinatize(list(V.vectors), f)
    dim = len(coords[0])

    ech = Echelon(f, dim)
    first = None
    for i, c in enumerate(coords):
        if not ech.add(c, label=i):
            first = tuple(sorted(list(ech.reduce(c)[1]) + [i]))
            break
    assert first is not None, "connected lists with two or more vectors are dependent"
    circuits = [first]
    covered = set(first)

    while len(covered) < n:
        base = Echelon(f, dim)
        for i in sorted(covered):
            base.add(coords[i], label=i)
        alone = Echelon(f, dim)
        ear = None
        for c in sorted(set(range(n)) - covered):
            if not alone.add(coords[c], label=c):
                continue
            if not base.add(coords[c], label=c):
                support = base.reduce(coords[c])[1]
                ear = tuple(sorted(list(support) + [c]))
                break
        if ear is None:
            raise AssertionError("greedy ear search exhausted the ground set; the input splits")
        circuits.append(ear)
        covered |= set(ear)
    return EarDecomposition(tuple(circuits))


def family_components(F: ProductFamily) -> ComponentPartition:
    return connected_components(F.assembled_list())
