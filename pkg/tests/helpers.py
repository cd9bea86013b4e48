"""Shared builders and independent reference computations for the tests."""

from __future__ import annotations

import random
from typing import List, Sequence

from sympy import GF as SymGF
from sympy import Matrix as SymMatrix
from sympy.polys.matrices import DomainMatrix

from kruskal_cert.field import Field
from kruskal_cert.tensor import ProductFamily

__all__ = ["ref_rank", "random_family", "random_vector", "e"]


def ref_rank(rows: Sequence[Sequence], field: Field) -> int:
    """Rank computed by sympy, independent of the package's elimination."""
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    if field.p is None:
        return SymMatrix(rows).rank()
    dom = SymGF(field.p)
    return DomainMatrix([[dom(int(x)) for x in r] for r in rows], (len(rows), len(rows[0])), dom).rank()


def random_vector(rng: random.Random, d: int, field: Field, pool: Sequence[Sequence] = ()) -> tuple:
    """Nonzero vector; drawn from ``pool`` half the time to create coincidences."""
    if pool and rng.random() < 0.5:
        return tuple(rng.choice(pool))
    return field.random_vector(rng, d, bound=3)


def random_family(rng: random.Random, field: Field, n: int, dims: Sequence[int], pool_size: int = 3) -> ProductFamily:
    pools: List[List[tuple]] = [[field.random_vector(rng, d, bound=3) for _ in range(pool_size)] for d in dims]
    tensors = [[random_vector(rng, d, field, pools[j]) for j, d in enumerate(dims)] for _ in range(n)]
    coeffs = [field.random_element(rng, bound=3, nonzero=True) for _ in range(n)]
    return ProductFamily.from_factors(field, tensors, coeffs, mode_dims=dims)


def e(i: int, d: int) -> List[int]:
    v = [0] * d
    v[i] = 1
    return v
