"""Brute-force ground truth over small prime fields.

Nothing here calls the criteria or matroid engines; the oracle only uses
exact linear algebra and exhaustive enumeration, so it can be used to test
them.  All searches take a :class:`SearchBudget` and raise
:class:`BudgetExceeded` instead of truncating silently.

Decompositions of ``v`` into ``t`` product tensors are enumerated with one of
three strategies, chosen from the mode flattening ranks ``rho_j`` of ``v``:

* ``t == rho_j``: the complementary factors form a basis of the row space of
  the mode-j flattening, so it suffices to list the product tensors in that
  row space and solve for the mode-j factors.
* ``t == rho_j + 1``: enumerate multisets of mode-j factors; the remaining
  factors then form an affine family with one free direction, which is swept
  over all product tensors at once.
* otherwise: enumerate multisets of product directions and solve for the
  coefficients.

When ``t`` is the tensor rank, every factor lies in the column space of the
matching flattening, which shrinks the search spaces.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement, product
from math import comb, prod
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BudgetExceeded, ParameterError
from .field import Field
from .linalg import coordinatize, kron_vec, nullspace, rank_rows, rref, solve
from .tensor import ProductFamily, ProductTensor, SymmetricFamily, canonical_form, family_sum

__all__ = [
    "SearchBudget",
    "DecompositionSet",
    "UniquenessReport",
    "ConditionUReport",
    "SubpartitionWitness",
    "enumerate_product_directions",
    "brute_force_rank",
    "all_decompositions",
    "uniqueness_bruteforce",
    "symmetric_uniqueness_bruteforce",
    "condition_U_bruteforce",
    "dls_condition_oracle",
    "subpartition_verify",
    "is_reducible",
    "rank_deficient_subset_search",
]

Term = ProductTensor
Key = Tuple


@dataclass(frozen=True)
class SearchBudget:
    """Caps on brute-force work; ``max_candidates`` counts enumerated candidates."""

    max_candidates: int = 20_000_000
    max_rank: Optional[int] = None
    time_limit: Optional[float] = None


class _Meter:
    def __init__(self, budget: SearchBudget):
        self.budget = budget
        self.used = 0
        self.start = time.monotonic()
        self.lower_bound: Optional[int] = None

    def consume(self, k: int) -> None:
        self.used += k
        if self.used > self.budget.max_candidates:
            raise BudgetExceeded(
                f"search budget of {self.budget.max_candidates} candidates exceeded",
                self.lower_bound,
                self.used,
            )
        limit = self.budget.time_limit
        if limit is not None and time.monotonic() - self.start > limit:
            raise BudgetExceeded(f"time limit of {limit}s exceeded", self.lower_bound, self.used)


@dataclass(frozen=True)
class DecompositionSet:
    target: Tuple
    r: int
    solutions: Tuple[ProductFamily, ...]
    consumed: int = 0

    def __len__(self) -> int:
        return len(self.solutions)


@dataclass(frozen=True)
class UniquenessReport:
    unique: bool
    rank: Optional[int]
    r_max: int
    counterexample: Optional[ProductFamily] = None
    consumed: int = 0

    def __bool__(self) -> bool:
        return self.unique


@dataclass(frozen=True)
class ConditionUReport:
    holds: bool
    violating_alpha: Optional[Tuple[int, ...]] = None
    reason: str = ""
    checked: int = 0

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class SubpartitionWitness:
    """Pairs (Q_p, R_p) of index sets with equal partial sums."""

    pairs: Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]
    s: int
    l: int
    irreducible: bool = True
    consumed: int = 0


# ---------------------------------------------------------------- mod-p helpers


def _require_prime(field: Field) -> int:
    if field.p is None:
        raise ParameterError("the oracle works over GF(p) only")
    if field.p >= 1 << 31:
        raise ParameterError("the oracle needs p < 2**31")
    return field.p


def _inv(a: int, p: int) -> int:
    return pow(int(a) % p, p - 2, p)


def _proj_count(dim: int, p: int) -> int:
    return (p**dim - 1) // (p - 1)


def _proj_points(dim: int, p: int) -> np.ndarray:
    """Projective points of GF(p)^dim, first nonzero coordinate 1."""
    rows = []
    for lead in range(dim):
        for tail in product(range(p), repeat=dim - lead - 1):
            rows.append((0,) * lead + (1,) + tail)
    return np.array(rows, dtype=np.int64).reshape(-1, dim)


def _normalize_rows(A: np.ndarray, p: int) -> np.ndarray:
    out = A % p
    for i in range(out.shape[0]):
        nz = np.flatnonzero(out[i])
        if nz.size:
            out[i] = out[i] * _inv(out[i, nz[0]], p) % p
    return out


def _subspace_points(basis: Sequence[Sequence[int]], p: int) -> np.ndarray:
    """Normalized projective points of the span of ``basis`` (rows)."""
    B = np.array(basis, dtype=np.int64)
    C = _proj_points(B.shape[0], p)
    return _normalize_rows(C @ B % p, p)


def _flatten(v: np.ndarray, dims: Sequence[int], j: int) -> np.ndarray:
    return np.moveaxis(v.reshape(tuple(dims)), j, 0).reshape(dims[j], -1)


def _product_mask(A: np.ndarray, dims: Sequence[int], p: int) -> np.ndarray:
    """Rows of A that are nonzero product tensors of shape ``dims``."""
    ok = (A % p != 0).any(axis=1)
    B = A.shape[0]
    if len(dims) <= 1 or B == 0:
        return ok
    T = A.reshape((B,) + tuple(dims))
    for i in range(len(dims) - 1):
        M = np.moveaxis(T, 1 + i, 1).reshape(B, dims[i], -1)
        minors = M[:, :, None, :, None] * M[:, None, :, None, :] - M[:, :, None, None, :] * M[:, None, :, :, None]
        ok &= ~(minors.reshape(B, -1) % p).any(axis=1)
    return ok


def _membership(Q: np.ndarray, dims: Sequence[int], p: int):
    """Fast test for rows lying in the set Q of all nonzero product tensors."""
    N = Q.shape[1]
    if N * np.log2(p) >= 62:
        return lambda A: _product_mask(A, dims, p)
    weights = p ** np.arange(N, dtype=np.int64)
    if p**N <= 1 << 25:
        table = np.zeros(p**N, dtype=bool)
        table[Q @ weights] = True
        return lambda A: table[(A % p) @ weights]
    codes = np.sort(Q @ weights)

    def test(A: np.ndarray) -> np.ndarray:
        c = (A % p) @ weights
        pos = np.minimum(np.searchsorted(codes, c), len(codes) - 1)
        return codes[pos] == c

    return test


def _factorize(vec: np.ndarray, dims: Sequence[int], p: int) -> Tuple[List[Tuple[int, ...]], int]:
    """Normalized factors and coefficient of a product tensor given as a vector."""
    T = vec.reshape(tuple(dims)) % p
    idx = tuple(int(i) for i in np.argwhere(T != 0)[0])
    factors = []
    scale = 1
    for i in range(len(dims)):
        sl = list(idx)
        sl[i] = slice(None)
        f = T[tuple(sl)]
        lead = int(f[np.flatnonzero(f)[0]])
        f = f * _inv(lead, p) % p
        factors.append(tuple(int(x) for x in f))
        scale = scale * int(f[idx[i]]) % p
    coeff = int(T[idx]) * _inv(scale, p) % p
    return factors, coeff


def _term(y: np.ndarray, z: np.ndarray, j: int, cdims: Sequence[int], p: int) -> Term:
    """Product tensor with mode-j factor y and complementary part z."""
    zf, coeff = _factorize(z, cdims, p)
    lead = int(y[np.flatnonzero(y % p)[0]]) % p
    yf = tuple(int(x) for x in (y * _inv(lead, p) % p))
    factors = zf[:j] + [yf] + zf[j:]
    return ProductTensor(tuple(factors), coeff * lead % p)


def _key_of(terms: Sequence[Term]) -> Key:
    return tuple(sorted((t.factors, t.coeff) for t in terms))


def _matrix_inverse(C: np.ndarray, field: Field) -> Optional[np.ndarray]:
    t = C.shape[0]
    aug = [list(map(int, C[i])) + [1 if k == i else 0 for k in range(t)] for i in range(t)]
    R, piv = rref(aug, field)
    if piv[:t] != list(range(t)):
        return None
    return np.array([row[t:] for row in R[:t]], dtype=np.int64)


def _column_space(M: np.ndarray, field: Field) -> List[List[int]]:
    R, _ = rref([list(map(int, col)) for col in M.T], field)
    return [list(map(int, r)) for r in R]


def _flattening_ranks(v: np.ndarray, dims: Sequence[int], field: Field) -> List[int]:
    return [rank_rows(_flatten(v, dims, j).tolist(), field) for j in range(len(dims))]


def _all_products(dims: Sequence[int], p: int, meter: _Meter, scaled: bool) -> np.ndarray:
    """All product directions (or, if ``scaled``, all nonzero product tensors) as rows."""
    count = prod(_proj_count(d, p) for d in dims) * ((p - 1) if scaled else 1)
    meter.consume(count)
    out = np.ones((1, 1), dtype=np.int64)
    for d in dims:
        P = _proj_points(d, p)
        out = (out[:, None, :, None] * P[None, :, None, :]).reshape(out.shape[0] * P.shape[0], -1)
    if scaled:
        out = (np.arange(1, p, dtype=np.int64)[:, None, None] * out[None]).reshape(-1, out.shape[1]) % p
    return out


# ---------------------------------------------------------------- decomposition strategies


def _by_row_space(v, dims, j, t, field, meter) -> Iterator[List[Term]]:
    p = field.p
    M = _flatten(v, dims, j)
    R, piv = rref(M.tolist(), field)
    Rn = np.array(R, dtype=np.int64)
    A = M[:, piv]
    cdims = [d for i, d in enumerate(dims) if i != j]
    meter.consume(_proj_count(t, p))
    C = _proj_points(t, p)
    W = C @ Rn % p
    mask = _product_mask(W, cdims, p)
    Cg, Wg = C[mask], W[mask]
    meter.consume(comb(len(Cg), t))
    for sub in combinations(range(len(Cg)), t):
        inv = _matrix_inverse(Cg[list(sub)], field)
        if inv is None:
            continue
        Y = A @ inv % p
        yield [_term(Y[:, b], Wg[sub[b]], j, cdims, p) for b in range(t)]


def _solve_right(Y: np.ndarray, M: np.ndarray, field: Field):
    """Z0 (t x N) with Y Z0 = M and a kernel basis of Y, or None."""
    t = Y.shape[1]
    rows = [list(map(int, Y[i])) + list(map(int, M[i])) for i in range(Y.shape[0])]
    R, piv = rref(rows, field)
    if any(c >= t for c in piv):
        return None
    Z0 = np.zeros((t, M.shape[1]), dtype=np.int64)
    for r, c in enumerate(piv):
        Z0[c] = R[r][t:]
    K = nullspace(Y.tolist(), field, t)
    return Z0, np.array(K, dtype=np.int64).reshape(-1, t).T


def _by_kernel(v, dims, j, t, field, meter, minimal) -> Iterator[List[Term]]:
    p = field.p
    M = _flatten(v, dims, j)
    cdims = [d for i, d in enumerate(dims) if i != j]
    if minimal:
        pts = _subspace_points(_column_space(M, field), p)
    else:
        meter.consume(_proj_count(dims[j], p))
        pts = _proj_points(dims[j], p)
    Q = _all_products(cdims, p, meter, scaled=True)
    is_product = _membership(Q, cdims, p)
    # one candidate per multiset of mode-j factors; each is swept in a single vectorized pass
    meter.consume(comb(len(pts) + t - 1, t))
    for combo in combinations_with_replacement(range(len(pts)), t):
        Y = pts[list(combo)].T
        sol = _solve_right(Y, M, field)
        if sol is None:
            continue
        Z0, K = sol
        if K.shape[1] == 0:
            if is_product(Z0).all():
                yield [_term(Y[:, b], Z0[b], j, cdims, p) for b in range(t)]
            continue
        if K.shape[1] > 1:
            raise AssertionError("kernel of dimension above one cannot contain the flattening")
        kappa = K[:, 0] % p
        b0 = int(np.flatnonzero(kappa)[0])
        Wc = (Q - Z0[b0]) * _inv(kappa[b0], p) % p
        alive = np.arange(len(Q))
        for b in range(t):
            if b == b0 or alive.size == 0:
                continue
            rows = (Z0[b] + kappa[b] * Wc[alive]) % p
            alive = alive[is_product(rows)]
        for q in alive:
            Z = (Z0 + kappa[:, None] * Wc[q][None, :]) % p
            yield [_term(Y[:, b], Z[b], j, cdims, p) for b in range(t)]


def _affine_solutions(Dt: np.ndarray, v: np.ndarray, field: Field, meter: _Meter) -> Iterator[np.ndarray]:
    """All c with Dt c = v (Dt is N x t)."""
    p = field.p
    t = Dt.shape[1]
    c0 = solve(Dt.tolist(), v.tolist(), field, t)
    if c0 is None:
        return
    K = nullspace(Dt.tolist(), field, t)
    c0 = np.array(c0, dtype=np.int64)
    if not K:
        yield c0
        return
    K = np.array(K, dtype=np.int64)
    meter.consume(p ** len(K))
    for coeffs in product(range(p), repeat=len(K)):
        yield (c0 + np.array(coeffs, dtype=np.int64) @ K) % p


def _by_directions(v, dims, t, field, meter, minimal) -> Iterator[List[Term]]:
    p = field.p
    per_mode = []
    for j, d in enumerate(dims):
        if minimal:
            per_mode.append(_subspace_points(_column_space(_flatten(v, dims, j), field), p))
        else:
            per_mode.append(_proj_points(d, p))
    count = prod(len(P) for P in per_mode)
    meter.consume(count)
    dirs = []
    facs = []
    for choice in product(*[range(len(P)) for P in per_mode]):
        fs = [per_mode[j][c] for j, c in enumerate(choice)]
        facs.append(tuple(tuple(int(x) for x in f) for f in fs))
        dirs.append(kron_vec([f.tolist() for f in fs], field))
    D = np.array(dirs, dtype=np.int64)
    chooser = combinations if minimal else combinations_with_replacement
    total = comb(len(D), t) if minimal else comb(len(D) + t - 1, t)
    meter.consume(total)
    for combo in chooser(range(len(D)), t):
        for c in _affine_solutions(D[list(combo)].T, v, field, meter):
            if (c % p == 0).any():
                continue
            yield [ProductTensor(facs[i], int(c[b])) for b, i in enumerate(combo)]


def _iter_decompositions(v: np.ndarray, dims: Sequence[int], t: int, field: Field, meter: _Meter,
                         minimal: bool) -> Iterator[List[Term]]:
    """All t-term decompositions (as lists of normalized terms, possibly repeated)."""
    if t == 0:
        if not (v % field.p).any():
            yield []
        return
    ranks = _flattening_ranks(v, dims, field)
    if t < max(ranks):
        return
    p = field.p
    exact = [j for j in range(len(dims)) if ranks[j] == t]
    if exact:
        j = min(exact, key=lambda i: (prod(dims) // dims[i], i))
        yield from _by_row_space(v, dims, j, t, field, meter)
        return
    near = [j for j in range(len(dims)) if ranks[j] == t - 1]
    if near:
        def cost(i):
            src = _proj_count(ranks[i] if minimal else dims[i], p)
            rest = prod(_proj_count(d, p) for k, d in enumerate(dims) if k != i)
            return comb(src + t - 1, t) * rest

        j = min(near, key=lambda i: (cost(i), i))
        yield from _by_kernel(v, dims, j, t, field, meter, minimal)
        return
    yield from _by_directions(v, dims, t, field, meter, minimal)


# ---------------------------------------------------------------- public operations


def _as_array(v: Sequence, field: Field) -> np.ndarray:
    return np.array([int(field(x)) for x in v], dtype=np.int64)


def enumerate_product_directions(mode_dims: Sequence[int], field: Field,
                                 budget: SearchBudget = SearchBudget()) -> List[ProductTensor]:
    """One representative per projective class of product tensors."""
    p = _require_prime(field)
    count = prod(_proj_count(d, p) for d in mode_dims)
    if count > budget.max_candidates:
        raise BudgetExceeded(f"{count} product directions exceed the budget {budget.max_candidates}")
    per_mode = [[tuple(int(x) for x in row) for row in _proj_points(d, p)] for d in mode_dims]
    return [ProductTensor(tuple(fs)) for fs in product(*per_mode)]


def _default_max_rank(dims: Sequence[int]) -> int:
    total = prod(dims)
    return min(total // d for d in dims)


def _rank_search(v: np.ndarray, dims: Sequence[int], field: Field, meter: _Meter,
                 max_rank: Optional[int]) -> Optional[int]:
    """Exact rank, or None when it exceeds ``max_rank``."""
    p = field.p
    if not (v % p).any():
        return 0
    cap = _default_max_rank(dims) if max_rank is None else max_rank
    for t in range(max(_flattening_ranks(v, dims, field)), cap + 1):
        meter.lower_bound = t
        for _ in _iter_decompositions(v, dims, t, field, meter, minimal=True):
            return t
    return None


def brute_force_rank(v: Sequence, mode_dims: Sequence[int], field: Field,
                     budget: SearchBudget = SearchBudget()) -> int:
    """Exact tensor rank of v over GF(p)."""
    _require_prime(field)
    meter = _Meter(budget)
    r = _rank_search(_as_array(v, field), mode_dims, field, meter, budget.max_rank)
    if r is None:
        raise BudgetExceeded(f"rank exceeds max_rank={budget.max_rank}", (budget.max_rank or 0) + 1, meter.used)
    return r


def _decompositions(v: np.ndarray, dims, r: int, field: Field, meter: _Meter) -> Iterator[Tuple[int, List[Term]]]:
    found_smaller = False
    for t in range(0, r + 1):
        minimal = not found_smaller
        seen = False
        for terms in _iter_decompositions(v, dims, t, field, meter, minimal):
            seen = True
            yield t, terms
        found_smaller = found_smaller or seen


def all_decompositions(v: Sequence, mode_dims: Sequence[int], r: int, field: Field,
                       budget: SearchBudget = SearchBudget()) -> DecompositionSet:
    """All multisets of at most r nonzero product tensors summing to v."""
    _require_prime(field)
    meter = _Meter(budget)
    arr = _as_array(v, field)
    seen: Dict[Key, List[Term]] = {}
    for _, terms in _decompositions(arr, mode_dims, r, field, meter):
        if terms:
            seen.setdefault(_key_of(terms), terms)
    sols = tuple(
        ProductFamily(field, tuple(mode_dims), tuple(sorted(terms, key=lambda x: (x.factors, x.coeff))))
        for _, terms in sorted(seen.items())
    )
    return DecompositionSet(tuple(int(x) for x in arr), r, sols, meter.used)


def _family_key(F: ProductFamily) -> Key:
    return _key_of([canonical_form(t, F.field) for t in F.tensors])


def uniqueness_bruteforce(F: ProductFamily, r_max: Optional[int] = None,
                          budget: SearchBudget = SearchBudget()) -> UniquenessReport:
    """Is F the only decomposition of its sum into at most r_max terms?"""
    field = F.field
    _require_prime(field)
    r_max = F.n if r_max is None else r_max
    meter = _Meter(budget)
    v = _as_array(family_sum(F), field)
    own = _family_key(F)
    rank = None
    for t, terms in _decompositions(v, F.mode_dims, r_max, field, meter):
        if rank is None:
            rank = t
        if _key_of(terms) != own:
            other = ProductFamily(field, F.mode_dims, tuple(terms)) if terms else None
            return UniquenessReport(False, rank, r_max, other, meter.used)
    return UniquenessReport(True, rank, r_max, None, meter.used)


def symmetric_uniqueness_bruteforce(S: SymmetricFamily, r_max: int,
                                    budget: SearchBudget = SearchBudget()) -> UniquenessReport:
    """Unique symmetric decomposition into at most r_max terms?

    Decompositions whose base vectors have k-rank 1 are exempt, as in the
    definition; this covers every one-term decomposition and every
    decomposition with two parallel base vectors.
    """
    field = S.field
    p = _require_prime(field)
    meter = _Meter(budget)
    m = S.m
    v = np.zeros(S.dim**m, dtype=np.int64)
    own = []
    for u, c in zip(S.base_vectors, S.coeffs):
        v = (v + int(c) * np.array(kron_vec([u] * m, field), dtype=np.int64)) % p
        arr = np.array(u, dtype=np.int64)
        lead = int(arr[np.flatnonzero(arr)[0]])
        own.append((tuple(int(x) for x in arr * _inv(lead, p) % p), int(c) * pow(lead, m, p) % p))
    own_key = tuple(sorted(own))
    if r_max >= 0 and not v.any():
        if own_key != ():
            return UniquenessReport(False, None, r_max, None, meter.used)
    meter.consume(_proj_count(S.dim, p))
    pts = _proj_points(S.dim, p)
    powers = np.array([kron_vec([pt.tolist()] * m, field) for pt in pts], dtype=np.int64)
    for r in range(2, r_max + 1):
        meter.consume(comb(len(pts), r))
        for combo in combinations(range(len(pts)), r):
            for c in _affine_solutions(powers[list(combo)].T, v, field, meter):
                if (c % p == 0).any():
                    continue
                key = tuple(sorted((tuple(int(x) for x in pts[i]), int(c[b])) for b, i in enumerate(combo)))
                if key != own_key:
                    fam = ProductFamily(field, (S.dim,) * m,
                                        tuple(ProductTensor((tuple(int(x) for x in pts[i]),) * m, int(c[b]))
                                              for b, i in enumerate(combo)))
                    return UniquenessReport(False, None, r_max, fam, meter.used)
    return UniquenessReport(True, None, r_max, None, meter.used)


def _others(pivot: int) -> Tuple[int, int]:
    if pivot not in (0, 1, 2):
        raise ParameterError(f"pivot mode {pivot} outside 0..2")
    return tuple(j for j in range(3) if j != pivot)  # type: ignore[return-value]


def _k_rank_small(vectors: Sequence[Sequence[int]], field: Field) -> int:
    n = len(vectors)
    for k in range(1, n + 1):
        if any(rank_rows([vectors[i] for i in c], field) < k for c in combinations(range(n), k)):
            return k - 1
    return n


def condition_U_bruteforce(F: ProductFamily, pivot_mode: int = 0, threshold: Optional[int] = None,
                           require_k: bool = True, budget: SearchBudget = SearchBudget()) -> ConditionUReport:
    """k_pivot >= 2 and rank[sum_a alpha_a x_{a,o} (x) x_{a,o'}] >= min{omega(alpha), threshold}
    for every alpha in GF(p)^n; threshold defaults to n - d_pivot + 2."""
    field = F.field
    p = _require_prime(field)
    if F.m != 3:
        raise ParameterError(f"Condition U is defined for m = 3 only, family has m={F.m}")
    n = F.n
    o1, o2 = _others(pivot_mode)
    if p**n > budget.max_candidates:
        raise BudgetExceeded(f"{p}^{n} coefficient vectors exceed the budget {budget.max_candidates}")
    piv = F.factors(pivot_mode)
    if require_k and _k_rank_small(piv, field) < 2:
        return ConditionUReport(False, None, "k-rank of the pivot mode is below two", 0)
    if threshold is None:
        threshold = n - rank_rows(piv, field) + 2
    X1 = np.array(F.factors(o1), dtype=np.int64)
    X2 = np.array(F.factors(o2), dtype=np.int64)
    outer = X1[:, :, None] * X2[:, None, :]
    checked = 0
    for alpha in product(range(p), repeat=n):
        checked += 1
        a = np.array(alpha, dtype=np.int64)
        omega = int((a != 0).sum())
        need = min(omega, threshold)
        if need <= 0:
            continue
        Msum = np.tensordot(a, outer, axes=1) % p
        if rank_rows(Msum.tolist(), field) < need:
            return ConditionUReport(False, tuple(alpha), "rank inequality fails", checked)
    return ConditionUReport(True, None, "", checked)


def _projection_clause(F: ProductFamily, S: Sequence[int], field: Field, meter: _Meter) -> Optional[Tuple[int, ...]]:
    """Violating coefficient vector (indexed by the complement of S), or None."""
    p = field.p
    n = F.n
    S = sorted(S)
    rest = [a for a in range(n) if a not in S]
    if not rest:
        return None
    x1 = F.factors(0)
    basis, coords = coordinatize([x1[a] for a in S] + [x1[a] for a in rest], field)
    keep = [k for k, b in enumerate(basis) if b >= len(S)]
    q = np.array([[c[k] for k in keep] for c in coords[len(S):]], dtype=np.int64).reshape(len(rest), len(keep))
    x3 = np.array([F.factors(2)[a] for a in rest], dtype=np.int64)
    outer = q[:, :, None] * x3[:, None, :]
    meter.consume(p ** len(rest))
    for alpha in product(range(p), repeat=len(rest)):
        a = np.array(alpha, dtype=np.int64)
        if int((a != 0).sum()) < 2:
            continue
        M = np.tensordot(a, outer, axes=1) % p
        if not M.any():
            return tuple(alpha)
        for b in range(len(rest)):
            qb = q[b] % p
            if not qb.any():
                continue
            if rank_rows(np.column_stack([qb, M]).T.tolist(), field) == 1:
                return tuple(alpha)
    return None


def dls_condition_oracle(F: ProductFamily, which: int, subset: Optional[Sequence[int]] = None,
                         budget: SearchBudget = SearchBudget()) -> ConditionUReport:
    """Quantified side conditions 2, 3 and 6 of the compound-matrix theorem, by enumeration."""
    field = F.field
    _require_prime(field)
    if F.m != 3:
        raise ParameterError("side conditions are defined for m = 3 only")
    n = F.n
    if which == 2:
        return condition_U_bruteforce(F, pivot_mode=1, budget=budget)
    if which == 6:
        k1 = _k_rank_small(F.factors(0), field)
        return condition_U_bruteforce(F, pivot_mode=0, threshold=n - k1 + 2, require_k=False, budget=budget)
    if which != 3:
        raise ParameterError(f"side condition {which} has no oracle; use the criteria engine")
    meter = _Meter(budget)
    d1 = rank_rows(F.factors(0), field)
    candidates = [tuple(sorted(subset))] if subset is not None else [
        S for k in range(0, d1 + 1) for S in combinations(range(n), k)
    ]
    last = None
    for S in candidates:
        rest = [a for a in range(n) if a not in S]
        if S and rank_rows([F.factors(0)[a] for a in S], field) != len(S):
            continue
        if rest and rank_rows([F.factors(1)[a] for a in rest], field) != len(rest):
            continue
        bad = _projection_clause(F, S, field, meter)
        if bad is None:
            return ConditionUReport(True, None, f"subset {list(S)} satisfies all three clauses", meter.used)
        last = bad
    return ConditionUReport(False, last, "no subset satisfies all three clauses", meter.used)


# ---------------------------------------------------------------- subpartitions


def _subset_sums(vectors: np.ndarray, max_size: int, p: int) -> Dict[bytes, List[Tuple[int, ...]]]:
    out: Dict[bytes, List[Tuple[int, ...]]] = {}
    n = vectors.shape[0]
    width = vectors.shape[1] if vectors.ndim == 2 else 0
    for k in range(0, max_size + 1):
        for S in combinations(range(n), k):
            s = vectors[list(S)].sum(axis=0) % p if S else np.zeros(width, dtype=np.int64)
            out.setdefault(s.tobytes(), []).append(S)
    return out


def _assembled(F: ProductFamily) -> np.ndarray:
    return np.array([[int(x) for x in v] for v in F.assembled], dtype=np.int64)


def _check_pair(Fx: ProductFamily, Fy: ProductFamily) -> int:
    if Fx.field != Fy.field or Fx.mode_dims != Fy.mode_dims:
        raise ParameterError("decompositions live in different spaces")
    p = _require_prime(Fx.field)
    if family_sum(Fx) != family_sum(Fy):
        raise ParameterError("the two decompositions have different sums")
    if Fx.n + Fy.n > 16:
        raise BudgetExceeded(f"n + r = {Fx.n + Fy.n} exceeds the exhaustive limit 16")
    return p


def is_reducible(Fx: ProductFamily, Fy: ProductFamily) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Q, R with |Q| > |R| and equal partial sums, or None when irreducible."""
    p = _check_pair(Fx, Fy)
    ys = _subset_sums(_assembled(Fy), Fy.n, p)
    xs = _subset_sums(_assembled(Fx), Fx.n, p)
    best = None
    for key, Qs in xs.items():
        Rs = ys.get(key)
        if not Rs:
            continue
        Q = max(Qs, key=len)
        R = min(Rs, key=len)
        if len(Q) > len(R) and (best is None or (len(Q) - len(R)) > (len(best[0]) - len(best[1]))):
            best = (Q, R)
    return best


def subpartition_verify(Fx: ProductFamily, Fy: ProductFamily, s: int, l: int) -> Optional[SubpartitionWitness]:
    """Search for l disjoint block pairs with max{1,|R|} <= |Q| <= s and equal sums."""
    p = _check_pair(Fx, Fy)
    if s < 1 or l < 1:
        raise ParameterError("s and l must be positive")
    X, Yv = _assembled(Fx), _assembled(Fy)
    ys = _subset_sums(Yv, min(s, Fy.n), p)
    pairs = []
    for k in range(1, min(s, Fx.n) + 1):
        for Q in combinations(range(Fx.n), k):
            key = (X[list(Q)].sum(axis=0) % p).tobytes()
            for R in ys.get(key, []):
                if len(R) <= len(Q):
                    pairs.append((Q, R))
    consumed = len(pairs)

    def dfs(start: int, usedx: int, usedy: int, chosen: List) -> Optional[List]:
        if len(chosen) == l:
            return chosen
        for i in range(start, len(pairs)):
            Q, R = pairs[i]
            mq = sum(1 << a for a in Q)
            mr = sum(1 << b for b in R)
            if mq & usedx or mr & usedy:
                continue
            out = dfs(i + 1, usedx | mq, usedy | mr, chosen + [(Q, R)])
            if out is not None:
                return out
        return None

    found = dfs(0, 0, 0, [])
    if found is None:
        return None
    return SubpartitionWitness(tuple(found), s, l, is_reducible(Fx, Fy) is None, consumed)


def rank_deficient_subset_search(F: ProductFamily, r_tilde: int,
                                 budget: SearchBudget = SearchBudget()) -> Optional[Tuple[int, ...]]:
    """First S (size, then lex) with r_tilde <= |S| <= n-1 and rank[sum_S x_a] < r_tilde."""
    field = F.field
    _require_prime(field)
    if not 1 <= r_tilde <= F.n - 1:
        raise ParameterError(f"r_tilde={r_tilde} outside 1..{F.n - 1}")
    meter = _Meter(budget)
    X = _assembled(F)
    p = field.p
    for k in range(r_tilde, F.n):
        for S in combinations(range(F.n), k):
            v = X[list(S)].sum(axis=0) % p
            if _rank_search(v, F.mode_dims, field, meter, r_tilde - 1) is not None:
                return S
    return None
