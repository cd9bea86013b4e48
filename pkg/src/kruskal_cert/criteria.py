"""Uniqueness criteria, non-rank criteria and tensor rank lower bounds.

Every check returns a :class:`Certificate`.  Its witness lists the
inequalities ("clauses") that decide the verdict, each with the numbers that
went into it, so the verdict can be recomputed from the certificate alone
(:func:`revalidate`).  Subset-quantified checks record the first violating
subset in size-then-lexicographic order, or, when every subset passes, the
subset with the least slack.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from enum import Enum
from itertools import permutations
from math import comb
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .errors import ParameterError
from .linalg import Matrix, compound_matrix, coordinatize, khatri_rao, rank, rank_rows, rref
from .matroid import separator_search
from .subsets import iter_subsets, mask_of, set_partitions, tripartitions
from .tensor import (
    DimTable,
    ProductFamily,
    SymmetricFamily,
    _k_rank_vectors,
    family_sum,
    flattening_ranks,
    grouped_factors,
    k_rank_profile,
)

__all__ = [
    "Status",
    "Certificate",
    "BoundResult",
    "check_kruskal",
    "check_kgen",
    "check_reshaped_kgen",
    "check_reshaped_kruskal",
    "check_split_corollary",
    "check_low_rank_uniqueness",
    "tensor_rank_lb_subset",
    "tensor_rank_lb_mu",
    "tensor_rank_lb_flattening",
    "waring_rank_lb",
    "check_subpartition_interp",
    "check_nonrank_irreducible",
    "check_nonrank_general",
    "check_symmetric_nonrank",
    "check_condition_S",
    "check_condition_H",
    "check_condition_H_any",
    "check_condition_C",
    "dls_threshold",
    "check_dls_threshold",
    "check_dls_side_conditions",
    "revalidate",
    "CRITERIA",
]

UNIQUENESS_NOTE = "the sum of the family is its unique tensor rank decomposition"
SIDE_CONDITION_NOTE = (
    "a side condition holding does not by itself give uniqueness; "
    "Condition U must also hold, and it is not verified here"
)


class Status(str, Enum):
    CERTIFIED = "certified"
    HYPOTHESIS_FAILS = "hypothesis_fails"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class Certificate:
    criterion: str
    status: Status
    witness: Dict[str, Any]
    notes: str = ""

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED

    def to_json(self) -> Dict[str, Any]:
        return {
            "criterion": self.criterion,
            "status": self.status.value,
            "witness": self.witness,
            "notes": self.notes,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Certificate":
        return cls(data["criterion"], Status(data["status"]), data["witness"], data.get("notes", ""))


@dataclass(frozen=True)
class BoundResult:
    """A tensor (or Waring) rank lower bound.

    ``formula_value`` is the raw value of the bound's formula; ``lower_bound``
    is what it proves (at least 1 for a nonzero tensor).  When the bound's
    hypothesis fails, ``applicable`` is False and ``lower_bound`` is None.
    """

    lower_bound: Optional[int]
    method: str
    mu: Optional[int] = None
    lam: Optional[int] = None
    formula_value: Optional[int] = None
    applicable: bool = True
    details: Dict[str, Any] = dc_field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "applicable": self.applicable,
            "lower_bound": self.lower_bound,
            "formula_value": self.formula_value,
            "mu": self.mu,
            "lambda": self.lam,
            "details": self.details,
        }


# ---------------------------------------------------------------- clauses


def _holds(lhs: int, op: str, rhs: int) -> bool:
    if op == "<=":
        return lhs <= rhs
    if op == ">=":
        return lhs >= rhs
    if op == "==":
        return lhs == rhs
    raise ValueError(f"unknown relation {op!r}")


def _clause(label: str, lhs: int, op: str, rhs: int, **extra) -> Dict[str, Any]:
    out = {"label": label, "lhs": int(lhs), "op": op, "rhs": int(rhs)}
    out.update(extra)
    return out


def _clause_holds(c: Dict[str, Any]) -> bool:
    return _holds(c["lhs"], c["op"], c["rhs"])


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _certificate(criterion: str, clauses: List[Dict], quantifier: str = "all", notes: str = "",
                 preconditions: Optional[List[Dict]] = None, **extra) -> Certificate:
    witness: Dict[str, Any] = {"quantifier": quantifier, "clauses": clauses}
    if preconditions is not None:
        witness["preconditions"] = preconditions
    witness.update(extra)
    return Certificate(criterion, _status_of(witness), witness, notes)


def _status_of(witness: Dict[str, Any]) -> Status:
    pre = witness.get("preconditions")
    if pre is not None and not all(_clause_holds(c) for c in pre):
        return Status.NOT_APPLICABLE
    results = [_clause_holds(c) for c in witness["clauses"]]
    ok = all(results) if witness["quantifier"] == "all" else any(results)
    return Status.CERTIFIED if ok else Status.HYPOTHESIS_FAILS


# Per-subset inequalities: (|S|, per-mode dims of S, params) -> (lhs, rhs), read "lhs <= rhs".

def _sum_excess(dims: Sequence[int]) -> int:
    return sum(d - 1 for d in dims) + 1


def _rule_kgen(t, dims, prm):
    return 2 * t, _sum_excess(dims)


def _rule_low_rank(t, dims, prm):
    return t + min(t, prm["r"]), _sum_excess(dims)


def _rule_subpartition(t, dims, prm):
    return min(2 * t, t + prm["r"]), _sum_excess(dims)


def _rule_nonrank_irreducible(t, dims, prm):
    n, q, s, r = prm["n"], prm["q"], prm["s"], prm["r"]
    return 2 * t + max(0, (r - n) - _ceil_div(n - q + s, t) + 1), _sum_excess(dims)


def _rule_nonrank_general(t, dims, prm):
    n, q, s, r = prm["n"], prm["q"], prm["s"], prm["r"]
    return 2 * t + max(0, (r - n + q - s) - _ceil_div(n - q + s, t) + 1), _sum_excess(dims)


def _rule_condition_S(t, dims, prm):
    return 2 * t, sum(dims) - 2


def _rule_condition_H(t, dims, prm):
    o1, o2 = prm["others"]
    return min(t, prm["n"] - prm["d_pivot"] + 2), dims[o1] + dims[o2] - t


RULES: Dict[str, Callable] = {
    "kgen": _rule_kgen,
    "low_rank": _rule_low_rank,
    "subpartition": _rule_subpartition,
    "nonrank_irreducible": _rule_nonrank_irreducible,
    "nonrank_general": _rule_nonrank_general,
    "condition_S": _rule_condition_S,
    "condition_H": _rule_condition_H,
}


def _scan(F: ProductFamily, rule: str, params: Dict[str, Any], lo: int, hi: int,
          table: Optional[DimTable] = None, limit: Optional[int] = None) -> Tuple[Dict, int]:
    """First violating subset clause, else the tightest one; plus the count checked."""
    table = table or DimTable(F)
    fn = RULES[rule]
    tightest = None
    best = None
    count = 0
    for S in iter_subsets(F.n, lo, hi, limit):
        count += 1
        dims = table.mode_dims(mask_of(S))
        lhs, rhs = fn(len(S), dims, params)
        slack = rhs - lhs
        if best is None or slack < best:
            best = slack
            tightest = _clause(f"subset {list(S)}", lhs, "<=", rhs, subset=list(S), dims=list(dims))
            if slack < 0:
                break
    if tightest is None:
        tightest = _clause("no subsets in range", 0, "<=", 0)
    return tightest, count


def _subset_certificate(criterion: str, F: ProductFamily, rule: str, params: Dict[str, Any], lo: int,
                        hi: int, notes: str, limit: Optional[int] = None, table: Optional[DimTable] = None,
                        extra_clauses: Sequence[Dict] = ()) -> Certificate:
    clause, count = _scan(F, rule, params, lo, hi, table, limit)
    return _certificate(
        criterion,
        list(extra_clauses) + [clause],
        notes=notes,
        rule=rule,
        params=params,
        subset_range=[lo, hi],
        subsets_checked=count,
    )


def _require_m3_plus(F: ProductFamily) -> None:
    if F.m < 3:
        raise ParameterError(f"criterion needs m >= 3 modes, family has m={F.m}")
    if F.n < 2:
        raise ParameterError("criterion needs n >= 2 tensors")


def _require_m3(F: ProductFamily) -> None:
    if F.m != 3:
        raise ParameterError(f"criterion is defined for m = 3 only, family has m={F.m}")


def _nonzero(F: ProductFamily) -> bool:
    return any(family_sum(F))


# ---------------------------------------------------------------- uniqueness


def check_kruskal(F: ProductFamily) -> Certificate:
    """2n <= sum_j (k_j - 1) + 1."""
    _require_m3_plus(F)
    k = k_rank_profile(F).per_mode
    c = _clause("2n <= sum(k_j - 1) + 1", 2 * F.n, "<=", _sum_excess(k), k_ranks=list(k), n=F.n)
    return _certificate("kruskal", [c], notes=UNIQUENESS_NOTE, params={})


def check_kgen(F: ProductFamily, limit: Optional[int] = None) -> Certificate:
    """2|S| <= sum_j (d_j^S - 1) + 1 for every S with 2 <= |S| <= n."""
    _require_m3_plus(F)
    return _subset_certificate("kgen", F, "kgen", {}, 2, F.n, UNIQUENESS_NOTE, limit)


def check_reshaped_kgen(F: ProductFamily, strategy: str = "exhaustive",
                        partitions: Optional[Sequence[Sequence[Sequence[int]]]] = None,
                        limit: Optional[int] = None) -> Certificate:
    """For every S, some partition J_1..J_t of the modes has
    2|S| <= sum_i (d_{J_i}^S - 1) + 1."""
    _require_m3_plus(F)
    if strategy == "exhaustive":
        if F.m > 8:
            raise ParameterError("exhaustive partition search is capped at m <= 8")
        parts = set_partitions(F.m)
    elif strategy == "given":
        if not partitions:
            raise ParameterError("strategy 'given' needs a partition list")
        parts = []
        for p in partitions:
            blocks = tuple(sorted(tuple(sorted(set(b))) for b in p))
            if sorted(j for b in blocks for j in b) != list(range(F.m)) or any(not b for b in blocks):
                raise ParameterError(f"{p} is not a partition of the modes")
            parts.append(blocks)
    else:
        raise ParameterError(f"unknown strategy {strategy!r}")
    table = DimTable(F)
    found = []
    count = 0
    for S in iter_subsets(F.n, 2, F.n, limit):
        count += 1
        smask = mask_of(S)
        t = len(S)
        hit = None
        for p in parts:
            dims = [table.dim(smask, mask_of(b)) for b in p]
            if 2 * t <= _sum_excess(dims):
                hit = _clause(f"subset {list(S)}", 2 * t, "<=", _sum_excess(dims), subset=list(S),
                              partition=[list(b) for b in p], dims=dims)
                break
        if hit is None:
            failing = []
            for p in parts:
                dims = [table.dim(smask, mask_of(b)) for b in p]
                failing.append(_clause(f"subset {list(S)}", 2 * t, "<=", _sum_excess(dims), subset=list(S),
                                       partition=[list(b) for b in p], dims=dims))
            return _certificate("reshaped-kgen", failing, quantifier="any", notes=UNIQUENESS_NOTE,
                                params={"strategy": strategy}, subsets_checked=count,
                                exhausted="no partition of the modes satisfies the inequality for this subset")
        found.append(hit)
    return _certificate("reshaped-kgen", found, notes=UNIQUENESS_NOTE, params={"strategy": strategy},
                        subsets_checked=count)


def check_reshaped_kruskal(F: ProductFamily) -> Certificate:
    """Some tripartition J, K, L of the modes has 2n <= k_J + k_K + k_L - 2."""
    _require_m3_plus(F)
    if F.m > 12:
        raise ParameterError("tripartition search is capped at m <= 12")
    cache: Dict[Tuple[int, ...], int] = {}

    def kr(block):
        if block not in cache:
            cache[block] = _k_rank_vectors(grouped_factors(F, block), F.field)
        return cache[block]

    clauses = []
    for p in tripartitions(F.m):
        ks = [kr(b) for b in p]
        c = _clause("2n <= k_J + k_K + k_L - 2", 2 * F.n, "<=", sum(ks) - 2,
                    partition=[list(b) for b in p], k_ranks=ks)
        if _clause_holds(c):
            return _certificate("reshaped-kruskal", [c], quantifier="any", notes=UNIQUENESS_NOTE, params={})
        clauses.append(c)
    return _certificate("reshaped-kruskal", clauses, quantifier="any", notes=UNIQUENESS_NOTE, params={},
                        exhausted="no tripartition of the modes satisfies the inequality")


def check_split_corollary(F: ProductFamily) -> Certificate:
    """n <= sum_j (d_j - 1) + 1, which forces the family to split."""
    if F.n < 2:
        raise ParameterError("split check needs n >= 2 tensors")
    d = DimTable(F).full_dims()
    c = _clause("n <= sum(d_j - 1) + 1", F.n, "<=", _sum_excess(d), dims=list(d))
    extra: Dict[str, Any] = {}
    if _clause_holds(c):
        sep = separator_search(F.assembled_list())
        if sep is None:
            raise AssertionError("split inequality holds but no separator exists; arithmetic is broken")
        extra["separator"] = list(sep.S)
        extra["complement"] = list(sep.complement)
    return _certificate("split-corollary", [c], notes="the assembled family splits", params={}, **extra)


def check_low_rank_uniqueness(F: ProductFamily, r: int, limit: Optional[int] = None) -> Certificate:
    """|S| + min(|S|, r) <= sum_j (d_j^S - 1) + 1 for every S with 2 <= |S| <= n."""
    if not 0 <= r <= F.n:
        raise ParameterError(f"r={r} outside 0..{F.n}")
    note = (f"every tensor of rank at most {r} in the span of the family is, uniquely, "
            f"a combination of at most {r} members")
    return _subset_certificate("low-rank-uniqueness", F, "low_rank", {"r": r}, 2, F.n, note, limit)


# ---------------------------------------------------------------- rank bounds


def tensor_rank_lb_subset(F: ProductFamily, limit: Optional[int] = None) -> BoundResult:
    """Largest r + 1 (r < n) with |S| + min(|S|, r) <= sum(d_j^S - 1) + 1 for all S."""
    if F.n < 2:
        raise ParameterError("bound needs n >= 2 tensors")
    table = DimTable(F)
    r_max = F.n - 1
    binding = None
    for S in iter_subsets(F.n, 2, F.n, limit):
        t = len(S)
        room = _sum_excess(table.mode_dims(mask_of(S))) - t
        if room < t and room < r_max:
            r_max = room
            binding = list(S)
            if r_max < 0:
                break
    k = k_rank_profile(F).per_mode
    kspec = min(F.n, _sum_excess(k) + 1 - F.n)
    nonzero = _nonzero(F)
    if r_max >= 0:
        lb = r_max + 1
    else:
        lb = 1 if nonzero else 0
    return BoundResult(lb, "subset", formula_value=r_max + 1,
                       details={"r": r_max, "binding_subset": binding, "k_rank_bound": kspec,
                                "k_ranks": list(k)})


def tensor_rank_lb_mu(F: ProductFamily) -> BoundResult:
    """min{n, mu + sum(k_j - 1) + 2 - n} under k_i <= sum_{j != i}(k_j - 1) + 1."""
    if F.n < 2:
        raise ParameterError("bound needs n >= 2 tensors")
    k = k_rank_profile(F).per_mode
    d = DimTable(F).full_dims()
    total = sum(x - 1 for x in k)
    for i, ki in enumerate(k):
        if ki > total - (ki - 1) + 1:
            return BoundResult(None, "mu", applicable=False,
                               details={"violating_mode": i, "k_ranks": list(k), "dims": list(d)})
    gaps = [d[j] - k[j] for j in range(F.m)]
    mu = max(gaps[i] + gaps[j] for i in range(F.m) for j in range(F.m) if i != j)
    lam = total + 2
    value = min(F.n, mu + lam - F.n)
    floor = 1 if _nonzero(F) else 0
    return BoundResult(max(value, floor), "mu", mu=mu, lam=lam, formula_value=value,
                       details={"k_ranks": list(k), "dims": list(d)})


def tensor_rank_lb_flattening(F: ProductFamily) -> BoundResult:
    ranks = flattening_ranks(family_sum(F), F.mode_dims, F.field)
    return BoundResult(max(ranks), "flattening", formula_value=max(ranks), details={"mode_ranks": list(ranks)})


def waring_rank_lb(S: SymmetricFamily) -> BoundResult:
    """min{n, 2d + (m - 2)(k - 1) - n}."""
    value = min(S.n, 2 * S.d + (S.m - 2) * (S.k - 1) - S.n)
    from .tensor import symmetric_lift

    floor = 1 if any(family_sum(symmetric_lift(S))) else 0
    return BoundResult(max(value, floor), "waring", formula_value=value,
                       details={"d": S.d, "k": S.k, "m": S.m, "n": S.n})


# ---------------------------------------------------------------- non-rank


def check_subpartition_interp(F: ProductFamily, s: int, r: int, limit: Optional[int] = None) -> Certificate:
    """min{2|S|, |S| + r} <= sum(d_j^S - 1) + 1 for s + 1 <= |S| <= n."""
    if not 1 <= s <= F.n - 1:
        raise ParameterError(f"s={s} outside 1..{F.n - 1}")
    if not 0 <= r <= F.n:
        raise ParameterError(f"r={r} outside 0..{F.n}")
    note = (f"any decomposition into at most {r} product tensors shares with the family an "
            f"(s, l)-subpartition with s={s} and l = ceil(|S|/s)")
    return _subset_certificate("subpartition-interp", F, "subpartition", {"s": s, "r": r, "l": "ceil(|S|/s)"},
                               s + 1, F.n, note, limit)


def _check_qs(F: ProductFamily, q: int, s: int) -> None:
    if F.n < 2:
        raise ParameterError("criterion needs n >= 2 tensors")
    if not 1 <= q <= F.n - 1:
        raise ParameterError(f"q={q} outside 1..{F.n - 1}")
    if not 1 <= s <= q:
        raise ParameterError(f"s={s} outside 1..q={q}")


def check_nonrank_irreducible(F: ProductFamily, q: int, s: int, r: int, limit: Optional[int] = None) -> Certificate:
    """2|S| + max{0, (r-n) - ceil((n-q+s)/|S|) + 1} <= sum(d_j^S - 1) + 1,
    for n + 1 <= r <= n + ceil((n-q)/s)."""
    _check_qs(F, q, s)
    n = F.n
    hi = n + _ceil_div(n - q, s)
    if not n + 1 <= r <= hi:
        raise ParameterError(f"r={r} outside {n + 1}..{hi}")
    l = q // s
    note = (f"every irreducible pair of this family with an {r}-term decomposition has an "
            f"(s, l)-subpartition with s={s}, l={l}")
    return _subset_certificate("nonrank-irreducible", F, "nonrank_irreducible",
                               {"n": n, "q": q, "s": s, "r": r, "l": l}, s + 1, n, note, limit)


def check_nonrank_general(F: ProductFamily, q: int, s: int, r: int, limit: Optional[int] = None) -> Certificate:
    """2|S| + max{0, (r-n+q-s) - ceil((n-q+s)/|S|) + 1} <= sum(d_j^S - 1) + 1,
    for n + 1 <= r <= ceil((s+1)(n-q+s)/s) - 1."""
    _check_qs(F, q, s)
    n = F.n
    hi = _ceil_div((s + 1) * (n - q + s), s) - 1
    if not n + 1 <= r <= hi:
        raise ParameterError(f"r={r} outside {n + 1}..{hi}")
    l = q // s
    note = (f"every {r}-term decomposition shares with the family an (s, l)-subpartition "
            f"with s={s}, l={l}")
    return _subset_certificate("nonrank-general", F, "nonrank_general",
                               {"n": n, "q": q, "s": s, "r": r, "l": l}, s + 1, n, note, limit)


def check_symmetric_nonrank(S: SymmetricFamily, r: int) -> Certificate:
    """Unique among symmetric decompositions into at most r terms iff n + r + 1 <= m + 2d - 2."""
    if r < 0:
        raise ParameterError("r must be nonnegative")
    pre = [_clause("k-rank of base vectors >= 2", S.k, ">=", 2)]
    c = _clause("n + r + 1 <= m + 2d - 2", S.n + r + 1, "<=", S.m + 2 * S.d - 2, n=S.n, r=r, m=S.m, d=S.d)
    return _certificate(
        "symmetric-nonrank",
        [c],
        preconditions=pre,
        notes=f"unique symmetric decomposition into at most {r} terms",
        params={"r": r},
        waring_unique=2 * S.n + 1 <= S.m + 2 * S.d - 2,
        k=S.k,
    )


# ---------------------------------------------------------------- three-mode conditions


def _others(pivot: int) -> Tuple[int, int]:
    if pivot not in (0, 1, 2):
        raise ParameterError(f"pivot mode {pivot} outside 0..2")
    return tuple(j for j in range(3) if j != pivot)  # type: ignore[return-value]


def check_condition_S(F: ProductFamily, limit: Optional[int] = None) -> Certificate:
    """2|S| <= d_1^S + d_2^S + d_3^S - 2 for all S with 2 <= |S| <= n."""
    _require_m3(F)
    if F.n < 2:
        raise ParameterError("criterion needs n >= 2 tensors")
    return _subset_certificate("condition-s", F, "condition_S", {}, 2, F.n, UNIQUENESS_NOTE, limit)


def check_condition_H(F: ProductFamily, pivot_mode: int = 0, limit: Optional[int] = None) -> Certificate:
    """k_pivot >= 2 and d_o^S + d_o'^S - |S| >= min{|S|, n - d_pivot + 2} for all S."""
    _require_m3(F)
    if F.n < 2:
        raise ParameterError("criterion needs n >= 2 tensors")
    others = _others(pivot_mode)
    table = DimTable(F)
    kp = _k_rank_vectors(F.factors(pivot_mode), F.field)
    dp = table.full_dims()[pivot_mode]
    kc = _clause("k_pivot >= 2", kp, ">=", 2)
    params = {"pivot": pivot_mode, "others": list(others), "n": F.n, "d_pivot": dp}
    if kp < 2:
        return _certificate("condition-h", [kc], rule="condition_H", params=params)
    return _subset_certificate("condition-h", F, "condition_H", params, 2, F.n, "", limit, table, [kc])


def check_condition_H_any(F: ProductFamily, limit: Optional[int] = None) -> Certificate:
    """Condition H for some choice of pivot mode."""
    last = None
    for pivot in range(3):
        cert = check_condition_H(F, pivot, limit)
        if cert.certified:
            return cert
        last = cert if last is None else last
    return last  # type: ignore[return-value]


def check_condition_C(F: ProductFamily, pivot_mode: int = 0, budget: int = 2_000_000) -> Certificate:
    """k_pivot >= 2, min(d_o, d_o') >= n - d_pivot + 2 =: s, and the Khatri-Rao
    product of the s-th compound matrices of the other two factor matrices has
    full column rank C(n, s)."""
    _require_m3(F)
    o1, o2 = _others(pivot_mode)
    d = DimTable(F).full_dims()
    kp = _k_rank_vectors(F.factors(pivot_mode), F.field)
    n = F.n
    s = n - d[pivot_mode] + 2
    clauses = [_clause("k_pivot >= 2", kp, ">=", 2),
               _clause("min(d_o, d_o') >= n - d_pivot + 2", min(d[o1], d[o2]), ">=", s)]
    params = {"pivot": pivot_mode, "s": s}
    if all(_clause_holds(c) for c in clauses):
        rows = comb(F.mode_dims[o1], s) * comb(F.mode_dims[o2], s)
        cols = comb(n, s)
        if rows * cols > budget:
            raise ParameterError(f"compound matrix product of size {rows}x{cols} exceeds the budget {budget}")
        X1 = Matrix.from_columns(F.field, F.factors(o1), rows=F.mode_dims[o1])
        X2 = Matrix.from_columns(F.field, F.factors(o2), rows=F.mode_dims[o2])
        C = khatri_rao(compound_matrix(X1, s), compound_matrix(X2, s))
        clauses.append(_clause("rank(C_s) == C(n, s)", rank(C), "==", cols, shape=[C.rows, C.cols]))
    return _certificate("condition-c", clauses, notes=UNIQUENESS_NOTE, params=params)


def dls_threshold(F: ProductFamily) -> bool:
    """True when min{k_2,k_3} <= n-d_1+1, min{k_1,k_3} <= n-d_2+1 and
    min{k_1,k_2} <= n-d_3+1 all hold."""
    return check_dls_threshold(F).certified


def check_dls_threshold(F: ProductFamily) -> Certificate:
    _require_m3(F)
    k = k_rank_profile(F).per_mode
    d = DimTable(F).full_dims()
    n = F.n
    clauses = []
    for i in range(3):
        a, b = _others(i)
        clauses.append(_clause(f"min(k_{a}, k_{b}) <= n - d_{i} + 1", min(k[a], k[b]), "<=", n - d[i] + 1))
    return _certificate("dls-threshold", clauses, params={},
                        notes="all three hold: the compound-matrix criteria cannot apply",
                        k_ranks=list(k), dims=list(d))


def _k_rank_at_least_two(columns: Sequence[Sequence], field) -> bool:
    if len(columns) < 2 or any(not any(c) for c in columns):
        return False
    return _k_rank_vectors(columns, field) >= 2


def _condition4_rref(F: ProductFamily, tau: Sequence[int]) -> Tuple[bool, Dict[str, Any]]:
    f = F.field
    cols = [F.factors(0)[a] for a in tau]
    X = [[c[i] for c in cols] for i in range(F.mode_dims[0])]
    Y, pivots = rref(X, f)
    d1 = len(Y)
    info: Dict[str, Any] = {"tau": list(tau), "pivots": pivots}
    if pivots != list(range(d1)):
        info["failure"] = "leading columns are not independent"
        return False, info
    for a in range(d1 - 1):
        sub = [tuple(Y[i][c] for i in range(a, d1)) for c in range(a, F.n)]
        if not _k_rank_at_least_two(sub, f):
            info["failure"] = f"block starting at row {a} has k-rank below two"
            return False, info
    return True, info


def _condition4_quotient(F: ProductFamily, tau: Sequence[int]) -> bool:
    """Coordinate-free form: for each a < d_1 - 1, the images of x_{tau(a..n-1)}
    modulo span{x_{tau(0..a-1)}} have k-rank at least two."""
    f = F.field
    vecs = [F.factors(0)[a] for a in tau]
    d1 = rank_rows(vecs, f)
    for a in range(d1 - 1):
        killed = vecs[:a]
        basis, coords = coordinatize(killed + vecs[a:], f)
        # coordinates of the kept vectors modulo the span of the killed ones
        lead = [k for k, b in enumerate(basis) if b < a]
        keep = [k for k in range(len(basis)) if k not in lead]
        images = [tuple(c[k] for k in keep) for c in coords[a:]]
        if not _k_rank_at_least_two(images, f):
            return False
    return True


def check_dls_side_conditions(F: ProductFamily, which: int, subset: Optional[Sequence[int]] = None,
                              tau: Optional[Sequence[int]] = None, exhaustive: bool = False) -> Certificate:
    """Computable side conditions 1, 3 (clauses a and b), 4 and 5 of the
    compound-matrix uniqueness theorem; mode 0 plays the distinguished role."""
    _require_m3(F)
    if which in (2, 6):
        raise ParameterError(f"condition {which} quantifies over all coefficient vectors; "
                             "use the finite-field oracle")
    n = F.n
    k = k_rank_profile(F).per_mode
    table = DimTable(F)
    d = table.full_dims()
    crit = f"dls-side-{which}"
    if which == 1:
        c = _clause("k_1 + min(k_2, k_3 - 1) >= n + 1", k[0] + min(k[1], k[2] - 1), ">=", n + 1)
        return _certificate(crit, [c], notes=SIDE_CONDITION_NOTE, params={"which": 1})
    if which == 5:
        c = _clause("k_1 == d_1", k[0], "==", d[0])
        return _certificate(crit, [c], notes=SIDE_CONDITION_NOTE, params={"which": 5})
    if which == 3:
        def clauses_for(S):
            S = sorted(S)
            rest = [a for a in range(n) if a not in S]
            da = table.dim(S, [0]) if S else 0
            db = table.dim(rest, [1]) if rest else 0
            return [_clause("d_1^S == |S|", da, "==", len(S), subset=S),
                    _clause("d_2^{complement} == n - |S|", db, "==", n - len(S), subset=rest)]

        note = SIDE_CONDITION_NOTE + "; the quantified projection clause is checked only by the oracle"
        if subset is not None:
            if any(not 0 <= a < n for a in subset):
                raise ParameterError("subset indices out of range")
            return _certificate(crit, clauses_for(subset), notes=note, params={"which": 3, "subset": sorted(subset)})
        for S in iter_subsets(n, 0, d[0]):
            cl = clauses_for(S)
            if all(_clause_holds(c) for c in cl):
                return _certificate(crit, cl, notes=note, params={"which": 3, "subset": list(S)})
        return _certificate(crit, clauses_for(()), notes=note, params={"which": 3},
                            exhausted="no subset of size at most d_1 satisfies both clauses")
    if which == 4:
        if exhaustive:
            if n > 8:
                raise ParameterError("exhaustive permutation search is capped at n <= 8")
            taus = permutations(range(n))
        else:
            if tau is None:
                tau = list(range(n))
            if sorted(tau) != list(range(n)):
                raise ParameterError(f"{tau} is not a permutation of 0..{n - 1}")
            taus = [tuple(tau)]
        info: Dict[str, Any] = {}
        for t in taus:
            ok, info = _condition4_rref(F, t)
            if ok:
                c = _clause("echelon form [I | Z] with k-rank >= 2 blocks", 1, "==", 1, tau=list(t))
                return _certificate(crit, [c], notes=SIDE_CONDITION_NOTE,
                                    params={"which": 4, "exhaustive": exhaustive}, tau=list(t))
        c = _clause("echelon form [I | Z] with k-rank >= 2 blocks", 0, "==", 1, **info)
        return _certificate(crit, [c], notes=SIDE_CONDITION_NOTE, params={"which": 4, "exhaustive": exhaustive})
    raise ParameterError(f"unknown side condition {which}")


# ---------------------------------------------------------------- registry


def _sym_only(fn):
    def wrapped(family, **kw):
        if not isinstance(family, SymmetricFamily):
            raise ParameterError("criterion needs a symmetric family")
        return fn(family, **kw)

    return wrapped


def _product(family):
    from .tensor import symmetric_lift

    if isinstance(family, SymmetricFamily):
        return symmetric_lift(family)
    return family


CRITERIA: Dict[str, Callable[..., Certificate]] = {
    "kruskal": lambda F, **kw: check_kruskal(_product(F)),
    "kgen": lambda F, **kw: check_kgen(_product(F), **kw),
    "reshaped-kgen": lambda F, **kw: check_reshaped_kgen(_product(F), **kw),
    "reshaped-kruskal": lambda F, **kw: check_reshaped_kruskal(_product(F)),
    "split-corollary": lambda F, **kw: check_split_corollary(_product(F)),
    "low-rank-uniqueness": lambda F, **kw: check_low_rank_uniqueness(_product(F), **kw),
    "subpartition-interp": lambda F, **kw: check_subpartition_interp(_product(F), **kw),
    "nonrank-irreducible": lambda F, **kw: check_nonrank_irreducible(_product(F), **kw),
    "nonrank-general": lambda F, **kw: check_nonrank_general(_product(F), **kw),
    "symmetric-nonrank": _sym_only(lambda S, **kw: check_symmetric_nonrank(S, **kw)),
    "condition-s": lambda F, **kw: check_condition_S(_product(F), **kw),
    "condition-h": lambda F, **kw: check_condition_H(_product(F), **kw),
    "condition-h-any": lambda F, **kw: check_condition_H_any(_product(F), **kw),
    "condition-c": lambda F, **kw: check_condition_C(_product(F), **kw),
    "dls-threshold": lambda F, **kw: check_dls_threshold(_product(F)),
    "dls-side": lambda F, **kw: check_dls_side_conditions(_product(F), **kw),
}


def _recompute_dims(family: ProductFamily, clause: Dict[str, Any]) -> Optional[List[int]]:
    if "subset" not in clause or "dims" not in clause or not clause["subset"]:
        return None
    table = DimTable(family)
    S = clause["subset"]
    if "partition" in clause:
        return [table.dim(S, b) for b in clause["partition"]]
    return list(table.mode_dims(S))


def revalidate(cert: Certificate, family=None) -> bool:
    """Recompute the verdict from the recorded clauses.

    Rule-based clauses are re-derived from their recorded subset size and
    dims.  With ``family`` given, the dims are recomputed from the family as
    well, and the criterion is rerun to compare verdicts.
    """
    w = cert.witness
    rule = w.get("rule")
    for c in w["clauses"]:
        if rule and "subset" in c and "dims" in c and "partition" not in c:
            lhs, rhs = RULES[rule](len(c["subset"]), c["dims"], w["params"])
            if (lhs, rhs) != (c["lhs"], c["rhs"]):
                return False
        if "partition" in c and "subset" in c:
            t = len(c["subset"])
            if (c["lhs"], c["rhs"]) != (2 * t, _sum_excess(c["dims"])):
                return False
    if _status_of(w) is not cert.status:
        return False
    if family is None:
        return True
    product = _product(family)
    for c in w["clauses"]:
        dims = _recompute_dims(product, c)
        if dims is not None and dims != list(c["dims"]):
            return False
    params = {k: v for k, v in w.get("params", {}).items()}
    rerun = _rerun(cert.criterion, family, params)
    return rerun.status is cert.status


def _rerun(criterion: str, family, params: Dict[str, Any]) -> Certificate:
    if criterion.startswith("dls-side-"):
        which = params.get("which", int(criterion.rsplit("-", 1)[1]))
        kw: Dict[str, Any] = {"which": which}
        if which == 3 and "subset" in params:
            kw["subset"] = params["subset"]
        if which == 4:
            kw["exhaustive"] = params.get("exhaustive", False)
        return CRITERIA["dls-side"](family, **kw)
    fn = CRITERIA[criterion]
    keep = {
        "low-rank-uniqueness": ("r",),
        "subpartition-interp": ("s", "r"),
        "nonrank-irreducible": ("q", "s", "r"),
        "nonrank-general": ("q", "s", "r"),
        "symmetric-nonrank": ("r",),
        "condition-h": ("pivot",),
        "condition-c": ("pivot",),
        "reshaped-kgen": ("strategy",),
    }.get(criterion, ())
    kw = {k: params[k] for k in keep if k in params}
    if "pivot" in kw:
        kw["pivot_mode"] = kw.pop("pivot")
    if criterion == "reshaped-kgen" and kw.get("strategy") == "given":
        kw.pop("strategy")
    return fn(family, **kw)
