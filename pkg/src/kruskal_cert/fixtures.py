"""Named example families with their expected properties.

Each fixture declares k-ranks, dims, certificate statuses and rank bounds;
``check_fixture`` recomputes all of them.  Claims that cannot be checked at
desk scale live in ``documented`` and are never asserted.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .criteria import (
    CRITERIA,
    tensor_rank_lb_flattening,
    tensor_rank_lb_mu,
    tensor_rank_lb_subset,
    waring_rank_lb,
)
from .field import QQ, Field
from .tensor import DimTable, ProductFamily, SymmetricFamily, k_rank_profile, symmetric_lift

__all__ = [
    "Fixture",
    "fixture_catalog",
    "get_fixture",
    "check_fixture",
    "identity_family",
    "identity_symmetric",
    "write_fixtures",
    "FIXTURE_VERSION",
]

FIXTURE_VERSION = "v1"

Family = Union[ProductFamily, SymmetricFamily]

BOUNDS = {
    "subset": tensor_rank_lb_subset,
    "mu": tensor_rank_lb_mu,
    "flattening": tensor_rank_lb_flattening,
    "waring": waring_rank_lb,
}


@dataclass(frozen=True)
class Fixture:
    name: str
    family: Family
    expected: Dict[str, Any] = dc_field(default_factory=dict)
    documented: Dict[str, Any] = dc_field(default_factory=dict)
    notes: str = ""


def _e(i: int, d: int) -> List[int]:
    v = [0] * d
    v[i] = 1
    return v


def _add(*vs: Sequence[int]) -> List[int]:
    return [sum(x) for x in zip(*vs)]


def identity_family(n: int, m: int = 3, field: Field = QQ) -> ProductFamily:
    """sum_a e_a^{(x) m} in (F^n)^{(x) m}."""
    return ProductFamily.from_factors(field, [[_e(a, n)] * m for a in range(n)], name=f"identity_{n}_{m}")


def identity_symmetric(n: int, m: int = 3, field: Field = QQ) -> SymmetricFamily:
    """sum_a e_a^{(x) m} as a symmetric family."""
    return SymmetricFamily(field, tuple(tuple(_e(a, n)) for a in range(n)), (1,) * n, m, f"identity_symmetric_{n}_{m}")


def _example_8_1() -> Fixture:
    e = lambda i: _e(i, 4)  # noqa: E731
    F = ProductFamily.from_factors(
        QQ,
        [[e(0)] * 3, [e(1)] * 3, [e(2)] * 3, [e(3)] * 3, [_add(e(1), e(2)), _add(e(1), e(3)), _add(e(0), e(3))]],
        name="example_8_1",
    )
    return Fixture(
        "example_8_1",
        F,
        {
            "n": 5, "m": 3, "k": [2, 2, 2], "d": [4, 4, 4],
            "statuses": {
                "kgen": ["certified", {}],
                "kruskal": ["hypothesis_fails", {}],
                "dls-threshold": ["certified", {}],
                "condition-s": ["certified", {}],
            },
        },
        notes="five tensors with all k-ranks 2; the generalized criterion certifies uniqueness where Kruskal's does not",
    )


def _tr_four() -> Fixture:
    e = lambda i: _e(i, 3)  # noqa: E731
    F = ProductFamily.from_factors(
        QQ,
        [[e(0)] * 3, [e(1)] * 3, [_add(e(0), e(1))] * 2 + [e(2)], [e(2)] * 2 + [_add(e(0), e(1), e(2))]],
        name="tr_four",
    )
    return Fixture("tr_four", F, {"n": 4, "m": 3, "bounds": {"mu": 4, "flattening": 3}},
                   notes="rank 4 is certified by the mu bound but not by flattenings")


def _tr_five() -> Fixture:
    F = _example_8_1().family
    return Fixture("tr_five", ProductFamily(F.field, F.mode_dims, F.tensors, "tr_five"),
                   {"n": 5, "m": 3, "bounds": {"subset": 5, "mu": 4}},
                   notes="rank 5 via the subset bound; the mu bound gives only 4")


def _ex_independent() -> Fixture:
    e6, e4 = (lambda i: _e(i, 6)), (lambda i: _e(i, 4))
    p, q = _add(e4(0), e4(1)), [1, -1, 0, 0]
    F = ProductFamily.from_factors(
        QQ,
        [[e6(a), e4(a), e4(a)] for a in range(4)] + [[e6(4), p, p], [e6(5), q, q]],
        name="ex_independent",
    )
    return Fixture(
        "ex_independent",
        F,
        {"n": 6, "m": 3, "k": [6, 2, 2], "d": [6, 4, 4], "bounds": {"mu": None}},
        documented={"rank": 5},
        notes="k-ranks are unbalanced, so the mu bound does not apply; its formula would give 7 against rank 5",
    )


def _identity(n: int, m: int) -> Fixture:
    statuses: Dict[str, Any] = {"kgen": ["certified", {}]}
    if m == 3 and n >= 3:
        statuses["nonrank-irreducible"] = ["certified", {"q": n - 2, "s": 1, "r": n + 1}]
    return Fixture(f"identity_{n}_{m}", identity_family(n, m),
                   {"n": n, "m": m, "k": [n] * m, "d": [n] * m, "statuses": statuses,
                    "bounds": {"flattening": n}})


def _identity_sym(n: int, m: int) -> Fixture:
    return Fixture(
        f"identity_symmetric_{n}_{m}",
        identity_symmetric(n, m),
        {"n": n, "m": m, "statuses": {
            "symmetric-nonrank": ["certified", {"r": m + n - 3}],
        }, "bounds": {"waring": n}},
    )


def fixture_catalog() -> Tuple[Fixture, ...]:
    """The full catalog, in a fixed order."""
    out = [_example_8_1(), _tr_four(), _tr_five(), _ex_independent()]
    out += [_identity(n, 3) for n in (2, 3, 4, 5)]
    out += [_identity(3, 4)]
    out += [_identity_sym(n, m) for m in (3, 4) for n in (2, 3, 4)]
    return tuple(out)


def get_fixture(name: str) -> Fixture:
    for fx in fixture_catalog():
        if fx.name == name:
            return fx
    raise KeyError(f"no fixture named {name!r}")


def check_fixture(fx: Fixture) -> List[str]:
    """Recompute every expected property; return the mismatches."""
    F = fx.family
    P = symmetric_lift(F) if isinstance(F, SymmetricFamily) else F
    exp = fx.expected
    bad: List[str] = []

    def cmp(label: str, got, want) -> None:
        if got != want:
            bad.append(f"{fx.name}: {label} = {got!r}, expected {want!r}")

    if "n" in exp:
        cmp("n", F.n, exp["n"])
    if "m" in exp:
        cmp("m", F.m, exp["m"])
    if "k" in exp:
        cmp("k", list(k_rank_profile(P).per_mode), exp["k"])
    if "d" in exp:
        cmp("d", list(DimTable(P).full_dims()), exp["d"])
    for cid, (status, params) in exp.get("statuses", {}).items():
        cmp(f"status[{cid}]", CRITERIA[cid](F, **params).status.value, status)
    for method, want in exp.get("bounds", {}).items():
        target = F if method == "waring" else P
        cmp(f"bound[{method}]", BOUNDS[method](target).lower_bound, want)
    return bad


def write_fixtures(directory: str) -> List[str]:
    """Write every fixture as a family file; return the written paths."""
    from .io import save_family

    os.makedirs(directory, exist_ok=True)
    paths = []
    for fx in fixture_catalog():
        path = os.path.join(directory, f"{fx.name}.json")
        extra: Dict[str, Optional[Any]] = {"expected": fx.expected}
        if fx.documented:
            extra["documented"] = fx.documented
        if fx.notes:
            extra["notes"] = fx.notes
        save_family(fx.family, path, fx.name, extra)
        paths.append(path)
    return paths
