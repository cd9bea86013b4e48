from __future__ import annotations

import random
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import e, random_family, ref_rank
from kruskal_cert import oracle
from kruskal_cert.criteria import check_condition_H
from kruskal_cert.errors import BudgetExceeded, ParameterError
from kruskal_cert.field import GF, QQ
from kruskal_cert.fixtures import identity_family
from kruskal_cert.tensor import ProductFamily, SymmetricFamily, family_sum, matricize


def matrix_identity(p):
    return ProductFamily.from_factors(GF(p), [[e(0, 2), e(0, 2)], [e(1, 2), e(1, 2)]])


def test_direction_counts():
    assert len(oracle.enumerate_product_directions((2, 2), GF(2))) == 9
    assert len(oracle.enumerate_product_directions((2, 3), GF(3))) == 4 * 13
    with pytest.raises(BudgetExceeded):
        oracle.enumerate_product_directions((4, 4, 4), GF(7), oracle.SearchBudget(max_candidates=100))
    with pytest.raises(ParameterError):
        oracle.enumerate_product_directions((2, 2), QQ)


def test_small_ranks():
    f = GF(2)
    assert oracle.brute_force_rank(family_sum(identity_family(2, 3, f)), (2, 2, 2), f) == 2
    assert oracle.brute_force_rank((1, 0, 0, 0, 0, 0, 0, 0), (2, 2, 2), f) == 1
    assert oracle.brute_force_rank((0,) * 8, (2, 2, 2), f) == 0
    # W tensor e1e1e2 + e1e2e1 + e2e1e1 has rank 3
    g = GF(3)
    W = ProductFamily.from_factors(g, [[e(0, 2), e(0, 2), e(1, 2)], [e(0, 2), e(1, 2), e(0, 2)],
                                       [e(1, 2), e(0, 2), e(0, 2)]])
    assert oracle.brute_force_rank(family_sum(W), (2, 2, 2), g) == 3


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5]))
def test_matrix_rank_equals_brute_force_rank(seed, p):
    rng = random.Random(seed)
    f = GF(p)
    dims = (rng.randint(1, 3), rng.randint(1, 3))
    F = random_family(rng, f, rng.randint(1, 4), dims)
    v = family_sum(F)
    assert oracle.brute_force_rank(v, dims, f) == ref_rank(matricize(v, dims, [0]), f)


@pytest.mark.parametrize("p,count", [(2, 3), (3, 6)])
def test_decompositions_of_matrix_identity(p, count):
    # unordered bases of GF(p)^2 up to scaling each vector: |GL2(p)| / (2 (p-1)^2)
    ds = oracle.all_decompositions(family_sum(matrix_identity(p)), (2, 2), 2, GF(p))
    assert len(ds) == count
    target = family_sum(matrix_identity(p))
    for sol in ds.solutions:
        assert family_sum(sol) == target and sol.n == 2
    assert not oracle.uniqueness_bruteforce(matrix_identity(p), 2).unique


def test_identity_tensor_is_unique():
    f = GF(2)
    rep = oracle.uniqueness_bruteforce(identity_family(2, 3, f))
    assert rep.unique and rep.rank == 2
    ds = oracle.all_decompositions(family_sum(identity_family(2, 3, f)), (2, 2, 2), 2, f)
    assert len(ds) == 1


def test_symmetric_uniqueness():
    S = SymmetricFamily(GF(5), ((1, 0), (0, 1)), (1, 1), 3)
    assert oracle.symmetric_uniqueness_bruteforce(S, 2).unique
    assert not oracle.symmetric_uniqueness_bruteforce(S, 3).unique


def test_condition_U_and_H():
    f = GF(2)
    rep = oracle.condition_U_bruteforce(identity_family(2, 3, f))
    assert rep.holds and rep.checked == 4
    with pytest.raises(BudgetExceeded):
        oracle.condition_U_bruteforce(identity_family(12, 3, GF(7)), budget=oracle.SearchBudget(1000))
    with pytest.raises(ParameterError):
        oracle.condition_U_bruteforce(identity_family(2, 4, f))
    rng = random.Random(5)
    for _ in range(60):
        F = random_family(rng, GF(3), rng.randint(2, 5), [rng.randint(1, 3) for _ in range(3)])
        for pivot in range(3):
            if check_condition_H(F, pivot).certified:
                assert oracle.condition_U_bruteforce(F, pivot).holds


def test_subpartitions():
    f = GF(5)
    I3 = identity_family(3, 3, f)
    perm = ProductFamily(f, I3.mode_dims, tuple(reversed(I3.tensors)))
    wit = oracle.subpartition_verify(I3, perm, 1, 3)
    assert wit is not None and len(wit.pairs) == 3
    assert oracle.is_reducible(I3, perm) is None
    assert oracle.rank_deficient_subset_search(ProductFamily.from_factors(f, [[e(0, 2)] * 3] * 3), 2) == (0, 1)


def test_budget_exceeded_reports_progress():
    f = GF(3)
    v = family_sum(identity_family(3, 3, f))
    with pytest.raises(BudgetExceeded) as info:
        oracle.brute_force_rank(v, (3, 3, 3), f, oracle.SearchBudget(max_candidates=5))
    # whatever was established before stopping is a valid bound on the true rank 3
    assert info.value.lower_bound is None or info.value.lower_bound <= 3
