"""Acceptance suite: one test per criterion, exact arithmetic throughout.

Each test prints a PASS/FAIL line (also collected in the terminal summary)
and fails when its runtime cap is exceeded.
"""

from __future__ import annotations

import json
import random
from itertools import combinations

from helpers import random_family, ref_rank
from kruskal_cert import oracle
from kruskal_cert.cli import main
from kruskal_cert.criteria import (
    check_condition_H,
    check_condition_S,
    check_kgen,
    check_kruskal,
    check_nonrank_irreducible,
    check_reshaped_kgen,
    check_reshaped_kruskal,
    check_split_corollary,
    check_symmetric_nonrank,
    dls_threshold,
    tensor_rank_lb_flattening,
    tensor_rank_lb_mu,
    tensor_rank_lb_subset,
)
from kruskal_cert.field import GF
from kruskal_cert.fixtures import get_fixture, identity_family, identity_symmetric
from kruskal_cert.generators import (
    CircuitSpec,
    build_sharpness_symmetric_instance,
    build_sharpness_tensor_instance,
    find_circuit,
)
from kruskal_cert.linalg import VectorList
from kruskal_cert.matroid import connected_components, separator_search
from kruskal_cert.tensor import DimTable, ProductFamily, family_sum, k_rank_profile, matricize


def _dims(F):
    """Per-mode span dimensions, computed with sympy."""
    return tuple(ref_rank(F.factors(j), F.field) for j in range(F.m))


def _cli(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


# ---------------------------------------------------------------- 1


def test_criterion_01_example_reproduction(criterion, capsys, tmp_path):
    with criterion(1, "example family: kgen certified, Kruskal fails", 1.0):
        F = get_fixture("example_8_1").family
        assert check_kgen(F).certified
        assert check_kruskal(F).status.value == "hypothesis_fails"
        assert k_rank_profile(F).per_mode == (2, 2, 2)
        assert DimTable(F).full_dims() == (4, 4, 4) == _dims(F)
        assert dls_threshold(F) is True
        path = tmp_path / "ex.json"
        assert _cli(capsys, "generate", "fixture", "example_8_1", "--out", path)[0] == 0
        assert _cli(capsys, "check", "kgen", path)[0] == 0
        assert _cli(capsys, "check", "kruskal", path)[0] == 1
        assert _cli(capsys, "kranks", path)[1].split() == ["2", "2", "2"]
        code, out = _cli(capsys, "check", "dls-threshold", path)
        assert code == 0 and json.loads(out)["status"] == "certified"


# ---------------------------------------------------------------- 2


def test_criterion_02_bound_examples(criterion):
    with criterion(2, "rank bound examples", 2.0):
        four = get_fixture("tr_four").family
        assert tensor_rank_lb_mu(four).lower_bound == 4
        assert tensor_rank_lb_flattening(four).lower_bound == 3
        five = get_fixture("tr_five").family
        assert tensor_rank_lb_subset(five).lower_bound == 5
        assert tensor_rank_lb_mu(five).lower_bound == 4


# ---------------------------------------------------------------- 3


def test_criterion_03_splitting_sweep(criterion):
    with criterion(3, "splitting sweep, >= 10^4 eligible families", 300.0):
        rng = random.Random(2024)
        eligible = 0
        while eligible < 10_000:
            field = GF(rng.choice((5, 7)))
            m = rng.randint(2, 4)
            dims = [rng.randint(1, 4) for _ in range(m)]
            F = random_family(rng, field, rng.randint(2, 8), dims, pool_size=rng.randint(1, 3))
            V = F.assembled_list()
            total = ref_rank(V.vectors, field)
            if total > sum(d - 1 for d in DimTable(F).full_dims()):
                continue
            eligible += 1
            sep = separator_search(V)
            assert sep is not None, F
            S, C = list(sep.S), list(sep.complement)
            assert ref_rank([V[i] for i in S], field) + ref_rank([V[i] for i in C], field) == total


# ---------------------------------------------------------------- 4


def _rank_table(vectors, p):
    """rank of every subset (bitmask) of ``vectors`` over GF(p), built incrementally."""
    n = len(vectors)
    bases = [dict() for _ in range(1 << n)]
    ranks = [0] * (1 << n)
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        prev = mask & (mask - 1)
        basis = dict(bases[prev])
        v = [x % p for x in vectors[low]]
        for piv, row in sorted(basis.items()):
            if v[piv]:
                c = v[piv]
                v = [(a - c * b) % p for a, b in zip(v, row)]
        lead = next((i for i, x in enumerate(v) if x), None)
        if lead is not None:
            inv = pow(v[lead], p - 2, p)
            basis[lead] = [(x * inv) % p for x in v]
        bases[mask] = basis
        ranks[mask] = len(basis)
    return ranks


def _exhaustive_components(vectors, p):
    """Split recursively on the first separating sub-mask found."""
    ranks = _rank_table(vectors, p)

    def split(mask):
        sub = (mask - 1) & mask
        while sub:
            if ranks[sub] + ranks[mask ^ sub] == ranks[mask]:
                return split(sub) + split(mask ^ sub)
            sub = (sub - 1) & mask
        return [mask]

    blocks = split((1 << len(vectors)) - 1)
    return sorted(tuple(i for i in range(len(vectors)) if b >> i & 1) for b in blocks)


def _random_vectorlist(rng, field, n, dim):
    coords = list(range(dim))
    rng.shuffle(coords)
    cut = rng.randint(0, dim)
    groups = [g for g in (coords[:cut], coords[cut:]) if g]
    out = []
    while len(out) < n:
        if out and rng.random() < 0.25:
            c = rng.randrange(1, field.p)
            v = [(c * x) % field.p for x in rng.choice(out)]
        else:
            support = rng.choice(groups) if rng.random() < 0.6 else coords
            v = [rng.randrange(field.p) if i in support else 0 for i in range(dim)]
        if any(v):
            out.append(v)
    return VectorList.of(field, out, dim)


def test_criterion_04_components_vs_exhaustive(criterion):
    with criterion(4, "connected components vs exhaustive recursion, >= 10^3 trials", 120.0):
        rng = random.Random(4)
        field = GF(3)
        for _ in range(1000):
            V = _random_vectorlist(rng, field, rng.randint(1, 10), rng.randint(1, 5))
            got = sorted(connected_components(V).blocks)
            assert got == _exhaustive_components([list(v) for v in V.vectors], 3), V


# ---------------------------------------------------------------- 5


def test_criterion_05_uniqueness_oracle(criterion):
    with criterion(5, "kgen certificates confirmed by brute force, >= 200 instances", 600.0):
        rng = random.Random(5)
        shapes = [(2, (2, 2, 2)), (2, (3, 2, 2)), (3, (3, 3, 3)), (3, (2, 2, 2, 2, 2, 2)),
                  (3, (4, 3, 2)), (4, (4, 4, 3)), (4, (4, 4, 4)), (4, (4, 4, 2, 2))]
        confirmed = 0
        while confirmed < 200:
            n, dims = rng.choice(shapes)
            field = GF(rng.choice((2, 3)))
            F = random_family(rng, field, n, dims, pool_size=6)
            if not check_kgen(F).certified:
                continue
            rep = oracle.uniqueness_bruteforce(F, r_max=n)
            assert rep.unique and rep.rank == n, F
            confirmed += 1


# ---------------------------------------------------------------- 6


def test_criterion_06_nonrank_identity(criterion):
    with criterion(6, "non-rank criterion on identity families, witness for every decomposition", 300.0):
        for n in range(3, 11):
            assert check_nonrank_irreducible(identity_family(n), q=n - 2, s=1, r=n + 1).certified
        field = GF(5)
        I3 = identity_family(3, 3, field)
        decomps = oracle.all_decompositions(family_sum(I3), I3.mode_dims, 4, field,
                                            oracle.SearchBudget(max_candidates=10 ** 9))
        assert decomps.solutions
        for sol in decomps.solutions:
            assert oracle.subpartition_verify(I3, sol, 1, 1) is not None, sol


# ---------------------------------------------------------------- 7


def _power_sum(S, p):
    """sum_a c_a v_a^{(x) m}, computed by repeated outer products."""
    total = None
    for v, c in zip(S.base_vectors, S.coeffs):
        t = [int(c)]
        for _ in range(S.m):
            t = [a * int(b) for a in t for b in v]
        total = t if total is None else [x + y for x, y in zip(total, t)]
    return [x % p for x in total]


def test_criterion_07_symmetric(criterion):
    with criterion(7, "symmetric non-rank thresholds and sharpness relations", 60.0):
        for m in (3, 4, 5):
            for n in range(2, 7):
                S = identity_symmetric(n, m)
                assert check_symmetric_nonrank(S, m + n - 3).certified
                assert check_symmetric_nonrank(S, m + n - 2).status.value == "hypothesis_fails"
        rng = random.Random(7)
        built = 0
        for m in (3, 4, 5):
            for n in range(2, m + 1):
                inst = build_sharpness_symmetric_instance(m, 2, n, m + 2 - n, rng=rng)
                p = inst.E.field.p
                assert inst.verify()
                assert _power_sum(inst.E, p) == _power_sum(inst.F, p)
                built += 1
        assert built >= 9


# ---------------------------------------------------------------- 8


def test_criterion_08_containments(criterion):
    with criterion(8, "containment properties on >= 10^3 random three-mode families", 600.0):
        rng = random.Random(8)
        for trial in range(1000):
            field = GF(rng.choice((2, 3)))
            n = rng.randint(2, 6)
            F = random_family(rng, field, n, [rng.randint(1, 4) for _ in range(3)], pool_size=rng.randint(2, 5))
            if check_kruskal(F).certified:
                assert check_kgen(F).certified
            if check_reshaped_kruskal(F).certified:
                assert check_reshaped_kgen(F).certified
            for pivot in range(3):
                if check_condition_H(F, pivot).certified:
                    assert check_condition_S(F).certified
                    assert oracle.condition_U_bruteforce(F, pivot).holds
        for trial in range(1000):
            field = GF(rng.choice((3, 5)))
            m = rng.randint(3, 4)
            F = random_family(rng, field, rng.randint(2, 7), [rng.randint(1, 3) for _ in range(m)],
                              pool_size=rng.randint(2, 5))
            modes = list(range(m))
            rng.shuffle(modes)
            cut = rng.randint(1, m - 1)
            J, K = tuple(sorted(modes[:cut])), tuple(sorted(modes[cut:]))
            prof = k_rank_profile(F, [J, K, J + K])
            kJ, kK, kJK = prof.grouped[J], prof.grouped[K], prof.grouped[tuple(sorted(J + K))]
            assert kJK >= min(F.n, kJ + kK - 1), (F, J, K)


# ---------------------------------------------------------------- 9

CIRCUIT_SPECS = [(2, 2), (2, 3), (3, 3), (1, 2, 3), (2, 2, 2), (2, 2, 3), (1, 1, 2, 2), (2, 2, 2, 2),
                 (3, 3, 3), (2, 4), (1, 3, 3), (3, 2, 1, 2)]


def test_criterion_09_circuits(criterion):
    with criterion(9, "circuit corollary on >= 20 generated circuits", 300.0):
        rng = random.Random(9)
        circuits = []
        for dims in CIRCUIT_SPECS:
            for p in (13, 101):
                circuits.append(find_circuit(CircuitSpec(dims), GF(p), rng=rng))
        for dims in ((2, 2, 2), (3, 3, 3)):
            circuits.append(find_circuit(CircuitSpec(dims, symmetric=True), GF(101), rng=rng))
        assert len(circuits) >= 20 and all(C is not None for C in circuits)
        for C in circuits:
            vecs = C.assembled_list().vectors
            n = C.n
            assert ref_rank(vecs, C.field) == n - 1
            assert all(ref_rank(sub, C.field) == n - 1 for sub in combinations(vecs, n - 1))
            assert sum(1 for d in _dims(C) if d > 1) <= n - 2
            cert = check_split_corollary(C)
            clause = cert.witness["clauses"][0]
            assert cert.status.value == "hypothesis_fails"
            assert clause["lhs"] - clause["rhs"] == 1


# ---------------------------------------------------------------- 10


def test_criterion_10_matrix_specialization(criterion):
    with criterion(10, "two-mode specialization of the mu bound", 60.0):
        rng = random.Random(10)
        field = GF(3)
        checked = 0
        while checked < 1000:
            dims = [rng.randint(1, 4), rng.randint(1, 4)]
            F = random_family(rng, field, rng.randint(2, 5), dims, pool_size=rng.randint(1, 4))
            k = k_rank_profile(F).per_mode
            if k[0] != k[1]:
                continue
            d = _dims(F)
            b = tensor_rank_lb_mu(F)
            assert b.applicable and b.formula_value == d[0] + d[1] - F.n
            v = family_sum(F)
            rank = oracle.brute_force_rank(v, F.mode_dims, field)
            assert rank == ref_rank(matricize(v, F.mode_dims, [0]), field)
            assert rank >= b.lower_bound
            checked += 1
        for k, d, i, n in [((2, 2), (3, 3), 0, 4), ((2, 2), (3, 3), 1, 5), ((3, 3), (4, 4), 0, 5),
                           ((2, 2), (4, 4), 0, 5), ((2, 2), (4, 4), 1, 6), ((3, 3), (4, 4), 0, 7)]:
            inst = build_sharpness_tensor_instance(k, d, i, n, GF(101), rng=rng)
            E = inst.E
            assert isinstance(E, ProductFamily) and inst.verify()
            b = tensor_rank_lb_mu(E)
            assert b.formula_value == d[0] + d[1] - n == inst.F.n
            assert ref_rank(matricize(family_sum(E), E.mode_dims, [0]), E.field) == b.lower_bound
