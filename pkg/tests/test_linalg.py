from __future__ import annotations

import random
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix as SymMatrix

from helpers import ref_rank
from kruskal_cert.field import GF, QQ
from kruskal_cert.linalg import (
    Matrix,
    VectorList,
    compound_matrix,
    coordinatize,
    determinant,
    direct_sum_check,
    express,
    khatri_rao,
    kron_vec,
    nullspace,
    rank,
    rank_rows,
    rref,
    solve,
)

FIELDS = [QQ, GF(2), GF(3), GF(7), GF(101)]


def matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


@settings(max_examples=150, deadline=None)
@given(matrices(), st.sampled_from(FIELDS))
def test_rank_matches_sympy(rows, field):
    rows = [field.vector(r) for r in rows]
    assert rank_rows(rows, field) == ref_rank(rows, field)


@settings(max_examples=100, deadline=None)
@given(matrices(4, 4), st.sampled_from(FIELDS))
def test_nullspace_is_kernel(rows, field):
    rows = [field.vector(r) for r in rows]
    ncols = len(rows[0])
    ker = nullspace(rows, field, ncols)
    assert len(ker) == ncols - ref_rank(rows, field)
    for x in ker:
        for r in rows:
            dot = sum(a * b for a, b in zip(r, x))
            assert (dot if field.p is None else dot % field.p) == 0


@settings(max_examples=100, deadline=None)
@given(matrices(4, 4))
def test_determinant_matches_sympy(rows):
    n = min(len(rows), len(rows[0]))
    sq = [r[:n] for r in rows[:n]]
    assert determinant([QQ.vector(r) for r in sq], QQ) == SymMatrix(sq).det()


def test_rref_and_solve():
    f = QQ
    rows = [f.vector(r) for r in [[1, 2, 3], [2, 4, 6], [0, 1, 1]]]
    red, piv = rref(rows, f)
    assert piv == [0, 1] and len(red) == 2
    x = solve(rows, f.vector([6, 12, 2]), f, 3)
    assert x is not None
    assert [sum(a * b for a, b in zip(r, x)) for r in rows] == [6, 12, 2]
    assert solve(rows, f.vector([1, 0, 0]), f, 3) is None


def test_express_and_coordinatize():
    f = GF(5)
    vs = [(1, 0, 0), (0, 1, 0), (1, 1, 0)]
    assert express((2, 3, 0), vs[:2], f) == (2, 3)
    assert express((0, 0, 1), vs, f) is None
    basis, coords = coordinatize(vs, f)
    assert basis == [0, 1]
    assert coords[2] == (1, 1)


def test_direct_sum_check():
    f = QQ
    A = VectorList.of(f, [(1, 0, 0)])
    B = VectorList.of(f, [(0, 1, 0), (0, 0, 1)])
    C = VectorList.of(f, [(1, 1, 0)])
    assert direct_sum_check(A, B)
    assert not direct_sum_check(VectorList.of(f, [(1, 0, 0), (0, 1, 0)]), C)


def test_compound_matrix_entries_are_minors():
    rng = random.Random(3)
    rows = [[rng.randint(-3, 3) for _ in range(4)] for _ in range(3)]
    M = Matrix.from_rows(QQ, rows)
    C = compound_matrix(M, 2)
    S = SymMatrix(rows)
    rsets = list(combinations(range(3), 2))
    csets = list(combinations(range(4), 2))
    for i, rs in enumerate(rsets):
        for j, cs in enumerate(csets):
            assert C.entries[i][j] == S.extract(list(rs), list(cs)).det()


def test_khatri_rao_and_kron_match_numpy():
    rng = np.random.default_rng(0)
    A = rng.integers(-3, 4, (2, 3))
    B = rng.integers(-3, 4, (3, 3))
    K = khatri_rao(Matrix.from_rows(QQ, A.tolist()), Matrix.from_rows(QQ, B.tolist()))
    ref = np.stack([np.kron(A[:, c], B[:, c]) for c in range(3)], axis=1)
    assert [[int(x) for x in r] for r in K.entries] == ref.tolist()
    assert list(kron_vec([(1, 2), (3, 4, 5)])) == np.kron([1, 2], [3, 4, 5]).tolist()
    with pytest.raises(ValueError):
        khatri_rao(Matrix.from_rows(QQ, [[1, 2]]), Matrix.from_rows(QQ, [[1]]))


def test_rank_of_matrix_object():
    assert rank(Matrix.from_rows(GF(2), [[1, 1], [1, 1]])) == 1
