from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import ref_rank
from kruskal_cert.criteria import check_symmetric_nonrank, tensor_rank_lb_mu
from kruskal_cert.errors import ParameterError
from kruskal_cert.field import GF, QQ
from kruskal_cert.generators import (
    CircuitSpec,
    build_sharpness_symmetric_instance,
    build_sharpness_tensor_instance,
    circuit_relation,
    embed_family,
    find_circuit,
)
from kruskal_cert.matroid import is_circuit
from kruskal_cert.tensor import DimTable, family_sum, k_rank_profile, matricize


def test_circuit_spec_invariant():
    assert CircuitSpec((2, 3)).n == 5
    with pytest.raises(ParameterError):
        CircuitSpec((2, 2), target_n=5)
    with pytest.raises(ParameterError):
        CircuitSpec((2, 3), symmetric=True)


def test_random_section_search_over_small_field():
    C = find_circuit(CircuitSpec((2, 2)), GF(7), rng=random.Random(2), strategy="section")
    assert C is not None and C.n == 4
    assert is_circuit(C.assembled_list())
    assert ref_rank(list(C.assembled), GF(7)) == 3


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=2, max_size=4), st.integers(0, 1000), st.sampled_from([GF(101), QQ]))
def test_found_circuits_meet_their_spec(dims, seed, field):
    spec = CircuitSpec(tuple(dims))
    C = find_circuit(spec, field, rng=random.Random(seed))
    assert C is not None
    assert is_circuit(C.assembled_list())
    assert DimTable(C).full_dims() == spec.target_dims
    rel = circuit_relation(C)
    assert all(a != 0 for a in rel)


def test_symmetric_circuits():
    C = find_circuit(CircuitSpec((3, 3, 3), symmetric=True), GF(101), rng=random.Random(4))
    assert C is not None and all(len(set(t.factors)) == 1 for t in C.tensors)
    assert find_circuit(CircuitSpec((2, 2, 2)), GF(3), attempts=3) is None


def test_embed_family():
    C = find_circuit(CircuitSpec((2, 2)), GF(11), rng=random.Random(0))
    E = embed_family(C, (3, 4))
    assert E.mode_dims == (3, 4) and is_circuit(E.assembled_list())
    with pytest.raises(ParameterError):
        embed_family(C, (1, 4))


@pytest.mark.parametrize("k,d,i,n", [((2, 2, 2), (3, 3, 2), 0, 4), ((2, 2, 2), (2, 2, 2), 0, 3),
                                     ((2, 2), (3, 3), 0, 4), ((2, 2), (3, 3), 1, 5), ((3, 3, 2), (4, 4, 2), 0, 5)])
def test_tensor_sharpness_instances(k, d, i, n):
    inst = build_sharpness_tensor_instance(k, d, i, n, rng=random.Random(1))
    assert inst.verify()
    E, F = inst.E, inst.F
    g = d[i] - k[i]
    lam = sum(x - 1 for x in k) + 2
    assert E.n == n and F.n == 2 * g + lam - n == inst.params["F_size"]
    assert DimTable(E).full_dims() == tuple(d)
    assert k_rank_profile(E).per_mode == tuple(k)
    # engine bound equals the size of the exhibited decomposition
    assert tensor_rank_lb_mu(E).lower_bound == F.n
    if len(d) == 2:
        assert ref_rank(matricize(family_sum(E), E.mode_dims, [0]), E.field) == F.n


def test_tensor_sharpness_parameter_checks():
    with pytest.raises(ParameterError):
        build_sharpness_tensor_instance((2, 2, 2), (3, 3, 2), 0, 3)
    with pytest.raises(ParameterError):
        build_sharpness_tensor_instance((2, 2, 2), (4, 3, 2), 0, 4)
    with pytest.raises(ParameterError):
        build_sharpness_tensor_instance((2, 2, 5), (2, 2, 5), 0, 6)


@pytest.mark.parametrize("m,d,n,r", [(3, 2, 2, 3), (4, 2, 3, 3), (5, 2, 4, 3), (3, 3, 3, 4), (3, 4, 5, 4),
                                     (4, 3, 4, 4)])
def test_symmetric_sharpness_instances(m, d, n, r):
    inst = build_sharpness_symmetric_instance(m, d, n, r, rng=random.Random(3))
    assert inst.verify()
    assert (inst.E.n, inst.F.n, inst.E.d) == (n, r, d)
    assert inst.E.k >= 2 and inst.F.k >= 2
    assert n + r == m + 2 * d - 2
    # the boundary value fails and one below it is certified
    assert not check_symmetric_nonrank(inst.E, r).certified
    assert check_symmetric_nonrank(inst.E, r - 1).certified


def test_near_sharp_symmetric_variant():
    inst = build_sharpness_symmetric_instance(3, 5, 6, 7, rng=random.Random(0), k=3)
    assert inst.verify() and inst.params["near_sharp"]
    assert inst.E.k == 3 and inst.E.n + inst.F.n == 2 * 5 + 3
    with pytest.raises(ParameterError):
        build_sharpness_symmetric_instance(3, 5, 6, 6, k=3)
    with pytest.raises(ParameterError):
        build_sharpness_symmetric_instance(3, 2, 2, 2)
    with pytest.raises(ParameterError):
        build_sharpness_symmetric_instance(3, 2, 2, 3, field=GF(3))
