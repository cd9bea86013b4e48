from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_family
from kruskal_cert.criteria import check_kgen, revalidate
from kruskal_cert.errors import FamilyFormatError
from kruskal_cert.field import GF, QQ
from kruskal_cert.fixtures import get_fixture, identity_symmetric
from kruskal_cert.io import (
    atomic_write,
    certificate_document,
    dump_family,
    load_certificate,
    parse_family,
)
from kruskal_cert.tensor import ProductFamily, canonical_multiset


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([QQ, GF(2), GF(101)]))
def test_round_trip(seed, field):
    rng = random.Random(seed)
    F = random_family(rng, field, rng.randint(1, 5), [rng.randint(1, 3) for _ in range(rng.randint(2, 4))])
    if field.p is None:
        F = ProductFamily(field, F.mode_dims, tuple(t.over(field) for t in F.tensors))
    G = parse_family(dump_family(F))
    assert G == F
    assert canonical_multiset(G) == canonical_multiset(F)


def test_rational_literals_and_symmetric_round_trip():
    text = json.dumps({"schema": 1, "field": {"type": "rational"}, "mode_dims": [2, 2],
                       "tensors": [{"factors": [["1/2", 1], [1, 0]], "coeff": "-3/4"}]})
    F = parse_family(text)
    assert str(F.tensors[0].coeff) == "-3/4"
    assert '"1/2"' in dump_family(F)
    S = identity_symmetric(3, 4)
    assert parse_family(dump_family(S)) == S


BAD = """{
  "schema": 1,
  "field": {"type": "prime", "p": 5},
  "mode_dims": [2, 2],
  "tensors": [
    [[1, 0], [1, 0]],
    [[1, 0], [0, 0]]
  ]
}"""


@pytest.mark.parametrize("text,line,fragment", [
    (BAD, 7, "tensors[1][1]: zero vector"),
    (BAD.replace('"p": 5', '"p": 6'), 3, "field.p"),
    (BAD.replace('"schema": 1', '"schema": 2'), 2, "schema"),
    (BAD.replace("[[1, 0], [1, 0]]", "[[1, 0, 1], [1, 0]]"), 6, "expected length 2"),
    (BAD.replace("[[1, 0], [1, 0]]", "[[1, 0], [1, 0.5]]"), 6, "tensors[0][1][1]"),
    (BAD.replace('"mode_dims": [2, 2],\n', ""), None, "mode_dims: missing"),
    (BAD[:-3], 8, "invalid JSON"),
])
def test_errors_name_field_and_line(text, line, fragment):
    with pytest.raises(FamilyFormatError) as info:
        parse_family(text, "fam.json")
    assert fragment in str(info.value)
    if line is not None:
        assert info.value.line == line and str(info.value).startswith(f"fam.json:{line}:")


def test_certificate_round_trip_and_hash():
    F = get_fixture("example_8_1").family
    text = dump_family(F)
    cert = check_kgen(F)
    doc = certificate_document(cert, text, "ex.json")
    loaded, raw = load_certificate(json.dumps(doc))
    assert loaded.to_json() == {k: doc[k] for k in ("criterion", "status", "witness", "notes")}
    assert raw["input"]["sha256"] == certificate_document(cert, text)["input"]["sha256"]
    assert revalidate(loaded, F)
    with pytest.raises(FamilyFormatError):
        load_certificate('{"criterion": "kgen"}')


def test_atomic_write_leaves_no_partial_file(tmp_path):
    path = tmp_path / "out.json"
    atomic_write(str(path), "ok\n")
    assert path.read_text() == "ok\n"

    with pytest.raises(TypeError):
        atomic_write(str(tmp_path / "bad.json"), 42)  # type: ignore[arg-type]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out.json"]
