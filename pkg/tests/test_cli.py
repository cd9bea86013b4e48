from __future__ import annotations

import json
import os

import pytest

from kruskal_cert.cli import main

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures", "v1")
EX81 = os.path.join(FIXTURES, "example_8_1.json")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "check", "kgen", EX81)
    assert code == 0 and json.loads(out)["status"] == "certified"
    assert run(capsys, "check", "kruskal", EX81)[0] == 1
    sym = os.path.join(FIXTURES, "identity_symmetric_2_3.json")
    assert run(capsys, "check", "symmetric-nonrank", sym, "--r", 1)[0] == 0
    code, _, err = run(capsys, "check", "condition-c", os.path.join(FIXTURES, "identity_3_4.json"), "--pivot", 2)
    assert code == 3 and "m = 3" in err
    assert run(capsys, "check", "kgen", tmp_path / "missing.json")[0] == 3
    assert run(capsys, "check", "no-such-criterion", EX81)[0] == 3


def test_not_applicable_exit_code(capsys, tmp_path):
    path = tmp_path / "par.json"
    path.write_text(json.dumps({"schema": 1, "field": {"type": "rational"},
                                "symmetric": {"m": 3, "base_vectors": [[1, 0], [2, 0]]}}))
    assert run(capsys, "check", "symmetric-nonrank", path, "--r", 1)[0] == 2


def test_certificate_file_and_revalidate(capsys, tmp_path):
    cert = tmp_path / "c.json"
    assert run(capsys, "check", "kgen", EX81, "--out", cert)[0] == 0
    doc = json.loads(cert.read_text())
    assert doc["schema"] == 1 and doc["tool"] == "kruskal-cert" and len(doc["input"]["sha256"]) == 64
    code, out, _ = run(capsys, "revalidate", cert, "--family", EX81)
    assert code == 0 and "valid" in out
    doc["status"] = "hypothesis_fails"
    cert.write_text(json.dumps(doc))
    assert run(capsys, "revalidate", cert)[0] == 1


def test_failed_check_writes_nothing(capsys, tmp_path):
    out = tmp_path / "c.json"
    assert run(capsys, "check", "condition-c", os.path.join(FIXTURES, "identity_3_4.json"), "--out", out)[0] == 3
    assert not out.exists()


def test_batch_mode(capsys, tmp_path):
    code, out, _ = run(capsys, "check", "kgen", FIXTURES, "--out", tmp_path)
    assert code == 1  # tr_four and ex_independent fail the generalized inequality
    assert "example_8_1.json: certified" in out
    assert (tmp_path / "example_8_1.kgen.cert.json").exists()


def test_bounds_and_structure(capsys):
    code, out, _ = run(capsys, "bounds", os.path.join(FIXTURES, "tr_four.json"), "--json")
    rows = {r["method"]: r["lower_bound"] for r in json.loads(out)["bounds"]}
    assert code == 0 and rows["mu"] == 4 and rows["flattening"] == 3
    _, out, _ = run(capsys, "bounds", os.path.join(FIXTURES, "tr_five.json"), "--json")
    rows = {r["method"]: r["lower_bound"] for r in json.loads(out)["bounds"]}
    assert rows["subset"] == 5 and rows["mu"] == 4
    assert run(capsys, "kranks", EX81)[1].strip() == "2 2 2"
    assert run(capsys, "dims", EX81, "--json")[1].count("4") >= 3
    _, out, _ = run(capsys, "dims", os.path.join(FIXTURES, "identity_2_3.json"), "--subsets", "--json")
    assert len(json.loads(out)["subsets"]) == 3
    _, out, _ = run(capsys, "components", os.path.join(FIXTURES, "identity_2_3.json"), "--json")
    assert json.loads(out)["blocks"] == [[0], [1]]
    _, out, _ = run(capsys, "split", os.path.join(FIXTURES, "identity_2_3.json"), "--json")
    assert json.loads(out)["separator"] == [0]


def test_oracle_commands(capsys, tmp_path):
    id2 = os.path.join(FIXTURES, "identity_2_3.json")
    assert run(capsys, "oracle", "rank", id2, "--p", 2)[1].strip() == "2"
    code, out, _ = run(capsys, "oracle", "unique", id2, "--p", 2, "--rmax", 2)
    assert code == 0 and out.strip() == "unique"
    assert run(capsys, "oracle", "condition-u", id2, "--p", 2)[0] == 0
    big = tmp_path / "id12.json"
    assert run(capsys, "generate", "fixture", "identity", "--n", 12, "--out", big)[0] == 0
    assert run(capsys, "oracle", "condition-u", big, "--p", 7, "--budget", 1000)[0] == 4
    assert run(capsys, "oracle", "rank", id2)[0] == 3  # rational family without --p
    _, out, _ = run(capsys, "oracle", "decomps", id2, "--p", 2, "--r", 2, "--json")
    assert json.loads(out)["count"] == 1
    code, out, _ = run(capsys, "oracle", "subpartition", id2, id2, "--p", 2, "--s", 1, "--l", 2)
    assert code == 0 and out.startswith("witness")


def test_generate_commands(capsys, tmp_path):
    fam = tmp_path / "id.json"
    assert run(capsys, "generate", "fixture", "identity", "--n", 3, "--m", 3, "--out", fam)[0] == 0
    assert run(capsys, "kranks", fam)[1].strip() == "3 3 3"
    circ = tmp_path / "circ.json"
    assert run(capsys, "generate", "circuit", "--dims", "2,2", "--p", 7, "--out", circ)[0] == 0
    assert run(capsys, "ears", circ)[1].strip() == "0 1 2 3"
    code, out, _ = run(capsys, "generate", "sharp-symmetric", "--m", 3, "--d", 2, "--n", 2, "--r", 3)
    doc = json.loads(out)
    assert code == 0 and doc["verified"] and doc["params"]["n_plus_r"] == 5
    assert run(capsys, "generate", "sharp-tensor", "--k", "2,2,2", "--d", "3,3,2", "--n", 4,
               "--out", tmp_path / "st")[0] == 0
    assert (tmp_path / "st" / "sharp_tensor_E.json").exists()
    assert run(capsys, "generate", "circuit", "--dims", "2,2,2", "--p", 3, "--attempts", 2)[0] == 5
    assert run(capsys, "generate", "sharp-symmetric", "--m", 3, "--d", 2, "--n", 2, "--r", 2)[0] == 3


@pytest.mark.parametrize("seed", [0, 1])
def test_generation_is_deterministic(capsys, seed):
    a = run(capsys, "generate", "circuit", "--dims", "2,3", "--seed", seed)[1]
    b = run(capsys, "generate", "circuit", "--dims", "2,3", "--seed", seed)[1]
    assert a == b
