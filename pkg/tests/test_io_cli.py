import json
import shutil
import subprocess
import sys
from fractions import Fraction

import pytest

from lexpmsm import certificates as C
from lexpmsm.cli import EXIT_INPUT, EXIT_NO, EXIT_OK, main
from lexpmsm.io import (CERT_SCHEMA, VERDICT_SCHEMA, InputError, dump_certificate, dump_chain, load_problem,
                        parse_certificate, parse_chain, parse_problem)
from lexpmsm.poly import parse_poly
from conftest import BENCH, CERTS, geometric_chain

GEOM = {"name": "geom", "chain": {"rows": [[[0, "1/2"], [1, "1/2"]], [[1, "1"]]], "priority": [3, 2]}}


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def geom(tmp_path):
    p = tmp_path / "geom.json"
    p.write_text(json.dumps(GEOM))
    return p


def test_check_exit_codes(capsys, tmp_path):
    code, out, _ = run(["check", BENCH / "ex_3_9_nat.json", CERTS / "ex_3_9_nat_gssm.json"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["schema"] == VERDICT_SCHEMA and doc["status"] == "accept" and doc["mode"] == "symbolic"
    code, out, _ = run(["check", BENCH / "ex_3_9_nat.json", CERTS / "ex_3_9_ssm.json"], capsys)
    assert code == EXIT_NO
    doc = json.loads(out)
    assert doc["witness"]["location"] == "l0" and Fraction(doc["witness"]["n"]) >= 99
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    code, _, err = run(["check", BENCH / "ex_3_9_nat.json", bad], capsys)
    assert code == EXIT_INPUT and "input error" in err


@pytest.mark.parametrize("system,cert", [("ex_3_8", "ex_3_8_gssm"), ("ex_4_11", "ex_4_11_lexgssm"),
                                         ("ex_4_11_faithful", "ex_4_11_faithful_lexgssm"),
                                         ("ex_3_9_nat", "ex_3_9_nat_map")])
def test_bundled_certificates_accept(capsys, system, cert):
    code, _, _ = run(["check", BENCH / f"{system}.json", CERTS / f"{cert}.json"], capsys)
    assert code == EXIT_OK


def test_check_rejects_unknown_variable(capsys, tmp_path):
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"kind": "gssm", "regions": [{"location": "l0", "priority": 2, "polys": "y"}]}))
    code, _, _ = run(["check", BENCH / "ex_3_8.json", c], capsys)
    assert code == EXIT_INPUT


def test_check_finite_chain(capsys, tmp_path, geom):
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"kind": "gssm", "states": [{"state": 0, "polys": "2"}, {"state": 1, "polys": "0"}]}))
    code, out, _ = run(["check", geom, c], capsys)
    assert code == EXIT_OK and json.loads(out)["mode"] == "finite"
    c.write_text(json.dumps({"kind": "gssm", "states": [{"state": 0, "polys": "1"}, {"state": 1, "polys": "0"}]}))
    assert run(["check", geom, c], capsys)[0] == EXIT_NO


def test_synthesize_and_recheck(capsys, tmp_path):
    out_cert = tmp_path / "map.json"
    trace = tmp_path / "trace.json"
    smt = tmp_path / "round.smt2"
    code, _, _ = run(["synthesize", BENCH / "ex_3_9_nat.json", "-o", out_cert, "--trace", trace,
                      "--emit-smt", smt], capsys)
    assert code == EXIT_OK
    doc = json.loads(out_cert.read_text())
    assert doc["schema"] == CERT_SCHEMA and doc["kind"] == "lexpmsm_map" and doc["shape"] == [1, 1]
    assert json.loads(trace.read_text())["result"] == "found"
    assert smt.read_text().startswith("(set-logic")
    assert run(["check", BENCH / "ex_3_9_nat.json", out_cert], capsys)[0] == EXIT_OK


def test_synthesize_not_found(capsys, tmp_path):
    doc = {"vars": ["x"], "locations": ["a"], "commands": [],
           "partition": {"d": 3, "regions": [{"location": "a", "priority": 3, "guard": "true"}]}}
    p = tmp_path / "loop.json"
    p.write_text(json.dumps(doc))
    code, out, _ = run(["synthesize", p], capsys)
    assert code == EXIT_NO
    res = json.loads(out)
    assert res["reason"] == "no LexPMSM map found" and res["stuck"] == [["a", 3]]


def test_oracle_report(capsys, geom):
    code, out, _ = run(["oracle", geom, "--horizon", 4, "--samples", 200, "--seed", 1], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["expected_steps"] == ["2", "0"]
    assert rep["kp"]["masses"][0] == ["0", "1/2", "1/4", "1/8", "1/16"]
    assert rep["kp"]["tails"][0] == "1/16"
    assert rep["almost_sure_parity"] == [True, True]
    code2, out2, _ = run(["oracle", geom, "--horizon", 4, "--samples", 200, "--seed", 1], capsys)
    assert out2 == out


def test_oracle_needs_states_for_pcfg(capsys):
    assert run(["oracle", BENCH / "ex_3_8.json"], capsys)[0] == EXIT_INPUT


def test_translate_round_trip(capsys, tmp_path):
    out = tmp_path / "full.json"
    code, _, _ = run(["translate", CERTS / "ex_3_9_nat_map.json", "--to", "lexpmsm", "--d", 3, "-o", out], capsys)
    assert code == EXIT_OK
    full = json.loads(out.read_text())
    assert full["kind"] == "lexpmsm" and full["shape"] == [1, 1, 1]
    assert run(["check", BENCH / "ex_3_9_nat.json", out], capsys)[0] == EXIT_OK
    g = tmp_path / "g.json"
    assert run(["translate", out, "--to", "lexgssm", "--pair", 2, "-o", g], capsys)[0] == EXIT_OK
    assert run(["check", BENCH / "ex_3_9_nat.json", g], capsys)[0] == EXIT_OK
    assert run(["translate", CERTS / "ex_3_8_gssm.json", "--to", "reduced_lexpmsm"], capsys)[0] == EXIT_INPUT


def test_translate_ssm(capsys, tmp_path):
    s = tmp_path / "s.json"
    s.write_text(json.dumps({"kind": "ssm", "epsilon": "2", "M": "5",
                             "states": [{"state": 0, "polys": "4"}, {"state": 1, "polys": "0"}]}))
    code, out, _ = run(["translate", s, "--to", "gssm"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["states"][0]["polys"] == [["2"]]


def test_bench_deterministic(capsys):
    code, a, _ = run(["bench", "--format", "json"], capsys)
    assert code == EXIT_OK
    code, b, _ = run(["bench", "--format", "json", "--jobs", 2], capsys)
    rows_a = {r["name"]: r for r in json.loads(a)["rows"]}
    rows_b = {r["name"]: r for r in json.loads(b)["rows"]}
    assert rows_a.keys() == rows_b.keys() >= {"ex_3_8", "ex_3_9", "ex_4_11"}
    for name in rows_a:
        assert rows_a[name]["result"] == "found"
        assert json.dumps(rows_a[name]["certificate"], sort_keys=True) == \
            json.dumps(rows_b[name]["certificate"], sort_keys=True)
    code, table, _ = run(["bench"], capsys)
    assert table.startswith("| benchmark | result | shape | rounds | time (s) |")


def test_certificate_json_round_trip():
    prob = load_problem(BENCH / "ex_3_9_nat.json")
    doc = json.loads((CERTS / "ex_3_9_nat_map.json").read_text())
    kind, m, _ = parse_certificate(doc, prob.pcfg.vars)
    again = parse_certificate(dump_certificate(kind, m), prob.pcfg.vars)
    assert again[1] == m
    dv = C.DvssmCert({0: (Fraction(1, 2), Fraction(1, 2))})
    assert parse_certificate(dump_certificate("dvssm", dv), finite=True)[1] == dv


def test_chain_round_trip():
    ch = geometric_chain()
    assert parse_chain(dump_chain(ch)) == ch


@pytest.mark.parametrize("doc", [
    {"vars": ["x"], "locations": ["a"], "commands": []},
    {"vars": ["x"], "locations": ["a"], "commands": [], "partition": {"regions": [{"location": "b", "priority": 1}]}},
    {"vars": ["x"], "locations": ["a"], "commands": [{"location": "a", "guard": "x >= 0", "branches": [
        {"prob": "1/3", "target": "a", "update": {}}]}], "partition": {"regions": []}},
    {"chain": {"rows": [[[0, "1/2"]]]}},
])
def test_malformed_inputs(doc):
    with pytest.raises((InputError, ValueError)):
        parse_problem(doc)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "lexpmsm", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("lexpmsm")
