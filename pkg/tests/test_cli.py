import json
import subprocess
import sys

import pytest

from carlitz_coleman.cli import (InstanceConfig, main, parse_series, parse_element, parse_system,
                                 read_config_file)
from carlitz_coleman.checks import instance


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    doc = json.loads(out) if out.strip() else None
    return code, doc, err


def test_setup_q3(capsys):
    code, doc, _ = run(capsys, "setup", "--p", "3")
    assert code == 0
    lv = doc["levels"]
    assert [x["e_n"] for x in lv] == [2, 6, 18, 54]
    assert lv[0]["psi"] == "x^2+T"
    assert lv[0]["different_valuation"] == "1/2"


def test_setup_degree_two_prime(capsys):
    code, doc, _ = run(capsys, "setup", "--p", "3", "--pi", "T^2+1", "--L", "1")
    assert code == 0
    assert doc["q_p"] == 9 and doc["d"] == 2
    assert doc["levels"][0]["different_valuation"] == "7/8"


def test_setup_q2_note(capsys):
    code, doc, _ = run(capsys, "setup", "--p", "2", "--L", "2")
    assert code == 0
    assert doc["notes"]


def test_reducible_pi_is_usage_error(capsys):
    code, _, err = run(capsys, "setup", "--p", "2", "--pi", "T^2")
    assert code == 2
    assert "reducible" in err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["setup", "--bogus"]) == 2


def test_lambda_terms(capsys):
    code, doc, _ = run(capsys, "compute", "lambda", "--p", "3", "--terms", "3", "--N", "10")
    assert code == 0
    assert doc["valuations"] == [0, -1, -2]
    assert doc["coeffs"][0]["exact"] and doc["coeffs"][0]["unit"] == "1"


def test_norm_op_of_x_plus_one(capsys):
    code, doc, _ = run(capsys, "compute", "norm-op", "--p", "3", "--series", "x+1")
    assert code == 0
    # N(x + 1) = x + 1 + T over F_3 with pi = T
    assert doc["text"] == "T+1+x"
    assert doc["series"]["M"] is None
    code, doc, _ = run(capsys, "compute", "norm-op", "--p", "3", "--series", "x+1", "--k", "2")
    # N(x + c) = x + Phi_T(c), and (T+1)T + (T+1)^3 = T^3+T^2+T+1 in characteristic 3
    assert doc["text"] == "T^3+T^2+T+1+x"


def test_norm_op_truncated_budget(capsys):
    code, doc, _ = run(capsys, "compute", "norm-op", "--p", "3", "--series", "x+1", "--M", "256")
    assert code == 0
    assert doc["series"]["M"] == 256 // 3 - 48 + 1
    code, doc, _ = run(capsys, "compute", "norm-op", "--p", "3", "--series", "x+1", "--M", "256",
                       "--k", "2")
    assert code == 1 and doc["error"] == "budget"


def test_torsion_and_pairings(capsys):
    code, doc, _ = run(capsys, "compute", "pair-analytic", "--p", "3", "--a", "T*w")
    assert code == 0
    code2, doc2, _ = run(capsys, "compute", "pair-kummer", "--p", "3", "--a", "T*w")
    assert code2 == 0
    assert doc["value"] == doc2["value"]


def test_verify_default(capsys):
    code, doc, _ = run(capsys, "verify", "--p", "3")
    assert code == 0
    assert doc["verdict"] == "PASS"
    assert doc["analytic"]["c"] == "2"


def test_verify_with_system(capsys):
    code, doc, _ = run(capsys, "verify", "--p", "2", "--a", "T^2*w", "--system", "omega*phi(T+1)")
    assert code == 0, doc
    assert doc["scope"].startswith("general u")


def test_selftest_budget_failure(capsys):
    code, doc, _ = run(capsys, "selftest", "--p", "3", "--M", "10", "--samples", "1")
    assert code == 1
    assert doc["verdict"] == "FAIL"
    budget = [c for c in doc["checks"] if c["detail"].get("error") == "budget"]
    assert budget


def test_selftest_deterministic(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CARLITZ_COLEMAN_REPORT_DIR", str(tmp_path))
    args = ("selftest", "--p", "3", "--samples", "1", "--seed", "5")
    code1, doc1, _ = run(capsys, *args)
    code2, doc2, _ = run(capsys, *args)
    assert code1 == code2
    assert doc1["payload_hash"] == doc2["payload_hash"]
    doc1.pop("timings"), doc2.pop("timings")
    assert doc1 == doc2
    assert list(tmp_path.glob("selftest-*.json"))


def test_config_file_and_override(tmp_path, capsys):
    cfg_file = tmp_path / "inst.cfg"
    cfg_file.write_text("# demo\np = 2\npi = T+1\nN = 12\nL = 1\n")
    raw = read_config_file(str(cfg_file))
    assert raw["p"] == "2" and raw["pi"] == "T+1"
    code, doc, _ = run(capsys, "setup", "--config", str(cfg_file), "--N", "13")
    assert code == 0
    assert doc["config"]["N"] == 13 and doc["config"]["pi"] == "T+1"
    assert doc["config_hash"] == InstanceConfig(p=2, pi="T+1", N=13, L=1).digest()
    assert doc["config_hash"] != InstanceConfig(p=2, pi="T+1", N=12, L=1).digest()


def test_parsers():
    tw = instance(3, "T")
    s = parse_series(tw, "x^-1 + (T+1)*x^2", 8, 20)
    assert s.xpow == -1
    w = parse_element(tw, "w^-1*T^2", 1, 10)
    assert w.valuation() == 2 - 1 / 2
    u = parse_system(tw, "omega^2*phi(T+1)*const(2)", 4, 10)
    assert u.L == 4


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "carlitz_coleman", "setup", "--p", "3", "--L", "1"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["q"] == 3
