import json

import pytest

from qtetra.errors import UnknownSuite
from qtetra.harness.cli import main
from qtetra.harness.suites import RELATIONS, SUITES, SuiteConfig, checks_for, coverage, predicted_exponent, run_suite
from qtetra.report import Outcome, VerifyReport, emit_report, report_from_dict, run_check

SCHEMA_KEYS = {"name", "anchor", "status", "lhs_terms", "rhs_terms", "max_order", "ms"}


def test_empty_report_passes():
    rep = VerifyReport("empty", 2, 0)
    assert rep.passed
    assert json.loads(rep.to_json()) == {"suite": "empty", "config": {"n": 2, "order": 0}, "checks": [], "pass": True}


def test_failing_and_erroring_checks():
    rep = VerifyReport("neg", 2, 0)
    rep.checks.append(run_check("ok", "a", lambda: Outcome(True)))
    rep.checks.append(run_check("bad", "b", lambda: Outcome(False, detail="mismatch")))
    rep.checks.append(run_check("boom", "c", lambda: 1 / 0))
    assert [c.status for c in rep.checks] == ["pass", "fail", "error"]
    assert not rep.passed
    assert "ZeroDivisionError" in rep.checks[2].detail


def test_text_and_json_agree(tmp_path):
    rep = run_suite(SuiteConfig("srelations", timings=False))
    path = tmp_path / "r.json"
    text = emit_report(rep, "text")
    emit_report(rep, "json", path)
    data = json.loads(path.read_text())
    assert set(data) == {"suite", "config", "checks", "pass"}
    for c, line in zip(data["checks"], text.splitlines()[1:]):
        assert set(c) == SCHEMA_KEYS
        assert line.split()[0].lower() == c["status"]
    assert report_from_dict(data).to_json() == rep.to_json()


def test_config_validation():
    with pytest.raises(UnknownSuite):
        SuiteConfig("nope")
    with pytest.raises(ValueError):
        SuiteConfig("hopf", n=1)
    with pytest.raises(ValueError):
        SuiteConfig("mfor", order=-1)
    with pytest.raises(UnknownSuite):
        checks_for("all", 2, 0)


def test_registry_coverage():
    cov = coverage(2)
    assert set(cov) == set(RELATIONS)
    for anchor, suites in cov.items():
        assert len(suites) == 1, (anchor, suites)


def test_every_suite_has_checks():
    for name, spec in SUITES.items():
        if spec.build is not None:
            assert checks_for(name, 2, 1), name


def test_predicted_exponents_are_antisymmetric():
    keys = [(k, i, s) for k in "ef" for i in (1, 2) for s in (1, 2, 3)]
    for a in keys:
        for b in keys:
            assert predicted_exponent(a, b, 3) == -predicted_exponent(b, a, 3)


def test_parallel_matches_serial():
    serial = run_suite(SuiteConfig("hopf", n=3, timings=False))
    parallel = run_suite(SuiteConfig("hopf", n=3, parallel=3, timings=False))
    assert serial.to_json() == parallel.to_json()


def test_all_suite_prefixes_names():
    rep = run_suite(SuiteConfig("all", order=1, timings=False))
    assert rep.passed
    assert {c.name.split(":")[0] for c in rep.checks} == {n for n, s in SUITES.items() if s.build}


def test_cli_verify(tmp_path, capsys):
    path = tmp_path / "out.json"
    assert main(["verify", "prop1", "--json", str(path), "--no-timings"]) == 0
    out = capsys.readouterr().out
    assert "overall: PASS (7 checks)" in out
    assert json.loads(path.read_text())["pass"] is True


def test_cli_unknown_suite(capsys):
    assert main(["verify", "nope"]) == 2
    assert "unknown suite" in capsys.readouterr().err


def test_cli_eval(capsys):
    assert main(["eval", "--vars", "1", "u[1]*v[1] - q*v[1]*u[1]"]) == 0
    assert capsys.readouterr().out.strip() == "0"
    assert main(["eval", "--vars", "3", "--expr", "F[1,2,3]"]) == 0
    assert capsys.readouterr().out.strip() == "S[1,2]*S[1,3]^-1*P[3,2]"
    assert main(["eval", "--vars", "2", "u[1]*"]) == 2
    assert "syntax error" in capsys.readouterr().err


def test_cli_list(capsys):
    assert main(["list-suites"]) == 0
    out = capsys.readouterr().out
    for name in SUITES:
        assert name in out
