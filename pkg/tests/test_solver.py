"""External-solver adapter tests: discovery, configuration, protocol."""

import os
import stat
import sys

import pytest

from invarc.diagnostics import ProtocolError, SolverNotFound
from invarc.encoder import SolverScript
from invarc.solver import (
    ENV_VAR, SolverConfig, discover_solver, parse_output, run_solver,
)


def script_with(*queries):
    s = SolverScript()
    s.main.append("(declare-const x Int)")
    for name, text in queries:
        s.add_query(name, text)
    return s


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(executable="", args=())
    with pytest.raises(ValueError):
        SolverConfig(executable="z3", args=(), timeout_ms=0)
    with pytest.raises(ValueError):
        SolverConfig(executable="z3", args=(), max_workers=0)


def test_discover_env_override(monkeypatch, tmp_path):
    fake = tmp_path / "fakesolver"
    fake.write_text("#!/bin/sh\nexit 0\n")
    fake.chmod(fake.stat().st_mode | stat.S_IEXEC)
    monkeypatch.setenv(ENV_VAR, f"{fake} --alpha --beta")
    cfg = discover_solver()
    assert cfg.executable == str(fake)
    assert cfg.args == ("--alpha", "--beta")


def test_discover_env_missing_binary(monkeypatch):
    monkeypatch.setenv(ENV_VAR, "/no/such/solver")
    with pytest.raises(SolverNotFound):
        discover_solver()


def test_parse_output_order_preserved():
    out = 'QUERY:a\nsat\nQUERY:b\nunsat\nQUERY:c\nunknown\n'
    assert parse_output(out, ["a", "b", "c"]) == {
        "a": "sat", "b": "unsat", "c": "unknown"}


def test_parse_output_quoted_markers():
    out = '"QUERY:q1"\nunsat\n'
    assert parse_output(out, ["q1"]) == {"q1": "unsat"}


def test_parse_output_missing_answer():
    out = 'QUERY:a\nsat\nQUERY:b\n'
    verdicts = parse_output(out, ["a", "b"])
    assert verdicts["a"] == "sat"
    assert verdicts["b"] == "error"


def test_run_solver_end_to_end(solver_cfg):
    s = script_with(("taut", "(not (= x x))"),
                    ("contingent", "(= x 4)"))
    out = run_solver(s, solver_cfg)
    assert out == {"taut": "unsat", "contingent": "sat"}


def test_run_solver_no_queries(solver_cfg):
    assert run_solver(script_with(), solver_cfg) == {}


def test_run_solver_timeout(tmp_path):
    slow = tmp_path / "slow"
    slow.write_text("#!/bin/sh\nsleep 30\n")
    slow.chmod(slow.stat().st_mode | stat.S_IEXEC)
    cfg = SolverConfig(executable=str(slow), args=(), timeout_ms=300)
    out = run_solver(script_with(("q", "(= x 1)")), cfg)
    assert out == {"q": "timeout"}


def test_run_solver_crash_is_protocol_error(tmp_path):
    bad = tmp_path / "bad"
    bad.write_text("#!/bin/sh\necho garbage; exit 3\n")
    bad.chmod(bad.stat().st_mode | stat.S_IEXEC)
    cfg = SolverConfig(executable=str(bad), args=(), timeout_ms=5000)
    with pytest.raises(ProtocolError):
        run_solver(script_with(("q", "(= x 1)")), cfg)


def test_keep_artifacts(tmp_path):
    ok = tmp_path / "ok"
    ok.write_text('#!/bin/sh\necho "QUERY:q"\necho unsat\n')
    ok.chmod(ok.stat().st_mode | stat.S_IEXEC)
    cfg = SolverConfig(executable=str(ok), args=(), timeout_ms=5000,
                       workdir=str(tmp_path / "work"), keep_artifacts=True)
    run_solver(script_with(("q", "(not (= x x))")), cfg)
    kept = list((tmp_path / "work").glob("*.smt2"))
    assert kept and "QUERY:q" in kept[0].read_text()


def test_bundled_wrapper_discovered_without_env(monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    cfg = discover_solver()
    assert os.path.exists(cfg.executable) or cfg.executable in (
        "z3", "cvc5")
