"""Command-line interface tests (in-process via main())."""

import json

import pytest

from invarc.cli import main, parse_domain

from conftest import CORPUS


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_text_report(capsys):
    code, out, err = run(capsys, str(CORPUS / "foo.c"), "--entry", "foo")
    assert code == 0
    assert "VARIABLE" in out and "invariant" in out


def test_json_report_valid(capsys):
    code, out, _ = run(capsys, str(CORPUS / "get_row_length.c"),
                       "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["version"] == 1
    assert data["program"] == "GetRowLength"


def test_entry_defaults_to_single_function(capsys):
    code, out, _ = run(capsys, str(CORPUS / "sequential_scan.c"),
                       "--format", "json")
    assert code == 0
    assert json.loads(out)["program"] == "SequentialScan"


def test_dump_stages(capsys):
    code, out, _ = run(capsys, str(CORPUS / "foo.c"), "--entry", "foo",
                       "--dump", "graph", "--dump", "smt")
    assert code == 0
    assert " -> " in out
    assert "(set-logic ALL)" in out


def test_missing_file(capsys):
    code, _, err = run(capsys, "/no/such/file.c")
    assert code == 1 and "error" in err


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.c"
    bad.write_text("int f( { return 0; }")
    code, _, err = run(capsys, str(bad))
    assert code == 2 and "error" in err


def test_rejected_construct_exit_code(capsys, tmp_path):
    bad = tmp_path / "sw.c"
    bad.write_text("int f(int x) { switch (x) { default: return 0; } }")
    code, _, err = run(capsys, str(bad))
    assert code == 2


def test_unknown_entry(capsys):
    code, _, err = run(capsys, str(CORPUS / "foo.c"), "--entry", "nosuch")
    assert code == 2 and "error" in err


def test_solver_not_found(capsys, monkeypatch):
    monkeypatch.setenv("INVARC_SOLVER", "/no/such/solver")
    code, _, err = run(capsys, str(CORPUS / "foo.c"), "--entry", "foo")
    assert code == 3


def test_domain_parsing():
    assert parse_domain("-3..3") == (-3, 3)
    assert parse_domain("0..10") == (0, 10)
    with pytest.raises(ValueError):
        parse_domain("3..-3")
    with pytest.raises(ValueError):
        parse_domain("abc")


def test_oracle_flag(capsys):
    code, out, _ = run(capsys, str(CORPUS / "foo.c"), "--entry", "foo",
                       "--oracle", "--domain=-2..2")
    assert code == 0
    assert "oracle" in out.lower()


def test_multiple_inputs(capsys):
    code, out, _ = run(capsys, str(CORPUS / "foo.c"),
                       str(CORPUS / "get_row_length.c"))
    assert code == 0
    assert out.count("VARIABLE") == 2
