"""Normalizer tests: inlining, decomposition to simple assignments."""

import pytest

from invarc.diagnostics import InlineDepthExceeded, NormalizeError
from invarc.frontend import parse_translation_unit
from invarc.frontend.classify import classify_constructs
from invarc.interp import default_value, run_normalized, run_source
from invarc.normalize import (
    ADDR_OPS, BINARY_OPS, NAssign, NIf, NStore, NWhile, inline_functions,
    program_text, to_simple_assignments, walk_stmts,
)

from conftest import corpus_entry, corpus_source


def norm(src, entry):
    ast = parse_translation_unit(src)
    report = classify_constructs(ast)
    return to_simple_assignments(ast, report, entry)


def assert_simple(prog):
    """Every statement body holds at most one operator application."""
    for st in walk_stmts(prog.body):
        if isinstance(st, NAssign):
            assert st.op in BINARY_OPS or st.op in ADDR_OPS or st.op in (
                "copy", "const", "deref", "member", "index", "neg", "not",
                "call")
            from invarc.normalize import Lit, VarRef
            for a in st.args:
                assert isinstance(a, (VarRef, Lit)) or a is None
        elif isinstance(st, NStore):
            assert isinstance(st.ptr, str)


def test_decompose_compound_expression():
    prog = norm("int f(int a, int b) { int r = (a + b) * (a - b);"
                " return r; }", "f")
    assert_simple(prog)
    ops = [s.op for s in walk_stmts(prog.body) if isinstance(s, NAssign)]
    assert ops.count("+") == 1 and ops.count("-") == 1 \
        and ops.count("*") == 1


def test_temps_fresh_and_typed():
    prog = norm("int f(int a) { int r = a * a + a; return r; }", "f")
    temps = [d for d in prog.decls.values() if d.kind == "temp"]
    assert len(temps) >= 1
    assert len({d.name for d in temps}) == len(temps)


def test_inline_call_removed():
    src = corpus_source("get_row_length.c")
    ast = parse_translation_unit(src)
    _, body, _ = inline_functions(
        ast, classify_constructs(ast), "GetRowLength")
    calls = [s for s in walk_stmts(body)
             if isinstance(s, NAssign) and s.op == "call"]
    assert calls == []


def test_inline_depth_limit():
    # A long chain of non-recursive calls past the inlining depth bound.
    n = 80
    lines = ["int f0(int x) { return x + 1; }"]
    for i in range(1, n):
        lines.append(
            f"int f{i}(int x) {{ int r = f{i - 1}(x); return r; }}")
    lines.append(f"int top(int x) {{ int r = f{n - 1}(x); return r; }}")
    with pytest.raises(InlineDepthExceeded):
        norm("\n".join(lines), "top")


def test_control_structure_preserved():
    prog = norm(
        "int f(int a) { int r = 0;"
        " while (a > 0) { if (a > 2) { r = r + 2; } else { r = r + 1; }"
        " a = a - 1; } return r; }", "f")
    loops = [s for s in walk_stmts(prog.body) if isinstance(s, NWhile)]
    assert len(loops) == 1
    ifs = [s for s in walk_stmts(loops[0].body) if isinstance(s, NIf)]
    assert len(ifs) == 1


def test_semantics_preserved_foo():
    src = corpus_source("foo.c")
    entry = corpus_entry("foo.c")
    prog = norm(src, entry)
    ast = parse_translation_unit(src)
    ctype = ast.function(entry).params[0].ctype
    for i in (1, 2, -1):
        r1 = run_source(ast, entry, [default_value(ctype, {sd.name: sd for sd in ast.struct_defs}), i])
        r2 = run_normalized(
            prog, {"c1": default_value(ctype, {sd.name: sd for sd in ast.struct_defs}), "i": i})
        assert r1.finals["cnt"] == r2.finals["cnt"] == 100, i


def test_semantics_preserved_get_row_length():
    src = corpus_source("get_row_length.c")
    entry = corpus_entry("get_row_length.c")
    prog = norm(src, entry)
    ast = parse_translation_unit(src)
    ctype = ast.function(entry).params[0].ctype
    r1 = run_source(ast, entry,
                    [default_value(ctype, {sd.name: sd for sd in ast.struct_defs}), 2])
    r2 = run_normalized(
        prog, {"table_header": default_value(ctype, {sd.name: sd for sd in ast.struct_defs}),
               "index": 2})
    assert r1.ret == r2.ret == 0


def test_deterministic_output():
    src = corpus_source("sequential_scan.c")
    t1 = program_text(norm(src, "SequentialScan"))
    t2 = program_text(norm(src, "SequentialScan"))
    assert t1 == t2


def test_spans_carried():
    prog = norm("int f(int a) {\n int r = a + 1;\n return r;\n}", "f")
    adds = [s for s in walk_stmts(prog.body)
            if isinstance(s, NAssign) and s.op == "+"]
    assert adds[0].span.line == 2


def test_nonrecursive_mutual_calls_inline():
    src = ("int g(int x) { return x + 1; }\n"
           "int h(int x) { int a = g(x); return a * 2; }\n"
           "int top(int x) { int a = h(x); int b = g(a); return b; }")
    prog = norm(src, "top")
    assert_simple(prog)
    r = run_normalized(prog, {"x": 3})
    assert r.ret == (3 + 1) * 2 + 1
