"""Reference interpreter tests, plus source/normalized agreement."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invarc.frontend import parse_translation_unit
from invarc.frontend.classify import classify_constructs
from invarc.interp import (
    StepBudgetExceeded, c_div, c_mod, run_normalized, run_source,
)
from invarc.normalize import to_simple_assignments

from genprog import branchy_c, loopy_c, straightline_c


def norm(src, entry):
    ast = parse_translation_unit(src)
    return ast, to_simple_assignments(ast, classify_constructs(ast), entry)


# --- C arithmetic semantics (division truncates toward zero) ---------------

@pytest.mark.parametrize("a,b,q,r", [
    (7, 2, 3, 1),
    (-7, 2, -3, -1),
    (7, -2, -3, 1),
    (-7, -2, 3, -1),
    (1, 3, 0, 1),
    (-1, 3, 0, -1),
])
def test_trunc_division(a, b, q, r):
    assert c_div(a, b) == q
    assert c_mod(a, b) == r


@given(st.integers(-1000, 1000), st.integers(-1000, 1000).filter(bool))
def test_div_mod_identity(a, b):
    assert c_div(a, b) * b + c_mod(a, b) == a
    assert abs(c_mod(a, b)) < abs(b)


def test_source_division_example():
    ast = parse_translation_unit(
        "int f(int a, int b) { int q = a / b; return q; }")
    assert run_source(ast, "f", [-7, 2]).ret == -3


def test_double_arithmetic_exact():
    ast = parse_translation_unit(
        "double f() { double d = 1; double s = d / 4 + d / 4;"
        " return s; }")
    assert run_source(ast, "f", []).ret == Fraction(1, 2)


def test_step_budget():
    ast = parse_translation_unit(
        "int f() { int x = 0; while (x < 10) { x = x * 1; } return x; }")
    with pytest.raises(StepBudgetExceeded):
        run_source(ast, "f", [], budget=1000)


def test_pointer_swap():
    ast = parse_translation_unit(
        "void swap(int* p, int* q) {"
        " int t = *p; *p = *q; *q = t; }\n"
        "int use(int a, int b) { swap(&a, &b); return a - b; }")
    assert run_source(ast, "use", [3, 10]).ret == 7


def test_struct_member_and_array():
    ast = parse_translation_unit(
        "struct P { int x; int y; };\n"
        "int f() { struct P p; int a[3]; p.x = 4; p.y = 2;"
        " a[p.y] = p.x * 5; return a[2] + p.y; }")
    assert run_source(ast, "f", []).ret == 22


def test_function_pointer_call():
    ast = parse_translation_unit(
        "int inc(int x) { return x + 1; }\n"
        "int dbl(int x) { return x * 2; }\n"
        "int pick(int w, int v) { int (*fp)(int);"
        " if (w) { fp = &inc; } else { fp = &dbl; }"
        " int r = fp(v); return r; }")
    assert run_source(ast, "pick", [1, 10]).ret == 11
    assert run_source(ast, "pick", [0, 10]).ret == 20


# --- frozen oracle values for the program generators -----------------------

def test_straightline_frozen():
    src = straightline_c(1)
    ast, prog = norm(src, "gen")
    expect = {(0, 0): 0, (2, -1): -3, (-3, 3): 6}
    for (a, b), want in expect.items():
        r = run_source(ast, "gen", [a, b])
        assert r.ret == want, (a, b)
        assert r.finals["keep"] == a
        rn = run_normalized(prog, {"a": a, "b": b})
        assert rn.ret == want and rn.finals["keep"] == a


def test_loopy_frozen():
    src = loopy_c(3)
    ast, prog = norm(src, "gen")
    for a, want in [(-2, 5), (0, 5), (2, 5)]:
        assert run_source(ast, "gen", [a, 5]).ret == want
        assert run_normalized(prog, {"a": a, "b": 5}).ret == want


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(-3, 3), st.integers(-3, 3))
def test_straightline_agreement(seed, a, b):
    src = straightline_c(seed)
    ast, prog = norm(src, "gen")
    r1 = run_source(ast, "gen", [a, b])
    r2 = run_normalized(prog, {"a": a, "b": b})
    assert r1.ret == r2.ret
    assert r1.finals["keep"] == r2.finals["keep"] == a


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(-3, 3), st.integers(-3, 3),
       st.integers(-3, 3))
def test_branchy_agreement(seed, a, b, c):
    src = branchy_c(seed)
    ast, prog = norm(src, "gen")
    r1 = run_source(ast, "gen", [a, b, c])
    r2 = run_normalized(prog, {"a": a, "b": b, "c": c})
    assert r1.ret == r2.ret


def test_loop_events_phases():
    ast = parse_translation_unit(
        "int f(int n) { int i = 0; while (i < n) { i = i + 1; }"
        " return i; }")
    ev = run_source(ast, "f", [2]).loop_events
    phases = [phase for _, phase, _ in ev]
    assert phases == ["pre", "head", "bend", "head", "bend", "post"]
    assert ev[0][2]["i"] == 0
    assert ev[-1][2]["i"] == 2
