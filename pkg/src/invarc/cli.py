"""Command-line pipeline: parse, normalize, pollute, abstract, encode,
solve, report.

Exit codes: 0 analysis completed (regardless of verdicts), 1 usage
error, 2 parse/type error in the input program, 3 solver infrastructure
error.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from dataclasses import dataclass, field

from .diagnostics import InvarcError, ParseFailure, ProtocolError, \
    RejectedConstruct, SolverNotFound, StepBudgetExceeded, FrontendTypeError
from .frontend import parse_translation_unit
from .frontend.ast import IntType, LongType, ast_text
from .frontend.classify import classify_constructs
from .normalize import to_simple_assignments, program_text
from .pollution import analyze_pollution
from .abstraction import abstract_program
from .encoder import encode_program
from .invariants import detect_invariants
from .solver import SolverConfig, discover_solver
from .interp import InterpError, run_source

DUMP_STAGES = ("ast", "normalized", "graph", "abstract", "smt")
MAX_ORACLE_RUNS = 4096


@dataclass
class RunConfig:
    inputs: list
    entry: str = None
    solver: SolverConfig = None
    fmt: str = "text"
    dumps: tuple = ()
    oracle: bool = False
    domain: tuple = (-3, 3)
    keep_artifacts: bool = False
    out: object = None


def _pick_entry(ast, entry):
    if entry:
        if ast.function(entry) is None:
            raise FrontendTypeError(f"no function named {entry!r}")
        return entry
    if len(ast.functions) == 1:
        return ast.functions[0].name
    names = [f.name for f in ast.functions]
    if "main" in names:
        return "main"
    raise FrontendTypeError(
        f"multiple functions ({', '.join(names)}): use --entry")


def build_pipeline(source_text, entry=None):
    """Everything up to (and including) the encoding; shared by the CLI
    and the test suite."""
    ast = parse_translation_unit(source_text)
    report = classify_constructs(ast)
    entry = _pick_entry(ast, entry)
    prog = to_simple_assignments(ast, report, entry)
    graph, per_item, polluted = analyze_pollution(prog, report)
    ab = abstract_program(prog, polluted, graph)
    enc = encode_program(ab.program, ab.havocked)
    return ast, report, prog, graph, ab, enc


def analyze(cfg):
    reports = [_analyze_one(cfg, path) for path in cfg.inputs]
    return reports[-1]


def _analyze_one(cfg, path):
    out = cfg.out or sys.stdout
    source = open(path).read()
    ast, report, prog, graph, ab, enc = build_pipeline(source, cfg.entry)
    if "ast" in cfg.dumps:
        out.write(ast_text(ast))
    if "normalized" in cfg.dumps:
        out.write(program_text(prog))
    if "graph" in cfg.dumps:
        out.write(graph.dump())
    if "abstract" in cfg.dumps:
        out.write(program_text(ab.program))
    solver_cfg = cfg.solver or discover_solver(
        keep_artifacts=cfg.keep_artifacts)
    report_obj = detect_invariants(ab, enc, solver_cfg,
                                   program_name=prog.entry)
    if "smt" in cfg.dumps:
        out.write(enc.script.render())
    if cfg.fmt == "json":
        out.write(report_obj.to_json() + "\n")
    else:
        out.write(report_obj.to_text())
    if cfg.oracle:
        oracle = check_oracle(ast, prog.entry, enc, report_obj, cfg.domain)
        for line in oracle["lines"]:
            out.write(line + "\n")
        if oracle["violations"]:
            out.write("ORACLE VIOLATION\n")
    return report_obj


def _loop_pairs(events, span, first, second):
    """Chronological (first, second) snapshot pairs for one loop span."""
    pairs = []
    pending = None
    for sp, phase, snap in events:
        if sp != span:
            continue
        if phase == first:
            pending = snap
        elif phase == second and pending is not None:
            pairs.append((pending, snap))
            pending = None
    return pairs


def check_oracle(ast, entry, enc, report_obj, domain):
    """Brute-force every scalar input vector and cross-check each
    reported invariant; returns lines plus the list of violations."""
    fn = ast.function(entry)
    lo, hi = domain
    axes = []
    for p in fn.params:
        if isinstance(p.ctype, (IntType, LongType)):
            axes.append(list(range(lo, hi + 1)))
        else:
            axes.append([None])  # non-scalar: default value
    loop_spans = {lr.loop_id: lr.span for lr in enc.loops}
    violations = []
    checked = {c: 0 for c in range(len(report_obj.candidates))}
    runs = 0
    for vec in itertools.islice(itertools.product(*axes), MAX_ORACLE_RUNS):
        args = []
        from .interp import default_value
        structs = {sd.name: sd for sd in ast.struct_defs}
        for p, v in zip(fn.params, vec):
            args.append(v if v is not None
                        else default_value(p.ctype, structs))
        try:
            res = run_source(ast, entry, args)
        except (InterpError, StepBudgetExceeded):
            continue
        runs += 1
        for idx, c in enumerate(report_obj.candidates):
            if c.verdict != "invariant":
                continue
            ok = _check_candidate(c, res, loop_spans)
            if ok is None:
                continue
            checked[idx] += 1
            if not ok:
                violations.append((c.variable, c.kind, vec))
    lines = [f"oracle: {runs} executions over [{lo}, {hi}]"]
    for idx, c in enumerate(report_obj.candidates):
        if c.verdict != "invariant":
            continue
        status = "pass" if not any(v[0] == c.variable and v[1] == c.kind
                                   for v in violations) else "FAIL"
        lines.append(f"oracle: {c.variable} {c.kind}: {status} "
                     f"({checked[idx]} checks)")
    return {"lines": lines, "violations": violations, "runs": runs}


def _check_candidate(c, res, loop_spans):
    """True/False when checkable on this execution, None otherwise."""
    if c.kind == "entry-exit":
        a = res.entry_values.get(c.variable)
        b = res.finals.get(c.variable)
        if a is None or b is None:
            return None
        return a == b
    span = loop_spans.get(c.loop_id)
    if span is None:
        return None
    first, second = ("pre", "post") if c.kind == "loop" else ("head", "bend")
    pairs = _loop_pairs(res.loop_events, span, first, second)
    if not pairs:
        return None
    for a, b in pairs:
        if c.variable not in a or c.variable not in b:
            return None
        if a[c.variable] != b[c.variable]:
            return False
    return True


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def make_parser():
    p = _Parser(prog="invarc",
                description="variable-value invariant detection for a "
                            "C subset via SMT solving")
    p.add_argument("inputs", nargs="+", metavar="FILE.c")
    p.add_argument("--entry", metavar="NAME")
    p.add_argument("--solver", metavar="PATH")
    p.add_argument("--timeout-ms", type=int, default=10_000)
    p.add_argument("--format", choices=("json", "text"), default="text",
                   dest="fmt")
    p.add_argument("--dump", action="append", choices=DUMP_STAGES,
                   default=[], metavar="STAGE")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--domain", default="-3..3", metavar="LO..HI")
    p.add_argument("--keep-artifacts", action="store_true")
    return p


def parse_domain(text):
    lo, sep, hi = text.partition("..")
    if not sep:
        raise ValueError(f"bad domain {text!r}, expected LO..HI")
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise ValueError(f"bad domain {text!r}: lower bound above upper")
    return lo, hi


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        domain = parse_domain(args.domain)
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    solver_cfg = None
    if args.solver:
        solver_cfg = SolverConfig(executable=args.solver,
                                  timeout_ms=args.timeout_ms,
                                  keep_artifacts=args.keep_artifacts)
    cfg = RunConfig(inputs=args.inputs, entry=args.entry, solver=solver_cfg,
                    fmt=args.fmt, dumps=tuple(args.dump), oracle=args.oracle,
                    domain=domain, keep_artifacts=args.keep_artifacts)
    if solver_cfg is None:
        try:
            cfg.solver = discover_solver(timeout_ms=args.timeout_ms,
                                         keep_artifacts=args.keep_artifacts)
        except SolverNotFound as e:
            sys.stderr.write(f"error: {e}\n")
            return 3
    try:
        analyze(cfg)
    except FileNotFoundError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    except (ParseFailure, RejectedConstruct, FrontendTypeError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    except (SolverNotFound, ProtocolError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 3
    except InvarcError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
