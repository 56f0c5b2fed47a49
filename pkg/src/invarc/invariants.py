"""Candidate invariant enumeration, query emission, and verdicts.

A candidate is a single variable compared at two program points:
function entry/exit, across a loop (a composite of the three
one-iteration checks: pre = head, head = body-end, head = exit), or
between loop head and body end.  A candidate is reported invariant only
when the solver proves every required equality (unsat negation);
anything else, including timeouts and errors, yields unknown.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .diagnostics import UnknownSymbol
from .encoder import MEM

REPORT_VERSION = 1

POINT_NAMES = {
    "entry-exit": ("function-entry", "function-exit"),
    "loop": ("pre-loop", "post-loop"),
    "head-bend": ("loop-head", "loop-body-end"),
}


@dataclass
class Candidate:
    variable: str
    kind: str                  # key of POINT_NAMES
    loop_id: int = None
    pairs: list = field(default_factory=list)   # (sym_a, sym_b) to prove
    query_names: list = field(default_factory=list)
    verdict: str = None        # 'invariant' | 'unknown' (filled later)
    time_ms: float = 0.0

    @property
    def points(self):
        return POINT_NAMES[self.kind]


def _candidate_vars(prog, enc, havocked):
    """Scalar, non-temporary, non-havocked variables in source order."""
    out = []
    for name, decl in prog.decls.items():
        if name in havocked or decl.kind == "temp":
            continue
        if enc.sorts.get(name) in ("Int", "Real"):
            out.append((name, decl))
    return out


def enumerate_candidates(ab, enc):
    """Candidates for an AbstractProgram and its Encoding."""
    prog = ab.program
    havocked = set(ab.havocked) | set(enc.havocked)
    cands = []
    for name, decl in _candidate_vars(prog, enc, havocked):
        if decl.kind in ("param", "global") and name in enc.entry_env \
                and name in enc.exit_env:
            cands.append(Candidate(
                variable=name, kind="entry-exit",
                pairs=[(enc.entry_env[name].text, enc.exit_env[name].text)]))
    for lr in enc.loops:
        for name, decl in _candidate_vars(prog, enc, havocked):
            if name not in lr.pre:
                continue
            pre, head = lr.pre[name].text, lr.head[name].text
            bend, exit_ = lr.bend[name].text, lr.exit[name].text
            cands.append(Candidate(
                variable=name, kind="loop", loop_id=lr.loop_id,
                pairs=[(pre, head), (head, bend), (head, exit_)]))
            cands.append(Candidate(
                variable=name, kind="head-bend", loop_id=lr.loop_id,
                pairs=[(head, bend)]))
    return cands


def emit_query(cand, script, name):
    """Append the query blocks for one candidate; returns the names of
    the queries actually emitted (identical symbols are skipped)."""
    declared = script._declared
    names = []
    for i, (a, b) in enumerate(cand.pairs):
        if a == b:
            continue
        for sym in (a, b):
            if "@" in sym and sym not in declared:
                raise UnknownSymbol(f"symbol {sym} not declared in script")
        qname = f"{name}.{i}"
        script.add_query(qname, f"(not (= {a} {b}))")
        names.append(qname)
    cand.query_names = names
    return names


def interpret_result(verdict):
    """Map a raw solver verdict to the over-approximating answer."""
    return "invariant" if verdict == "unsat" else "unknown"


def combine_verdicts(raw_list):
    if all(v == "unsat" for v in raw_list):
        return "invariant"
    return "unknown"


@dataclass
class InvariantReport:
    program: str
    candidates: list
    polluted: list
    removed_stmts: list
    solver_time_ms: float = 0.0
    diagnostics: list = field(default_factory=list)

    def to_json(self):
        return json.dumps({
            "version": REPORT_VERSION,
            "program": self.program,
            "candidates": [
                {
                    "variable": c.variable,
                    "points": list(c.points),
                    "loop": c.loop_id,
                    "verdict": c.verdict,
                    "time_ms": round(c.time_ms, 3),
                }
                for c in self.candidates
            ],
            "polluted": sorted(self.polluted),
            "removed_stmts": [str(s) for s in self.removed_stmts],
            "solver_time_ms": round(self.solver_time_ms, 3),
            "diagnostics": self.diagnostics,
        }, indent=2)

    def to_text(self):
        rows = [("VARIABLE", "POINTS", "LOOP", "VERDICT")]
        for c in self.candidates:
            a, b = c.points
            rows.append((c.variable, f"{a} .. {b}",
                         str(c.loop_id) if c.loop_id is not None else "-",
                         c.verdict))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(r[i].ljust(widths[i]) for i in range(4))
                 for r in rows]
        if self.polluted:
            lines.append("")
            lines.append("excluded as polluted: "
                         + ", ".join(sorted(self.polluted)))
        return "\n".join(lines) + "\n"


def detect_invariants(ab, enc, solver_cfg, program_name="program"):
    """Full candidate pipeline: enumerate, query, solve, report."""
    import time
    from .solver import run_solver

    cands = enumerate_candidates(ab, enc)
    for i, c in enumerate(cands):
        emit_query(c, enc.script, f"q{i}${c.variable}${c.kind}")
    t0 = time.monotonic()
    verdicts = run_solver(enc.script, solver_cfg) if enc.script.queries \
        else {}
    elapsed = (time.monotonic() - t0) * 1000.0
    for c in cands:
        raw = [verdicts.get(q, "error") for q in c.query_names]
        c.verdict = combine_verdicts(raw) if raw else "invariant"
        c.time_ms = elapsed if c.query_names else 0.0
    polluted = sorted(v for v in ab.havocked
                      if not v.startswith("$") and v != MEM)
    return InvariantReport(
        program=program_name, candidates=cands, polluted=polluted,
        removed_stmts=[s for s in ab.removed_stmts],
        solver_time_ms=elapsed)
