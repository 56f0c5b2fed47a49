"""Havoc abstraction of a normalized program.

Given the polluted-variable closure, rewrites the program so that
nothing downstream of an unmodelable item needs precise modeling:
assignments to polluted variables become Havoc (a fresh unknown at each
occurrence), statements that dereference polluted pointers are removed,
and branch conditions mentioning polluted variables become
nondeterministic booleans.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import InconsistentInput
from .frontend.ast import Binary, Call, Index, Member, Name, Unary
from . import normalize as N
from .pollution import build_dependency_graph, propagate, _BaseAnalysis


@dataclass
class AbstractProgram:
    program: N.NormalizedProgram
    havocked: set = field(default_factory=set)
    removed_stmts: list = field(default_factory=list)      # spans
    nondet_conditions: list = field(default_factory=list)  # spans


def expr_vars(e):
    """Free variable names of an AST expression (used for conditions)."""
    out = set()

    def walk(x):
        if isinstance(x, Name):
            if x.decl is None or not hasattr(x.decl, "params"):
                out.add(x.ident)
        elif isinstance(x, Unary):
            walk(x.operand)
        elif isinstance(x, Binary):
            walk(x.lhs)
            walk(x.rhs)
        elif isinstance(x, Member):
            walk(x.obj)
        elif isinstance(x, Index):
            walk(x.arr)
            walk(x.index)
        elif isinstance(x, Call):
            walk(x.callee)
            for a in x.args:
                walk(a)
    walk(e)
    return out


def _atom_polluted(a, polluted):
    return any(v in polluted for v in N.atom_vars(a))


class _Abstractor:
    def __init__(self, prog, polluted, analysis):
        self.prog = prog
        self.polluted = polluted
        self.analysis = analysis
        self.havocked = set()
        self.removed = []
        self.nondet = []

    def havoc(self, var, span, uid):
        self.havocked.add(var)
        return N.NHavoc(var=var, span=span, uid=uid)

    def body(self, stmts):
        out = []
        for s in stmts:
            r = self.stmt(s)
            if r is not None:
                out.append(r)
        return out

    def stmt(self, s):
        p = self.polluted
        if isinstance(s, N.NAssign):
            if s.lhs in p:
                return self.havoc(s.lhs, s.span, s.uid)
            return s
        if isinstance(s, N.NStore):
            ptr_bad = _atom_polluted(s.ptr, p)
            val_bad = _atom_polluted(s.value, p)
            bases = set()
            for v in N.atom_vars(s.ptr):
                try:
                    bases |= self.analysis.bases(v)
                except Exception:
                    pass
            bases_bad = bool(bases) and bases <= p
            if ptr_bad or val_bad or bases_bad:
                self.removed.append(s.span)
                return None
            return s
        if isinstance(s, N.NHavoc):
            self.havocked.add(s.var)
            return s
        if isinstance(s, N.NUnmodelableCall):
            if s.lhs:
                return self.havoc(s.lhs, s.span, s.uid)
            return N.NNop(span=s.span, uid=s.uid)
        if isinstance(s, N.NFpDispatch):
            if s.lhs in p:
                return self.havoc(s.lhs, s.span, s.uid)
            if s.fp in p or any(_atom_polluted(a, p) for a in s.args):
                self.removed.append(s.span)
                if s.lhs:
                    return self.havoc(s.lhs, s.span, s.uid)
                return None
            return s
        if isinstance(s, N.NNop):
            return s
        if isinstance(s, N.NIf):
            cond = self.cond(s.cond, s.span)
            return N.NIf(cond=cond, then=self.body(s.then),
                         els=self.body(s.els), span=s.span, uid=s.uid)
        if isinstance(s, N.NWhile):
            cond = self.cond(s.cond, s.span)
            return N.NWhile(cond=cond, body=self.body(s.body), span=s.span,
                            uid=s.uid, loop_id=s.loop_id)
        return s

    def cond(self, c, span):
        if isinstance(c, N.NondetCond):
            return c
        if expr_vars(c) & self.polluted:
            self.nondet.append(span)
            return N.NondetCond(origin_span=span)
        return c


def abstract_program(prog, polluted, graph=None):
    graph = graph or build_dependency_graph(prog)
    closure = propagate(graph, polluted & graph.vertices)
    if closure != set(polluted):
        raise InconsistentInput(
            "polluted set is not closed under graph reachability")
    analysis = _BaseAnalysis(prog)
    ab = _Abstractor(prog, set(polluted), analysis)
    new_body = ab.body(prog.body)
    new_prog = N.NormalizedProgram(
        entry=prog.entry, decls=prog.decls, body=new_body,
        ret_var=prog.ret_var, origin=prog.origin,
        designators=prog.designators, ast=prog.ast,
        functions=prog.functions)
    ab.havocked |= set(polluted)
    return AbstractProgram(program=new_prog, havocked=ab.havocked,
                           removed_stmts=ab.removed,
                           nondet_conditions=ab.nondet)
