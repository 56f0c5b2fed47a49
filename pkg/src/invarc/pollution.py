"""Dependency graph construction and pollution propagation.

For a normalized program this module builds a directed graph with one
vertex per variable and an edge (y, x) whenever x may take a value
derived from y.  Store statements route their edges to the base
variables the written pointer may target, resolved by a flow-insensitive
address-taken analysis.  The set of variables polluted by an unmodelable
item is the breadth-first reachability closure of the item's initial
labels.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .diagnostics import ItemNotFound, NotAPointer
from .frontend.ast import ArrayType, FuncPtrType, PointerType, same_type
from . import normalize as N


TOP = object()  # unknown points-to set


@dataclass
class DependencyGraph:
    vertices: set = field(default_factory=set)
    edges: set = field(default_factory=set)           # (src, dst) pairs
    adj: dict = field(default_factory=dict)           # src -> sorted later

    def add_vertex(self, v):
        self.vertices.add(v)
        self.adj.setdefault(v, set())

    def add_edge(self, src, dst):
        self.add_vertex(src)
        self.add_vertex(dst)
        self.edges.add((src, dst))
        self.adj[src].add(dst)

    def successors(self, v):
        return self.adj.get(v, set())

    def dump(self):
        """Deterministic textual form, one `a -> b` line per edge."""
        lines = [f"{a} -> {b}" for a, b in sorted(self.edges)]
        return "\n".join(lines) + ("\n" if lines else "")


def _pointee(ctype):
    if isinstance(ctype, PointerType):
        return ctype.target
    if isinstance(ctype, ArrayType):
        return ctype.elem
    return None


def _is_pointerish(ctype):
    return isinstance(ctype, (PointerType, ArrayType))


class _BaseAnalysis:
    """Flow-insensitive address-taken analysis over the whole program.

    pts maps a pointer variable to a set of base variable names, or TOP
    when it may point anywhere (loaded from memory or returned by an
    unmodelable call).
    """

    def __init__(self, prog):
        self.prog = prog
        self.pts = {}
        self.address_taken = set()
        self._run()

    def _decl_type(self, name):
        d = self.prog.decls.get(name)
        return d.ctype if d else None

    def _run(self):
        stmts = [s for s in self.prog.walk() if isinstance(s, N.NAssign)]
        for s in stmts:
            if s.op in N.ADDR_OPS and s.op != "funcaddr":
                base = self._hint_base(s)
                if base is not None and not callable(base):
                    self.address_taken.update(base)
        changed = True
        while changed:
            changed = False
            for s in stmts:
                new = self._flow(s)
                if new is None:
                    continue
                old = self.pts.get(s.lhs, set())
                if old is TOP:
                    continue
                if new is TOP:
                    self.pts[s.lhs] = TOP
                    changed = True
                elif not new <= old:
                    self.pts[s.lhs] = old | new
                    changed = True

    def _hint_base(self, s):
        """Static contribution of an address op: a set of base names, a
        thunk over pts for pointer-mediated hints, or None."""
        if s.op == "addr" or s.op in ("member_addr", "elem_addr",
                                      "pmember_addr"):
            hint = s.base_hint
            if hint is None:
                # fall back to the operand itself
                if s.op in ("addr", "member_addr"):
                    hint = ("var", s.args[0].name)
                elif s.op == "elem_addr":
                    a = s.args[0]
                    if isinstance(a, N.VarRef):
                        t = self._decl_type(a.name)
                        hint = ("var" if isinstance(t, ArrayType) else "ptr",
                                a.name)
                else:
                    a = s.args[0]
                    hint = ("ptr", a.name) if isinstance(a, N.VarRef) else None
            if hint is None:
                return None
            kind, name = hint
            if kind == "var":
                return {name}
            return lambda: self.pts.get(name, set())
        return None

    def _flow(self, s):
        """Points-to contribution of one assignment, or None."""
        lt = self._decl_type(s.lhs)
        if not _is_pointerish(lt) and s.op not in N.ADDR_OPS:
            return None
        if s.op == "funcaddr":
            return set()
        base = self._hint_base(s)
        if base is not None:
            return base() if callable(base) else base
        if s.op in ("copy", "+", "-"):
            out = set()
            for a in s.args:
                if isinstance(a, N.VarRef) and \
                        _is_pointerish(self._decl_type(a.name)):
                    p = self.pts.get(a.name, set())
                    if p is TOP:
                        return TOP
                    out |= p
                    if isinstance(self._decl_type(a.name), ArrayType):
                        out.add(a.name)
            return out
        if s.op in ("deref", "member", "index"):
            return TOP  # pointer loaded from memory
        return None

    def bases(self, name):
        """Base variable set for pointer `name`, with the conservative
        fallback to all address-taken variables of compatible pointee
        type when nothing is resolvable."""
        t = self._decl_type(name)
        if not _is_pointerish(t) and not isinstance(t, FuncPtrType):
            raise NotAPointer(f"{name} is not pointer-typed")
        if isinstance(t, ArrayType):
            return {name}
        p = self.pts.get(name, set())
        if p is not TOP and p:
            return set(p)
        # unresolved or unknown: every address-taken variable whose type
        # can contain the pointee
        want = _pointee(t)
        out = set()
        for v in self.address_taken:
            vt = self._decl_type(v)
            if vt is None or want is None:
                out.add(v)
            elif same_type(vt, want) or \
                    (isinstance(vt, ArrayType) and same_type(vt.elem, want)):
                out.add(v)
            elif vt.__class__.__name__ == "StructType":
                out.add(v)  # member of v may have the pointee type
        return out


def resolve_base_variables(p, prog, _analysis=None):
    """Set of variables the pointer `p` may point into."""
    a = _analysis or _BaseAnalysis(prog)
    return a.bases(p)


def _stmt_edges(s, analysis):
    """Edges contributed by one simple statement, per the graph rules."""
    edges = []
    if isinstance(s, N.NAssign):
        for a in s.args:
            for v in N.atom_vars(a):
                edges.append((v, s.lhs))
    elif isinstance(s, N.NStore):
        bases = _store_bases(s, analysis)
        srcs = N.atom_vars(s.value) + N.atom_vars(s.ptr)
        for b in bases:
            for v in srcs:
                edges.append((v, b))
    elif isinstance(s, N.NUnmodelableCall):
        argvars = [v for a in s.args for v in N.atom_vars(a)]
        if s.lhs:
            for v in argvars:
                edges.append((v, s.lhs))
        for b in _pointer_arg_bases(s, analysis):
            for v in argvars:
                edges.append((v, b))
    elif isinstance(s, N.NFpDispatch):
        argvars = [s.fp] + [v for a in s.args for v in N.atom_vars(a)]
        if s.lhs:
            for v in argvars:
                edges.append((v, s.lhs))
        for b in _dispatch_pointer_bases(s, analysis):
            for v in argvars:
                edges.append((v, b))
    return edges


def _store_bases(s, analysis):
    out = set()
    for v in N.atom_vars(s.ptr):
        try:
            out |= analysis.bases(v)
        except NotAPointer:
            pass
    return out


def _pointer_arg_bases(s, analysis):
    out = set()
    for a in s.args:
        for v in N.atom_vars(a):
            t = analysis._decl_type(v)
            if _is_pointerish(t):
                out |= analysis.bases(v)
    return out


def _dispatch_pointer_bases(s, analysis):
    out = set()
    for a in s.args:
        for v in N.atom_vars(a):
            t = analysis._decl_type(v)
            if _is_pointerish(t):
                out |= analysis.bases(v)
    return out


def build_dependency_graph(prog, _analysis=None):
    analysis = _analysis or _BaseAnalysis(prog)
    g = DependencyGraph()
    for v in prog.decls:
        g.add_vertex(v)
    for s in prog.walk():
        for a, b in _stmt_edges(s, analysis):
            g.add_edge(a, b)
    return g


def initial_labels(prog, item, _analysis=None):
    """Vertices labeled directly by the unmodelable item `item`."""
    analysis = _analysis or _BaseAnalysis(prog)
    seeds = set()
    found = False
    for s in prog.walk():
        tag = getattr(s, "item", None)
        if tag is None or tag.span != item.span:
            continue
        found = True
        if isinstance(s, N.NAssign):
            seeds.add(s.lhs)
        elif isinstance(s, N.NUnmodelableCall):
            if s.lhs:
                seeds.add(s.lhs)
            seeds |= _pointer_arg_bases(s, analysis)
    if not found:
        raise ItemNotFound(
            f"item {item.kind} at {item.span} not present in program")
    return seeds


def propagate(g, seeds):
    """Breadth-first reachability closure of `seeds` in `g`."""
    seen = set(seeds)
    queue = deque(sorted(seeds))
    while queue:
        v = queue.popleft()
        for w in sorted(g.successors(v)):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


@dataclass
class PollutionResult:
    item: object
    initial: set
    polluted: set


def analyze_pollution(prog, report):
    """One PollutionResult per unmodelable item, plus the union closure."""
    analysis = _BaseAnalysis(prog)
    g = build_dependency_graph(prog, analysis)
    results = []
    union = set()
    for item in report.unmodelable_items:
        try:
            seeds = initial_labels(prog, item, analysis)
        except ItemNotFound:
            continue  # item was in dead/unreached code after inlining
        closure = propagate(g, seeds)
        results.append(PollutionResult(item=item, initial=seeds,
                                       polluted=closure))
        union |= closure
    return g, results, union
