"""Construct classification: which AST nodes the encoder cannot model.

Each flagged occurrence carries its span; the downstream pipeline computes
one polluted set per item and unions them.  Flagged kinds:

  * ``address-of-member``: &x.m, &x->m, &a[i] in the source.  Members live
    inside a host object, so their addresses do not fit the per-variable
    base-address memory scheme; they are conservatively treated as opaque.
  * ``address-of-aggregate-with-nested-members``: &v where v is a struct
    containing struct or array members (the flat base+offset layout only
    covers scalar members).
  * ``recursive-call``: call to a function on a call-graph cycle, which
    inlining cannot eliminate.
  * ``library-call``: call to a function with no definition in this
    translation unit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    ArrayType, AssignStmt, Call, CompoundStmt, DeclStmt, ExprStmt,
    FunctionDef, IfStmt, Index, Member, Name, PointerType, ReturnStmt,
    StructType, Unary, WhileStmt,
)

UNMODELABLE_KINDS = (
    "address-of-member",
    "address-of-aggregate-with-nested-members",
    "recursive-call",
    "library-call",
)


@dataclass(frozen=True)
class SubsetItem:
    kind: str
    span: object
    reason: str = ""


@dataclass
class SubsetReport:
    unmodelable_items: list = field(default_factory=list)
    rejected_items: list = field(default_factory=list)

    def spans(self):
        return {it.span for it in self.unmodelable_items}

    def item_at(self, span):
        for it in self.unmodelable_items:
            if it.span == span:
                return it
        return None


def _call_targets(ast):
    """Call graph over defined functions; names of callees per function."""
    graph = {}
    for fn in ast.functions:
        callees = set()

        def visit(e):
            if isinstance(e, Call) and isinstance(e.callee, Name):
                if isinstance(e.callee.decl, FunctionDef):
                    callees.add(e.callee.decl.name)

        walk_exprs(fn.body, visit)
        graph[fn.name] = callees
    return graph


def recursive_functions(ast):
    """Functions that can reach themselves in the call graph."""
    graph = _call_targets(ast)
    out = set()
    for start in graph:
        seen = set()
        stack = list(graph[start])
        while stack:
            f = stack.pop()
            if f == start:
                out.add(start)
                break
            if f in seen:
                continue
            seen.add(f)
            stack.extend(graph.get(f, ()))
    return out


def walk_exprs(node, visit):
    """Call visit on every expression node under a statement, pre-order."""
    from .ast import Expr, Stmt

    def expr(e):
        if e is None:
            return
        visit(e)
        for v in vars(e).values():
            if isinstance(v, Expr):
                expr(v)
            elif isinstance(v, list):
                for x in v:
                    if isinstance(x, Expr):
                        expr(x)

    def stmt(s):
        if s is None:
            return
        for v in vars(s).values():
            if isinstance(v, Expr):
                expr(v)
            elif isinstance(v, Stmt):
                stmt(v)
            elif isinstance(v, list):
                for x in v:
                    if isinstance(x, Stmt):
                        stmt(x)
                    elif isinstance(x, Expr):
                        expr(x)

    stmt(node)


def has_nested_members(ast, struct_type):
    sd = ast.struct(struct_type.name)
    if sd is None:
        return True
    return any(isinstance(t, (StructType, ArrayType)) for _, t in sd.members)


def classify_constructs(ast):
    """Deterministic SubsetReport over a well-formed, typechecked Ast."""
    items = []
    recursive = recursive_functions(ast)

    def visit(e):
        if isinstance(e, Unary) and e.op == "&":
            inner = e.operand
            if isinstance(inner, (Member, Index)):
                items.append(SubsetItem(
                    "address-of-member", e.span,
                    "address of a member/element cannot be assigned its own base"))
            elif isinstance(inner, Name) and isinstance(inner.ctype, StructType) \
                    and has_nested_members(ast, inner.ctype):
                items.append(SubsetItem(
                    "address-of-aggregate-with-nested-members", e.span,
                    "flat base+offset layout covers scalar members only"))
        elif isinstance(e, Call) and isinstance(e.callee, Name):
            decl = e.callee.decl
            if isinstance(decl, FunctionDef):
                if decl.name in recursive:
                    items.append(SubsetItem(
                        "recursive-call", e.span,
                        "inlining cannot eliminate a recursive call"))
            elif decl is None or not isinstance(decl, FunctionDef):
                # callee resolves to a variable: a function-pointer call,
                # handled via dispatch, not flagged here
                pass
        elif isinstance(e, Call) and not isinstance(e.callee, Name):
            pass

    def visit_with_library(e):
        visit(e)
        if isinstance(e, Call) and isinstance(e.callee, Name):
            decl = e.callee.decl
            from .ast import FuncPtrType
            if decl is None:
                items.append(SubsetItem("library-call", e.span,
                                        "no definition in this translation unit"))

    for fn in ast.functions:
        walk_exprs(fn.body, visit_with_library)
    for g in ast.globals:
        if g.init is not None:
            walk_exprs(DeclStmt(name=g.name, ctype=g.ctype, init=g.init), visit_with_library)

    seen = set()
    unique = []
    for it in sorted(items, key=lambda i: (i.span, i.kind)):
        key = (it.kind, it.span)
        if key not in seen:
            seen.add(key)
            unique.append(it)
    return SubsetReport(unmodelable_items=unique, rejected_items=[])
