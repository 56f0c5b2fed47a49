"""Inlining and lowering to simple-assignment form.

The normalized program keeps the control-flow skeleton (if/while trees) but
every assignment leaf is one of:

    x = op(y1, y2)     (single non-call operator, atoms only)
    x = op(y1)
    x = y1
    *x = y1            (store through a pointer-valued variable)

plus the bookkeeping kinds Havoc, UnmodelableCall, FpDispatch and Nop.
Branch and loop conditions stay as (call-free) expressions; they contribute
no dependency edges downstream.

Address-of-member expressions are lowered the way the worked examples do:
the member value is materialized into a temporary and the address of that
temporary is taken, with the statement tagged as the unmodelable item and
annotated with the true base object so base-variable resolution stays
conservative.
"""

from __future__ import annotations

import copy as _copy
from dataclasses import dataclass, field

from .diagnostics import (
    InlineDepthExceeded, NormalizeError, Span, UnsupportedExpression,
)
from .frontend.ast import (
    ArrayType, AssignStmt, Binary, BOOL, Call, CompoundStmt, DeclStmt,
    DOUBLE, Expr, ExprStmt, FloatLit, FuncPtrType, FunctionDef, IfStmt,
    Index, INT, IntLit, Member, Name, NullLit, PointerType, ReturnStmt,
    StructType, Unary, VarDecl, WhileStmt, expr_text, same_type, VOID,
)
from .frontend.classify import recursive_functions

BINARY_OPS = {"+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=",
              "&&", "||"}
UNARY_OPS = {"neg", "not"}
READ_OPS = {"copy", "deref", "member", "index"}
ADDR_OPS = {"addr", "elem_addr", "member_addr", "pmember_addr", "funcaddr"}


# ---------------------------------------------------------------------------
# Atoms and simple statements


@dataclass(frozen=True)
class VarRef:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Lit:
    value: object  # int or Fraction; None for the null pointer
    kind: str      # 'int', 'real', 'null'

    def __str__(self):
        if self.kind == "null":
            return "NULL"
        return str(self.value)


def atom_vars(a):
    return [a.name] if isinstance(a, VarRef) else []


@dataclass
class NAssign:
    lhs: str
    op: str            # 'copy', unary/binary op name, or an address op
    args: list         # atoms
    fld: str = None    # member name for member / *member_addr ops
    func: str = None   # for 'funcaddr'
    span: Span = None
    uid: int = 0
    item: object = None       # SubsetItem when this stmt realizes one
    base_hint: tuple = None   # ('var', name) | ('ptr', name) for addr ops


@dataclass
class NStore:
    ptr: object        # atom (VarRef)
    value: object      # atom
    span: Span = None
    uid: int = 0


@dataclass
class NHavoc:
    var: str
    span: Span = None
    uid: int = 0


@dataclass
class NUnmodelableCall:
    lhs: str           # '' when the callee result is unused
    func: str
    args: list
    span: Span = None
    uid: int = 0
    item: object = None


@dataclass
class NFpDispatch:
    lhs: str
    fp: str
    args: list
    candidates: list   # names of address-taken functions of this signature
    span: Span = None
    uid: int = 0


@dataclass
class NNop:
    span: Span = None
    uid: int = 0


@dataclass
class NIf:
    cond: object       # Expr, or NondetCond after abstraction
    then: list = field(default_factory=list)
    els: list = field(default_factory=list)
    span: Span = None
    uid: int = 0


@dataclass
class NWhile:
    cond: object
    body: list = field(default_factory=list)
    span: Span = None
    uid: int = 0
    loop_id: int = 0


@dataclass(frozen=True)
class NondetCond:
    """Placeholder for a branch condition replaced by an unknown boolean."""
    origin_span: Span = None


SIMPLE_KINDS = (NAssign, NStore, NHavoc, NUnmodelableCall, NFpDispatch, NNop)


@dataclass
class NDecl:
    name: str
    ctype: object
    kind: str          # 'param', 'global', 'local', 'temp'
    span: Span = None
    source_name: str = None  # pre-rename identifier, for reporting


@dataclass
class NormalizedProgram:
    entry: str
    decls: dict          # name -> NDecl, insertion-ordered
    body: list
    ret_var: str = None
    origin: dict = field(default_factory=dict)   # temp name -> Span
    designators: dict = field(default_factory=dict)
    # designators: pointer temp -> ('elem', base, idx_atom) | ('member', base, fld)
    #              | ('pmember', ptr, fld) | ('addrof', base)
    ast: object = None   # the inlined Ast (struct defs etc.)
    functions: dict = field(default_factory=dict)  # fp-dispatch candidates

    def walk(self):
        yield from walk_stmts(self.body)

    def variables(self):
        return list(self.decls)


def walk_stmts(stmts):
    for s in stmts:
        yield s
        if isinstance(s, NIf):
            yield from walk_stmts(s.then)
            yield from walk_stmts(s.els)
        elif isinstance(s, NWhile):
            yield from walk_stmts(s.body)


# ---------------------------------------------------------------------------
# Inlining (AST level)


@dataclass
class _UCallStmt:
    """AST-level marker: call we refuse to inline (recursive or library)."""
    lhs: str
    func: str
    args: list        # Expr args, already hoisted to simple names
    span: Span = None
    item_span: Span = None


@dataclass
class _FpCallStmt:
    lhs: str
    fp: Expr
    args: list
    candidates: list
    span: Span = None


class _ReturnCtx:
    def __init__(self, ret_var, done_flag):
        self.ret_var = ret_var
        self.done_flag = done_flag


def _may_return(s):
    if isinstance(s, ReturnStmt):
        return True
    if isinstance(s, CompoundStmt):
        return any(_may_return(x) for x in s.stmts)
    if isinstance(s, IfStmt):
        return _may_return(s.then) or (s.els is not None and _may_return(s.els))
    if isinstance(s, WhileStmt):
        return _may_return(s.body)
    return False


def _has_nontail_return(body):
    """True when a return can execute with statements still to run after it."""

    def scan(s, tail):
        if isinstance(s, ReturnStmt):
            return not tail
        if isinstance(s, CompoundStmt):
            n = len(s.stmts)
            return any(scan(x, tail and i == n - 1)
                       for i, x in enumerate(s.stmts))
        if isinstance(s, IfStmt):
            hit = scan(s.then, tail)
            if s.els is not None:
                hit = hit or scan(s.els, tail)
            return hit
        if isinstance(s, WhileStmt):
            return _may_return(s.body)  # a loop return always skips iterations
        return False

    return scan(body, True)


def address_taken_functions(ast):
    """Defined functions whose address is taken anywhere in the unit."""
    from .frontend.classify import walk_exprs
    taken = []

    def visit(e):
        target = None
        if isinstance(e, Unary) and e.op == "&" and isinstance(e.operand, Name):
            target = e.operand.decl
        elif isinstance(e, Name) and isinstance(e.decl, FunctionDef):
            target = e.decl
        if isinstance(target, FunctionDef) and target.name not in taken:
            taken.append(target.name)

    for fn in ast.functions:
        walk_exprs(fn.body, visit)
    for g in ast.globals:
        if g.init is not None:
            walk_exprs(DeclStmt(name=g.name, ctype=g.ctype, init=g.init), visit)
    # a bare use in call position is a direct call, not an address-taking;
    # filter to names used as values
    return taken


class Inliner:
    def __init__(self, ast, report, depth_limit=32):
        self.ast = ast
        self.report = report
        self.depth_limit = depth_limit
        self.recursive = recursive_functions(ast)
        self.counter = 0
        self.decls = {}      # name -> NDecl
        self.origin = {}
        self.fp_candidates = {}

    def fresh(self, base, ctype, span, kind="temp"):
        self.counter += 1
        name = f"${base}{self.counter}"
        self.decls[name] = NDecl(name, ctype, kind, span)
        if kind == "temp":
            self.origin[name] = span
        return name

    def declare(self, name, ctype, kind, span, source_name=None):
        if name in self.decls:
            raise NormalizeError(f"duplicate declaration of {name!r}", span)
        self.decls[name] = NDecl(name, ctype, kind, span,
                                 source_name=source_name or name)

    def run(self, entry_name, global_inits=True):
        fn = self.ast.function(entry_name)
        if fn is None:
            raise NormalizeError(f"no function named {entry_name!r}")
        for g in self.ast.globals:
            self.declare(g.name, g.ctype, "global", g.span)
        rename = {}
        for p in fn.params:
            if p.name in self.decls:
                new = self.fresh(p.name + "_", p.ctype, p.span, kind="param")
                rename[p.name] = new
            else:
                self.declare(p.name, p.ctype, "param", p.span)
        body = []
        # global initializers run before the entry body
        for g in (self.ast.globals if global_inits else ()):
            if g.init is not None:
                body.extend(self.stmt(
                    AssignStmt(target=_name_of(g), value=g.init, span=g.span),
                    {}, 0, _ReturnCtx(None, None)))
            if g.init_list is not None:
                for i, e in enumerate(g.init_list):
                    tgt = Index(arr=_name_of(g), index=IntLit(value=i, span=g.span),
                                span=g.span)
                    tgt.ctype = g.ctype.elem
                    body.extend(self.stmt(AssignStmt(target=tgt, value=e,
                                                     span=g.span), {}, 0,
                                          _ReturnCtx(None, None)))
        ret_var = None
        if fn.ret != VOID:
            ret_var = "$result"
            self.decls[ret_var] = NDecl(ret_var, fn.ret, "temp", fn.span)
        body.extend(self.function_body(fn, rename, 0, ret_var))
        return body, ret_var

    # -- statements ----------------------------------------------------------

    def function_body(self, fn, rename, depth, ret_var):
        """Lower one function instance, routing returns into ret_var.

        Early (non-tail) returns are realized with a done flag: every
        return sets it and everything after a possible return point is
        guarded by it; loops whose body may return also stop iterating.
        """
        ctx = _ReturnCtx(ret_var, None)
        if _has_nontail_return(fn.body):
            ctx.done_flag = self.fresh("done", INT, fn.span)
        out = []
        if ctx.done_flag is not None:
            out.append(AssignStmt(target=_name(ctx.done_flag, INT),
                                  value=IntLit(value=0, span=fn.span),
                                  span=fn.span))
        out.extend(self.block(fn.body, dict(rename), depth, ctx))
        return out

    def block(self, stmt, rename, depth, ctx):
        stmts = stmt.stmts if isinstance(stmt, CompoundStmt) else [stmt]
        out = []
        for i, s in enumerate(stmts):
            lowered = self.stmt(s, rename, depth, ctx)
            out.extend(lowered)
            rest = stmts[i + 1:]
            if rest and ctx.done_flag is not None and _may_return(s):
                guard = Binary(op="==", lhs=_name(ctx.done_flag, INT),
                               rhs=IntLit(value=0, span=s.span), span=s.span)
                guard.ctype = BOOL
                inner = self.block(CompoundStmt(stmts=rest, span=s.span),
                                   rename, depth, ctx)
                out.append(IfStmt(cond=guard,
                                  then=CompoundStmt(stmts=inner, span=s.span),
                                  span=s.span))
                return out
        return out

    def stmt(self, s, rename, depth, ctx):
        if isinstance(s, CompoundStmt):
            return self.block(s, dict(rename), depth, ctx)
        if isinstance(s, DeclStmt):
            new = self.fresh_local(s, rename, depth)
            out = []
            if s.init is not None:
                out.extend(self.assign(_name(new, s.ctype), s.init, rename,
                                       depth, s.span))
            if s.init_list is not None:
                for i, e in enumerate(s.init_list):
                    tgt = Index(arr=_name(new, s.ctype),
                                index=IntLit(value=i, span=s.span), span=s.span)
                    tgt.ctype = s.ctype.elem
                    out.extend(self.assign(tgt, e, rename, depth, s.span))
            return out
        if isinstance(s, AssignStmt):
            return self.assign(s.target, s.value, rename, depth, s.span)
        if isinstance(s, IfStmt):
            pre, cond = self.expr_no_calls(s.cond, rename, depth)
            then = self.stmt(s.then, dict(rename), depth, ctx)
            els = self.stmt(s.els, dict(rename), depth, ctx) if s.els else []
            node = IfStmt(cond=cond, then=CompoundStmt(stmts=then, span=s.span),
                          els=CompoundStmt(stmts=els, span=s.span) if els else None,
                          span=s.span)
            return pre + [node]
        if isinstance(s, WhileStmt):
            pre, cond = self.expr_no_calls(s.cond, rename, depth)
            body = self.stmt(s.body, dict(rename), depth, ctx)
            # condition temporaries are re-evaluated at the loop bottom
            body = body + [_copy.deepcopy(x) for x in pre]
            if ctx.done_flag is not None and _may_return(s.body):
                notdone = Binary(op="==", lhs=_name(ctx.done_flag, INT),
                                 rhs=IntLit(value=0, span=s.span), span=s.span)
                notdone.ctype = BOOL
                cond = Binary(op="&&", lhs=notdone, rhs=cond, span=s.span)
                cond.ctype = BOOL
            node = WhileStmt(cond=cond,
                             body=CompoundStmt(stmts=body, span=s.span),
                             span=s.span)
            return pre + [node]
        if isinstance(s, ReturnStmt):
            out = []
            if s.value is not None and ctx.ret_var is not None:
                out.extend(self.assign(_name(ctx.ret_var, s.value.ctype), s.value,
                                       rename, depth, s.span))
            if ctx.done_flag is not None:
                out.append(AssignStmt(target=_name(ctx.done_flag, INT),
                                      value=IntLit(value=1, span=s.span),
                                      span=s.span))
            return out
        if isinstance(s, ExprStmt):
            pre, _ = self.expr_no_calls(s.expr, rename, depth, drop_value=True)
            return pre
        raise NormalizeError(f"cannot inline statement {type(s).__name__}", s.span)

    def fresh_local(self, s, rename, depth):
        if depth == 0 and s.name not in self.decls and not s.name.startswith("$"):
            self.declare(s.name, s.ctype, "local", s.span, source_name=s.name)
            rename[s.name] = s.name
            return s.name
        new = self.fresh(s.name + "_", s.ctype, s.span)
        self.decls[new].source_name = s.name
        rename[s.name] = new
        return new

    def assign(self, target, value, rename, depth, span):
        pre_t, new_target = self.expr_no_calls(target, rename, depth)
        pre_v, new_value = self.expr_no_calls(value, rename, depth)
        return pre_t + pre_v + [AssignStmt(target=new_target, value=new_value,
                                           span=span)]

    # -- expressions: hoist calls, apply renaming ----------------------------

    def expr_no_calls(self, e, rename, depth, drop_value=False):
        pre = []
        new = self._rewrite(e, rename, depth, pre, drop_value)
        return pre, new

    def _rewrite(self, e, rename, depth, pre, drop_value=False):
        if e is None:
            return None
        if isinstance(e, Call):
            return self.hoist_call(e, rename, depth, pre, drop_value)
        new = _copy.copy(e)
        if isinstance(e, Name):
            if e.ident in rename:
                new.ident = rename[e.ident]
            return new
        for attr, v in vars(e).items():
            if isinstance(v, Expr):
                setattr(new, attr, self._rewrite(v, rename, depth, pre))
            elif isinstance(v, list):
                setattr(new, attr, [self._rewrite(x, rename, depth, pre)
                                    if isinstance(x, Expr) else x for x in v])
        return new

    def hoist_call(self, e, rename, depth, pre, drop_value=False):
        args = [self._rewrite(a, rename, depth, pre) for a in e.args]
        callee_decl = e.callee.decl if isinstance(e.callee, Name) else None
        if isinstance(callee_decl, FunctionDef):
            if callee_decl.name in self.recursive:
                return self._emit_ucall(e, callee_decl.name, args, pre, drop_value)
            return self._inline_body(e, callee_decl, args, depth, pre, drop_value)
        if callee_decl is None and isinstance(e.callee, Name):
            # library call: no definition in this translation unit
            return self._emit_ucall(e, e.callee.ident, args, pre, drop_value)
        # function-pointer call
        fp = self._rewrite(e.callee, rename, depth, pre)
        return self._emit_fp_dispatch(e, fp, args, pre)

    def _hoist_args(self, args, pre, span):
        atoms = []
        for a in args:
            if isinstance(a, (Name, IntLit, FloatLit, NullLit)):
                atoms.append(a)
                continue
            t = self.fresh("arg", a.ctype, span)
            pre.append(AssignStmt(target=_name(t, a.ctype), value=a, span=span))
            atoms.append(_name(t, a.ctype))
        return atoms

    def _emit_ucall(self, e, fname, args, pre, drop_value):
        atoms = self._hoist_args(args, pre, e.span)
        lhs = ""
        ret_t = e.ctype if e.ctype is not None else INT
        if not drop_value and ret_t != VOID:
            lhs = self.fresh("call", ret_t, e.span)
        pre.append(_UCallStmt(lhs=lhs, func=fname, args=atoms, span=e.span,
                              item_span=e.span))
        if lhs:
            return _name(lhs, ret_t)
        return IntLit(value=0, span=e.span)

    def _emit_fp_dispatch(self, e, fp, args, pre):
        atoms = self._hoist_args(args, pre, e.span)
        sig = fp.ctype
        cands = []
        for fname in address_taken_functions(self.ast):
            fdef = self.ast.function(fname)
            ftype = FuncPtrType(tuple(p.ctype for p in fdef.params), fdef.ret)
            if same_type(ftype, sig) and fname not in self.recursive:
                cands.append(fname)
                self.fp_candidates[fname] = fdef
        if not isinstance(fp, Name):
            t = self.fresh("fp", fp.ctype, e.span)
            pre.append(AssignStmt(target=_name(t, fp.ctype), value=fp, span=e.span))
            fp = _name(t, fp.ctype)
        ret_t = sig.ret if isinstance(sig, FuncPtrType) else INT
        lhs = self.fresh("call", ret_t if ret_t != VOID else INT, e.span)
        pre.append(_FpCallStmt(lhs=lhs, fp=fp, args=atoms, candidates=cands,
                               span=e.span))
        return _name(lhs, ret_t)

    def _inline_body(self, e, fdef, args, depth, pre, drop_value):
        if depth + 1 > self.depth_limit:
            raise InlineDepthExceeded(
                f"call nesting exceeds depth limit while inlining {fdef.name!r}",
                e.span)
        inner_rename = {}
        for p, a in zip(fdef.params, args):
            t = self.fresh(f"{fdef.name}_{p.name}", p.ctype, e.span)
            pre.append(AssignStmt(target=_name(t, p.ctype), value=a, span=e.span))
            inner_rename[p.name] = t
        ret_var = None
        if fdef.ret != VOID:
            ret_var = self.fresh(f"{fdef.name}_ret", fdef.ret, e.span)
        pre.extend(self.function_body(fdef, inner_rename, depth + 1, ret_var))
        if ret_var is not None and not drop_value:
            return _name(ret_var, fdef.ret)
        return IntLit(value=0, span=e.span)


def _name(ident, ctype):
    n = Name(ident=ident, span=None)
    n.ctype = ctype
    return n


def _name_of(decl):
    n = Name(ident=decl.name, span=decl.span)
    n.ctype = decl.ctype
    n.decl = decl
    return n


def inline_functions(ast, report, entry, depth_limit=32,
                     global_inits=True):
    """Inline every inlinable call in the entry function; returns the
    Inliner (flat statement list plus declaration table)."""
    inl = Inliner(ast, report, depth_limit)
    body, ret_var = inl.run(entry, global_inits=global_inits)
    return inl, body, ret_var


# ---------------------------------------------------------------------------
# Lowering to simple assignments


class Lowerer:
    def __init__(self, inliner, report):
        self.inl = inliner
        self.report = report
        self.item_spans = report.spans() if report is not None else set()
        self.designators = {}
        self.uid = 0
        self.loop_id = 0

    def next_uid(self):
        self.uid += 1
        return self.uid

    def fresh(self, base, ctype, span):
        return self.inl.fresh(base, ctype, span)

    def lower_block(self, stmts):
        out = []
        for s in stmts:
            out.extend(self.lower_stmt(s))
        return out

    def lower_stmt(self, s):
        if isinstance(s, AssignStmt):
            return self.lower_assign(s)
        if isinstance(s, IfStmt):
            then = self.lower_block(s.then.stmts if isinstance(s.then, CompoundStmt)
                                    else [s.then])
            els = []
            if s.els is not None:
                els = self.lower_block(s.els.stmts if isinstance(s.els, CompoundStmt)
                                       else [s.els])
            return [NIf(cond=s.cond, then=then, els=els, span=s.span,
                        uid=self.next_uid())]
        if isinstance(s, WhileStmt):
            self.loop_id += 1
            lid = self.loop_id
            body = self.lower_block(s.body.stmts if isinstance(s.body, CompoundStmt)
                                    else [s.body])
            return [NWhile(cond=s.cond, body=body, span=s.span,
                           uid=self.next_uid(), loop_id=lid)]
        if isinstance(s, _UCallStmt):
            out = []
            atoms = [self.atom(a, out) for a in s.args]
            item = self._find_item(s.span)
            out.append(NUnmodelableCall(lhs=s.lhs, func=s.func, args=atoms,
                                        span=s.span, uid=self.next_uid(),
                                        item=item))
            return out
        if isinstance(s, _FpCallStmt):
            out = []
            atoms = [self.atom(a, out) for a in s.args]
            out.append(NFpDispatch(lhs=s.lhs, fp=s.fp.ident, args=atoms,
                                   candidates=list(s.candidates), span=s.span,
                                   uid=self.next_uid()))
            return out
        raise NormalizeError(f"unexpected statement {type(s).__name__}",
                             getattr(s, "span", None))

    # -- assignments ---------------------------------------------------------

    def lower_assign(self, s):
        out = []
        t = s.target
        if isinstance(t, Name):
            self.lower_into(t.ident, s.value, out, s.span)
            return out
        if isinstance(t, Unary) and t.op == "*":
            p = self.atom(t.operand, out)
            v = self.atom(s.value, out)
            out.append(NStore(ptr=p, value=v, span=s.span, uid=self.next_uid()))
            return out
        if isinstance(t, Index):
            base = self.atom(t.arr, out)
            if not isinstance(base, VarRef):
                raise UnsupportedExpression("array store needs a named base",
                                            s.span)
            idx = self.atom(t.index, out)
            v = self.atom(s.value, out)
            pt = self.fresh("p", PointerType(t.ctype), s.span)
            st = NAssign(lhs=pt, op="elem_addr", args=[base, idx], span=s.span,
                         uid=self.next_uid())
            self.designators[pt] = ("elem", base.name, idx)
            out.extend([st, NStore(ptr=VarRef(pt), value=v, span=s.span,
                                   uid=self.next_uid())])
            return out
        if isinstance(t, Member):
            v = self.atom(s.value, out)
            pt = self.fresh("p", PointerType(t.ctype), s.span)
            if t.arrow:
                p = self.atom(t.obj, out)
                if not isinstance(p, VarRef):
                    raise UnsupportedExpression("member store needs a named base",
                                                s.span)
                st = NAssign(lhs=pt, op="pmember_addr", args=[p], fld=t.name,
                             span=s.span, uid=self.next_uid())
                self.designators[pt] = ("pmember", p.name, t.name)
            else:
                if not isinstance(t.obj, Name):
                    raise UnsupportedExpression(
                        "nested member store is unsupported", s.span)
                base = VarRef(t.obj.ident)
                st = NAssign(lhs=pt, op="member_addr", args=[base], fld=t.name,
                             span=s.span, uid=self.next_uid())
                self.designators[pt] = ("member", base.name, t.name)
            out.extend([st, NStore(ptr=VarRef(pt), value=v, span=s.span,
                                   uid=self.next_uid())])
            return out
        raise UnsupportedExpression("unsupported assignment target", s.span)

    def lower_into(self, lhs, e, out, span):
        """Lower e so its final value lands directly in lhs."""
        stmt = self.top_level(lhs, e, out, span)
        out.append(stmt)

    def top_level(self, lhs, e, out, span):
        uid = self.next_uid()
        if isinstance(e, Binary):
            if e.op in BINARY_OPS:
                a = self.atom(e.lhs, out)
                b = self.atom(e.rhs, out)
                return NAssign(lhs=lhs, op=e.op, args=[a, b], span=span, uid=uid)
        if isinstance(e, Unary):
            if e.op == "-":
                return NAssign(lhs=lhs, op="neg", args=[self.atom(e.operand, out)],
                               span=span, uid=uid)
            if e.op == "!":
                return NAssign(lhs=lhs, op="not", args=[self.atom(e.operand, out)],
                               span=span, uid=uid)
            if e.op == "*":
                return NAssign(lhs=lhs, op="deref",
                               args=[self.atom(e.operand, out)], span=span, uid=uid)
            if e.op == "&":
                return self.lower_addr(lhs, e, out, span, uid)
        if isinstance(e, Member):
            if e.arrow:
                p = self.atom(e.obj, out)
                t = self.fresh("v", StructType("?") if e.obj.ctype is None
                               else e.obj.ctype.target, span)
                out.append(NAssign(lhs=t, op="deref", args=[p], span=span,
                                   uid=self.next_uid()))
                return NAssign(lhs=lhs, op="member", args=[VarRef(t)], fld=e.name,
                               span=span, uid=uid)
            v = self.atom(e.obj, out)
            return NAssign(lhs=lhs, op="member", args=[v], fld=e.name,
                           span=span, uid=uid)
        if isinstance(e, Index):
            a = self.atom(e.arr, out)
            i = self.atom(e.index, out)
            return NAssign(lhs=lhs, op="index", args=[a, i], span=span, uid=uid)
        atom = self.atom(e, out)
        return NAssign(lhs=lhs, op="copy", args=[atom], span=span, uid=uid)

    def lower_addr(self, lhs, e, out, span, uid):
        inner = e.operand
        if isinstance(inner, Name):
            if isinstance(inner.decl, FunctionDef):
                return NAssign(lhs=lhs, op="funcaddr", args=[],
                               func=inner.decl.name, span=span, uid=uid)
            stmt = NAssign(lhs=lhs, op="addr", args=[VarRef(inner.ident)],
                           span=span, uid=uid, item=self._find_item(e.span),
                           base_hint=("var", inner.ident))
            self.designators[lhs] = ("addrof", inner.ident)
            return stmt
        if isinstance(inner, (Member, Index)):
            # materialize the member value, then take the temporary's address;
            # the true base is kept for base-variable resolution
            val = self.atom(inner, out)
            if not isinstance(val, VarRef):
                raise UnsupportedExpression("cannot take this address", span)
            hint = self._true_base(inner)
            return NAssign(lhs=lhs, op="addr", args=[val], span=span, uid=uid,
                           item=self._find_item(e.span), base_hint=hint)
        raise UnsupportedExpression("cannot take this address", span)

    def _true_base(self, e):
        """Outermost object containing the addressed member."""
        while True:
            if isinstance(e, Name):
                return ("var", e.ident)
            if isinstance(e, Member):
                if e.arrow:
                    return self._ptr_base(e.obj)
                e = e.obj
            elif isinstance(e, Index):
                at = e.arr.ctype
                if isinstance(at, PointerType):
                    return self._ptr_base(e.arr)
                e = e.arr
            elif isinstance(e, Unary) and e.op == "*":
                return self._ptr_base(e.operand)
            else:
                return None

    def _ptr_base(self, e):
        if isinstance(e, Name):
            return ("ptr", e.ident)
        return None

    def _find_item(self, span):
        if self.report is None or span is None:
            return None
        return self.report.item_at(span)

    # -- atoms ---------------------------------------------------------------

    def atom(self, e, out):
        if isinstance(e, IntLit):
            return Lit(e.value, "int")
        if isinstance(e, FloatLit):
            return Lit(e.value, "real")
        if isinstance(e, NullLit):
            return Lit(None, "null")
        if isinstance(e, Name):
            if isinstance(e.decl, FunctionDef):
                t = self.fresh("f", e.ctype, e.span)
                out.append(NAssign(lhs=t, op="funcaddr", args=[],
                                   func=e.decl.name, span=e.span,
                                   uid=self.next_uid()))
                return VarRef(t)
            return VarRef(e.ident)
        t = self.fresh("t", e.ctype if e.ctype is not None else INT, e.span)
        self.lower_into(t, e, out, e.span)
        return VarRef(t)


def to_simple_assignments(ast, report, entry, depth_limit=32,
                          global_inits=True):
    """Full normalization: inline, then lower to simple-assignment form."""
    inl, body, ret_var = inline_functions(ast, report, entry, depth_limit,
                                          global_inits=global_inits)
    low = Lowerer(inl, report)
    nbody = low.lower_block(body)
    prog = NormalizedProgram(
        entry=entry, decls=inl.decls, body=nbody, ret_var=ret_var,
        origin=inl.origin, designators=low.designators, ast=ast,
        functions=inl.fp_candidates)
    return prog


def renormalize_temp_count(prog):
    """Number of fresh temporaries a second lowering pass would introduce.

    Every statement leaf is already in simple form, so this counts the
    non-atom positions (always zero for a well-formed NormalizedProgram).
    """
    extra = 0
    for s in prog.walk():
        if isinstance(s, NAssign):
            for a in s.args:
                if not isinstance(a, (VarRef, Lit)):
                    extra += 1
        elif isinstance(s, NStore):
            if not isinstance(s.ptr, (VarRef, Lit)):
                extra += 1
            if not isinstance(s.value, (VarRef, Lit)):
                extra += 1
    return extra


# ---------------------------------------------------------------------------
# Pretty printer (for --dump normalized and golden tests)


def stmt_text(s):
    if isinstance(s, NAssign):
        if s.op == "copy":
            rhs = str(s.args[0])
        elif s.op == "neg":
            rhs = f"-{s.args[0]}"
        elif s.op == "not":
            rhs = f"!{s.args[0]}"
        elif s.op == "deref":
            rhs = f"*{s.args[0]}"
        elif s.op == "member":
            rhs = f"{s.args[0]}.{s.fld}"
        elif s.op == "index":
            rhs = f"{s.args[0]}[{s.args[1]}]"
        elif s.op == "addr":
            rhs = f"&{s.args[0]}"
        elif s.op == "elem_addr":
            rhs = f"&{s.args[0]}[{s.args[1]}]"
        elif s.op == "member_addr":
            rhs = f"&{s.args[0]}.{s.fld}"
        elif s.op == "pmember_addr":
            rhs = f"&{s.args[0]}->{s.fld}"
        elif s.op == "funcaddr":
            rhs = f"&{s.func}"
        else:
            rhs = f"{s.args[0]} {s.op} {s.args[1]}"
        mark = "   # item" if s.item is not None else ""
        return f"{s.lhs} = {rhs};{mark}"
    if isinstance(s, NStore):
        return f"*{s.ptr} = {s.value};"
    if isinstance(s, NHavoc):
        return f"havoc {s.var};"
    if isinstance(s, NUnmodelableCall):
        args = ", ".join(str(a) for a in s.args)
        lhs = f"{s.lhs} = " if s.lhs else ""
        return f"{lhs}unmodelable {s.func}({args});"
    if isinstance(s, NFpDispatch):
        args = ", ".join(str(a) for a in s.args)
        cands = ", ".join(s.candidates)
        return f"{s.lhs} = dispatch {s.fp}({args}) over [{cands}];"
    if isinstance(s, NNop):
        return "nop;"
    raise TypeError(f"unprintable {s!r}")


def program_text(prog_or_body, indent=0):
    body = prog_or_body.body if isinstance(prog_or_body, NormalizedProgram) \
        else prog_or_body
    lines = []
    pad = "  " * indent
    for s in body:
        if isinstance(s, NIf):
            lines.append(f"{pad}if ({cond_text(s.cond)}) {{")
            lines.extend(program_text(s.then, indent + 1).splitlines())
            if s.els:
                lines.append(f"{pad}}} else {{")
                lines.extend(program_text(s.els, indent + 1).splitlines())
            lines.append(f"{pad}}}")
        elif isinstance(s, NWhile):
            lines.append(f"{pad}while ({cond_text(s.cond)}) {{   # loop {s.loop_id}")
            lines.extend(program_text(s.body, indent + 1).splitlines())
            lines.append(f"{pad}}}")
        else:
            lines.append(pad + stmt_text(s))
    return "\n".join(lines) + ("\n" if indent == 0 else "")


def cond_text(c):
    if isinstance(c, NondetCond):
        return "nondet()"
    return expr_text(c)
