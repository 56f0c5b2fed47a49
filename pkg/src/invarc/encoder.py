"""SMT-LIB 2 encoding of an abstracted normalized program.

The encoding is single-assignment: every program variable maps to a
chain of versioned solver symbols (`v@0`, `v@1`, ...), and memory is a
record of Addr-indexed arrays (one per scalar sort) threaded through the
statement sequence the same way.  Branches encode both arms and merge
with ITE terms; loops are modeled as a single nondeterministically
guarded iteration from havocked head symbols, with the pre/head/body-end
/exit symbols recorded so the invariant engine can run its three-point
check.  Address-taken variables live in the memory arrays at distinct
base addresses; whenever no precise encoding exists the affected symbol
is left unconstrained, which weakens but never unsounds a verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .diagnostics import EncodeError, UnboundVariable, UnsupportedOperator, \
    UnsupportedType
from .frontend.ast import (
    ArrayType, Binary, BoolType, DoubleType, FuncPtrType, FunctionDef,
    Index, IntLit, FloatLit, Member, Name, NullLit, PointerType, StructType,
    Unary, VOID,
)
from . import normalize as N


class _Unencodable(Exception):
    """Internal signal: fall back to an unconstrained symbol."""


class Unmodelable:
    """Sentinel value returned by encode_member_address for shapes the
    address record cannot represent."""

    def __repr__(self):
        return "Unmodelable"


UNMODELABLE = Unmodelable()

MEM = "%mem"   # pseudo-variable for the threaded memory record

PREAMBLE = [
    "(set-logic ALL)",
    "(declare-datatype Addr ((mk-addr (addr-base Int) (addr-off Int))))",
    "(declare-datatype Mem ((mk-mem"
    " (mem-int (Array Addr Int))"
    " (mem-real (Array Addr Real))"
    " (mem-ptr (Array Addr Addr)))))",
    "(define-fun cdiv ((a Int) (b Int)) Int"
    " (ite (>= (* a b) 0) (div (abs a) (abs b)) (- (div (abs a) (abs b)))))",
    "(define-fun cmod ((a Int) (b Int)) Int (- a (* b (cdiv a b))))",
]

_MEM_FIELD = {"Int": "mem-int", "Real": "mem-real", "Addr": "mem-ptr"}


@dataclass(frozen=True)
class Term:
    text: str
    sort: str


def lit_int(n):
    return Term(str(n) if n >= 0 else f"(- {-n})", "Int")


def lit_real(x):
    f = Fraction(x)
    num = f"{abs(f.numerator)}.0"
    if f.denominator != 1:
        num = f"(/ {num} {f.denominator}.0)"
    if f < 0:
        num = f"(- {num})"
    return Term(num, "Real")


NULL_ADDR = Term("(mk-addr 0 0)", "Addr")


def as_real(t):
    if t.sort == "Int":
        return Term(f"(to_real {t.text})", "Real")
    return t


def join_arith(a, b):
    if a.sort == "Real" or b.sort == "Real":
        return as_real(a), as_real(b), "Real"
    return a, b, a.sort


@dataclass
class SolverScript:
    """Ordered SMT-LIB 2 text with named query blocks."""

    datatypes: list = field(default_factory=list)
    bases: dict = field(default_factory=dict)      # const name -> group
    fndefs: list = field(default_factory=list)
    main: list = field(default_factory=list)
    queries: list = field(default_factory=list)    # (name, [lines])
    _declared: set = field(default_factory=set)

    def declare(self, name, sort):
        if name in self._declared:
            raise EncodeError(f"symbol {name} declared twice")
        self._declared.add(name)
        self.main.append(f"(declare-const {name} {sort})")

    def assert_(self, text):
        self.main.append(f"(assert {text})")

    def add_base(self, name, group):
        if name not in self.bases:
            self.bases[name] = group
        return name

    def add_query(self, name, assert_text):
        if any(q[0] == name for q in self.queries):
            raise EncodeError(f"duplicate query name {name}")
        self.queries.append((name, [
            "(push 1)",
            f'(echo "QUERY:{name}")',
            f"(assert {assert_text})",
            "(check-sat)",
            "(pop 1)",
        ]))

    def render(self):
        out = list(PREAMBLE)
        out += self.datatypes
        groups = {}
        for name in sorted(self.bases):
            groups.setdefault(self.bases[name], []).append(name)
        for g in sorted(groups):
            for name in groups[g]:
                out.append(f"(declare-const {name} Int)")
            names = groups[g]
            if g == "base":
                names = ["0"] + names
            if len(names) > 1:
                out.append(f"(assert (distinct {' '.join(names)}))")
        out += self.fndefs
        out += self.main
        for _, lines in self.queries:
            out += lines
        return "\n".join(out) + "\n"


@dataclass
class LoopRecord:
    loop_id: int
    span: object
    modified: set
    guard: str
    pre: dict
    head: dict
    bend: dict
    exit: dict


@dataclass
class Encoding:
    script: SolverScript
    entry_env: dict                 # var -> symbol Term at entry
    exit_env: dict
    loops: list                     # LoopRecord, in encounter order
    points: list                    # (uid, span, env snapshot) per stmt
    havocked: set
    sorts: dict                     # var -> sort (encodable vars only)


def struct_sort(name):
    return f"T${name}"


class Encoder:
    def __init__(self, prog, havocked=None):
        self.prog = prog
        self.ast = prog.ast
        self.structs = {sd.name: sd for sd in self.ast.struct_defs} \
            if self.ast else {}
        self.script = SolverScript()
        self.counter = 0
        self.env = {}
        self.loops = []
        self.points = []
        self.havocked = set(havocked or ())
        self.fn_cache = {}
        self.fn_globals = {}
        self.res_sorts = set()
        self.at_vars = self._address_taken()
        self.sorts = {}
        encode_types(self.ast.struct_defs if self.ast else [], self.script)

    # -- sorts --------------------------------------------------------------

    def sort_of(self, ctype):
        if isinstance(ctype, DoubleType):
            return "Real"
        if isinstance(ctype, (PointerType,)):
            return "Addr"
        if isinstance(ctype, FuncPtrType):
            return "Int"
        if isinstance(ctype, StructType):
            if ctype.name not in self.structs:
                raise UnsupportedType(f"unknown struct {ctype.name}")
            return struct_sort(ctype.name)
        if isinstance(ctype, ArrayType):
            return f"(Array Int {self.sort_of(ctype.elem)})"
        if ctype == VOID:
            raise UnsupportedType("void has no solver sort")
        return "Int"

    # -- symbols ------------------------------------------------------------

    def fresh(self, var, sort):
        self.counter += 1
        name = f"{var}@{self.counter}"
        self.script.declare(name, sort)
        return Term(name, sort)

    def bind(self, var, term):
        sym = self.fresh(var, term.sort)
        self.script.assert_(f"(= {sym.text} {term.text})")
        self.env[var] = sym
        return sym

    def unconstrained(self, var, sort):
        sym = self.fresh(var, sort)
        self.env[var] = sym
        return sym

    def guard_const(self):
        self.counter += 1
        name = f"guard@{self.counter}"
        self.script.declare(name, "Bool")
        return name

    # -- memory -------------------------------------------------------------

    def _address_taken(self):
        at = set()
        for s in self.prog.walk():
            if isinstance(s, N.NAssign) and s.op in N.ADDR_OPS \
                    and s.op != "funcaddr":
                hint = s.base_hint
                if hint and hint[0] == "var":
                    at.add(hint[1])
                elif s.op in ("addr", "member_addr") and s.args and \
                        isinstance(s.args[0], N.VarRef):
                    at.add(s.args[0].name)
        return at

    def base_const(self, var):
        return self.script.add_base(f"base${var}", "base")

    def fn_addr_const(self, fname):
        return self.script.add_base(f"addr${fname}", "fnaddr")

    def mem(self):
        return self.env[MEM]

    def mem_store(self, addr_term, val_term):
        fld = _MEM_FIELD.get(val_term.sort)
        if fld is None:
            raise _Unencodable("value sort has no memory array")
        m = self.mem()
        parts = []
        for f in ("mem-int", "mem-real", "mem-ptr"):
            inner = f"({f} {m.text})"
            if f == fld:
                inner = f"(store {inner} {addr_term.text} {val_term.text})"
            parts.append(inner)
        new = Term(f"(mk-mem {' '.join(parts)})", "Mem")
        self.bind(MEM, new)
        self._reread_at_scalars()

    def havoc_mem(self):
        self.unconstrained(MEM, "Mem")
        self._reread_at_scalars()

    def mem_select(self, addr_term, sort):
        fld = _MEM_FIELD.get(sort)
        if fld is None:
            raise _Unencodable("sort not memory-resident")
        return Term(f"(select ({fld} {self.mem().text}) {addr_term.text})",
                    sort)

    def _at_scalar_vars(self):
        out = []
        for v in self.at_vars:
            d = self.prog.decls.get(v)
            if d is not None and self.sort_of_safe(d.ctype) in ("Int", "Real"):
                out.append(v)
        return sorted(out)

    def sort_of_safe(self, ctype):
        try:
            return self.sort_of(ctype)
        except UnsupportedType:
            return None

    def _reread_at_scalars(self):
        for v in self._at_scalar_vars():
            if v in self.havocked:
                continue
            sort = self.sort_of(self.prog.decls[v].ctype)
            addr = Term(f"(mk-addr {self.base_const(v)} 0)", "Addr")
            self.bind(v, self.mem_select(addr, sort))

    def _mirror_at_scalar(self, var):
        """After assigning an address-taken scalar, write its cell."""
        if var not in self.at_vars:
            return
        sort = self.env[var].sort
        if sort not in ("Int", "Real"):
            return
        addr = Term(f"(mk-addr {self.base_const(var)} 0)", "Addr")
        fld = _MEM_FIELD[sort]
        m = self.mem()
        parts = []
        for f in ("mem-int", "mem-real", "mem-ptr"):
            inner = f"({f} {m.text})"
            if f == fld:
                inner = f"(store {inner} {addr.text} {self.env[var].text})"
            parts.append(inner)
        self.bind(MEM, Term(f"(mk-mem {' '.join(parts)})", "Mem"))

    # -- program ------------------------------------------------------------

    def encode_program(self):
        self.unconstrained(MEM, "Mem")
        for name, decl in self.prog.decls.items():
            sort = self.sort_of_safe(decl.ctype)
            if sort is None:
                continue
            self.sorts[name] = sort
            if name in self.at_vars and sort not in ("Int", "Real"):
                continue  # memory-resident aggregate: no direct symbol
            self.unconstrained(name, sort)
        # link address-taken scalars to their initial cells
        for v in self._at_scalar_vars():
            addr = Term(f"(mk-addr {self.base_const(v)} 0)", "Addr")
            self.script.assert_(
                f"(= {self.env[v].text} {self.mem_select(addr, self.env[v].sort).text})")
        entry_env = dict(self.env)
        self.encode_stmts(self.prog.body)
        return Encoding(script=self.script, entry_env=entry_env,
                        exit_env=dict(self.env), loops=self.loops,
                        points=self.points, havocked=self.havocked,
                        sorts=self.sorts)

    def encode_stmts(self, stmts):
        for s in stmts:
            self.encode_stmt(s)
            self.points.append((s.uid, s.span, dict(self.env)))

    def encode_stmt(self, s):
        if isinstance(s, N.NAssign):
            self.encode_assign(s)
        elif isinstance(s, N.NStore):
            self.encode_store(s)
        elif isinstance(s, N.NHavoc):
            self.havocked.add(s.var)
            if s.var in self.env:
                self.unconstrained(s.var, self.env[s.var].sort)
                self._mirror_at_scalar(s.var)
        elif isinstance(s, (N.NUnmodelableCall,)):
            # post-abstraction programs contain no such statements; be
            # conservative if one slips through
            if s.lhs and s.lhs in self.env:
                self.unconstrained(s.lhs, self.env[s.lhs].sort)
            self.havoc_mem()
        elif isinstance(s, N.NFpDispatch):
            self.encode_dispatch(s)
        elif isinstance(s, N.NNop):
            pass
        elif isinstance(s, N.NIf):
            self.encode_branch(s)
        elif isinstance(s, N.NWhile):
            self.encode_loop(s)
        else:
            raise EncodeError(f"cannot encode {type(s).__name__}")

    # -- simple assignments -------------------------------------------------

    def encode_assign(self, s):
        if s.lhs not in self.env:
            if s.lhs in self.at_vars:
                self.havoc_mem()  # memory-resident aggregate rewritten
            return
        sort = self.env[s.lhs].sort
        try:
            term = self.rhs_term(s, sort)
        except _Unencodable:
            term = None
        if term is None:
            self.unconstrained(s.lhs, sort)
        else:
            if term.sort != sort:
                if sort == "Real" and term.sort == "Int":
                    term = as_real(term)
                else:
                    self.unconstrained(s.lhs, sort)
                    self._mirror_at_scalar(s.lhs)
                    return
            self.bind(s.lhs, term)
        self._mirror_at_scalar(s.lhs)

    def atom_term(self, a, want=None):
        if isinstance(a, N.Lit):
            if a.kind == "null":
                return NULL_ADDR
            if a.kind == "real" or want == "Real":
                return lit_real(a.value)
            return lit_int(a.value)
        if a.name not in self.env:
            raise _Unencodable(f"{a.name} has no symbol")
        return self.env[a.name]

    def rhs_term(self, s, want_sort):
        op = s.op
        if op == "copy":
            return self.atom_term(s.args[0], want_sort)
        if op == "neg":
            t = self.atom_term(s.args[0])
            return Term(f"(- {t.text})", t.sort)
        if op == "not":
            t = self.atom_term(s.args[0])
            return Term(f"(ite (= {t.text} {self._zero(t)}) 1 0)", "Int")
        if op in N.BINARY_OPS:
            return self.binop_term(s, op)
        if op == "deref":
            p = self.atom_term(s.args[0])
            if p.sort != "Addr":
                raise _Unencodable("deref of non-address")
            if want_sort not in ("Int", "Real", "Addr"):
                raise _Unencodable("deref target not memory-resident")
            return self.mem_select(p, want_sort)
        if op == "member":
            return self.member_term(s.args[0], s.fld, want_sort)
        if op == "index":
            return self.index_term(s.args[0], s.args[1], want_sort)
        if op == "addr":
            base = s.args[0].name if isinstance(s.args[0], N.VarRef) else None
            if base is None or base not in self.at_vars:
                raise _Unencodable("address of unregistered variable")
            return Term(f"(mk-addr {self.base_const(base)} 0)", "Addr")
        if op == "elem_addr":
            return self.elem_addr_term(s)
        if op == "member_addr":
            return self.member_addr_term(s)
        if op == "pmember_addr":
            p = self.atom_term(s.args[0])
            if p.sort != "Addr":
                raise _Unencodable("member address through non-address")
            ordn = self._flat_ordinal_via_ptr(s.args[0], s.fld)
            return Term(
                f"(mk-addr (addr-base {p.text})"
                f" (+ (addr-off {p.text}) {ordn}))", "Addr")
        if op == "funcaddr":
            return Term(self.fn_addr_const(s.func), "Int")
        raise _Unencodable(f"op {op}")

    def _zero(self, t):
        if t.sort == "Real":
            return "0.0"
        if t.sort == "Addr":
            return NULL_ADDR.text
        return "0"

    def binop_term(self, s, op):
        a = self.atom_term(s.args[0])
        b = self.atom_term(s.args[1])
        if op in ("+", "-") and "Addr" in (a.sort, b.sort):
            p, i = (a, b) if a.sort == "Addr" else (b, a)
            if i.sort != "Int":
                raise _Unencodable("pointer arithmetic with non-integer")
            off = f"(+ (addr-off {p.text}) {i.text})" if op == "+" \
                else f"(- (addr-off {p.text}) {i.text})"
            return Term(f"(mk-addr (addr-base {p.text}) {off})", "Addr")
        if op in ("+", "-", "*"):
            a, b, sort = join_arith(a, b)
            return Term(f"({op} {a.text} {b.text})", sort)
        if op == "/":
            a, b, sort = join_arith(a, b)
            fn = "cdiv" if sort == "Int" else "/"
            return self.guarded_div(s, f"({fn} {a.text} {b.text})", b, sort)
        if op == "%":
            if a.sort != "Int" or b.sort != "Int":
                raise _Unencodable("modulo on non-integers")
            return self.guarded_div(s, f"(cmod {a.text} {b.text})", b, "Int")
        if op in ("<", "<=", ">", ">="):
            a, b, _ = join_arith(a, b)
            return Term(f"(ite ({op} {a.text} {b.text}) 1 0)", "Int")
        if op in ("==", "!="):
            if a.sort != b.sort:
                a, b, _ = join_arith(a, b)
            eq = f"(= {a.text} {b.text})"
            text = f"(ite {eq} 1 0)" if op == "==" else f"(ite {eq} 0 1)"
            return Term(text, "Int")
        if op in ("&&", "||"):
            fn = "and" if op == "&&" else "or"
            ca = f"(distinct {a.text} {self._zero(a)})"
            cb = f"(distinct {b.text} {self._zero(b)})"
            return Term(f"(ite ({fn} {ca} {cb}) 1 0)", "Int")
        raise UnsupportedOperator(op)

    def guarded_div(self, s, text, divisor, sort):
        """Bind division results only when the divisor is nonzero, so a
        verdict can never lean on division-by-zero behavior."""
        sym = self.fresh(f"div${s.lhs}", sort)
        z = "0.0" if divisor.sort == "Real" else "0"
        self.script.assert_(
            f"(=> (distinct {divisor.text} {z}) (= {sym.text} {text}))")
        return sym

    def member_term(self, a, fld, want_sort):
        if not isinstance(a, N.VarRef):
            raise _Unencodable("member of literal")
        name = a.name
        decl = self.prog.decls.get(name)
        if decl is None or not isinstance(decl.ctype, StructType):
            raise _Unencodable("member of non-struct")
        sd = self.structs[decl.ctype.name]
        if name in self.at_vars and name not in self.env:
            # memory-resident aggregate: scalar members live in cells
            mt = sd.member_type(fld)
            sort = self.sort_of_safe(mt)
            if sort not in ("Int", "Real", "Addr"):
                raise _Unencodable("aggregate member not memory-resident")
            ordn = sd.member_ordinal(fld)
            addr = Term(f"(mk-addr {self.base_const(name)} {ordn})", "Addr")
            return self.mem_select(addr, sort)
        rec = self.env.get(name)
        if rec is None:
            raise _Unencodable("struct value untracked")
        sel = f"{struct_sort(decl.ctype.name)}${fld}"
        return Term(f"({sel} {rec.text})",
                    self.sort_of(sd.member_type(fld)))

    def index_term(self, arr, idx, want_sort):
        i = self.atom_term(idx)
        if isinstance(arr, N.VarRef):
            decl = self.prog.decls.get(arr.name)
            if decl is not None and isinstance(decl.ctype, ArrayType) \
                    and arr.name not in self.at_vars:
                a = self.env.get(arr.name)
                if a is None:
                    raise _Unencodable("array untracked")
                return Term(f"(select {a.text} {i.text})",
                            self.sort_of(decl.ctype.elem))
            if decl is not None and isinstance(decl.ctype, ArrayType):
                # memory-resident array: cells at (base, i)
                sort = self.sort_of_safe(decl.ctype.elem)
                if sort not in ("Int", "Real", "Addr"):
                    raise _Unencodable("array elements not memory-resident")
                addr = Term(
                    f"(mk-addr {self.base_const(arr.name)} {i.text})", "Addr")
                return self.mem_select(addr, sort)
        p = self.atom_term(arr)
        if p.sort != "Addr":
            raise _Unencodable("index of non-pointer")
        if want_sort not in ("Int", "Real", "Addr"):
            raise _Unencodable("element not memory-resident")
        addr = Term(f"(mk-addr (addr-base {p.text})"
                    f" (+ (addr-off {p.text}) {i.text}))", "Addr")
        return self.mem_select(addr, want_sort)

    def elem_addr_term(self, s):
        a, i = s.args
        it = self.atom_term(i)
        if isinstance(a, N.VarRef) and a.name in self.at_vars:
            return Term(f"(mk-addr {self.base_const(a.name)} {it.text})",
                        "Addr")
        p = self.atom_term(a)
        if p.sort != "Addr":
            raise _Unencodable("element address of non-pointer")
        return Term(f"(mk-addr (addr-base {p.text})"
                    f" (+ (addr-off {p.text}) {it.text}))", "Addr")

    def member_addr_term(self, s):
        base = s.args[0].name if isinstance(s.args[0], N.VarRef) else None
        if base is None or base not in self.at_vars:
            raise _Unencodable("member address of unregistered variable")
        decl = self.prog.decls.get(base)
        if decl is None or not isinstance(decl.ctype, StructType):
            raise _Unencodable("member address of non-struct")
        sd = self.structs[decl.ctype.name]
        mt = sd.member_type(s.fld)
        if self.sort_of_safe(mt) not in ("Int", "Real", "Addr"):
            return None  # nested shape: unmodelable, havoc the result
        ordn = sd.member_ordinal(s.fld)
        return Term(f"(mk-addr {self.base_const(base)} {ordn})", "Addr")

    def _flat_ordinal_via_ptr(self, ptr_atom, fld):
        decl = self.prog.decls.get(ptr_atom.name)
        tgt = decl.ctype.target if decl and \
            isinstance(decl.ctype, PointerType) else None
        if not isinstance(tgt, StructType):
            raise _Unencodable("member through non-struct pointer")
        sd = self.structs[tgt.name]
        if self.sort_of_safe(sd.member_type(fld)) not in \
                ("Int", "Real", "Addr"):
            raise _Unencodable("nested member through pointer")
        return sd.member_ordinal(fld)

    # -- stores -------------------------------------------------------------

    def encode_store(self, s):
        try:
            self._store_precise(s)
        except _Unencodable:
            self.havoc_mem()

    def _store_precise(self, s):
        d = self.prog.designators.get(
            s.ptr.name if isinstance(s.ptr, N.VarRef) else None)
        if d is not None and d[0] == "elem" and d[1] not in self.at_vars:
            base = d[1]
            decl = self.prog.decls.get(base)
            if decl is not None and isinstance(decl.ctype, ArrayType) \
                    and base in self.env:
                i = self.atom_term(d[2])
                esort = self.sort_of(decl.ctype.elem)
                v = self.atom_term(s.value, esort)
                if v.sort != esort:
                    if esort == "Real" and v.sort == "Int":
                        v = as_real(v)
                    else:
                        raise _Unencodable("element sort mismatch")
                arr = self.env[base]
                self.bind(base, Term(
                    f"(store {arr.text} {i.text} {v.text})", arr.sort))
                return
        if d is not None and d[0] == "member" and d[1] not in self.at_vars:
            base, fld = d[1], d[2]
            decl = self.prog.decls.get(base)
            if decl is not None and isinstance(decl.ctype, StructType) \
                    and base in self.env:
                sd = self.structs[decl.ctype.name]
                fsort = self.sort_of(sd.member_type(fld))
                v = self.atom_term(s.value, fsort)
                if v.sort != fsort:
                    if fsort == "Real" and v.sort == "Int":
                        v = as_real(v)
                    else:
                        raise _Unencodable("member sort mismatch")
                rec = self.env[base]
                parts = []
                for m, _t in sd.members:
                    if m == fld:
                        parts.append(v.text)
                    else:
                        parts.append(f"({struct_sort(sd.name)}${m} {rec.text})")
                self.bind(base, Term(
                    f"(mk${sd.name} {' '.join(parts)})", rec.sort))
                return
        # general case: a store through an address term
        p = self.atom_term(s.ptr)
        if p.sort != "Addr":
            raise _Unencodable("store through non-address")
        v = self.atom_term(s.value)
        if v.sort not in _MEM_FIELD:
            raise _Unencodable("stored value not memory-representable")
        self.mem_store(p, v)

    # -- branches -----------------------------------------------------------

    def cond_term(self, c):
        """Encode a branch condition to a Bool term, or None for nondet."""
        if isinstance(c, N.NondetCond):
            return None
        try:
            return self.expr_bool(c)
        except (_Unencodable, UnboundVariable, UnsupportedOperator,
                UnsupportedType, KeyError):
            return None

    def expr_bool(self, e):
        if isinstance(e, Binary) and e.op in ("<", "<=", ">", ">="):
            a, b, _ = join_arith(self.expr_term(e.lhs), self.expr_term(e.rhs))
            return f"({e.op} {a.text} {b.text})"
        if isinstance(e, Binary) and e.op in ("==", "!="):
            a = self.expr_term(e.lhs)
            b = self.expr_term(e.rhs)
            if a.sort != b.sort:
                a, b, _ = join_arith(a, b)
            eq = f"(= {a.text} {b.text})"
            return eq if e.op == "==" else f"(not {eq})"
        if isinstance(e, Binary) and e.op in ("&&", "||"):
            fn = "and" if e.op == "&&" else "or"
            return f"({fn} {self.expr_bool(e.lhs)} {self.expr_bool(e.rhs)})"
        if isinstance(e, Unary) and e.op == "!":
            return f"(not {self.expr_bool(e.operand)})"
        t = self.expr_term(e)
        return f"(distinct {t.text} {self._zero(t)})"

    def expr_term(self, e):
        """Terms for the renamed AST expressions kept in conditions."""
        if isinstance(e, IntLit):
            return lit_int(e.value)
        if isinstance(e, FloatLit):
            return lit_real(e.value)
        if isinstance(e, NullLit):
            return NULL_ADDR
        if isinstance(e, Name):
            if e.ident not in self.env:
                raise _Unencodable(f"{e.ident} untracked")
            return self.env[e.ident]
        if isinstance(e, Unary):
            if e.op == "-":
                t = self.expr_term(e.operand)
                return Term(f"(- {t.text})", t.sort)
            if e.op == "!":
                return Term(f"(ite {self.expr_bool(e.operand)} 0 1)", "Int")
            if e.op == "*":
                p = self.expr_term(e.operand)
                if p.sort != "Addr":
                    raise _Unencodable("deref of non-address")
                sort = self.sort_of_safe(getattr(e, "ctype", None)) or "Int"
                if sort not in ("Int", "Real", "Addr"):
                    raise _Unencodable("deref target not memory-resident")
                return self.mem_select(p, sort)
        if isinstance(e, Binary):
            if e.op in ("<", "<=", ">", ">=", "==", "!=", "&&", "||"):
                return Term(f"(ite {self.expr_bool(e)} 1 0)", "Int")
            a = self.expr_term(e.lhs)
            b = self.expr_term(e.rhs)
            if e.op in ("+", "-", "*"):
                a, b, sort = join_arith(a, b)
                return Term(f"({e.op} {a.text} {b.text})", sort)
            raise _Unencodable(f"operator {e.op} in condition")
        if isinstance(e, Member):
            if not e.arrow and isinstance(e.obj, Name):
                fake = N.VarRef(e.obj.ident)
                return self.member_term(fake, e.name, None)
            if e.arrow and isinstance(e.obj, Name):
                p = self.expr_term(e.obj)
                if p.sort != "Addr":
                    raise _Unencodable("arrow through non-address")
                fake = N.VarRef(e.obj.ident)
                ordn = self._flat_ordinal_via_ptr(fake, e.name)
                addr = Term(f"(mk-addr (addr-base {p.text})"
                            f" (+ (addr-off {p.text}) {ordn}))", "Addr")
                sort = self.sort_of_safe(getattr(e, "ctype", None)) or "Int"
                return self.mem_select(addr, sort)
        if isinstance(e, Index):
            if isinstance(e.arr, Name):
                fake_arr = N.VarRef(e.arr.ident)
                if isinstance(e.index, Name):
                    fake_i = N.VarRef(e.index.ident)
                elif isinstance(e.index, IntLit):
                    fake_i = N.Lit(e.index.value, "int")
                else:
                    raise _Unencodable("complex index in condition")
                sort = self.sort_of_safe(getattr(e, "ctype", None)) or "Int"
                return self.index_term(fake_arr, fake_i, sort)
        raise _Unencodable(f"expression {type(e).__name__} in condition")

    def encode_branch(self, s):
        cond = self.cond_term(s.cond)
        if cond is None:
            cond = self.guard_const()
        pre = dict(self.env)
        self.encode_stmts(s.then)
        then_env = self.env
        self.env = dict(pre)
        self.encode_stmts(s.els)
        else_env = self.env
        merged = dict(pre)
        self.env = merged
        for v in pre:
            t1, t2 = then_env[v], else_env[v]
            if t1.text == t2.text:
                merged[v] = t1
            else:
                self.bind(v, Term(
                    f"(ite {cond} {t1.text} {t2.text})", t1.sort))

    # -- loops --------------------------------------------------------------

    def modified_vars(self, stmts):
        out = set()
        for s in N.walk_stmts(stmts):
            if isinstance(s, N.NAssign):
                out.add(s.lhs)
            elif isinstance(s, N.NHavoc):
                out.add(s.var)
            elif isinstance(s, (N.NUnmodelableCall, N.NFpDispatch)):
                if s.lhs:
                    out.add(s.lhs)
                out.add(MEM)
            elif isinstance(s, N.NStore):
                d = self.prog.designators.get(
                    s.ptr.name if isinstance(s.ptr, N.VarRef) else None)
                if d is not None and d[0] in ("elem", "member") \
                        and d[1] not in self.at_vars:
                    out.add(d[1])
                else:
                    out.add(MEM)
        if MEM in out:
            out.update(self._at_scalar_vars())
        return {v for v in out if v in self.env or v == MEM}

    def encode_loop(self, s):
        modified = self.modified_vars(s.body)
        pre = dict(self.env)
        guard = self.guard_const()
        for v in sorted(modified):
            self.unconstrained(v, pre[v].sort)
        head = dict(self.env)
        self.encode_stmts(s.body)
        bend = dict(self.env)
        exit_env = dict(head)
        self.env = exit_env
        for v in sorted(modified):
            if bend[v].text == head[v].text:
                continue
            self.bind(v, Term(
                f"(ite {guard} {bend[v].text} {head[v].text})",
                head[v].sort))
        self.loops.append(LoopRecord(
            loop_id=s.loop_id, span=s.span, modified=modified, guard=guard,
            pre=pre, head=head, bend=bend, exit=dict(self.env)))

    # -- function pointers --------------------------------------------------

    def res_sort(self, sort):
        name = f"Res${sort}"
        if name not in self.res_sorts:
            self.res_sorts.add(name)
            self.script.datatypes.append(
                f"(declare-datatype {name} ((mk-res${sort}"
                f" (val${sort} {sort}) (memo${sort} Mem))))")
        return name

    def encode_dispatch(self, s):
        sort = self.env[s.lhs].sort if s.lhs in self.env else "Int"
        if sort not in ("Int", "Real"):
            if s.lhs in self.env:
                self.unconstrained(s.lhs, sort)
            self.havoc_mem()
            return
        rsort = self.res_sort(sort)
        fp = self.env.get(s.fp)
        if fp is None or fp.sort != "Int":
            if s.lhs in self.env:
                self.unconstrained(s.lhs, sort)
            self.havoc_mem()
            return
        try:
            args = [self.atom_term(a) for a in s.args]
        except _Unencodable:
            if s.lhs in self.env:
                self.unconstrained(s.lhs, sort)
            self.havoc_mem()
            return
        self.counter += 1
        else_const = f"resx@{self.counter}"
        self.script.declare(else_const, rsort)
        term = else_const
        for fname in reversed(s.candidates):
            addr = self.fn_addr_const(fname)
            call = self.fn_call_term(fname, args, sort)
            if call is None:
                self.counter += 1
                arm = f"resx@{self.counter}"
                self.script.declare(arm, rsort)
            else:
                arm = call
            term = f"(ite (= {fp.text} {addr}) {arm} {term})"
        self.counter += 1
        res = f"res@{self.counter}"
        self.script.declare(res, rsort)
        self.script.assert_(f"(= {res} {term})")
        self.bind(s.lhs, Term(f"(val${sort} {res})", sort))
        self._mirror_at_scalar(s.lhs)
        self.bind(MEM, Term(f"(memo${sort} {res})", "Mem"))
        self._reread_at_scalars()

    def fn_call_term(self, fname, args, ret_sort):
        defname = self.encode_function(fname)
        if defname is None:
            return None
        fdef = self.ast.function(fname)
        texts = []
        for p, a in zip(fdef.params, args):
            want = self.sort_of_safe(p.ctype)
            if want == "Real" and a.sort == "Int":
                a = as_real(a)
            if want != a.sort:
                return None
            texts.append(a.text)
        for g in self.fn_globals.get(fname, ()):
            if g not in self.env:
                return None
            texts.append(self.env[g].text)
        texts.append(self.mem().text)
        return f"({defname} {' '.join(texts)})"

    def encode_function(self, fname):
        """define-fun for a loop-free candidate function; returns the
        defined name or None when the body is not encodable."""
        if fname in self.fn_cache:
            return self.fn_cache[fname]
        result = None
        try:
            result = self._encode_function(fname)
        except (_Unencodable, EncodeError, UnsupportedType, Exception):
            result = None
        self.fn_cache[fname] = result
        return result

    def _encode_function(self, fname):
        from .frontend.classify import classify_constructs
        from .normalize import to_simple_assignments
        fdef = self.ast.function(fname)
        ret_sort = self.sort_of(fdef.ret) if fdef.ret != VOID else "Int"
        if ret_sort not in ("Int", "Real"):
            return None
        report = classify_constructs(self.ast)
        sub = to_simple_assignments(self.ast, report, fname,
                                    global_inits=False)
        for st in sub.walk():
            if isinstance(st, (N.NWhile, N.NUnmodelableCall, N.NHavoc,
                               N.NFpDispatch)):
                return None
        params = []
        fenv = {}
        globals_used = []
        for p in fdef.params:
            psort = self.sort_of(p.ctype)
            params.append(f"(fp${p.name} {psort})")
            fenv[p.name] = Term(f"fp${p.name}", psort)
        for name, decl in sub.decls.items():
            if name in fenv:
                continue
            if decl.kind == "global" and name in self.env:
                # free reads of globals become extra parameters, bound to
                # the caller's current version at each call site
                gsort = self.env[name].sort
                params.append(f"(fp${name} {gsort})")
                fenv[name] = Term(f"fp${name}", gsort)
                globals_used.append(name)
                continue
            psort = self.sort_of_safe(decl.ctype)
            if psort is None:
                return None
            fenv[name] = Term(self._zero_term(psort), psort)
        params.append("(fp$mem Mem)")
        fenv[MEM] = Term("fp$mem", "Mem")
        self.fn_globals[fname] = globals_used
        fenv = _FnBody(self, sub).run(fenv)
        if fenv is None:
            return None
        ret = fenv.get(sub.ret_var)
        if ret is None:
            return None
        if ret.sort == "Int" and ret_sort == "Real":
            ret = as_real(ret)
        if ret.sort != ret_sort:
            return None
        rsort = self.res_sort(ret_sort)
        defname = f"fn${fname}"
        self.script.fndefs.append(
            f"(define-fun {defname} ({' '.join(params)}) {rsort}"
            f" (mk-res${ret_sort} {ret.text} {fenv[MEM].text}))")
        return defname

    def _zero_term(self, sort):
        if sort == "Real":
            return "0.0"
        if sort == "Addr":
            return NULL_ADDR.text
        if sort == "Int":
            return "0"
        raise _Unencodable("no default term")


class _FnBody:
    """Term-level (assertion-free) encoding of a loop-free function body,
    used inside define-fun where no new constants may be declared."""

    def __init__(self, enc, sub):
        self.enc = enc
        self.sub = sub

    def run(self, fenv):
        try:
            return self.stmts(self.sub.body, fenv)
        except _Unencodable:
            return None

    def stmts(self, body, fenv):
        for s in body:
            fenv = self.stmt(s, fenv)
        return fenv

    def stmt(self, s, fenv):
        enc = self.enc
        if isinstance(s, N.NAssign):
            saved = enc.env
            enc.env = fenv
            try:
                decl = self.sub.decls.get(s.lhs)
                want = enc.sort_of_safe(decl.ctype) if decl else None
                if s.op == "/" or s.op == "%":
                    # no fresh constants inside a definition: use the
                    # funnelled operators directly
                    a = enc.atom_term(s.args[0])
                    b = enc.atom_term(s.args[1])
                    a, b, sort = join_arith(a, b)
                    fn = {"/": "cdiv" if sort == "Int" else "/",
                          "%": "cmod"}[s.op]
                    if s.op == "%" and sort != "Int":
                        raise _Unencodable("modulo on reals")
                    term = Term(f"({fn} {a.text} {b.text})", sort)
                else:
                    term = enc.rhs_term(s, want)
                if term is None:
                    raise _Unencodable("unmodelable member address")
                if want == "Real" and term.sort == "Int":
                    term = as_real(term)
                out = dict(fenv)
                out[s.lhs] = term
                return out
            finally:
                enc.env = saved
        if isinstance(s, N.NStore):
            saved = enc.env
            enc.env = fenv
            try:
                p = enc.atom_term(s.ptr)
                v = enc.atom_term(s.value)
            finally:
                enc.env = saved
            if p.sort != "Addr" or v.sort not in _MEM_FIELD:
                raise _Unencodable("store in function body")
            m = fenv[MEM]
            parts = []
            for f in ("mem-int", "mem-real", "mem-ptr"):
                inner = f"({f} {m.text})"
                if f == _MEM_FIELD[v.sort]:
                    inner = f"(store {inner} {p.text} {v.text})"
                parts.append(inner)
            out = dict(fenv)
            out[MEM] = Term(f"(mk-mem {' '.join(parts)})", "Mem")
            return out
        if isinstance(s, N.NNop):
            return fenv
        if isinstance(s, N.NIf):
            saved = enc.env
            enc.env = fenv
            try:
                cond = enc.cond_term(s.cond)
            finally:
                enc.env = saved
            if cond is None:
                raise _Unencodable("condition in function body")
            e1 = self.stmts(s.then, dict(fenv))
            e2 = self.stmts(s.els, dict(fenv))
            out = dict(fenv)
            for v in fenv:
                t1, t2 = e1[v], e2[v]
                if t1.text == t2.text:
                    out[v] = t1
                else:
                    out[v] = Term(f"(ite {cond} {t1.text} {t2.text})",
                                  t1.sort)
            return out
        raise _Unencodable(f"{type(s).__name__} in function body")


def encode_types(struct_defs, script):
    """Record datatype declarations for every struct, dependency-ordered."""
    emitted = set()
    by_name = {sd.name: sd for sd in struct_defs}

    def emit(sd):
        if sd.name in emitted:
            return
        emitted.add(sd.name)
        for _m, t in sd.members:
            base = t
            while isinstance(base, ArrayType):
                base = base.elem
            if isinstance(base, StructType) and base.name in by_name:
                emit(by_name[base.name])
        fields = []
        for m, t in sd.members:
            fields.append(f"({struct_sort(sd.name)}${m} {_sort(t, by_name)})")
        script.datatypes.append(
            f"(declare-datatype {struct_sort(sd.name)}"
            f" ((mk${sd.name} {' '.join(fields)})))")

    for sd in struct_defs:
        emit(sd)
    return script


def _sort(t, by_name):
    if isinstance(t, DoubleType):
        return "Real"
    if isinstance(t, StructType):
        if t.name not in by_name:
            raise UnsupportedType(f"unknown struct {t.name}")
        return struct_sort(t.name)
    if isinstance(t, ArrayType):
        return f"(Array Int {_sort(t.elem, by_name)})"
    if isinstance(t, (PointerType,)):
        return "Addr"
    if isinstance(t, FuncPtrType):
        return "Int"
    return "Int"


def encode_member_address(enc, base_var, fld):
    """Address record for &base.fld, or the Unmodelable sentinel when the
    member is not a flat scalar."""
    decl = enc.prog.decls.get(base_var)
    if decl is None or not isinstance(decl.ctype, StructType):
        return UNMODELABLE
    sd = enc.structs[decl.ctype.name]
    mt = sd.member_type(fld)
    if enc.sort_of_safe(mt) not in ("Int", "Real", "Addr"):
        return UNMODELABLE
    ordn = sd.member_ordinal(fld)
    return Term(f"(mk-addr {enc.base_const(base_var)} {ordn})", "Addr")


def encode_program(prog, havocked=None):
    """Encode a normalized (usually abstracted) program; main entry."""
    return Encoder(prog, havocked).encode_program()
