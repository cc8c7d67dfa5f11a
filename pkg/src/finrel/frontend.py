"""Surface syntax: spaces, datatypes, constants, terms and probes.

A unit is a sequence of declarations.  Each declaration starts with its
keyword at the beginning of a line and extends over the following lines
until the next declaration.  ``#`` starts a comment.  The grammar is given
in EBNF in ``docs/grammar.md``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .datatypes import (
    BOOL,
    FALSE,
    TRUE,
    if_gen,
    iter_cases_web,
    iter_gen,
    lazy_nat,
    lazy_nat_signature,
    len_rel,
    match_cases_web,
    match_gen,
    natiter_gen,
    node_gen,
    node_web,
    rec_cases_web,
    rec_gen,
    succ_gen,
    val_rel,
)
from .finstruct import DUAL, STRAIGHT, SubsetDesc, format_desc, parse_desc
from .orders import SpaceRepr
from .points import PointSyntaxError, format_point
from .rel import Generator, case_gen, dereliction_gen, fix_approx, fix_gen, inj_gen, promote_linear, supp_gen
from .semantics.terms import (
    UNIT,
    Abs,
    App,
    Const,
    ConstTable,
    Proj,
    Record,
    TArrow,
    TAtom,
    Term,
    TProd,
    TRecord,
    TypeCheckError,
    TypeEnv,
    TypeExpr,
    Var,
    typecheck,
)
from .webs import (
    Arrow,
    Bang,
    EmptyWeb,
    FinEnum,
    FlatNatWeb,
    Lazy,
    LPlus,
    Plus,
    Signature,
    Tensor,
    WebExpr,
    With,
    web_contains,
)

KEYWORDS = ("space", "data", "const", "term", "probe")


class FrontendError(Exception):
    def __init__(self, line: int, col: int, message: str, expected: tuple = ()):
        text = f"{line}:{col}: {message}"
        if expected:
            text += " (expected " + ", ".join(repr(e) for e in expected) + ")"
        super().__init__(text)
        self.line = line
        self.col = col
        self.expected = expected


# ---------------------------------------------------------------- web syntax

class WebAst:
    pass


@dataclass(frozen=True)
class WName(WebAst):
    name: str


@dataclass(frozen=True)
class WAtoms(WebAst):
    tokens: tuple


@dataclass(frozen=True)
class WNat(WebAst):
    pass


@dataclass(frozen=True)
class WEmpty(WebAst):
    pass


@dataclass(frozen=True)
class WBang(WebAst):
    inner: WebAst


@dataclass(frozen=True)
class WTensor(WebAst):
    left: WebAst
    right: WebAst


@dataclass(frozen=True)
class WArrow(WebAst):
    src: WebAst
    tgt: WebAst


@dataclass(frozen=True)
class WSum(WebAst):
    op: str  # "&", "+" or "+~"
    family: tuple


# ---------------------------------------------------------------- declarations

@dataclass(frozen=True)
class SpaceDecl:
    name: str
    web: WebAst
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class DataDecl:
    name: str
    ctors: tuple  # (sort, label type, arity names)
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class MRelLit:
    points: tuple


@dataclass(frozen=True)
class Builtin:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class ConstDecl:
    name: str
    type: TypeExpr
    value: object  # MRelLit | Builtin
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class TermDecl:
    name: str
    term: Term
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ProbeDecl:
    name: str
    dual: bool
    web: WebAst
    desc: SubsetDesc
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SourceUnit:
    decls: tuple

    def of_kind(self, cls) -> list:
        return [d for d in self.decls if isinstance(d, cls)]


# ---------------------------------------------------------------- tokens

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<int>[0-9]+)"
    r"|(?P<sym>=>|\+~|[\\.,:;=()\[\]{}<>!*&+|@])"
)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    pos: int


class _Parser:
    def __init__(self, text: str, start: int, end: int, source: str):
        self.source = source
        self.toks: list[Tok] = []
        pos = start
        while pos < end:
            m = _TOKEN.match(text, pos)
            if m is None or m.end() > end:
                self.fail_at(pos, f"unexpected character {text[pos]!r}")
            kind = m.lastgroup
            if kind not in ("ws", "comment"):
                self.toks.append(Tok(kind, m.group(kind), pos))
            pos = m.end()
        self.i = 0
        self.end = end

    def loc(self, pos: int) -> tuple[int, int]:
        line = self.source.count("\n", 0, pos) + 1
        col = pos - (self.source.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def fail_at(self, pos: int, msg: str, expected: tuple = ()):
        line, col = self.loc(pos)
        raise FrontendError(line, col, msg, expected)

    def peek(self, k: int = 0) -> Tok | None:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def fail(self, msg: str, expected: tuple = ()):
        t = self.peek()
        self.fail_at(t.pos if t else self.end, msg if t else "unexpected end of declaration", expected)

    def at(self, *texts: str) -> bool:
        t = self.peek()
        return t is not None and t.text in texts and t.kind in ("sym", "name")

    def take(self) -> Tok:
        t = self.peek()
        if t is None:
            self.fail("unexpected end of declaration")
        self.i += 1
        return t

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.fail(f"unexpected {self.peek().text!r}" if self.peek() else "", (text,))
        return self.take()

    def separator(self, close: str) -> None:
        """A comma before the next item, or nothing in front of ``close``."""
        if self.at(close):
            return
        if not self.at(","):
            self.fail(f"unexpected {self.peek().text!r}" if self.peek() else "", (",", close))
        self.take()

    def name(self) -> str:
        t = self.peek()
        if t is None or t.kind != "name":
            self.fail("expected a name", ("NAME",))
        self.i += 1
        return t.text

    def done(self) -> None:
        if self.peek() is not None:
            self.fail(f"unexpected {self.peek().text!r}", ("end of declaration",))

    # -- webs
    def web(self) -> WebAst:
        left = self.web_product()
        if self.at("=>"):
            self.take()
            return WArrow(left, self.web())
        return left

    def web_product(self) -> WebAst:
        w = self.web_factor()
        while self.at("*"):
            self.take()
            w = WTensor(w, self.web_factor())
        return w

    def web_factor(self) -> WebAst:
        if self.at("!"):
            self.take()
            return WBang(self.web_factor())
        if self.at("("):
            self.take()
            w = self.web()
            self.expect(")")
            return w
        if self.at("{"):
            self.take()
            toks = []
            while not self.at("}"):
                toks.append(self.name())
                self.separator("}")
            self.take()
            return WAtoms(tuple(toks))
        if self.at("&", "+", "+~"):
            op = self.take().text
            self.expect("{")
            fam = []
            while not self.at("}"):
                i = self.name()
                self.expect(":")
                fam.append((i, self.web()))
                self.separator("}")
            self.take()
            return WSum(op, tuple(fam))
        t = self.peek()
        if t is not None and t.kind == "int" and t.text == "0":
            self.take()
            return WEmpty()
        if t is not None and t.kind == "name":
            self.take()
            return WNat() if t.text == "N" else WName(t.text)
        self.fail("expected a web expression", ("!", "(", "{", "&", "+", "+~", "0", "N", "NAME"))

    # -- types
    def type(self) -> TypeExpr:
        left = self.type_product()
        if self.at("=>"):
            self.take()
            return TArrow(left, self.type())
        return left

    def type_product(self) -> TypeExpr:
        t = self.type_atom()
        while self.at("*"):
            self.take()
            t = TProd(t, self.type_atom())
        return t

    def type_atom(self) -> TypeExpr:
        if self.at("("):
            self.take()
            t = self.type()
            self.expect(")")
            return t
        if self.at("<"):
            self.take()
            fields = []
            while not self.at(">"):
                label = self.label()
                self.expect(":")
                fields.append((label, self.type()))
                self.separator(">")
            self.take()
            return TRecord(tuple(fields))
        name = self.name()
        return UNIT if name == "unit" else TAtom(name)

    def label(self) -> str:
        t = self.peek()
        if t is not None and t.kind in ("name", "int"):
            self.i += 1
            return t.text
        self.fail("expected a label", ("NAME", "INT"))

    # -- terms
    def term(self) -> Term:
        if self.at("\\"):
            self.take()
            x = self.name()
            self.expect(":")
            ty = self.type()
            self.expect(".")
            return Abs(x, ty, self.term())
        t = self.postfix()
        while self._starts_atom():
            t = App(t, self.postfix())
        return t

    def _starts_atom(self) -> bool:
        t = self.peek()
        if t is None:
            return False
        return t.kind == "name" or t.text in ("(", "<", "\\")

    def postfix(self) -> Term:
        if self.at("\\"):
            return self.term()
        t = self.atom_term()
        while self.at("."):
            self.take()
            t = Proj(self.label(), t)
        return t

    def atom_term(self) -> Term:
        if self.at("("):
            self.take()
            if self.at(")"):
                self.take()
                return Record(())
            t = self.term()
            self.expect(")")
            return t
        if self.at("<"):
            self.take()
            tk, nxt = self.peek(), self.peek(1)
            if tk is not None and tk.kind in ("name", "int") and nxt is not None and nxt.text == "=":
                fields = []
                while not self.at(">"):
                    label = self.label()
                    self.expect("=")
                    fields.append((label, self.term()))
                    self.separator(">")
                self.take()
                return Record(tuple(fields))
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(">")
            return Record((("1", a), ("2", b)))
        name = self.name()
        if name in ("fst", "snd"):
            return Proj("1" if name == "fst" else "2", self.postfix())
        return Var(name)


# ---------------------------------------------------------------- units

_DECL_START = re.compile(r"^(space|data|const|term|probe)\b", re.M)


def _strip_comments(raw: str) -> str:
    return re.sub(r"#[^\n]*", "", raw)


def parse_unit(text: str) -> SourceUnit:
    starts = [m.start() for m in _DECL_START.finditer(text)]
    head = _strip_comments(text[: starts[0] if starts else len(text)])
    if head.strip():
        off = len(text) - len(text.lstrip())
        p = _Parser(text, off, off, text)
        p.fail_at(off, "expected a declaration", KEYWORDS)
    decls = []
    for k, start in enumerate(starts):
        end = starts[k + 1] if k + 1 < len(starts) else len(text)
        decls.append(_parse_decl(text, start, end))
    return SourceUnit(tuple(decls))


def _parse_decl(text: str, start: int, end: int):
    kw_end = start + len(_DECL_START.match(text, start).group(1))
    kw = text[start:kw_end]
    loc = _Parser(text, start, start, text).loc(start)
    if kw in ("const", "probe"):
        # only the head is tokenized; the right-hand side is point or description text
        eq = _find_eq(text, kw_end, end)
        p = _Parser(text, kw_end, eq if eq >= 0 else end, text)
        name = p.name()
        p.expect(":")
        if kw == "const":
            ty = p.type()
            p.done()
            if eq < 0:
                p.fail_at(end, "missing '=' in constant declaration", ("=",))
            return ConstDecl(name, ty, _parse_const_value(text, eq + 1, end), loc)
        dual = False
        if p.at("dual"):
            p.take()
            dual = True
        web = p.web()
        p.done()
        if eq < 0:
            p.fail_at(end, "missing '=' in probe declaration", ("=",))
        raw = _strip_comments(text[eq + 1:end])
        try:
            desc = parse_desc(raw.strip())
        except PointSyntaxError as e:
            p.fail_at(eq + 1 + len(raw) - len(raw.lstrip()), f"bad subset description: {e}")
        return ProbeDecl(name, dual, web, desc, loc)
    p = _Parser(text, kw_end, end, text)
    name = p.name()
    if kw == "space":
        p.expect("=")
        w = p.web()
        p.done()
        return SpaceDecl(name, w, loc)
    if kw == "term":
        p.expect("=")
        t = p.term()
        p.done()
        return TermDecl(name, t, loc)
    # data
    p.expect("{")
    ctors = []
    while not p.at("}"):
        sort = p.name()
        p.expect("(")
        lab = p.type()
        p.expect(")")
        p.expect("[")
        ar = []
        while not p.at("]"):
            ar.append(p.name())
            if not p.at("]"):
                p.expect(",")
        p.take()
        ctors.append((sort, lab, tuple(ar)))
        if not p.at("}"):
            p.expect(";")
            if p.at("}"):
                break
    p.expect("}")
    p.done()
    return DataDecl(name, tuple(ctors), loc)


def _find_eq(text: str, start: int, end: int) -> int:
    """Position of the first '=' that is not part of '=>' (outside comments)."""
    k = start
    while k < end:
        c = text[k]
        if c == "#":
            nl = text.find("\n", k)
            k = end if nl < 0 else nl
            continue
        if c == "=" and not text.startswith("=>", k):
            return k
        k += 1
    return -1


def _parse_const_value(text: str, start: int, end: int):
    raw = _strip_comments(text[start:end])
    body = raw.strip()
    offset = start + len(raw) - len(raw.lstrip())
    if body.startswith("{"):
        try:
            d = parse_desc(body)
        except PointSyntaxError as e:
            p = _Parser(text, start, start, text)
            p.fail_at(offset, f"bad relation literal: {e}")
        return MRelLit(tuple(sorted(d.points)))
    p = _Parser(text, start, end, text)
    name = p.name()
    args = []
    if p.at("@"):
        p.take()
        args.append(p.label())
        while p.at("."):
            p.take()
            args.append(p.label())
    p.done()
    return Builtin(name, tuple(args))


# ---------------------------------------------------------------- printing

def format_web_ast(w: WebAst, prec: int = 0) -> str:
    if isinstance(w, WName):
        return w.name
    if isinstance(w, WNat):
        return "N"
    if isinstance(w, WEmpty):
        return "0"
    if isinstance(w, WAtoms):
        return "{" + ", ".join(w.tokens) + "}"
    if isinstance(w, WBang):
        return "!" + format_web_ast(w.inner, 3)
    if isinstance(w, WSum):
        return w.op + "{" + ", ".join(f"{i}: {format_web_ast(a)}" for i, a in w.family) + "}"
    if isinstance(w, WTensor):
        s = f"{format_web_ast(w.left, 1)} * {format_web_ast(w.right, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(w, WArrow):
        s = f"{format_web_ast(w.src, 1)} => {format_web_ast(w.tgt, 0)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(w)


def format_decl(d) -> str:
    if isinstance(d, SpaceDecl):
        return f"space {d.name} = {format_web_ast(d.web)}"
    if isinstance(d, DataDecl):
        parts = [f"{s}({t})[{', '.join(ar)}]" for s, t, ar in d.ctors]
        return f"data {d.name} {{ " + "; ".join(parts) + " }"
    if isinstance(d, ConstDecl):
        if isinstance(d.value, MRelLit):
            val = "{" + " | ".join(format_point(p) for p in d.value.points) + "}"
        else:
            val = d.value.name + ("@" + ".".join(d.value.args) if d.value.args else "")
        return f"const {d.name} : {d.type} = {val}"
    if isinstance(d, TermDecl):
        return f"term {d.name} = {d.term}"
    if isinstance(d, ProbeDecl):
        dual = "dual " if d.dual else ""
        return f"probe {d.name} : {dual}{format_web_ast(d.web)} = {format_desc(d.desc)}"
    raise TypeError(d)


def format_unit(unit: SourceUnit) -> str:
    return "".join(format_decl(d) + "\n" for d in unit.decls)


# ---------------------------------------------------------------- resolution

@dataclass
class Environment:
    """A resolved unit: webs, datatypes, constants, closed terms and probes."""

    spaces: dict = field(default_factory=dict)
    datas: dict = field(default_factory=dict)
    consts: ConstTable = field(default_factory=ConstTable)
    terms: dict = field(default_factory=dict)
    probes: dict = field(default_factory=dict)

    @property
    def types(self) -> TypeEnv:
        return TypeEnv({"N": FlatNatWeb(), **self.spaces}, self.datas)

    def term_type(self, name: str) -> TypeExpr:
        return typecheck(self.terms[name], (), self.consts)


def _error(decl, msg: str, expected: tuple = ()):
    line, col = decl.loc
    raise FrontendError(line, col, msg, expected)


def _resolve_web(w: WebAst, env: Environment, owner: str, decl) -> WebExpr:
    if isinstance(w, WName):
        if w.name in env.spaces:
            return env.spaces[w.name]
        if w.name in env.datas:
            return Lazy(env.datas[w.name])
        _error(decl, f"unknown space {w.name!r}")
    if isinstance(w, WNat):
        return FlatNatWeb()
    if isinstance(w, WEmpty):
        return EmptyWeb
    if isinstance(w, WAtoms):
        if len(set(w.tokens)) != len(w.tokens):
            _error(decl, f"repeated atom in {owner}")
        return FinEnum.atoms(owner, w.tokens)
    if isinstance(w, WBang):
        return Bang(_resolve_web(w.inner, env, owner, decl))
    if isinstance(w, WTensor):
        return Tensor(_resolve_web(w.left, env, owner, decl), _resolve_web(w.right, env, owner, decl))
    if isinstance(w, WArrow):
        return Arrow(_resolve_web(w.src, env, owner, decl), _resolve_web(w.tgt, env, owner, decl))
    if isinstance(w, WSum):
        labels = [i for i, _ in w.family]
        if len(set(labels)) != len(labels):
            _error(decl, f"repeated index in {owner}")
        fam = tuple((i, _resolve_web(a, env, owner, decl)) for i, a in w.family)
        return {"&": With, "+": Plus, "+~": LPlus}[w.op](fam)
    raise TypeError(w)


def _type_web(t: TypeExpr, env: Environment, decl) -> WebExpr:
    if t == UNIT:
        return EmptyWeb
    try:
        return env.types.web(t)
    except TypeCheckError as e:
        _error(decl, str(e))


def _resolve_term(t: Term, env: Environment, bound: frozenset, decl) -> Term:
    if isinstance(t, Var):
        if t.name in bound:
            return t
        if t.name in env.consts:
            return Const(t.name)
        if t.name in env.terms:
            return env.terms[t.name]
        _error(decl, f"unbound name {t.name!r}")
    if isinstance(t, Abs):
        _type_web(t.type, env, decl)
        return Abs(t.var, t.type, _resolve_term(t.body, env, bound | {t.var}, decl))
    if isinstance(t, App):
        return App(_resolve_term(t.fn, env, bound, decl), _resolve_term(t.arg, env, bound, decl))
    if isinstance(t, Record):
        return Record(tuple((l, _resolve_term(u, env, bound, decl)) for l, u in t.fields))
    if isinstance(t, Proj):
        return Proj(t.label, _resolve_term(t.term, env, bound, decl))
    return t


def _canon(w: WebExpr) -> WebExpr:
    """Forget datatype names, so that structurally equal signatures compare equal."""
    if isinstance(w, Lazy):
        s = w.sig
        return Lazy(Signature("", s.sorts, s.arities, tuple(_canon(a) for a in s.labels)))
    if isinstance(w, (Tensor,)):
        return Tensor(_canon(w.left), _canon(w.right))
    if isinstance(w, Arrow):
        return Arrow(_canon(w.src), _canon(w.tgt))
    if isinstance(w, Bang):
        return Bang(_canon(w.inner))
    if isinstance(w, (With, Plus)) and not w.family:
        return EmptyWeb
    if isinstance(w, (With, Plus, LPlus)):
        return type(w)(tuple((i, _canon(a)) for i, a in w.family))
    return w


def same_web(a: WebExpr, b: WebExpr) -> bool:
    return _canon(a) == _canon(b)


def _arrows(w: WebExpr, n: int, what: str) -> list:
    """Split A1 => ... => An => B into [A1, ..., An, B]."""
    out = []
    for _ in range(n):
        if not isinstance(w, Arrow):
            raise _BuiltinMismatch(f"{what} needs a type with {n} arrows")
        out.append(w.src)
        w = w.tgt
    return out + [w]


class _BuiltinMismatch(Exception):
    pass


def _need_sig(env: Environment, args: tuple, n: int, name: str) -> Signature:
    if len(args) != n or args[0] not in env.datas:
        raise _BuiltinMismatch(f"{name} needs {'@S' if n == 1 else '@S.i'} with a declared datatype S")
    return env.datas[args[0]]


def _fix_approx_gen(n: int, w: WebExpr) -> Generator:
    def member(p):
        return p in fix_approx(n, w, p.size)

    return Generator(f"fix_{n}", member, lambda k: fix_approx(n, w, k))


def _builtin(b: Builtin, web: WebExpr, env: Environment):
    """The denotation of a builtin at the declared web, and the web it expects."""
    name, args = b.name, b.args
    if name in ("der", "supp"):
        a, c = _arrows(web, 1, name)
        gen = dereliction_gen(a) if name == "der" else supp_gen(a)
        return gen, Arrow(a, a)
    if name == "fix":
        f, a = _arrows(web, 1, name)
        if args:
            if len(args) != 1 or not args[0].isdigit():
                raise _BuiltinMismatch("fix@n needs a natural number n")
            return _fix_approx_gen(int(args[0]), a), Arrow(Arrow(a, a), a)
        return fix_gen(a), Arrow(Arrow(a, a), a)
    if name == "inj":
        a, s = _arrows(web, 1, name)
        if len(args) != 1 or not isinstance(s, LPlus) or args[0] not in dict(s.family):
            raise _BuiltinMismatch("inj@i needs a lifted sum target with index i")
        return inj_gen(s.family, args[0]), Arrow(dict(s.family)[args[0]], s)
    if name == "case":
        s, _, target = _arrows(web, 2, name)
        if not isinstance(s, LPlus):
            raise _BuiltinMismatch("case needs a lifted sum argument")
        cases = With(tuple((i, Arrow(a, target)) for i, a in s.family))
        return case_gen(s.family, target), Arrow(s, Arrow(cases, target))
    if name in ("true", "false"):
        return (TRUE if name == "true" else FALSE), BOOL
    if name == "if":
        *_, a = _arrows(web, 3, name)
        return if_gen(a), Arrow(BOOL, Arrow(a, Arrow(a, a)))
    lnat = Lazy(lazy_nat_signature())
    if name == "zero":
        return frozenset([lazy_nat(0)]), lnat
    if name == "succ":
        return succ_gen(), Arrow(lnat, lnat)
    if name == "natiter":
        *_, a = _arrows(web, 3, name)
        return natiter_gen(a), Arrow(lnat, Arrow(Arrow(a, a), Arrow(a, a)))
    if name == "node":
        sig = _need_sig(env, args, 2, name)
        if args[1] not in sig.sorts:
            raise _BuiltinMismatch(f"{args[0]} has no sort {args[1]!r}")
        return node_gen(sig, args[1]), node_web(sig, args[1])
    if name == "val":
        sig = _need_sig(env, args, 2, name)
        if args[1] not in sig.sorts:
            raise _BuiltinMismatch(f"{args[0]} has no sort {args[1]!r}")
        return promote_linear(val_rel(sig, args[1])), Arrow(Lazy(sig), sig.label(args[1]))
    if name == "len":
        sig = _need_sig(env, args, 1, name)
        return promote_linear(len_rel(sig)), Arrow(Lazy(sig), FlatNatWeb())
    if name in ("match", "iter", "rec"):
        sig = _need_sig(env, args, 1, name)
        *_, target = _arrows(web, 2, name)
        make, cases = {
            "match": (match_gen, match_cases_web),
            "iter": (iter_gen, iter_cases_web),
            "rec": (rec_gen, rec_cases_web),
        }[name]
        return make(sig, target), Arrow(Lazy(sig), Arrow(cases(sig, target), target))
    raise _BuiltinMismatch(f"unknown builtin {name!r}")


BUILTINS = (
    "der", "supp", "fix", "inj", "case", "true", "false", "if",
    "zero", "succ", "natiter", "node", "val", "len", "match", "iter", "rec",
)


def _check_fresh(env: Environment, name: str, decl) -> None:
    for kind, table in (("space", env.spaces), ("datatype", env.datas), ("constant", env.consts),
                        ("term", env.terms), ("probe", env.probes)):
        if name in table:
            _error(decl, f"{name!r} is already declared as a {kind}")


def resolve(unit: SourceUnit, sample: int = 8) -> Environment:
    env = Environment()
    for d in unit.decls:
        _check_fresh(env, d.name, d)
        if isinstance(d, SpaceDecl):
            env.spaces[d.name] = _resolve_web(d.web, env, d.name, d)
        elif isinstance(d, DataDecl):
            spec = {}
            for sort, lab, ar in d.ctors:
                if sort in spec:
                    _error(d, f"repeated sort {sort!r} in {d.name}")
                if len(set(ar)) != len(ar):
                    _error(d, f"repeated arity name in sort {sort!r}")
                spec[sort] = (_type_web(lab, env, d), ar)
            env.datas[d.name] = Signature.make(d.name, spec)
        elif isinstance(d, ConstDecl):
            web = _type_web(d.type, env, d)
            if isinstance(d.value, MRelLit):
                bad = [p for p in d.value.points if not web_contains(web, p)]
                if bad:
                    _error(d, f"point {format_point(bad[0])} is not in the web of {d.type}")
                den = frozenset(d.value.points)
            else:
                try:
                    den, expected = _builtin(d.value, web, env)
                except _BuiltinMismatch as e:
                    _error(d, str(e))
                if not same_web(expected, web):
                    _error(d, f"builtin {d.value.name} does not have type {d.type}")
            try:
                env.consts.add(d.name, d.type, den, env.types, sample)
            except TypeCheckError as e:
                _error(d, str(e))
        elif isinstance(d, TermDecl):
            t = _resolve_term(d.term, env, frozenset(), d)
            try:
                typecheck(t, (), env.consts)
            except TypeCheckError as e:
                _error(d, f"ill-typed term ({e.rule}): {e}")
            env.terms[d.name] = t
        elif isinstance(d, ProbeDecl):
            web = _resolve_web(d.web, env, d.name, d)
            env.probes[d.name] = (SpaceRepr(web, DUAL if d.dual else STRAIGHT), d.desc)
    return env


def load(text: str) -> Environment:
    return resolve(parse_unit(text))
