"""Types, terms and the typing rules of the λ-calculus with records."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..rel import Generator
from ..webs import Arrow as WArrow
from ..webs import Lazy, Signature, WebExpr, With, enumerate_web, web_contains


class TypeCheckError(Exception):
    def __init__(self, rule: str, message: str):
        super().__init__(f"[{rule}] {message}")
        self.rule = rule


# ---------------------------------------------------------------- types

class TypeExpr:
    pass


@dataclass(frozen=True)
class TAtom(TypeExpr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class TArrow(TypeExpr):
    src: TypeExpr
    tgt: TypeExpr

    def __str__(self):
        s = str(self.src)
        if isinstance(self.src, TArrow):
            s = f"({s})"
        return f"{s} => {self.tgt}"


@dataclass(frozen=True)
class TRecord(TypeExpr):
    """Products: binary ones use labels 1 and 2, unit is the empty record."""

    fields: tuple = ()

    def field_type(self, label: str) -> TypeExpr | None:
        return dict(self.fields).get(label)

    def __str__(self):
        if not self.fields:
            return "unit"
        if [l for l, _ in self.fields] == ["1", "2"]:
            a, b = (t for _, t in self.fields)
            ps = [f"({x})" if isinstance(x, (TArrow,)) or _is_pair(x) else str(x) for x in (a, b)]
            return f"{ps[0]} * {ps[1]}"
        return "<" + ", ".join(f"{l}: {t}" for l, t in self.fields) + ">"


@dataclass(frozen=True)
class TData(TypeExpr):
    name: str

    def __str__(self):
        return self.name


def _is_pair(t) -> bool:
    return isinstance(t, TRecord) and [l for l, _ in t.fields] == ["1", "2"]


UNIT = TRecord(())


def TProd(a: TypeExpr, b: TypeExpr) -> TRecord:
    return TRecord((("1", a), ("2", b)))


@dataclass
class TypeEnv:
    spaces: dict = field(default_factory=dict)
    datas: dict = field(default_factory=dict)

    def web(self, t: TypeExpr) -> WebExpr:
        if isinstance(t, TAtom):
            if t.name in self.spaces:
                return self.spaces[t.name]
            if t.name in self.datas:
                return Lazy(self.datas[t.name])
            raise TypeCheckError("type", f"unknown space {t.name}")
        if isinstance(t, TData):
            if t.name not in self.datas:
                raise TypeCheckError("type", f"unknown datatype {t.name}")
            return Lazy(self.datas[t.name])
        if isinstance(t, TArrow):
            return WArrow(self.web(t.src), self.web(t.tgt))
        if isinstance(t, TRecord):
            return With(tuple((l, self.web(a)) for l, a in t.fields))
        raise TypeError(t)


# ---------------------------------------------------------------- terms

class Term:
    pass


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const(Term):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Abs(Term):
    var: str
    type: TypeExpr
    body: Term

    def __str__(self):
        return f"\\{self.var}:{_type_atomic(self.type)}. {self.body}"


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term

    def __str__(self):
        f = str(self.fn) if isinstance(self.fn, (Var, Const, App, Record, Proj)) else f"({self.fn})"
        a = str(self.arg) if isinstance(self.arg, (Var, Const, Record)) else f"({self.arg})"
        return f"{f} {a}"


@dataclass(frozen=True)
class Record(Term):
    fields: tuple = ()

    def __str__(self):
        if not self.fields:
            return "()"
        if [l for l, _ in self.fields] == ["1", "2"]:
            return f"<{self.fields[0][1]}, {self.fields[1][1]}>"
        return "<" + ", ".join(f"{l} = {t}" for l, t in self.fields) + ">"


@dataclass(frozen=True)
class Proj(Term):
    label: str
    term: Term

    def __str__(self):
        inner = str(self.term) if isinstance(self.term, (Var, Const, Record)) else f"({self.term})"
        if self.label == "1":
            return f"fst {inner}"
        if self.label == "2":
            return f"snd {inner}"
        return f"{inner}.{self.label}"


UNIT_TERM = Record(())


def PairT(s: Term, t: Term) -> Record:
    return Record((("1", s), ("2", t)))


def Fst(t: Term) -> Proj:
    return Proj("1", t)


def Snd(t: Term) -> Proj:
    return Proj("2", t)


def apps(f: Term, *args: Term) -> Term:
    for a in args:
        f = App(f, a)
    return f


def _type_atomic(t: TypeExpr) -> str:
    s = str(t)
    return s if isinstance(t, (TAtom, TData)) or (isinstance(t, TRecord) and not _is_pair(t)) else f"({s})"


def free_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Const):
        return frozenset()
    if isinstance(t, Abs):
        return free_vars(t.body) - {t.var}
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    if isinstance(t, Record):
        return frozenset().union(*(free_vars(s) for _, s in t.fields))
    if isinstance(t, Proj):
        return free_vars(t.term)
    raise TypeError(t)


def substitute(t: Term, x: str, u: Term) -> Term:
    """t[u/x]; bound variables are renamed when they would capture."""
    if isinstance(t, Var):
        return u if t.name == x else t
    if isinstance(t, Const):
        return t
    if isinstance(t, Abs):
        if t.var == x:
            return t
        if t.var in free_vars(u):
            fresh = t.var
            avoid = free_vars(u) | free_vars(t.body) | {x}
            while fresh in avoid:
                fresh += "'"
            body = substitute(t.body, t.var, Var(fresh))
            return Abs(fresh, t.type, substitute(body, x, u))
        return Abs(t.var, t.type, substitute(t.body, x, u))
    if isinstance(t, App):
        return App(substitute(t.fn, x, u), substitute(t.arg, x, u))
    if isinstance(t, Record):
        return Record(tuple((l, substitute(s, x, u)) for l, s in t.fields))
    if isinstance(t, Proj):
        return Proj(t.label, substitute(t.term, x, u))
    raise TypeError(t)


# ---------------------------------------------------------------- constants

@dataclass(frozen=True)
class ConstEntry:
    type: TypeExpr
    denotation: object  # frozenset of points or Generator

    def enumerate(self, bound: int):
        if isinstance(self.denotation, Generator):
            return self.denotation.enumerate(bound)
        return frozenset(p for p in self.denotation if p.size <= bound)

    def member(self, p) -> bool:
        if isinstance(self.denotation, Generator):
            return self.denotation.member(p)
        return p in self.denotation


class ConstTable(dict):
    """name -> ConstEntry, with a sampled check that denotations lie in their webs."""

    def add(self, name: str, type_: TypeExpr, denotation, env: TypeEnv | None = None, sample: int = 8):
        if name in self:
            raise TypeCheckError("const", f"duplicate constant {name}")
        entry = ConstEntry(type_, denotation)
        if env is not None:
            web = env.web(type_)
            for p in sorted(entry.enumerate(sample)):
                if not web_contains(web, p):
                    raise TypeCheckError("const", f"point {p} of {name} is not in the web of {type_}")
        self[name] = entry
        return entry


# ---------------------------------------------------------------- typing

Context = Sequence[tuple[str, TypeExpr]]


def typecheck(t: Term, ctx: Context = (), consts: Mapping | None = None) -> TypeExpr:
    consts = consts or {}
    env = {}
    for x, a in ctx:
        env[x] = a
    return _tc(t, env, consts)


def _tc(t: Term, env: dict, consts) -> TypeExpr:
    if isinstance(t, Var):
        if t.name not in env:
            raise TypeCheckError("var", f"unbound variable {t.name}")
        return env[t.name]
    if isinstance(t, Const):
        if t.name not in consts:
            raise TypeCheckError("const", f"unknown constant {t.name}")
        return consts[t.name].type
    if isinstance(t, Abs):
        return TArrow(t.type, _tc(t.body, {**env, t.var: t.type}, consts))
    if isinstance(t, App):
        f = _tc(t.fn, env, consts)
        a = _tc(t.arg, env, consts)
        if not isinstance(f, TArrow):
            raise TypeCheckError("app", f"applying a term of type {f}")
        if f.src != a:
            raise TypeCheckError("app", f"argument of type {a} where {f.src} is expected")
        return f.tgt
    if isinstance(t, Record):
        labels = [l for l, _ in t.fields]
        if len(set(labels)) != len(labels):
            raise TypeCheckError("pair", "duplicate record labels")
        return TRecord(tuple((l, _tc(s, env, consts)) for l, s in t.fields))
    if isinstance(t, Proj):
        a = _tc(t.term, env, consts)
        if not isinstance(a, TRecord) or a.field_type(t.label) is None:
            raise TypeCheckError("proj", f"projection {t.label} of a term of type {a}")
        return a.field_type(t.label)
    raise TypeError(t)
