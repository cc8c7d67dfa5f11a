"""Exact evaluation of closed terms to finite point sets.

Applying a relation to a set ``S`` keeps the results of entries whose
multiset has support inside ``S``.  At first order this is compositional,
so closed terms built from finite constants and generators that know their
exact image (``Generator.apply``) evaluate to finite sets without any size
bound.  Abstractions are only allowed in head position of an application.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..points import MSet, Pair, Tag
from ..rel import Generator
from .terms import Abs, App, Const, Proj, Record, Term, TArrow, Var


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class Closure:
    var: str
    body: Term
    env: tuple


@dataclass(frozen=True)
class Partial:
    gen: Generator
    args: tuple = ()


def apply_set(rel, arg: frozenset) -> frozenset:
    """{b : (m, b) in rel, supp m within arg}."""
    return frozenset(
        p.right for p in rel if isinstance(p, Pair) and isinstance(p.left, MSet) and p.left.support <= arg
    )


def _arity(gen: Generator) -> int:
    if gen.apply is not None:
        return gen.arity
    if gen.fiber is not None:
        return 1
    raise EvalError(f"{gen.name} has no exact image")


def _call(gen: Generator, args: tuple) -> frozenset:
    if gen.apply is not None:
        return frozenset(gen.apply(*args))
    (s,) = args
    return frozenset(q for p in s for q in gen.fiber(p))


def evaluate(t: Term, consts, env: dict | None = None):
    value = _eval(t, consts, tuple((env or {}).items()))
    if not isinstance(value, frozenset):
        raise EvalError(f"{t} does not evaluate to a finite set")
    return value


def _lookup(env: tuple, name: str):
    for k, v in reversed(env):
        if k == name:
            return v
    raise EvalError(f"unbound variable {name}")


def _as_set(v, what: str) -> frozenset:
    if isinstance(v, frozenset):
        return v
    raise EvalError(f"{what} is a function value, not a finite set")


def _eval(t: Term, consts, env: tuple):
    if isinstance(t, Var):
        return _lookup(env, t.name)
    if isinstance(t, Const):
        entry = consts[t.name]
        d = entry.denotation
        if isinstance(d, Generator):
            if _arity(d) == 0:
                return frozenset(d.apply())
            return Partial(d)
        return frozenset(d)
    if isinstance(t, Abs):
        return Closure(t.var, t.body, env)
    if isinstance(t, App):
        f = _eval(t.fn, consts, env)
        a = _eval(t.arg, consts, env)
        if isinstance(f, Closure):
            return _eval(f.body, consts, f.env + ((f.var, a),))
        a = _as_set(a, f"argument {t.arg}")
        if isinstance(f, Partial):
            args = f.args + (a,)
            if len(args) == _arity(f.gen):
                return _call(f.gen, args)
            return Partial(f.gen, args)
        return apply_set(f, a)
    if isinstance(t, Record):
        out = set()
        for label, s in t.fields:
            out.update(Tag(label, p) for p in _as_set(_eval(s, consts, env), f"field {label}"))
        return frozenset(out)
    if isinstance(t, Proj):
        s = _as_set(_eval(t.term, consts, env), f"projected term {t.term}")
        return frozenset(p.value for p in s if isinstance(p, Tag) and p.index == t.label)
    raise TypeError(t)


def slice_of(points: frozenset, bound: int) -> frozenset:
    return frozenset(p for p in points if p.size <= bound)
