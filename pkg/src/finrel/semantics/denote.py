"""Bounded denotations computed from the point-derivation rules.

A judgment ``x1^m1, ..., xn^mn |- t^a`` is identified with the curried point
``(m1, (m2, ... (mn, a)))`` of the web of ``A1 => ... => An => A``; its size is
the size of that point.  The slice at ``bound`` is taken from the judgments
derivable with every judgment in the derivation of size at most ``budget``.
This is computed bottom-up by ``denote`` and top-down by ``derive_point``;
``denote_oracle`` filters the whole web slice through the latter.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from ..points import EMPTY, MSet, Pair, Point, Tag
from ..rel import submultisets
from ..webs import Bang, _enum_msets, enumerate_web, web_contains
from .terms import (
    Abs,
    App,
    Const,
    Context,
    Proj,
    Record,
    Term,
    TypeCheckError,
    TypeEnv,
    Var,
    typecheck,
)


class SemanticsError(Exception):
    pass


SLACK = 4


def default_budget(bound: int) -> int:
    return bound + SLACK


def judgment_size(ctx: Sequence[MSet], point: Point) -> int:
    return len(ctx) + sum(m.size for m in ctx) + point.size


def curry(ctx: Sequence[MSet], point: Point) -> Point:
    for m in reversed(ctx):
        point = Pair(m, point)
    return point


def uncurry(p: Point, n: int) -> tuple[tuple[MSet, ...], Point]:
    ms = []
    for _ in range(n):
        ms.append(p.left)
        p = p.right
    return tuple(ms), p


def _add(c1: tuple, c2: tuple) -> tuple:
    return tuple(a + b for a, b in zip(c1, c2))


def _sub(c1: tuple, c2: tuple) -> tuple:
    return tuple(a - b for a, b in zip(c1, c2))


# ---------------------------------------------------------------- bottom-up

class _Judgments:
    """All judgments of size <= budget derivable within the budget."""

    def __init__(self, env: TypeEnv, consts, budget: int):
        self.env = env
        self.consts = consts
        self.budget = budget
        self.cache: dict = {}

    def run(self, t: Term, ctx: tuple) -> frozenset:
        key = (t, ctx)
        if key not in self.cache:
            self.cache[key] = frozenset(self._compute(t, ctx))
        return self.cache[key]

    def _compute(self, t: Term, ctx: tuple):
        n = len(ctx)
        B = self.budget
        empty = (EMPTY,) * n
        if isinstance(t, Var):
            idx = max(k for k, (x, _) in enumerate(ctx) if x == t.name)
            web = self.env.web(ctx[idx][1])
            # the judgment has size 2n + 2|a|
            for a in enumerate_web(web, (B - 2 * n) // 2):
                c = empty[:idx] + (MSet([(a, 1)]),) + empty[idx + 1:]
                if judgment_size(c, a) <= B:
                    yield c, a
        elif isinstance(t, Const):
            entry = self.consts[t.name]
            for a in entry.enumerate(B - 2 * n):
                if judgment_size(empty, a) <= B:
                    yield empty, a
        elif isinstance(t, Abs):
            for c, b in self.run(t.body, ctx + ((t.var, t.type),)):
                yield c[:-1], Pair(c[-1], b)
        elif isinstance(t, Record):
            for label, s in t.fields:
                for c, a in self.run(s, ctx):
                    if judgment_size(c, a) + 1 <= B:
                        yield c, Tag(label, a)
        elif isinstance(t, Proj):
            for c, a in self.run(t.term, ctx):
                if isinstance(a, Tag) and a.index == t.label:
                    yield c, a.value
        elif isinstance(t, App):
            yield from self._app(t, ctx)
        else:
            raise TypeError(t)

    def _app(self, t: App, ctx: tuple):
        B = self.budget
        by_point: dict[Point, list[tuple]] = {}
        for c, a in self.run(t.arg, ctx):
            by_point.setdefault(a, []).append(c)
        for c0, p in self.run(t.fn, ctx):
            alphas, beta = p.left, p.right
            if any(a not in by_point for a in alphas.support):
                continue
            base = judgment_size(c0, beta)
            if base > B:
                continue
            for c in self._spread(list(alphas.items), by_point, c0, base):
                yield c, beta

    def _spread(self, items, by_point, acc, used):
        """Sum one argument context per element (with multiplicity) into ``acc``."""
        if not items:
            yield acc
            return
        (a, m), rest = items[0], items[1:]
        opts = by_point[a]
        for choice in itertools.combinations_with_replacement(range(len(opts)), m):
            c = acc
            for k in choice:
                c = _add(c, opts[k])
            size = used + sum(x.size - y.size for x, y in zip(c, acc))
            if size <= self.budget:
                yield from self._spread(rest, by_point, c, size)


def denote(
    t: Term,
    ctx: Context,
    consts,
    bound: int,
    env: TypeEnv | None = None,
    budget: int | None = None,
) -> frozenset:
    """The size <= bound slice, as curried points over the context."""
    env = env or TypeEnv()
    typecheck(t, ctx, consts)
    budget = default_budget(bound) if budget is None else max(budget, bound)
    ctx = tuple(ctx)
    js = _Judgments(env, consts, budget).run(t, ctx)
    out = set()
    for c, a in js:
        if judgment_size(c, a) <= bound:
            out.add(curry(c, a))
    return frozenset(out)


# ---------------------------------------------------------------- top-down

class _Deriver:
    def __init__(self, env: TypeEnv, consts, budget: int):
        self.env = env
        self.consts = consts
        self.budget = budget
        self.memo: dict = {}

    def derive(self, t: Term, ctx: tuple, ms: tuple, point: Point) -> bool:
        if judgment_size(ms, point) > self.budget:
            return False
        key = (t, ctx, ms, point)
        if key not in self.memo:
            self.memo[key] = False  # no cyclic dependencies, but be safe
            self.memo[key] = self._derive(t, ctx, ms, point)
        return self.memo[key]

    def _derive(self, t, ctx, ms, point) -> bool:
        if isinstance(t, Var):
            idx = max(k for k, (x, _) in enumerate(ctx) if x == t.name)
            return all(
                (m == MSet([(point, 1)])) if k == idx else not m for k, m in enumerate(ms)
            ) and web_contains(self.env.web(ctx[idx][1]), point)
        if isinstance(t, Const):
            return all(not m for m in ms) and self.consts[t.name].member(point)
        if isinstance(t, Abs):
            if not (isinstance(point, Pair) and isinstance(point.left, MSet)):
                return False
            return self.derive(t.body, ctx + ((t.var, t.type),), ms + (point.left,), point.right)
        if isinstance(t, Record):
            if not isinstance(point, Tag):
                return False
            for label, s in t.fields:
                if label == point.index:
                    return self.derive(s, ctx, ms, point.value)
            return False
        if isinstance(t, Proj):
            return self.derive(t.term, ctx, ms, Tag(t.label, point))
        if isinstance(t, App):
            return self._derive_app(t, ctx, ms, point)
        raise TypeError(t)

    def _derive_app(self, t: App, ctx, ms, beta) -> bool:
        arg_type = typecheck(t.arg, ctx, self.consts)
        arg_web = self.env.web(arg_type)
        splits = [tuple(c) for c in itertools.product(*(list(submultisets(m)) for m in ms))]
        room_max = self.budget - judgment_size((EMPTY,) * len(ms), beta) - 1
        # elements the argument can produce from some part of the context
        usable = [
            a
            for a in enumerate_web(arg_web, room_max - 1)
            if any(self.derive(t.arg, ctx, c, a) for c in splits)
        ]
        for c0 in splits:
            rest = _sub(ms, c0)
            room = self.budget - judgment_size(c0, beta) - 1
            if room < 1:
                continue
            for alphas in _enum_msets(usable, room - 1):
                if not self.derive(t.fn, ctx, c0, Pair(alphas, beta)):
                    continue
                if self._split(t.arg, ctx, list(alphas.elements()), rest):
                    return True
        return False

    def _split(self, s: Term, ctx, alphas: list, rest: tuple) -> bool:
        if not alphas:
            return all(not m for m in rest)
        head, tail = alphas[0], alphas[1:]
        if not tail:
            return self.derive(s, ctx, rest, head)
        for c in itertools.product(*(list(submultisets(m)) for m in rest)):
            c = tuple(c)
            if self.derive(s, ctx, c, head) and self._split(s, ctx, tail, _sub(rest, c)):
                return True
        return False


def _check_annotation(env: TypeEnv, ctx: Context, ms: Sequence[MSet], t_type, point: Point) -> None:
    if len(ms) != len(ctx):
        raise SemanticsError("annotation does not match the context length")
    for (x, a), m in zip(ctx, ms):
        if not isinstance(m, MSet) or not web_contains(Bang(env.web(a)), m):
            raise SemanticsError(f"annotation of {x} is not a multiset over the web of {a}")
    if not web_contains(env.web(t_type), point):
        raise SemanticsError(f"point {point} is not in the web of {t_type}")


def derive_point(
    t: Term,
    annotated: Sequence[tuple[str, MSet, object]],
    point: Point,
    consts=None,
    env: TypeEnv | None = None,
    budget: int | None = None,
) -> bool:
    """Whether x1^m1 ... xn^mn |- t^point is derivable (within the budget)."""
    env = env or TypeEnv()
    consts = consts or {}
    ctx = tuple((x, a) for x, _, a in annotated)
    ms = tuple(m for _, m, _ in annotated)
    ty = typecheck(t, ctx, consts)
    _check_annotation(env, ctx, ms, ty, point)
    size = judgment_size(ms, point)
    budget = default_budget(size) if budget is None else budget
    return _Deriver(env, consts, budget).derive(t, ctx, ms, point)


def denote_oracle(
    t: Term,
    ctx: Context,
    consts,
    bound: int,
    env: TypeEnv | None = None,
    budget: int | None = None,
) -> frozenset:
    """Every curried point of size <= bound whose judgment is derivable."""
    from .terms import TArrow

    env = env or TypeEnv()
    ty = typecheck(t, ctx, consts)
    budget = default_budget(bound) if budget is None else max(budget, bound)
    full = ty
    for _, a in reversed(list(ctx)):
        full = TArrow(a, full)
    d = _Deriver(env, consts, budget)
    ctx = tuple(ctx)
    out = set()
    for p in enumerate_web(env.web(full), bound):
        ms, a = uncurry(p, len(ctx))
        if d.derive(t, ctx, ms, a):
            out.add(p)
    return frozenset(out)


# ---------------------------------------------------------------- equality

@dataclass
class EqReport:
    equal: bool
    bound: int
    only_left: frozenset
    only_right: frozenset

    @property
    def witness(self) -> Point | None:
        diff = sorted(self.only_left | self.only_right)
        return diff[0] if diff else None

    def describe(self) -> str:
        if self.equal:
            return f"equal at bound {self.bound}"
        w = self.witness
        side = "left" if w in self.only_left else "right"
        return f"differ at bound {self.bound}: {w} only on the {side}"


def saturated_slice(
    t: Term,
    ctx: Context,
    consts,
    bound: int,
    env: TypeEnv | None = None,
    max_budget: int | None = None,
    step: int = 2,
    patience: int = 2,
) -> tuple[frozenset, int]:
    """Raise the budget until the slice at ``bound`` stops growing (or the cap).

    The slice counts as stable after ``patience`` unchanged steps in a row.
    Returns the slice and the budget at which it was taken.
    """
    cap = 2 * bound + SLACK + 4 if max_budget is None else max_budget
    budget = default_budget(bound)
    cur = denote(t, ctx, consts, bound, env, budget)
    calm = 0
    while budget + step <= cap and calm < patience:
        nxt = denote(t, ctx, consts, bound, env, budget + step)
        budget += step
        calm = calm + 1 if nxt == cur else 0
        cur = nxt
    return cur, budget


def reconcile_cap(bound: int) -> int:
    """Largest budget used to look for a difference point on the other side."""
    return 4 * bound + 16


def _underived(t: Term, ctx: Context, consts, env, points, budget: int, cap: int | None = None) -> frozenset:
    """The points not derivable for ``t`` at any budget from ``budget`` up to ``cap``."""
    ctx = tuple(ctx)
    left = set(points)
    cap = budget if cap is None else max(cap, budget)
    while left and budget <= cap:
        d = _Deriver(env or TypeEnv(), consts, budget)
        for p in sorted(left):
            ms, a = uncurry(p, len(ctx))
            if d.derive(t, ctx, ms, a):
                left.discard(p)
        budget += 2
    return frozenset(left)


def beta_eq_bounded(
    s: Term,
    t: Term,
    ctx: Context,
    consts,
    bound: int,
    env: TypeEnv | None = None,
    budget: int | None = None,
) -> EqReport:
    """Compare the bounded slices of two terms of the same type.

    With no explicit budget each side is saturated separately, since a redex
    needs a larger derivation budget than its contractum.
    """
    ts, tt = typecheck(s, ctx, consts), typecheck(t, ctx, consts)
    if ts != tt:
        raise TypeCheckError("eq", f"types differ: {ts} and {tt}")
    if budget is None:
        a, _ = saturated_slice(s, ctx, consts, bound, env)
        b, _ = saturated_slice(t, ctx, consts, bound, env)
        # a point found on one side is in its denotation; look for it on the other
        # side top-down, deepening the budget, before calling it a difference
        start, cap = 2 * bound + SLACK + 4, reconcile_cap(bound)
        only_a = _underived(t, ctx, consts, env, a - b, start, cap)
        only_b = _underived(s, ctx, consts, env, b - a, start, cap)
        return EqReport(not (only_a or only_b), bound, only_a, only_b)
    else:
        a = denote(s, ctx, consts, bound, env, budget)
        b = denote(t, ctx, consts, bound, env, budget)
    return EqReport(a == b, bound, a - b, b - a)
