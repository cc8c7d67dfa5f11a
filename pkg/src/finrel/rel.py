"""Relations and multirelations.

A relation is a frozenset of ``Pair(source, target)`` points; a multirelation
is a relation whose sources are multisets, i.e. a set of points of an arrow
web.  Infinite (multi)relations are ``Generator`` objects: a membership test
plus an enumerator of the members of size at most ``k``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .points import EMPTY, Idx, MSet, Pair, Point, Tag, format_point, mset, parse_point
from .webs import Bang, WebExpr, enumerate_web, web_contains

Rel = frozenset  # of Pair points


@dataclass(frozen=True)
class Generator:
    name: str
    member: Callable[[Point], bool] = field(compare=False)
    enumerator: Callable[[int], Iterable[Point]] = field(compare=False)
    # image of a single source point, for quasi-functional relations
    fiber: Callable[[Point], Iterable[Point]] | None = field(compare=False, default=None)
    # exact image of a closed application to finite argument sets (curried)
    apply: Callable[..., frozenset] | None = field(compare=False, default=None)
    arity: int = 0

    def __contains__(self, p: Point) -> bool:
        return self.member(p)

    def enumerate(self, k: int) -> frozenset:
        return frozenset(p for p in self.enumerator(k) if p.size <= k)

    def __repr__(self) -> str:
        return f"Generator({self.name})"


RelLike = "frozenset | Generator"


def entries(f, bound: int | None = None) -> frozenset:
    if isinstance(f, Generator):
        if bound is None:
            raise ValueError(f"a bound is required to enumerate {f.name}")
        return f.enumerate(bound)
    return frozenset(f)


def rel(*pairs: tuple[Point, Point]) -> frozenset:
    return frozenset(Pair(a, b) for a, b in pairs)


def identity(points: Iterable[Point]) -> frozenset:
    return frozenset(Pair(p, p) for p in points)


def image(f, a: Iterable[Point], bound: int | None = None) -> frozenset:
    """Direct image of ``a`` by ``f``."""
    a = frozenset(a)
    if isinstance(f, Generator) and f.fiber is not None:
        out = set()
        for p in a:
            out.update(f.fiber(p))
        if bound is not None:
            out = {q for q in out if q.size <= bound}
        return frozenset(out)
    return frozenset(e.right for e in entries(f, bound) if e.left in a)


def reverse(f) -> frozenset:
    return frozenset(Pair(e.right, e.left) for e in f)


def compose(g, f) -> frozenset:
    """Relational composite ``g . f``."""
    by_src: dict[Point, list[Point]] = {}
    for e in g:
        by_src.setdefault(e.left, []).append(e.right)
    return frozenset(Pair(e.left, c) for e in f for c in by_src.get(e.right, ()))


def division(f, b: Iterable[Point], universe: Iterable[Point], bound: int | None = None) -> frozenset:
    """Points of ``universe`` whose image by ``f`` lies in ``b``."""
    b = frozenset(b)
    return frozenset(a for a in universe if image(f, [a], bound) <= b)


# ---------------------------------------------------------------- multisets helpers

def submultisets(m: MSet) -> Iterator[MSet]:
    items = m.items
    for mults in product(*(range(k + 1) for _, k in items)):
        yield MSet((p, c) for (p, _), c in zip(items, mults))


# ---------------------------------------------------------------- co-Kleisli

def mcompose(g, f, bound: int, budget: int | None = None) -> frozenset:
    """Co-Kleisli composite ``g o! f``, restricted to results of size <= bound.

    Generators are enumerated up to ``budget`` (default ``2 * bound + 2``);
    explicit finite inputs are used whole.
    """
    if budget is None:
        budget = 2 * bound + 2 if isinstance(f, Generator) or isinstance(g, Generator) else bound
    f_by_tgt: dict[Point, list[MSet]] = {}
    for e in entries(f, budget):
        f_by_tgt.setdefault(e.right, []).append(e.left)
    out = set()
    for e in entries(g, budget):
        betas = list(e.left.elements())
        gamma = e.right
        if any(b not in f_by_tgt for b in betas):
            continue
        base = 2 + gamma.size  # Pair node + MSet node + gamma
        if base > bound:
            continue

        def go(k: int, acc: list[tuple[Point, int]], used: int):
            if k == len(betas):
                out.add(Pair(MSet(acc), gamma))
                return
            for alpha in f_by_tgt[betas[k]]:
                cost = alpha.size - 1
                if used + cost > bound:
                    continue
                go(k + 1, acc + list(alpha.items), used + cost)

        go(0, [], base)
    return frozenset(out)


def dereliction(w: WebExpr, bound: int) -> frozenset:
    return frozenset(Pair(mset(a), a) for a in enumerate_web(w, bound))


def promote_linear(g: Generator) -> Generator:
    """A linear relation g as the multirelation {([a], b) : (a, b) in g}."""

    def member(e):
        return (
            isinstance(e, Pair)
            and isinstance(e.left, MSet)
            and e.left.card == 1
            and g.member(Pair(e.left.items[0][0], e.right))
        )

    def enum(k):
        return [Pair(mset(p.left), p.right) for p in g.enumerate(k - 1)]

    return Generator(g.name, member, enum, fiber=g.fiber, apply=g.apply, arity=g.arity)


def dereliction_gen(w: WebExpr) -> Generator:
    def member(p):
        return (
            isinstance(p, Pair)
            and isinstance(p.left, MSet)
            and p.left.card == 1
            and p.left.items[0][0] == p.right
            and web_contains(w, p.right)
        )

    def enum(k):
        return [Pair(mset(a), a) for a in enumerate_web(w, (k - 2) // 2)]

    def apply(s):
        return frozenset(a for a in s if web_contains(w, a))

    return Generator("dere", member, enum, apply=apply, arity=1)


def mtuple(fs: Mapping[str, Iterable[Point]]) -> frozenset:
    return frozenset(Pair(e.left, Tag(i, e.right)) for i, f in fs.items() for e in f)


def projection(fs_indices: Iterable[str], i: str, component_webs: Mapping[str, WebExpr] | None = None) -> Generator:
    """The co-Kleisli projection ``{([(i, a)], a)}`` as a generator."""

    def member(p):
        return (
            isinstance(p, Pair)
            and isinstance(p.left, MSet)
            and p.left.card == 1
            and isinstance(p.left.items[0][0], Tag)
            and p.left.items[0][0].index == i
            and p.left.items[0][0].value == p.right
            and (component_webs is None or web_contains(component_webs[i], p.right))
        )

    def enum(k):
        if component_webs is None:
            raise ValueError("projection needs component webs to enumerate")
        return [Pair(mset(Tag(i, a)), a) for a in enumerate_web(component_webs[i], (k - 3) // 2)]

    return Generator(f"proj_{i}", member, enum)


# ---------------------------------------------------------------- supp

def supp_gen(w: WebExpr) -> Generator:
    """The support relation from the web of !w to w."""

    def member(p):
        return (
            isinstance(p, Pair)
            and isinstance(p.left, MSet)
            and p.right in p.left.support
            and web_contains(w, p.right)
            and all(web_contains(w, q) for q in p.left.support)
        )

    def enum(k):
        return [Pair(m, a) for m in enumerate_web(Bang(w), k - 2) for a in m.support if 1 + m.size + a.size <= k]

    def fiber(m):
        return m.support if isinstance(m, MSet) else ()

    return Generator("supp", member, enum, fiber=fiber)


# ---------------------------------------------------------------- lifted sums

def _fam(family) -> dict[str, WebExpr]:
    return dict(family)


def inj_gen(family, i: str) -> Generator:
    fam = _fam(family)
    if i not in fam:
        raise KeyError(f"unknown index {i!r}")
    comp = fam[i]

    def member(p):
        if not (isinstance(p, Pair) and isinstance(p.left, MSet)):
            return False
        if p.left.card == 0:
            return p.right == Idx(i)
        if p.left.card == 1:
            a = p.left.items[0][0]
            return p.right == Tag(i, a) and web_contains(comp, a)
        return False

    def enum(k):
        out = [Pair(EMPTY, Idx(i))]
        out += [Pair(mset(a), Tag(i, a)) for a in enumerate_web(comp, (k - 3) // 2)]
        return out

    def apply(s):
        return frozenset([Idx(i)] + [Tag(i, a) for a in s if web_contains(comp, a)])

    return Generator(f"inj_{i}", member, enum, apply=apply, arity=1)


def case_gen(family, target: WebExpr) -> Generator:
    """case : lifted sum => &_i (A_i => B) => B."""
    fam = _fam(family)

    def member(p):
        if not (isinstance(p, Pair) and isinstance(p.left, MSet) and isinstance(p.right, Pair)):
            return False
        fs, beta = p.right.left, p.right.right
        if not (isinstance(fs, MSet) and fs.card == 1):
            return False
        phi = fs.items[0][0]
        if not (isinstance(phi, Tag) and phi.index in fam and isinstance(phi.value, Pair)):
            return False
        i, alphas, b = phi.index, phi.value.left, phi.value.right
        if b != beta or not isinstance(alphas, MSet) or not web_contains(target, beta):
            return False
        if not all(web_contains(fam[i], a) for a in alphas.support):
            return False
        expected = mset(Idx(i)) + MSet((Tag(i, a), m) for a, m in alphas.items)
        return p.left == expected

    def enum(k):
        out = []
        for i, comp in fam.items():
            for alphas in enumerate_web(Bang(comp), k):
                left = mset(Idx(i)) + MSet((Tag(i, a), m) for a, m in alphas.items)
                if left.size + alphas.size > k:
                    continue
                for beta in enumerate_web(target, k):
                    p = Pair(left, Pair(mset(Tag(i, Pair(alphas, beta))), beta))
                    if p.size <= k:
                        out.append(p)
        return out

    def apply(s, fs):
        out = set()
        for phi in fs:
            if not (isinstance(phi, Tag) and phi.index in fam):
                continue
            i, alphas, beta = phi.index, phi.value.left, phi.value.right
            if Idx(i) in s and all(Tag(i, a) in s for a in alphas.support):
                out.add(beta)
        return frozenset(out)

    return Generator("case", member, enum, apply=apply, arity=2)


# ---------------------------------------------------------------- fixpoint approximants

def fix_approx(n: int, w: WebExpr, bound: int) -> frozenset:
    """The size <= bound slice of fix_n on the web ``w``."""
    alphas = enumerate_web(w, bound)
    level: frozenset = frozenset()
    for _ in range(n):
        level = _fix_step(level, alphas, bound)
    return level


def _fix_step(prev: frozenset, alphas: Sequence[Point], bound: int) -> frozenset:
    children = sorted(prev)
    out = set()
    for alpha in alphas:
        base = 4 + 2 * alpha.size
        if base > bound:
            continue
        # choose a multiset of child entries; each costs size - 2
        def go(start: int, used: int, acc: list[Pair]):
            inner = mset(*(c.right for c in acc))
            phis = mset(Pair(inner, alpha))
            for c in acc:
                phis = phis + c.left
            out.add(Pair(phis, alpha))
            for idx in range(start, len(children)):
                c = children[idx]
                cost = c.size - 2
                if used + cost <= bound:
                    go(idx, used + cost, acc + [c])

        go(0, base, [])
    return frozenset(out)


def fix_member(p: Point) -> bool:
    """Membership in the full least fixpoint operator fix = U_n fix_n."""
    if not (isinstance(p, Pair) and isinstance(p.left, MSet)):
        return False
    return _fix_mem(p.left, p.right)


@functools.lru_cache(maxsize=100_000)
def _fix_mem(phis: MSet, alpha: Point) -> bool:
    for phi in phis.support:
        if not (isinstance(phi, Pair) and isinstance(phi.left, MSet)) or phi.right != alpha:
            continue
        rest = phis - mset(phi)
        if _fix_children(rest, tuple(phi.left.elements())):
            return True
    return False


@functools.lru_cache(maxsize=100_000)
def _fix_children(rest: MSet, targets: tuple[Point, ...]) -> bool:
    if not targets:
        return rest.card == 0
    head, tail = targets[0], targets[1:]
    for sub in submultisets(rest):
        if sub.card and _fix_mem(sub, head) and _fix_children(rest - sub, tail):
            return True
    return False


def fix_gen(w: WebExpr) -> Generator:
    def member(p):
        return fix_member(p) and all(web_contains(w, q) for q in _fix_atoms(p))

    def enum(k):
        return fix_approx(k, w, k)

    return Generator("fix", member, enum)


def _fix_atoms(p: Pair) -> Iterator[Point]:
    yield p.right
    for phi in p.left.support:
        yield phi.right
        yield from phi.left.support


# ---------------------------------------------------------------- text form

def format_mrel(f: Iterable[Point]) -> str:
    lines = []
    for e in sorted(f):
        lines.append(f"({format_point(e.left)} ; {format_point(e.right)})")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_mrel(text: str) -> frozenset:
    out = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not (line.startswith("(") and line.endswith(")") and ";" in line):
            raise ValueError(f"bad multirelation line: {line!r}")
        body = line[1:-1]
        depth = 0
        for pos, ch in enumerate(body):
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth -= 1
            elif ch == ";" and depth == 0:
                break
        else:
            raise ValueError(f"bad multirelation line: {line!r}")
        out.add(Pair(parse_point(body[:pos]), parse_point(body[pos + 1:])))
    return frozenset(out)


def check_generator(g: Generator, k: int, slack: int = 2) -> list[str]:
    """Check the generator contract at bound k; returns a list of problems."""
    problems = []
    small = g.enumerate(k)
    big = g.enumerate(k + slack)
    for p in small:
        if not g.member(p):
            problems.append(f"enumerated non-member {p}")
    filt = frozenset(p for p in big if p.size <= k)
    if filt != small:
        problems.append(f"enumerator not stable: {sorted(filt ^ small)[:3]}")
    return problems
