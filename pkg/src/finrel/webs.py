"""Web expressions: the underlying sets of finiteness spaces.

Enumeration is bounded by structural point size.  Naturals and atoms have
size 1, so webs with infinitely many of them (``FlatNat``, infinite ``Base``
webs) additionally cap the value: ``Nat(n)`` is admitted iff ``n <= bound``.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

from .points import (
    EMPTY,
    STAR_POINT,
    Atom,
    Idx,
    MSet,
    Nat,
    Pair,
    Path,
    Point,
    Star,
    Tag,
)

log = logging.getLogger(__name__)


class WebError(Exception):
    pass


# ---------------------------------------------------------------- signatures

@dataclass(frozen=True)
class Signature:
    """A power-series signature: sorts with label webs and arity names."""

    name: str
    sorts: tuple[str, ...]
    arities: tuple[tuple[str, ...], ...]
    labels: tuple["WebExpr", ...]

    def __post_init__(self):
        if len(set(self.sorts)) != len(self.sorts):
            raise WebError(f"duplicate sort names in {self.name}")
        if not (len(self.sorts) == len(self.arities) == len(self.labels)):
            raise WebError("sorts, arities and labels must align")
        for ar in self.arities:
            if len(set(ar)) != len(ar):
                raise WebError(f"duplicate arity names in {self.name}")

    @classmethod
    def make(cls, name: str, spec: dict[str, tuple["WebExpr", Sequence[str]]]) -> Signature:
        sorts = tuple(spec)
        return cls(
            name,
            sorts,
            tuple(tuple(spec[s][1]) for s in sorts),
            tuple(spec[s][0] for s in sorts),
        )

    def arity(self, sort: str) -> tuple[str, ...]:
        return self.arities[self.sorts.index(sort)]

    def label(self, sort: str) -> "WebExpr":
        return self.labels[self.sorts.index(sort)]

    def valid_address(self, sort: str, address: Iterable[tuple[str, str]]) -> bool:
        if sort not in self.sorts:
            return False
        cur = sort
        for j, i in address:
            if i not in self.sorts or j not in self.arity(cur):
                return False
            cur = i
        return True

    def __str__(self) -> str:
        parts = []
        for s, ar, lab in zip(self.sorts, self.arities, self.labels):
            parts.append(f"{s}({web_name(lab)})[{','.join(ar)}]")
        return f"data {self.name} {{ " + "; ".join(parts) + " }"


# ---------------------------------------------------------------- web expressions

class WebExpr:
    pass


@dataclass(frozen=True)
class Base(WebExpr):
    """A named web given by an enumerator ``bound -> points`` and a membership test."""

    name: str
    enumerator: Callable[[int], Iterable[Point]] | None = field(compare=False, default=None)
    member: Callable[[Point], bool] | None = field(compare=False, default=None)
    finite: bool = False


@dataclass(frozen=True)
class FinEnum(WebExpr):
    points: frozenset[Point]
    name: str | None = field(default=None, compare=False)

    @classmethod
    def atoms(cls, web: str, tokens: Iterable[str]) -> FinEnum:
        return cls(frozenset(Atom(web, t) for t in tokens), web)


@dataclass(frozen=True)
class FlatNatWeb(WebExpr):
    pass


FlatNat = FlatNatWeb()
EmptyWeb = FinEnum(frozenset(), "0")


@dataclass(frozen=True)
class Tensor(WebExpr):
    left: WebExpr
    right: WebExpr


@dataclass(frozen=True)
class With(WebExpr):
    family: tuple[tuple[str, WebExpr], ...]


@dataclass(frozen=True)
class Plus(WebExpr):
    family: tuple[tuple[str, WebExpr], ...]


@dataclass(frozen=True)
class LPlus(WebExpr):
    family: tuple[tuple[str, WebExpr], ...]


@dataclass(frozen=True)
class Bang(WebExpr):
    inner: WebExpr


@dataclass(frozen=True)
class Arrow(WebExpr):
    src: WebExpr
    tgt: WebExpr


@dataclass(frozen=True)
class Lazy(WebExpr):
    sig: Signature


def family(**members: WebExpr) -> tuple[tuple[str, WebExpr], ...]:
    return tuple(members.items())


def _check_family(fam) -> dict[str, WebExpr]:
    d = dict(fam)
    if len(d) != len(fam):
        raise WebError("family indices must be distinct")
    return d


def web_name(w: WebExpr) -> str:
    if isinstance(w, FinEnum):
        if w.name:
            return w.name
        return "{" + ",".join(str(p) for p in sorted(w.points)) + "}"
    if isinstance(w, Base):
        return w.name
    if w is FlatNat or isinstance(w, FlatNatWeb):
        return "N"
    if isinstance(w, Tensor):
        return f"({web_name(w.left)} * {web_name(w.right)})"
    if isinstance(w, Bang):
        return f"!{web_name(w.inner)}"
    if isinstance(w, Arrow):
        return f"({web_name(w.src)} => {web_name(w.tgt)})"
    if isinstance(w, Lazy):
        return w.sig.name
    op = {With: "&", Plus: "+", LPlus: "+~"}[type(w)]
    return f"{op}{{" + ", ".join(f"{i}: {web_name(a)}" for i, a in w.family) + "}"


def is_finite_web(w: WebExpr) -> bool:
    """Whether the web is a finite set (decided structurally)."""
    if isinstance(w, FinEnum):
        return True
    if isinstance(w, Base):
        return w.finite
    if isinstance(w, FlatNatWeb):
        return False
    if isinstance(w, Tensor):
        return (is_empty_web(w.left) or is_empty_web(w.right)) or (
            is_finite_web(w.left) and is_finite_web(w.right)
        )
    if isinstance(w, (With, Plus, LPlus)):
        return all(is_finite_web(a) for _, a in w.family)
    if isinstance(w, Bang):
        # only the empty multiset over an empty web
        return is_empty_web(w.inner)
    if isinstance(w, Arrow):
        return is_empty_web(w.tgt) or (is_empty_web(w.src) and is_finite_web(w.tgt))
    if isinstance(w, Lazy):
        return False
    raise TypeError(w)


def is_empty_web(w: WebExpr) -> bool:
    if isinstance(w, FinEnum):
        return not w.points
    if isinstance(w, Tensor):
        return is_empty_web(w.left) or is_empty_web(w.right)
    if isinstance(w, (With, Plus)):
        return all(is_empty_web(a) for _, a in w.family)
    if isinstance(w, LPlus):
        return not w.family
    if isinstance(w, Arrow):
        return is_empty_web(w.tgt)
    if isinstance(w, Lazy):
        return not w.sig.sorts
    return False


# ---------------------------------------------------------------- membership

def web_contains(w: WebExpr, p: Point) -> bool:
    """Whether ``p`` is a point of the web ``w``."""
    if isinstance(w, FinEnum):
        return p in w.points
    if isinstance(w, Base):
        if w.member is not None:
            return w.member(p)
        return isinstance(p, Atom) and p.web == w.name
    if isinstance(w, FlatNatWeb):
        return isinstance(p, Nat)
    if isinstance(w, Tensor):
        return isinstance(p, Pair) and web_contains(w.left, p.left) and web_contains(w.right, p.right)
    if isinstance(w, (With, Plus)):
        fam = _check_family(w.family)
        if not isinstance(p, Tag):
            return False
        if p.index not in fam:
            log.debug("tag %s not in family %s", p.index, list(fam))
            return False
        return web_contains(fam[p.index], p.value)
    if isinstance(w, LPlus):
        fam = _check_family(w.family)
        if isinstance(p, Idx):
            return p.name in fam
        if isinstance(p, Tag) and p.index in fam:
            return web_contains(fam[p.index], p.value)
        return False
    if isinstance(w, Bang):
        return isinstance(p, MSet) and all(web_contains(w.inner, q) for q in p.support)
    if isinstance(w, Arrow):
        return (
            isinstance(p, Pair)
            and isinstance(p.left, MSet)
            and web_contains(Bang(w.src), p.left)
            and web_contains(w.tgt, p.right)
        )
    if isinstance(w, Lazy):
        if not isinstance(p, Path) or not w.sig.valid_address(p.sort, p.address):
            return False
        if isinstance(p.value, Star):
            return True
        return web_contains(w.sig.label(p.last_type), p.value)
    raise TypeError(w)


# ---------------------------------------------------------------- enumeration

def enumerate_web(w: WebExpr, size_bound: int) -> list[Point]:
    """All points of ``w`` of size at most ``size_bound``, sorted."""
    return list(_enum(w, size_bound))


@functools.lru_cache(maxsize=4096)
def _enum(w: WebExpr, k: int) -> tuple[Point, ...]:
    if k <= 0:
        return ()
    pts = set(_enum_raw(w, k))
    return tuple(sorted(pts))


def _by_size(w: WebExpr, k: int) -> dict[int, list[Point]]:
    out: dict[int, list[Point]] = {}
    for p in _enum(w, k):
        out.setdefault(p.size, []).append(p)
    return out


def _enum_raw(w: WebExpr, k: int) -> Iterable[Point]:
    if isinstance(w, FinEnum):
        return [p for p in w.points if p.size <= k]
    if isinstance(w, Base):
        if w.enumerator is None:
            raise WebError(f"web not enumerable: {w.name}")
        return [p for p in w.enumerator(k) if p.size <= k]
    if isinstance(w, FlatNatWeb):
        return [Nat(n) for n in range(k + 1)]
    if isinstance(w, Tensor):
        left = _enum(w.left, k - 2)
        out = []
        for a in left:
            for b in _enum(w.right, k - 1 - a.size):
                out.append(Pair(a, b))
        return out
    if isinstance(w, (With, Plus)):
        fam = _check_family(w.family)
        return [Tag(i, p) for i, a in fam.items() for p in _enum(a, k - 1)]
    if isinstance(w, LPlus):
        fam = _check_family(w.family)
        out = [Idx(i) for i in fam]
        out += [Tag(i, p) for i, a in fam.items() for p in _enum(a, k - 1)]
        return out
    if isinstance(w, Bang):
        return _enum_msets(_enum(w.inner, k - 1), k - 1)
    if isinstance(w, Arrow):
        out = []
        for m in _enum(Bang(w.src), k - 2):
            for b in _enum(w.tgt, k - 1 - m.size):
                out.append(Pair(m, b))
        return out
    if isinstance(w, Lazy):
        return _enum_paths(w.sig, k)
    raise TypeError(w)


def _enum_msets(elems: Sequence[Point], budget: int) -> list[MSet]:
    """Multisets over ``elems`` whose element sizes sum to at most ``budget``."""
    elems = sorted(elems)
    out: list[MSet] = []

    def go(start: int, rem: int, acc: list[tuple[Point, int]]):
        out.append(MSet(acc))
        for idx in range(start, len(elems)):
            e = elems[idx]
            if e.size > rem:
                continue
            m = 1
            while m * e.size <= rem:
                acc.append((e, m))
                go(idx + 1, rem - m * e.size, acc)
                acc.pop()
                m += 1

    if budget >= 0:
        go(0, budget, [])
    return out


def _enum_paths(sig: Signature, k: int) -> list[Path]:
    out: list[Path] = []
    # a path of address length n has size 1 + n + value size
    for sort in sig.sorts:
        stack = [(sort, ())]
        while stack:
            cur, addr = stack.pop()
            base = 1 + len(addr)
            if base + 1 > k:
                continue
            last = addr[-1][1] if addr else cur
            out.append(Path(cur, addr, STAR_POINT))
            for v in _enum(sig.label(last), k - base):
                out.append(Path(cur, addr, v))
            for j in sig.arity(last):
                for i in sig.sorts:
                    stack.append((cur, addr + ((j, i),)))
    return out


def points_of_size(w: WebExpr, k: int) -> list[Point]:
    return [p for p in _enum(w, k) if p.size == k]


__all__ = [
    "Arrow",
    "Bang",
    "Base",
    "EMPTY",
    "EmptyWeb",
    "FinEnum",
    "FlatNat",
    "LPlus",
    "Lazy",
    "Plus",
    "Signature",
    "Tensor",
    "WebError",
    "WebExpr",
    "With",
    "enumerate_web",
    "family",
    "is_empty_web",
    "is_finite_web",
    "web_contains",
    "web_name",
]
