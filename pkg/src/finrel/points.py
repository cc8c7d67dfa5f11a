"""Points of webs, finite multisets, and their canonical text form.

Every point carries a precomputed ordering key so that comparison, hashing
and equality are structural and cheap.  The variant order used in keys is
fixed: Star < Nat < Atom < Idx < Tag < Pair < MSet < Path.
"""

from __future__ import annotations

import re
from collections import Counter
from typing import Iterable, Iterator

STAR, NAT, ATOM, IDX, TAG, PAIR, MSET, PATH = range(8)


class Point:
    __slots__ = ("key", "_hash", "size")

    def _init(self, key: tuple, size: int) -> None:
        object.__setattr__(self, "key", key)
        object.__setattr__(self, "_hash", hash(key))
        object.__setattr__(self, "size", size)

    def __setattr__(self, name, value):
        raise AttributeError("points are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Point):
            return NotImplemented
        return self._hash == other._hash and self.key == other.key

    def __hash__(self):
        return self._hash

    def __lt__(self, other: Point) -> bool:
        return self.key < other.key

    def __le__(self, other: Point) -> bool:
        return self.key <= other.key

    def __gt__(self, other: Point) -> bool:
        return self.key > other.key

    def __ge__(self, other: Point) -> bool:
        return self.key >= other.key

    def __repr__(self) -> str:
        return f"<{format_point(self)}>"

    def __str__(self) -> str:
        return format_point(self)


class Star(Point):
    __slots__ = ()

    def __init__(self) -> None:
        self._init((STAR,), 1)


class Nat(Point):
    __slots__ = ("n",)

    def __init__(self, n: int) -> None:
        if n < 0:
            raise ValueError(f"negative natural {n}")
        object.__setattr__(self, "n", n)
        self._init((NAT, n), 1)


class Atom(Point):
    __slots__ = ("web", "token")

    def __init__(self, web: str, token: str) -> None:
        object.__setattr__(self, "web", web)
        object.__setattr__(self, "token", token)
        self._init((ATOM, web, token), 1)


class Idx(Point):
    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        object.__setattr__(self, "name", name)
        self._init((IDX, name), 1)


class Tag(Point):
    __slots__ = ("index", "value")

    def __init__(self, index: str, value: Point) -> None:
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "value", value)
        self._init((TAG, index, value.key), 1 + value.size)


class Pair(Point):
    __slots__ = ("left", "right")

    def __init__(self, left: Point, right: Point) -> None:
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        self._init((PAIR, left.key, right.key), 1 + left.size + right.size)


class MSet(Point):
    """A finite multiset, stored as a sorted tuple of (point, multiplicity)."""

    __slots__ = ("items", "card")

    def __init__(self, items: Iterable[tuple[Point, int]] = ()) -> None:
        acc: dict[Point, int] = {}
        for p, m in items:
            if m < 0:
                raise ValueError("negative multiplicity")
            if m:
                acc[p] = acc.get(p, 0) + m
        canon = tuple(sorted(acc.items(), key=lambda pm: pm[0].key))
        object.__setattr__(self, "items", canon)
        object.__setattr__(self, "card", sum(m for _, m in canon))
        key = (MSET, len(canon), tuple((p.key, m) for p, m in canon))
        self._init(key, 1 + sum(m * p.size for p, m in canon))

    @classmethod
    def of(cls, *points: Point) -> MSet:
        return cls(Counter(points).items())

    @property
    def support(self) -> frozenset[Point]:
        return frozenset(p for p, _ in self.items)

    def mult(self, p: Point) -> int:
        for q, m in self.items:
            if q == p:
                return m
        return 0

    def elements(self) -> Iterator[Point]:
        """Elements with repetition, in canonical order."""
        for p, m in self.items:
            for _ in range(m):
                yield p

    def __add__(self, other: MSet) -> MSet:
        return MSet(self.items + other.items)

    def __sub__(self, other: MSet) -> MSet:
        """Multiset difference; raises if other is not a sub-multiset."""
        acc = dict(self.items)
        for p, m in other.items:
            if acc.get(p, 0) < m:
                raise ValueError("not a sub-multiset")
            acc[p] -= m
        return MSet(acc.items())

    def contains_msub(self, other: MSet) -> bool:
        acc = dict(self.items)
        return all(acc.get(p, 0) >= m for p, m in other.items)

    def __len__(self) -> int:
        return self.card

    def __bool__(self) -> bool:
        return bool(self.items)


class Path(Point):
    """A path of a lazy datatype: sort, typed address and value (Star or label)."""

    __slots__ = ("sort", "address", "value")

    def __init__(self, sort: str, address: Iterable[tuple[str, str]], value: Point) -> None:
        address = tuple((str(j), str(i)) for j, i in address)
        object.__setattr__(self, "sort", sort)
        object.__setattr__(self, "address", address)
        object.__setattr__(self, "value", value)
        self._init((PATH, sort, len(address), address, value.key), 1 + len(address) + value.size)

    @property
    def last_type(self) -> str:
        return self.address[-1][1] if self.address else self.sort

    @property
    def length(self) -> int:
        return len(self.address)

    def prefix(self, sort: str, arity: str) -> Path:
        """The path ``sort arity self``."""
        return Path(sort, ((arity, self.sort),) + self.address, self.value)

    def tail(self) -> Path:
        """Drop the leading sort and first arity name."""
        if not self.address:
            raise ValueError("empty address has no tail")
        return Path(self.address[0][1], self.address[1:], self.value)


EMPTY = MSet()
STAR_POINT = Star()


def mset(*points: Point) -> MSet:
    return MSet.of(*points)


def mset_sum(m1: MSet, m2: MSet) -> MSet:
    return m1 + m2


def mset_support(m: MSet) -> tuple[frozenset[Point], int]:
    return m.support, m.card


def point_size(p: Point) -> int:
    return p.size


def point_cmp(p: Point, q: Point) -> int:
    """-1, 0 or 1 according to the canonical order."""
    if p.key == q.key:
        return 0
    return -1 if p.key < q.key else 1


# ---------------------------------------------------------------- text form

def format_point(p: Point) -> str:
    if isinstance(p, Star):
        return "*"
    if isinstance(p, Nat):
        return str(p.n)
    if isinstance(p, Atom):
        return f"{p.token}@{p.web}"
    if isinstance(p, Idx):
        return p.name
    if isinstance(p, Tag):
        return f"{p.index}:{format_point(p.value)}"
    if isinstance(p, Pair):
        return f"({format_point(p.left)},{format_point(p.right)})"
    if isinstance(p, MSet):
        return "[" + ",".join(format_point(q) for q in p.elements()) + "]"
    if isinstance(p, Path):
        names = [p.sort]
        for j, i in p.address:
            names += [j, i]
        return f"path({' '.join(names)} ; {format_point(p.value)})"
    raise TypeError(p)


_TOKEN = re.compile(r"\s*(path\(|[A-Za-z0-9_'~.+\-]+|[()\[\],:;@*{}|])")


class PointSyntaxError(ValueError):
    pass


class _Reader:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def peek(self) -> str | None:
        m = _TOKEN.match(self.text, self.pos)
        if m is None:
            if self.text[self.pos:].strip():
                raise PointSyntaxError(f"bad character at {self.pos} in {self.text!r}")
            return None
        return m.group(1)

    def take(self) -> str:
        m = _TOKEN.match(self.text, self.pos)
        if m is None:
            raise PointSyntaxError(f"unexpected end of {self.text!r}")
        self.pos = m.end()
        return m.group(1)

    def expect(self, tok: str) -> None:
        got = self.take()
        if got != tok:
            raise PointSyntaxError(f"expected {tok!r}, got {got!r} in {self.text!r}")


def _read(r: _Reader) -> Point:
    tok = r.take()
    if tok == "*":
        return STAR_POINT
    if tok == "(":
        left = _read(r)
        r.expect(",")
        right = _read(r)
        r.expect(")")
        return Pair(left, right)
    if tok == "[":
        elems = []
        if r.peek() == "]":
            r.take()
            return EMPTY
        while True:
            elems.append(_read(r))
            t = r.take()
            if t == "]":
                return mset(*elems)
            if t != ",":
                raise PointSyntaxError(f"expected ',' or ']' in {r.text!r}")
    if tok == "path(":
        names = []
        while r.peek() != ";":
            names.append(r.take())
        r.take()
        value = _read(r)
        r.expect(")")
        if len(names) % 2 != 1:
            raise PointSyntaxError(f"path address must alternate sorts and arities: {names}")
        addr = [(names[k], names[k + 1]) for k in range(1, len(names), 2)]
        return Path(names[0], addr, value)
    if tok in "()[],:;@{}|":
        raise PointSyntaxError(f"unexpected {tok!r} in {r.text!r}")
    nxt = r.peek()
    if nxt == "@":
        r.take()
        return Atom(r.take(), tok)
    if nxt == ":":
        r.take()
        return Tag(tok, _read(r))
    if tok.isdigit():
        return Nat(int(tok))
    return Idx(tok)


def parse_point(text: str) -> Point:
    r = _Reader(text)
    p = _read(r)
    if r.peek() is not None:
        raise PointSyntaxError(f"trailing input in {text!r}")
    return p
