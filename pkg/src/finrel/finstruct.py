"""Finiteness structures as decision procedures over symbolic subsets.

A ``SubsetDesc`` names a possibly infinite subset of a web.  ``fin_member``
answers whether it is finitary in the straight or dual structure, using the
known characterizations of each web constructor, and says ``Unknown`` with a
reason everywhere else.  Refutations on infinite webs always carry a
``WitnessFamily`` that can be re-checked point by point.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .points import EMPTY, STAR_POINT, MSet, Pair, Path, Point, PointSyntaxError, Star, Tag, _read, _Reader, mset
from .webs import (
    Arrow,
    Bang,
    Base,
    FinEnum,
    FlatNatWeb,
    LPlus,
    Lazy,
    Plus,
    Tensor,
    WebExpr,
    With,
    enumerate_web,
    is_empty_web,
    is_finite_web,
    web_contains,
)

log = logging.getLogger(__name__)

STRAIGHT = "straight"
DUAL = "dual"


class FinError(ValueError):
    """A description does not fit the web it is asked about."""


# ---------------------------------------------------------------- descriptions

class SubsetDesc:
    pass


@dataclass(frozen=True)
class Explicit(SubsetDesc):
    points: frozenset

    @classmethod
    def of(cls, *pts: Point) -> Explicit:
        return cls(frozenset(pts))


@dataclass(frozen=True)
class FullWeb(SubsetDesc):
    pass


@dataclass(frozen=True)
class Prom(SubsetDesc):
    """All finite multisets over ``inner``."""

    inner: SubsetDesc


@dataclass(frozen=True)
class Inj(SubsetDesc):
    index: str
    inner: SubsetDesc


@dataclass(frozen=True)
class Prod(SubsetDesc):
    left: SubsetDesc
    right: SubsetDesc


@dataclass(frozen=True)
class Union(SubsetDesc):
    items: tuple


@dataclass(frozen=True)
class PathSet(SubsetDesc):
    """Paths using only ``names`` (None: any), labels from ``labels[last sort]``."""

    labels: tuple = ()
    names: frozenset | None = None
    max_len: int | None = None

    def label_desc(self, sort: str) -> SubsetDesc:
        return dict(self.labels).get(sort, Explicit(frozenset()))


@dataclass(frozen=True)
class WitnessFamily(SubsetDesc):
    """The infinite set {gen(n) : n in N}; gen must be injective."""

    name: str
    gen: Callable[[int], Point] = field(compare=False)

    def take(self, n: int) -> list[Point]:
        return [self.gen(k) for k in range(n)]

    def check_distinct(self, n: int) -> int | None:
        """First index whose member repeats an earlier one, or None."""
        seen: set[Point] = set()
        for k in range(n):
            p = self.gen(k)
            if p in seen:
                return k
            seen.add(p)
        return None


FULL = FullWeb()
NOTHING = Explicit(frozenset())


# ---------------------------------------------------------------- verdicts

@dataclass(frozen=True)
class Finitary:
    reason: str = ""


@dataclass(frozen=True)
class NotFinitary:
    reason: str
    family: WitnessFamily | None = None


@dataclass(frozen=True)
class Unknown:
    reason: str


FinVerdict = Finitary | NotFinitary | Unknown


def meet(verdicts: Iterable[FinVerdict]) -> FinVerdict:
    """Finitary iff all are; NotFinitary as soon as one is."""
    unknown = None
    reasons = []
    for v in verdicts:
        if isinstance(v, NotFinitary):
            return v
        if isinstance(v, Unknown) and unknown is None:
            unknown = v
        if isinstance(v, Finitary) and v.reason and v.reason not in reasons:
            reasons.append(v.reason)
    if unknown is not None:
        return unknown
    return Finitary("; ".join(reasons) if reasons else "no component to check")


def verdict_name(v: FinVerdict) -> str:
    return {Finitary: "Finitary", NotFinitary: "NotFinitary", Unknown: "Unknown"}[type(v)]


# ---------------------------------------------------------------- descriptions against webs

def _components(w: WebExpr) -> dict[str, WebExpr]:
    return dict(w.family)


def _prod_webs(w: WebExpr, s: SubsetDesc) -> tuple[WebExpr, WebExpr]:
    if isinstance(w, Tensor):
        return w.left, w.right
    if isinstance(w, Arrow):
        return Bang(w.src), w.tgt
    raise FinError(f"product description on a non-product web: {s}")


def _cycle_path(sig, names) -> Callable[[int], Path] | None:
    """A generator of ever longer paths using only ``names``, if one exists."""
    allowed = set(sig.sorts) if names is None else set(names)
    sorts = [i for i in sig.sorts if i in allowed]
    edges = {
        i: [(j, k) for j in sig.arity(i) if names is None or j in allowed for k in sorts]
        for i in sorts
    }

    def search(cur, addr, on_path):
        if cur in on_path:
            return addr[: on_path[cur]], addr[on_path[cur]:]
        on_path = {**on_path, cur: len(addr)}
        for j, k in edges[cur]:
            found = search(k, addr + ((j, k),), on_path)
            if found:
                return found
        return None

    for start in sorts:
        found = search(start, (), {})
        if found:
            pre, loop = found
            return lambda n, pre=pre, loop=loop, root=start: Path(root, pre + loop * n, STAR_POINT)
    return None


def desc_contains(w: WebExpr, s: SubsetDesc, p: Point, family_scan: int = 256) -> bool:
    """Membership of ``p`` in the set described by ``s`` (within ``w``)."""
    if not web_contains(w, p):
        return False
    if isinstance(s, Explicit):
        return p in s.points
    if isinstance(s, FullWeb):
        return True
    if isinstance(s, Prom):
        if not isinstance(w, Bang):
            raise FinError(f"promotion on a non-exponential web: {s}")
        return all(desc_contains(w.inner, s.inner, q) for q in p.support)
    if isinstance(s, Inj):
        if not isinstance(w, (With, Plus, LPlus)):
            raise FinError(f"injection on a non-sum web: {s}")
        return isinstance(p, Tag) and p.index == s.index and desc_contains(_components(w)[s.index], s.inner, p.value)
    if isinstance(s, Prod):
        a, b = _prod_webs(w, s)
        return desc_contains(a, s.left, p.left) and desc_contains(b, s.right, p.right)
    if isinstance(s, Union):
        return any(desc_contains(w, d, p) for d in s.items)
    if isinstance(s, PathSet):
        if not isinstance(w, Lazy):
            raise FinError(f"path set on a non-datatype web: {s}")
        if s.max_len is not None and p.length > s.max_len:
            return False
        if s.names is not None:
            used = {p.sort} | {x for step in p.address for x in step}
            if not used <= s.names:
                return False
        if isinstance(p.value, Star):
            return True
        return desc_contains(w.sig.label(p.last_type), s.label_desc(p.last_type), p.value)
    if isinstance(s, WitnessFamily):
        return any(s.gen(k) == p for k in range(family_scan))
    raise TypeError(s)


def desc_is_empty(w: WebExpr, s: SubsetDesc) -> bool:
    if isinstance(s, Explicit):
        return not s.points
    if isinstance(s, FullWeb):
        return is_empty_web(w)
    if isinstance(s, Prom):
        return False
    if isinstance(s, Inj):
        return desc_is_empty(_components(w)[s.index], s.inner)
    if isinstance(s, Prod):
        a, b = _prod_webs(w, s)
        return desc_is_empty(a, s.left) or desc_is_empty(b, s.right)
    if isinstance(s, Union):
        return all(desc_is_empty(w, d) for d in s.items)
    if isinstance(s, PathSet):
        return s.names is not None and not (s.names & set(w.sig.sorts))
    return False


def desc_is_finite(w: WebExpr, s: SubsetDesc) -> bool:
    if isinstance(s, Explicit):
        return True
    if isinstance(s, FullWeb):
        return is_finite_web(w)
    if isinstance(s, Prom):
        return desc_is_empty(w.inner, s.inner)
    if isinstance(s, Inj):
        return desc_is_finite(_components(w)[s.index], s.inner)
    if isinstance(s, Prod):
        a, b = _prod_webs(w, s)
        if desc_is_empty(a, s.left) or desc_is_empty(b, s.right):
            return True
        return desc_is_finite(a, s.left) and desc_is_finite(b, s.right)
    if isinstance(s, Union):
        return all(desc_is_finite(w, d) for d in s.items)
    if isinstance(s, PathSet):
        if s.max_len is None and _cycle_path(w.sig, s.names) is not None:
            return False
        sorts = [i for i in w.sig.sorts if s.names is None or i in s.names]
        return all(desc_is_finite(w.sig.label(i), s.label_desc(i)) for i in sorts)
    if isinstance(s, WitnessFamily):
        return False
    raise TypeError(s)


def desc_sample(w: WebExpr, s: SubsetDesc, max_bound: int = 12) -> Point | None:
    """Some point of the described set, or None if none is found."""
    if isinstance(s, Explicit):
        return min(s.points) if s.points else None
    if isinstance(s, Prom):
        return EMPTY
    if isinstance(s, Inj):
        inner = desc_sample(_components(w)[s.index], s.inner, max_bound)
        return None if inner is None else Tag(s.index, inner)
    if isinstance(s, Prod):
        a, b = _prod_webs(w, s)
        x, y = desc_sample(a, s.left, max_bound), desc_sample(b, s.right, max_bound)
        return None if x is None or y is None else Pair(x, y)
    if isinstance(s, Union):
        for d in s.items:
            p = desc_sample(w, d, max_bound)
            if p is not None:
                return p
        return None
    if isinstance(s, WitnessFamily):
        return s.gen(0)
    for k in range(1, max_bound + 1):
        for p in enumerate_web(w, k):
            if desc_contains(w, s, p):
                return p
    return None


def desc_points(w: WebExpr, s: SubsetDesc, bound: int) -> frozenset:
    """The members of size at most ``bound``."""
    return frozenset(p for p in enumerate_web(w, bound) if desc_contains(w, s, p))


# ---------------------------------------------------------------- text form

def format_desc(s: SubsetDesc) -> str:
    if isinstance(s, Explicit):
        return "{" + " | ".join(str(p) for p in sorted(s.points)) + "}"
    if isinstance(s, FullWeb):
        return "full"
    if isinstance(s, Prom):
        return "!" + format_desc(s.inner)
    if isinstance(s, Inj):
        return f"inj {s.index} {format_desc(s.inner)}"
    if isinstance(s, Prod):
        return f"prod({format_desc(s.left)}, {format_desc(s.right)})"
    if isinstance(s, Union):
        return "union(" + ", ".join(format_desc(d) for d in s.items) + ")"
    if isinstance(s, PathSet):
        labels = ", ".join(f"{i}={format_desc(d)}" for i, d in s.labels)
        names = "*" if s.names is None else " ".join(sorted(s.names))
        ml = "*" if s.max_len is None else str(s.max_len)
        return f"paths(names {names} ; len {ml} ; labels {labels})"
    if isinstance(s, WitnessFamily):
        return f"family {s.name}"
    raise TypeError(s)


class _DescReader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def word(self) -> str:
        self.ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] in "_'"):
            self.pos += 1
        if start == self.pos:
            raise PointSyntaxError(f"expected a name at {start} in {self.text!r}")
        return self.text[start:self.pos]

    def lit(self, s: str) -> bool:
        self.ws()
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    def need(self, s: str) -> None:
        if not self.lit(s):
            raise PointSyntaxError(f"expected {s!r} at {self.pos} in {self.text!r}")

    def point(self) -> Point:
        r = _Reader(self.text)
        r.pos = self.pos
        p = _read(r)
        self.pos = r.pos
        return p

    def desc(self) -> SubsetDesc:
        if self.lit("{"):
            pts = []
            if self.lit("}"):
                return NOTHING
            while True:
                pts.append(self.point())
                if self.lit("}"):
                    return Explicit(frozenset(pts))
                self.need("|")
        if self.lit("!"):
            return Prom(self.desc())
        w = self.word()
        if w == "full":
            return FULL
        if w == "inj":
            return Inj(self.word(), self.desc())
        if w == "prod":
            self.need("(")
            a = self.desc()
            self.need(",")
            b = self.desc()
            self.need(")")
            return Prod(a, b)
        if w == "union":
            self.need("(")
            if self.lit(")"):
                return Union(())
            items = [self.desc()]
            while self.lit(","):
                items.append(self.desc())
            self.need(")")
            return Union(tuple(items))
        if w == "paths":
            return self.paths()
        raise PointSyntaxError(f"unknown description {w!r} in {self.text!r}")

    def paths(self) -> PathSet:
        self.need("(")
        self.need("names")
        names = None if self.lit("*") else set()
        if names is not None:
            while not self.lit(";"):
                names.add(self.word())
        else:
            self.need(";")
        self.need("len")
        max_len = None if self.lit("*") else int(self.word())
        labels = []
        if self.lit(")"):
            return PathSet((), None if names is None else frozenset(names), max_len)
        self.need(";")
        self.need("labels")
        while not self.lit(")"):
            if labels:
                self.need(",")
            i = self.word()
            self.need("=")
            labels.append((i, self.desc()))
        return PathSet(tuple(labels), None if names is None else frozenset(names), max_len)


def parse_desc(text: str) -> SubsetDesc:
    """Read the text form of a subset description (families excepted)."""
    r = _DescReader(text)
    d = r.desc()
    r.ws()
    if r.pos != len(text):
        raise PointSyntaxError(f"trailing input in {text!r}")
    return d


# ---------------------------------------------------------------- deciding finitarity

def _lift(v: FinVerdict, how: str, f: Callable[[Point], Point] | None) -> FinVerdict:
    if isinstance(v, NotFinitary):
        fam = v.family
        if fam is not None and f is not None:
            fam = WitnessFamily(f"{how}({fam.name})", lambda n, g=fam.gen: f(g(n)))
        else:
            fam = None
        return NotFinitary(f"{how}: {v.reason}", fam)
    return v


def _check_explicit(w: WebExpr, s: Explicit) -> None:
    for p in s.points:
        if not web_contains(w, p):
            raise FinError(f"point {p} is not in the web")


def fin_member(w: WebExpr, polarity: str, s: SubsetDesc) -> FinVerdict:
    """Whether ``s`` is finitary in ``w`` (``polarity`` straight) or in its dual."""
    if polarity not in (STRAIGHT, DUAL):
        raise ValueError(f"unknown polarity {polarity!r}")
    if isinstance(s, Explicit):
        _check_explicit(w, s)
        return Finitary("finite set")
    if isinstance(s, Union):
        return meet(fin_member(w, polarity, d) for d in s.items)
    if is_finite_web(w):
        return Finitary("finite web")
    if isinstance(w, FlatNatWeb):
        if polarity == DUAL:
            return Finitary("every subset is finitary in the dual of the flat naturals")
        if desc_is_finite(w, s):
            return Finitary("finite set")
        fam = s if isinstance(s, WitnessFamily) else WitnessFamily("nat", lambda n: _nat(n))
        return NotFinitary("infinite set of flat naturals", fam)
    if isinstance(w, Base):
        if desc_is_finite(w, s):
            return Finitary("finite set")
        return Unknown(f"no finiteness characterization for base web {w.name}")
    if isinstance(s, WitnessFamily):
        if isinstance(w, (With, Plus, LPlus)):
            # a family inside one component is decided there; the tag is checked per member
            heads = s.take(32)
            if all(isinstance(p, Tag) for p in heads) and len({p.index for p in heads}) == 1:
                i = heads[0].index

                def inner(n, g=s.gen, i=i):
                    p = g(n)
                    if not (isinstance(p, Tag) and p.index == i):
                        raise FinError(f"family {s.name} leaves component {i} at {n}")
                    return p.value

                v = fin_member(_components(w)[i], polarity, WitnessFamily(f"{s.name}/{i}", inner))
                return _lift(v, f"component {i}", lambda p, i=i: Tag(i, p))
        return Unknown("finitarity of an arbitrary infinite family is not decided here")
    if isinstance(w, (With, Plus, LPlus)):
        return _fin_sum(w, polarity, s)
    if isinstance(w, Tensor):
        return _fin_tensor(w, polarity, s)
    if isinstance(w, Bang):
        return _fin_bang(w, polarity, s)
    if isinstance(w, Arrow):
        return _fin_arrow(w, polarity, s)
    if isinstance(w, Lazy):
        return _fin_lazy(w, polarity, s)
    raise FinError(f"description {s} does not fit web {w}")


def _nat(n: int) -> Point:
    from .points import Nat

    return Nat(n)


def _fin_sum(w, polarity, s) -> FinVerdict:
    comps = _components(w)
    if isinstance(s, FullWeb):
        s = Union(tuple(Inj(i, FULL) for i in comps))
        return fin_member(w, polarity, s)
    if not isinstance(s, Inj):
        raise FinError(f"description {s} does not fit a sum web")
    if s.index not in comps:
        raise FinError(f"no component {s.index}")
    # the family is finite, so & and (+) share one rule, dually componentwise
    v = fin_member(comps[s.index], polarity, s.inner)
    return _lift(v, f"component {s.index}", lambda p, i=s.index: Tag(i, p))


def _fin_tensor(w, polarity, s) -> FinVerdict:
    if isinstance(s, FullWeb):
        s = Prod(FULL, FULL)
    if not isinstance(s, Prod):
        raise FinError(f"description {s} does not fit a tensor web")
    if desc_is_empty(w.left, s.left) or desc_is_empty(w.right, s.right):
        return Finitary("empty product")
    if polarity == DUAL:
        if desc_is_finite(w, s):
            return Finitary("finite set")
        return Unknown("the dual of a tensor is only decided on finite sets")
    lp, rp = desc_sample(w.left, s.left), desc_sample(w.right, s.right)
    return meet(
        [
            _lift(fin_member(w.left, STRAIGHT, s.left), "left projection", None if rp is None else lambda p: Pair(p, rp)),
            _lift(fin_member(w.right, STRAIGHT, s.right), "right projection", None if lp is None else lambda p: Pair(lp, p)),
        ]
    )


def _fin_bang(w, polarity, s) -> FinVerdict:
    if isinstance(s, FullWeb):
        s = Prom(FULL)
    if not isinstance(s, Prom):
        raise FinError(f"description {s} does not fit an exponential web")
    if polarity == DUAL:
        if desc_is_finite(w, s):
            return Finitary("finite set")
        return Unknown("the dual exponential has no explicit characterization")
    if desc_is_empty(w.inner, s.inner):
        return Finitary("only the empty multiset")
    v = fin_member(w.inner, STRAIGHT, s.inner)
    return _lift(v, "union of supports", lambda p: mset(p))


def _fin_arrow(w, polarity, s) -> FinVerdict:
    if isinstance(s, FullWeb):
        s = Prod(Prom(FULL) if not is_empty_web(w.src) else FULL, FULL)
    if not isinstance(s, Prod):
        raise FinError(f"description {s} does not fit an arrow web")
    src, tgt = Bang(w.src), w.tgt
    if desc_is_empty(src, s.left) or desc_is_empty(tgt, s.right):
        return Finitary("empty relation")
    if polarity == DUAL:
        if desc_is_finite(w, s):
            return Finitary("finite set")
        return Unknown("the dual of an arrow space is only decided on finite sets")
    # u x v maps any finitary set meeting u onto v
    m0 = desc_sample(src, s.left)
    v = _lift(fin_member(tgt, STRAIGHT, s.right), "image", lambda p: Pair(m0, p))
    if not isinstance(v, Finitary):
        return v
    if desc_is_finite(src, s.left):
        return Finitary("finite sources and finitary image")
    return Unknown("the reverse images would have to be antifinitary in the dual exponential")


def _fin_lazy(w, polarity, s) -> FinVerdict:
    if isinstance(s, FullWeb):
        s = PathSet(tuple((i, FULL) for i in w.sig.sorts), None, None)
    if not isinstance(s, PathSet):
        raise FinError(f"description {s} does not fit a datatype web")
    for i, _ in s.labels:
        if i not in w.sig.sorts:
            raise FinError(f"label description for unknown sort {i}")
    if polarity == DUAL:
        if desc_is_finite(w, s):
            return Finitary("finite set")
        return Unknown("the dual of a datatype space is only decided on finite sets")
    if s.max_len is None:
        gen = _cycle_path(w.sig, s.names)
        if gen is not None:
            fam = WitnessFamily("longer-paths", gen)
            return NotFinitary("the length image is infinite", fam)
    sorts = [i for i in w.sig.sorts if s.names is None or i in s.names]
    out = []
    for i in sorts:
        v = fin_member(w.sig.label(i), STRAIGHT, s.label_desc(i))
        out.append(_lift(v, f"values of sort {i}", lambda p, i=i: Path(i, (), p)))
    return meet(out)


# ---------------------------------------------------------------- transport

@dataclass(frozen=True)
class Ownership:
    """One ownership relation: a quasi-functional fiber plus its symbolic image."""

    name: str
    fiber: Callable[[Point], Iterable[Point]]
    image: Callable[[SubsetDesc], SubsetDesc | None]
    web: WebExpr
    polarity: str = STRAIGHT


@dataclass(frozen=True)
class OwnershipSpec:
    owns: tuple
    shape: Callable[[Point], Iterable[Point]] | None = None


def _fiber_list(own: Ownership, p: Point, limit: int) -> list[Point]:
    out = list(itertools.islice(iter(own.fiber(p)), limit + 1))
    if len(out) > limit:
        raise FinError(f"ownership {own.name} is not quasi-functional at {p}")
    return out


def transport_build(spec: OwnershipSpec, web: WebExpr | None = None, sample_bound: int = 4, limit: int = 1000):
    """The finiteness test obtained by pulling the components back along the owns."""
    if web is not None:
        for p in enumerate_web(web, sample_bound):
            for own in spec.owns:
                _fiber_list(own, p, limit)

    def decide(s: SubsetDesc) -> FinVerdict:
        out = []
        for own in spec.owns:
            img = own.image(s)
            if img is None:
                out.append(Unknown(f"image along {own.name} is not symbolically computable"))
            else:
                out.append(fin_member(own.web, own.polarity, img))
        return meet(out)

    return decide


def _union_of(items: list[SubsetDesc]) -> SubsetDesc:
    return items[0] if len(items) == 1 else Union(tuple(items))


def bang_ownership(a: WebExpr) -> OwnershipSpec:
    """(!, supp) with shape card."""

    def image(s):
        if isinstance(s, Explicit):
            return Explicit(frozenset(q for m in s.points for q in m.support))
        if isinstance(s, Prom):
            return s.inner
        if isinstance(s, FullWeb):
            return FULL
        if isinstance(s, Union):
            parts = [image(d) for d in s.items]
            return None if any(p is None for p in parts) else _union_of(parts)
        return None

    own = Ownership("supp", lambda m: m.support, image, a)
    return OwnershipSpec((own,), shape=lambda m: (_nat(m.card),))


def plus_ownership(fam) -> OwnershipSpec:
    """(+, rest_i) with shape indx."""
    comps = dict(fam)

    def image_for(i):
        def image(s):
            if isinstance(s, Explicit):
                return Explicit(frozenset(p.value for p in s.points if p.index == i))
            if isinstance(s, Inj):
                return s.inner if s.index == i else NOTHING
            if isinstance(s, FullWeb):
                return FULL
            if isinstance(s, Union):
                parts = [image(d) for d in s.items]
                return None if any(p is None for p in parts) else _union_of(parts)
            return None

        return image

    owns = tuple(
        Ownership(f"rest_{i}", lambda p, i=i: (p.value,) if p.index == i else (), image_for(i), comps[i])
        for i in comps
    )
    from .points import Idx

    return OwnershipSpec(owns, shape=lambda p: (Idx(p.index),))


def sequence_web(a: WebExpr) -> Base:
    """Finite sequences over ``a``, as right-nested pairs ending in ``*``."""

    def member(p):
        while isinstance(p, Pair):
            if not web_contains(a, p.left):
                return False
            p = p.right
        return isinstance(p, Star)

    def enum(k):
        out = [STAR_POINT]
        frontier = [STAR_POINT]
        while frontier:
            nxt = []
            for s in frontier:
                for x in enumerate_web(a, k - 1 - s.size):
                    q = Pair(x, s)
                    if q.size <= k:
                        nxt.append(q)
            out += nxt
            frontier = nxt
        return out

    return Base("Seq", enum, member)


def sequence_ownership(a: WebExpr) -> OwnershipSpec:
    """Sequences with the element relation and no shape (the failing functor)."""

    def elems(p):
        out = []
        while isinstance(p, Pair):
            out.append(p.left)
            p = p.right
        return out

    return OwnershipSpec((Ownership("elem", elems, lambda s: None, a),), shape=None)


@dataclass
class ShapeReport:
    passed: bool
    checked: int
    message: str
    counterexample: Point | None = None


def shape_check(web: WebExpr, spec: OwnershipSpec, sample_bound: int, growth: int = 4) -> ShapeReport:
    """Check on samples that shapes are finite and nonempty and fibers stay finite.

    For each sampled point we fix its shape image and own images, and count
    the sampled points falling within them at ``sample_bound`` and at
    ``sample_bound + growth``; a count that keeps growing signals an infinite
    fiber, i.e. no shape relation can make the owns a transport situation.
    """
    shape = spec.shape or (lambda p: (STAR_POINT,))
    small = enumerate_web(web, sample_bound)
    large = enumerate_web(web, sample_bound + growth)

    def profile(p):
        sh = frozenset(shape(p))
        return sh, tuple(frozenset(_fiber_list(o, p, 1000)) for o in spec.owns)

    large_profiles = [(q, profile(q)) for q in large]
    for p in small:
        sh, owns = profile(p)
        if not sh:
            return ShapeReport(False, len(small), f"empty shape image at {p}", p)

        def within(prof):
            qsh, qowns = prof
            return qsh <= sh and all(x <= y for x, y in zip(qowns, owns))

        n_small = sum(1 for q, prof in large_profiles if q.size <= sample_bound and within(prof))
        n_large = sum(1 for q, prof in large_profiles if within(prof))
        if n_large > n_small:
            return ShapeReport(
                False,
                len(small),
                f"points sharing the shape and owns of {p} keep appearing ({n_small} -> {n_large})",
                p,
            )
    return ShapeReport(True, len(small), "no growth on samples")


# ---------------------------------------------------------------- witnesses and certificates

class RefutationInvalid(ValueError):
    def __init__(self, index: int, why: str):
        super().__init__(f"member {index}: {why}")
        self.index = index


def fix_witness(alpha: Point) -> WitnessFamily:
    """n -> ([([],a)] + n[([a],a)], a), all in fix."""
    const = Pair(EMPTY, alpha)
    step = Pair(mset(alpha), alpha)
    return WitnessFamily("fix", lambda n: Pair(MSet([(const, 1), (step, n)]), alpha))


def fix_clash(alpha: Point) -> SubsetDesc:
    f = Explicit.of(Pair(EMPTY, alpha), Pair(mset(alpha), alpha))
    return Prod(Prom(f), Explicit.of(alpha))


def supp_witness(alpha: Point) -> WitnessFamily:
    """n -> ((n+1)[a], a), all in supp."""
    return WitnessFamily("supp", lambda n: Pair(MSet([(alpha, n + 1)]), alpha))


def supp_clash(alpha: Point) -> SubsetDesc:
    return Prod(Prom(Explicit.of(alpha)), Explicit.of(alpha))


def refutation_kit(name: str, base: WebExpr):
    """(relation web, generator, family, clash) for a named relation over ``base``."""
    from .rel import fix_gen, supp_gen

    pts = enumerate_web(base, 1)
    if not pts:
        raise FinError("witness families need a nonempty web")
    alpha = pts[0]
    if name == "fix":
        return Arrow(Arrow(base, base), base), fix_gen(base), fix_witness(alpha), fix_clash(alpha)
    if name == "supp":
        return Arrow(base, base), supp_gen(base), supp_witness(alpha), supp_clash(alpha)
    raise FinError(f"no witness family known for {name}")


@dataclass
class Certificate:
    relation: str
    base: FinEnum
    clash: SubsetDesc
    members: list

    def to_text(self) -> str:
        lines = [
            "finrel-refutation 1",
            f"relation {self.relation}",
            "base " + " ".join(str(p) for p in sorted(self.base.points)),
            f"clash {format_desc(self.clash)}",
            f"count {len(self.members)}",
        ]
        lines += [f"member {k} {p}" for k, p in enumerate(self.members)]
        return "\n".join(lines) + "\n"


def refute_finitary(
    family: WitnessFamily,
    clash: SubsetDesc,
    web: WebExpr,
    n_checks: int,
    relation=None,
) -> list[Point]:
    """Check the first members: distinct, in the web, in the clash set (and the relation)."""
    seen: set[Point] = set()
    out = []
    for k in range(n_checks):
        p = family.gen(k)
        if p in seen:
            raise RefutationInvalid(k, "repeats an earlier member")
        if not web_contains(web, p):
            raise RefutationInvalid(k, "not in the web")
        if not desc_contains(web, clash, p):
            raise RefutationInvalid(k, "not in the clash set")
        if relation is not None and not relation.member(p):
            raise RefutationInvalid(k, f"not in {relation.name}")
        seen.add(p)
        out.append(p)
    return out


def make_certificate(name: str, base: FinEnum, n: int) -> Certificate:
    web, gen, fam, clash = refutation_kit(name, base)
    return Certificate(name, base, clash, refute_finitary(fam, clash, web, n, gen))


def parse_certificate(text: str) -> Certificate:
    from .points import parse_point

    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].strip() != "finrel-refutation 1":
        raise PointSyntaxError("not a refutation certificate")
    head: dict[str, str] = {}
    members = []
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        if key == "member":
            idx, _, pt = rest.partition(" ")
            if int(idx) != len(members):
                raise PointSyntaxError(f"member index {idx} out of order")
            members.append(parse_point(pt))
        else:
            head[key] = rest.strip()
    for key in ("relation", "base", "clash", "count"):
        if key not in head:
            raise PointSyntaxError(f"missing header {key}")
    if int(head["count"]) != len(members):
        raise PointSyntaxError("member count does not match header")
    base = FinEnum(frozenset(parse_point(t) for t in head["base"].split()), "base")
    return Certificate(head["relation"], base, parse_desc(head["clash"]), members)


def verify_certificate(cert: Certificate) -> list[str]:
    """Problems found when re-checking every member; empty means valid."""
    web, gen, _, _ = refutation_kit(cert.relation, cert.base)
    problems = []
    seen: set[Point] = set()
    if not desc_contains_finitary_clash(web, cert.clash):
        problems.append("clash set is not finitary")
    for k, p in enumerate(cert.members):
        if p in seen:
            problems.append(f"member {k}: repeats an earlier member")
        seen.add(p)
        if not web_contains(web, p):
            problems.append(f"member {k}: not in the web")
        elif not desc_contains(web, cert.clash, p):
            problems.append(f"member {k}: not in the clash set")
        elif not gen.member(p):
            problems.append(f"member {k}: not in {cert.relation}")
    return problems


def desc_contains_finitary_clash(web: Arrow, clash: SubsetDesc) -> bool:
    """The clash u x {b} must have u finitary in !A (so the relation meets it finitely)."""
    if not isinstance(clash, Prod):
        return False
    return isinstance(fin_member(Bang(web.src), STRAIGHT, clash.left), Finitary) and desc_is_finite(
        web.tgt, clash.right
    )


# ---------------------------------------------------------------- finitary relations

PROVEN_FINITARY = frozenset(["dere", "case", "match", "succ", "if", "len", "iter", "rec", "natiter"])


def finitary_rel_check(f, src: tuple, tgt: tuple, bound: int, n_checks: int = 20) -> FinVerdict:
    """Finitarity of a relation given explicitly or as a generator."""
    if isinstance(f, (set, frozenset, list, tuple)):
        return Finitary("finite relation")
    src_web = src[0]
    base = src_web.inner if isinstance(src_web, Bang) else src_web
    if f.name == "fix" and isinstance(base, Arrow):
        base = base.tgt
    if f.name in ("fix", "supp") and not is_empty_web(base):
        web, gen, fam, clash = refutation_kit(f.name, base)
        refute_finitary(fam, clash, web, n_checks, f)
        return NotFinitary(f"{f.name} meets the finitary set {format_desc(clash)} infinitely", fam)
    grows = _probe_growth(f, src_web, bound)
    if grows is not None:
        return Unknown(f"intersection with {grows} grows with the bound and no witness family is known")
    if f.name in PROVEN_FINITARY or f.name.startswith(("inj_", "proj_", "node_")):
        return Finitary(f"{f.name} is finitary")
    return Unknown("no growth on probes, but finitarity is not established")


def _probe_growth(f, src_web: WebExpr, bound: int) -> str | None:
    small = f.enumerate(bound)
    large = f.enumerate(bound + 4)
    for p in sorted(small)[:8]:
        if not isinstance(p, Pair):
            continue
        src_pts = p.left.support if isinstance(p.left, MSet) else frozenset([p.left])

        def inside(q):
            qs = q.left.support if isinstance(q.left, MSet) else frozenset([q.left])
            return q.right == p.right and qs <= src_pts

        if sum(1 for q in large if inside(q)) > sum(1 for q in small if inside(q)):
            return f"supports within {{{', '.join(map(str, sorted(src_pts)))}}} and target {p.right}"
    return None
