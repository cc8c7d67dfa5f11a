"""Lazy recursive datatypes: path webs and the node/match/iter/rec generators.

Point shapes (``[..]`` are multisets, ``i:x`` tags):

* ``node_i  : A_i => &_{J_i} L => L``          entries ``(as, (ts, path))``
* ``match   : L => &_i (A_i => &_{J_i} L => B) => B``
* ``iter    : L => &_i (A_i => &_{J_i} B => B) => B``
* ``rec     : L => &_i (A_i => &_{J_i} L => &_{J_i} B => B) => B``

An entry of ``match``/``iter``/``rec`` is ``(paths, (phis, beta))``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator

from .points import (
    EMPTY,
    STAR_POINT,
    Idx,
    MSet,
    Nat,
    Pair,
    Path,
    Point,
    Star,
    Tag,
    mset,
)
from .rel import Generator, submultisets
from .webs import (
    Arrow,
    Bang,
    EmptyWeb,
    FinEnum,
    LPlus,
    Lazy,
    Signature,
    WebExpr,
    With,
    enumerate_web,
    family,
    is_empty_web,
    web_contains,
)

# ---------------------------------------------------------------- standard signatures

def lazy_nat_signature() -> Signature:
    return Signature.make("LNat", {"z": (EmptyWeb, []), "s": (EmptyWeb, ["p"])})


def binary_tree_signature(leaf: WebExpr, node: WebExpr) -> Signature:
    return Signature.make("Tree", {"lf": (leaf, []), "nd": (node, ["G", "D"])})


def lazy_nat(n: int, more: bool = False) -> Path:
    """The lazy natural ``n`` (exactly n) or, with ``more``, n~ (more than n)."""
    addr = [("p", "s")] * n
    if n == 0:
        return Path("s" if more else "z", (), STAR_POINT)
    addr[-1] = ("p", "s" if more else "z")
    return Path("s", addr, STAR_POINT)


def read_lazy_nat(p: Path) -> str:
    """``n`` or ``n~`` for a lazy natural path."""
    return f"{len(p.address)}{'~' if p.last_type == 's' else ''}"


def is_lazy_nat_shaped(sig: Signature) -> bool:
    return sig.sorts == ("z", "s") and sig.arities == ((), ("p",)) and all(
        is_empty_web(a) for a in sig.labels
    )


# ---------------------------------------------------------------- webs of the functor

def functor_web(sig: Signature, x: WebExpr) -> WebExpr:
    """T(X) = lifted sum over sorts i of A_i & X^{&J_i}, in the nested encoding."""
    members = []
    for i in sig.sorts:
        children = With(tuple((j, x) for j in sig.arity(i)))
        members.append((i, With((("1", sig.label(i)), ("2", children)))))
    return LPlus(tuple(members))


def nested_to_path(p: Point) -> Path:
    """The bijection from nested lifted-sum points to paths."""
    if isinstance(p, Idx):
        return Path(p.name, (), STAR_POINT)
    if isinstance(p, Tag) and isinstance(p.value, Tag):
        i, inner = p.index, p.value
        if inner.index == "1":
            return Path(i, (), inner.value)
        if inner.index == "2" and isinstance(inner.value, Tag):
            j, rest = inner.value.index, inner.value.value
            return nested_to_path(rest).prefix(i, j)
    raise ValueError(f"not a nested datatype point: {p}")


def path_to_nested(p: Path) -> Point:
    if not p.address:
        if isinstance(p.value, Star):
            return Idx(p.sort)
        return Tag(p.sort, Tag("1", p.value))
    return Tag(p.sort, Tag("2", Tag(p.address[0][0], path_to_nested(p.tail()))))


def lazy_web(sig: Signature, depth: int, label_bound: int = 3) -> list[Path]:
    """Paths in T^depth(empty), by literal unfolding of the nested encoding."""
    layer: set[Point] = set()
    labels = {i: enumerate_web(sig.label(i), label_bound) for i in sig.sorts}
    for _ in range(depth):
        nxt: set[Point] = set()
        for i in sig.sorts:
            nxt.add(Idx(i))
            nxt.update(Tag(i, Tag("1", a)) for a in labels[i])
            nxt.update(Tag(i, Tag("2", Tag(j, t))) for j in sig.arity(i) for t in layer)
        layer = nxt
    return sorted(nested_to_path(p) for p in layer)


# ---------------------------------------------------------------- val / len

def val_rel(sig: Signature, i: str) -> Generator:
    lazy = Lazy(sig)

    def fiber(p):
        if isinstance(p, Path) and p.last_type == i and not isinstance(p.value, Star):
            return (p.value,)
        return ()

    def member(e):
        return isinstance(e, Pair) and web_contains(lazy, e.left) and e.right in fiber(e.left)

    def enum(k):
        return [Pair(p, v) for p in enumerate_web(lazy, k - 2) for v in fiber(p)]

    return Generator(f"val_{i}", member, enum, fiber=fiber)


def len_rel(sig: Signature) -> Generator:
    lazy = Lazy(sig)

    def fiber(p):
        return (Nat(p.length),) if isinstance(p, Path) else ()

    def member(e):
        return isinstance(e, Pair) and web_contains(lazy, e.left) and e.right in fiber(e.left)

    def enum(k):
        return [Pair(p, Nat(p.length)) for p in enumerate_web(lazy, k - 2)]

    return Generator("len", member, enum, fiber=fiber)


# ---------------------------------------------------------------- types of the generators

def record(members: Iterable[tuple[str, WebExpr]]) -> With:
    return With(tuple(members))


def node_web(sig: Signature, i: str) -> WebExpr:
    lazy = Lazy(sig)
    return Arrow(sig.label(i), Arrow(record((j, lazy) for j in sig.arity(i)), lazy))


def match_cases_web(sig: Signature, target: WebExpr) -> With:
    lazy = Lazy(sig)
    return record(
        (i, Arrow(sig.label(i), Arrow(record((j, lazy) for j in sig.arity(i)), target))) for i in sig.sorts
    )


def iter_cases_web(sig: Signature, target: WebExpr) -> With:
    return record(
        (i, Arrow(sig.label(i), Arrow(record((j, target) for j in sig.arity(i)), target))) for i in sig.sorts
    )


def rec_cases_web(sig: Signature, target: WebExpr) -> With:
    lazy = Lazy(sig)
    return record(
        (
            i,
            Arrow(
                sig.label(i),
                Arrow(
                    record((j, lazy) for j in sig.arity(i)),
                    Arrow(record((j, target) for j in sig.arity(i)), target),
                ),
            ),
        )
        for i in sig.sorts
    )


def filtered_enum(web: WebExpr, member):
    def enum(k):
        return [p for p in enumerate_web(web, k) if member(p)]

    return enum


# ---------------------------------------------------------------- node

def node_gen(sig: Signature, i: str) -> Generator:
    lazy = Lazy(sig)
    label = sig.label(i)
    arity = sig.arity(i)
    web = node_web(sig, i)

    def member(e):
        if not (isinstance(e, Pair) and isinstance(e.left, MSet) and isinstance(e.right, Pair)):
            return False
        alphas, ts, path = e.left, e.right.left, e.right.right
        if not (isinstance(ts, MSet) and isinstance(path, Path) and path.sort == i):
            return False
        if alphas.card == 0 and ts.card == 0:
            return not path.address and isinstance(path.value, Star)
        if alphas.card == 1 and ts.card == 0:
            a = alphas.items[0][0]
            return not path.address and path.value == a and web_contains(label, a)
        if alphas.card == 0 and ts.card == 1:
            t = ts.items[0][0]
            return (
                isinstance(t, Tag)
                and t.index in arity
                and isinstance(t.value, Path)
                and web_contains(lazy, t.value)
                and path == t.value.prefix(i, t.index)
            )
        return False

    def enum(k):
        out = [Pair(EMPTY, Pair(EMPTY, Path(i, (), STAR_POINT)))]
        for a in enumerate_web(label, (k - 6) // 2):
            out.append(Pair(mset(a), Pair(EMPTY, Path(i, (), a))))
        for t in enumerate_web(lazy, (k - 6) // 2):
            for j in arity:
                out.append(Pair(EMPTY, Pair(mset(Tag(j, t)), t.prefix(i, j))))
        return out

    def apply(alphas, ts):
        out = {Path(i, (), STAR_POINT)}
        out.update(Path(i, (), a) for a in alphas if web_contains(label, a))
        for t in ts:
            if isinstance(t, Tag) and t.index in arity and web_contains(lazy, t.value):
                out.add(t.value.prefix(i, t.index))
        return frozenset(out)

    return Generator(f"node_{i}", member, enum, apply=apply, arity=2)


# ---------------------------------------------------------------- match

def _root_multiset(i: str, alphas: MSet) -> MSet:
    return mset(Path(i, (), STAR_POINT)) + MSet((Path(i, (), a), m) for a, m in alphas.items)


def match_gen(sig: Signature, target: WebExpr) -> Generator:
    lazy = Lazy(sig)
    cases = match_cases_web(sig, target)

    def member(e):
        if not (isinstance(e, Pair) and isinstance(e.left, MSet) and isinstance(e.right, Pair)):
            return False
        paths, phis, beta = e.left, e.right.left, e.right.right
        if not (isinstance(phis, MSet) and phis.card == 1):
            return False
        phi = phis.items[0][0]
        if not web_contains(cases, phi) or not web_contains(target, beta):
            return False
        i, alphas, ts, b = phi.index, phi.value.left, phi.value.right.left, phi.value.right.right
        if b != beta:
            return False
        expected = _root_multiset(i, alphas) + MSet((t.value.prefix(i, t.index), m) for t, m in ts.items)
        return paths == expected

    def apply(paths, phis):
        out = set()
        for phi in phis:
            if not web_contains(cases, phi):
                continue
            i, alphas, ts, b = phi.index, phi.value.left, phi.value.right.left, phi.value.right.right
            need = [Path(i, (), STAR_POINT)] + [Path(i, (), a) for a in alphas.support]
            need += [t.value.prefix(i, t.index) for t in ts.support]
            if all(q in paths for q in need):
                out.add(b)
        return frozenset(out)

    web = Arrow(lazy, Arrow(cases, target))
    return Generator("match", member, filtered_enum(web, member), apply=apply, arity=2)


# ---------------------------------------------------------------- iter / rec

@dataclass(frozen=True)
class _Recursor:
    """Shared machinery of iter (subtrees=False) and rec (subtrees=True)."""

    sig: Signature
    target: WebExpr
    subtrees: bool

    @property
    def lazy(self) -> Lazy:
        return Lazy(self.sig)

    @property
    def cases(self) -> With:
        return (rec_cases_web if self.subtrees else iter_cases_web)(self.sig, self.target)

    # -- decomposing a case point phi
    def parts(self, phi: Tag) -> tuple[str, MSet, MSet, MSet, Point]:
        """(sort, labels, subtree tags, result tags, beta) of a case point."""
        i = phi.index
        alphas = phi.value.left
        rest = phi.value.right
        if self.subtrees:
            ts, results, beta = rest.left, rest.right.left, rest.right.right
        else:
            ts, results, beta = EMPTY, rest.left, rest.right
        return i, alphas, ts, results, beta

    def make_phi(self, i, alphas, ts, results, beta) -> Tag:
        if self.subtrees:
            return Tag(i, Pair(alphas, Pair(ts, Pair(results, beta))))
        return Tag(i, Pair(alphas, Pair(results, beta)))

    # -- membership
    def member(self, e: Point) -> bool:
        if not (isinstance(e, Pair) and isinstance(e.left, MSet) and isinstance(e.right, Pair)):
            return False
        paths, phis, beta = e.left, e.right.left, e.right.right
        if not isinstance(phis, MSet):
            return False
        if not all(web_contains(self.lazy, p) for p in paths.support):
            return False
        if not all(web_contains(self.cases, p) for p in phis.support):
            return False
        if not web_contains(self.target, beta):
            return False
        return self._mem(paths, phis, beta)

    @functools.lru_cache(maxsize=200_000)
    def _mem(self, paths: MSet, phis: MSet, beta: Point) -> bool:
        for phi in phis.support:
            i, alphas, ts, results, b = self.parts(phi)
            if b != beta:
                continue
            fixed = _root_multiset(i, alphas) + MSet((t.value.prefix(i, t.index), m) for t, m in ts.items)
            if not paths.contains_msub(fixed):
                continue
            rest = paths - fixed
            if any(p.sort != i or not p.address for p in rest.support):
                continue
            tails = MSet((Tag(p.address[0][0], p.tail()), m) for p, m in rest.items)
            if self._children(tails, phis - mset(phi), tuple(results.elements())):
                return True
        return False

    @functools.lru_cache(maxsize=200_000)
    def _children(self, tails: MSet, phis: MSet, results: tuple[Point, ...]) -> bool:
        if not results:
            return tails.card == 0 and phis.card == 0
        head, more = results[0], results[1:]
        j, beta_k = head.index, head.value
        mine = MSet((t, m) for t, m in tails.items if t.index == j)
        others = tails - mine
        for sub_t in submultisets(mine):
            if not sub_t:
                continue
            sub_paths = MSet((t.value, m) for t, m in sub_t.items)
            for sub_phi in submultisets(phis):
                if not sub_phi:
                    continue
                if self._mem(sub_paths, sub_phi, beta_k) and self._children(
                    others + (mine - sub_t), phis - sub_phi, more
                ):
                    return True
        return False

    # -- bounded approximants
    def approx(self, n: int, bound: int) -> frozenset:
        level: frozenset = frozenset()
        for _ in range(n):
            nxt = self._step(level, bound)
            if nxt == level:
                break
            level = nxt
        return level

    def _step(self, prev: frozenset, bound: int) -> frozenset:
        out = set()
        betas = enumerate_web(self.target, bound)
        children_by_sort = sorted(prev)
        for i in self.sig.sorts:
            arity = self.sig.arity(i)
            child_opts = [
                (j, c, c.size - 4 + c.left.card + 1)
                for j in arity
                for c in children_by_sort
            ]
            sub_opts = [EMPTY]
            if self.subtrees:
                sub_web = Bang(record((j, self.lazy) for j in arity))
                sub_opts = enumerate_web(sub_web, bound)
            for alphas in enumerate_web(Bang(self.sig.label(i)), bound):
                for ts in sub_opts:
                    for beta in betas:
                        base = self._make(i, alphas, ts, beta, [])
                        if base.size > bound:
                            continue
                        self._grow(i, alphas, ts, beta, child_opts, 0, base.size, [], bound, out)
        return frozenset(out)

    def _grow(self, i, alphas, ts, beta, opts, start, used, acc, bound, out):
        out.add(self._make(i, alphas, ts, beta, acc))
        for idx in range(start, len(opts)):
            j, c, cost = opts[idx]
            if used + cost <= bound:
                self._grow(i, alphas, ts, beta, opts, idx, used + cost, acc + [(j, c)], bound, out)

    def _make(self, i, alphas, ts, beta, children) -> Pair:
        paths = _root_multiset(i, alphas) + MSet((t.value.prefix(i, t.index), m) for t, m in ts.items)
        phis = EMPTY
        results = []
        for j, c in children:
            paths = paths + MSet((p.prefix(i, j), m) for p, m in c.left.items)
            phis = phis + c.right.left
            results.append(Tag(j, c.right.right))
        phi = self.make_phi(i, alphas, ts, mset(*results), beta)
        return Pair(paths, Pair(phis + mset(phi), beta))

    # -- closed application to finite argument sets
    def apply(self, paths: frozenset, phis: frozenset) -> frozenset:
        phis = [p for p in phis if web_contains(self.cases, p)]
        return self._results(frozenset(p for p in paths if isinstance(p, Path)), tuple(sorted(phis)))

    @functools.lru_cache(maxsize=100_000)
    def _results(self, paths: frozenset, phis: tuple) -> frozenset:
        out = set()
        for phi in phis:
            i, alphas, ts, results, beta = self.parts(phi)
            need = [Path(i, (), STAR_POINT)] + [Path(i, (), a) for a in alphas.support]
            need += [t.value.prefix(i, t.index) for t in ts.support]
            if not all(q in paths for q in need):
                continue
            ok = True
            for r in results.support:
                sub = frozenset(p.tail() for p in paths if p.address and p.sort == i and p.address[0][0] == r.index)
                if r.value not in self._results(sub, phis):
                    ok = False
                    break
            if ok:
                out.add(beta)
        return frozenset(out)

    def generator(self, name: str) -> Generator:
        return Generator(
            name,
            self.member,
            lambda k: self.approx(k, k),
            apply=self.apply,
            arity=2,
        )


def iter_gen(sig: Signature, target: WebExpr) -> Generator:
    return _Recursor(sig, target, False).generator("iter")


def iter_n(sig: Signature, target: WebExpr, n: int, bound: int) -> frozenset:
    """The size <= bound slice of the n-th approximant iter_n."""
    r = _Recursor(sig, target, False)
    level: frozenset = frozenset()
    for _ in range(n):
        level = r._step(level, bound)
    return level


def rec_gen(sig: Signature, target: WebExpr) -> Generator:
    return _Recursor(sig, target, True).generator("rec")


def rec_n(sig: Signature, target: WebExpr, n: int, bound: int) -> frozenset:
    r = _Recursor(sig, target, True)
    level: frozenset = frozenset()
    for _ in range(n):
        level = r._step(level, bound)
    return level


# ---------------------------------------------------------------- ind / val / subsize

@dataclass(frozen=True)
class PathStats:
    ind: frozenset[str]
    val: frozenset[Point]
    card: int
    subsize: int


def path_stats(x: Point) -> PathStats:
    """ind/val/card/subsize of a path, a case point, or a multiset of either."""
    if isinstance(x, Path):
        names = {x.sort}
        for j, i in x.address:
            names |= {j, i}
        val = frozenset() if isinstance(x.value, Star) else frozenset([x.value])
        return PathStats(frozenset(names), val, 1, 0)
    if isinstance(x, Tag) and isinstance(x.value, Pair) and isinstance(x.value.left, MSet):
        alphas = x.value.left
        rest = x.value.right
        # the last multiset before beta holds the (j, beta_j) results
        while isinstance(rest, Pair) and isinstance(rest.right, Pair) and isinstance(rest.right.left, MSet):
            rest = rest.right
        results = rest.left if isinstance(rest, Pair) and isinstance(rest.left, MSet) else EMPTY
        names = {x.index} | {t.index for t in results.support if isinstance(t, Tag)}
        return PathStats(frozenset(names), alphas.support, 1, alphas.card)
    if isinstance(x, MSet):
        ind: set[str] = set()
        val: set[Point] = set()
        sub = 0
        for p, m in x.items:
            s = path_stats(p)
            ind |= s.ind
            val |= s.val
            sub += m * s.subsize
        return PathStats(frozenset(ind), frozenset(val), x.card, sub)
    raise TypeError(f"no path statistics for {x}")


def depth_bound(paths: MSet) -> int:
    """max(len[supp paths]) + 1."""
    return max((p.length for p in paths.support), default=-1) + 1


# ---------------------------------------------------------------- booleans and lazy naturals

BOOL = LPlus(family(t=EmptyWeb, f=EmptyWeb))
TRUE = frozenset([Idx("t")])
FALSE = frozenset([Idx("f")])


def if_gen(a: WebExpr) -> Generator:
    """if : Bool => A => A => A."""
    web = Arrow(BOOL, Arrow(a, Arrow(a, a)))

    def member(e):
        if not web_contains(web, e):
            return False
        b, x, y, alpha = e.left, e.right.left, e.right.right.left, e.right.right.right
        if b == mset(Idx("t")):
            return x == mset(alpha) and y.card == 0
        if b == mset(Idx("f")):
            return y == mset(alpha) and x.card == 0
        return False

    def apply(bs, xs, ys):
        out = set()
        if Idx("t") in bs:
            out |= set(xs)
        if Idx("f") in bs:
            out |= set(ys)
        return frozenset(p for p in out if web_contains(a, p))

    return Generator("if", member, filtered_enum(web, member), apply=apply, arity=3)


def bool_kit(a: WebExpr) -> dict:
    from .rel import case_gen

    return {"true": TRUE, "false": FALSE, "if": if_gen(a), "case": case_gen(BOOL.family, a)}


def succ_gen() -> Generator:
    sig = lazy_nat_signature()
    lazy = Lazy(sig)

    def member(e):
        if not (isinstance(e, Pair) and isinstance(e.left, MSet) and isinstance(e.right, Path)):
            return False
        if e.left.card == 0:
            return e.right == lazy_nat(0, more=True)
        if e.left.card == 1:
            nu = e.left.items[0][0]
            return isinstance(nu, Path) and web_contains(lazy, nu) and e.right == nu.prefix("s", "p")
        return False

    def enum(k):
        out = [Pair(EMPTY, lazy_nat(0, more=True))]
        out += [Pair(mset(nu), nu.prefix("s", "p")) for nu in enumerate_web(lazy, (k - 3) // 2)]
        return out

    def apply(ns):
        return frozenset([lazy_nat(0, more=True)] + [nu.prefix("s", "p") for nu in ns if web_contains(lazy, nu)])

    return Generator("succ", member, enum, apply=apply, arity=1)


def _natiter_to_iter(e: Point) -> Point | None:
    """Rewrite a natiter entry (ns, (fs, (xs, a))) into an iter entry."""
    try:
        ns, fs, xs, a = e.left, e.right.left, e.right.right.left, e.right.right.right
    except AttributeError:
        return None
    if not all(isinstance(m, MSet) for m in (ns, fs, xs)):
        return None
    phis = []
    for f, m in fs.items:
        if not (isinstance(f, Pair) and isinstance(f.left, MSet)):
            return None
        res = MSet((Tag("p", b), c) for b, c in f.left.items)
        phis.append((Tag("s", Pair(EMPTY, Pair(res, f.right))), m))
    for x, m in xs.items:
        phis.append((Tag("z", Pair(EMPTY, Pair(EMPTY, x))), m))
    return Pair(ns, Pair(MSet(phis), a))


def natiter_gen(a: WebExpr) -> Generator:
    """natiter : LNat => (A => A) => A => A, derived from iter on LNat.

    The case record of iter is rewritten with !(A & B) = !A (x) !B, the empty
    label arguments are dropped, and the one-field record B^{&{p}} is read as B.
    """
    sig = lazy_nat_signature()
    it = _Recursor(sig, a, False)
    web = Arrow(Lazy(sig), Arrow(Arrow(a, a), Arrow(a, a)))

    def member(e):
        if not web_contains(web, e):
            return False
        conv = _natiter_to_iter(e)
        return conv is not None and it.member(conv)

    def apply(ns, fs, xs):
        phis = [Tag("z", Pair(EMPTY, Pair(EMPTY, x))) for x in xs]
        for f in fs:
            if isinstance(f, Pair) and isinstance(f.left, MSet):
                phis.append(Tag("s", Pair(EMPTY, Pair(MSet((Tag("p", b), c) for b, c in f.left.items), f.right))))
        return it.apply(ns, frozenset(phis))

    return Generator("natiter", member, filtered_enum(web, member), apply=apply, arity=3)


def lazynat_kit(a: WebExpr | None = None) -> dict:
    kit = {"zero": frozenset([lazy_nat(0)]), "succ": succ_gen()}
    if a is not None:
        kit["natiter"] = natiter_gen(a)
    return kit
