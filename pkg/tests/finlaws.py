"""Random finiteness instances and a brute-force oracle working on point slices."""

import random

from finrel.finstruct import (
    DUAL,
    FULL,
    STRAIGHT,
    Explicit,
    Finitary,
    FullWeb,
    Inj,
    NotFinitary,
    PathSet,
    Prod,
    Prom,
    Union,
    desc_contains,
    desc_points,
    fin_member,
)
from finrel.points import Nat, Star, Tag
from finrel.webs import (
    Bang,
    FinEnum,
    FlatNatWeb,
    LPlus,
    Lazy,
    Plus,
    Signature,
    Tensor,
    With,
    enumerate_web,
    is_finite_web,
)

LOW, HIGH = 6, 8  # smallest slices used; cheap webs get deeper ones
DEEPEST, MAX_POINTS = 10, 3000

A = FinEnum.atoms("A", ["a", "b"])
N = FlatNatWeb()
EMPTY_LABEL = FinEnum(frozenset(), "0")
SIGS = [
    Signature.make("L", {"z": (EMPTY_LABEL, []), "s": (EMPTY_LABEL, ["p"])}),
    Signature.make("T", {"lf": (N, []), "nd": (A, ["l", "r"])}),
]


def random_web(rng: random.Random, depth: int = 2):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice([A, N, N])
    kind = rng.choice(["plus", "with", "lplus", "tensor", "bang", "lazy"])
    if kind == "lazy":
        return Lazy(rng.choice(SIGS))
    if kind == "bang":
        return Bang(random_web(rng, depth - 1))
    if kind == "tensor":
        return Tensor(random_web(rng, depth - 1), random_web(rng, depth - 1))
    fam = (("l", random_web(rng, depth - 1)), ("r", random_web(rng, depth - 1)))
    return {"plus": Plus, "with": With, "lplus": LPlus}[kind](fam)


def random_explicit(rng: random.Random, w, k: int = 5) -> Explicit:
    pts = [p for p in enumerate_web(w, k) if not any(isinstance(q, Nat) and q.n > 1 for q in _leaves(p))]
    return Explicit(frozenset(rng.sample(pts, min(len(pts), rng.randint(0, 3)))))


def _leaves(p):
    yield p
    for attr in ("left", "right", "value"):
        q = getattr(p, attr, None)
        if q is not None and not isinstance(q, (int, str)):
            yield from _leaves(q)
    for q in getattr(p, "support", ()):
        yield from _leaves(q)


def random_desc(rng: random.Random, w):
    """A description in the decided fragment: no arrows, no base webs, no families.

    Explicit leaves are kept tiny so that every finite set is whole in the low slice.
    """
    r = rng.random()
    if r < 0.2:
        return random_explicit(rng, w, 2)
    if r < 0.35:
        return FULL
    if isinstance(w, (FinEnum, FlatNatWeb)):
        return random_explicit(rng, w, 1) if rng.random() < 0.5 else FULL
    if isinstance(w, (Plus, With, LPlus)):
        items = [Inj(i, random_desc(rng, c)) for i, c in w.family if rng.random() < 0.7]
        if len(items) == 1:
            return items[0]
        return Union(tuple(items))
    if isinstance(w, Tensor):
        return Prod(random_desc(rng, w.left), random_desc(rng, w.right))
    if isinstance(w, Bang):
        return Prom(random_desc(rng, w.inner))
    if isinstance(w, Lazy):
        sig = w.sig
        labels = tuple((i, random_desc(rng, sig.label(i))) for i in sig.sorts if rng.random() < 0.7)
        names = None
        if rng.random() < 0.5:
            every = list(sig.sorts) + [j for i in sig.sorts for j in sig.arity(i)]
            names = frozenset(x for x in every if rng.random() < 0.6)
        max_len = rng.choice([None, None, 0, 1, 2])
        return PathSet(labels, names, max_len)
    raise TypeError(w)


def shrink(rng: random.Random, w, s):
    """A description of a subset of ``s``."""
    if isinstance(s, Explicit):
        return Explicit(frozenset(p for p in s.points if rng.random() < 0.5))
    if isinstance(s, FullWeb):
        return random_desc(rng, w)
    if isinstance(s, Union):
        return Union(tuple(shrink(rng, w, d) for d in s.items if rng.random() < 0.7))
    if isinstance(s, Inj):
        return Inj(s.index, shrink(rng, dict(w.family)[s.index], s.inner))
    if isinstance(s, Prod):
        return Prod(shrink(rng, w.left, s.left), shrink(rng, w.right, s.right))
    if isinstance(s, Prom):
        return Prom(shrink(rng, w.inner, s.inner))
    if isinstance(s, PathSet):
        labels = tuple((i, shrink(rng, w.sig.label(i), d)) for i, d in s.labels if rng.random() < 0.8)
        every = set(w.sig.sorts) | {j for i in w.sig.sorts for j in w.sig.arity(i)}
        names = frozenset(x for x in (s.names if s.names is not None else every) if rng.random() < 0.8)
        max_len = s.max_len if s.max_len is not None else rng.choice([None, 0, 1, 2])
        if s.max_len is not None and rng.random() < 0.5:
            max_len = max(0, s.max_len - 1)
        return PathSet(labels, names, max_len)
    raise TypeError(s)


# ---------------------------------------------------------------- brute force

def _component(pts, i):
    return frozenset(p.value for p in pts if isinstance(p, Tag) and p.index == i)


def brute_finitary(w, small: frozenset, big: frozenset) -> bool:
    """Decide finitarity from the slices of a set at two bounds.

    A projection that is stable between the two slices is taken as finite.
    """
    if is_finite_web(w):
        return True
    if isinstance(w, FlatNatWeb):
        return small == big
    if isinstance(w, (Plus, With, LPlus)):
        return all(
            brute_finitary(c, _component(small, i), _component(big, i))
            for i, c in w.family
        )
    if isinstance(w, Tensor):
        return brute_finitary(w.left, frozenset(p.left for p in small), frozenset(p.left for p in big)) and brute_finitary(
            w.right, frozenset(p.right for p in small), frozenset(p.right for p in big)
        )
    if isinstance(w, Bang):
        return brute_finitary(
            w.inner, frozenset(q for m in small for q in m.support), frozenset(q for m in big for q in m.support)
        )
    if isinstance(w, Lazy):
        if {p.length for p in small} != {p.length for p in big}:
            return False
        for i in w.sig.sorts:
            vals = [frozenset(p.value for p in pts if p.last_type == i and not isinstance(p.value, Star)) for pts in (small, big)]
            if not brute_finitary(w.sig.label(i), *vals):
                return False
        return True
    raise TypeError(w)


def slice_bounds(w) -> tuple[int, int]:
    """The deepest pair (k - 2, k) whose slice of ``w`` stays small."""
    high, prev = HIGH, len(enumerate_web(w, HIGH - 1))
    size = len(enumerate_web(w, HIGH))
    for k in range(HIGH + 1, DEEPEST + 1):
        # extrapolate so an exploding slice is never enumerated
        if size * size > MAX_POINTS * max(prev, 1):
            break
        prev, size = size, len(enumerate_web(w, k))
        if size > MAX_POINTS:
            break
        high = k
    return high - 2, high


def slices(w, s):
    low, high = slice_bounds(w)
    return desc_points(w, s, low), desc_points(w, s, high)


def decided(v) -> bool:
    return isinstance(v, (Finitary, NotFinitary))


def check_case(seed: int) -> list[str]:
    """Run every law on the instance drawn from ``seed``; returns the violations."""
    rng = random.Random(seed)
    w = random_web(rng)
    s = random_desc(rng, w)
    bad = []
    v = fin_member(w, STRAIGHT, s)
    if not decided(v):
        return [f"unknown verdict {v} for {s} in {w}"]
    truth = brute_finitary(w, *slices(w, s))
    if isinstance(v, Finitary) != truth:
        bad.append(f"characterization: {type(v).__name__} but brute force says {truth} for {s} in {w}")
    if isinstance(v, NotFinitary) and v.family is not None:
        members = v.family.take(6)
        if len(set(members)) != len(members):
            bad.append(f"witness family repeats for {s}")
        if not all(desc_contains(w, s, p) for p in members):
            bad.append(f"witness family leaves the set {s}")
    e = random_explicit(rng, w)
    if not isinstance(fin_member(w, STRAIGHT, e), Finitary):
        bad.append(f"explicit set {e} not finitary in {w}")
    if not isinstance(fin_member(w, DUAL, e), Finitary):
        bad.append(f"explicit set {e} not finitary in the dual of {w}")
    t = shrink(rng, w, s)
    small, big = slices(w, t)
    if not big <= slices(w, s)[1]:
        bad.append(f"shrink produced a non-subset {t} of {s}")
    vt = fin_member(w, STRAIGHT, t)
    if not decided(vt):
        bad.append(f"unknown verdict {vt} for {t} in {w}")
    elif isinstance(v, Finitary) and not isinstance(vt, Finitary):
        bad.append(f"downward closure: {s} finitary but its subset {t} is not")
    u = random_desc(rng, w)
    vu = fin_member(w, STRAIGHT, u)
    vunion = fin_member(w, STRAIGHT, Union((s, u)))
    if decided(vu) and decided(vunion):
        both = isinstance(v, Finitary) and isinstance(vu, Finitary)
        if isinstance(vunion, Finitary) != both:
            bad.append(f"union closure: {s} and {u} give {vunion}")
    else:
        bad.append(f"unknown verdict for {u} or its union in {w}")
    return bad
