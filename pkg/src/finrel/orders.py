"""The orders finiteness-inclusion and finiteness-extension, checked on probes.

Both orders quantify over all subsets of a web, so they are tested on a
fixed probe library: finite slices plus a few infinite families.  A probe
only speaks about a space when it lies inside that space's web.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .datatypes import functor_web, lazy_nat_signature, lazy_web, nested_to_path
from .finstruct import (
    DUAL,
    STRAIGHT,
    Explicit,
    Finitary,
    NotFinitary,
    SubsetDesc,
    Unknown,
    WitnessFamily,
    fin_member,
    format_desc,
    verdict_name,
)
from .points import STAR_POINT, Idx, Nat, Path, Point, Tag
from .webs import (
    EmptyWeb,
    FlatNatWeb,
    LPlus,
    Lazy,
    Plus,
    Signature,
    WebExpr,
    With,
    enumerate_web,
    web_contains,
)

PREC = "extension"
SQSUB = "inclusion"
INCOMPARABLE = "incomparable"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class SpaceRepr:
    web: WebExpr
    polarity: str = STRAIGHT

    def fin(self, s: SubsetDesc):
        return fin_member(self.web, self.polarity, s)


class OrderError(ValueError):
    pass


def desc_within(w: WebExpr, s: SubsetDesc, sample: int = 32) -> bool:
    """Whether the probe lies inside the web (families: first ``sample`` members)."""
    if isinstance(s, Explicit):
        return all(web_contains(w, p) for p in s.points)
    if isinstance(s, WitnessFamily):
        return all(web_contains(w, p) for p in s.take(sample))
    raise OrderError(f"probe {format_desc(s)} is not web-independent")


@dataclass
class CmpResult:
    relation: str
    webs_included: bool
    details: list = field(default_factory=list)


def space_cmp(s1: SpaceRepr, s2: SpaceRepr, probes: Sequence[SubsetDesc], bound: int = 5) -> CmpResult:
    """Compare two spaces: extension (stronger), inclusion, incomparable or unknown."""
    included = all(web_contains(s2.web, p) for p in enumerate_web(s1.web, bound))
    if not included:
        return CmpResult(INCOMPARABLE, False, ["web of the first space is not included"])
    incl_ok, ext_ok, unknown = True, True, False
    details = []
    for d in probes:
        if not desc_within(s1.web, d):
            continue
        v1, v2 = s1.fin(d), s2.fin(d)
        if isinstance(v1, Unknown) or isinstance(v2, Unknown):
            unknown = True
            details.append(f"{format_desc(d)}: undecided")
            continue
        f1, f2 = isinstance(v1, Finitary), isinstance(v2, Finitary)
        if f1 and not f2:
            incl_ok = False
            details.append(f"{format_desc(d)}: finitary only in the first space")
        if f1 != f2:
            ext_ok = False
            if f2:
                details.append(f"{format_desc(d)}: finitary only in the second space")
    if not incl_ok:
        return CmpResult(INCOMPARABLE, True, details)
    if unknown:
        return CmpResult(UNKNOWN, True, details)
    return CmpResult(PREC if ext_ok else SQSUB, True, details)


# ---------------------------------------------------------------- probes

def _nat_paths(w: WebExpr, wrap: Callable[[Point], Point] = lambda p: p):
    """Injections leading to a flat-naturals component, as point wrappers."""
    if isinstance(w, FlatNatWeb):
        yield wrap
    elif isinstance(w, (With, Plus, LPlus)):
        for i, a in w.family:
            yield from _nat_paths(a, lambda p, i=i, wrap=wrap: wrap(Tag(i, p)))


def standard_probes(w: WebExpr, bound: int = 4) -> list[SubsetDesc]:
    """Singletons, pairs and the full slice at ``bound``, plus infinite families."""
    pts = enumerate_web(w, bound)
    probes: list[SubsetDesc] = [Explicit(frozenset())]
    probes += [Explicit.of(p) for p in pts[:12]]
    probes += [Explicit.of(p, q) for p, q in zip(pts, pts[1:])][:6]
    probes.append(Explicit(frozenset(pts)))
    for k, wrap in enumerate(_nat_paths(w)):
        probes.append(WitnessFamily(f"naturals#{k}", lambda n, wrap=wrap: wrap(Nat(n))))
    if isinstance(w, Lazy):
        from .finstruct import _cycle_path

        gen = _cycle_path(w.sig, None)
        if gen is not None:
            probes.append(WitnessFamily("longer-paths", gen))
    return probes


# ---------------------------------------------------------------- chains and suprema

@dataclass
class SupReport:
    space: SpaceRepr
    exact: bool
    mismatches: list


def extension_chain_sup(
    chain: Sequence[SpaceRepr],
    probes: Sequence[SubsetDesc],
    limit: SpaceRepr | None = None,
    bound: int = 5,
) -> SupReport:
    """Supremum of an extension chain; exact means finitary-in-sup iff finitary at a stage.

    A finite chain's supremum is its last stage; pass ``limit`` to test a
    candidate supremum of the infinite chain the stages are a prefix of.
    """
    if not chain:
        raise OrderError("empty chain")
    for n in range(len(chain) - 1):
        r = space_cmp(chain[n], chain[n + 1], probes, bound)
        if r.relation != PREC:
            raise OrderError(f"chain is not an extension sequence at stage {n}: {r.relation}")
    sup = limit if limit is not None else chain[-1]
    mismatches = []
    for n, stage in enumerate(chain):
        r = space_cmp(stage, sup, probes, bound)
        if r.relation != PREC:
            mismatches.append(f"stage {n} does not extend into the supremum: {r.relation}")
    for d in probes:
        if not desc_within(sup.web, d):
            continue
        v = sup.fin(d)
        if isinstance(v, Unknown):
            continue
        some = any(desc_within(st.web, d) and isinstance(st.fin(d), Finitary) for st in chain)
        if isinstance(v, Finitary) != some:
            mismatches.append(f"{format_desc(d)}: {verdict_name(v)} in the supremum, stages say {some}")
    return SupReport(sup, not mismatches, mismatches)


def flat_prefix(n: int) -> SpaceRepr:
    """The flat space on {0, ..., n-1}."""
    from .webs import FinEnum

    return SpaceRepr(FinEnum(frozenset(Nat(k) for k in range(n)), f"N<{n}"))


@dataclass(frozen=True)
class FunctorSpec:
    """A web functor X -> T(X), optionally with a decoding of points to paths."""

    name: str
    build: Callable[[WebExpr], WebExpr] = field(compare=False)
    to_path: Callable[[Point], Point] | None = field(default=None, compare=False)
    sig: Signature | None = None


def lazy_nat_functor() -> FunctorSpec:
    """X -> 0 (+~) X, with z for the empty side and s for the successor side."""

    def to_path(p):
        steps = 0
        while isinstance(p, Tag):
            steps += 1
            p = p.value
        addr = [("p", "s")] * steps
        if steps:
            addr[-1] = ("p", p.name)
            return Path("s", addr, STAR_POINT)
        return Path(p.name, (), STAR_POINT)

    return FunctorSpec("lnat", lambda x: LPlus((("z", EmptyWeb), ("s", x))), to_path, lazy_nat_signature())


def signature_functor(sig: Signature) -> FunctorSpec:
    return FunctorSpec(sig.name, lambda x: functor_web(sig, x), nested_to_path, sig)


def constant_functor(w: WebExpr) -> FunctorSpec:
    return FunctorSpec("const", lambda x: w)


@dataclass
class FixChain:
    stages: list
    increasing: bool
    failures: list
    stable_at: int | None

    @property
    def web(self) -> WebExpr:
        return self.stages[-1].web


def functor_fix_chain(t: FunctorSpec, depth: int, probe_bound: int = 4, bound: int = 5) -> FixChain:
    """The stages T^n(empty) for n <= depth, checked to form an extension sequence."""
    webs = [EmptyWeb]
    for _ in range(depth):
        webs.append(t.build(webs[-1]))
    stages = [SpaceRepr(w) for w in webs]
    failures = []
    stable = None
    for n in range(depth):
        probes = standard_probes(webs[n + 1], probe_bound)
        r = space_cmp(stages[n], stages[n + 1], probes, bound)
        if r.relation != PREC:
            failures.append(f"stage {n} -> {n + 1}: {r.relation} {r.details}")
        if stable is None and set(enumerate_web(webs[n], bound)) == set(enumerate_web(webs[n + 1], bound)) and n > 0:
            stable = n
    return FixChain(stages, not failures, failures, stable)


def stage_paths(t: FunctorSpec, w: WebExpr, bound: int) -> frozenset:
    """The points of a stage web, decoded as paths."""
    if t.to_path is None:
        raise OrderError(f"functor {t.name} has no path decoding")
    return frozenset(t.to_path(p) for p in enumerate_web(w, bound))


def functor_on_paths(sig: Signature, paths, label_bound: int = 3) -> frozenset:
    """T applied to a set of paths: roots, labelled roots, and one-step extensions."""
    out = set()
    for i in sig.sorts:
        out.add(Path(i, (), STAR_POINT))
        out.update(Path(i, (), a) for a in enumerate_web(sig.label(i), label_bound))
        for j in sig.arity(i):
            out.update(p.prefix(i, j) for p in paths)
    return frozenset(out)


def fixpoint_equation_holds(sig: Signature, d: int) -> bool:
    """T(fixweb_d) and fixweb_{d+1} agree on points of size at most d."""
    lhs = {p for p in functor_on_paths(sig, lazy_web(sig, d, d), d) if p.size <= d}
    rhs = {p for p in lazy_web(sig, d + 1, d) if p.size <= d}
    direct = {p for p in enumerate_web(Lazy(sig), d) if p.length < d + 1}
    return lhs == rhs == direct
