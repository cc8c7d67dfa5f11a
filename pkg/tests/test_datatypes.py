from hypothesis import given, strategies as st
import pytest

from finrel.datatypes import (
    BOOL,
    FALSE,
    TRUE,
    _Recursor,
    binary_tree_signature,
    depth_bound,
    if_gen,
    iter_gen,
    iter_n,
    lazy_nat,
    lazy_nat_signature,
    len_rel,
    match_gen,
    natiter_gen,
    nested_to_path,
    node_gen,
    node_web,
    path_stats,
    path_to_nested,
    read_lazy_nat,
    rec_gen,
    rec_n,
    succ_gen,
    val_rel,
)
from finrel.instances import SIGNATURE_CASES
from finrel.points import EMPTY, Idx, Nat, Pair, Path, STAR_POINT, Tag, mset
from finrel.rel import check_generator, promote_linear
from finrel.webs import Arrow, FinEnum, Lazy, enumerate_web, web_contains

A = FinEnum.atoms("A", ["a1", "a2"])
B = FinEnum.atoms("B", ["b"])
T = FinEnum.atoms("T", ["u", "v"])
U, V = sorted(T.points)
LNAT = lazy_nat_signature()
TREE = binary_tree_signature(A, B)


def case_sig(case):
    env = case.env()
    return env.datas[case.data], env.types.spaces["T"]


# ---------------------------------------------------------------- paths

@given(st.integers(0, 6), st.booleans())
def test_lazy_nat_reads_back(n, more):
    p = lazy_nat(n, more)
    assert web_contains(Lazy(LNAT), p)
    assert read_lazy_nat(p) == f"{n}{'~' if more else ''}"
    assert p.length == n


@pytest.mark.parametrize("sig", [LNAT, TREE], ids=["lnat", "tree"])
def test_nested_encoding_is_a_bijection(sig):
    for p in enumerate_web(Lazy(sig), 7):
        assert nested_to_path(path_to_nested(p)) == p


def test_val_and_len_by_hand():
    leaf = Path("lf", (), sorted(A.points)[0])
    deep = leaf.prefix("nd", "G")
    assert val_rel(TREE, "lf").fiber(deep) == (leaf.value,)
    assert val_rel(TREE, "nd").fiber(deep) == ()
    assert val_rel(TREE, "lf").fiber(Path("lf", (), STAR_POINT)) == ()
    assert len_rel(TREE).fiber(deep) == (Nat(1),)
    assert Pair(mset(deep), Nat(1)) in promote_linear(len_rel(TREE))
    assert Pair(mset(deep, deep), Nat(1)) not in promote_linear(len_rel(TREE))


# ---------------------------------------------------------------- generator contracts

def _generators():
    out = [
        node_gen(TREE, "lf"),
        node_gen(TREE, "nd"),
        node_gen(LNAT, "s"),
        match_gen(LNAT, T),
        val_rel(TREE, "lf"),
        len_rel(LNAT),
        promote_linear(val_rel(TREE, "lf")),
        promote_linear(len_rel(LNAT)),
        if_gen(T),
        succ_gen(),
        iter_gen(LNAT, T),
        rec_gen(LNAT, T),
    ]
    return out


@pytest.mark.parametrize("g", _generators(), ids=lambda g: g.name)
@pytest.mark.parametrize("k", [5, 9, 13])
def test_generator_contract(g, k):
    assert check_generator(g, k) == []


@pytest.mark.parametrize(
    "g, web",
    [
        (node_gen(TREE, "nd"), node_web(TREE, "nd")),
        (node_gen(LNAT, "s"), node_web(LNAT, "s")),
        (if_gen(T), Arrow(BOOL, Arrow(T, Arrow(T, T)))),
    ],
    ids=["node_nd", "node_s", "if"],
)
def test_enumeration_matches_filtered_web(g, web):
    for k in (6, 9, 11):
        brute = frozenset(p for p in enumerate_web(web, k) if g.member(p))
        assert g.enumerate(k) == brute


@pytest.mark.parametrize("k", [13, 15, 17])
def test_iter_enumeration_matches_filtered_web(k):
    r = _Recursor(LNAT, T, False)
    web = Arrow(Lazy(LNAT), Arrow(r.cases, T))
    brute = frozenset(p for p in enumerate_web(web, k) if r.member(p))
    assert iter_gen(LNAT, T).enumerate(k) == brute


def test_node_by_hand():
    g = node_gen(TREE, "nd")
    b = sorted(B.points)[0]
    leaf = Path("lf", (), STAR_POINT)
    assert Pair(EMPTY, Pair(EMPTY, Path("nd", (), STAR_POINT))) in g
    assert Pair(mset(b), Pair(EMPTY, Path("nd", (), b))) in g
    assert Pair(EMPTY, Pair(mset(Tag("G", leaf)), leaf.prefix("nd", "G"))) in g
    assert Pair(mset(b), Pair(mset(Tag("G", leaf)), leaf.prefix("nd", "G"))) not in g
    assert g.apply({b}, {Tag("D", leaf)}) == frozenset(
        [Path("nd", (), STAR_POINT), Path("nd", (), b), leaf.prefix("nd", "D")]
    )


def test_if_by_hand():
    g = if_gen(T)
    assert Pair(mset(Idx("t")), Pair(mset(U), Pair(EMPTY, U))) in g
    assert Pair(mset(Idx("f")), Pair(EMPTY, Pair(mset(V), V))) in g
    assert Pair(mset(Idx("f")), Pair(mset(U), Pair(EMPTY, U))) not in g
    assert g.apply(TRUE, {U}, {V}) == frozenset([U])
    assert g.apply(FALSE, {U}, {V}) == frozenset([V])


def test_succ_by_hand():
    g = succ_gen()
    assert Pair(EMPTY, lazy_nat(0, more=True)) in g
    for n in range(4):
        assert Pair(mset(lazy_nat(n)), lazy_nat(n + 1)) in g
        assert Pair(mset(lazy_nat(n, True)), lazy_nat(n + 1, True)) in g
    assert Pair(mset(lazy_nat(1)), lazy_nat(1)) not in g


def test_smallest_iter_members_by_hand():
    z = Tag("z", Pair(EMPTY, Pair(EMPTY, U)))
    e = Pair(mset(lazy_nat(0)), Pair(mset(z), U))
    assert e.size == 13
    assert iter_gen(LNAT, T).enumerate(13) == frozenset(
        [e, Pair(mset(lazy_nat(0)), Pair(mset(Tag("z", Pair(EMPTY, Pair(EMPTY, V)))), V)),
         Pair(mset(lazy_nat(0, True)), Pair(mset(Tag("s", Pair(EMPTY, Pair(EMPTY, U)))), U)),
         Pair(mset(lazy_nat(0, True)), Pair(mset(Tag("s", Pair(EMPTY, Pair(EMPTY, V)))), V))]
    )
    # one step of iteration: the root marker 0~ and the tail 1, one case for each
    s = Tag("s", Pair(EMPTY, Pair(mset(Tag("p", U)), V)))
    paths = mset(lazy_nat(0, True), lazy_nat(1))
    assert Pair(paths, Pair(mset(s, z), V)) in iter_gen(LNAT, T)
    assert Pair(mset(lazy_nat(1)), Pair(mset(s, z), V)) not in iter_gen(LNAT, T)
    assert Pair(paths, Pair(mset(s), V)) not in iter_gen(LNAT, T)


# ---------------------------------------------------------------- approximants

@pytest.mark.parametrize("case", SIGNATURE_CASES, ids=lambda c: c.name)
def test_iter_approximants_increase(case):
    sig, target = case_sig(case)
    levels = [iter_n(sig, target, n, 22) for n in range(4)]
    assert levels[0] == frozenset()
    assert all(x <= y for x, y in zip(levels, levels[1:]))
    assert levels[3] <= iter_gen(sig, target).enumerate(22)


def test_rec_approximants_increase():
    levels = [rec_n(LNAT, T, n, 24) for n in range(4)]
    assert all(x <= y for x, y in zip(levels, levels[1:]))
    assert levels[3] and levels[3] <= rec_gen(LNAT, T).enumerate(24)


def iter_lemma_violations(sig, target, bound):
    bad = []
    for e in iter_gen(sig, target).enumerate(bound):
        paths, phis = e.left, e.right.left
        sp, sf = path_stats(paths), path_stats(phis)
        if sp.ind != sf.ind:
            bad.append(("ind", e))
        if sp.val != sf.val:
            bad.append(("val", e))
        if sp.card != sf.card + sf.subsize:
            bad.append(("card", e))
        if e not in iter_n(sig, target, depth_bound(paths), bound):
            bad.append(("depth", e))
    return bad


@pytest.mark.parametrize("case", SIGNATURE_CASES, ids=lambda c: c.name)
@pytest.mark.parametrize("bound", [6, 22, 24])
def test_iter_members_have_the_expected_structure(case, bound):
    sig, target = case_sig(case)
    assert iter_lemma_violations(sig, target, bound) == []


def test_path_stats_by_hand():
    deep = Path("lf", (), sorted(A.points)[0]).prefix("nd", "D")
    s = path_stats(mset(deep, deep, Path("nd", (), STAR_POINT)))
    assert s.ind == frozenset(["nd", "D", "lf"])
    assert s.val == frozenset([deep.value])
    assert s.card == 3 and s.subsize == 0
    phi = Tag("nd", Pair(mset(sorted(B.points)[0]), Pair(mset(Tag("D", U)), U)))
    f = path_stats(mset(phi, phi))
    assert f.ind == frozenset(["nd", "D"]) and f.card == 2 and f.subsize == 2
    assert depth_bound(mset(deep)) == 2


# ---------------------------------------------------------------- natiter

def test_natiter_by_hand():
    g = natiter_gen(T)
    zero = Pair(mset(lazy_nat(0)), Pair(EMPTY, Pair(mset(U), U)))
    assert zero in g
    one = Pair(mset(lazy_nat(0, True), lazy_nat(1)), Pair(mset(Pair(mset(U), V)), Pair(mset(U), V)))
    assert one in g
    assert Pair(mset(lazy_nat(1)), Pair(mset(Pair(mset(U), V)), Pair(mset(U), V))) not in g
    assert Pair(mset(lazy_nat(1)), Pair(EMPTY, Pair(mset(U), U))) not in g
    assert g.apply({lazy_nat(1)}, {Pair(mset(U), V)}, {U}) == frozenset()
    assert g.apply({lazy_nat(0, True), lazy_nat(1)}, {Pair(mset(U), V)}, {U}) == frozenset([V])


def test_natiter_matches_iter_through_the_rewriting():
    from finrel.datatypes import _natiter_to_iter

    g, it = natiter_gen(T), iter_gen(LNAT, T)
    members = g.enumerate(12)
    assert members
    for e in members:
        assert _natiter_to_iter(e) in it
