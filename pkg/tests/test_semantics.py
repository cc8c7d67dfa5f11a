from hypothesis import given, strategies as st
import pytest

from finrel.points import EMPTY, Pair, Tag, mset, parse_point
from finrel.rel import dereliction_gen
from finrel.semantics import (
    UNIT,
    Abs,
    App,
    Const,
    ConstTable,
    EvalError,
    Fst,
    PairT,
    Proj,
    Record,
    Snd,
    TArrow,
    TAtom,
    TProd,
    TypeCheckError,
    TypeEnv,
    Var,
    apply_set,
    beta_eq_bounded,
    curry,
    denote,
    denote_oracle,
    derive_point,
    evaluate,
    free_vars,
    judgment_size,
    saturated_slice,
    slice_of,
    substitute,
    typecheck,
    uncurry,
)
from finrel.webs import FinEnum

A = TAtom("A")
AA = TArrow(A, A)
PA = TProd(A, A)
WEB_A = FinEnum.atoms("A", ["a", "b"])
a, b = parse_point("a@A"), parse_point("b@A")
ENV = TypeEnv({"A": WEB_A})

CONSTS = ConstTable()
CONSTS.add("c", A, frozenset([a]), ENV)
CONSTS.add("f", AA, frozenset([Pair(mset(a), b), Pair(EMPTY, a), Pair(mset(a, b), b)]), ENV)
CONSTS.add("p", PA, frozenset([Tag("1", a), Tag("2", b)]), ENV)
CONSTS.add("id", AA, dereliction_gen(WEB_A), ENV)


# ---------------------------------------------------------------- random typed terms

TYPES = [A, AA, PA]


@st.composite
def terms(draw, ty, ctx=(), depth=3):
    options = [Var(x) for x, t in ctx if t == ty]
    options += [Const(n) for n, e in CONSTS.items() if e.type == ty]
    kinds = ["leaf"] if options else []
    if depth > 0:
        kinds += ["app"]
        if isinstance(ty, TArrow):
            kinds += ["abs", "abs"]
        if ty == A:
            kinds += ["proj"]
        if ty == PA:
            kinds += ["pair"]
    if not kinds:
        kinds = ["abs"] if isinstance(ty, TArrow) else ["pair"]
    kind = draw(st.sampled_from(kinds))
    if kind == "leaf":
        return draw(st.sampled_from(options))
    if kind == "abs":
        x = f"x{len(ctx)}"
        return Abs(x, ty.src, draw(terms(ty.tgt, ctx + ((x, ty.src),), depth - 1)))
    if kind == "app":
        src = draw(st.sampled_from([A, PA]))
        fn = draw(terms(TArrow(src, ty), ctx, depth - 1))
        return App(fn, draw(terms(src, ctx, depth - 1)))
    if kind == "proj":
        return Proj(draw(st.sampled_from(["1", "2"])), draw(terms(PA, ctx, depth - 1)))
    return PairT(draw(terms(A, ctx, depth - 1)), draw(terms(A, ctx, depth - 1)))


CTX = (("u", A), ("g", AA))


@given(st.sampled_from(TYPES).flatmap(lambda ty: terms(ty, CTX)), st.integers(0, 7))
def test_bottom_up_and_top_down_agree(t, bound):
    assert typecheck(t, CTX, CONSTS)
    assert denote(t, CTX, CONSTS, bound, ENV) == denote_oracle(t, CTX, CONSTS, bound, ENV)


@given(st.sampled_from(TYPES).flatmap(lambda ty: terms(ty, CTX)), st.integers(0, 6))
def test_slices_grow_with_the_bound(t, bound):
    small = denote(t, CTX, CONSTS, bound, ENV, budget=12)
    big = denote(t, CTX, CONSTS, bound + 1, ENV, budget=12)
    assert small == frozenset(p for p in big if p.size <= bound)


@given(st.sampled_from(TYPES).flatmap(lambda ty: terms(ty, CTX)))
def test_points_are_in_the_web(t):
    from finrel.webs import web_contains

    ty = typecheck(t, CTX, CONSTS)
    for _, s in reversed(CTX):
        ty = TArrow(s, ty)
    assert all(web_contains(ENV.web(ty), p) for p in denote(t, CTX, CONSTS, 7, ENV))


@given(st.sampled_from(TYPES).flatmap(lambda ty: terms(ty, (("u", A),))), terms(A, depth=1))
def test_beta_redex_equals_substitution(t, u):
    redex = App(Abs("u", A, t), u)
    assert beta_eq_bounded(redex, substitute(t, "u", u), (), CONSTS, 5, ENV).equal


# ---------------------------------------------------------------- by hand

def test_identity_is_dereliction():
    ident = Abs("x", A, Var("x"))
    assert denote(ident, (), CONSTS, 6, ENV) == frozenset([Pair(mset(a), a), Pair(mset(b), b)])


def test_first_projection_of_a_curried_pair():
    k = Abs("x", A, Abs("y", A, Var("x")))
    got = denote(k, (), CONSTS, 7, ENV)
    assert got == frozenset(Pair(mset(v), Pair(EMPTY, v)) for v in (a, b))


def test_variables_in_context():
    # x^[a] |- x^a, curried as ([a], a); the unused y carries []
    got = denote(Var("x"), (("x", A), ("y", A)), CONSTS, 7, ENV)
    assert got == frozenset(Pair(mset(v), Pair(EMPTY, v)) for v in (a, b))


def test_application_of_a_constant():
    got = evaluate(App(Const("f"), Const("c")), CONSTS)
    assert got == apply_set(CONSTS["f"].denotation, frozenset([a])) == frozenset([a, b])
    assert denote(App(Const("f"), Const("c")), (), CONSTS, 3, ENV) == frozenset([a, b])


def test_projections_and_pairs():
    assert evaluate(Fst(Const("p")), CONSTS) == frozenset([a])
    assert evaluate(Snd(Const("p")), CONSTS) == frozenset([b])
    swapped = PairT(Snd(Const("p")), Fst(Const("p")))
    assert evaluate(swapped, CONSTS) == frozenset([Tag("1", b), Tag("2", a)])
    assert denote(swapped, (), CONSTS, 4, ENV) == frozenset([Tag("1", b), Tag("2", a)])


def test_unit_is_empty():
    assert denote(Record(()), (), CONSTS, 6, ENV) == frozenset()
    assert typecheck(Record(())) == UNIT


def test_derive_point_by_hand():
    t = App(Var("g"), Var("x"))
    ctx = [("g", mset(Pair(mset(a), b)), AA), ("x", mset(a), A)]
    assert derive_point(t, ctx, b, CONSTS, ENV)
    ctx = [("g", mset(Pair(mset(a), b)), AA), ("x", mset(a, a), A)]
    assert not derive_point(t, ctx, b, CONSTS, ENV)


def test_evaluate_rejects_function_values():
    with pytest.raises(EvalError):
        evaluate(Abs("x", A, Var("x")), CONSTS)
    assert slice_of(frozenset([a, Pair(mset(a), b)]), 1) == frozenset([a])


# ---------------------------------------------------------------- judgments and typing

@given(st.lists(st.sampled_from([EMPTY, mset(a), mset(a, b), mset(b, b, b)]), max_size=3),
       st.sampled_from([a, b, Pair(mset(a), b)]))
def test_curry_round_trip(ms, point):
    p = curry(ms, point)
    assert uncurry(p, len(ms)) == (tuple(ms), point)
    assert judgment_size(ms, point) == p.size


@pytest.mark.parametrize(
    "t, ctx",
    [
        (Var("z"), ()),
        (Const("nope"), ()),
        (App(Const("c"), Const("c")), ()),
        (App(Const("f"), Const("p")), ()),
        (Proj("3", Const("p")), ()),
        (Proj("1", Const("c")), ()),
        (Record((("1", Const("c")), ("1", Const("c")))), ()),
    ],
)
def test_ill_typed_terms(t, ctx):
    with pytest.raises(TypeCheckError):
        typecheck(t, ctx, CONSTS)


def test_eq_needs_equal_types():
    with pytest.raises(TypeCheckError):
        beta_eq_bounded(Const("c"), Const("p"), (), CONSTS, 3, ENV)


def test_substitution_avoids_capture():
    t = Abs("y", A, App(Var("g"), Var("x")))
    s = substitute(t, "x", Var("y"))
    assert "y" in free_vars(s)
    assert free_vars(s) == {"g", "y"}


def test_const_table_checks_webs():
    table = ConstTable()
    with pytest.raises(TypeCheckError):
        table.add("bad", A, frozenset([Tag("1", a)]), ENV)
    table.add("ok", A, frozenset([a]), ENV)
    with pytest.raises(TypeCheckError):
        table.add("ok", A, frozenset([a]), ENV)


def test_saturation_reports_its_budget():
    t = App(Abs("x", A, Var("x")), Const("c"))
    pts, budget = saturated_slice(t, (), CONSTS, 3, ENV)
    assert pts == frozenset([a]) and budget >= 7


def test_eq_report_describes_differences():
    r = beta_eq_bounded(Const("c"), App(Const("f"), Const("c")), (), CONSTS, 3, ENV)
    assert not r.equal and r.only_right == frozenset([b])
    assert r.describe() == "differ at bound 3: b@A only on the right"
