from pathlib import Path as FsPath

from hypothesis import given, strategies as st
import pytest

from finrel.datatypes import lazy_nat
from finrel.frontend import (
    BUILTINS,
    ConstDecl,
    FrontendError,
    SpaceDecl,
    TermDecl,
    format_unit,
    load,
    parse_unit,
)
from finrel.points import EMPTY, Pair, mset, parse_point
from finrel.rel import Generator
from finrel.semantics import Abs, App, Const, TArrow, TAtom, Var, evaluate, typecheck
from finrel.webs import Arrow, Bang, FinEnum, FlatNatWeb, Tensor, With, web_contains

ROOT = FsPath(__file__).resolve().parent.parent
SOURCES = sorted((ROOT / "corpus").glob("*.fr"))


# ---------------------------------------------------------------- round trips

@pytest.mark.parametrize("path", SOURCES, ids=lambda p: p.name)
def test_corpus_units_round_trip(path):
    unit = parse_unit(path.read_text())
    printed = format_unit(unit)
    assert parse_unit(printed) == unit
    assert format_unit(parse_unit(printed)) == printed
    load(path.read_text())


WEBS = ["A", "N", "0", "!A", "A * A", "A => A", "(A => A) => A", "!(A * N)", "&{l: A, r: N}",
        "+~{z: 0, s: A}", "+{x: A => A}", "A * (A * A)", "(A * A) * A", "A => A => A"]


@pytest.mark.parametrize("web", WEBS)
def test_webs_round_trip(web):
    unit = parse_unit(f"space A = {{a, b}}\nspace W = {web}\n")
    assert parse_unit(format_unit(unit)) == unit


names = st.sampled_from(["x", "y", "c", "f"])


def term_text(depth):
    if depth == 0:
        return names
    sub = term_text(depth - 1)
    return st.one_of(
        names,
        st.tuples(sub, sub).map(lambda p: f"({p[0]} {p[1]})"),
        st.tuples(names, sub).map(lambda p: f"(\\{p[0]}:A. {p[1]})"),
        st.tuples(sub, sub).map(lambda p: f"<{p[0]}, {p[1]}>"),
        sub.map(lambda s: f"fst ({s})"),
        st.tuples(sub, sub).map(lambda p: f"<l = {p[0]}, r = {p[1]}>"),
        sub.map(lambda s: f"({s}).l"),
    )


@given(term_text(3))
def test_terms_round_trip(text):
    unit = parse_unit(f"term t = {text}\n")
    assert parse_unit(format_unit(unit)) == unit


def test_comments_and_layout():
    unit = parse_unit("# header\nspace A = {a,   b}  # trailing\n\n  # indented\nterm t = \\x:A.\n   x\n")
    assert [type(d) for d in unit.decls] == [SpaceDecl, TermDecl]


def test_application_is_left_associative_and_lambda_extends_right():
    env = load("space A = {a}\nconst g : A => A => A = {([a@A], ([a@A], a@A))}\nconst c : A = {a@A}\n"
               "term t = \\x:A. g x c\n")
    t = env.terms["t"]
    assert isinstance(t, Abs) and isinstance(t.body, App) and isinstance(t.body.fn, App)
    assert t.body.fn.arg == Var("x") and t.body.arg == Const("c")


# ---------------------------------------------------------------- resolution

def test_resolution_builds_webs_and_constants():
    env = load((ROOT / "corpus" / "beta1.fr").read_text())
    a = parse_point("a@A")
    assert env.spaces["A"] == FinEnum.atoms("A", ["a", "b"])
    assert Pair(mset(a), parse_point("b@A")) in env.consts["f"].denotation
    assert typecheck(env.terms["lhs"], (), env.consts) == TAtom("A")


def test_earlier_terms_are_inlined():
    env = load((ROOT / "corpus" / "lnat.fr").read_text())
    assert evaluate(env.terms["two"], env.consts) == frozenset(
        [lazy_nat(0, True), lazy_nat(1, True), lazy_nat(2)]
    )


def test_products_records_and_exponentials():
    env = load("space A = {a}\nspace P = A * N\nspace R = &{x: A, y: !A}\nspace F = A => N\n")
    assert isinstance(env.spaces["P"], (Tensor, With))
    assert isinstance(env.spaces["F"], Arrow) and env.spaces["F"].tgt == FlatNatWeb()
    assert isinstance(dict(env.spaces["R"].family)["y"], Bang)


BUILTIN_DECLS = {
    "der": "const d : A => A = der",
    "supp": "const d : A => A = supp",
    "fix": "const d : (A => A) => A = fix",
    "fix@n": "const d : (A => A) => A = fix@3",
    "inj": "const d : A => S = inj@l",
    "case": "const d : S => <l: A => A, r: A => A> => A = case",
    "true": "const d : Bool = true",
    "false": "const d : Bool = false",
    "if": "const d : Bool => A => A => A = if",
    "zero": "const d : LNat = zero",
    "succ": "const d : LNat => LNat = succ",
    "natiter": "const d : LNat => (A => A) => A => A = natiter",
    "node": "const d : unit => <p: LNat> => LNat = node@LNat.s",
    "val": "const d : T => A = val@T.lf",
    "len": "const d : LNat => N = len@LNat",
    "match": "const d : LNat => <z: unit => unit => A, s: unit => <p: LNat> => A> => A = match@LNat",
    "iter": "const d : LNat => <z: unit => unit => A, s: unit => <p: A> => A> => A = iter@LNat",
    "rec": "const d : LNat => <z: unit => unit => unit => A, s: unit => <p: LNat> => <p: A> => A> => A = rec@LNat",
}
PRELUDE = ("space A = {a, b}\nspace S = +~{l: A, r: A}\nspace Bool = +~{t: 0, f: 0}\ndata LNat { z(unit)[]; s(unit)[p] }\n"
           "data T { lf(A)[]; nd(A)[l, r] }\n")


@pytest.mark.parametrize("key", sorted(BUILTIN_DECLS))
def test_every_builtin_resolves_at_its_type(key):
    env = load(PRELUDE + BUILTIN_DECLS[key] + "\n")
    entry = env.consts["d"]
    web = env.types.web(entry.type)
    assert all(web_contains(web, p) for p in entry.enumerate(9))


def test_builtin_table_is_covered():
    assert {k.partition("@")[0] for k in BUILTIN_DECLS} == set(BUILTINS)


# ---------------------------------------------------------------- errors

@pytest.mark.parametrize(
    "src, line, col, message",
    [
        ("space A = {a}\nterm t = y\n", 2, 1, "unbound name 'y'"),
        ("space A = {a, a2\n", 2, 1, "unexpected end of declaration"),
        ("space A = {a a2}\n", 1, 14, "unexpected 'a2'"),
        ("space A = {a}\nconst c : A = {b@A}\n", 2, 1, "point b@A is not in the web of A"),
        ("space A = {a}\nspace A = {b}\n", 2, 1, "'A' is already declared as a space"),
        ("const c : B = {}\n", 1, 1, "unknown space B"),
        ("space A = {a}\nconst c : A = {a@A}\nterm t = c c\n", 3, 1, "ill-typed term"),
        ("space A = {a}\nconst s : A => A = succ\n", 2, 1, "builtin succ does not have type A => A"),
        ("space A = {a}\nconst s : A => A = warp\n", 2, 1, "unknown builtin 'warp'"),
        ("data D { a(unit)[]; a(unit)[] }\n", 1, 1, "repeated sort 'a'"),
        ("spice A = {a}\n", 1, 1, ""),
    ],
)
def test_errors_carry_positions(src, line, col, message):
    with pytest.raises(FrontendError) as info:
        load(src)
    assert (info.value.line, info.value.col) == (line, col)
    assert message in str(info.value)


def test_expected_sets_are_reported():
    with pytest.raises(FrontendError) as info:
        load("space A = {a a2}\n")
    assert info.value.expected == (",", "}")
    assert str(info.value) == "1:14: unexpected 'a2' (expected ',', '}')"
