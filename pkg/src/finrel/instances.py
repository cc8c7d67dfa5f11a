"""Worked instances: the labelled binary tree, iteration equations, lazy naturals.

Each instance is written in the surface syntax and resolved through the
frontend, so the same sources double as CLI inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .datatypes import lazy_nat
from .frontend import Environment, load
from .points import Path, format_point
from .semantics import (
    Abs,
    App,
    Const,
    EqReport,
    Proj,
    Record,
    TArrow,
    TAtom,
    TRecord,
    Var,
    beta_eq_bounded,
    evaluate,
)

# ---------------------------------------------------------------- the tree example

TREE_SOURCE = """\
# binary trees: leaves labelled in A, nodes labelled in B
space A = {a1, a2, p1, p2, q1, q2}
space B = {b1, b2, c1, c2}
data BT { lf(A)[]; nd(B)[G, D] }
const node_lf : A => unit => BT = node@BT.lf
const node_nd : B => <G: BT, D: BT> => BT = node@BT.nd
const a : A = {a1@A | a2@A}
const a' : A = {p1@A | p2@A}
const a'' : A = {q1@A | q2@A}
const b : B = {b1@B | b2@B}
const b' : B = {c1@B | c2@B}
term leaf = \\x:A. node_lf x ()
term node = \\y:B. \\t:BT. \\u:BT. node_nd y <G = t, D = u>
term tree = node b (leaf a) (node b' (leaf a') (leaf a''))
"""


def tree_example() -> list[Path]:
    env = load(TREE_SOURCE)
    return sorted(evaluate(env.terms["tree"], env.consts))


def format_paths(paths) -> str:
    return "".join(format_point(p) + "\n" for p in sorted(paths))


# ---------------------------------------------------------------- signatures

@dataclass(frozen=True)
class SignatureCase:
    """A datatype in source form with a target space for iteration."""

    name: str
    source: str
    data: str
    labels: dict  # sort -> label type name ("unit" for none)

    def env(self) -> Environment:
        return load(self.source)


LNAT_CASE = SignatureCase(
    "lnat",
    """\
data LNat { z(unit)[]; s(unit)[p] }
space T = {u, v}
""",
    "LNat",
    {"z": "unit", "s": "unit"},
)

TREE_CASE = SignatureCase(
    "tree",
    """\
space A = {a}
space B = {b}
data BT { lf(A)[]; nd(B)[G, D] }
space T = {u, v}
""",
    "BT",
    {"lf": "A", "nd": "B"},
)

ROSE_CASE = SignatureCase(
    "rose",
    """\
space B = {b}
data Rose { rt(B)[kids]; nil(unit)[]; cons(unit)[hd, tl] }
space T = {u}
""",
    "Rose",
    {"rt": "B", "nil": "unit", "cons": "unit"},
)

SIGNATURE_CASES = (LNAT_CASE, TREE_CASE, ROSE_CASE)


def _ty(name: str):
    return TRecord(()) if name == "unit" else TAtom(name)


def _record_ty(labels, ty):
    return TRecord(tuple((j, ty) for j in labels))


def _cases_ty(sig, labels: dict, target, with_subtrees: bool):
    data = TAtom(sig.name)
    fields = []
    for i in sig.sorts:
        res = TArrow(_record_ty(sig.arity(i), target), target)
        if with_subtrees:
            res = TArrow(_record_ty(sig.arity(i), data), res)
        fields.append((i, TArrow(_ty(labels[i]), res)))
    return TRecord(tuple(fields))


@dataclass
class EquationInstance:
    """Both sides of a recursion equation for one constructor, as open terms."""

    sort: str
    ctx: tuple
    lhs: object
    rhs: object
    env: Environment


def recursion_instance(case: SignatureCase, sort: str, recursor: str = "iter") -> EquationInstance:
    """iter (node_i a t) f = f_i a <iter t_j f>; rec also passes the subtrees."""
    env = case.env()
    sig = env.datas[case.data]
    target = TAtom("T")
    with_sub = recursor == "rec"
    cases = _cases_ty(sig, case.labels, target, with_sub)
    data = TAtom(sig.name)
    arity = sig.arity(sort)
    node_ty = TArrow(_ty(case.labels[sort]), TArrow(_record_ty(arity, data), data))
    env.consts.add("node", node_ty, _builtin_den(env, f"node@{case.data}.{sort}", node_ty))
    rec_ty = TArrow(data, TArrow(cases, target))
    env.consts.add("R", rec_ty, _builtin_den(env, f"{recursor}@{case.data}", rec_ty))

    ts = [f"t_{j}" for j in arity]
    ctx = (("a", _ty(case.labels[sort])),) + tuple((t, data) for t in ts) + (("f", cases),)
    subtrees = Record(tuple((j, Var(t)) for j, t in zip(arity, ts)))
    lhs = App(App(Const("R"), App(App(Const("node"), Var("a")), subtrees)), Var("f"))
    results = Record(tuple((j, App(App(Const("R"), Var(t)), Var("f"))) for j, t in zip(arity, ts)))
    rhs = App(Proj(sort, Var("f")), Var("a"))
    if with_sub:
        rhs = App(rhs, subtrees)
    rhs = App(rhs, results)
    return EquationInstance(sort, ctx, lhs, rhs, env)


def _builtin_den(env: Environment, text: str, ty):
    from .frontend import Builtin, _builtin

    name, _, args = text.partition("@")
    den, _ = _builtin(Builtin(name, tuple(args.split(".")) if args else ()), env.types.web(ty), env)
    return den


def check_recursion(case: SignatureCase, bound: int, recursor: str = "iter") -> dict[str, EqReport]:
    out = {}
    for sort in case.env().datas[case.data].sorts:
        inst = recursion_instance(case, sort, recursor)
        out[sort] = beta_eq_bounded(inst.lhs, inst.rhs, inst.ctx, inst.env.consts, bound, inst.env.types)
    return out


def first_nonempty_bound(case: SignatureCase, sort: str, recursor: str = "iter", limit: int = 40) -> int:
    """The least bound at which the equation's slices are non-empty."""
    from .semantics import saturated_slice

    inst = recursion_instance(case, sort, recursor)
    for k in range(limit + 1):
        s, _ = saturated_slice(inst.lhs, inst.ctx, inst.env.consts, k, inst.env.types)
        if s:
            return k
    raise ValueError(f"no non-empty slice below {limit}")


# ---------------------------------------------------------------- lazy naturals

LNAT_SOURCE = """\
data LNat { z(unit)[]; s(unit)[p] }
space A = {x, y}
const zero : LNat = zero
const succ : LNat => LNat = succ
const natiter : LNat => (A => A) => A => A = natiter
"""


def lazy_nat_env() -> Environment:
    return load(LNAT_SOURCE)


def succ_power(n: int) -> frozenset:
    """The exact value of succ^n 0."""
    env = lazy_nat_env()
    t = Const("zero")
    for _ in range(n):
        t = App(Const("succ"), t)
    return evaluate(t, env.consts)


def succ_power_expected(n: int) -> frozenset:
    return frozenset([lazy_nat(k, more=True) for k in range(n)] + [lazy_nat(n)])


def natiter_equations(bound: int) -> dict[str, EqReport]:
    """natiter 0 = \\f.\\x.x and natiter (succ n) = \\f.\\x. f (natiter n f x)."""
    env = lazy_nat_env()
    a, lnat = TAtom("A"), TAtom("LNat")
    fa = TArrow(a, a)
    zero_lhs = App(Const("natiter"), Const("zero"))
    zero_rhs = Abs("f", fa, Abs("x", a, Var("x")))
    succ_lhs = Abs("n", lnat, App(Const("natiter"), App(Const("succ"), Var("n"))))
    body = App(Var("f"), App(App(App(Const("natiter"), Var("n")), Var("f")), Var("x")))
    succ_rhs = Abs("n", lnat, Abs("f", fa, Abs("x", a, body)))
    return {
        "zero": beta_eq_bounded(zero_lhs, zero_rhs, (), env.consts, bound, env.types),
        "succ": beta_eq_bounded(succ_lhs, succ_rhs, (), env.consts, bound, env.types),
    }


__all__ = [
    "LNAT_CASE",
    "ROSE_CASE",
    "SIGNATURE_CASES",
    "TREE_CASE",
    "TREE_SOURCE",
    "EquationInstance",
    "SignatureCase",
    "check_recursion",
    "first_nonempty_bound",
    "format_paths",
    "lazy_nat_env",
    "natiter_equations",
    "recursion_instance",
    "succ_power",
    "succ_power_expected",
    "tree_example",
]
