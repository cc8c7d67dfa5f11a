"""Typed terms, point derivations and bounded denotations."""

from .denote import (
    EqReport,
    SemanticsError,
    beta_eq_bounded,
    curry,
    default_budget,
    denote,
    denote_oracle,
    derive_point,
    judgment_size,
    saturated_slice,
    uncurry,
)
from .terms import (
    UNIT,
    UNIT_TERM,
    Abs,
    App,
    Const,
    ConstEntry,
    ConstTable,
    Fst,
    PairT,
    Proj,
    Record,
    Snd,
    TArrow,
    TAtom,
    TData,
    Term,
    TProd,
    TRecord,
    TypeCheckError,
    TypeEnv,
    TypeExpr,
    Var,
    apps,
    free_vars,
    substitute,
    typecheck,
)
from .evaluate import EvalError, apply_set, evaluate, slice_of
