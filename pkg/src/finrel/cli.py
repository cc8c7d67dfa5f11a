"""Command-line interface.

Exit codes: 0 on success, 1 when the requested property fails (terms differ,
a set is not finitary, a certificate is invalid), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path as FilePath
from typing import TextIO

from .datatypes import is_lazy_nat_shaped, lazy_web, read_lazy_nat
from .finstruct import (
    Finitary,
    FinError,
    NotFinitary,
    STRAIGHT,
    format_desc,
    finitary_rel_check,
    make_certificate,
    parse_certificate,
    verdict_name,
    verify_certificate,
)
from .frontend import Environment, FrontendError, load
from .instances import format_paths, tree_example
from .points import PointSyntaxError, format_point, parse_point
from .semantics import (
    EvalError,
    SemanticsError,
    TypeCheckError,
    beta_eq_bounded,
    denote,
    denote_oracle,
    derive_point,
    evaluate,
    slice_of,
)
from .webs import Arrow, Bang, FinEnum, Lazy, enumerate_web

SCHEMA_VERSION = 1
DEMOS = ("tree-example", "fix-not-finitary", "supp-not-finitary")


class UsageError(Exception):
    pass


def _nonneg(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {n}")
    return n


def _positive(text: str) -> int:
    n = _nonneg(text)
    if n == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finrel", description="Finitary relational semantics toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name: str, help: str, file: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        if file:
            p.add_argument("file", type=FilePath, help="source unit")
        p.add_argument("--json", action="store_true", help="emit a JSON object")
        return p

    for name, help in (("denote", "bounded denotation, bottom-up"), ("oracle", "bounded denotation, top-down")):
        p = cmd(name, help)
        p.add_argument("term", help="name of a term declaration")
        p.add_argument("--bound", type=_nonneg, default=5)
        p.add_argument("--budget", type=_nonneg, default=None, help="derivation size budget")
        if name == "denote":
            p.add_argument("--exact", action="store_true", help="exact value of the closed term, then sliced")

    p = cmd("eq", "compare two terms at a bound")
    p.add_argument("lhs", nargs="?", default="lhs")
    p.add_argument("rhs", nargs="?", default="rhs")
    p.add_argument("--bound", type=_nonneg, default=5)

    p = cmd("derive", "check one point of a term's denotation")
    p.add_argument("term")
    p.add_argument("point", help="point in canonical text form")
    p.add_argument("--bound", type=_nonneg, default=None, help="derivation budget (default: size + slack)")

    p = cmd("fincheck", "finitarity of the declared probes")
    p.add_argument("names", nargs="*", help="probe names (default: all)")
    p.add_argument("--probes", type=FilePath, default=None, help="extra probe declarations")

    p = cmd("relcheck", "finitarity of a constant, as a relation")
    p.add_argument("const")
    p.add_argument("--bound", type=_nonneg, default=6)
    p.add_argument("--n", type=_positive, default=20, help="witness members to check")

    p = cmd("fixweb", "points of the depth-d approximation of a datatype")
    p.add_argument("data", nargs="?", default=None)
    p.add_argument("--depth", type=_nonneg, default=3)
    p.add_argument("--bound", type=_nonneg, default=3, help="size bound on labels")

    p = cmd("lazyweb", "points of a datatype web up to a size")
    p.add_argument("data", nargs="?", default=None)
    p.add_argument("--bound", type=_nonneg, default=5)

    p = cmd("demo", "worked examples", file=False)
    p.add_argument("name", choices=DEMOS)
    p.add_argument("--n", type=_positive, default=50, help="certificate members")

    p = cmd("verify-cert", "re-check a refutation certificate")
    return parser


# ---------------------------------------------------------------- helpers

def _load(path: FilePath, extra: FilePath | None = None) -> Environment:
    try:
        text = path.read_text()
        if extra is not None:
            text += "\n" + extra.read_text()
    except OSError as e:
        raise UsageError(f"cannot read {e.filename}: {e.strerror}")
    return load(text)


def _term(env: Environment, name: str):
    if name not in env.terms:
        raise UsageError(f"no term named {name!r}")
    return env.terms[name]


def _data(env: Environment, name: str | None):
    if name is None:
        if len(env.datas) != 1:
            raise UsageError("name the datatype: the unit declares " + str(len(env.datas)))
        name = next(iter(env.datas))
    if name not in env.datas:
        raise UsageError(f"no datatype named {name!r}")
    return env.datas[name]


class _Out:
    def __init__(self, stream: TextIO, as_json: bool, command: str):
        self.stream = stream
        self.as_json = as_json
        self.obj = {"schema_version": SCHEMA_VERSION, "command": command}
        self.lines: list[str] = []

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def set(self, **kw) -> None:
        self.obj.update(kw)

    def flush(self) -> None:
        if self.as_json:
            self.stream.write(json.dumps(self.obj, indent=2, sort_keys=True) + "\n")
        else:
            self.stream.write("".join(ln + "\n" for ln in self.lines))


def _points(pts) -> list[str]:
    return [format_point(p) for p in sorted(pts)]


# ---------------------------------------------------------------- commands

def _cmd_denote(args, out: _Out) -> int:
    env = _load(args.file)
    t = _term(env, args.term)
    if getattr(args, "exact", False):
        if args.budget is not None:
            raise UsageError("--exact and --budget exclude each other")
        try:
            pts = slice_of(evaluate(t, env.consts), args.bound)
        except EvalError as e:
            raise UsageError(f"no exact value: {e}")
    else:
        fn = denote if args.command == "denote" else denote_oracle
        pts = fn(t, (), env.consts, args.bound, env.types, args.budget)
    out.set(term=args.term, bound=args.bound, type=str(env.term_type(args.term)), points=_points(pts))
    out.line(f"# {args.term} : {env.term_type(args.term)}, bound {args.bound}, {len(pts)} points")
    for s in _points(pts):
        out.line(s)
    return 0


def _cmd_eq(args, out: _Out) -> int:
    env = _load(args.file)
    s, t = _term(env, args.lhs), _term(env, args.rhs)
    r = beta_eq_bounded(s, t, (), env.consts, args.bound, env.types)
    out.set(
        lhs=args.lhs, rhs=args.rhs, bound=args.bound, equal=r.equal,
        only_lhs=_points(r.only_left), only_rhs=_points(r.only_right),
    )
    out.line(f"{args.lhs} vs {args.rhs}: {r.describe()}")
    return 0 if r.equal else 1


def _cmd_derive(args, out: _Out) -> int:
    env = _load(args.file)
    t = _term(env, args.term)
    try:
        p = parse_point(args.point)
    except PointSyntaxError as e:
        raise UsageError(f"bad point: {e}")
    ok = derive_point(t, (), p, env.consts, env.types, args.bound)
    out.set(term=args.term, point=format_point(p), derivable=ok)
    out.line(f"|- {args.term} : {format_point(p)}: {'derivable' if ok else 'not derivable'}")
    return 0 if ok else 1


def _cmd_fincheck(args, out: _Out) -> int:
    env = _load(args.file, args.probes)
    names = args.names or sorted(env.probes)
    missing = [n for n in names if n not in env.probes]
    if missing:
        raise UsageError(f"no probe named {missing[0]!r}")
    results = []
    status = 0
    for n in names:
        space, desc = env.probes[n]
        v = space.fin(desc)
        if not isinstance(v, Finitary):
            status = 1
        entry = {"probe": n, "polarity": space.polarity, "desc": format_desc(desc), "verdict": verdict_name(v),
                 "reason": v.reason}
        if isinstance(v, NotFinitary) and v.family is not None:
            entry["witnesses"] = _points(v.family.take(4))
        results.append(entry)
        out.line(f"{n}: {verdict_name(v)} ({v.reason})")
    out.set(results=results)
    return status


def _cmd_relcheck(args, out: _Out) -> int:
    env = _load(args.file)
    if args.const not in env.consts:
        raise UsageError(f"no constant named {args.const!r}")
    entry = env.consts[args.const]
    web = env.types.web(entry.type)
    if not isinstance(web, Arrow):
        raise UsageError(f"{args.const} is not a relation: its type is {entry.type}")
    v = finitary_rel_check(entry.denotation, (Bang(web.src), STRAIGHT), (web.tgt, STRAIGHT), args.bound, args.n)
    out.set(const=args.const, type=str(entry.type), verdict=verdict_name(v), reason=v.reason)
    out.line(f"{args.const} : {entry.type}: {verdict_name(v)} ({v.reason})")
    return 0 if isinstance(v, Finitary) else 1


def _show_paths(sig, paths, out: _Out) -> None:
    nat = is_lazy_nat_shaped(sig)
    out.set(data=sig.name, points=_points(paths))
    if nat:
        out.set(readings=[read_lazy_nat(p) for p in sorted(paths)])
    for p in sorted(paths):
        out.line(format_point(p) + (f"  # {read_lazy_nat(p)}" if nat else ""))


def _cmd_fixweb(args, out: _Out) -> int:
    sig = _data(_load(args.file), args.data)
    paths = lazy_web(sig, args.depth, args.bound)
    out.set(depth=args.depth)
    _show_paths(sig, paths, out)
    return 0


def _cmd_lazyweb(args, out: _Out) -> int:
    sig = _data(_load(args.file), args.data)
    paths = enumerate_web(Lazy(sig), args.bound)
    out.set(bound=args.bound)
    _show_paths(sig, paths, out)
    return 0


def demo_base() -> FinEnum:
    return FinEnum.atoms("A", ["a"])


def _cmd_demo(args, out: _Out) -> int:
    out.set(demo=args.name)
    if args.name == "tree-example":
        paths = tree_example()
        out.set(points=_points(paths))
        out.lines.extend(format_paths(paths).splitlines())
        return 0
    cert = make_certificate(args.name.split("-")[0], demo_base(), args.n)
    problems = verify_certificate(cert)
    out.set(certificate=cert.to_text(), valid=not problems, problems=problems)
    out.lines.extend(cert.to_text().splitlines())
    return 0 if not problems else 1


def _cmd_verify(args, out: _Out) -> int:
    try:
        cert = parse_certificate(args.file.read_text())
    except OSError as e:
        raise UsageError(f"cannot read {e.filename}: {e.strerror}")
    except (PointSyntaxError, ValueError) as e:
        raise UsageError(f"bad certificate: {e}")
    problems = verify_certificate(cert)
    out.set(relation=cert.relation, members=len(cert.members), valid=not problems, problems=problems)
    for pr in problems:
        out.line(pr)
    out.line(f"{'valid' if not problems else 'invalid'}: {cert.relation}, {len(cert.members)} members")
    return 0 if not problems else 1


COMMANDS = {
    "denote": _cmd_denote,
    "oracle": _cmd_denote,
    "eq": _cmd_eq,
    "derive": _cmd_derive,
    "fincheck": _cmd_fincheck,
    "relcheck": _cmd_relcheck,
    "fixweb": _cmd_fixweb,
    "lazyweb": _cmd_lazyweb,
    "demo": _cmd_demo,
    "verify-cert": _cmd_verify,
}


def run(argv: list[str], stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    out = _Out(stdout, args.json, args.command)
    try:
        code = COMMANDS[args.command](args, out)
    except (UsageError, FrontendError, PointSyntaxError) as e:
        stderr.write(f"finrel {args.command}: {e}\n")
        return 2
    except (TypeCheckError, SemanticsError, FinError) as e:
        stderr.write(f"finrel {args.command}: {e}\n")
        return 2
    out.set(exit_code=code)
    out.flush()
    return code


def main(argv: list[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
