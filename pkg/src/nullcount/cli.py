"""Command-line interface: classify, count, check-completion, gadget."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, oracle
from .classify import (CODD, NAIVE, NON_UNIFORM, UNIFORM, Problem, Setting,
                       classify_approx, classify_exact, classify_parametric)
from .compsem import DEFAULT_NODE_BUDGET, is_completion
from .errors import NullcountError, SettingError
from .exact import DEFAULT_CAPS, Caps, plan_and_count
from .gadgets import GADGETS, identity_sides
from .model import IncompleteDatabase, format_database, load_database, parse_ground_database
from .query import UnionQuery, parse_query, substitute

log = logging.getLogger("nullcount")

TABLE_CHOICES = {"naive": NAIVE, "codd": CODD}
DOMAIN_CHOICES = {"uniform": UNIFORM, "non-uniform": NON_UNIFORM}


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _unit(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {text}")
    return value


def _add_setting(p):
    p.add_argument("--table", choices=TABLE_CHOICES,
                   help="table kind; checked against the database when one is given")
    p.add_argument("--domain", choices=DOMAIN_CHOICES,
                   help="domain kind; checked against the database when one is given")


def _add_problem(p):
    p.add_argument("--problem", choices=("val", "comp"), default="val")
    p.add_argument("--negated", action="store_true", help="count for the negation of the query")


def _add_format(p):
    p.add_argument("--format", choices=("human", "json"), default="human")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nullcount", description="Count valuations and completions of incomplete databases.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log decisions to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="complexity verdicts for a query in a setting")
    p.add_argument("-q", "--query", required=True)
    p.add_argument("--db", type=Path, help="database whose setting is used")
    _add_setting(p)
    _add_problem(p)
    _add_format(p)

    p = sub.add_parser("count", help="count valuations or completions")
    p.add_argument("--db", type=Path, required=True)
    p.add_argument("-q", "--query", required=True)
    p.add_argument("--tuple", help="comma-separated constants for the free variables")
    _add_setting(p)
    _add_problem(p)
    p.add_argument("--mode", choices=("auto", "exact", "brute", "approx"), default="auto")
    p.add_argument("--epsilon", type=_unit, default=0.1)
    p.add_argument("--delta", type=_unit, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive, default=None,
                   help="parallel workers (default: NULLCOUNT_JOBS or 1)")
    p.add_argument("--valuation-cap", type=_positive, default=DEFAULT_CAPS.valuation_cap)
    p.add_argument("--witness-cap", type=_positive, default=DEFAULT_CAPS.witness_cap)
    p.add_argument("--signature-cap", type=_positive, default=DEFAULT_CAPS.signature_cap)
    p.add_argument("--star-cap", type=_positive, default=DEFAULT_CAPS.star_cap)
    p.add_argument("--relation-cap", type=_positive, default=DEFAULT_CAPS.relation_cap)
    p.add_argument("--target-cap", type=_positive, default=DEFAULT_CAPS.target_cap)
    _add_format(p)

    p = sub.add_parser("check-completion", help="decide whether ground facts form a completion")
    p.add_argument("--db", type=Path, required=True)
    p.add_argument("--facts", type=Path, required=True)
    p.add_argument("--node-budget", type=_positive, default=DEFAULT_NODE_BUDGET)
    _add_format(p)

    p = sub.add_parser("gadget", help="build a reduction database from a graph or formula")
    p.add_argument("name", choices=sorted(GADGETS))
    p.add_argument("--graph", type=Path)
    p.add_argument("--cnf", type=Path)
    p.add_argument("--k", type=_positive)
    p.add_argument("--variant", choices=("RST", "RxySxy"), default="RST",
                   help="query variant for is-val")
    p.add_argument("--out", type=Path, help="write the database here instead of stdout")
    p.add_argument("--verify", action="store_true", help="check the count identity with the oracles")
    p.add_argument("--valuation-cap", type=_positive, default=DEFAULT_CAPS.valuation_cap)
    p.add_argument("--jobs", type=_positive, default=None)
    _add_format(p)
    return parser


def resolve_setting(D: IncompleteDatabase | None, table: str | None, domain: str | None) -> Setting:
    """Setting from the database, with explicit flags that must agree with it."""
    if D is None:
        return Setting(TABLE_CHOICES[table or "naive"], DOMAIN_CHOICES[domain or "non-uniform"])
    s = Setting.of(D)
    if table and TABLE_CHOICES[table] != s.table_kind:
        raise SettingError(f"--table {table} given but the database is a {s.table_kind} table")
    if domain and DOMAIN_CHOICES[domain] != s.domain_kind:
        raise SettingError(f"--domain {domain} given but the database has a "
                           f"{s.domain_kind.replace('_', '-')} domain")
    return s


def _bind(q: UnionQuery, tuple_text: str | None) -> UnionQuery:
    if q.is_boolean:
        if tuple_text:
            raise ValueError("--tuple given but the query has no free variables")
        return q
    if not tuple_text:
        raise ValueError(f"query has free variables {', '.join(q.free_vars)}; pass --tuple")
    t = [c.strip() for c in tuple_text.split(",")]
    return UnionQuery(tuple(substitute(d, t) for d in q.disjuncts))


def _emit(args, human: str, payload: dict):
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(human)


def cmd_classify(args) -> int:
    q = parse_query(args.query)
    D = load_database(args.db) if args.db else None
    s = resolve_setting(D, args.table, args.domain)
    p = Problem.parse(args.problem, args.negated)
    approx = classify_approx(q, s, p)
    if q.is_boolean:
        v = classify_exact(q, s, p)
        lines = [f"setting: {s}", f"problem: {p}", f"exact: {v.describe()}",
                 f"approx: {approx.describe()}"]
        payload = {"setting": str(s), "problem": str(p), "exact": v.status,
                   "algorithm": v.algorithm, "patterns": list(v.witness_patterns),
                   "exact_text": v.describe(), "approx": approx.status}
    else:
        pv = classify_parametric(q, s, p)
        lines = [f"setting: {s}", f"problem: {p}", f"exact: {pv.overall.describe()}"]
        lines += [f"  tuple ({', '.join(rep)}): {v.describe()}" for rep, v in pv.per_class.items()]
        lines.append(f"approx: {approx.describe()}")
        payload = {"setting": str(s), "problem": str(p), "exact": pv.overall.status,
                   "exact_text": pv.overall.describe(), "approx": approx.status,
                   "classes": [{"tuple": list(rep), "exact": v.status, "exact_text": v.describe()}
                               for rep, v in pv.per_class.items()]}
    _emit(args, "\n".join(lines), payload)
    return 0


def _decimal(x: Fraction, digits: int = 6) -> str:
    scaled = round(x * 10 ** digits)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10 ** digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def cmd_count(args) -> int:
    D = load_database(args.db)
    q = _bind(parse_query(args.query), args.tuple)
    resolve_setting(D, args.table, args.domain)
    caps = Caps(args.valuation_cap, args.witness_cap, args.signature_cap, args.star_cap,
                args.relation_cap, args.target_cap)
    jobs = args.jobs or oracle.default_jobs()
    r = plan_and_count(D, q, Problem.parse(args.problem, args.negated), args.mode,
                       epsilon=args.epsilon, delta=args.delta, seed=args.seed, caps=caps, jobs=jobs)
    payload = {"exact": r.exact, "method": r.method, "setting": str(r.setting),
               "problem": str(r.problem), "verdict": r.exact_verdict.describe(),
               "approx_verdict": r.approx_verdict.describe()}
    if r.exact:
        payload["count"] = str(int(r.value))
        human = str(int(r.value))
    else:
        rep = r.report
        payload.update(estimate=f"{r.value.numerator}/{r.value.denominator}",
                       estimate_decimal=_decimal(r.value), epsilon=rep.epsilon, delta=rep.delta,
                       seed=rep.seed, samples=rep.samples, witnesses=rep.witness_count)
        human = (f"~{_decimal(r.value)} (karp-luby, epsilon={rep.epsilon}, delta={rep.delta}, "
                 f"seed={rep.seed}, samples={rep.samples})")
    log.info("method %s; exact verdict %s", r.method, r.exact_verdict.describe())
    _emit(args, human, payload)
    return 0


def cmd_check_completion(args) -> int:
    D = load_database(args.db)
    S = parse_ground_database(args.facts.read_text())
    answer, method = is_completion(D, S, args.node_budget)
    _emit(args, f"{'yes' if answer else 'no'} ({method})",
          {"completion": answer, "method": method})
    return 0


def _gadget_output(args):
    fn = GADGETS[args.name]
    if args.name == "k3sat":
        if args.cnf is None or args.k is None:
            raise ValueError("k3sat needs --cnf and --k")
        return fn(oracle.parse_cnf(args.cnf.read_text()), args.k)
    if args.graph is None:
        raise ValueError(f"{args.name} needs --graph")
    G = oracle.parse_graph(args.graph.read_text())
    if args.name == "is-val":
        return fn(G, args.variant)
    return fn(G)


def cmd_gadget(args) -> int:
    out = _gadget_output(args)
    text = format_database(out.database)
    if args.out:
        args.out.write_text(text)
    elif args.format == "human":
        sys.stdout.write(text)
    payload = {"gadget": out.name, "identity": out.identity, "setting": str(out.setting)}
    if args.out:
        payload["out"] = str(args.out)
    if args.format == "json" and not args.out:
        payload["database"] = text
    status = 0
    if args.verify:
        left, right = identity_sides(out, args.valuation_cap, args.jobs or oracle.default_jobs())
        holds = all(x == right for x in left)
        word = "holds" if holds else "fails"
        human = f"identity {word}: {left[0]} = {right}" if holds else \
            f"identity {word}: {' / '.join(map(str, left))} vs {right}"
        if len(left) > 1 and holds:
            human += f" (also for {len(left) - 1} more " \
                     f"{'query' if len(left) == 2 else 'queries'})"
        payload.update(verified=holds, database_side=[str(x) for x in left], reference=str(right))
        if args.format == "human":
            print(human)
        status = 0 if holds else 5
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    elif args.out and not args.verify:
        print(f"wrote {args.out}")
    return status


COMMANDS = {"classify": cmd_classify, "count": cmd_count,
            "check-completion": cmd_check_completion, "gadget": cmd_gadget}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NullcountError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
