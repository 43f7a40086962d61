"""Reductions from graph and formula problems to counting over incomplete
databases. Each generator returns the database, the query, and the count
identity linking the two, so the identity can be checked with the oracles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from . import oracle
from .classify import COMP, VAL, Problem, Setting
from .model import DomainAssignment, Fact, IncompleteDatabase, const, null
from .oracle import CNF3, Graph
from .query import UnionQuery, parse_query


@dataclass(frozen=True)
class GadgetOutput:
    name: str
    database: IncompleteDatabase
    query: UnionQuery | None  # None counts all completions
    problem: Problem
    identity: str
    reference: Callable[[], int] = field(repr=False)
    extra_queries: tuple[UnionQuery, ...] = ()

    @property
    def setting(self) -> Setting:
        return Setting.of(self.database)


def _fresh(base: str, taken) -> str:
    taken = set(taken)
    name, i = base, 0
    while name in taken:
        i += 1
        name = f"{base}{i}"
    return name


def _isolated(G: Graph) -> int:
    touched = {n for e in G.edges for n in e}
    return sum(1 for n in G.nodes if n not in touched)


def _symmetric_edge_facts(G: Graph, rel="R", prefix="u_"):
    facts = []
    for u, v in G.edge_list():
        facts.append(Fact(rel, (null(prefix + u), null(prefix + v))))
        facts.append(Fact(rel, (null(prefix + v), null(prefix + u))))
    return facts


def gadget_3col(G: Graph) -> GadgetOutput:
    """R(x,x) fails exactly on the valuations that are proper 3-colourings.

    Isolated nodes have no null, so the reference side is divided by
    3 per isolated node.
    """
    D = IncompleteDatabase(_symmetric_edge_facts(G), DomainAssignment.uniform(["1", "2", "3"]))
    iso = _isolated(G)

    def reference():
        return (3 ** len(G.nodes) - oracle.count_3col(G)) // 3 ** iso

    return GadgetOutput("3col", D, parse_query("R(X,X)"), VAL,
                        "#Val(R(X,X)) = (3^|V| - #3COL(G)) / 3^isolated", reference)


def gadget_is_val(G: Graph, variant: str = "RST") -> GadgetOutput:
    """Valuations falsifying the query are the independent sets (nodes
    valued 1)."""
    facts = [Fact("S", f.args) for f in _symmetric_edge_facts(G)]
    if variant == "RST":
        facts += [Fact("R", (const("1"),)), Fact("T", (const("1"),))]
        q = parse_query("R(X), S(X,Y), T(Y)")
    elif variant == "RxySxy":
        facts.append(Fact("R", (const("1"), const("1"))))
        q = parse_query("R(X,Y), S(X,Y)")
    else:
        raise ValueError(f"unknown variant {variant!r}; use RST or RxySxy")
    D = IncompleteDatabase(facts, DomainAssignment.uniform(["0", "1"]))
    iso = _isolated(G)

    def reference():
        return (2 ** len(G.nodes) - oracle.count_is(G)) // 2 ** iso

    return GadgetOutput(f"is-val-{variant}", D, q, VAL,
                        "#Val(q) = (2^|V| - #IS(G)) / 2^isolated", reference)


def gadget_vc(G: Graph) -> GadgetOutput:
    """Non-uniform Codd table over unary R whose completions are the vertex
    covers (plus a marker constant)."""
    a = _fresh("a", G.nodes)
    facts = [Fact("R", (const(a),))]
    domains = {}
    for u, v in G.edge_list():
        n = f"e_{u}_{v}"
        facts.append(Fact("R", (null(n),)))
        domains[n] = [u, v]
    for u in G.nodes:
        facts.append(Fact("R", (null("u_" + u),)))
        domains["u_" + u] = [u, a]
    D = IncompleteDatabase(facts, DomainAssignment.per_null(domains))
    return GadgetOutput("vc", D, parse_query("R(X)"), COMP, "#Comp(R(X)) = #VC(G)",
                        lambda: oracle.count_vc(G))


def gadget_is_comp(G: Graph) -> GadgetOutput:
    """Completions containing R(1,1) are one per valuation of the node
    nulls; those without it correspond to independent sets."""
    facts = [Fact("R", (const("node_" + u), null("u_" + u))) for u in G.nodes]
    facts += _symmetric_edge_facts(G)
    facts += [Fact("R", (const(x), const(y))) for x, y in (("0", "0"), ("0", "1"), ("1", "0"))]
    loop = _fresh("loop", ["u_" + u for u in G.nodes])
    facts.append(Fact("R", (null(loop), null(loop))))
    D = IncompleteDatabase(facts, DomainAssignment.uniform(["0", "1"]))
    return GadgetOutput("is-comp", D, parse_query("R(X,X)"), COMP,
                        "#Comp(R(X,X)) = #Comp(R(X,Y)) = 2^|V| + #IS(G)",
                        lambda: 2 ** len(G.nodes) + oracle.count_is(G),
                        (parse_query("R(X,Y)"),))


def gadget_pf(G: Graph) -> GadgetOutput:
    """Uniform Codd table whose completions are the edge sets inducing
    pseudoforests. Needs a bipartition."""
    if G.left is None:
        raise ValueError("pseudoforest gadget needs a bipartite graph with a declared left side")
    oriented = set(G.oriented_edges())
    f = _fresh("f", G.nodes)
    facts = [Fact("R", (const(t), const(s))) for t, s in itertools.product(G.nodes, repeat=2)
             if (t, s) not in oriented]
    for u in G.nodes:
        pair = (const(u), null("u_" + u)) if u in G.left else (null("u_" + u), const(u))
        facts.append(Fact("R", pair))
    facts.append(Fact("R", (const(f), const(f))))
    D = IncompleteDatabase(facts, DomainAssignment.uniform(G.nodes))
    return GadgetOutput("pf", D, parse_query("R(X,X)"), COMP,
                        "#Comp(R(X,X)) = #Comp(R(X,Y)) = #PF(G)",
                        lambda: oracle.count_pf(G), (parse_query("R(X,Y)"),))


TRIANGLE = [("1", "2"), ("2", "1"), ("2", "3"), ("3", "2"), ("1", "3"), ("3", "1")]


def gadget_3col_comp(G: Graph) -> GadgetOutput:
    """8 completions when G is 3-colourable, 7 otherwise; every completion
    satisfies R(X,X) and R(X,Y)."""
    facts = _symmetric_edge_facts(G)
    facts += [Fact("R", (const(x), const(y))) for x, y in TRIANGLE]
    taken = ["u_" + u for u in G.nodes]
    for i in (1, 2, 3):
        a, b = _fresh(f"aux{i}", taken), _fresh(f"aux{i}p", taken)
        facts += [Fact("R", (null(a), null(b))), Fact("R", (null(b), null(a)))]
    facts.append(Fact("R", (const("c"), const("c"))))
    D = IncompleteDatabase(facts, DomainAssignment.uniform(["1", "2", "3"]))
    return GadgetOutput("3col-comp", D, None, COMP,
                        "#Comp(D) = 8 if G is 3-colourable else 7",
                        lambda: 8 if oracle.count_3col(G) else 7,
                        (parse_query("R(X,X)"), parse_query("R(X,Y)")))


def gadget_k3sat(F: CNF3, k: int) -> GadgetOutput:
    """Completions falsifying q correspond to assignments of the first k
    variables that extend to a model of F."""
    if not 1 <= k <= F.num_vars:
        raise ValueError(f"k must lie in 1..{F.num_vars}")
    facts = []
    bits = ("0", "1")
    for abc in itertools.product(bits, repeat=3):
        rel = "C" + "".join(abc)
        for t in itertools.product(bits, repeat=3):
            if any(x == y for x, y in zip(abc, t)):
                facts.append(Fact(rel, tuple(const(x) for x in t)))
    for clause in F.clauses:
        rel = "C" + "".join("1" if lit > 0 else "0" for lit in clause)
        fact = Fact(rel, tuple(null(f"x{abs(lit)}") for lit in clause))
        if fact not in facts:
            facts.append(fact)
    facts += [Fact("S", (const(str(i)), null(f"x{i}"))) for i in range(1, k + 1)]
    D = IncompleteDatabase(facts, DomainAssignment.uniform(bits))
    body = ", ".join(f"C{''.join(abc)}(X,Y,Z)" for abc in itertools.product(bits, repeat=3))
    q = parse_query(f"S(U,W), {body}")
    return GadgetOutput("k3sat", D, q, Problem.parse("comp", negated=True),
                        "#Comp(not q) = #k3SAT(F, k)", lambda: oracle.count_k3sat(F, k))


GADGETS = {
    "3col": gadget_3col,
    "is-val": gadget_is_val,
    "vc": gadget_vc,
    "is-comp": gadget_is_comp,
    "pf": gadget_pf,
    "3col-comp": gadget_3col_comp,
    "k3sat": gadget_k3sat,
}


def identity_sides(out: GadgetOutput, cap: int = oracle.DEFAULT_VALUATION_CAP,
                   jobs: int | None = None) -> tuple[list[int], int]:
    """Database-side counts (primary query first) and the reference count.

    All queries are evaluated over one enumeration of the valuations.
    """
    hist = oracle.completion_histogram(out.database, cap, jobs)
    left = []
    for q in (out.query, *out.extra_queries):
        if q is None:
            left.append(len(hist))
            continue
        holds = oracle.compile_query(q)
        hits = [(G, c) for G, c in hist if holds(G.index()) != out.problem.negated]
        left.append(sum(c for _, c in hits) if out.problem.is_val else len(hits))
    return left, out.reference()


def verify_identity(out: GadgetOutput, cap: int = oracle.DEFAULT_VALUATION_CAP,
                    jobs: int | None = None) -> bool:
    left, right = identity_sides(out, cap, jobs)
    return all(x == right for x in left)
