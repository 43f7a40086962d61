"""Seeded random generators for databases, queries, graphs and formulas."""

from __future__ import annotations

import random
from fractions import Fraction

import networkx as nx

from nullcount import approx, oracle
from nullcount.model import (DomainAssignment, Fact, GroundDatabase, IncompleteDatabase, const,
                             null, total_valuations)
from nullcount.oracle import CNF3, Graph
from nullcount.query import Atom, ConjunctiveQuery, Const, Var

VALUES = ["a", "b", "c", "d", "e", "f"]
OUTSIDER = "z"
RELS = ["R", "S", "T", "U"]
VARS = ["X", "Y", "Z", "W"]


def random_query(rng: random.Random, max_atoms=3, max_arity=2, n_vars=3,
                 const_prob=0.0, consts=("a", "b"), unary=False) -> ConjunctiveQuery:
    k = rng.randint(1, max_atoms)
    atoms = []
    for rel in rng.sample(RELS, k):
        arity = 1 if unary else rng.randint(1, max_arity)
        args = []
        for _ in range(arity):
            if rng.random() < const_prob:
                args.append(Const(rng.choice(consts)))
            else:
                args.append(Var(rng.choice(VARS[:n_vars])))
        atoms.append(Atom(rel, tuple(args)))
    return ConjunctiveQuery(tuple(atoms))


def random_database(rng: random.Random, arities: dict[str, int], *, n_nulls=4, dom_size=3,
                    codd=False, uniform=True, max_facts=5, null_prob=0.6,
                    outsider=True) -> IncompleteDatabase:
    """Random database over `arities`. Every null that is created is used."""
    dom = VALUES[:dom_size]
    pool = dom + ([OUTSIDER] if outsider else [])
    names = [f"n{i}" for i in range(1, n_nulls + 1)]
    unused = list(names)
    facts = set()
    rels = sorted(arities)
    for _ in range(rng.randint(1, max_facts)):
        rel = rng.choice(rels)
        args = []
        for _ in range(arities[rel]):
            if names and rng.random() < null_prob and (unused or not codd):
                if codd:
                    n = unused.pop(rng.randrange(len(unused)))
                else:
                    n = unused.pop() if unused and rng.random() < 0.5 else rng.choice(names)
                    if n in unused:
                        unused.remove(n)
                args.append(null(n))
            else:
                args.append(const(rng.choice(pool)))
        facts.add(Fact(rel, tuple(args)))
    used = sorted({n for f in facts for n in f.nulls})
    if uniform:
        domains = DomainAssignment.uniform(dom)
    else:
        domains = DomainAssignment.per_null(
            {n: rng.sample(dom, rng.randint(1, len(dom))) for n in used})
    return IncompleteDatabase(sorted(facts, key=str), domains)


def database_for(rng: random.Random, q: ConjunctiveQuery, **kw) -> IncompleteDatabase:
    arities = {a.relation: a.arity for a in q.atoms}
    return random_database(rng, arities, **kw)


def random_graph(rng: random.Random, n: int, p: float = 0.4, max_edges: int | None = None) -> Graph:
    nodes = [f"v{i}" for i in range(n)]
    pairs = [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]]
    edges = [e for e in pairs if rng.random() < p]
    if max_edges is not None and len(edges) > max_edges:
        edges = rng.sample(edges, max_edges)
    return Graph(nodes, edges)


def random_bipartite(rng: random.Random, n: int, p: float = 0.5, max_edges: int | None = None) -> Graph:
    left_n = rng.randint(1, n - 1) if n > 1 else 1
    left = [f"u{i}" for i in range(left_n)]
    right = [f"w{i}" for i in range(n - left_n)]
    edges = [(u, v) for u in left for v in right if rng.random() < p]
    if max_edges is not None and len(edges) > max_edges:
        edges = rng.sample(edges, max_edges)
    return Graph(left + right, edges, left=left)


def small_graphs(max_nodes: int = 5):
    """All graphs with 1..max_nodes nodes up to isomorphism."""
    for g in nx.graph_atlas_g():
        if 1 <= g.number_of_nodes() <= max_nodes:
            nodes = [f"v{i}" for i in g.nodes]
            yield Graph(nodes, [(f"v{u}", f"v{v}") for u, v in g.edges])


def small_bipartite_graphs(max_nodes: int = 5):
    for g in nx.graph_atlas_g():
        if 2 <= g.number_of_nodes() <= max_nodes and nx.is_bipartite(g):
            left = {u for u, side in nx.bipartite.color(g).items() if side == 0}
            nodes = [f"v{i}" for i in g.nodes]
            yield Graph(nodes, [(f"v{u}", f"v{v}") for u, v in g.edges],
                        left=[f"v{u}" for u in sorted(left)])


def random_cnf(rng: random.Random, max_vars: int = 3, max_clauses: int = 4) -> CNF3:
    n = rng.randint(1, max_vars)
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        clauses.append(tuple(rng.choice([1, -1]) * rng.randint(1, n) for _ in range(3)))
    return CNF3(n, tuple(clauses))


# knobs for generating instances inside each exact algorithm's class
_CLASS_KNOBS = {
    "product": dict(const_prob=0.0, codd=None, uniform=False, unary=False),
    "constants-dp": dict(const_prob=0.6, codd=False, uniform=False, unary=False),
    "codd-per-atom": dict(const_prob=0.2, codd=True, uniform=False, unary=False),
    "uniform-naive-ie": dict(const_prob=0.0, codd=False, uniform=True, unary=None),
    "uniform-codd-star": dict(const_prob=0.0, codd=True, uniform=True, unary=False),
    "uniform-unary-comp": dict(const_prob=0.2, codd=None, uniform=True, unary=True),
}


def in_class_instances(rng: random.Random, algorithm: str, count: int, *, caps=None,
                       max_nulls: int = 5, max_dom: int = 4):
    """Yield (D, q, problem) until `count` instances whose verdict selects
    `algorithm` and that fit within `caps`."""
    from nullcount.classify import COMP, VAL, Problem, Setting, classify_exact
    from nullcount.errors import CapabilityError
    from nullcount.exact import DEFAULT_CAPS, run_algorithm

    caps = caps or DEFAULT_CAPS
    knobs = _CLASS_KNOBS[algorithm]
    made = 0
    while made < count:
        unary = rng.random() < 0.5 if knobs["unary"] is None else knobs["unary"]
        codd = rng.random() < 0.5 if knobs["codd"] is None else knobs["codd"]
        q = random_query(rng, max_atoms=3, max_arity=3, n_vars=rng.randint(1, 4),
                         const_prob=knobs["const_prob"], consts=("a", "b", "c"), unary=unary)
        D = database_for(rng, q, n_nulls=rng.randint(1, max_nulls),
                         dom_size=rng.randint(1, max_dom), codd=codd,
                         uniform=knobs["uniform"], max_facts=6)
        if algorithm == "uniform-unary-comp":
            problem = Problem.parse("comp", negated=rng.random() < 0.3)
        else:
            problem = VAL
        v = classify_exact(q, Setting.of(D), COMP if not problem.is_val else VAL)
        if v.algorithm != algorithm:
            continue
        try:
            run_algorithm(algorithm, D, q, caps)
        except CapabilityError:
            continue
        made += 1
        yield D, q, problem


# completion-membership candidates

def candidates(D, rng, extra=6):
    """All completions of D (the positives) plus perturbed or random ground
    databases (mostly negatives)."""
    comps = {G for G, _ in oracle.completion_histogram(D, jobs=1)}
    values = sorted({v for f in D.facts for n in f.nulls for v in D.domain(n)}
                    | {t.name for f in D.facts for t in f.args if not t.is_null} | {"z"})
    shapes = sorted({(f.relation, f.arity) for f in D.facts})
    out = list(comps)
    pool = list(comps)
    for _ in range(extra):
        base = set(rng.choice(pool).facts) if pool else set()
        if base and rng.random() < 0.5:
            base.discard(rng.choice(sorted(base)))
        if rng.random() < 0.7 and shapes:
            r, k = rng.choice(shapes)
            base.add((r, tuple(rng.choice(values) for _ in range(k))))
        out.append(GroundDatabase.from_facts(base))
    return comps, out


def agrees_with_enumeration(D, rng, decide):
    comps, cands = candidates(D, rng)
    for S in cands:
        if decide(D, S) != (S in comps):
            return False, S
    return True, None


# estimator instances

def estimator_instances(rng, count, min_witnesses=2):
    """Random valuation-counting instances with a nonzero count and at least
    `min_witnesses` witnesses, so the estimator actually samples."""
    out = []
    while len(out) < count:
        q = random_query(rng, max_atoms=3, max_arity=2, n_vars=rng.randint(1, 3), const_prob=0.1)
        D = database_for(rng, q, n_nulls=rng.randint(2, 6), dom_size=rng.randint(2, 4),
                         codd=rng.random() < 0.3, uniform=rng.random() < 0.5, max_facts=6)
        ws = approx.enumerate_witnesses(D, q)
        if len(ws) < min_witnesses or any(w.cylinder_size == total_valuations(D) for w in ws):
            continue
        truth = oracle.brute_val(D, q, jobs=1)
        if truth >= 1:
            out.append((D, q, truth))
    return out


def success_rate(D, q, truth, epsilon, delta, seeds):
    hits = 0
    for seed in seeds:
        est = approx.karp_luby_estimate(D, q, epsilon, delta, seed=seed).estimate
        hits += abs(est - truth) <= Fraction(epsilon) * truth
    return hits / len(seeds)
