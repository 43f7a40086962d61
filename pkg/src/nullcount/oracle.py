"""Brute-force ground truth: query evaluation, valuation and completion
counting by enumeration, and reference counters for graph and CNF problems.

The enumeration counters are vectorised with numpy: a chunk of valuation
indices is decoded into null values, every fact is mapped to the id of the
ground fact it becomes, and each valuation's completion is packed into a
bitmask row. Distinct rows are the distinct completions.
"""

from __future__ import annotations

import itertools
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParseError, ResourceError
from .model import (GroundDatabase, IncompleteDatabase, apply_valuation,
                    enumerate_valuations, total_valuations, valuation_space)
from .query import Const, ConjunctiveQuery, as_union

DEFAULT_VALUATION_CAP = 2 ** 24
DEFAULT_NODE_CAP = 20
DEFAULT_EDGE_CAP = 24
DEFAULT_CNF_VARS_CAP = 24
CHUNK = 1 << 16


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("NULLCOUNT_JOBS", "1")))
    except ValueError:
        return 1


# query evaluation

def _compile_cq(q: ConjunctiveQuery):
    atoms = list(q.atoms)

    def holds(index) -> bool:
        rels = []
        for a in atoms:
            tuples = index.get(a.relation)
            if not tuples:
                return False
            rels.append((a, tuples))
        rels.sort(key=lambda p: len(p[1]))

        def rec(i, h):
            if i == len(rels):
                return True
            a, tuples = rels[i]
            for t in tuples:
                new = dict(h)
                for arg, v in zip(a.args, t):
                    if isinstance(arg, Const):
                        if arg.name != v:
                            break
                    else:
                        w = new.get(arg.name)
                        if w is None:
                            new[arg.name] = v
                        elif w != v:
                            break
                else:
                    if rec(i + 1, new):
                        return True
            return False

        return rec(0, {})

    return holds


def compile_query(q):
    """Return a predicate over relation -> set-of-tuples indexes."""
    q = as_union(q)
    if not q.is_boolean:
        raise ValueError("evaluation needs a Boolean query; substitute free variables first")
    parts = [_compile_cq(d) for d in q.disjuncts]
    return lambda index: any(p(index) for p in parts)


def eval(q, G: GroundDatabase) -> bool:  # noqa: A001 - mirrors the operation name
    return compile_query(q)(G.index())


# enumeration core

class _Encoder:
    """Maps valuations (by index) to completion bitmasks."""

    def __init__(self, D: IncompleteDatabase):
        names, doms = valuation_space(D)
        self.names = names
        self.doms = doms
        self.radix = [len(d) for d in doms]
        pos = {n: i for i, n in enumerate(names)}
        ids: dict = {}
        self.ground: list = []

        def gid(f):
            if f not in ids:
                ids[f] = len(self.ground)
                self.ground.append(f)
            return ids[f]

        self.fixed = [gid((f.relation, tuple(t.name for t in f.args)))
                      for f in D.facts if f.is_ground]
        self.tables = []
        for f in D.facts:
            if f.is_ground:
                continue
            local = list(dict.fromkeys(f.nulls))
            sizes = [self.radix[pos[n]] for n in local]
            if math.prod(sizes) > 1 << 22:
                raise ResourceError(f"fact {f} has too many ground instances to tabulate")
            table = np.empty(math.prod(sizes), dtype=np.int64)
            for k, combo in enumerate(itertools.product(*(doms[pos[n]] for n in local))):
                val = dict(zip(local, combo))
                table[k] = gid((f.relation, tuple(val[t.name] if t.is_null else t.name
                                                  for t in f.args)))
            self.tables.append(([pos[n] for n in local], sizes, table))
        self.width = len(self.ground)

    def rows(self, start: int, stop: int) -> np.ndarray:
        count = stop - start
        idx = np.arange(start, stop, dtype=np.int64)
        digits = np.empty((count, len(self.radix)), dtype=np.int64)
        for i in range(len(self.radix) - 1, -1, -1):
            digits[:, i] = idx % self.radix[i]
            idx //= self.radix[i]
        M = np.zeros((count, max(self.width, 1)), dtype=bool)
        if self.fixed:
            M[:, self.fixed] = True
        rows = np.arange(count)
        for cols, sizes, table in self.tables:
            local = np.zeros(count, dtype=np.int64)
            for c, s in zip(cols, sizes):
                local = local * s + digits[:, c]
            M[rows, table[local]] = True
        return np.packbits(M, axis=1)

    def decode(self, key: bytes) -> GroundDatabase:
        bits = np.unpackbits(np.frombuffer(key, dtype=np.uint8))[:self.width]
        return GroundDatabase.from_facts(self.ground[i] for i in np.flatnonzero(bits))


def _histogram(D: IncompleteDatabase, start: int, stop: int) -> dict[bytes, int]:
    enc = _Encoder(D)
    hist: dict[bytes, int] = {}
    for lo in range(start, stop, CHUNK):
        packed = enc.rows(lo, min(stop, lo + CHUNK))
        view = np.ascontiguousarray(packed).view(np.dtype((np.void, packed.shape[1])))
        uniq, counts = np.unique(view.ravel(), return_counts=True)
        for u, c in zip(uniq, counts):
            key = u.tobytes()
            hist[key] = hist.get(key, 0) + int(c)
    return hist


def completion_histogram(D: IncompleteDatabase, cap: int = DEFAULT_VALUATION_CAP,
                         jobs: int | None = None) -> list[tuple[GroundDatabase, int]]:
    """Every distinct completion with the number of valuations producing it,
    in canonical order."""
    total = total_valuations(D)
    if total > cap:
        raise ResourceError(f"{total} valuations exceed the enumeration cap {cap}")
    jobs = default_jobs() if jobs is None else max(1, jobs)
    if jobs == 1 or total < 4 * CHUNK:
        hist = _histogram(D, 0, total)
    else:
        step = -(-total // jobs)
        bounds = [(lo, min(total, lo + step)) for lo in range(0, total, step)]
        hist = {}
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_histogram, D, lo, hi) for lo, hi in bounds]
            for fut in futures:
                for k, c in fut.result().items():
                    hist[k] = hist.get(k, 0) + c
    enc = _Encoder(D)
    out = [(enc.decode(k), c) for k, c in hist.items()]
    out.sort(key=lambda p: p[0].facts)
    return out


def brute_val(D: IncompleteDatabase, q, negated: bool = False,
              cap: int = DEFAULT_VALUATION_CAP, jobs: int | None = None) -> int:
    holds = compile_query(q)
    return sum(c for G, c in completion_histogram(D, cap, jobs)
               if holds(G.index()) != negated)


def brute_comp(D: IncompleteDatabase, q, negated: bool = False,
               cap: int = DEFAULT_VALUATION_CAP, jobs: int | None = None) -> int:
    holds = compile_query(q)
    return sum(1 for G, _ in completion_histogram(D, cap, jobs)
               if holds(G.index()) != negated)


def count_all_completions(D: IncompleteDatabase, cap: int = DEFAULT_VALUATION_CAP,
                          jobs: int | None = None) -> int:
    return len(completion_histogram(D, cap, jobs))


def brute_val_slow(D: IncompleteDatabase, q, negated: bool = False) -> int:
    """Unvectorised counter, one valuation at a time. Cross-checks the fast path."""
    holds = compile_query(q)
    return sum(1 for v in enumerate_valuations(D)
               if holds(apply_valuation(D, v).index()) != negated)


def brute_comp_slow(D: IncompleteDatabase, q, negated: bool = False) -> int:
    holds = compile_query(q)
    seen = {apply_valuation(D, v) for v in enumerate_valuations(D)}
    return sum(1 for G in seen if holds(G.index()) != negated)


# graphs and formulas

@dataclass(frozen=True)
class Graph:
    nodes: tuple[str, ...]
    edges: frozenset
    left: frozenset | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("duplicate node")
        edges = set()
        for e in self.edges:
            e = frozenset(e)
            if len(e) != 2:
                raise ValueError(f"self-loop or malformed edge {sorted(e)}")
            if not e <= set(self.nodes):
                raise ValueError(f"edge {sorted(e)} uses an undeclared node")
            edges.add(e)
        object.__setattr__(self, "edges", frozenset(edges))
        if self.left is not None:
            left = frozenset(self.left)
            object.__setattr__(self, "left", left)
            if not left <= set(self.nodes):
                raise ValueError("bipartition side uses an undeclared node")
            for e in edges:
                if len(e & left) != 1:
                    raise ValueError(f"edge {sorted(e)} does not cross the bipartition")

    @property
    def right(self) -> frozenset | None:
        return None if self.left is None else frozenset(self.nodes) - self.left

    def edge_list(self) -> list[tuple[str, str]]:
        order = {n: i for i, n in enumerate(self.nodes)}
        return sorted((tuple(sorted(e, key=order.get)) for e in self.edges),
                      key=lambda p: (order[p[0]], order[p[1]]))

    def oriented_edges(self) -> list[tuple[str, str]]:
        """Edges as (left, right) pairs; needs a bipartition."""
        if self.left is None:
            raise ValueError("graph has no bipartition")
        return sorted(tuple(sorted(e, key=lambda n: n not in self.left)) for e in self.edges)


@dataclass(frozen=True)
class CNF3:
    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for c in self.clauses:
            if len(c) != 3:
                raise ValueError(f"clause {c} does not have three literals")
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")


def parse_graph(text: str) -> Graph:
    nodes: list[str] = []
    edges = []
    left = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("nodes:"):
            nodes.extend(line[len("nodes:"):].split())
        elif line.startswith("left:"):
            left = (left or set()) | set(line[len("left:"):].split())
        elif re.match(r"edge\s", line):
            parts = line.split()
            if len(parts) != 3:
                raise ParseError("expected 'edge u v'", lineno, 1)
            edges.append(frozenset(parts[1:]))
        else:
            raise ParseError(f"unrecognised line {line!r}", lineno, 1)
    try:
        return Graph(tuple(dict.fromkeys(nodes)), frozenset(edges), left)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_graph(G: Graph) -> str:
    lines = ["nodes: " + " ".join(G.nodes)]
    if G.left is not None:
        lines.append("left: " + " ".join(n for n in G.nodes if n in G.left))
    lines.extend(f"edge {u} {v}" for u, v in G.edge_list())
    return "\n".join(lines) + "\n"


def parse_cnf(text: str) -> CNF3:
    clauses = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) < 3 or not parts[-2].isdigit():
                raise ParseError("expected 'p cnf <vars> <clauses>'", lineno, 1)
            declared = int(parts[2] if parts[1] == "cnf" else parts[1])
        elif parts[0] == "c3":
            try:
                lits = tuple(int(x) for x in parts[1:])
            except ValueError:
                raise ParseError("clause literals must be integers", lineno, 1) from None
            if len(lits) != 3 or 0 in lits:
                raise ParseError("a c3 line needs three nonzero literals", lineno, 1)
            clauses.append(lits)
        else:
            raise ParseError(f"unrecognised line {line!r}", lineno, 1)
    n = max((abs(l) for c in clauses for l in c), default=0)
    if declared is not None:
        if declared < n:
            raise ParseError(f"declared {declared} variables but literal {n} appears")
        n = declared
    return CNF3(n, tuple(clauses))


def format_cnf(F: CNF3) -> str:
    return f"p cnf {F.num_vars} {len(F.clauses)}\n" + "".join(
        "c3 " + " ".join(map(str, c)) + "\n" for c in F.clauses)


def _check_nodes(G: Graph, cap: int):
    if len(G.nodes) > cap:
        raise ResourceError(f"graph has {len(G.nodes)} nodes, above the cap {cap}")


def count_3col(G: Graph, cap: int = DEFAULT_NODE_CAP) -> int:
    _check_nodes(G, cap)
    nbrs = {n: {m for e in G.edges if n in e for m in e if m != n} for n in G.nodes}
    order = list(G.nodes)
    color: dict[str, int] = {}

    def rec(i):
        if i == len(order):
            return 1
        n = order[i]
        total = 0
        for c in range(3):
            if all(color.get(m) != c for m in nbrs[n]):
                color[n] = c
                total += rec(i + 1)
                del color[n]
        return total

    return rec(0)


def _subsets(G: Graph, cap: int) -> Iterable[frozenset]:
    _check_nodes(G, cap)
    for r in range(len(G.nodes) + 1):
        for combo in itertools.combinations(G.nodes, r):
            yield frozenset(combo)


def count_is(G: Graph, cap: int = DEFAULT_NODE_CAP) -> int:
    return sum(1 for S in _subsets(G, cap) if not any(e <= S for e in G.edges))


def count_vc(G: Graph, cap: int = DEFAULT_NODE_CAP) -> int:
    return sum(1 for S in _subsets(G, cap) if all(e & S for e in G.edges))


def is_pseudoforest(nodes: Iterable[str], edges: Iterable[frozenset]) -> bool:
    """Every connected component has at most as many edges as nodes."""
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = list(edges)
    for e in edges:
        a, b = (find(x) for x in e)
        if a != b:
            parent[a] = b
    n_count: dict[str, int] = {}
    e_count: dict[str, int] = {}
    for n in parent:
        r = find(n)
        n_count[r] = n_count.get(r, 0) + 1
    for e in edges:
        r = find(next(iter(e)))
        e_count[r] = e_count.get(r, 0) + 1
    return all(e_count.get(r, 0) <= n_count[r] for r in n_count)


def has_outdegree_one_orientation(nodes: Iterable[str], edges: Iterable[frozenset]) -> bool:
    """Orient every edge so each node is the tail of at most one edge;
    an orientation exists iff the edges can be matched to distinct endpoints."""
    from .compsem import max_bipartite_matching
    edges = list(edges)
    pairs = [(i, n) for i, e in enumerate(edges) for n in e]
    return max_bipartite_matching(range(len(edges)), list(nodes), pairs) == len(edges)


def count_pf(G: Graph, cap: int = DEFAULT_EDGE_CAP) -> int:
    edges = G.edge_list()
    if len(edges) > cap:
        raise ResourceError(f"graph has {len(edges)} edges, above the cap {cap}")
    return sum(1 for r in range(len(edges) + 1)
               for sub in itertools.combinations(edges, r)
               if is_pseudoforest(G.nodes, map(frozenset, sub)))


def satisfies(F: CNF3, assignment: tuple[bool, ...]) -> bool:
    return all(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in F.clauses)


def count_k3sat(F: CNF3, k: int, cap: int = DEFAULT_CNF_VARS_CAP) -> int:
    if not 1 <= k <= F.num_vars:
        raise ValueError(f"k must lie in 1..{F.num_vars}")
    if F.num_vars > cap:
        raise ResourceError(f"{F.num_vars} variables exceed the cap {cap}")
    prefixes = {a[:k] for a in itertools.product((False, True), repeat=F.num_vars)
                if satisfies(F, a)}
    return len(prefixes)
