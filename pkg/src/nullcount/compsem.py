"""Deciding whether a ground database is a completion of an incomplete one.

For Codd tables this reduces to bipartite matching between the facts of D
and the facts of S. For naive tables the problem is NP-complete and we run a
backtracking search with a node budget.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Sequence

from .errors import ResourceError, SettingError
from .model import GroundDatabase, IncompleteDatabase

DEFAULT_NODE_BUDGET = 1_000_000


def max_bipartite_matching(left: Sequence[Hashable], right: Sequence[Hashable],
                           edges: Iterable[tuple[Hashable, Hashable]]) -> int:
    """Size of a maximum matching, by repeated augmenting-path search."""
    adj: dict = {u: [] for u in left}
    right_set = set(right)
    for u, v in edges:
        if u in adj and v in right_set and v not in adj[u]:
            adj[u].append(v)
    match_of: dict = {}

    def augment(u, seen):
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if v not in match_of or augment(match_of[v], seen):
                match_of[v] = u
                return True
        return False

    return sum(1 for u in adj if augment(u, set()))


def _instances(D: IncompleteDatabase, f, S_rel) -> list:
    """Facts of S that the Codd fact f can turn into."""
    out = []
    for g in S_rel:
        for t, a in zip(f.args, g):
            if t.is_null:
                if a not in D.domain(t.name):
                    break
            elif t.name != a:
                break
        else:
            out.append(g)
    return out


def is_completion_codd(D: IncompleteDatabase, S: GroundDatabase) -> bool:
    if not D.is_codd:
        raise SettingError("matching-based completion check needs a Codd table")
    index = S.index()
    edges = []
    for i, f in enumerate(D.facts):
        hits = _instances(D, f, index.get(f.relation, ()))
        if not hits:
            return False
        edges.extend((i, (f.relation, g)) for g in hits)
    right = list(S.facts)
    return max_bipartite_matching(range(len(D.facts)), right, edges) == len(right)


def is_completion_naive(D: IncompleteDatabase, S: GroundDatabase,
                        node_budget: int = DEFAULT_NODE_BUDGET) -> bool:
    """Search for a valuation v with v(D) = S.

    Exponential in the worst case. Nulls are assigned fewest-candidates
    first; partial assignments are pruned when a fact of D can no longer
    land in S or a fact of S can no longer be produced.
    """
    index = S.index()
    facts = D.facts
    if any(f.relation not in index for f in facts):
        return False
    if any(r not in D.arities for r in index):
        return False

    def unifies(f, g, asg):
        for t, a in zip(f.args, g):
            if t.is_null:
                v = asg.get(t.name)
                if v is None:
                    if a not in D.domain(t.name):
                        return False
                elif v != a:
                    return False
            elif t.name != a:
                return False
        # a null repeated inside f must land on equal values
        seen = {}
        for t, a in zip(f.args, g):
            if t.is_null and seen.setdefault(t.name, a) != a:
                return False
        return True

    S_facts = list(S.facts)
    null_facts = {n: [f for f in facts if n in f.nulls] for n in D.nulls}

    def candidates(n, asg):
        vals = []
        for v in sorted(D.domain(n)):
            asg[n] = v
            if all(any(unifies(f, g, asg) for g in index[f.relation]) for f in null_facts[n]):
                vals.append(v)
            del asg[n]
        return vals

    def coverable(asg):
        for r, g in S_facts:
            if not any(unifies(f, g, asg) for f in D.facts_of(r)):
                return False
        return True

    nodes = 0

    def search(asg):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise ResourceError(f"completion search exceeded node budget {node_budget}")
        if not coverable(asg):
            return False
        free = [n for n in D.nulls if n not in asg]
        if not free:
            return True
        best, best_vals = None, None
        for n in free:
            vals = candidates(n, asg)
            if not vals:
                return False
            if best_vals is None or len(vals) < len(best_vals):
                best, best_vals = n, vals
        for v in best_vals:
            asg[best] = v
            if search(asg):
                return True
            del asg[best]
        return False

    if not all(any(unifies(f, g, {}) for g in index[f.relation]) for f in facts):
        return False
    return search({})


def is_completion(D: IncompleteDatabase, S: GroundDatabase,
                  node_budget: int = DEFAULT_NODE_BUDGET) -> tuple[bool, str]:
    """Route to matching for Codd tables, else search. Returns (answer, method)."""
    if D.is_codd:
        return is_completion_codd(D, S), "matching"
    return is_completion_naive(D, S, node_budget), "search"
