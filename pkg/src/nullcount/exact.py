"""Polynomial-time counting algorithms for the tractable classes, and the
planner that routes an instance to exact, approximate or brute-force
counting.

All arithmetic is on Python integers. Every algorithm takes a Boolean
self-join-free query and an incomplete database; nulls that do not occur in
any relation of the query only contribute the size of their domain.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import approx, oracle
from .classify import (COUNT_VAL, ApproxVerdict, ExactVerdict, Problem, Setting,
                       classify_approx, classify_exact)
from .errors import CapabilityError, HardnessError, ResourceError, SchemaError, SettingError
from .model import IncompleteDatabase, total_valuations
from .query import (Atom, ConjunctiveQuery, Const, Var, as_union, canonical_patterns,
                    connectivity_graph)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Caps:
    valuation_cap: int = oracle.DEFAULT_VALUATION_CAP
    witness_cap: int = approx.DEFAULT_WITNESS_CAP
    signature_cap: int = 8
    star_cap: int = 3
    relation_cap: int = 3
    target_cap: int = 6


DEFAULT_CAPS = Caps()


@lru_cache(maxsize=None)
def surj(n: int, m: int) -> int:
    """Number of surjections from an n-set onto an m-set."""
    if n < 0 or m < 0:
        raise ValueError("surj needs nonnegative arguments")
    if m > n:
        return 0
    if m == 0:
        return int(n == 0)
    return sum((-1) ** i * math.comb(m, i) * (m - i) ** n for i in range(m))


def _prepare(D: IncompleteDatabase, q) -> ConjunctiveQuery:
    q = as_union(q).single() if not isinstance(q, ConjunctiveQuery) else q
    if not q.is_boolean:
        raise ValueError("query has free variables; substitute a tuple first")
    if not q.is_self_join_free:
        raise CapabilityError("exact algorithms need a self-join-free query")
    check_schema(D, q)
    return q


def check_schema(D: IncompleteDatabase, q) -> None:
    for cq in as_union(q).disjuncts:
        for a in cq.atoms:
            if a.relation in D.arities and D.arities[a.relation] != a.arity:
                raise SchemaError(f"relation {a.relation} has arity {D.arities[a.relation]} "
                                   f"in the database but {a.arity} in the query")


def _outside_factor(D: IncompleteDatabase, relations) -> int:
    """Product of domain sizes of nulls occurring in none of the relations."""
    rels = set(relations)
    inside = {n for f in D.facts if f.relation in rels for n in f.nulls}
    return math.prod(len(D.domain(n)) for n in D.nulls if n not in inside)


# non-uniform naive tables

def count_val_disjoint(D: IncompleteDatabase, q) -> int:
    """Queries whose variables each occur once and whose atoms hold at most
    one constant. Without constants every valuation satisfies the query as
    soon as each relation is nonempty."""
    q = _prepare(D, q)
    pats = canonical_patterns(q)
    if pats.Rxx or pats.RxSx or pats.Rcc or pats.Rcc_distinct:
        raise CapabilityError("product algorithm needs variables occurring once and "
                              "at most one constant per atom")
    if q.constants:
        return count_val_constants_dp(D, q)
    if any(not D.facts_of(r) for r in q.relations):
        return 0
    return total_valuations(D)


def count_val_constants_dp(D: IncompleteDatabase, q, max_targets: int = 6) -> int:
    """Count valuations by dynamic programming over nulls.

    An atom with a constant c at position p is satisfied when some fact of
    its relation carries c at p; its other arguments are variables occurring
    once, so they match anything. The state after processing a prefix of the
    nulls is the set of such atoms already satisfied.
    """
    q = _prepare(D, q)
    pats = canonical_patterns(q)
    if pats.Rxx or pats.RxSx or pats.Rcc or pats.Rcc_distinct:
        raise CapabilityError("constants DP needs variables occurring once and "
                              "at most one constant per atom")
    targets = []
    for a in q.atoms:
        consts = [(i, t.name) for i, t in enumerate(a.args) if isinstance(t, Const)]
        if consts:
            targets.append((a.relation,) + consts[0])
        elif not D.facts_of(a.relation):
            return 0
    if len(targets) > max_targets:
        raise CapabilityError(f"{len(targets)} constant atoms exceed the target cap {max_targets}")
    full = (1 << len(targets)) - 1
    start = 0
    hits: dict[str, list[tuple[int, str]]] = {}
    for k, (rel, pos, c) in enumerate(targets):
        for f in D.facts_of(rel):
            t = f.args[pos]
            if not t.is_null:
                if t.name == c:
                    start |= 1 << k
            else:
                hits.setdefault(t.name, []).append((k, c))
    states = {start: 1}
    for n in D.nulls:
        dom = D.domain(n)
        by_value: dict[str, int] = {}
        for k, c in hits.get(n, ()):
            if c in dom:
                by_value[c] = by_value.get(c, 0) | (1 << k)
        rest = len(dom) - len(by_value)
        new: dict[int, int] = {}
        for s, cnt in states.items():
            if rest:
                new[s] = new.get(s, 0) + cnt * rest
            for mask in by_value.values():
                new[s | mask] = new.get(s | mask, 0) + cnt
        states = new
    non_satisfying = sum(c for s, c in states.items() if s != full)
    return total_valuations(D) - non_satisfying


# Codd tables

def _match_count(D: IncompleteDatabase, atom: Atom, f) -> int:
    """Valuations of f's nulls under which f is an image of atom (Codd f)."""
    for arg, t in zip(atom.args, f.args):
        if isinstance(arg, Const):
            if t.is_null:
                if arg.name not in D.domain(t.name):
                    return 0
            elif t.name != arg.name:
                return 0
    out = 1
    for x in atom.variables:
        cand = None
        for p in atom.positions(Var(x)):
            t = f.args[p]
            s = D.domain(t.name) if t.is_null else frozenset((t.name,))
            cand = s if cand is None else cand & s
        out *= len(cand)
        if not out:
            return 0
    return out


def _fact_total(D: IncompleteDatabase, f) -> int:
    return math.prod(len(D.domain(n)) for n in f.nulls)


def _codd_atom(D: IncompleteDatabase, atom: Atom) -> int:
    total, missing = 1, 1
    for f in D.facts_of(atom.relation):
        t = _fact_total(D, f)
        total *= t
        missing *= t - _match_count(D, atom, f)
    return total - missing


def count_val_codd(D: IncompleteDatabase, q) -> int:
    """Atoms share no variables and facts share no nulls, so the count is a
    product over atoms of (valuations of the relation's nulls) minus
    (valuations in which no fact matches the atom)."""
    q = _prepare(D, q)
    if not D.is_codd:
        raise SettingError("per-atom algorithm needs a Codd table")
    if canonical_patterns(q).RxSx:
        raise CapabilityError("per-atom algorithm needs atoms without shared variables")
    out = _outside_factor(D, q.relations)
    for a in q.atoms:
        out *= _codd_atom(D, a)
    return out


# uniform naive tables

def _uniform_domain(D: IncompleteDatabase) -> frozenset[str]:
    dom = D.uniform_domain
    if dom is None:
        raise SettingError("algorithm needs a uniform domain")
    return dom


@dataclass
class _Projected:
    """The query after dropping variables with a single occurrence."""
    groups: list[frozenset[str]]  # relations of each basic singleton query
    constants: dict[str, set[str]] = field(default_factory=dict)  # relation -> constants in kept column
    nulls: dict[str, set[str]] = field(default_factory=dict)  # relation -> nulls in kept column
    empty: bool = False


def _project(D: IncompleteDatabase, q: ConjunctiveQuery) -> _Projected:
    occ = Counter(a.name for at in q.atoms for a in at.args if isinstance(a, Var))
    groups: dict[str, list[str]] = {}
    proj = _Projected([])
    for at in q.atoms:
        kept = [(i, a.name) for i, a in enumerate(at.args) if occ[a.name] >= 2]
        if not kept:
            if not D.facts_of(at.relation):
                proj.empty = True
            continue
        if len({x for _, x in kept}) > 1 or len(kept) > 1:
            raise CapabilityError("query is not a conjunction of basic singletons "
                                  "after dropping single-occurrence variables")
        pos, x = kept[0]
        groups.setdefault(x, []).append(at.relation)
        proj.constants[at.relation] = set()
        proj.nulls[at.relation] = set()
        for f in D.facts_of(at.relation):
            t = f.args[pos]
            (proj.nulls if t.is_null else proj.constants)[at.relation].add(t.name)
    proj.groups = [frozenset(groups[x]) for x in sorted(groups)]
    return proj


def _avoiding_count(proj: _Projected, S: tuple[int, ...], dom: frozenset[str],
                    signature_cap: int) -> int:
    """Valuations of the kept-column nulls under which no group in S is
    satisfied, i.e. no value lies in every relation of a group in S."""
    d = len(dom)
    forbidden = [proj.groups[i] for i in S]
    rels = frozenset().union(*forbidden) if forbidden else frozenset()
    all_nulls = set().union(*proj.nulls.values()) if proj.nulls else set()

    def safe(sig):
        return not any(F <= sig for F in forbidden)

    const_sig: dict[str, set[str]] = {}
    for r in rels:
        for c in proj.constants[r]:
            const_sig.setdefault(c, set()).add(r)
    regions: Counter = Counter()
    for c, sig in const_sig.items():
        sig = frozenset(sig)
        if not safe(sig):
            return 0
        if c in dom:
            regions[sig] += 1
    regions[frozenset()] += d - sum(regions.values())
    null_sig: Counter = Counter()
    for n in all_nulls:
        null_sig[frozenset(r for r in rels if n in proj.nulls[r])] += 1
    free = null_sig.pop(frozenset(), 0)
    blocks = sorted(null_sig.items(), key=lambda p: (len(p[0]), sorted(p[0])))
    if len(blocks) > signature_cap:
        raise CapabilityError(f"{len(blocks)} null signatures exceed the signature cap {signature_cap}")

    def key(reg):
        return tuple(sorted(((tuple(sorted(s)), k) for s, k in reg.items() if k),))

    @lru_cache(maxsize=None)
    def rec(b, reg_key):
        if b == len(blocks):
            return 1
        s, n = blocks[b]
        reg = [(frozenset(sig), size) for sig, size in reg_key]
        options = []
        for sig, size in reg:
            ok = safe(sig | s)
            options.append(range(size + 1) if ok else range(1))
        total = 0
        for takes in itertools.product(*options):
            hit = sum(takes)
            if hit == 0 or hit > n:
                continue
            weight = surj(n, hit)
            nxt: Counter = Counter()
            for (sig, size), k in zip(reg, takes):
                weight *= math.comb(size, k)
                nxt[sig] += size - k
                nxt[sig | s] += k
            total += weight * rec(b + 1, key(nxt))
        return total

    return d ** free * rec(0, key(regions))


def ie_terms(D: IncompleteDatabase, q, signature_cap: int = 8) -> list[tuple[tuple[int, ...], int]]:
    """The inclusion-exclusion terms (S, N_S) used by count_val_uniform_naive."""
    q = _prepare(D, q)
    dom = _uniform_domain(D)
    proj = _project(D, q)
    m = len(proj.groups)
    return [(S, _avoiding_count(proj, S, dom, signature_cap))
            for r in range(m + 1) for S in itertools.combinations(range(m), r)]


def count_val_uniform_naive(D: IncompleteDatabase, q, signature_cap: int = 8) -> int:
    """Uniform naive tables, queries without the hard patterns.

    Variables with one occurrence are dropped; what remains is a conjunction
    of basic singleton queries C_1..C_m over unary projections. The count is
    sum over S of (-1)^|S| N_S, where N_S counts valuations under which no
    C_i with i in S holds. N_S is computed by assigning null blocks (nulls
    with the same relation signature) to regions of the domain (values with
    the same current signature), never letting a region's signature cover a
    forbidden set.
    """
    q = _prepare(D, q)
    if q.constants:
        raise CapabilityError("uniform inclusion-exclusion algorithm needs a constant-free query")
    pats = canonical_patterns(q)
    if pats.Rxx or pats.RxSxyTy or pats.RxySxy:
        raise CapabilityError("query has a hard pattern for uniform naive tables")
    dom = _uniform_domain(D)
    proj = _project(D, q)
    if proj.empty:
        return 0
    kept = set().union(*proj.nulls.values()) if proj.nulls else set()
    outside = len(dom) ** (len(D.nulls) - len(kept))
    m = len(proj.groups)
    total = 0
    for r in range(m + 1):
        for S in itertools.combinations(range(m), r):
            total += (-1) ** r * _avoiding_count(proj, S, dom, signature_cap)
    return outside * total


# uniform Codd tables

def _star_component(D: IncompleteDatabase, atoms: list[Atom], center: str,
                    dom: frozenset[str]) -> int:
    """#Val of a star query (all atoms share `center`, other variables occur
    in one atom) on a uniform Codd table.

    Each fact can match its atom for at most one value c of the center. Facts
    with a constant at a center position are *determined* (only that value);
    the others are *free* and match at any domain value with the same
    number of completions alpha. The non-satisfying valuations are counted by
    a DP over candidate values whose state is, per atom, how many values the
    free facts have been matched to so far.
    """
    d = len(dom)
    m = len(atoms)
    xvar = Var(center)
    dead = 1
    free: list[list[tuple[int, int]]] = [[] for _ in atoms]
    det: dict[str, list[list[tuple[int, int]]]] = {}
    total = 1
    for j, at in enumerate(atoms):
        groups = [(x, at.positions(Var(x))) for x in at.variables if x != center]
        xpos = at.positions(xvar)
        for f in D.facts_of(at.relation):
            tot = d ** len(f.nulls)
            total *= tot
            other = 1
            for _, ps in groups:
                consts = {f.args[p].name for p in ps if not f.args[p].is_null}
                has_null = any(f.args[p].is_null for p in ps)
                if len(consts) > 1:
                    other = 0
                elif consts:
                    if has_null and next(iter(consts)) not in dom:
                        other = 0
                else:
                    other *= d
            xconsts = {f.args[p].name for p in xpos if not f.args[p].is_null}
            xnull = any(f.args[p].is_null for p in xpos)
            if len(xconsts) > 1 or other == 0:
                dead *= tot
            elif xconsts:
                c = next(iter(xconsts))
                alpha = 0 if (xnull and c not in dom) else other
                det.setdefault(c, [[] for _ in atoms])[j].append((alpha, tot - alpha))
            else:
                free[j].append((other, tot - d * other))
    # g[j][v]: weight of free facts of atom j hitting a fixed set of v values
    g = []
    for facts in free:
        h = [1]
        for alpha, beta in facts:
            h = [(h[w] * beta if w < len(h) else 0) + (h[w - 1] * alpha if w else 0)
                 for w in range(len(h) + 1)]
        g.append([sum(h[w] * surj(w, v) for w in range(v, len(h))) for v in range(len(h))])
    full = (1 << m) - 1

    def weights(per_atom, in_dom):
        cov = []
        none = []
        for facts in per_atom:
            n = math.prod(b for _, b in facts)
            cov.append(math.prod(a + b for a, b in facts) - n)
            none.append(n)
        out = {}
        for T in range(full + 1) if in_dom else (0,):
            w = 0
            for E in range(full + 1):
                if T | E == full:
                    continue
                w += math.prod(cov[j] if E >> j & 1 else none[j] for j in range(m))
            if w:
                out[T] = w
        return out

    anon = {T: 1 for T in range(full)}
    steps = [weights(per_atom, c in dom) for c, per_atom in sorted(det.items())]
    steps += [anon] * (d - sum(1 for c in det if c in dom))
    limits = [len(x) - 1 for x in g]
    states = {(0,) * m: 1}
    for step in steps:
        new: dict[tuple[int, ...], int] = {}
        for k, cnt in states.items():
            for T, w in step.items():
                k2 = tuple(k[j] + (T >> j & 1) for j in range(m))
                if any(k2[j] > limits[j] for j in range(m)):
                    continue
                new[k2] = new.get(k2, 0) + cnt * w
        states = new
    non_sat = sum(cnt * math.prod(g[j][k[j]] for j in range(m)) for k, cnt in states.items())
    return total - dead * non_sat


def count_val_uniform_codd(D: IncompleteDatabase, q, star_cap: int = 3) -> int:
    """Uniform Codd tables, queries whose connected components are stars.

    The count factorises over connected components; single-atom components
    use the per-atom formula and larger stars the DP in _star_component.
    """
    q = _prepare(D, q)
    if not D.is_codd:
        raise SettingError("star algorithm needs a Codd table")
    if q.constants:
        raise CapabilityError("star algorithm needs a constant-free query")
    pats = canonical_patterns(q)
    if pats.RxSxyTy or pats.RxySxy:
        raise CapabilityError("query has a hard pattern for uniform Codd tables")
    dom = _uniform_domain(D)
    out = _outside_factor(D, q.relations)
    for comp in connectivity_graph(q).components():
        atoms = [q.atoms[i] for i in comp]
        if len(atoms) == 1:
            out *= _codd_atom(D, atoms[0])
            continue
        if len(atoms) > star_cap:
            raise CapabilityError(f"star component with {len(atoms)} atoms exceeds the cap {star_cap}")
        shared = set.intersection(*(set(a.variables) for a in atoms))
        if len(shared) != 1:
            raise CapabilityError("component is not a star query")
        out *= _star_component(D, atoms, shared.pop(), dom)
    return out


# completions, uniform domain, unary relations

def _minimal_covers(need: frozenset, sigs: list[frozenset]) -> list[tuple[int, ...]]:
    """Minimal index sets into `sigs` whose union contains `need`."""
    covers: list[tuple[int, ...]] = []
    for r in range(len(sigs) + 1):
        for combo in itertools.combinations(range(len(sigs)), r):
            if any(set(c) <= set(combo) for c in covers):
                continue
            if need <= frozenset().union(*(sigs[i] for i in combo)):
                covers.append(combo)
    return covers


def count_comp_uniform_unary(D: IncompleteDatabase, q, relation_cap: int = 3,
                             satisfied: bool = True) -> int:
    """Completions of a uniform table over unary relations that satisfy q.

    A completion is determined by the set of relations each constant ends up
    in (its completion signature). Domain values with the same database
    signature, none of them named in q, are interchangeable, so completions
    are grouped by how many values of each such block receive each
    completion signature. A profile is realisable iff the upgraded values
    can each be covered by a minimal set of nulls whose signatures fit
    inside their target, and every remaining null fits some value.

    With ``satisfied=False`` the completions falsifying q are counted.
    """
    q = _prepare(D, q)
    if not all(a.arity == 1 for a in q.atoms):
        raise CapabilityError("completion algorithm needs unary atoms only")
    sigma = sorted(set(q.relations) | set(D.relations))
    if any(D.arities.get(r, 1) != 1 for r in sigma):
        raise CapabilityError("completion algorithm needs unary relations only")
    if len(sigma) > relation_cap:
        raise CapabilityError(f"{len(sigma)} relations exceed the relation cap {relation_cap}")
    dom = _uniform_domain(D)
    qconsts = set(q.constants)
    base: dict[str, frozenset] = {}
    for f in D.facts:
        t = f.args[0]
        if not t.is_null:
            base[t.name] = base.get(t.name, frozenset()) | {f.relation}
    null_sig: Counter = Counter()
    for n in D.nulls:
        null_sig[frozenset(f.relation for f in D.facts if f.args[0].name == n and f.args[0].is_null)] += 1
    n_nulls = len(D.nulls)
    fixed = [base.get(a, frozenset()) for a in set(base) | qconsts if a not in dom]
    blocks: Counter = Counter()
    for a in dom:
        blocks[(base.get(a, frozenset()), a if a in qconsts else None)] += 1
    block_list = sorted(blocks.items(), key=lambda p: (sorted(p[0][0]), p[0][1] or ""))
    all_sigs = [frozenset(c) for r in range(len(sigma) + 1)
                for c in itertools.combinations(sigma, r)]
    sig_names = sorted(null_sig, key=lambda s: (len(s), sorted(s)))
    resources = tuple(null_sig[s] for s in sig_names)
    groups: dict[str, set[str]] = {}
    ground_atoms = []
    for a in q.atoms:
        t = a.args[0]
        if isinstance(t, Var):
            groups.setdefault(t.name, set()).add(a.relation)
        else:
            ground_atoms.append((a.relation, t.name))
    var_groups = [frozenset(g) for g in groups.values()]
    cover_cache: dict = {}

    def covers(p, c):
        if (p, c) not in cover_cache:
            allowed = [i for i, s in enumerate(sig_names) if s <= p]
            found = _minimal_covers(p - c, [sig_names[i] for i in allowed])
            cover_cache[(p, c)] = [[allowed[i] for i in cov] for cov in found]
        return cover_cache[(p, c)]

    def feasible(profile) -> bool:
        present = [p for (c, _), dist in zip(block_list, profile) for p, k in dist.items() if k]
        items = [(p, c, k) for ((c, _), _), dist in zip(block_list, profile)
                 for p, k in dist.items() if k and p != c]

        @lru_cache(maxsize=None)
        def rec(i, left, rem):
            if i == len(items):
                return all(not r or any(sig_names[s] <= p for p in present)
                           for s, r in enumerate(rem))
            p, c, k = items[i]
            if left == 0:
                return rec(i + 1, items[i + 1][2] if i + 1 < len(items) else 0, rem)
            for cov in covers(p, c):
                if all(rem[s] > 0 for s in cov):
                    nxt = list(rem)
                    for s in cov:
                        nxt[s] -= 1
                    if rec(i, left - 1, tuple(nxt)):
                        return True
            return False

        return rec(0, items[0][2] if items else 0, resources)

    def holds(profile) -> bool:
        present = fixed + [p for dist in profile for p, k in dist.items() if k]
        if not all(any(F <= p for p in present) for F in var_groups):
            return False
        for rel, c in ground_atoms:
            if c in dom:
                i = next(i for i, ((_, name), _) in enumerate(block_list) if name == c)
                p = next(p for p, k in profile[i].items() if k)
            else:
                p = base.get(c, frozenset())
            if rel not in p:
                return False
        return True

    def distributions(c, size, budget):
        """Ways to give `size` values with base signature c target
        signatures, at most `budget` of them different from c."""
        ups = [p for p in all_sigs if c < p]

        def rec(i, left, budget):
            if i == len(ups):
                yield {c: left}
                return
            for k in range(min(left, budget) + 1):
                for rest in rec(i + 1, left - k, budget - k):
                    yield {ups[i]: k, **rest} if k else rest
        yield from rec(0, size, budget)

    total = 0

    def walk(b, budget, profile, weight):
        nonlocal total
        if b == len(block_list):
            if holds(profile) == satisfied and feasible(profile):
                total += weight
            return
        (c, _), size = block_list[b]
        for dist in distributions(c, size, budget):
            used = size - dist.get(c, 0)
            w = math.factorial(size)
            for k in dist.values():
                w //= math.factorial(k)
            walk(b + 1, budget - used, profile + [dist], weight * w)

    walk(0, n_nulls, [], 1)
    return total


ALGORITHMS = {
    "product": count_val_disjoint,
    "constants-dp": count_val_constants_dp,
    "codd-per-atom": count_val_codd,
    "uniform-naive-ie": count_val_uniform_naive,
    "uniform-codd-star": count_val_uniform_codd,
    "uniform-unary-comp": count_comp_uniform_unary,
}


def run_algorithm(name: str, D: IncompleteDatabase, q, caps: Caps = DEFAULT_CAPS) -> int:
    kwargs = {
        "constants-dp": {"max_targets": caps.target_cap},
        "uniform-naive-ie": {"signature_cap": caps.signature_cap},
        "uniform-codd-star": {"star_cap": caps.star_cap},
        "uniform-unary-comp": {"relation_cap": caps.relation_cap},
    }.get(name, {})
    return ALGORITHMS[name](D, q, **kwargs)


# planning

@dataclass(frozen=True)
class CountResult:
    value: int | Fraction
    exact: bool
    method: str  # an algorithm id, "brute-force" or "karp-luby"
    setting: Setting
    problem: Problem
    exact_verdict: ExactVerdict
    approx_verdict: ApproxVerdict
    report: approx.EstimateReport | None = None


def plan_and_count(D: IncompleteDatabase, q, problem=COUNT_VAL, mode: str = "auto", *,
                   epsilon: float = 0.1, delta: float = 0.25, seed: int = 0,
                   caps: Caps = DEFAULT_CAPS, jobs: int | None = None) -> CountResult:
    """Count with the best available method.

    auto: the exact algorithm when the verdict is tractable; otherwise the
    Karp-Luby estimator for valuation counting; otherwise brute force
    within the valuation cap.
    """
    if mode not in ("auto", "exact", "brute", "approx"):
        raise ValueError(f"unknown mode {mode!r}")
    problem = Problem.parse(problem) if not isinstance(problem, Problem) else problem
    uq = as_union(q)
    if not uq.is_boolean:
        raise ValueError("query has free variables; substitute a tuple first")
    check_schema(D, uq)
    setting = Setting.of(D)
    try:
        verdict = classify_exact(uq, setting, problem)
    except CapabilityError as exc:
        verdict = ExactVerdict("unknown", None, (str(exc),))
    approx_verdict = classify_approx(uq, setting, problem)

    def result(value, exact, method, report=None):
        return CountResult(value, exact, method, setting, problem, verdict, approx_verdict, report)

    def brute():
        counter = oracle.brute_val if problem.is_val else oracle.brute_comp
        return result(counter(D, uq, problem.negated, caps.valuation_cap, jobs), True, "brute-force")

    def exact():
        if problem.negated and not problem.is_val:
            value = count_comp_uniform_unary(D, uq.single(), caps.relation_cap, satisfied=False)
            return result(value, True, verdict.algorithm)
        value = run_algorithm(verdict.algorithm, D, uq.single(), caps)
        if problem.negated:
            value = total_valuations(D) - value
        return result(value, True, verdict.algorithm)

    def estimate():
        if not problem.is_val:
            raise CapabilityError("the estimator covers valuation counting only; FPRAS for "
                                  f"completion counting here: {approx_verdict.describe()}")
        if problem.negated:
            raise CapabilityError("the estimator approximates counts for q, not for its negation")
        rep = approx.karp_luby_estimate(D, uq, epsilon, delta, seed, caps.witness_cap, jobs or 1)
        return result(rep.estimate, rep.exact, "karp-luby", rep)

    if mode == "brute":
        return brute()
    if mode == "approx":
        return estimate()
    if mode == "exact":
        if not verdict.tractable:
            raise HardnessError(f"no exact polynomial algorithm: {verdict.describe()}")
        return exact()
    if verdict.tractable:
        try:
            return exact()
        except CapabilityError as exc:
            log.info("exact algorithm %s declined: %s", verdict.algorithm, exc)
    if problem.is_val and not problem.negated:
        return estimate()
    try:
        return brute()
    except ResourceError as exc:
        raise ResourceError(f"{exc}; exact verdict {verdict.describe()}, "
                            f"approximation {approx_verdict.describe()}") from None
