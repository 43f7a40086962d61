import itertools
import random

import pytest

from corpus import random_query
from nullcount.errors import ParseError
from nullcount.query import (PATTERN_QUERIES, Atom, ConjunctiveQuery, Const, Var,
                             canonical_patterns, connectivity_graph, contains_pattern, cq,
                             free_var_classes, parse_query, substitute)


def test_parse_basic_forms():
    q = parse_query("R(X,X)")
    assert q.is_single and q.is_boolean
    assert q.single().atoms[0].var_counts() == {"X": 2}
    q = parse_query("q(X) := R(X,c), S(X,Y)")
    assert q.free_vars == ("X",)
    assert q.single().constants == ("c",)
    assert len(parse_query("R(X) | S(X,Y)").disjuncts) == 2


@pytest.mark.parametrize("text", ["R(X", "R()", "", "q(Z) := R(X)", "R(X) S(Y)", "R(X,)"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_query(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as err:
        parse_query("R(X),\n S(Y")
    assert err.value.line == 2


def test_arity_inconsistency_rejected():
    with pytest.raises(ParseError):
        parse_query("R(X) | R(X,Y)")


def test_example_pattern_containment():
    q = cq("R(U,X,U), Sp(Y,Y), T(X,S,Z,S)")
    p = cq("Rp(U,U,Y), Sp(Z)")
    assert contains_pattern(q, p)
    assert contains_pattern(q, q)
    assert not contains_pattern(cq("R(X,Y)"), cq("R(X,X)"))


def test_constants_are_rigid():
    assert contains_pattern(cq("R(c,c,X)"), cq("S(c,c)"))
    assert not contains_pattern(cq("R(c,d)"), cq("S(c,c)"))
    assert contains_pattern(cq("R(c,X)"), cq("S(X)"))


# independent closure of the rewrite operations, for tiny queries

def _canon(atoms):
    """Normal form up to relation renaming, argument order and variable renaming."""
    variables = sorted({a for atom in atoms for a in atom if a[0] == "v"})
    best = None
    for perm in itertools.permutations(range(len(variables))):
        ren = dict(zip(variables, perm))
        form = tuple(sorted(tuple(sorted(("v", ren[a]) if a[0] == "v" else a for a in atom))
                            for atom in atoms))
        if best is None or form < best:
            best = form
    return best


def _encode(q):
    return tuple(tuple(("v", a.name) if isinstance(a, Var) else ("c", a.name) for a in atom.args)
                 for atom in q.atoms)


def _closure(q):
    start = _canon(_encode(q))
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for atoms in frontier:
            cands = []
            if len(atoms) > 1:
                cands += [atoms[:i] + atoms[i + 1:] for i in range(len(atoms))]
            for i, atom in enumerate(atoms):
                if len(atom) > 1:
                    for k in range(len(atom)):
                        cands.append(atoms[:i] + (atom[:k] + atom[k + 1:],) + atoms[i + 1:])
            for c in cands:
                c = _canon(c)
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    return seen


def test_containment_matches_rewrite_closure():
    rng = random.Random(3)
    for _ in range(150):
        q = random_query(rng, max_atoms=3, max_arity=3, const_prob=0.15)
        reachable = _closure(q)
        for _ in range(6):
            p = random_query(rng, max_atoms=2, max_arity=2, const_prob=0.15)
            assert contains_pattern(q, p) == (_canon(_encode(p)) in reachable), (q, p)
        for form in list(reachable)[:5]:
            atoms = tuple(Atom(f"R{i}", tuple(Var(f"V{n}") if k == "v" else Const(n)
                                             for k, n in atom))
                          for i, atom in enumerate(form))
            assert contains_pattern(q, ConjunctiveQuery(atoms))


def _flag_by_checker(q, flag):
    if flag in PATTERN_QUERIES:
        return contains_pattern(q, cq(PATTERN_QUERIES[flag]))
    consts = q.constants
    if flag == "Rcc":
        return any(contains_pattern(q, ConjunctiveQuery((Atom("P", (Const(c), Const(c))),)))
                   for c in consts)
    if flag == "Rcc_distinct":
        return any(contains_pattern(q, ConjunctiveQuery((Atom("P", (Const(c), Const(d))),)))
                   for c in consts for d in consts if c != d)
    raise KeyError(flag)


def test_canonical_flags_agree_with_checker():
    rng = random.Random(11)
    for _ in range(300):
        q = random_query(rng, max_atoms=4, max_arity=3, n_vars=3, const_prob=0.2)
        rep = canonical_patterns(q)
        for flag in list(PATTERN_QUERIES) + ["Rcc", "Rcc_distinct"]:
            assert getattr(rep, flag) == _flag_by_checker(q, flag), (q, flag)


def test_canonical_examples():
    rep = canonical_patterns(cq("R(X,X)"))
    assert rep.Rxx and not rep.Rxy
    rep = canonical_patterns(cq("R(X), S(X,Y), T(Y)"))
    assert rep.RxSxyTy and rep.RxSx
    rep = canonical_patterns(cq("R(X,c,c)"))
    assert rep.Rcc and not rep.Rcc_distinct


def test_connectivity_graph():
    q = cq("R1(X,Y), R2(Y,Z), S1(U), S2(U,V), S3(V), T1(W), T2(W,P), T3(P), T4(P,W)")
    assert len(connectivity_graph(q).components()) == 3
    assert connectivity_graph(cq("R(X), S(Y)")).components() == [[0], [1]]
    g = connectivity_graph(cq("R(X,Y), S(X,Y)"))
    assert g.edges == {(0, 1): frozenset({"X", "Y"})}


def test_substitute():
    q = parse_query("q(X) := R(X,c)").single()
    assert str(substitute(q, ("c",))) == "R(c, c)"
    q = parse_query("q(X,Y) := R(X), S(Y)").single()
    assert str(substitute(q, ("a", "b"))) == "R(a), S(b)"
    assert substitute(cq("R(X)"), ()) == cq("R(X)")
    with pytest.raises(ValueError):
        substitute(q, ("a",))


def test_free_var_classes():
    q = parse_query("q(X) := R(Y,c,X), S(cp,X)").single()
    reps = free_var_classes(q)
    assert len(reps) == 3 and {r[0] for r in reps} >= {"c", "cp"}
    assert len(free_var_classes(parse_query("q(X) := R(X)").single())) == 1
    reps = free_var_classes(parse_query("q(X,Y) := R(X,Y)").single())
    assert len(reps) == 2
    assert {r[0] == r[1] for r in reps} == {True, False}
