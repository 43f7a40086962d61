import random

import pytest

from corpus import random_database
from nullcount.errors import DomainViolation, ParseError
from nullcount.model import (DomainAssignment, Fact, GroundDatabase, IncompleteDatabase,
                             apply_valuation, enumerate_valuations, fact, format_database,
                             is_codd, parse_database, parse_ground_database, total_valuations)

FIG1 = """
dom ?1 : a b c
dom ?2 : a b
S(a, b)
S(?1, a)
S(a, ?2)
"""


@pytest.fixture
def fig1():
    return parse_database(FIG1)


def test_apply_valuation_merges_duplicates(fig1):
    G = apply_valuation(fig1, {"1": "a", "2": "a"})
    assert G.facts == (("S", ("a", "a")), ("S", ("a", "b")))


def test_apply_valuation_without_nulls_is_identity():
    D = parse_database("R(a, b)\nS(c)\n")
    assert apply_valuation(D, {}) == GroundDatabase.from_facts([("R", ("a", "b")), ("S", ("c",))])


def test_apply_valuation_direct_substitution():
    D = parse_database("@uniform a b\nR(?1, ?2)\n")
    assert apply_valuation(D, {"1": "b", "2": "b"}).facts == (("R", ("b", "b")),)


def test_apply_valuation_rejects_bad_assignments(fig1):
    with pytest.raises(DomainViolation):
        apply_valuation(fig1, {"1": "a"})
    with pytest.raises(DomainViolation):
        apply_valuation(fig1, {"1": "a", "2": "c"})


def test_is_codd():
    assert not is_codd(parse_database("@uniform a\nS(?1, ?1)\nS(a, ?2)\n"))
    assert is_codd(parse_database(FIG1))
    assert is_codd(IncompleteDatabase([], DomainAssignment.uniform(["a"])))


def test_total_valuations(fig1):
    assert total_valuations(fig1) == 6
    assert total_valuations(parse_database("R(a)\n")) == 1
    facts = [fact("R", f"?{i}") for i in range(10)]
    assert total_valuations(IncompleteDatabase(facts, DomainAssignment.uniform("abcd"))) == 4 ** 10


def test_enumeration_order_matches_sorted_nulls_and_values(fig1):
    order = [(v["1"], v["2"]) for v in enumerate_valuations(fig1)]
    assert order == [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b"), ("c", "a"), ("c", "b")]
    assert list(enumerate_valuations(parse_database("R(a)\n"))) == [{}]
    assert len(list(enumerate_valuations(parse_database("@uniform x y\nR(?1)\n")))) == 2


def test_enumeration_slices_partition_the_space(fig1):
    whole = list(enumerate_valuations(fig1))
    parts = [v for lo, hi in ((0, 2), (2, 5), (5, 9)) for v in enumerate_valuations(fig1, lo, hi)]
    assert parts == whole


def test_random_properties():
    rng = random.Random(7)
    for _ in range(200):
        D = random_database(rng, {"R": 2, "S": 1}, n_nulls=rng.randint(0, 6),
                            dom_size=rng.randint(1, 4), codd=rng.random() < 0.5,
                            uniform=rng.random() < 0.5)
        vals = list(enumerate_valuations(D))
        assert len({tuple(sorted(v.items())) for v in vals}) == total_valuations(D) == len(vals)
        for v in vals[:10]:
            G = apply_valuation(D, v)
            assert len(G.facts) <= len(D.facts)
            assert G == apply_valuation(D, dict(v))
        if D.is_codd and D.facts:
            smaller = IncompleteDatabase(D.facts[1:], D.domains)
            assert smaller.is_codd


def test_construction_rejects_duplicates_and_arity_clash():
    with pytest.raises(ValueError):
        IncompleteDatabase([fact("R", "a"), fact("R", "a")], DomainAssignment.uniform(["a"]))
    with pytest.raises(ValueError):
        IncompleteDatabase([fact("R", "a"), fact("R", "a", "b")], DomainAssignment.uniform(["a"]))


def test_empty_domain_rejected():
    with pytest.raises(DomainViolation):
        DomainAssignment.per_null({"1": []})
    with pytest.raises(DomainViolation):
        IncompleteDatabase([fact("R", "?1")], DomainAssignment.per_null({}))


def test_parser_merges_duplicates_and_reports_positions():
    D = parse_database("@uniform a\nR(?1)\nR(?1)  # again\n")
    assert len(D.facts) == 1
    with pytest.raises(ParseError) as err:
        parse_database("@uniform a\nR(a,)\n")
    assert err.value.line == 2
    with pytest.raises(ParseError):
        parse_database("@uniform a\ndom ?1 : a\nR(?1)\n")
    with pytest.raises(ParseError):
        parse_database("R(?1)\n")
    with pytest.raises(ParseError):
        parse_database("R(a)\nR(a, b)\n")


def test_format_round_trip(fig1):
    assert parse_database(format_database(fig1)) == fig1
    D = parse_database("@uniform a b\nR(?x, a)\n")
    assert parse_database(format_database(D)) == D


def test_uniform_detection():
    D = parse_database("dom ?1 : a b\ndom ?2 : b a\nR(?1, ?2)\n")
    assert D.is_uniform and D.uniform_domain == frozenset("ab")
    assert not parse_database(FIG1).is_uniform


def test_ground_database_parsing():
    G = parse_ground_database("S(b)\nR(a, b)\n")
    assert G.facts == (("R", ("a", "b")), ("S", ("b",)))
    with pytest.raises(ParseError):
        parse_ground_database("@uniform a\nR(?1)\n")


def test_fact_string():
    assert str(Fact("R", fact("R", "a", "?1").args)) == "R(a, ?1)"
