"""Incomplete databases, valuations and ground databases.

Nulls and constants are both identified by plain names; a null is written
with a leading ``?`` only in the text format. Domains map null names to sets
of constant names.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import DomainViolation, ParseError

NAME_RE = re.compile(r"[A-Za-z0-9_]+")

Valuation = Mapping[str, str]
GroundFact = tuple[str, tuple[str, ...]]


def _check_name(name: str, what: str) -> str:
    if not isinstance(name, str) or not NAME_RE.fullmatch(name):
        raise ValueError(f"invalid {what} name {name!r}")
    return name


@dataclass(frozen=True, order=True)
class Term:
    kind: str  # "const" or "null"
    name: str

    def __post_init__(self):
        if self.kind not in ("const", "null"):
            raise ValueError(f"unknown term kind {self.kind!r}")
        _check_name(self.name, self.kind)

    @property
    def is_null(self) -> bool:
        return self.kind == "null"

    def __str__(self):
        return "?" + self.name if self.is_null else self.name


def const(name: str) -> Term:
    return Term("const", name)


def null(name: str) -> Term:
    return Term("null", name)


@dataclass(frozen=True)
class Fact:
    relation: str
    args: tuple[Term, ...]

    def __post_init__(self):
        _check_name(self.relation, "relation")
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError(f"fact over {self.relation} has no arguments")

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def nulls(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.args if t.is_null)

    @property
    def is_ground(self) -> bool:
        return not any(t.is_null for t in self.args)

    def __str__(self):
        return f"{self.relation}({', '.join(map(str, self.args))})"


def fact(relation: str, *args) -> Fact:
    """Build a fact from strings: '?x' is a null, anything else a constant."""
    terms = []
    for a in args:
        if isinstance(a, Term):
            terms.append(a)
        elif a.startswith("?"):
            terms.append(null(a[1:]))
        else:
            terms.append(const(a))
    return Fact(relation, tuple(terms))


class DomainAssignment:
    """Either one shared domain (uniform) or a domain per null."""

    __slots__ = ("mode", "_shared", "_per_null")

    def __init__(self, mode: str, shared=None, per_null=None):
        if mode not in ("uniform", "per-null"):
            raise ValueError(f"unknown domain mode {mode!r}")
        self.mode = mode
        self._shared = None
        self._per_null: dict[str, frozenset[str]] = {}
        if mode == "uniform":
            self._shared = frozenset(_check_name(c, "constant") for c in shared)
            if not self._shared:
                raise DomainViolation("uniform domain is empty")
        else:
            for n, values in dict(per_null or {}).items():
                values = frozenset(_check_name(c, "constant") for c in values)
                if not values:
                    raise DomainViolation(f"null ?{n} has an empty domain")
                self._per_null[_check_name(n, "null")] = values

    @classmethod
    def uniform(cls, values: Iterable[str]) -> "DomainAssignment":
        return cls("uniform", shared=values)

    @classmethod
    def per_null(cls, mapping: Mapping[str, Iterable[str]]) -> "DomainAssignment":
        return cls("per-null", per_null=mapping)

    @property
    def shared(self) -> frozenset[str] | None:
        return self._shared

    def covers(self, name: str) -> bool:
        return self.mode == "uniform" or name in self._per_null

    def of(self, name: str) -> frozenset[str]:
        if self.mode == "uniform":
            return self._shared
        try:
            return self._per_null[name]
        except KeyError:
            raise DomainViolation(f"null ?{name} has no domain") from None

    def to_per_null(self, nulls: Iterable[str]) -> "DomainAssignment":
        return DomainAssignment.per_null({n: self.of(n) for n in nulls})

    def _key(self):
        if self.mode == "uniform":
            return ("uniform", self._shared)
        return ("per-null", frozenset(self._per_null.items()))

    def __eq__(self, other):
        return isinstance(other, DomainAssignment) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.mode == "uniform":
            return f"DomainAssignment.uniform({sorted(self._shared)})"
        return f"DomainAssignment.per_null({ {k: sorted(v) for k, v in self._per_null.items()} })"


class IncompleteDatabase:
    """A set of facts over constants and nulls plus a domain for every null.

    Duplicate facts are rejected here; the text parser merges them before
    construction. Instances are treated as immutable.
    """

    def __init__(self, facts: Iterable[Fact], domains: DomainAssignment):
        facts = tuple(facts)
        if len(set(facts)) != len(facts):
            dup = next(f for f, c in Counter(facts).items() if c > 1)
            raise ValueError(f"duplicate fact {dup}")
        arity: dict[str, int] = {}
        for f in facts:
            if arity.setdefault(f.relation, f.arity) != f.arity:
                raise ValueError(f"relation {f.relation} used with arities "
                                 f"{arity[f.relation]} and {f.arity}")
        self.facts = facts
        self.domains = domains
        self.arities = arity
        occ = Counter(n for f in facts for n in f.nulls)
        self._occurrences = occ
        self.nulls: tuple[str, ...] = tuple(sorted(occ))
        for n in self.nulls:
            if not domains.covers(n):
                raise DomainViolation(f"null ?{n} has no domain")
        self._by_rel: dict[str, tuple[Fact, ...]] = {}
        for f in facts:
            self._by_rel.setdefault(f.relation, ())
            self._by_rel[f.relation] += (f,)

    @property
    def relations(self) -> tuple[str, ...]:
        return tuple(sorted(self.arities))

    def facts_of(self, relation: str) -> tuple[Fact, ...]:
        return self._by_rel.get(relation, ())

    def domain(self, name: str) -> frozenset[str]:
        return self.domains.of(name)

    def occurrences(self, name: str) -> int:
        return self._occurrences.get(name, 0)

    @property
    def constants(self) -> frozenset[str]:
        return frozenset(t.name for f in self.facts for t in f.args if not t.is_null)

    @property
    def is_codd(self) -> bool:
        return is_codd(self)

    @property
    def is_uniform(self) -> bool:
        if self.domains.mode == "uniform":
            return True
        return len({self.domain(n) for n in self.nulls}) <= 1

    @property
    def uniform_domain(self) -> frozenset[str] | None:
        """The shared domain, or None when nulls have different domains."""
        if self.domains.mode == "uniform":
            return self.domains.shared
        doms = {self.domain(n) for n in self.nulls}
        if len(doms) > 1:
            return None
        return next(iter(doms)) if doms else frozenset()

    def restrict(self, relations: Iterable[str]) -> "IncompleteDatabase":
        keep = set(relations)
        facts = [f for f in self.facts if f.relation in keep]
        if self.domains.mode == "uniform":
            return IncompleteDatabase(facts, self.domains)
        names = {n for f in facts for n in f.nulls}
        return IncompleteDatabase(facts, DomainAssignment.per_null(
            {n: self.domain(n) for n in names}))

    def __eq__(self, other):
        if not isinstance(other, IncompleteDatabase):
            return NotImplemented
        return (set(self.facts) == set(other.facts)
                and self._dom_key() == other._dom_key())

    def _dom_key(self):
        if self.domains.mode == "uniform":
            return self.domains
        return tuple((n, self.domain(n)) for n in self.nulls)

    def __hash__(self):
        return hash((frozenset(self.facts), self._dom_key()))

    def __repr__(self):
        return f"IncompleteDatabase({len(self.facts)} facts, {len(self.nulls)} nulls)"


@dataclass(frozen=True)
class GroundDatabase:
    """A complete database; facts kept sorted so equal sets compare equal."""

    facts: tuple[GroundFact, ...]

    @classmethod
    def from_facts(cls, facts: Iterable[GroundFact]) -> "GroundDatabase":
        return cls(tuple(sorted({(r, tuple(a)) for r, a in facts})))

    def relation(self, name: str) -> frozenset[tuple[str, ...]]:
        return frozenset(a for r, a in self.facts if r == name)

    def index(self) -> dict[str, set[tuple[str, ...]]]:
        out: dict[str, set[tuple[str, ...]]] = {}
        for r, a in self.facts:
            out.setdefault(r, set()).add(a)
        return out

    def __contains__(self, item):
        r, a = item
        return (r, tuple(a)) in set(self.facts)

    def __len__(self):
        return len(self.facts)

    def __iter__(self):
        return iter(self.facts)

    def __str__(self):
        return "{" + ", ".join(f"{r}({', '.join(a)})" for r, a in self.facts) + "}"


def apply_valuation(D: IncompleteDatabase, v: Valuation) -> GroundDatabase:
    for n in D.nulls:
        if n not in v:
            raise DomainViolation(f"valuation does not assign null ?{n}")
        if v[n] not in D.domain(n):
            raise DomainViolation(f"value {v[n]!r} for ?{n} is outside its domain")
    return GroundDatabase.from_facts(
        (f.relation, tuple(v[t.name] if t.is_null else t.name for t in f.args))
        for f in D.facts)


def is_codd(D: IncompleteDatabase) -> bool:
    return all(D.occurrences(n) == 1 for n in D.nulls)


def total_valuations(D: IncompleteDatabase) -> int:
    return math.prod(len(D.domain(n)) for n in D.nulls)


def valuation_space(D: IncompleteDatabase) -> tuple[tuple[str, ...], list[list[str]]]:
    """Null names and sorted domain lists, in enumeration order."""
    return D.nulls, [sorted(D.domain(n)) for n in D.nulls]


def enumerate_valuations(D: IncompleteDatabase, start: int = 0,
                         stop: int | None = None) -> Iterator[dict[str, str]]:
    """Yield valuations in mixed-radix order, first null most significant.

    ``start``/``stop`` select a slice of the index space, so disjoint ranges
    can be handed to separate workers.
    """
    names, doms = valuation_space(D)
    total = math.prod(len(d) for d in doms)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return
    digits = []
    rest = start
    for d in reversed(doms):
        rest, r = divmod(rest, len(d))
        digits.append(r)
    digits.reverse()
    for _ in range(stop - start):
        yield {n: doms[i][digits[i]] for i, n in enumerate(names)}
        i = len(digits) - 1
        while i >= 0:
            digits[i] += 1
            if digits[i] < len(doms[i]):
                break
            digits[i] = 0
            i -= 1


# text format

_FACT_RE = re.compile(r"\s*([A-Za-z0-9_]+)\s*\((.*)\)\s*$")
_TERM_RE = re.compile(r"\??[A-Za-z0-9_]+")


def _parse_term(tok: str, lineno: int, col: int) -> Term:
    if not _TERM_RE.fullmatch(tok):
        raise ParseError(f"bad term {tok!r}", lineno, col)
    return null(tok[1:]) if tok.startswith("?") else const(tok)


def _parse_fact_line(body: str, lineno: int, offset: int) -> Fact:
    m = _FACT_RE.match(body)
    if not m:
        raise ParseError(f"expected a fact R(t1, ...), got {body.strip()!r}", lineno, offset + 1)
    inner = m.group(2)
    col = offset + m.start(2) + 1
    terms = []
    for piece in inner.split(","):
        tok = piece.strip()
        if not tok:
            raise ParseError("empty argument", lineno, col)
        terms.append(_parse_term(tok, lineno, col + piece.index(tok)))
        col += len(piece) + 1
    return Fact(m.group(1), tuple(terms))


def parse_database(text: str) -> IncompleteDatabase:
    facts: dict[Fact, None] = {}
    uniform = None
    per_null: dict[str, frozenset[str]] = {}
    arity: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("@uniform"):
            if uniform is not None:
                raise ParseError("@uniform declared twice", lineno, indent + 1)
            if per_null:
                raise ParseError("@uniform mixed with dom lines", lineno, indent + 1)
            values = stripped[len("@uniform"):].split()
            for v in values:
                if not NAME_RE.fullmatch(v):
                    raise ParseError(f"bad constant {v!r}", lineno, line.index(v) + 1)
            if not values:
                raise ParseError("@uniform needs at least one constant", lineno, indent + 1)
            uniform = frozenset(values)
        elif re.match(r"dom\s", stripped):
            if uniform is not None:
                raise ParseError("dom line mixed with @uniform", lineno, indent + 1)
            m = re.fullmatch(r"dom\s+\?([A-Za-z0-9_]+)\s*:\s*(.*)", stripped)
            if not m:
                raise ParseError("expected 'dom ?n : c1 c2 ...'", lineno, indent + 1)
            values = m.group(2).split()
            if not values:
                raise ParseError(f"empty domain for ?{m.group(1)}", lineno, indent + 1)
            for v in values:
                if not NAME_RE.fullmatch(v):
                    raise ParseError(f"bad constant {v!r}", lineno, line.index(v) + 1)
            if m.group(1) in per_null:
                raise ParseError(f"domain of ?{m.group(1)} declared twice", lineno, indent + 1)
            per_null[m.group(1)] = frozenset(values)
        else:
            f = _parse_fact_line(line, lineno, 0)
            if arity.setdefault(f.relation, f.arity) != f.arity:
                raise ParseError(f"relation {f.relation} used with arities "
                                 f"{arity[f.relation]} and {f.arity}", lineno, indent + 1)
            facts[f] = None
    if uniform is not None:
        domains = DomainAssignment.uniform(uniform)
    else:
        missing = sorted({n for f in facts for n in f.nulls} - set(per_null))
        if missing:
            raise ParseError(f"null ?{missing[0]} has no domain")
        domains = DomainAssignment.per_null(per_null)
    return IncompleteDatabase(facts, domains)


def format_database(D: IncompleteDatabase) -> str:
    lines = []
    if D.domains.mode == "uniform":
        lines.append("@uniform " + " ".join(sorted(D.domains.shared)))
    else:
        for n in D.nulls:
            lines.append(f"dom ?{n} : " + " ".join(sorted(D.domain(n))))
    lines.extend(str(f) for f in D.facts)
    return "\n".join(lines) + "\n"


def parse_ground_database(text: str) -> GroundDatabase:
    D = parse_database(text)
    if D.nulls:
        raise ParseError(f"ground database contains null ?{D.nulls[0]}")
    return GroundDatabase.from_facts((f.relation, tuple(t.name for t in f.args))
                                     for f in D.facts)


def format_ground_database(G: GroundDatabase) -> str:
    return "".join(f"{r}({', '.join(a)})\n" for r, a in G.facts)


def load_database(path) -> IncompleteDatabase:
    with open(path) as fh:
        return parse_database(fh.read())
