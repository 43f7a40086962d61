"""Query AST, text parser and pattern containment for self-join-free queries.

Grammar: disjuncts are separated by ``|`` and atoms by ``,``. Identifiers
starting with an uppercase letter are variables, everything else is a
constant. An optional head ``q(X, ...) :=`` declares the free variables.
"""

from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence, Union

from .compsem import max_bipartite_matching
from .errors import ParseError


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class Const:
    name: str

    def __str__(self):
        return self.name


Arg = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple[Arg, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError(f"atom over {self.relation} has no arguments")

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(a.name for a in self.args if isinstance(a, Var)))

    @property
    def constants(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(a.name for a in self.args if isinstance(a, Const)))

    def var_counts(self) -> Counter:
        return Counter(a.name for a in self.args if isinstance(a, Var))

    def const_counts(self) -> Counter:
        return Counter(a.name for a in self.args if isinstance(a, Const))

    def positions(self, arg: Arg) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.args) if a == arg)

    def __str__(self):
        return f"{self.relation}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class ConjunctiveQuery:
    atoms: tuple[Atom, ...]
    free_vars: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "free_vars", tuple(self.free_vars))
        if not self.atoms:
            raise ValueError("a query needs at least one atom")
        body = set(self.variables)
        for x in self.free_vars:
            if x not in body:
                raise ValueError(f"free variable {x} does not occur in the body")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(x for a in self.atoms for x in a.variables))

    @property
    def constants(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(c for a in self.atoms for c in a.constants))

    @property
    def relations(self) -> tuple[str, ...]:
        return tuple(a.relation for a in self.atoms)

    @property
    def is_self_join_free(self) -> bool:
        return len(set(self.relations)) == len(self.atoms)

    @property
    def is_boolean(self) -> bool:
        return not self.free_vars

    def atom_of(self, relation: str) -> Atom:
        return next(a for a in self.atoms if a.relation == relation)

    def __str__(self):
        body = ", ".join(map(str, self.atoms))
        if self.free_vars:
            return f"q({', '.join(self.free_vars)}) := {body}"
        return body


@dataclass(frozen=True)
class UnionQuery:
    disjuncts: tuple[ConjunctiveQuery, ...]

    def __post_init__(self):
        object.__setattr__(self, "disjuncts", tuple(self.disjuncts))
        if not self.disjuncts:
            raise ValueError("a union needs at least one disjunct")
        if len({len(d.free_vars) for d in self.disjuncts}) > 1:
            raise ValueError("disjuncts have different numbers of free variables")

    @property
    def free_vars(self) -> tuple[str, ...]:
        return self.disjuncts[0].free_vars

    @property
    def is_boolean(self) -> bool:
        return not self.free_vars

    @property
    def relations(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(r for d in self.disjuncts for r in d.relations))

    @property
    def is_single(self) -> bool:
        return len(self.disjuncts) == 1

    def single(self) -> ConjunctiveQuery:
        if len(self.disjuncts) != 1:
            raise ValueError("query is a union of several conjunctive queries")
        return self.disjuncts[0]

    def __str__(self):
        if self.free_vars:
            head = f"q({', '.join(self.free_vars)}) := "
            return head + " | ".join(", ".join(map(str, d.atoms)) for d in self.disjuncts)
        return " | ".join(map(str, self.disjuncts))


def as_union(q) -> UnionQuery:
    if isinstance(q, UnionQuery):
        return q
    if isinstance(q, ConjunctiveQuery):
        return UnionQuery((q,))
    if isinstance(q, str):
        return parse_query(q)
    raise TypeError(f"not a query: {q!r}")


# parsing

_TOKEN_RE = re.compile(r"\s+|(?P<op>:=|[(),|])|(?P<id>[A-Za-z0-9_]+)")


def _tokenize(text: str):
    pos, line, line_start = 0, 1, 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        if m.lastgroup:
            out.append((m.lastgroup, m.group(m.lastgroup), line, pos - line_start + 1))
        chunk = m.group(0)
        if "\n" in chunk:
            line += chunk.count("\n")
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    out.append(("end", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind, value=None):
        tok = self.toks[self.i]
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want!r}, got {got!r}", tok[2], tok[3])
        self.i += 1
        return tok

    def atom(self, allow_empty=False):
        name = self.take("id")
        self.take("op", "(")
        args = []
        if allow_empty and self.peek()[1] == ")":
            self.take("op", ")")
            return name, args
        while True:
            tok = self.take("id")
            args.append(tok)
            if self.peek()[1] == ",":
                self.take("op", ",")
                continue
            self.take("op", ")")
            return name, args

    def parse(self) -> UnionQuery:
        head = None
        first = self.atom(allow_empty=True)
        if self.peek()[1] == ":=":
            self.take("op", ":=")
            head = first
            first = None
        elif not first[1]:
            tok = first[0]
            raise ParseError(f"atom {tok[1]} has no arguments", tok[2], tok[3])
        bodies = [[first] if first else []]
        if first is None:
            bodies[0].append(self.atom())
        while True:
            tok = self.peek()
            if tok[1] == ",":
                self.take("op", ",")
                bodies[-1].append(self.atom())
            elif tok[1] == "|":
                self.take("op", "|")
                bodies.append([self.atom()])
            else:
                self.take("end")
                break
        free = []
        if head is not None:
            for tok in head[1]:
                if not _is_var(tok[1]):
                    raise ParseError(f"head argument {tok[1]!r} is not a variable", tok[2], tok[3])
                free.append(tok[1])
            if len(set(free)) != len(free):
                tok = head[0]
                raise ParseError("repeated free variable in head", tok[2], tok[3])
        arity: dict[str, int] = {}
        disjuncts = []
        for body in bodies:
            atoms = []
            for name, args in body:
                if arity.setdefault(name[1], len(args)) != len(args):
                    raise ParseError(f"relation {name[1]} used with arities "
                                     f"{arity[name[1]]} and {len(args)}", name[2], name[3])
                atoms.append(Atom(name[1], tuple(
                    Var(t[1]) if _is_var(t[1]) else Const(t[1]) for t in args)))
            present = {a.name for at in atoms for a in at.args if isinstance(a, Var)}
            for x in free:
                if x not in present:
                    tok = body[0][0]
                    raise ParseError(f"free variable {x} absent from disjunct", tok[2], tok[3])
            disjuncts.append(ConjunctiveQuery(tuple(atoms), tuple(free)))
        return UnionQuery(tuple(disjuncts))


def _is_var(name: str) -> bool:
    return name[0].isupper()


def parse_query(text: str) -> UnionQuery:
    return _Parser(text).parse()


def cq(text: str) -> ConjunctiveQuery:
    """Parse text that must hold a single conjunctive query."""
    return parse_query(text).single()


# patterns

def contains_pattern(q: ConjunctiveQuery, p: ConjunctiveQuery) -> bool:
    """Decide whether p can be obtained from q by deleting atoms and
    argument occurrences, renaming relations and variables, and reordering
    arguments. Constants are never renamed."""
    if len(p.atoms) > len(q.atoms):
        return False
    p_atoms = sorted(p.atoms, key=lambda a: -a.arity)
    p_vc = [a.var_counts() for a in p_atoms]
    p_cc = [a.const_counts() for a in p_atoms]
    q_vc = [a.var_counts() for a in q.atoms]
    q_cc = [a.const_counts() for a in q.atoms]
    p_vars = list(p.variables)
    q_vars = list(q.variables)

    def fits(i, j):
        if p_atoms[i].arity > q.atoms[j].arity:
            return False
        if any(q_cc[j][c] < k for c, k in p_cc[i].items()):
            return False
        # each variable needs some host variable with enough occurrences;
        # distinct variables need distinct hosts
        need = sorted(p_vc[i].values(), reverse=True)
        have = sorted(q_vc[j].values(), reverse=True)
        return len(need) <= len(have) and all(n <= h for n, h in zip(need, have))

    def vars_ok(phi):
        edges = []
        for x in p_vars:
            for y in q_vars:
                if all(q_vc[phi[i]][y] >= p_vc[i][x]
                       for i in range(len(p_atoms)) if x in p_vc[i]):
                    edges.append((x, y))
        return max_bipartite_matching(p_vars, q_vars, edges) == len(p_vars)

    phi: list[int] = []
    used: set[int] = set()

    def search(i):
        if i == len(p_atoms):
            return vars_ok(phi)
        for j in range(len(q.atoms)):
            if j in used or not fits(i, j):
                continue
            phi.append(j)
            used.add(j)
            if search(i + 1):
                return True
            phi.pop()
            used.discard(j)
        return False

    return search(0)


PATTERN_NAMES = {
    "Rxx": "R(x,x)",
    "RxSx": "R(x)∧S(x)",
    "RxSxyTy": "R(x)∧S(x,y)∧T(y)",
    "RxySxy": "R(x,y)∧S(x,y)",
    "Rxy": "R(x,y)",
    "Rx_only": "unary atoms only",
    "Rcc": "R(c,c)",
    "Rcc_distinct": "R(c,c')",
    "atom_with_constant_and_arity_ge2": "R(c,x)",
}

PATTERN_QUERIES = {
    "Rxx": "R(X,X)",
    "RxSx": "R(X), S(X)",
    "RxSxyTy": "R(X), S(X,Y), T(Y)",
    "RxySxy": "R(X,Y), S(X,Y)",
    "Rxy": "R(X,Y)",
}


@dataclass(frozen=True)
class CanonicalPatternReport:
    Rxx: bool
    RxSx: bool
    RxSxyTy: bool
    RxySxy: bool
    Rxy: bool
    Rx_only: bool
    Rcc: bool
    Rcc_distinct: bool
    atom_with_constant_and_arity_ge2: bool
    has_constants: bool = field(default=False, compare=False)

    def present(self) -> list[str]:
        return [f.name for f in fields(self) if f.name != "has_constants" and getattr(self, f.name)]


def canonical_patterns(q: ConjunctiveQuery) -> CanonicalPatternReport:
    atoms = q.atoms
    var_sets = [set(a.variables) for a in atoms]
    rxx = any(max(a.var_counts().values(), default=0) >= 2 for a in atoms)
    rxy = any(len(a.variables) >= 2 for a in atoms)
    rxsx = any(var_sets[i] & var_sets[j]
               for i, j in itertools.combinations(range(len(atoms)), 2))
    rxysxy = any(len(var_sets[i] & var_sets[j]) >= 2
                 for i, j in itertools.combinations(range(len(atoms)), 2))
    rst = False
    for b in range(len(atoms)):
        for a, c in itertools.permutations([i for i in range(len(atoms)) if i != b], 2):
            if any(y != x for x in var_sets[a] & var_sets[b] for y in var_sets[b] & var_sets[c]):
                rst = True
    return CanonicalPatternReport(
        Rxx=rxx,
        RxSx=rxsx,
        RxSxyTy=rst,
        RxySxy=rxysxy,
        Rxy=rxy,
        Rx_only=all(a.arity == 1 for a in atoms),
        Rcc=any(max(a.const_counts().values(), default=0) >= 2 for a in atoms),
        Rcc_distinct=any(len(a.constants) >= 2 for a in atoms),
        atom_with_constant_and_arity_ge2=any(a.constants and a.arity >= 2 for a in atoms),
        has_constants=bool(q.constants),
    )


@dataclass(frozen=True)
class ConnectivityGraph:
    atoms: tuple[Atom, ...]
    edges: dict  # (i, j) with i < j -> frozenset of shared variables

    def neighbors(self, i: int) -> list[int]:
        return sorted({b if a == i else a for a, b in self.edges if i in (a, b)})

    def components(self) -> list[list[int]]:
        seen: set[int] = set()
        comps = []
        for start in range(len(self.atoms)):
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                i = stack.pop()
                comp.append(i)
                for j in self.neighbors(i):
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
            comps.append(sorted(comp))
        return comps


def connectivity_graph(q: ConjunctiveQuery) -> ConnectivityGraph:
    edges = {}
    for i, j in itertools.combinations(range(len(q.atoms)), 2):
        shared = set(q.atoms[i].variables) & set(q.atoms[j].variables)
        if shared:
            edges[(i, j)] = frozenset(shared)
    return ConnectivityGraph(q.atoms, edges)


def substitute(q: ConjunctiveQuery, t: Sequence[str]) -> ConjunctiveQuery:
    t = tuple(t)
    if len(t) != len(q.free_vars):
        raise ValueError(f"expected {len(q.free_vars)} constants, got {len(t)}")
    binding = dict(zip(q.free_vars, t))
    atoms = tuple(Atom(a.relation, tuple(
        Const(binding[x.name]) if isinstance(x, Var) and x.name in binding else x
        for x in a.args)) for a in q.atoms)
    return ConjunctiveQuery(atoms)


def _set_partitions(n: int) -> Iterable[list[int]]:
    """Restricted growth strings of length n."""
    def rec(prefix, top):
        if len(prefix) == n:
            yield list(prefix)
            return
        for b in range(top + 2):
            yield from rec(prefix + [b], max(top, b))
    if n == 0:
        yield []
        return
    yield from rec([0], 0)


def fresh_names(taken: Iterable[str], count: int) -> list[str]:
    taken = set(taken)
    out, i = [], 1
    while len(out) < count:
        name = f"fresh{i}"
        if name not in taken:
            out.append(name)
        i += 1
    return out


def free_var_classes(q: ConjunctiveQuery) -> list[tuple[str, ...]]:
    """One representative tuple per class of tuples that agree up to
    renaming constants outside the query into fresh ones."""
    consts = sorted(q.constants)
    k = len(q.free_vars)
    fresh = fresh_names(consts, k)
    reps = []
    for rgs in _set_partitions(k):
        blocks = max(rgs) + 1 if rgs else 0
        for choice in itertools.product([None] + consts, repeat=blocks):
            named = [c for c in choice if c is not None]
            if len(set(named)) != len(named):
                continue
            values, f = [], iter(fresh)
            for c in choice:
                values.append(c if c is not None else next(f))
            reps.append(tuple(values[b] for b in rgs))
    return reps
