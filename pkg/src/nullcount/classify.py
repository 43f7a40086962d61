"""Complexity verdicts for counting valuations and completions.

Exact verdicts follow the pattern-based dichotomies for self-join-free
Boolean conjunctive queries; approximation verdicts say whether a randomized
approximation scheme exists. Verdicts carry the names of the patterns that
witness hardness.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CapabilityError
from .model import IncompleteDatabase
from .query import (PATTERN_NAMES, ConjunctiveQuery, UnionQuery, as_union,
                    canonical_patterns, free_var_classes, substitute)

NAIVE, CODD = "naive", "codd"
NON_UNIFORM, UNIFORM = "non_uniform", "uniform"
COUNT_VAL, COUNT_COMP = "count_valuations", "count_completions"

ALGORITHMS = ("product", "constants-dp", "codd-per-atom", "uniform-naive-ie",
              "uniform-codd-star", "uniform-unary-comp")


@dataclass(frozen=True)
class Setting:
    table_kind: str
    domain_kind: str

    def __post_init__(self):
        if self.table_kind not in (NAIVE, CODD):
            raise ValueError(f"unknown table kind {self.table_kind!r}")
        if self.domain_kind not in (NON_UNIFORM, UNIFORM):
            raise ValueError(f"unknown domain kind {self.domain_kind!r}")

    @classmethod
    def of(cls, D: IncompleteDatabase) -> "Setting":
        return cls(CODD if D.is_codd else NAIVE, UNIFORM if D.is_uniform else NON_UNIFORM)

    def __str__(self):
        return f"{self.table_kind}/{self.domain_kind.replace('_', '-')}"


@dataclass(frozen=True)
class Problem:
    kind: str
    negated: bool = False

    def __post_init__(self):
        if self.kind not in (COUNT_VAL, COUNT_COMP):
            raise ValueError(f"unknown problem {self.kind!r}")

    @classmethod
    def parse(cls, name, negated: bool = False) -> "Problem":
        if isinstance(name, Problem):
            return name
        kinds = {"val": COUNT_VAL, "valuations": COUNT_VAL, COUNT_VAL: COUNT_VAL,
                 "comp": COUNT_COMP, "completions": COUNT_COMP, COUNT_COMP: COUNT_COMP}
        try:
            return cls(kinds[name], negated)
        except KeyError:
            raise ValueError(f"unknown problem {name!r}") from None

    @property
    def is_val(self) -> bool:
        return self.kind == COUNT_VAL

    def __str__(self):
        base = "#Val" if self.is_val else "#Comp"
        return base + ("(not q)" if self.negated else "(q)")


VAL = Problem(COUNT_VAL)
COMP = Problem(COUNT_COMP)


@dataclass(frozen=True)
class ExactVerdict:
    status: str  # tractable | sharp_p_complete | sharp_p_hard | unknown
    algorithm: str | None = None
    witness_patterns: tuple[str, ...] = ()

    @property
    def tractable(self) -> bool:
        return self.status == "tractable"

    @property
    def hard(self) -> bool:
        return self.status in ("sharp_p_complete", "sharp_p_hard")

    def describe(self) -> str:
        label = {"tractable": "FP", "sharp_p_complete": "#P-complete",
                 "sharp_p_hard": "#P-hard", "unknown": "unknown"}[self.status]
        if self.tractable:
            return f"{label} (algorithm {self.algorithm})"
        if self.status == "unknown" and self.witness_patterns:
            return f"{label} ({'; '.join(self.witness_patterns)})"
        if self.witness_patterns:
            word = "pattern" if len(self.witness_patterns) == 1 else "patterns"
            return f"{label} ({word} {', '.join(self.witness_patterns)})"
        return label


@dataclass(frozen=True)
class ApproxVerdict:
    status: str  # fpras | no_fpras_unless_np_eq_rp | open

    def describe(self) -> str:
        return {"fpras": "FPRAS",
                "no_fpras_unless_np_eq_rp": "Never (no FPRAS unless NP = RP)",
                "open": "open"}[self.status]


def _boolean_sjf(q) -> ConjunctiveQuery:
    if isinstance(q, UnionQuery):
        if not q.is_single:
            raise CapabilityError("exact classification covers single conjunctive queries only")
        q = q.single()
    if not q.is_self_join_free:
        raise CapabilityError("exact classification needs a self-join-free query")
    if not q.is_boolean:
        raise CapabilityError("query has free variables; use classify_parametric")
    return q


def _hard(status, flags, pats):
    return ExactVerdict(status, None, tuple(PATTERN_NAMES[f] for f in flags if getattr(pats, f)))


def classify_exact(q, s: Setting, p: Problem) -> ExactVerdict:
    """Verdict for the query itself; a negated problem gets the verdict of q."""
    q = _boolean_sjf(q)
    pats = canonical_patterns(q)
    consts = bool(q.constants)
    if p.is_val:
        if s.domain_kind == NON_UNIFORM:
            if s.table_kind == NAIVE:
                flags = ("Rxx", "RxSx", "Rcc", "Rcc_distinct")
                if any(getattr(pats, f) for f in flags):
                    return _hard("sharp_p_complete", flags, pats)
                return ExactVerdict("tractable", "constants-dp" if consts else "product")
            if pats.RxSx:
                return _hard("sharp_p_complete", ("RxSx",), pats)
            return ExactVerdict("tractable", "codd-per-atom")
        flags = ("RxSxyTy", "RxySxy") if s.table_kind == CODD else ("Rxx", "RxSxyTy", "RxySxy")
        if any(getattr(pats, f) for f in flags):
            return _hard("sharp_p_complete", flags, pats)
        if consts:
            # a uniform database is also a non-uniform one, so the
            # non-uniform algorithms stay sound
            fallback = classify_exact(q, Setting(s.table_kind, NON_UNIFORM), p)
            if fallback.tractable:
                return fallback
            if s.table_kind == NAIVE and pats.Rcc:
                # symmetric edge facts over {0,1}: R(1,1) fails exactly on independent sets
                return _hard("sharp_p_complete", ("Rcc",), pats)
            return ExactVerdict("unknown", None, ("constants under a uniform domain",))
        algo = "uniform-codd-star" if s.table_kind == CODD else "uniform-naive-ie"
        return ExactVerdict("tractable", algo)
    status = "sharp_p_complete" if s.table_kind == CODD else "sharp_p_hard"
    if s.domain_kind == NON_UNIFORM:
        witness = "R(x)" if q.variables else "R(c)"
        return ExactVerdict(status, None, (witness,))
    if pats.Rx_only:
        return ExactVerdict("tractable", "uniform-unary-comp")
    flags = ("Rxx", "Rxy", "Rcc", "Rcc_distinct", "atom_with_constant_and_arity_ge2")
    return _hard(status, flags, pats)


def classify_approx(q, s: Setting, p: Problem) -> ApproxVerdict:
    q = as_union(q)
    if p.is_val:
        return ApproxVerdict("fpras")
    if s.domain_kind == NON_UNIFORM:
        return ApproxVerdict("no_fpras_unless_np_eq_rp")
    unary = all(a.arity == 1 for d in q.disjuncts for a in d.atoms)
    if unary:
        return ApproxVerdict("fpras")
    return ApproxVerdict("no_fpras_unless_np_eq_rp" if s.table_kind == NAIVE else "open")


@dataclass(frozen=True)
class ParametricVerdict:
    per_class: dict
    overall: ExactVerdict


def classify_parametric(q: ConjunctiveQuery, s: Setting, p: Problem) -> ParametricVerdict:
    if isinstance(q, UnionQuery):
        q = q.single()
    if q.is_boolean:
        raise ValueError("query has no free variables; use classify_exact")
    per_class = {rep: classify_exact(substitute(q, rep), s, p) for rep in free_var_classes(q)}
    verdicts = list(per_class.values())
    hard = [v for v in verdicts if v.hard]
    if hard:
        status = ("sharp_p_complete" if any(v.status == "sharp_p_complete" for v in hard)
                  else "sharp_p_hard")
        witness = tuple(dict.fromkeys(w for v in hard for w in v.witness_patterns))
        overall = ExactVerdict(status, None, witness)
    elif any(v.status == "unknown" for v in verdicts):
        overall = ExactVerdict("unknown")
    else:
        algos = {v.algorithm for v in verdicts}
        overall = ExactVerdict("tractable", algos.pop() if len(algos) == 1 else "per-class")
    return ParametricVerdict(per_class, overall)
