"""Approximate valuation counting for unions of conjunctive queries.

A satisfying valuation is one that extends a *witness*: a choice of fact per
atom plus the null assignments needed to make the atoms map onto those
facts. The satisfying valuations are therefore a union of cylinders, one per
witness, and the Karp-Luby estimator approximates the size of that union.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ResourceError
from .model import IncompleteDatabase, total_valuations
from .query import Const, as_union

DEFAULT_WITNESS_CAP = 100_000
IE_CAP = 20
SAMPLE_CONSTANT = 3
# elements per batch of the samples x witnesses x nulls comparison tensor
BATCH_BUDGET = 1 << 22


@dataclass(frozen=True)
class Witness:
    disjunct: int
    facts: tuple[int, ...]  # index into D.facts, one per atom
    h: tuple[tuple[str, str], ...]  # variable -> constant, sorted
    forced: tuple[tuple[str, str], ...]  # null -> constant, sorted
    cylinder_size: int


@dataclass(frozen=True)
class EstimateReport:
    estimate: Fraction
    epsilon: float
    delta: float
    samples: int
    seed: int
    witness_count: int
    union_bound: int  # sum of cylinder sizes
    exact: bool = False


def _unify(atom, fact, h, forced, D):
    """All ways to extend (h, forced) so that atom maps onto fact."""
    out = []

    def rec(i, h, forced):
        if i == len(atom.args):
            out.append((h, forced))
            return
        arg, t = atom.args[i], fact.args[i]
        if isinstance(arg, Const):
            want = arg.name
        else:
            want = h.get(arg.name)
        if want is None:
            # unbound variable
            if not t.is_null:
                rec(i + 1, {**h, arg.name: t.name}, forced)
            elif t.name in forced:
                rec(i + 1, {**h, arg.name: forced[t.name]}, forced)
            else:
                for v in sorted(D.domain(t.name)):
                    rec(i + 1, {**h, arg.name: v}, {**forced, t.name: v})
            return
        if not t.is_null:
            if t.name == want:
                rec(i + 1, h, forced)
        elif t.name in forced:
            if forced[t.name] == want:
                rec(i + 1, h, forced)
        elif want in D.domain(t.name):
            rec(i + 1, h, {**forced, t.name: want})

    rec(0, h, forced)
    return out


def enumerate_witnesses(D: IncompleteDatabase, q, cap: int = DEFAULT_WITNESS_CAP) -> list[Witness]:
    q = as_union(q)
    if not q.is_boolean:
        raise ValueError("substitute free variables before counting")
    total = total_valuations(D)
    index = {i: f for i, f in enumerate(D.facts)}
    by_rel: dict[str, list[int]] = {}
    for i, f in index.items():
        by_rel.setdefault(f.relation, []).append(i)
    out: list[Witness] = []
    for di, cq in enumerate(q.disjuncts):
        atoms = cq.atoms

        def rec(k, chosen, h, forced):
            if k == len(atoms):
                size = total
                for n in forced:
                    size //= len(D.domain(n))
                out.append(Witness(di, tuple(chosen), tuple(sorted(h.items())),
                                   tuple(sorted(forced.items())), size))
                if len(out) > cap:
                    raise ResourceError(f"more than {cap} witnesses (witness cap)")
                return
            for j in by_rel.get(atoms[k].relation, ()):
                f = index[j]
                if f.arity != atoms[k].arity:
                    continue
                for h2, f2 in _unify(atoms[k], f, h, forced, D):
                    rec(k + 1, chosen + [j], h2, f2)

        rec(0, [], {}, {})
    return out


def exact_union_by_ie(witnesses: list[Witness], D: IncompleteDatabase) -> int:
    """Size of the union of witness cylinders by inclusion-exclusion.

    Exponential in the number of witnesses; subsets whose forced maps
    conflict are pruned together with all their supersets.
    """
    if len(witnesses) > IE_CAP:
        raise ResourceError(f"{len(witnesses)} witnesses exceed the inclusion-exclusion cap {IE_CAP}")
    total = total_valuations(D)
    maps = [dict(w.forced) for w in witnesses]

    def size(forced):
        s = total
        for n in forced:
            s //= len(D.domain(n))
        return s

    def rec(start, merged, depth):
        acc = 0
        for i in range(start, len(maps)):
            m = merged
            ok = True
            for n, v in maps[i].items():
                if m.get(n, v) != v:
                    ok = False
                    break
            if not ok:
                continue
            m = {**merged, **maps[i]}
            sign = 1 if depth % 2 == 0 else -1
            acc += sign * size(m) + rec(i + 1, m, depth + 1)
        return acc

    return rec(0, {}, 0)


def sample_count(n_witnesses: int, epsilon: float, delta: float,
                 constant: float = SAMPLE_CONSTANT) -> int:
    return math.ceil(constant * n_witnesses * math.log(2 / delta) / epsilon ** 2)


class _Sampler:
    def __init__(self, D: IncompleteDatabase, witnesses: list[Witness]):
        nulls = sorted({n for w in witnesses for n, _ in w.forced})
        self.doms = [sorted(D.domain(n)) for n in nulls]
        col = {n: i for i, n in enumerate(nulls)}
        pos = [{v: k for k, v in enumerate(d)} for d in self.doms]
        self.F = np.full((len(witnesses), len(nulls)), -1, dtype=np.int64)
        for i, w in enumerate(witnesses):
            for n, v in w.forced:
                self.F[i, col[n]] = pos[col[n]][v]
        sizes = [w.cylinder_size for w in witnesses]
        self.union_bound = sum(sizes)
        probs = np.array([float(Fraction(s, self.union_bound)) for s in sizes])
        self.probs = probs / probs.sum()
        self.sizes = np.array([len(d) for d in self.doms], dtype=np.int64)
        width = max(1, len(witnesses) * max(1, len(nulls)))
        self.batch = max(64, BATCH_BUDGET // width)

    def accepted(self, n: int, seed_key) -> int:
        rng = np.random.default_rng(seed_key)
        idx = rng.choice(len(self.probs), size=n, p=self.probs)
        if self.F.shape[1] == 0:
            return int(np.sum(idx == 0))
        V = rng.integers(0, self.sizes, size=(n, len(self.sizes)))
        rows = self.F[idx]
        V = np.where(rows >= 0, rows, V)
        F = self.F[None, :, :]
        compatible = np.all((F < 0) | (F == V[:, None, :]), axis=2)
        first = np.argmax(compatible, axis=1)
        return int(np.sum(first == idx))


def _one_run(sampler: _Sampler, m: int, seed: int, run: int, jobs: int) -> int:
    batches = [(b, min(sampler.batch, m - lo)) for b, lo in enumerate(range(0, m, sampler.batch))]

    def work(item):
        b, n = item
        return sampler.accepted(n, [seed, run, b])

    if jobs > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return sum(pool.map(work, batches))
    return sum(map(work, batches))


def karp_luby_estimate(D: IncompleteDatabase, q, epsilon: float = 0.1, delta: float = 0.25,
                       seed: int = 0, witness_cap: int = DEFAULT_WITNESS_CAP,
                       jobs: int = 1, constant: float = SAMPLE_CONSTANT) -> EstimateReport:
    """(epsilon, delta) estimate of the number of valuations satisfying q.

    Each sample picks a witness with probability proportional to its
    cylinder, extends it uniformly, and is accepted when that witness is the
    first one (in enumeration order) whose cylinder contains the valuation.
    The acceptance rate times the sum of cylinder sizes estimates the union.
    For delta below 1/4 the median of independent runs at 1/4 is returned.
    Batches draw from numpy generators keyed by (seed, run, batch), so the
    result does not depend on ``jobs``.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    ws = enumerate_witnesses(D, q, witness_cap)
    N = len(ws)
    bound = sum(w.cylinder_size for w in ws)
    if N == 0:
        return EstimateReport(Fraction(0), epsilon, delta, 0, seed, 0, 0, exact=True)
    if N == 1:
        return EstimateReport(Fraction(ws[0].cylinder_size), epsilon, delta, 0, seed, 1,
                              bound, exact=True)
    total = total_valuations(D)
    if any(w.cylinder_size == total for w in ws):
        # a witness forcing nothing covers every valuation
        return EstimateReport(Fraction(total), epsilon, delta, 0, seed, N, bound, exact=True)
    if delta >= 0.25:
        runs, run_delta = 1, delta
    else:
        runs = math.ceil(8 * math.log(1 / delta))
        runs += 1 - runs % 2
        run_delta = 0.25
    m = sample_count(N, epsilon, run_delta, constant)
    sampler = _Sampler(D, ws)
    estimates = sorted(Fraction(bound * _one_run(sampler, m, seed, r, jobs), m)
                       for r in range(runs))
    return EstimateReport(estimates[runs // 2], epsilon, delta, m * runs, seed, N, bound)
