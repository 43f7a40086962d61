"""Closed-form counts coded independently of the library, for cross-checks."""

from __future__ import annotations

import itertools
from math import comb

from nullcount.model import DomainAssignment, Fact, IncompleteDatabase, const, null


def surj_by_enumeration(n: int, m: int) -> int:
    return sum(1 for f in itertools.product(range(m), repeat=n) if len(set(f)) == m)


def rxsx_falsifying(d: int, n_r: int, n_s: int, c_r: int, c_s: int) -> int:
    """Valuations falsifying R(x),S(x) on a uniform Codd table with n_r null
    R-facts, n_s null S-facts and disjoint constant sets of sizes c_r, c_s
    inside a domain of size d.

    Choose the exact image of the R-nulls: m' values outside both constant
    sets and r' of the R-constants. The S-nulls then avoid the R-constants
    and that image.
    """
    m = d - c_r - c_s
    return sum(comb(m, mp) * comb(c_r, rp) * surj_by_enumeration(n_r, mp + rp)
               * (d - c_r - mp) ** n_s
               for mp in range(m + 1) for rp in range(c_r + 1))


def rxsx_database(d: int, n_r: int, n_s: int, c_r: int, c_s: int) -> IncompleteDatabase:
    dom = [f"k{i}" for i in range(d)]
    facts = [Fact("R", (null(f"r{i}"),)) for i in range(n_r)]
    facts += [Fact("S", (null(f"s{i}"),)) for i in range(n_s)]
    facts += [Fact("R", (const(dom[i]),)) for i in range(c_r)]
    facts += [Fact("S", (const(dom[c_r + i]),)) for i in range(c_s)]
    return IncompleteDatabase(facts, DomainAssignment.uniform(dom))


def rxsx_grid(max_d=5, max_n=3, max_c=2):
    for d in range(1, max_d + 1):
        for n_r, n_s in itertools.product(range(max_n + 1), repeat=2):
            for c_r, c_s in itertools.product(range(max_c + 1), repeat=2):
                if c_r + c_s <= d:
                    yield d, n_r, n_s, c_r, c_s
