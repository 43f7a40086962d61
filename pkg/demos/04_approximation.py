"""Karp-Luby estimation of satisfying valuations for a query that is hard to
count exactly on naive tables. The satisfying valuations form a union of
cylinders, one per witness; the script prints the witnesses, the exact
union size, and how often the estimate lands within epsilon.

    python demos/04_approximation.py
"""

from fractions import Fraction

from nullcount import approx, oracle
from nullcount.classify import VAL, Setting, classify_approx, classify_exact
from nullcount.model import parse_database, total_valuations
from nullcount.query import cq

D = parse_database("""
dom ?1 : a b c
dom ?2 : b c d
dom ?3 : a d
dom ?4 : a d e
dom ?5 : c e
R(?1, ?2)
R(?3, ?3)
S(?4)
S(?5)
S(b)
""")
q = cq("R(X,Y), S(Y)")
s = Setting.of(D)
print(f"{q} on a {s} table with {total_valuations(D)} valuations")
print("  exact:", classify_exact(q, s, VAL).describe())
print("  approx:", classify_approx(q, s, VAL).describe())

ws = approx.enumerate_witnesses(D, q)
print(f"\n{len(ws)} witnesses:")
for w in ws:
    forced = ", ".join(f"?{n}={c}" for n, c in w.forced) or "nothing"
    print(f"  facts {w.facts}  forces {forced:22} cylinder {w.cylinder_size}")
truth = oracle.brute_val(D, q)
print(f"union by inclusion-exclusion: {approx.exact_union_by_ie(ws, D)}, brute force: {truth}")
print(f"sum of cylinders: {sum(w.cylinder_size for w in ws)}")

print()
for eps in (0.3, 0.1, 0.05):
    hits = 0
    runs = 50
    for seed in range(runs):
        rep = approx.karp_luby_estimate(D, q, eps, 0.25, seed=seed)
        hits += abs(rep.estimate - truth) <= Fraction(eps) * truth
    print(f"epsilon {eps:4}: {rep.samples:6} samples per run, "
          f"within epsilon in {hits}/{runs} runs (last estimate {float(rep.estimate):.2f})")

# Lower delta means the median of several runs.
rep = approx.karp_luby_estimate(D, q, 0.1, 0.01, seed=1)
print(f"\ndelta 0.01: {rep.samples} samples in total, estimate {float(rep.estimate):.2f}")
