"""Print the complexity verdicts of a handful of small queries in all four
settings, for valuation and completion counting, and show what the planner
does with a hard query.

    python demos/02_dichotomy_tour.py
"""

from nullcount.classify import (CODD, COMP, NAIVE, NON_UNIFORM, UNIFORM, VAL, Setting,
                                classify_approx, classify_exact)
from nullcount.exact import plan_and_count
from nullcount.model import parse_database
from nullcount.query import cq

QUERIES = ["R(X,X)", "R(X), S(X)", "R(X), S(X,Y), T(Y)", "R(X,Y), S(X,Y)", "R(X)", "R(X,Y)",
           "R(X), S(Y)", "R(a), S(b)"]
SETTINGS = [Setting(t, d) for t in (NAIVE, CODD) for d in (NON_UNIFORM, UNIFORM)]


def cell(v):
    if v.tractable:
        return "FP"
    return "#P" if v.hard else "?"


header = f"{'query':22}" + "".join(f"{str(s):>22}" for s in SETTINGS)
for problem in (VAL, COMP):
    print(f"{problem}  (exact / approximable)")
    print(header)
    for text in QUERIES:
        q = cq(text)
        cells = []
        for s in SETTINGS:
            e, a = classify_exact(q, s, problem), classify_approx(q, s, problem)
            approx = {"fpras": "yes", "open": "open"}.get(a.status, "no")
            cells.append(f"{cell(e)} / {approx}")
        print(f"{text:22}" + "".join(f"{c:>22}" for c in cells))
    print()

# A hard query on a naive table: no exact algorithm, so the planner samples.
D = parse_database("""
dom ?1 : a b c
dom ?2 : a b c d
dom ?3 : b c
R(?1)
R(?3)
S(?2)
S(c)
""")
q = cq("R(X), S(X)")
print("R(X), S(X) on a non-uniform naive table:")
print("  verdict:", classify_exact(q, Setting.of(D), VAL).describe())
for seed in range(3):
    r = plan_and_count(D, q, "val", epsilon=0.1, seed=seed)
    print(f"  seed {seed}: {float(r.value):.3f} via {r.method}")
print("  brute force:", plan_and_count(D, q, "val", mode="brute").value)
