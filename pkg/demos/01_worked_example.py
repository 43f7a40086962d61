"""Walk through a three-fact database with two nulls: list every valuation,
the completion it produces, and whether S(X,X) holds there.

    python demos/01_worked_example.py
"""

from pathlib import Path

from nullcount import compsem, oracle
from nullcount.exact import plan_and_count
from nullcount.model import GroundDatabase, apply_valuation, enumerate_valuations, load_database
from nullcount.query import cq

D = load_database(Path(__file__).parent / "data" / "fig1.idb")
q = cq("S(X,X)")


def show(G):
    return "{" + ", ".join(f"{r}({', '.join(args)})" for r, args in G.facts) + "}"


print("database:")
for f in D.facts:
    print("  ", f)
for n in D.nulls:
    print(f"   dom(?{n}) = {{{', '.join(sorted(D.domain(n)))}}}")
print()

seen = {}
for v in enumerate_valuations(D):
    G = apply_valuation(D, v)
    holds = oracle.eval(q, G)
    label = seen.setdefault(G, f"C{len(seen) + 1}")
    shown = ", ".join(f"?{n}->{c}" for n, c in sorted(v.items()))
    print(f"  {shown:14}  {label}: {show(G)}  {'satisfies' if holds else '-'}")

print()
val = plan_and_count(D, q, "val")
comp = plan_and_count(D, q, "comp")
print(f"satisfying valuations:  {val.value} via {val.method} ({val.exact_verdict.describe()})")
print(f"satisfying completions: {comp.value} via {comp.method} ({comp.exact_verdict.describe()})")

# Two valuations collapse onto the same completion, which is why the counts differ.
# Membership can also be decided directly, without enumerating anything.
S = GroundDatabase.from_facts([("S", ("a", "a")), ("S", ("a", "b"))])
T = GroundDatabase.from_facts([("S", ("b", "a"))])
for cand in (S, T):
    answer, method = compsem.is_completion(D, cand)
    print(f"is {show(cand)} a completion? {'yes' if answer else 'no'} ({method})")
