"""Build each reduction database for a few small graphs (and one formula),
count on the database side by brute force, and compare with the count of
the combinatorial objects it encodes.

    python demos/03_gadget_identities.py
"""

import itertools

from nullcount import compsem, gadgets
from nullcount.model import GroundDatabase
from nullcount.oracle import CNF3, Graph

K3 = Graph(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")])
K4 = Graph(list("abcd"), list(itertools.combinations("abcd", 2)))
PATH = Graph(["a", "b", "c"], [("a", "b"), ("b", "c")], left=["b"])
SQUARE = Graph(list("abcd"), [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")], left=["a", "c"])


def report(out, label):
    left, right = gadgets.identity_sides(out, jobs=1)
    s = out.setting
    mark = "ok" if all(x == right for x in left) else "MISMATCH"
    print(f"  {out.name:14} {label:7} {str(s):18} {' = '.join(map(str, left))} vs {right}  {mark}")


print("identity checks (database side vs reference):")
for label, G in (("K3", K3), ("K4", K4), ("path", PATH)):
    report(gadgets.gadget_3col(G), label)
    report(gadgets.gadget_is_val(G, "RST"), label)
    report(gadgets.gadget_is_val(G, "RxySxy"), label)
    report(gadgets.gadget_vc(G), label)
    report(gadgets.gadget_is_comp(G), label)
    report(gadgets.gadget_3col_comp(G), label)
for label, G in (("path", PATH), ("square", SQUARE)):
    report(gadgets.gadget_pf(G), label)
F = CNF3(3, ((1, 2, 3), (-1, -2, 3)))
for k in (1, 2, 3):
    report(gadgets.gadget_k3sat(F, k), f"F, k={k}")

print()
print("the vertex-cover database for K3:")
for f in gadgets.gadget_vc(K3).database.facts:
    print("  ", f)

# The 3-colouring database has the triangle (plus its fixed R(c,c) fact) as a
# completion exactly when the graph is 3-colourable.
S = GroundDatabase.from_facts([("R", (x, y)) for x in "123" for y in "123" if x != y]
                              + [("R", ("c", "c"))])
print()
for label, G in (("K3", K3), ("K4", K4)):
    answer, method = compsem.is_completion(gadgets.gadget_3col_comp(G).database, S)
    print(f"triangle is a completion of the {label} colouring database: {answer} ({method})")
