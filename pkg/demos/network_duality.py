"""
Max flow and min cut on a small network
=======================================

Four nodes: s feeds a and b, both drain into t, and a spills into b.
The largest flow equals the cheapest cut, here the two arcs out of s.
"""

import itertools
import tempfile
from pathlib import Path

from cheegerflow.maxflow import Cut, Network, cut_capacity, excess, max_flow, min_cut, read_dimacs, write_dimacs

s, a, b, t = range(4)
net = Network.from_arcs(4, s, t, [(s, a, 3), (s, b, 2), (a, t, 2), (b, t, 3), (a, b, 1)])

f, value = max_flow(net)
print("flow value", value)
for (u, v), x in zip(zip(net.tails, net.heads), f.values):
    print(f"  {'sabt'[u]} -> {'sabt'[v]}: {x} / {net.caps[(net.tails == u) & (net.heads == v)][0]}")
print("excess at s, a, b, t:", [excess(net, f, v) for v in range(4)])

###############################################################################
# The source side of the minimum cut is what s still reaches in the
# residual graph. Enumerating every s-t cut confirms it is the cheapest.

cut = min_cut(net, f)
print("min cut source side:", sorted("sabt"[v] for v in cut.nodes))
for extra in itertools.chain.from_iterable(itertools.combinations((a, b), k) for k in range(3)):
    side = Cut(frozenset((s, *extra)))
    print(f"  cut {sorted('sabt'[v] for v in side.nodes)}: capacity {cut_capacity(net, side)}")

###############################################################################
# Networks round-trip through the DIMACS text format.

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "four.max"
    write_dimacs(net, path)
    print(path.read_text())
    assert max_flow(read_dimacs(path))[1] == value
