"""
Routing strategies from minimal transversals
============================================

Communities become hyperedges over the super-peers. A minimal transversal
touches every community with no redundant member, so sending a query to
one of them reaches every community once.
"""

from p2proute.hypergraph import builtin_hypergraph, format_strategy, minimal_transversals, minimal_transversals_bruteforce
from p2proute.routing import select_strategy

h = builtin_hypergraph("d2_communities")
for edge in h.hyperedges:
    print("community:", format_strategy(edge))

strategies = minimal_transversals(h)
print(f"\n{len(strategies)} strategies, smallest first:")
for s in strategies:
    print(" ", format_strategy(s))

# the incremental algorithm and the exhaustive scan agree
assert strategies == minimal_transversals_bruteforce(h)

# a query entering at SP1 uses the smallest strategy containing SP1
print("\nstrategy for SP1:", format_strategy(select_strategy(strategies, "SP1")))
