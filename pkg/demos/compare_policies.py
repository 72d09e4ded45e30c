"""
Comparing the three routing policies
====================================

Builds one synthetic network, draws a workload from peer expertise and
routes it with the mediation baseline, the knowledge super-peers and the
transversal strategy. Counts are per evaluated query.
"""

from p2proute.network import NetworkGenParams, build_network
from p2proute.sim import CSV_HEADER, SimConfig, generate_workload, run_all

net = build_network(NetworkGenParams(n_peers=300, n_superpeers=10), seed=3)
wl = generate_workload(net, n_queries=200, noise=0.1, seed=3)
reports = run_all(net, wl, SimConfig(), seed=3)

print(CSV_HEADER)
for report in reports.values():
    print(report.csv_row())

# one query, message by message
first = reports["traversal"].outcomes[0]
print(f"\ntraversal trace of {first.query_id} ({len(first.messages)} messages):")
print(first.trace(), end="")
