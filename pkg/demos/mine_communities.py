"""
Mining super-peer communities
=============================

Each super-peer is a transaction whose items are the query components its
peers can answer. Closed frequent patterns group super-peers that share
expertise; the greedy selection keeps the most interesting ones.
"""

from p2proute.mining import MiningParams, builtin_dataset, format_cluster, frequent_closed_itemsets, select_clusters

# the eight-super-peer toy dataset that ships with the package
d1 = builtin_dataset("d1")
for tid, items in d1.transactions:
    print(tid, " ".join(sorted(items)))

# every closed pattern present in at least 20% of the super-peers
print("\nclosed patterns:")
for c in frequent_closed_itemsets(d1, 0.2):
    print(" ", format_cluster(c))

# greedy selection, each new cluster must bring one unclassified super-peer
print("\nselected communities:")
for c in select_clusters(d1, MiningParams(minfr=0.2, m_overlap=1)):
    print(" ", format_cluster(c), f"(homogeneity {c.homogeneity}, concentration {c.concentration})")
