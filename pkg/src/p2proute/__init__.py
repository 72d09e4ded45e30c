"""Query routing for super-peer P2P networks.

Super-peer expertise is mined into overlapping communities, the minimal
transversals of the community hypergraph become routing strategies, and a
deterministic simulator compares them with semantic baseline routing and
decision-tree (knowledge super-peer) routing.
"""
from .hypergraph import (
    Hypergraph,
    from_clusters,
    is_minimal_transversal,
    is_transversal,
    minimal_transversals,
    minimal_transversals_bruteforce,
)
from .knowledge import DecisionTree, QueryLogRecord, predict, train
from .mining import (
    Cluster,
    MiningParams,
    TransactionDataset,
    concentration,
    frequent_closed_itemsets,
    homogeneity,
    select_clusters,
)
from .network import (
    DomainAdvertisement,
    Expertise,
    Network,
    NetworkGenParams,
    Query,
    ThemeDescription,
    advertise,
    build_network,
    cap,
    similarity,
)
from .routing import RoutingOutcome, route_baseline, route_ksp, route_traversal, select_strategy
from .sim import MetricsReport, SimConfig, Workload, expertise_dataset, generate_workload, run

__version__ = "0.1.0"
