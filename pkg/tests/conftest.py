from itertools import combinations
from pathlib import Path

import pytest

from p2proute.hypergraph import Hypergraph, builtin_hypergraph
from p2proute.mining import TransactionDataset, builtin_dataset, support_threshold
from p2proute.network import (
    DomainAdvertisement,
    Expertise,
    Network,
    SuperPeer,
    ThemeDescription,
    advertise,
)

DATA = Path(__file__).resolve().parents[1] / "src" / "p2proute" / "data"
GOLDEN = Path(__file__).with_name("golden")

FIG2_MINTR = [
    {"v1", "v5"},
    {"v1", "v6"},
    {"v2", "v5"},
    {"v4", "v5"},
    {"v2", "v3", "v6"},
    {"v3", "v4", "v6"},
]

D2_COMMUNITIES = [
    {"SP5", "SP6", "SP10"},
    {"SP4", "SP6", "SP7"},
    {"SP2", "SP8", "SP9"},
    {"SP1", "SP2", "SP8"},
    {"SP1", "SP3", "SP5"},
]

# the published strategy list for the five D2 communities
D2_PUBLISHED_STRATEGIES = [
    {"SP1", "SP2", "SP6"}, {"SP1", "SP6", "SP8"}, {"SP1", "SP6", "SP9"},
    {"SP2", "SP3", "SP6"}, {"SP2", "SP4", "SP5"}, {"SP2", "SP5", "SP6"},
    {"SP2", "SP5", "SP7"}, {"SP3", "SP6", "SP8"}, {"SP4", "SP5", "SP8"},
    {"SP5", "SP6", "SP8"}, {"SP5", "SP7", "SP8"},
    {"SP1", "SP2", "SP4", "SP10"}, {"SP1", "SP2", "SP7", "SP10"},
    {"SP1", "SP4", "SP5", "SP9"}, {"SP1", "SP4", "SP8", "SP10"},
    {"SP1", "SP4", "SP9", "SP10"}, {"SP1", "SP5", "SP7", "SP9"},
    {"SP1", "SP7", "SP8", "SP10"}, {"SP1", "SP7", "SP9", "SP10"},
    {"SP2", "SP3", "SP4", "SP10"}, {"SP2", "SP3", "SP7", "SP10"},
    {"SP3", "SP4", "SP8", "SP10"}, {"SP3", "SP7", "SP8", "SP10"},
]


@pytest.fixture
def d1() -> TransactionDataset:
    return builtin_dataset("d1")


@pytest.fixture
def d2() -> TransactionDataset:
    return builtin_dataset("d2")


@pytest.fixture
def fig2() -> Hypergraph:
    return builtin_hypergraph("fig2")


@pytest.fixture
def d2_hypergraph() -> Hypergraph:
    return builtin_hypergraph("d2_communities")


def brute_force_closed(dataset: TransactionDataset, minfr: float):
    """Reference: test every non-empty itemset for frequency and closure."""
    items = sorted(dataset.item_universe)
    threshold = support_threshold(minfr, len(dataset))
    out = set()
    for size in range(1, len(items) + 1):
        for combo in combinations(items, size):
            pattern = frozenset(combo)
            support = frozenset(t for t, its in dataset.transactions if pattern <= its)
            if len(support) < threshold or not support:
                continue
            common = frozenset.intersection(*(dataset.items_of(t) for t in support))
            if common == pattern:
                out.add((pattern, support))
    return out


def brute_force_transversals(edges, vertices):
    """Reference: all subsets that hit every edge and have no hitting proper subset."""
    vertices = sorted(vertices)
    hitting = []
    for size in range(len(vertices) + 1):
        for combo in combinations(vertices, size):
            s = frozenset(combo)
            if all(s & e for e in edges):
                hitting.append(s)
    return {s for s in hitting if not any(o < s for o in hitting)}


def make_network(themes, peers, neighbors=(), eps_acc=0.5) -> Network:
    """Hand-built network: ``themes`` sp -> concepts, ``peers`` pid -> (sp, expertise)."""
    net = Network(eps_acc=eps_acc)
    for sp, concepts in themes.items():
        net.superpeers[sp] = SuperPeer(sp, ThemeDescription(f"T_{sp}", frozenset(concepts)))
    for a, b in neighbors:
        net.connect_superpeers(a, b)
    for pid, (sp, expertise) in peers.items():
        da = DomainAdvertisement(pid, Expertise(frozenset(expertise)), f"T_{sp}", eps_acc)
        advertise(net, da)
    return net
