"""Community hypergraphs and their minimal transversals (routing strategies).

Vertices are super-peer ids, hyperedges are the support sets of mined
clusters. A strategy is a minimal transversal: a set of super-peers that
touches every community and from which no member can be dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

from ._order import canonical_key, sorted_ids

Strategy = frozenset

ORACLE_LIMIT = 20


class NoConstraintsError(ValueError):
    """The hypergraph has no hyperedge, so its only transversal is the empty set."""


class OracleTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class Hypergraph:
    vertices: frozenset[str]
    hyperedges: tuple[frozenset[str], ...]

    def __post_init__(self):
        vertices = frozenset(self.vertices)
        edges = []
        seen = set()
        for edge in self.hyperedges:
            edge = frozenset(edge)
            if not edge:
                raise ValueError("hyperedges must be non-empty")
            if not edge <= vertices:
                raise ValueError(f"hyperedge {sorted_ids(edge)} uses unknown vertices")
            if edge not in seen:
                seen.add(edge)
                edges.append(edge)
        edges.sort(key=canonical_key)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "hyperedges", tuple(edges))

    @classmethod
    def from_edges(cls, edges, vertices=None) -> Hypergraph:
        edges = [frozenset(e) for e in edges]
        if vertices is None:
            vertices = frozenset().union(*edges) if edges else frozenset()
        return cls(frozenset(vertices), tuple(edges))


def from_clusters(clusters, all_superpeers) -> Hypergraph:
    """Community hypergraph of a clustering.

    Each distinct support set becomes a hyperedge; every super-peer left out
    by the clustering gets a singleton hyperedge so strategies still reach it.
    """
    vertices = frozenset(all_superpeers)
    edges = []
    for cluster in clusters:
        support = frozenset(cluster.support_set)
        if not support <= vertices:
            raise ValueError(f"cluster {cluster} references unknown super-peers")
        edges.append(support)
    covered = frozenset().union(*edges) if edges else frozenset()
    edges.extend(frozenset([sp]) for sp in sorted_ids(vertices - covered))
    return Hypergraph(vertices, tuple(edges))


def is_transversal(h: Hypergraph, s) -> bool:
    s = frozenset(s)
    return all(s & edge for edge in h.hyperedges)


def is_minimal_transversal(h: Hypergraph, s) -> bool:
    # transversality is monotone, so testing single removals is enough
    s = frozenset(s)
    if not is_transversal(h, s):
        return False
    return not any(is_transversal(h, s - {v}) for v in s)


def _minimize(sets):
    """Drop every set that strictly contains another one."""
    ordered = sorted(set(sets), key=len)
    kept = []
    for s in ordered:
        if not any(k <= s for k in kept):
            kept.append(s)
    return kept


def minimal_transversals(h: Hypergraph) -> list[Strategy]:
    """Every minimal transversal of `h`, via Berge's edge-by-edge algorithm.

    The transversals of the first hyperedge are its single vertices; each
    further hyperedge keeps the sets that already hit it and extends the
    others by one of its vertices, then non-minimal sets are discarded.

    Returns
    -------
    list of frozenset
        Ordered by cardinality, then lexicographically.

    Raises
    ------
    NoConstraintsError
        If `h` has no hyperedge.
    """
    if not h.hyperedges:
        raise NoConstraintsError("no constraints: hypergraph has no hyperedge")
    current = [frozenset([v]) for v in h.hyperedges[0]]
    for edge in h.hyperedges[1:]:
        grown = []
        for t in current:
            if t & edge:
                grown.append(t)
            else:
                grown.extend(t | {v} for v in edge)
        current = _minimize(grown)
    return sorted(current, key=canonical_key)


def minimal_transversals_bruteforce(h: Hypergraph) -> list[Strategy]:
    """Exhaustive reference: scan all vertex subsets by increasing size."""
    if len(h.vertices) > ORACLE_LIMIT:
        raise OracleTooLargeError(
            f"oracle too large: {len(h.vertices)} vertices (limit {ORACLE_LIMIT})"
        )
    if not h.hyperedges:
        raise NoConstraintsError("no constraints: hypergraph has no hyperedge")
    vertices = sorted_ids(h.vertices)
    found = []
    for size in range(1, len(vertices) + 1):
        for combo in combinations(vertices, size):
            s = frozenset(combo)
            if any(f <= s for f in found):
                continue
            if is_transversal(h, s):
                found.append(s)
    return sorted(found, key=canonical_key)


# --------------------------------------------------------------------- file I/O

def parse_hypergraph(text: str) -> Hypergraph:
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            edges.append(frozenset(line.split()))
    return Hypergraph.from_edges(edges)


def load_hypergraph(path) -> Hypergraph:
    return parse_hypergraph(Path(path).read_text(encoding="utf-8"))


def format_hypergraph(h: Hypergraph) -> str:
    return "".join(" ".join(sorted_ids(e)) + "\n" for e in h.hyperedges)


def format_strategy(s) -> str:
    return " ".join(sorted_ids(s))


def builtin_hypergraph(name: str) -> Hypergraph:
    """Bundled hypergraphs: ``"fig2"`` and ``"d2_communities"``."""
    return load_hypergraph(Path(__file__).with_name("data") / f"{name}.txt")
