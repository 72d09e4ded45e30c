"""Decision-tree index used by knowledge super-peers to predict answering super-peers.

Features are item presence in the query's component set. Every super-peer
label gets its own binary tree (binary relevance); :class:`DecisionTree`
fuses them by returning the union of the labels whose tree votes relevant.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from ._order import sorted_ids

DEFAULT_MAX_DEPTH = 12
DEFAULT_MIN_LEAF = 1


class NoTrainingDataError(ValueError):
    pass


@dataclass(frozen=True)
class QueryLogRecord:
    query_components: frozenset[str]
    relevant_superpeers: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "query_components", frozenset(self.query_components))
        object.__setattr__(self, "relevant_superpeers", frozenset(self.relevant_superpeers))
        if not self.query_components:
            raise ValueError("query_components must be non-empty")


@dataclass(frozen=True)
class Node:
    """Binary tree node; a leaf when ``item`` is None.

    Internal nodes route on ``item in query``: ``present`` if so, else ``absent``.
    """

    labels: frozenset[str] = frozenset()
    item: str | None = None
    gain: float = 0.0
    present: Node | None = None
    absent: Node | None = None
    n_records: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.item is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.present.depth(), self.absent.depth())

    def leaf_for(self, query) -> Node:
        node = self
        while not node.is_leaf:
            node = node.present if node.item in query else node.absent
        return node

    def tested_paths(self, prefix=()):
        """Yield the tuple of tested items along each root-to-leaf path."""
        if self.is_leaf:
            yield prefix
            return
        yield from self.present.tested_paths(prefix + (self.item,))
        yield from self.absent.tested_paths(prefix + (self.item,))


def entropy(n_pos: int, n: int) -> float:
    if n == 0 or n_pos == 0 or n_pos == n:
        return 0.0
    p = n_pos / n
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def information_gain(records, label: str, item: str) -> float:
    """Entropy reduction for `label` when splitting `records` on presence of `item`."""
    n = len(records)
    pos = sum(label in r.relevant_superpeers for r in records)
    with_item = [r for r in records if item in r.query_components]
    w_pos = sum(label in r.relevant_superpeers for r in with_item)
    n_with = len(with_item)
    n_without = n - n_with
    children = (n_with / n) * entropy(w_pos, n_with) + (n_without / n) * entropy(
        pos - w_pos, n_without
    )
    return entropy(pos, n) - children


def _grow(records, label, items, depth, max_depth, min_leaf) -> Node:
    n = len(records)
    pos = sum(label in r.relevant_superpeers for r in records)
    # ties between relevant and not relevant resolve towards relevant
    leaf_labels = frozenset([label]) if 2 * pos >= n else frozenset()
    leaf = Node(labels=leaf_labels, n_records=n)
    if pos in (0, n) or depth >= max_depth or n < min_leaf:
        return leaf

    best = None
    for item in items:
        n_with = sum(item in r.query_components for r in records)
        if n_with < min_leaf or n - n_with < min_leaf:
            continue
        gain = information_gain(records, label, item)
        # `items` is naturally sorted, so strict > keeps the smallest id on ties
        if best is None or gain > best[0] + 1e-12:
            best = (gain, item)
    if best is None:
        return leaf
    gain, item = best
    rest = [i for i in items if i != item]
    with_item = [r for r in records if item in r.query_components]
    without = [r for r in records if item not in r.query_components]
    return Node(
        labels=leaf_labels,
        item=item,
        gain=gain,
        present=_grow(with_item, label, rest, depth + 1, max_depth, min_leaf),
        absent=_grow(without, label, rest, depth + 1, max_depth, min_leaf),
        n_records=n,
    )


@dataclass(frozen=True)
class DecisionTree:
    roots: tuple[tuple[str, Node], ...]
    max_depth: int = DEFAULT_MAX_DEPTH

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.roots]

    @property
    def depth(self) -> int:
        return max((root.depth() for _, root in self.roots), default=0)

    def tree_for(self, label: str) -> Node:
        return dict(self.roots)[label]

    def predict(self, query_components) -> frozenset[str]:
        return predict(self, query_components)


def train(log, max_depth: int = DEFAULT_MAX_DEPTH, min_leaf: int = DEFAULT_MIN_LEAF) -> DecisionTree:
    """Fit one information-gain tree per super-peer seen in `log`.

    A node stops splitting when it is pure for its label, reaches
    `max_depth`, holds fewer than `min_leaf` records, or no split leaves at
    least `min_leaf` records on both sides. Impure nodes split even at zero
    gain, so conflict-free logs are fitted exactly at sufficient depth.
    """
    log = list(log)
    if not log:
        raise NoTrainingDataError("no training data")
    if max_depth < 1 or min_leaf < 1:
        raise ValueError("max_depth and min_leaf must be >= 1")
    items = sorted_ids(frozenset().union(*(r.query_components for r in log)))
    labels = sorted_ids(frozenset().union(*(r.relevant_superpeers for r in log)))
    roots = tuple(
        (label, _grow(log, label, items, 0, max_depth, min_leaf)) for label in labels
    )
    return DecisionTree(roots, max_depth)


def predict(tree: DecisionTree, query_components) -> frozenset[str]:
    query = frozenset(query_components)
    out = set()
    for _, root in tree.roots:
        out |= root.leaf_for(query).labels
    return frozenset(out)


def majority_labels(log, item: str, present: bool) -> frozenset[str]:
    """Labels held by at least half the records on one side of an item test."""
    side = [r for r in log if (item in r.query_components) == present]
    counts = Counter(label for r in side for label in r.relevant_superpeers)
    return frozenset(label for label, c in counts.items() if 2 * c >= len(side))


# --------------------------------------------------------------------- file I/O

def parse_query_log(text: str) -> list[QueryLogRecord]:
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        lhs, sep, rhs = line.partition("->")
        if not sep or not lhs.split():
            raise ValueError(f"line {lineno}: expected '<comp> ... -> <sp> ...'")
        records.append(QueryLogRecord(frozenset(lhs.split()), frozenset(rhs.split())))
    return records


def format_query_log(log) -> str:
    lines = []
    for r in log:
        lhs = " ".join(sorted_ids(r.query_components))
        rhs = " ".join(sorted_ids(r.relevant_superpeers))
        lines.append(f"{lhs} -> {rhs}".rstrip())
    return "".join(line + "\n" for line in lines)


def load_query_log(path) -> list[QueryLogRecord]:
    return parse_query_log(Path(path).read_text(encoding="utf-8"))


__all__ = [
    "DecisionTree",
    "Node",
    "NoTrainingDataError",
    "QueryLogRecord",
    "entropy",
    "format_query_log",
    "information_gain",
    "load_query_log",
    "majority_labels",
    "parse_query_log",
    "predict",
    "train",
]
