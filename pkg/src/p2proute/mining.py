"""Closed-pattern mining and overlapping cluster selection over super-peer expertise.

Super-peers are transactions, the query components they can answer are items.
Clusters are frequent closed patterns together with their supporting
transactions; a greedy pass keeps the most interesting ones while bounding the
overlap between them.

Measures are kept as :class:`fractions.Fraction` so ties (which decide the
selection order) are detected exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from ._order import natural_key, set_key, sorted_ids


class DatasetFormatError(ValueError):
    """Raised when a dataset file cannot be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class TransactionDataset:
    transactions: tuple[tuple[str, frozenset[str]], ...]
    item_universe: frozenset[str] = None

    def __post_init__(self):
        txs = tuple((str(tid), frozenset(items)) for tid, items in self.transactions)
        object.__setattr__(self, "transactions", txs)
        universe = self.item_universe
        if universe is None:
            universe = frozenset().union(*(items for _, items in txs))
        object.__setattr__(self, "item_universe", frozenset(universe))

        seen = set()
        for tid, items in txs:
            if tid in seen:
                raise ValueError(f"duplicate transaction id {tid!r}")
            seen.add(tid)
            if not items:
                raise ValueError(f"transaction {tid!r} is empty")
            if not items <= self.item_universe:
                raise ValueError(f"transaction {tid!r} has items outside the universe")

    @classmethod
    def from_mapping(cls, mapping) -> TransactionDataset:
        return cls(tuple((tid, frozenset(items)) for tid, items in mapping.items()))

    def __len__(self):
        return len(self.transactions)

    @property
    def ids(self) -> list[str]:
        return [tid for tid, _ in self.transactions]

    def items_of(self, tid: str) -> frozenset[str]:
        return self._index[tid]

    @property
    def _index(self) -> dict[str, frozenset[str]]:
        # cached lazily; the dataclass is frozen so the dict never goes stale
        try:
            return self.__dict__["_idx"]
        except KeyError:
            idx = dict(self.transactions)
            object.__setattr__(self, "_idx", idx)
            return idx

    def support(self, pattern) -> frozenset[str]:
        pattern = frozenset(pattern)
        return frozenset(tid for tid, items in self.transactions if pattern <= items)

    def item_frequency(self, item: str) -> int:
        return sum(1 for _, items in self.transactions if item in items)


@dataclass(frozen=True)
class Cluster:
    pattern: frozenset[str]
    support_set: frozenset[str]
    homogeneity: Fraction | None = field(default=None, compare=False)
    concentration: Fraction | None = field(default=None, compare=False)

    @property
    def interestingness(self) -> Fraction | None:
        if self.homogeneity is None or self.concentration is None:
            return None
        return (self.homogeneity + self.concentration) / 2

    @property
    def sort_key(self):
        return set_key(self.pattern)

    def __str__(self):
        items = ", ".join(sorted_ids(self.pattern))
        tids = ", ".join(sorted_ids(self.support_set))
        return f"({items}; {tids})"


@dataclass(frozen=True)
class MiningParams:
    minfr: float = 0.2
    m_overlap: int = 1

    def __post_init__(self):
        if not 0 < self.minfr <= 1:
            raise ValueError(f"minfr must lie in (0, 1], got {self.minfr}")
        if int(self.m_overlap) != self.m_overlap or self.m_overlap < 1:
            raise ValueError(f"m_overlap must be a positive integer, got {self.m_overlap}")


def support_threshold(minfr: float, n_transactions: int) -> int:
    # round() guards against 0.2 * 10 == 2.0000000000000004
    return max(1, math.ceil(round(minfr * n_transactions, 9)))


def frequent_closed_itemsets(dataset: TransactionDataset, minfr: float) -> list[Cluster]:
    """All non-empty frequent closed patterns of `dataset` with their support sets.

    Enumeration uses prefix-preserving closure extension (LCM style) over
    transaction bitsets, so infrequent branches are cut as soon as their
    support drops below ``ceil(minfr * |dataset|)``.

    Returns
    -------
    list of Cluster
        Sorted by pattern items; measures are left unset.
    """
    if not 0 < minfr <= 1:
        raise ValueError(f"minfr must lie in (0, 1], got {minfr}")
    n = len(dataset)
    if n == 0:
        return []
    threshold = support_threshold(minfr, n)

    tids = dataset.ids
    items = sorted_ids(dataset.item_universe)
    rank = {item: i for i, item in enumerate(items)}
    # per-item transaction bitmask
    cover = [0] * len(items)
    tx_items = []
    for t, (_, its) in enumerate(dataset.transactions):
        ranks = frozenset(rank[i] for i in its)
        tx_items.append(ranks)
        for r in ranks:
            cover[r] |= 1 << t
    all_tids = (1 << n) - 1

    def closure(mask: int) -> frozenset[int]:
        common = None
        t = 0
        while mask:
            if mask & 1:
                common = tx_items[t] if common is None else common & tx_items[t]
            mask >>= 1
            t += 1
        return common if common is not None else frozenset()

    found: list[tuple[frozenset[int], int]] = []

    def expand(pattern: frozenset[int], mask: int, core: int):
        if pattern:
            found.append((pattern, mask))
        for e in range(core + 1, len(items)):
            if e in pattern:
                continue
            sub = mask & cover[e]
            if sub.bit_count() < threshold:
                continue
            closed = closure(sub)
            # prefix-preserving test: nothing below e may be added by the closure
            if any(r < e and r not in pattern for r in closed):
                continue
            expand(closed, sub, e)

    expand(closure(all_tids), all_tids, -1)

    clusters = []
    for pattern, mask in found:
        support = frozenset(tids[t] for t in range(n) if mask >> t & 1)
        clusters.append(Cluster(frozenset(items[r] for r in pattern), support))
    clusters.sort(key=lambda c: c.sort_key)
    return clusters


def homogeneity(cluster: Cluster, dataset: TransactionDataset) -> Fraction:
    """Share of the supporting transactions' items that the pattern accounts for."""
    total = sum(len(dataset.items_of(t)) for t in cluster.support_set)
    return Fraction(len(cluster.pattern) * len(cluster.support_set), total)


def concentration(cluster: Cluster, dataset: TransactionDataset) -> Fraction:
    """Mean, over pattern items, of the fraction of the item's occurrences inside the cluster."""
    n_support = len(cluster.support_set)
    parts = [Fraction(n_support, dataset.item_frequency(i)) for i in cluster.pattern]
    return sum(parts, Fraction(0)) / len(parts)


def evaluate(cluster: Cluster, dataset: TransactionDataset) -> Cluster:
    return replace(
        cluster,
        homogeneity=homogeneity(cluster, dataset),
        concentration=concentration(cluster, dataset),
    )


def select_clusters(dataset: TransactionDataset, params: MiningParams) -> list[Cluster]:
    """Greedy overlapping clustering of `dataset`.

    The most interesting frequent closed cluster is taken first. Then, while
    some transaction is still unclassified, the most interesting remaining
    cluster that brings at least ``params.m_overlap`` unclassified
    transactions is added. Ties prefer the cluster with fewer already
    classified transactions, then the smallest pattern.

    Transactions that no selected cluster covers are simply left out of the
    result.
    """
    candidates = [evaluate(c, dataset) for c in frequent_closed_itemsets(dataset, params.minfr)]
    universe = frozenset(dataset.ids)
    classified: frozenset[str] = frozenset()
    selected: list[Cluster] = []

    def rank(c: Cluster):
        return (-c.interestingness, len(c.support_set & classified), c.sort_key)

    while candidates and classified != universe:
        if selected:
            eligible = [
                c for c in candidates if len(c.support_set - classified) >= params.m_overlap
            ]
        else:
            eligible = candidates
        if not eligible:
            break
        best = min(eligible, key=rank)
        selected.append(best)
        candidates.remove(best)
        classified |= best.support_set
    return selected


def uncovered(dataset: TransactionDataset, clusters) -> list[str]:
    covered = frozenset().union(*(c.support_set for c in clusters))
    return [tid for tid in dataset.ids if tid not in covered]


# --------------------------------------------------------------------- file I/O

def parse_dataset(text: str) -> TransactionDataset:
    """Parse ``<tid>: <item> <item> ...`` lines; ``#`` starts a comment line."""
    txs = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tid, sep, rest = line.partition(":")
        tid = tid.strip()
        if not sep or not tid or any(ch.isspace() for ch in tid):
            raise DatasetFormatError(f"expected '<id>: <items>', got {raw!r}", lineno)
        items = rest.split()
        if not items:
            raise DatasetFormatError(f"transaction {tid!r} has no items", lineno)
        if tid in seen:
            raise DatasetFormatError(f"duplicate transaction id {tid!r}", lineno)
        seen.add(tid)
        txs.append((tid, frozenset(items)))
    return TransactionDataset(tuple(txs))


def load_dataset(path) -> TransactionDataset:
    return parse_dataset(Path(path).read_text(encoding="utf-8"))


def format_dataset(dataset: TransactionDataset) -> str:
    lines = [f"{tid}: {' '.join(sorted_ids(items))}" for tid, items in dataset.transactions]
    return "\n".join(lines) + ("\n" if lines else "")


def format_cluster(cluster: Cluster) -> str:
    items = " ".join(sorted_ids(cluster.pattern))
    tids = " ".join(sorted_ids(cluster.support_set))
    score = cluster.interestingness
    score = "-" if score is None else f"{float(score):.4f}"
    return f"{{{items}}} ; {{{tids}}} ; {score}"


def builtin_dataset(name: str) -> TransactionDataset:
    """The bundled example datasets, ``"d1"`` and ``"d2"``."""
    path = Path(__file__).with_name("data") / f"{name}.txt"
    return load_dataset(path)


__all__ = [
    "Cluster",
    "DatasetFormatError",
    "MiningParams",
    "TransactionDataset",
    "builtin_dataset",
    "concentration",
    "evaluate",
    "format_cluster",
    "format_dataset",
    "frequent_closed_itemsets",
    "homogeneity",
    "load_dataset",
    "natural_key",
    "parse_dataset",
    "select_clusters",
    "support_threshold",
    "uncovered",
]
