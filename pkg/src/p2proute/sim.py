"""Workload generation, policy execution and precision/recall accounting.

A run is deterministic: the network, the workload and the configuration
fix every routed message. Relevance ground truth comes from scanning every
peer of the network with the same CAP threshold the routers use.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from ._order import natural_key, sorted_ids
from .hypergraph import from_clusters, minimal_transversals
from .knowledge import DEFAULT_MAX_DEPTH, DEFAULT_MIN_LEAF, QueryLogRecord, train
from .mining import MiningParams, TransactionDataset, select_clusters
from .network import DEFAULT_EPS_ACC, DEFAULT_TTL, Network, Query, cap
from .routing import RoutingOutcome, route_baseline, route_ksp, route_traversal

POLICIES = ("baseline", "ksp", "traversal")

CSV_HEADER = (
    "policy,seed,n_peers,n_sps,n_queries,total_messages,mean_messages,mean_time,precision,recall"
)


class PrerequisiteError(RuntimeError):
    """A policy was run before the index it depends on was built."""


@dataclass(frozen=True)
class SimConfig:
    eps_acc: float = DEFAULT_EPS_ACC
    ttl: int = DEFAULT_TTL
    minfr: float = 0.2
    m_overlap: int = 1
    bootstrap_fraction: float = 0.2
    retrain_every: int = 100
    max_depth: int = DEFAULT_MAX_DEPTH
    min_leaf: int = DEFAULT_MIN_LEAF

    @property
    def mining(self) -> MiningParams:
        return MiningParams(self.minfr, self.m_overlap)


@dataclass
class Workload:
    queries: list[Query]
    ground_truth: dict[str, frozenset[str]]
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        missing = [q.query_id for q in self.queries if q.query_id not in self.ground_truth]
        if missing:
            raise ValueError(f"ground truth missing for {missing[:3]}")

    def split(self, fraction: float) -> tuple[list[Query], list[Query]]:
        """Leading `fraction` of the queries (training) and the rest (evaluation)."""
        cut = int(round(fraction * len(self.queries)))
        if self.queries and fraction > 0:
            cut = min(max(cut, 1), len(self.queries) - 1) if len(self.queries) > 1 else 0
        return self.queries[:cut], self.queries[cut:]


def relevant_peers(net: Network, subject, eps_acc: float) -> frozenset[str]:
    """Exhaustive scan: every peer whose expertise CAP exceeds `eps_acc`."""
    return frozenset(pid for pid, peer in net.peers.items() if cap(peer.expertise, subject) > eps_acc)


def generate_workload(
    net: Network,
    n_queries: int,
    noise: float,
    seed: int,
    eps_acc: float | None = None,
    ttl: int = DEFAULT_TTL,
    universe=None,
) -> Workload:
    """Sample `n_queries` queries from peer expertise.

    Each query is issued by a random peer about 1 to 3 of its own expertise
    elements; every element is swapped for a random `universe` item with
    probability `noise`. The universe defaults to every theme concept and
    expertise element in the network.
    """
    if n_queries < 1:
        raise ValueError("n_queries must be >= 1")
    if not 0 <= noise <= 1:
        raise ValueError("noise must lie in [0, 1]")
    eps = net.eps_acc if eps_acc is None else eps_acc
    rng = random.Random(seed)
    peer_ids = sorted_ids(net.peers)
    if universe is None:
        universe = frozenset().union(*(sp.theme.concepts for sp in net.superpeers.values()))
        universe |= frozenset().union(*(p.expertise for p in net.peers.values()))
    universe = sorted_ids(universe)
    if not universe:
        raise ValueError("universe must be non-empty")
    queries, truth = [], {}
    width = len(str(n_queries))
    for i in range(n_queries):
        origin = rng.choice(peer_ids)
        own = sorted_ids(net.peers[origin].expertise)
        k = rng.randint(1, min(3, len(own)))
        subject = set()
        for item in rng.sample(own, k):
            subject.add(rng.choice(universe) if rng.random() < noise else item)
        q = Query(f"Q{i + 1:0{width}d}", frozenset(subject), origin, ttl)
        queries.append(q)
        truth[q.query_id] = relevant_peers(net, q.subject, eps)
    return Workload(queries, truth, noise, seed)


def expertise_dataset(net: Network, warmup=None) -> TransactionDataset:
    """One transaction per super-peer with members.

    Cold start uses the union of the members' expertise. With a `warmup`
    list of outcomes (paired with their queries as ``(query, outcome)``),
    items are the components of the queries each super-peer answered; if no
    warm-up query was answered anywhere the cold-start items are used.
    """
    answered: dict[str, set[str]] = {}
    for q, outcome in warmup or ():
        for sp in outcome.answering_superpeers:
            answered.setdefault(sp, set()).update(q.subject)
    txs = []
    for sp_id in sorted_ids(net.superpeers):
        if answered:
            items = answered.get(sp_id)
        else:
            items = net.community_expertise(sp_id)
        if items:
            txs.append((sp_id, frozenset(items)))
    return TransactionDataset(tuple(txs))


@dataclass
class TraversalIndex:
    clusters: list
    communities: list[frozenset[str]]
    strategies: list[frozenset[str]]
    profiles: dict[str, frozenset[str]]


def build_traversal_index(net: Network, cfg: SimConfig, warmup=None) -> TraversalIndex:
    dataset = expertise_dataset(net, warmup)
    clusters = select_clusters(dataset, cfg.mining)
    h = from_clusters(clusters, net.superpeers.keys())
    strategies = minimal_transversals(h)
    profiles = {tid: items for tid, items in dataset.transactions}
    return TraversalIndex(clusters, list(h.hyperedges), strategies, profiles)


def log_record(q: Query, outcome: RoutingOutcome) -> QueryLogRecord:
    return QueryLogRecord(q.subject, outcome.answering_superpeers)


def train_ksps(net: Network, records, cfg: SimConfig):
    """Train each KSP on the records issued from its scope (all records if none)."""
    records = list(records)
    if not records:
        raise PrerequisiteError("ksp index: no training queries")
    for ksp_id in sorted_ids(net.ksps):
        ksp = net.ksps[ksp_id]
        own = [r for home, r in records if home in ksp.scope]
        ksp.tree = train(own or [r for _, r in records], cfg.max_depth, cfg.min_leaf)


@dataclass
class MetricsReport:
    policy: str
    n_queries: int
    total_messages: int
    mean_messages_per_query: float
    mean_sim_time: float
    precision: float
    recall: float
    seed: int = 0
    n_peers: int = 0
    n_sps: int = 0
    outcomes: list[RoutingOutcome] = field(default_factory=list, repr=False)

    def csv_row(self) -> str:
        return ",".join(
            [
                self.policy,
                str(self.seed),
                str(self.n_peers),
                str(self.n_sps),
                str(self.n_queries),
                str(self.total_messages),
                f"{self.mean_messages_per_query:.6f}",
                f"{self.mean_sim_time:.6f}",
                f"{self.precision:.6f}",
                f"{self.recall:.6f}",
            ]
        )


def precision_recall(retrieved_by_query, relevant_by_query) -> tuple[float, float]:
    """Micro-averaged precision and recall.

    Pooled over queries: ``sum |R & G| / sum |R|`` and ``sum |R & G| / sum |G|``.
    A query with nothing retrieved adds nothing to precision; one with no
    relevant peer adds nothing to recall. An all-empty denominator yields
    1.0 when the other side is empty too (nothing to find, nothing found)
    and 0.0 otherwise.
    """
    hits = n_retrieved = n_relevant = 0
    for qid, retrieved in retrieved_by_query.items():
        relevant = relevant_by_query[qid]
        retrieved = frozenset(retrieved)
        hits += len(retrieved & relevant)
        n_retrieved += len(retrieved)
        n_relevant += len(relevant)
    if n_retrieved:
        precision = hits / n_retrieved
    else:
        precision = 1.0 if n_relevant == 0 else 0.0
    if n_relevant:
        recall = hits / n_relevant
    else:
        recall = 1.0 if n_retrieved == 0 else 0.0
    return precision, recall


def summarize(policy: str, outcomes, workload: Workload, seed: int = 0, net: Network | None = None) -> MetricsReport:
    outcomes = list(outcomes)
    n = len(outcomes)
    total = sum(len(o.messages) for o in outcomes)
    mean_time = sum(o.sim_time for o in outcomes) / n if n else 0.0
    precision, recall = precision_recall(
        {o.query_id: o.retrieved_peers for o in outcomes}, workload.ground_truth
    )
    return MetricsReport(
        policy=policy,
        n_queries=n,
        total_messages=total,
        mean_messages_per_query=total / n if n else 0.0,
        mean_sim_time=mean_time,
        precision=precision,
        recall=recall,
        seed=seed,
        n_peers=len(net.peers) if net else 0,
        n_sps=len(net.superpeers) if net else 0,
        outcomes=outcomes,
    )


def prepare(net: Network, policy: str, wl: Workload, cfg: SimConfig) -> TraversalIndex | None:
    """Build what `policy` needs: KSP trees (trained in place) or the traversal index.

    KSP trees learn from the bootstrap slice of `wl` routed with the
    baseline policy; each record maps the query components to the
    super-peers that returned answers.
    """
    _check_policy(policy)
    if policy == "ksp":
        bootstrap, _ = wl.split(cfg.bootstrap_fraction)
        records = []
        for q in bootstrap:
            outcome = route_baseline(net, q, cfg.eps_acc)
            records.append((net.home_of(q.origin_peer), log_record(q, outcome)))
        train_ksps(net, records, cfg)
        return None
    if policy == "traversal":
        return build_traversal_index(net, cfg)
    return None


def run(
    net: Network,
    policy: str,
    wl: Workload,
    cfg: SimConfig,
    index: TraversalIndex | None = None,
    seed: int | None = None,
) -> MetricsReport:
    """Route the evaluation slice of `wl` with `policy` and aggregate the metrics.

    Every policy is measured on the same queries: those after the
    bootstrap slice reserved for KSP training. The ``ksp`` policy keeps
    logging its own outcomes and retrains its trees every
    ``cfg.retrain_every`` queries.

    Raises
    ------
    PrerequisiteError
        If the KSP trees are untrained (``ksp``) or `index` is missing
        (``traversal``); see :func:`prepare`.
    """
    _check_policy(policy)
    bootstrap, evaluation = wl.split(cfg.bootstrap_fraction)
    outcomes = []
    if policy == "baseline":
        outcomes = [route_baseline(net, q, cfg.eps_acc) for q in evaluation]
    elif policy == "traversal":
        if index is None or not index.strategies:
            raise PrerequisiteError("traversal index missing: strategies not computed")
        outcomes = [
            route_traversal(net, q, index.strategies, cfg.eps_acc, index.communities, index.profiles)
            for q in evaluation
        ]
    else:
        untrained = [k for k in sorted_ids(net.ksps) if net.ksps[k].tree is None]
        if not net.ksps or untrained:
            raise PrerequisiteError(f"ksp index missing: {', '.join(untrained) or 'no KSP'} untrained")
        records = []
        for q in bootstrap:
            records.append((net.home_of(q.origin_peer), log_record(q, route_baseline(net, q, cfg.eps_acc))))
        for i, q in enumerate(evaluation, start=1):
            outcome = route_ksp(net, q, cfg.eps_acc)
            outcomes.append(outcome)
            records.append((net.home_of(q.origin_peer), log_record(q, outcome)))
            if cfg.retrain_every and i % cfg.retrain_every == 0:
                train_ksps(net, records, cfg)
    return summarize(policy, outcomes, wl, wl.seed if seed is None else seed, net)


def _check_policy(policy: str):
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {', '.join(POLICIES)}")


def run_all(net: Network, wl: Workload, cfg: SimConfig, policies=POLICIES, seed: int | None = None):
    """Prepare and run several policies on one network and workload."""
    reports = {}
    for policy in sorted(policies, key=natural_key):
        index = prepare(net, policy, wl, cfg)
        reports[policy] = run(net, policy, wl, cfg, index, seed)
    return reports
