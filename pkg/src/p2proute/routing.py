"""Query routing policies over a :class:`~p2proute.network.Network`.

Three policies share one message model:

* the origin peer sends ``QUERY`` to its home super-peer;
* a super-peer that processes the query sends ``FORWARD`` to each member
  whose CAP exceeds ``eps_acc`` and gets a ``RESPONSE`` back from it;
* super-peer to super-peer (and super-peer to KSP) hops are ``FORWARD``;
* a remote super-peer with answers sends one ``RESPONSE`` to the home
  super-peer, which sends the aggregated ``RESPONSE`` to the origin peer.

Every hop takes one time unit and local processing is free, so an
outcome's ``sim_time`` is the arrival time of its last message. The query
TTL bounds the number of overlay hops (super-peer/KSP forwards) on any
causal chain.

Routing never mutates the network.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ._order import canonical_key, natural_key, sorted_ids
from .knowledge import predict
from .network import Network, Query, cap


class Kind(str, Enum):
    QUERY = "QUERY"
    FORWARD = "FORWARD"
    RESPONSE = "RESPONSE"


class RoutingError(RuntimeError):
    pass


class NoStrategiesError(RoutingError):
    pass


@dataclass(frozen=True)
class Message:
    time: int
    src: str
    dst: str
    kind: Kind
    query_id: str

    def __str__(self):
        return f"{self.time} {self.src} {self.dst} {self.kind.value} {self.query_id}"


@dataclass
class RoutingOutcome:
    query_id: str
    policy: str
    messages: list[Message] = field(default_factory=list)
    retrieved: set[tuple[str, str]] = field(default_factory=set)
    sim_time: int = 0
    contacted: list[str] = field(default_factory=list)
    flags: set[str] = field(default_factory=set)

    @property
    def retrieved_peers(self) -> frozenset[str]:
        return frozenset(p for p, _ in self.retrieved)

    @property
    def answering_superpeers(self) -> frozenset[str]:
        return frozenset(sp for _, sp in self.retrieved)

    def trace(self) -> str:
        return "".join(f"{m}\n" for m in self.messages)


class _Trace:
    """Collects messages and enforces single delivery of a query per super-peer."""

    def __init__(self, net: Network, q: Query, policy: str, eps_acc: float):
        self.net = net
        self.q = q
        self.eps_acc = eps_acc
        self.out = RoutingOutcome(q.query_id, policy)
        self.home = net.home_of(q.origin_peer)
        self.seen: set[str] = set()
        self.results_at: dict[str, int] = {}
        self._seq = 0
        self._log: list[tuple[int, int, Message]] = []

    def send(self, t: int, src: str, dst: str, kind: Kind) -> int:
        arrival = t + 1
        self._log.append((arrival, self._seq, Message(arrival, src, dst, kind, self.q.query_id)))
        self._seq += 1
        return arrival

    def deliver(self, t: int, src: str, sp: str, hops: int) -> int | None:
        """Forward the query to `sp`; None when it already saw it or the TTL is spent."""
        if sp in self.seen or hops > self.q.ttl:
            return None
        self.seen.add(sp)
        self.out.contacted.append(sp)
        return self.send(t, src, sp, Kind.FORWARD)

    def answer_locally(self, sp: str, t: int) -> int:
        """Query the relevant members of `sp`; returns when their answers are in."""
        ready = t
        members = self.net.superpeers[sp].rsc
        for pid in sorted_ids(members):
            if cap(members[pid], self.q) > self.eps_acc:
                back = self.send(self.send(t, sp, pid, Kind.FORWARD), pid, sp, Kind.RESPONSE)
                ready = max(ready, back)
                self.out.retrieved.add((pid, sp))
        if ready > t:
            self.results_at[sp] = ready
        return ready

    def process_remote(self, sp: str, t: int):
        ready = self.answer_locally(sp, t)
        if sp in self.results_at:
            self.results_at[sp] = self.send(ready, sp, self.home, Kind.RESPONSE)

    def start(self) -> int:
        self.seen.add(self.home)
        self.out.contacted.append(self.home)
        return self.send(0, self.q.origin_peer, self.home, Kind.QUERY)

    def finish(self) -> RoutingOutcome:
        if self.out.retrieved:
            done = max(self.results_at.values())
            self.send(done, self.home, self.q.origin_peer, Kind.RESPONSE)
        self._log.sort(key=lambda e: (e[0], e[1]))
        self.out.messages = [m for _, _, m in self._log]
        self.out.sim_time = max((m.time for m in self.out.messages), default=0)
        return self.out


def _check_origin(net: Network, q: Query):
    if q.origin_peer not in net.peers:
        raise RoutingError(f"unknown origin peer {q.origin_peer!r}")


def sp_relevance(net: Network, sp_id: str, q: Query) -> float:
    """CAP of a super-peer's published theme description against the query."""
    return cap(net.superpeers[sp_id].theme.concepts, q)


def route_baseline(net: Network, q: Query, eps_acc: float | None = None) -> RoutingOutcome:
    """Semantic routing through the mediation indexes.

    The home super-peer queries its CAP-relevant members, then forwards to
    every neighbour whose theme description is CAP-relevant; each of those
    answers from its own members. There is no further propagation.
    """
    _check_origin(net, q)
    eps = net.eps_acc if eps_acc is None else eps_acc
    tr = _Trace(net, q, "baseline", eps)
    t = tr.start()
    tr.answer_locally(tr.home, t)
    for nbr in sorted_ids(net.superpeers[tr.home].neighbors):
        if sp_relevance(net, nbr, q) > eps:
            arrival = tr.deliver(t, tr.home, nbr, hops=1)
            if arrival is not None:
                tr.process_remote(nbr, arrival)
    return tr.finish()


def route_ksp(net: Network, q: Query, eps_acc: float | None = None) -> RoutingOutcome:
    """Routing through the home super-peer's knowledge super-peer.

    The home super-peer answers locally and hands the query to its KSP, which
    forwards it to every super-peer its decision tree predicts. A KSP with no
    trained tree falls back to :func:`route_baseline`; the outcome then
    carries the ``"cold-start"`` flag.
    """
    _check_origin(net, q)
    eps = net.eps_acc if eps_acc is None else eps_acc
    home = net.home_of(q.origin_peer)
    ksp_id = net.ksp_of(home)
    if ksp_id is None:
        raise RoutingError(f"super-peer {home} belongs to no KSP scope")
    tree = net.ksps[ksp_id].tree
    if tree is None:
        out = route_baseline(net, q, eps)
        out.policy = "ksp"
        out.flags.add("cold-start")
        return out

    tr = _Trace(net, q, "ksp", eps)
    t = tr.start()
    tr.answer_locally(home, t)
    at_ksp = tr.send(t, home, ksp_id, Kind.FORWARD)
    if q.ttl >= 2:
        for sp in sorted_ids(predict(tree, q.subject)):
            if sp not in net.superpeers:
                continue
            arrival = tr.deliver(at_ksp, ksp_id, sp, hops=2)
            if arrival is not None:
                tr.process_remote(sp, arrival)
    return tr.finish()


def select_strategy(strategies, home_sp: str) -> frozenset[str]:
    """Pick the routing strategy for a query entering at `home_sp`.

    Among strategies containing `home_sp` the smallest wins, ties broken
    lexicographically. If none contains it, the globally smallest strategy is
    returned and the caller has to add an entry hop to reach it.
    """
    strategies = [frozenset(s) for s in strategies]
    if not strategies:
        raise NoStrategiesError("no strategies computed")
    own = [s for s in strategies if home_sp in s]
    return min(own or strategies, key=canonical_key)


def _entry_member(net: Network, home: str, strategy) -> str:
    dist = net.sp_distances(home)
    far = len(net.superpeers) + 1
    return min(strategy, key=lambda sp: (dist.get(sp, far), natural_key(sp)))


def route_traversal(
    net: Network,
    q: Query,
    strategies,
    eps_acc: float | None = None,
    communities=(),
    profiles=None,
) -> RoutingOutcome:
    """1-Strategy routing along one minimal transversal of the community hypergraph.

    The home super-peer answers locally and forwards the query to every
    other member of the strategy picked by :func:`select_strategy`. Each
    strategy member answers locally and relays to the super-peers sharing
    one of its communities (hyperedges of `communities`) whose profile is
    CAP-relevant and which have not seen the query yet.

    `profiles` maps a super-peer to the item set its community was mined
    from; super-peers missing from it fall back to their theme description.
    When the home super-peer is in no strategy, the query first travels to
    the nearest strategy member (flag ``"indirect-entry"``).
    """
    _check_origin(net, q)
    eps = net.eps_acc if eps_acc is None else eps_acc
    tr = _Trace(net, q, "traversal", eps)
    strategy = select_strategy(strategies, tr.home)
    communities = [frozenset(c) for c in communities]
    profiles = profiles or {}

    def relevant(sp: str) -> bool:
        profile = profiles.get(sp) or net.superpeers[sp].theme.concepts
        return cap(profile, q) > eps

    t = tr.start()
    tr.answer_locally(tr.home, t)

    # (super-peer, arrival time, overlay hops so far, sender)
    if tr.home in strategy:
        members = [(tr.home, t, 0)]
        origin_of_fanout, fan_t, fan_hops = tr.home, t, 0
    else:
        tr.out.flags.add("indirect-entry")
        entry = _entry_member(net, tr.home, strategy)
        arrival = tr.deliver(t, tr.home, entry, hops=1)
        if arrival is None:
            return tr.finish()
        tr.process_remote(entry, arrival)
        members = [(entry, arrival, 1)]
        origin_of_fanout, fan_t, fan_hops = entry, arrival, 1

    for sp in sorted_ids(strategy - {origin_of_fanout}):
        arrival = tr.deliver(fan_t, origin_of_fanout, sp, hops=fan_hops + 1)
        if arrival is not None:
            tr.process_remote(sp, arrival)
            members.append((sp, arrival, fan_hops + 1))

    for sp, arrived, hops in sorted(members, key=lambda m: natural_key(m[0])):
        mates = frozenset().union(*(c for c in communities if sp in c)) - {sp}
        for mate in sorted_ids(mates):
            if mate in tr.seen or not relevant(mate):
                continue
            arrival = tr.deliver(arrived, sp, mate, hops=hops + 1)
            if arrival is not None:
                tr.process_remote(mate, arrival)
    return tr.finish()


def format_trace(outcome: RoutingOutcome) -> str:
    return outcome.trace()
