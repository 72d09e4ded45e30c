"""Hybrid super-peer network: peers, super-peers, knowledge super-peers and their indexes.

Each super-peer publishes one theme and owns the community of peers whose
expertise best matches it. A super-peer keeps two mediation indexes:

* ``rsc`` (intra-community): member peer -> advertised expertise;
* ``rsi`` (inter-community): neighbour super-peer -> similarity of the two themes.

Knowledge super-peers (KSPs) cover overlapping groups of super-peers and hold
a :class:`~p2proute.knowledge.DecisionTree` once trained.
"""
from __future__ import annotations

import random
from collections import deque
from functools import lru_cache
from dataclasses import dataclass, field
from enum import Enum

from ._order import natural_key, sorted_ids
from .knowledge import DecisionTree

DEFAULT_EPS_ACC = 0.5
DEFAULT_TTL = 4


class ConfigurationError(ValueError):
    pass


class AdvertisementRejected(ValueError):
    """The advertised topic matches no super-peer theme."""


class Relation(str, Enum):
    ROLE = "Role"
    ISA = "IsA"


@dataclass(frozen=True)
class ThemeDescription:
    theme_id: str
    concepts: frozenset[str]
    relations: frozenset[tuple[str, Relation, str]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "concepts", frozenset(self.concepts))
        rels = frozenset((a, Relation(kind), b) for a, kind, b in self.relations)
        object.__setattr__(self, "relations", rels)
        for a, _, b in rels:
            if a not in self.concepts or b not in self.concepts:
                raise ValueError(f"relation {a}->{b} leaves the concept set of {self.theme_id}")
        if _has_cycle([(a, b) for a, kind, b in rels if kind is Relation.ISA]):
            raise ValueError(f"IsA relations of {self.theme_id} form a cycle")


def _has_cycle(edges) -> bool:
    graph: dict[str, list[str]] = {}
    for a, b in edges:
        graph.setdefault(a, []).append(b)
    state: dict[str, int] = {}

    def visit(node) -> bool:
        state[node] = 1
        for nxt in graph.get(node, ()):
            mark = state.get(nxt, 0)
            if mark == 1 or (mark == 0 and visit(nxt)):
                return True
        state[node] = 2
        return False

    return any(state.get(n, 0) == 0 and visit(n) for n in list(graph))


@dataclass(frozen=True)
class Expertise:
    elements: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "elements", frozenset(self.elements))
        if not self.elements:
            raise ValueError("expertise must be non-empty")


@dataclass(frozen=True)
class DomainAdvertisement:
    peer_id: str
    expertise: Expertise
    topic: str
    eps_acc: float = DEFAULT_EPS_ACC
    ttl: int = 1

    def __post_init__(self):
        if not 0 <= self.eps_acc <= 1:
            raise ValueError("eps_acc must lie in [0, 1]")
        if self.ttl < 1:
            raise ValueError("ttl must be >= 1")


@dataclass(frozen=True)
class Query:
    query_id: str
    subject: frozenset[str]
    origin_peer: str
    ttl: int = DEFAULT_TTL

    def __post_init__(self):
        object.__setattr__(self, "subject", frozenset(self.subject))
        if not self.subject:
            raise ValueError("query subject must be non-empty")
        if self.ttl < 1:
            raise ValueError("ttl must be >= 1")


# ------------------------------------------------------------------ similarity

@lru_cache(maxsize=None)
def trigrams(name: str) -> frozenset[str]:
    # identifiers shorter than three characters act as a single gram
    if len(name) < 3:
        return frozenset([name])
    return frozenset(name[i : i + 3] for i in range(len(name) - 2))


@lru_cache(maxsize=1 << 20)
def _trigram_jaccard(a: str, b: str) -> float:
    ga, gb = trigrams(a), trigrams(b)
    return len(ga & gb) / len(ga | gb)


def similarity(s: str, e: str) -> float:
    """Jaccard overlap of character trigrams; 1.0 for identical identifiers."""
    if s == e:
        return 1.0
    # argument order normalised so the cache serves both directions
    return _trigram_jaccard(s, e) if s < e else _trigram_jaccard(e, s)


def exact_similarity(s: str, e: str) -> float:
    return 1.0 if s == e else 0.0


def cap(expertise, query, sim=similarity) -> float:
    """Capacity of `expertise` to answer `query`.

    Mean over the query's subject elements of the best similarity any
    expertise element reaches. Accepts :class:`Expertise`/:class:`Query`
    objects or plain item collections.
    """
    elements = expertise.elements if isinstance(expertise, Expertise) else frozenset(expertise)
    subject = query.subject if isinstance(query, Query) else frozenset(query)
    if not elements or not subject:
        raise ValueError("cap needs a non-empty subject and expertise")
    total = 0.0
    for s in sorted(subject):
        if s in elements:
            total += 1.0
        else:
            total += max(sim(s, e) for e in elements)
    return total / len(subject)


# ------------------------------------------------------------------ network model

@dataclass
class Peer:
    peer_id: str
    expertise: frozenset[str]
    home: str


@dataclass
class SuperPeer:
    sp_id: str
    theme: ThemeDescription
    members: set[str] = field(default_factory=set)
    neighbors: set[str] = field(default_factory=set)
    rsc: dict[str, frozenset[str]] = field(default_factory=dict)
    rsi: dict[str, float] = field(default_factory=dict)


@dataclass
class KnowledgeSuperPeer:
    ksp_id: str
    scope: frozenset[str]
    tree: DecisionTree | None = None


def _edge(a: str, b: str) -> tuple[str, str]:
    return (a, b) if natural_key(a) <= natural_key(b) else (b, a)


@dataclass
class Network:
    peers: dict[str, Peer] = field(default_factory=dict)
    superpeers: dict[str, SuperPeer] = field(default_factory=dict)
    ksps: dict[str, KnowledgeSuperPeer] = field(default_factory=dict)
    links: set[tuple[str, str]] = field(default_factory=set)
    eps_acc: float = DEFAULT_EPS_ACC

    def add_link(self, a: str, b: str):
        if a == b:
            raise ValueError("self links are not allowed")
        self.links.add(_edge(a, b))

    def remove_link(self, a: str, b: str):
        self.links.discard(_edge(a, b))

    def has_link(self, a: str, b: str) -> bool:
        return _edge(a, b) in self.links

    def connect_superpeers(self, a: str, b: str):
        self.superpeers[a].neighbors.add(b)
        self.superpeers[b].neighbors.add(a)
        self.add_link(a, b)
        self._refresh_rsi(a, b)

    def sp_for_topic(self, topic: str) -> str:
        for sp_id in sorted_ids(self.superpeers):
            if self.superpeers[sp_id].theme.theme_id == topic:
                return sp_id
        raise AdvertisementRejected(f"unknown topic {topic!r}")

    def home_of(self, peer_id: str) -> str:
        return self.peers[peer_id].home

    def ksp_of(self, sp_id: str) -> str | None:
        for ksp_id in sorted_ids(self.ksps):
            if sp_id in self.ksps[ksp_id].scope:
                return ksp_id
        return None

    def add_ksp(self, ksp_id: str, scope):
        self.ksps[ksp_id] = KnowledgeSuperPeer(ksp_id, frozenset(scope))
        for sp in scope:
            self.add_link(ksp_id, sp)

    def community_expertise(self, sp_id: str) -> frozenset[str]:
        """Union of the expertise advertised by the super-peer's members."""
        return frozenset().union(*self.superpeers[sp_id].rsc.values())

    def theme_concepts(self, sp_id: str) -> frozenset[str]:
        return self.superpeers[sp_id].theme.concepts

    def _refresh_rsi(self, a: str, b: str):
        sa, sb = self.superpeers[a], self.superpeers[b]
        sa.rsi[b] = cap(sa.theme.concepts, sb.theme.concepts)
        sb.rsi[a] = cap(sb.theme.concepts, sa.theme.concepts)

    def sp_distances(self, source: str) -> dict[str, int]:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            node = queue.popleft()
            for nxt in sorted_ids(self.superpeers[node].neighbors):
                if nxt not in dist:
                    dist[nxt] = dist[node] + 1
                    queue.append(nxt)
        return dist

    def is_connected(self) -> bool:
        nodes = set(self.peers) | set(self.superpeers) | set(self.ksps)
        if not nodes:
            return True
        adj: dict[str, set[str]] = {n: set() for n in nodes}
        for a, b in self.links:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        start = next(iter(sorted_ids(nodes)))
        seen = {start}
        stack = [start]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen >= nodes


def advertise(net: Network, da: DomainAdvertisement) -> Network:
    """Register or refresh a peer's expertise at the super-peer of its topic.

    Upserts the peer's RSC entry, moves it if its topic changed, and
    recomputes the RSI entries between the home super-peer and its
    neighbours. Advertisements are not propagated past the home super-peer.
    The network is updated in place and returned.
    """
    home = net.sp_for_topic(da.topic)
    expertise = da.expertise.elements
    previous = net.peers.get(da.peer_id)
    if previous is not None and previous.home != home:
        old = net.superpeers[previous.home]
        old.members.discard(da.peer_id)
        old.rsc.pop(da.peer_id, None)
        net.remove_link(da.peer_id, previous.home)
    net.peers[da.peer_id] = Peer(da.peer_id, expertise, home)
    sp = net.superpeers[home]
    sp.members.add(da.peer_id)
    sp.rsc[da.peer_id] = expertise
    net.add_link(da.peer_id, home)
    for nbr in sorted_ids(sp.neighbors):
        net._refresh_rsi(home, nbr)
    return net


# ------------------------------------------------------------------ generator

@dataclass(frozen=True)
class NetworkGenParams:
    n_peers: int = 300
    n_superpeers: int = 10
    n_ksps: int = 2
    items_per_theme: int = 20
    shared_items: int | None = None
    themes_per_shared_item: tuple[int, int] | None = None
    expertise_size: tuple[int, int] = (2, 4)
    shared_share: float = 0.25
    extra_sp_links: int | None = None
    eps_acc: float = DEFAULT_EPS_ACC

    @property
    def n_shared(self) -> int:
        return 2 * self.n_superpeers if self.shared_items is None else self.shared_items

    @property
    def shared_spread(self) -> tuple[int, int]:
        # wide enough that bridge items can reach the 20% support threshold
        if self.themes_per_shared_item is None:
            return (2, max(3, round(0.3 * self.n_superpeers)))
        return tuple(self.themes_per_shared_item)

    def validate(self):
        if self.n_superpeers < 1:
            raise ConfigurationError("n_superpeers must be >= 1")
        if self.n_peers < self.n_superpeers:
            raise ConfigurationError("n_peers must be >= n_superpeers")
        if not 1 <= self.n_ksps <= self.n_superpeers:
            raise ConfigurationError("n_ksps must lie in [1, n_superpeers]")
        if self.items_per_theme < 1 or self.n_shared < 0:
            raise ConfigurationError("item pool sizes must be positive")
        lo, hi = self.expertise_size
        if not 1 <= lo <= hi:
            raise ConfigurationError("expertise_size must satisfy 1 <= min <= max")
        lo, hi = self.shared_spread
        if not 1 <= lo <= hi:
            raise ConfigurationError("themes_per_shared_item must satisfy 1 <= min <= max")
        if not 0 <= self.shared_share <= 1:
            raise ConfigurationError("shared_share must lie in [0, 1]")
        if not 0 <= self.eps_acc <= 1:
            raise ConfigurationError("eps_acc must lie in [0, 1]")


_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


def _vocabulary(rng: random.Random, size: int) -> list[str]:
    """`size` distinct pseudo-words of three consonant-vowel syllables."""
    words: list[str] = []
    seen = set()
    while len(words) < size:
        w = "".join(rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(3))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def _ksp_scopes(sp_ids: list[str], n_ksps: int) -> list[list[str]]:
    # contiguous blocks, plus the first super-peer in every scope so scopes pairwise overlap
    size = -(-len(sp_ids) // n_ksps)
    blocks = [sp_ids[i * size : (i + 1) * size] for i in range(n_ksps)]
    blocks = [b for b in blocks if b]
    hub = sp_ids[0]
    return [b if hub in b else [hub] + b for b in blocks]


def build_network(params: NetworkGenParams, seed: int) -> Network:
    """Generate a network deterministically from `params` and `seed`.

    * theme ``j`` owns ``items_per_theme`` private items; each bridge item
      (``2 * n_superpeers`` by default) is added to a few random themes;
    * every peer draws its expertise from one theme, mostly private items
      with a ``shared_share`` chance per extra element of a bridge item;
      the first ``n_superpeers`` peers draw one theme each so no community
      is empty;
    * a peer joins the super-peer maximising CAP of the theme concepts
      against its expertise, ties going to the lowest super-peer id;
    * super-peers form a ring plus random chords; KSP scopes are contiguous
      blocks sharing the first super-peer.
    """
    params.validate()
    rng = random.Random(seed)
    n_sp = params.n_superpeers
    sp_ids = [f"SP{i + 1}" for i in range(n_sp)]

    vocab = _vocabulary(rng, n_sp * params.items_per_theme + params.n_shared)
    private = [
        vocab[j * params.items_per_theme : (j + 1) * params.items_per_theme] for j in range(n_sp)
    ]
    bridge = vocab[n_sp * params.items_per_theme :]
    shared_of: list[list[str]] = [[] for _ in range(n_sp)]
    lo, hi = params.shared_spread
    for item in bridge:
        k = min(n_sp, rng.randint(lo, hi))
        for j in sorted(rng.sample(range(n_sp), k)):
            shared_of[j].append(item)

    net = Network(eps_acc=params.eps_acc)
    for j, sp_id in enumerate(sp_ids):
        concepts = private[j] + shared_of[j]
        # IsA forms a heap-shaped forest over the private items, Role links bridge items in
        relations = [(private[j][k], Relation.ISA, private[j][(k - 1) // 2]) for k in range(1, len(private[j]))]
        relations += [(item, Relation.ROLE, private[j][0]) for item in shared_of[j]]
        theme = ThemeDescription(f"T{j + 1}", frozenset(concepts), frozenset(relations))
        net.superpeers[sp_id] = SuperPeer(sp_id, theme)

    if n_sp > 1:
        for i in range(n_sp):
            net.connect_superpeers(sp_ids[i], sp_ids[(i + 1) % n_sp])
    extra = params.extra_sp_links if params.extra_sp_links is not None else n_sp // 2
    candidates = [
        (sp_ids[a], sp_ids[b])
        for a in range(n_sp)
        for b in range(a + 1, n_sp)
        if not net.has_link(sp_ids[a], sp_ids[b])
    ]
    for a, b in rng.sample(candidates, min(extra, len(candidates))):
        net.connect_superpeers(a, b)

    lo, hi = params.expertise_size
    for i in range(params.n_peers):
        j = i if i < n_sp else rng.randrange(n_sp)
        size = rng.randint(lo, hi)
        chosen = [rng.choice(private[j])]
        while len(chosen) < size:
            pool = shared_of[j] if shared_of[j] and rng.random() < params.shared_share else private[j]
            item = rng.choice(pool)
            if item not in chosen:
                chosen.append(item)
        expertise = frozenset(chosen)
        home = assign_superpeer(net, expertise)
        da = DomainAdvertisement(
            f"P{i + 1}", Expertise(expertise), net.superpeers[home].theme.theme_id, params.eps_acc
        )
        advertise(net, da)

    for k, scope in enumerate(_ksp_scopes(sp_ids, params.n_ksps)):
        net.add_ksp(f"KSP{k + 1}", scope)
    return net


def assign_superpeer(net: Network, expertise) -> str:
    """Super-peer whose theme best covers `expertise`; ties go to the lowest id."""
    best, best_score = None, -1.0
    for sp_id in sorted_ids(net.superpeers):
        score = cap(net.superpeers[sp_id].theme.concepts, expertise)
        if score > best_score:
            best, best_score = sp_id, score
    return best


# ------------------------------------------------------------------ serialization

def _fmt(x: float) -> str:
    return f"{x:.6f}"


def dump_network(net: Network) -> str:
    """Deterministic text dump with PEERS / SUPERPEERS / LINKS / KSPS sections."""
    out = ["PEERS"]
    for pid in sorted_ids(net.peers):
        p = net.peers[pid]
        out.append(f"{pid} {p.home} : {' '.join(sorted_ids(p.expertise))}")
    out.append("SUPERPEERS")
    for sp_id in sorted_ids(net.superpeers):
        sp = net.superpeers[sp_id]
        out.append(f"{sp_id} {sp.theme.theme_id} : {' '.join(sorted_ids(sp.theme.concepts))}")
        out.append(f"  members : {' '.join(sorted_ids(sp.members))}")
        out.append(f"  neighbors : {' '.join(sorted_ids(sp.neighbors))}")
        rsi = " ".join(f"{n}={_fmt(sp.rsi[n])}" for n in sorted_ids(sp.rsi))
        out.append(f"  rsi : {rsi}")
    out.append("LINKS")
    for a, b in sorted(net.links, key=lambda e: (natural_key(e[0]), natural_key(e[1]))):
        out.append(f"{a} {b}")
    out.append("KSPS")
    for ksp_id in sorted_ids(net.ksps):
        ksp = net.ksps[ksp_id]
        state = "trained" if ksp.tree is not None else "untrained"
        out.append(f"{ksp_id} {state} : {' '.join(sorted_ids(ksp.scope))}")
    return "\n".join(out) + "\n"
