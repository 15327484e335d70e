"""Stallings graphs of finitely generated subgroups of a free group.

A :class:`CoreGraph` is a folded graph whose edges carry positive generator
labels.  Adjacency is stored in both directions: ``adj[v]["a"]`` is the end
of the ``a``-edge leaving ``v`` and ``adj[v]["A"]`` the start of the ``a``-edge
entering ``v``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import words as W
from .errors import AllTrivial, RankMismatch, TrivialClass


def _fold(n_vertices: int, edges: Iterable[tuple[int, str, int]]):
    """Fold a labelled graph with union-find; returns (adj, vertex map)."""
    parent = list(range(n_vertices))
    adj: list[dict] = [dict() for _ in range(n_vertices)]

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pending: list[tuple[int, int]] = []

    def attach(u, c, v):
        old = adj[u].get(c)
        if old is None:
            adj[u][c] = v
        elif find(old) != find(v):
            pending.append((old, v))

    def drain():
        while pending:
            x, y = pending.pop()
            x, y = find(x), find(y)
            if x == y:
                continue
            keep, gone = min(x, y), max(x, y)
            parent[gone] = keep
            for c, t in adj[gone].items():
                attach(keep, c, find(t))
            adj[gone] = {}

    for u, c, v in edges:
        u, v = find(u), find(v)
        attach(u, c, v)
        attach(v, c.upper(), u)
        drain()

    roots = sorted({find(x) for x in range(n_vertices)})
    index = {r: i for i, r in enumerate(roots)}
    out = [dict() for _ in roots]
    for r in roots:
        for c, t in adj[r].items():
            out[index[r]][c] = index[find(t)]
    return out, [index[find(x)] for x in range(n_vertices)]


def _petal_edges(words: Sequence[str]):
    edges = []
    nv = 1
    for w in words:
        prev = 0
        for k, c in enumerate(w):
            nxt = 0 if k == len(w) - 1 else nv
            if nxt:
                nv += 1
            if c.islower():
                edges.append((prev, c, nxt))
            else:
                edges.append((nxt, c.lower(), prev))
            prev = nxt
    return nv, edges


class CoreGraph:
    """A folded Stallings graph, optionally based.

    Vertices are ``0..n-1``.  Instances are treated as immutable.
    """

    __slots__ = ("adj", "basepoint", "_cert")

    def __init__(self, adj: Sequence[dict], basepoint: int | None = None):
        self.adj = tuple(dict(a) for a in adj)
        self.basepoint = basepoint
        self._cert = None

    # construction ------------------------------------------------------------
    @classmethod
    def from_generators(cls, gens: Sequence[str], order=None) -> "CoreGraph":
        """Folded based graph of ``<gens>``; ``order`` permutes the fold order."""
        gens = [W.reduce(g) for g in gens]
        for g in gens:
            W.check_word(g)
        gens = [g for g in gens if g]
        if not gens:
            raise AllTrivial("all generators are trivial")
        nv, edges = _petal_edges(gens)
        if order is not None:
            edges = [edges[i] for i in order]
        adj, _ = _fold(nv, edges)
        return cls(adj, 0)._pruned(keep_base=True)

    @classmethod
    def from_edges(cls, n_vertices: int, edges, basepoint=None) -> "CoreGraph":
        adj, vmap = _fold(n_vertices, edges)
        base = None if basepoint is None else vmap[basepoint]
        return cls(adj, base)

    # basic structure ------------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.adj)

    def edges(self) -> list[tuple[int, str, int]]:
        return [(u, c, v) for u, a in enumerate(self.adj)
                for c, v in sorted(a.items()) if c.islower()]

    @property
    def n_edges(self) -> int:
        return sum(1 for a in self.adj for c in a if c.islower())

    @property
    def rank(self) -> int:
        return self.n_edges - self.n_vertices + 1 if self.adj else 0

    def is_trivial(self) -> bool:
        return self.n_edges == 0

    def read(self, w: str, start: int) -> int | None:
        """End vertex of the path reading ``w`` from ``start``, or None."""
        v = start
        for c in w:
            v = self.adj[v].get(c)
            if v is None:
                return None
        return v

    def is_folded(self) -> bool:
        for u, a in enumerate(self.adj):
            for c, v in a.items():
                if self.adj[v].get(c.swapcase()) != u:
                    return False
        return True

    # core and certificates ---------------------------------------------------
    def _pruned(self, keep_base: bool) -> "CoreGraph":
        adj = [dict(a) for a in self.adj]
        alive = set(range(len(adj)))
        base = self.basepoint if keep_base else None
        stack = [v for v in alive if len(adj[v]) <= 1 and v != base]
        while stack:
            v = stack.pop()
            if v not in alive or len(adj[v]) > 1 or v == base:
                continue
            alive.discard(v)
            for c, t in adj[v].items():
                adj[t].pop(c.swapcase(), None)
                if t in alive and len(adj[t]) <= 1 and t != base:
                    stack.append(t)
            adj[v] = {}
        order = sorted(alive)
        idx = {v: i for i, v in enumerate(order)}
        new = [{c: idx[t] for c, t in adj[v].items()} for v in order]
        return CoreGraph(new, None if base is None else idx[base])

    def core(self) -> "CoreGraph":
        """The basepoint-free core (all valence-1 vertices removed)."""
        return self._pruned(keep_base=False)

    def _bfs(self, start: int):
        num = {start: 0}
        order = [start]
        q = deque([start])
        while q:
            v = q.popleft()
            for c in sorted(self.adj[v], key=W.order_key):
                t = self.adj[v][c]
                if t not in num:
                    num[t] = len(num)
                    order.append(t)
                    q.append(t)
        return num, order

    def _cert_from(self, start: int):
        num, _ = self._bfs(start)
        return tuple(sorted((num[u], c, num[v]) for u, c, v in self.edges()))

    def certificate(self):
        """Isomorphism invariant: for based graphs relative to the basepoint."""
        if self._cert is None:
            if not self.adj:
                self._cert = (0, ())
            elif self.basepoint is not None:
                self._cert = (len(self.adj), self._cert_from(self.basepoint))
            else:
                self._cert = (len(self.adj), min(self._cert_from(v) for v in range(len(self.adj))))
        return self._cert

    def conjugacy_certificate(self):
        return self.core().certificate()

    def __eq__(self, other):
        return isinstance(other, CoreGraph) and self.certificate() == other.certificate() \
            and (self.basepoint is None) == (other.basepoint is None)

    def __hash__(self):
        return hash(self.certificate())

    # subgroup data ---------------------------------------------------------------
    def generators(self, base: int | None = None) -> list[str]:
        """A free basis of pi_1 at ``base`` read off a BFS spanning tree."""
        if not self.adj:
            return []
        if base is None:
            base = self.basepoint if self.basepoint is not None else 0
        path = {base: ""}
        tree = set()
        q = deque([base])
        while q:
            v = q.popleft()
            for c in sorted(self.adj[v], key=W.order_key):
                t = self.adj[v][c]
                if t not in path:
                    path[t] = path[v] + c
                    tree.add((v, c.lower(), t) if c.islower() else (t, c.lower(), v))
                    q.append(t)
        gens = []
        for e in self.edges():
            if e not in tree:
                u, c, v = e
                gens.append(W.reduce(path[u] + c + W.inverse(path[v])))
        return gens

    def contains_element(self, w: str) -> bool:
        if self.basepoint is None:
            raise ValueError("membership needs a based graph")
        return self.read(W.reduce(w), self.basepoint) == self.basepoint

    def carries(self, w: str) -> bool:
        """True iff the cyclic word ``w`` reads a closed loop at some vertex."""
        core = W.cyclic_core(w)
        if not core:
            return True
        return any(self.read(core, v) == v for v in range(len(self.adj)))

    def __repr__(self):
        return f"CoreGraph(n={self.n_vertices}, edges={self.edges()}, base={self.basepoint})"


def from_generators(gens: Sequence[str]) -> CoreGraph:
    return CoreGraph.from_generators(gens)


def contains_element(K: CoreGraph, w: str) -> bool:
    return K.contains_element(w)


# -- fiber products ---------------------------------------------------------------

def _product(K1: CoreGraph, K2: CoreGraph):
    """Nontrivial core components of K1 x K2 as (graph, vertex-pair list)."""
    pairs = {}
    edges = []
    for u1, a1 in enumerate(K1.adj):
        for c, v1 in a1.items():
            if not c.islower():
                continue
            for u2, a2 in enumerate(K2.adj):
                v2 = a2.get(c)
                if v2 is None:
                    continue
                for p in ((u1, u2), (v1, v2)):
                    if p not in pairs:
                        pairs[p] = len(pairs)
                edges.append((pairs[(u1, u2)], c, pairs[(v1, v2)]))
    if not pairs:
        return []
    names = list(pairs)
    # connected components via union-find on the edge list
    parent = list(range(len(names)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, _, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    comps: dict[int, list] = {}
    for u, c, v in edges:
        comps.setdefault(find(u), []).append((u, c, v))
    out = []
    for root in sorted(comps):
        es = comps[root]
        verts = sorted({x for u, _, v in es for x in (u, v)})
        idx = {x: i for i, x in enumerate(verts)}
        adj = [dict() for _ in verts]
        for u, c, v in es:
            adj[idx[u]][c] = idx[v]
            adj[idx[v]][c.upper()] = idx[u]
        core = _prune_with_names(adj, [names[x] for x in verts])
        if core is not None:
            out.append(core)
    return out


def _prune_with_names(adj, names):
    adj = [dict(a) for a in adj]
    alive = set(range(len(adj)))
    stack = [v for v in alive if len(adj[v]) <= 1]
    while stack:
        v = stack.pop()
        if v not in alive or len(adj[v]) > 1:
            continue
        alive.discard(v)
        for c, t in adj[v].items():
            adj[t].pop(c.swapcase(), None)
            if t in alive and len(adj[t]) <= 1:
                stack.append(t)
        adj[v] = {}
    if not alive:
        return None
    order = sorted(alive)
    idx = {v: i for i, v in enumerate(order)}
    g = CoreGraph([{c: idx[t] for c, t in adj[v].items()} for v in order])
    return g, [names[v] for v in order]


def fiber_product(K1: CoreGraph, K2: CoreGraph) -> list[CoreGraph]:
    """Nontrivial core components of the pullback of K1 and K2 over the rose."""
    return [g for g, _ in _product(K1.core(), K2.core())]


# -- subgroup systems --------------------------------------------------------------

@dataclass(frozen=True)
class SubgroupSystem:
    """A finite set of conjugacy classes of nontrivial finitely generated subgroups."""

    components: tuple[CoreGraph, ...]

    def __post_init__(self):
        seen = {}
        for K in self.components:
            K = K.core() if K.basepoint is not None else K
            if K.is_trivial():
                continue
            seen.setdefault(K.certificate(), K)
        comps = tuple(seen[k] for k in sorted(seen))
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_lists(cls, gen_lists: Iterable[Sequence[str]]) -> "SubgroupSystem":
        return cls(tuple(CoreGraph.from_generators(g) for g in gen_lists))

    @classmethod
    def whole(cls, rank: int) -> "SubgroupSystem":
        return cls.from_lists([list(W.GENERATORS[:rank])])

    @classmethod
    def empty(cls) -> "SubgroupSystem":
        return cls(())

    @classmethod
    def from_json(cls, data) -> "SubgroupSystem":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_lists(data["components"])

    def to_json(self) -> dict:
        return {"components": [K.generators() for K in self.components]}

    def generator_lists(self) -> list[list[str]]:
        return [K.generators() for K in self.components]

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __str__(self):
        return "{" + ", ".join("<" + ",".join(g) + ">" for g in self.generator_lists()) + "}"

    def carries(self, c: str) -> bool:
        return any(K.carries(c) for K in self.components)

    def max_rank(self) -> int:
        return max((K.rank for K in self.components), default=0)


def carries_conjugacy(S: SubgroupSystem, c) -> bool:
    rep = c.rep if isinstance(c, W.ConjugacyClass) else W.cyclic_core(c)
    if not rep:
        raise TrivialClass("the trivial class is carried by everything")
    return S.carries(rep)


def meet(S1: SubgroupSystem, S2: SubgroupSystem) -> SubgroupSystem:
    """All nontrivial intersections ``A ∩ B^w`` up to conjugacy."""
    comps = []
    for A in S1.components:
        for B in S2.components:
            comps.extend(fiber_product(A, B))
    return SubgroupSystem(tuple(comps))


def is_malnormal(S: SubgroupSystem):
    """Return ``(True, None)`` or ``(False, (s, t, component))``."""
    comps = S.components
    for s in range(len(comps)):
        for t in range(s, len(comps)):
            for g, names in _product(comps[s], comps[t]):
                if s == t and all(a == b for a, b in names):
                    continue
                return False, (s, t, g)
    return True, None


def image_system(S: SubgroupSystem, aut: W.BasisAutomorphism) -> SubgroupSystem:
    comps = []
    for K in S.components:
        gens = K.generators()
        if W.word_rank("".join(gens)) > aut.rank:
            raise RankMismatch("subgroup system outside the automorphism's rank")
        comps.append(CoreGraph.from_generators([aut.apply(g) for g in gens]))
    return SubgroupSystem(tuple(comps))


def invariance(S: SubgroupSystem, aut: W.BasisAutomorphism):
    """Check ``[aut(K_s)] = [K_s]`` for every s.

    Returns ``(True, mapping)`` with ``mapping[s]`` the index of the image of
    component ``s`` (the identity when invariant), or ``(False, s)`` naming the
    first component whose image is not itself.
    """
    certs = [K.certificate() for K in S.components]
    mapping = {}
    for s, K in enumerate(S.components):
        img = CoreGraph.from_generators([aut.apply(g) for g in K.generators()]).core()
        c = img.certificate()
        if c not in certs:
            return False, s
        mapping[s] = certs.index(c)
    if any(mapping[s] != s for s in mapping):
        return False, next(s for s in mapping if mapping[s] != s)
    return True, mapping


def is_invariant(S: SubgroupSystem, aut: W.BasisAutomorphism) -> bool:
    return invariance(S, aut)[0]
