"""Filtered marked graphs and edge paths.

Each edge has a one-letter lowercase id; an edge path is a string of ids, an
uppercase id meaning the edge crossed backwards.  This lets paths share the
reduction code used for words.  On a rose with the identity marking, paths
and words coincide.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from . import words as W
from .errors import EmptyPath, NotComposable, ValidationError


@dataclass(frozen=True)
class Edge:
    id: str
    src: int
    dst: int
    stratum: int = 1


@dataclass(frozen=True)
class MarkedGraph:
    """A graph with a filtration by strata and a marking by a spanning tree.

    ``basis`` pairs every non-tree edge with the generator it represents.
    """

    n_vertices: int
    edges: tuple[Edge, ...]
    tree: tuple[str, ...] = ()
    basis: tuple[tuple[str, str], ...] = ()
    _by_id: dict = field(default=None, compare=False, repr=False)
    _letters: frozenset = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        by_id = {}
        for e in self.edges:
            if len(e.id) != 1 or not e.id.islower():
                raise ValidationError(f"edge id {e.id!r} must be one lowercase letter")
            if e.id in by_id:
                raise ValidationError(f"duplicate edge id {e.id!r}")
            if not (0 <= e.src < self.n_vertices and 0 <= e.dst < self.n_vertices):
                raise ValidationError(f"edge {e.id!r} has an endpoint out of range")
            by_id[e.id] = e
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_letters", frozenset(by_id) | {e.upper() for e in by_id})
        if not self.basis:
            non_tree = [e.id for e in self.edges if e.id not in self.tree]
            object.__setattr__(self, "basis", tuple(
                (eid, W.GENERATORS[i]) for i, eid in enumerate(non_tree)))

    # construction ----------------------------------------------------------
    @classmethod
    def rose(cls, strata) -> "MarkedGraph":
        """Rose whose edge ``i`` is generator ``i``; ``strata`` is a list or a dict."""
        if isinstance(strata, dict):
            items = sorted(strata.items())
        else:
            items = [(W.GENERATORS[i], s) for i, s in enumerate(strata)]
        return cls(1, tuple(Edge(eid, 0, 0, int(s)) for eid, s in items))

    @classmethod
    def from_json(cls, data) -> "MarkedGraph":
        if isinstance(data, str):
            data = json.loads(data)
        edges = tuple(Edge(e["id"], int(e["from"]), int(e["to"]), int(e.get("stratum", 1)))
                      for e in data["edges"])
        basis = data.get("basis") or {}
        return cls(int(data.get("vertices", 1)), edges, tuple(data.get("tree", ())),
                   tuple(sorted(basis.items())))

    def to_json(self) -> dict:
        return {
            "vertices": self.n_vertices,
            "edges": [{"id": e.id, "from": e.src, "to": e.dst, "stratum": e.stratum}
                      for e in self.edges],
            "tree": list(self.tree),
            "basis": dict(self.basis),
        }

    # structure ---------------------------------------------------------------
    def edge(self, eid: str) -> Edge:
        return self._by_id[eid.lower()]

    @property
    def edge_ids(self) -> list[str]:
        return [e.id for e in self.edges]

    @property
    def rank(self) -> int:
        return len(self.edges) - self.n_vertices + 1

    @property
    def strata(self) -> list[int]:
        return sorted({e.stratum for e in self.edges})

    def stratum_of(self, c: str) -> int:
        return self._by_id[c.lower()].stratum

    def stratum_edges(self, r: int) -> list[str]:
        return [e.id for e in self.edges if e.stratum == r]

    def filtration_edges(self, r: int) -> list[str]:
        return [e.id for e in self.edges if e.stratum <= r]

    def origin(self, c: str) -> int:
        e = self._by_id[c.lower()]
        return e.src if c.islower() else e.dst

    def terminus(self, c: str) -> int:
        e = self._by_id[c.lower()]
        return e.dst if c.islower() else e.src

    def directions(self, v: int | None = None) -> list[str]:
        """Oriented edges (directions), optionally only those starting at ``v``."""
        out = []
        for e in self.edges:
            for d in (e.id, e.id.upper()):
                if v is None or self.origin(d) == v:
                    out.append(d)
        return out

    def valence(self, v: int) -> int:
        return len(self.directions(v))

    def is_rose(self) -> bool:
        return self.n_vertices == 1 and not self.tree

    def problems(self) -> list[str]:
        """Structural violations of the marked-graph invariants (empty if fine)."""
        out = []
        for v in range(self.n_vertices):
            if self.valence(v) < 2:
                out.append(f"vertex {v} has valence < 2")
        ids = set(self._by_id)
        if not set(self.tree) <= ids:
            out.append("tree uses unknown edges")
        # tree must be a spanning tree
        if len(self.tree) != self.n_vertices - 1:
            out.append("tree has the wrong number of edges")
        else:
            parent = list(range(self.n_vertices))

            def find(x):
                while parent[x] != x:
                    x = parent[x]
                return x

            for t in self.tree:
                e = self._by_id.get(t)
                if e is None:
                    continue
                a, b = find(e.src), find(e.dst)
                if a == b:
                    out.append("tree contains a cycle")
                    break
                parent[a] = b
        if {eid for eid, _ in self.basis} != ids - set(self.tree):
            out.append("basis does not cover the non-tree edges")
        return out

    # paths -----------------------------------------------------------------------
    def check_path(self, p: str) -> None:
        if self.n_vertices == 1:
            # every path on a one-vertex graph is composable
            if not self._letters.issuperset(p):
                bad = next(c for c in p if c not in self._letters)
                raise NotComposable(f"unknown edge {bad!r}")
            return
        for c in p:
            if c.lower() not in self._by_id:
                raise NotComposable(f"unknown edge {c!r}")
        for x, y in zip(p, p[1:]):
            if self.terminus(x) != self.origin(y):
                raise NotComposable(f"{x}{y} is not composable")

    def tighten(self, p: str) -> str:
        self.check_path(p)
        return W.reduce(p)

    def tighten_cyclic(self, p: str) -> str:
        p = self.tighten(p)
        if p and self.terminus(p[-1]) != self.origin(p[0]):
            raise NotComposable("circuit is not closed")
        return W.cyclic_reduce(p)[0]

    def height(self, p: str) -> int:
        if not p:
            raise EmptyPath("height of the empty path")
        return max(self.stratum_of(c) for c in p)

    def stratum_length(self, p: str, r: int) -> int:
        """Number of edges of ``p`` in stratum ``r`` (the H_r-length)."""
        return sum(1 for c in p if self.stratum_of(c) == r)

    # marking ----------------------------------------------------------------------
    def _tree_paths(self) -> dict[int, str]:
        paths = {0: ""}
        q = deque([0])
        tree = set(self.tree)
        while q:
            v = q.popleft()
            for d in self.directions(v):
                if d.lower() in tree and self.terminus(d) not in paths:
                    paths[self.terminus(d)] = paths[v] + d
                    q.append(self.terminus(d))
        return paths

    def path_to_word(self, p: str) -> str:
        """Image of a path under the marking (tree edges collapse)."""
        basis = dict(self.basis)
        out = []
        for c in p:
            g = basis.get(c.lower())
            if g is not None:
                out.append(g if c.islower() else g.upper())
        return W.reduce("".join(out))

    def word_to_path(self, w: str) -> str:
        """Tightened loop at vertex 0 representing the word ``w``."""
        if self.is_rose() and dict(self.basis) == {c: c for c in self.edge_ids}:
            return W.reduce(w)
        tp = self._tree_paths()
        edge_of = {g: eid for eid, g in self.basis}
        out = []
        for c in w:
            eid = edge_of[c.lower()]
            d = eid if c.islower() else eid.upper()
            out.append(tp[self.origin(d)] + d + W.inverse(tp[self.terminus(d)]))
        return W.reduce("".join(out))


def tighten(G: MarkedGraph, p: str) -> str:
    return G.tighten(p)


def height(G: MarkedGraph, p: str) -> int:
    return G.height(p)


def path_to_word(G: MarkedGraph, p: str) -> str:
    return G.path_to_word(p)


def word_to_path(G: MarkedGraph, w: str) -> str:
    return G.word_to_path(w)
