"""Topological representatives and their dynamics.

A :class:`TopRep` is a filtered marked graph together with the tightened
image path of every edge.  The analyses here are the ones needed downstream:
transition matrices and Perron-Frobenius growth, turns and legality, the
relative train track conditions, bounded cancellation, critical constants and
Nielsen path search.
"""

from __future__ import annotations

import json
import math
import os
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from . import words as W
from .errors import BadStratum, CapExceeded, NotEG, NotIrreducible, NotSurjective
from .markedgraph import MarkedGraph

PF_TOL = 1e-9
DEFAULT_CAP = 10 ** 7


def iteration_cap() -> int:
    try:
        return int(float(os.environ.get("TTDYN_ITER_CAP", DEFAULT_CAP)))
    except ValueError:
        return DEFAULT_CAP


@dataclass(frozen=True, eq=False)
class TopRep:
    """A filtration-respecting map ``f: G -> G``.

    ``edge_map`` sends each edge id to its image path; ``vertex_map[v]`` is the
    image of vertex ``v`` (all zeros on a rose).
    """

    graph: MarkedGraph
    edge_map: dict
    vertex_map: tuple = ()
    rotationless: bool = False
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        em = {k: W.reduce(v) for k, v in dict(self.edge_map).items()}
        for eid in self.graph.edge_ids:
            em.setdefault(eid, eid)
        object.__setattr__(self, "edge_map", em)
        if not self.vertex_map:
            object.__setattr__(self, "vertex_map", tuple(range(self.graph.n_vertices))
                               if not self.graph.is_rose() else (0,))

    # construction -------------------------------------------------------------
    @classmethod
    def on_rose(cls, images, strata=None, **kw) -> "TopRep":
        """Rose representative of a basis automorphism given by image words."""
        if isinstance(images, W.BasisAutomorphism):
            images = images.images
        images = list(images)
        strata = strata or [1] * len(images)
        G = MarkedGraph.rose(strata)
        return cls(G, {W.GENERATORS[i]: w for i, w in enumerate(images)}, **kw)

    @classmethod
    def from_json(cls, data) -> "TopRep":
        if isinstance(data, str):
            data = json.loads(data)
        if "graph" in data:
            G = MarkedGraph.from_json(data["graph"])
        elif "edges" in data:
            G = MarkedGraph.from_json(data)
        else:
            strata = data.get("strata")
            em = data["edge_map"]
            if strata is None:
                strata = {k: 1 for k in em}
            G = MarkedGraph.rose(strata)
        return cls(G, data["edge_map"], tuple(data.get("vertex_map", ())),
                   bool(data.get("rotationless", False)), data.get("name", ""))

    def to_json(self) -> dict:
        return {"name": self.name, "graph": self.graph.to_json(),
                "edge_map": dict(self.edge_map),
                "vertex_map": list(self.vertex_map), "rotationless": self.rotationless}

    # images ---------------------------------------------------------------------
    @cached_property
    def table(self) -> dict:
        m = {}
        for eid, img in self.edge_map.items():
            m[eid] = img
            m[eid.upper()] = W.inverse(img)
        return str.maketrans(m)

    def image(self, d: str) -> str:
        img = self.edge_map[d.lower()]
        return img if d.islower() else W.inverse(img)

    def apply(self, p: str) -> str:
        """``f_#(p)``: image of a path, tightened."""
        return W.reduce(p.translate(self.table))

    def power_table(self, k: int) -> dict:
        """Translation table of ``f^k_#`` on single edges (memoised)."""
        key = ("pow", k)
        if key not in self._cache:
            imgs = {e: e for e in self.graph.edge_ids}
            for _ in range(k):
                imgs = {e: self.apply(w) for e, w in imgs.items()}
                if max(map(len, imgs.values()), default=0) > iteration_cap():
                    raise CapExceeded(f"edge image of f^{k} exceeds the cap")
            m = {}
            for e, w in imgs.items():
                m[e] = w
                m[e.upper()] = W.inverse(w)
            self._cache[key] = str.maketrans(m)
        return self._cache[key]

    def iterate(self, p: str, n: int, cyclic: bool = False) -> str:
        """``f^n_#(p)``, tightening every step (cyclically for circuits)."""
        if n < 0:
            raise ValueError("n must be >= 0")
        cap = iteration_cap()
        p = W.reduce(p)
        if cyclic:
            p = W.cyclic_reduce(p)[0]
        for _ in range(n):
            q = p.translate(self.table)
            if len(q) > cap:
                raise CapExceeded(f"path length {len(q)} exceeds cap {cap}")
            p = W.reduce(q)
            if cyclic:
                p = W.cyclic_reduce(p)[0]
        return p

    def to_automorphism(self) -> W.BasisAutomorphism:
        """The automorphism of F induced through the marking."""
        G = self.graph
        rank = G.rank
        images = []
        for i in range(rank):
            loop = G.word_to_path(W.GENERATORS[i])
            images.append(G.path_to_word(self.apply(loop)))
        return W.BasisAutomorphism(rank, tuple(images))

    # structure --------------------------------------------------------------------
    @property
    def strata(self) -> list[int]:
        return self.graph.strata

    def transition_matrix(self, r: int) -> np.ndarray:
        edges = self.graph.stratum_edges(r)
        if not edges:
            raise BadStratum(f"no stratum {r}")
        idx = {e: i for i, e in enumerate(edges)}
        M = np.zeros((len(edges), len(edges)), dtype=np.int64)
        for j, e in enumerate(edges):
            for c in self.edge_map[e]:
                i = idx.get(c.lower())
                if i is not None:
                    M[i, j] += 1
        return M

    @cached_property
    def strata_report(self) -> "StrataReport":
        return classify_strata(self)

    def eg_strata(self) -> list[int]:
        return [s.r for s in self.strata_report.strata if s.kind == "EG"]

    def lam(self, r: int) -> float:
        return self.strata_report.by_r[r].lam

    # turns --------------------------------------------------------------------------
    def Df(self, d: str) -> str:
        img = self.image(d)
        if not img:
            raise ValueError(f"edge {d} maps to a trivial path")
        return img[0]

    @cached_property
    def illegal(self) -> frozenset:
        return frozenset(illegal_turns(self))

    def is_legal_turn(self, d1: str, d2: str) -> bool:
        return d1 != d2 and frozenset((d1, d2)) not in self.illegal

    def is_r_legal(self, p: str, r: int, cyclic: bool = False) -> bool:
        """Height ``r`` and every turn touching H_r legal."""
        if not p:
            return True
        G = self.graph
        if G.height(p) != r:
            return False
        pairs = list(zip(p, p[1:]))
        if cyclic and len(p) > 1:
            pairs.append((p[-1], p[0]))
        for x, y in pairs:
            dx, dy = x.swapcase(), y
            if G.stratum_of(dx) != r and G.stratum_of(dy) != r:
                continue
            if not self.is_legal_turn(dx, dy):
                return False
        return True


def validate(f: TopRep) -> dict:
    """Check vertex, filtration and homotopy-equivalence conditions."""
    G = f.graph
    problems = list(G.problems())
    for e in G.edges:
        img = f.edge_map.get(e.id, "")
        if not img:
            problems.append(f"edge {e.id} maps to a trivial path")
            continue
        try:
            G.check_path(img)
        except Exception as exc:
            problems.append(f"image of {e.id}: {exc}")
            continue
        vm = f.vertex_map
        if len(vm) == G.n_vertices:
            if G.origin(img[0]) != vm[e.src] or G.terminus(img[-1]) != vm[e.dst]:
                problems.append(f"image of {e.id} does not join the images of its endpoints")
        if G.height(img) > e.stratum:
            problems.append(f"image of {e.id} leaves G_{e.stratum}")
    surjective = False
    if not problems:
        try:
            W.invert(f.to_automorphism())
            surjective = True
        except NotSurjective:
            problems.append("induced endomorphism is not surjective")
    return {"valid": not problems, "problems": problems, "surjective": surjective}


# -- Perron-Frobenius ---------------------------------------------------------------

def is_irreducible(M) -> bool:
    M = np.asarray(M)
    n = M.shape[0]
    if n == 1:
        return True
    A = (M > 0).astype(np.int64) + np.eye(n, dtype=np.int64)
    R = A.copy()
    for _ in range(int(math.ceil(math.log2(n))) + 1):
        R = ((R @ R) > 0).astype(np.int64)
    return bool(R.all())


def pf_eigenvalue(M, tol: float = PF_TOL, max_iter: int = 200000) -> float:
    """Perron-Frobenius eigenvalue of an irreducible nonnegative matrix.

    Power iteration on the primitive matrix ``M + I``; the Collatz-Wielandt
    quotients bracket the eigenvalue and iteration stops when they agree to
    ``tol``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or (M < 0).any():
        raise NotIrreducible("not a square nonnegative matrix")
    if not is_irreducible(M):
        raise NotIrreducible("transition matrix is reducible")
    n = M.shape[0]
    A = M + np.eye(n)
    x = np.ones(n)
    lo = hi = 1.0
    for _ in range(max_iter):
        y = A @ x
        q = y / x
        lo, hi = q.min(), q.max()
        if hi - lo < tol * 0.1:
            break
        x = y / y.max()
    else:
        vals = np.linalg.eigvals(M)
        return float(max(vals.real))
    return float((lo + hi) / 2 - 1.0)


@dataclass
class StratumInfo:
    r: int
    edges: list
    kind: str  # "zero", "NEG", "EG" or "reducible"
    lam: float | None
    irreducible: bool
    matrix: list

    def to_json(self):
        return {"stratum": self.r, "edges": self.edges, "class": self.kind,
                "lambda": None if self.lam is None else round(self.lam, 12),
                "irreducible": self.irreducible, "matrix": self.matrix}


@dataclass
class StrataReport:
    strata: list

    @property
    def by_r(self) -> dict:
        return {s.r: s for s in self.strata}

    def to_json(self):
        return {"strata": [s.to_json() for s in self.strata]}


def transition_matrix(f: TopRep, r: int) -> np.ndarray:
    return f.transition_matrix(r)


def classify_strata(f: TopRep) -> StrataReport:
    out = []
    for r in f.strata:
        M = f.transition_matrix(r)
        edges = f.graph.stratum_edges(r)
        if not M.any():
            out.append(StratumInfo(r, edges, "zero", None, False, M.tolist()))
            continue
        if not is_irreducible(M):
            out.append(StratumInfo(r, edges, "reducible", None, False, M.tolist()))
            continue
        lam = pf_eigenvalue(M)
        kind = "EG" if lam > 1 + 1e-7 else "NEG"
        out.append(StratumInfo(r, edges, kind, lam, True, M.tolist()))
    return StrataReport(out)


# -- turns ------------------------------------------------------------------------------

def _turn_key(d1, d2):
    return frozenset((d1, d2))


def illegal_turns(f: TopRep, r: int | None = None) -> set:
    """Nondegenerate turns of height <= r that some iterate of Tf makes degenerate."""
    G = f.graph
    dirs = [d for d in G.directions() if r is None or G.stratum_of(d) <= r]
    out = set()
    for d1, d2 in combinations(dirs, 2):
        if G.origin(d1) != G.origin(d2):
            continue
        seen = set()
        x, y = d1, d2
        while (x, y) not in seen:
            seen.add((x, y))
            x, y = f.Df(x), f.Df(y)
            if x == y:
                out.add(_turn_key(d1, d2))
                break
    return out


def turn_orbit(f: TopRep, d1: str, d2: str, steps: int = 20) -> list:
    orbit = [(d1, d2)]
    for _ in range(steps):
        d1, d2 = f.Df(d1), f.Df(d2)
        orbit.append((d1, d2))
        if d1 == d2:
            break
    return orbit


def is_r_legal(f: TopRep, p: str, r: int) -> bool:
    return f.is_r_legal(p, r)


def iterate_path(f: TopRep, p: str, n: int, cyclic: bool = False) -> str:
    return f.iterate(p, n, cyclic)


# -- relative train track conditions ---------------------------------------------------

def _paths(G: MarkedGraph, allowed, max_len: int, start=None):
    """Tight edge paths over the ``allowed`` edge ids, up to ``max_len``."""
    dirs = [d for d in G.directions() if d.lower() in allowed]

    def rec(p):
        yield p
        if len(p) == max_len:
            return
        for d in dirs:
            if p and (G.origin(d) != G.terminus(p[-1]) or d == p[-1].swapcase()):
                continue
            yield from rec(p + d)

    for d in dirs:
        if start is None or G.origin(d) in start:
            yield from rec(d)


def check_rtt(f: TopRep, conn_len: int = 4, sample_len: int = 4) -> dict:
    """Check the three relative train track conditions on each EG stratum.

    (1) every EG edge image is r-legal and r-legal paths up to ``sample_len``
    have r-legal images; (2) connecting paths in G_{r-1} with endpoints on
    H_r, up to ``conn_len`` edges, have nontrivial images; (3) Tf sends each
    direction of H_r into H_r.
    """
    G = f.graph
    report = {"pass": True, "conditions": {"1": [], "2": [], "3": []}}

    def fail(cond, witness):
        report["pass"] = False
        report["conditions"][cond].append(witness)

    for r in f.eg_strata():
        Hr = G.stratum_edges(r)
        for e in Hr:
            for d in (e, e.upper()):
                if G.stratum_of(f.Df(d)) != r:
                    fail("3", {"stratum": r, "direction": d, "Tf": f.Df(d)})
            img = f.edge_map[e]
            if not f.is_r_legal(img, r):
                bad = [x + y for x, y in zip(img, img[1:])
                       if not f.is_legal_turn(x.swapcase(), y)]
                fail("1", {"stratum": r, "edge": e, "image": img, "illegal_turns": bad})
        for p in _paths(G, set(G.filtration_edges(r)), sample_len):
            if G.height(p) == r and f.is_r_legal(p, r):
                q = f.apply(p)
                if q and not f.is_r_legal(q, r):
                    fail("1", {"stratum": r, "path": p, "image": q})
                    break
        lower = set(G.filtration_edges(r - 1))
        touch = {G.origin(d) for d in G.directions() if G.stratum_of(d) == r}
        low_verts = {G.origin(d) for d in G.directions() if d.lower() in lower}
        ends = touch & low_verts
        for p in _paths(G, lower, conn_len, start=ends):
            if G.terminus(p[-1]) in ends and not f.apply(p):
                fail("2", {"stratum": r, "path": p})
                break
    return report


# -- bounded cancellation and critical constants ------------------------------------

def certified_bcc(f: TopRep) -> int:
    return sum(len(w) for w in f.edge_map.values())


def empirical_cancellation(f: TopRep, samples: int = 10000, max_len: int = 8,
                           seed: int = 0) -> int:
    """Largest cancellation seen in ``f_#(u) f_#(v)`` over random tight ``uv``."""
    if not f.graph.is_rose():
        return 0
    rng = random.Random(seed)
    letters = W.alphabet(len(f.graph.edges))
    best = 0
    for _ in range(samples):
        n = rng.randint(2, max_len)
        w = [rng.choice(letters)]
        while len(w) < n:
            c = rng.choice(letters)
            if c != w[-1].swapcase():
                w.append(c)
        w = "".join(w)
        k = rng.randint(1, n - 1)
        fu, fv = f.apply(w[:k]), f.apply(w[k:])
        cancel = (len(fu) + len(fv) - len(f.apply(w))) // 2
        best = max(best, cancel)
    return best


def bcc_bound(f: TopRep, samples: int = 0, seed: int = 0) -> int:
    """Sum of edge image lengths, never below any observed cancellation."""
    cert = certified_bcc(f)
    if samples:
        return max(cert, empirical_cancellation(f, samples, seed=seed))
    return cert


def critical_constant(f: TopRep, r: int, bcc: int | None = None) -> float:
    info = f.strata_report.by_r.get(r)
    if info is None:
        raise BadStratum(f"no stratum {r}")
    if info.kind != "EG":
        raise NotEG(f"stratum {r} is {info.kind}")
    B = certified_bcc(f) if bcc is None else bcc
    return 2 * B / (info.lam - 1)


def global_constant(f: TopRep) -> int:
    """Integer ceiling of the largest critical constant over the EG strata."""
    eg = f.eg_strata()
    if not eg:
        raise NotEG("no EG stratum")
    return int(math.ceil(max(critical_constant(f, r) for r in eg) - 1e-12))


# -- Nielsen paths ---------------------------------------------------------------------

def _fixed_paths(G: MarkedGraph, table: dict, max_len: int) -> list:
    """Tight paths ``p`` with ``|p| <= max_len`` and ``table`` applied and tightened equal to ``p``.

    Depth-first over prefixes ``q`` carrying the tightened image of ``q``.  An
    extension ``qv`` can cancel at most ``lmax * |v|`` letters off the end of
    that image, so what is left over must already be a prefix of the answer.
    """
    images = {chr(k): v for k, v in table.items()}
    lmax = max(map(len, images.values()), default=0)
    dirs = G.directions()
    out = []

    def rec(q, img):
        if img == q:
            out.append(q)
        if len(q) == max_len:
            return
        for d in dirs:
            if q and (G.origin(d) != G.terminus(q[-1]) or d == q[-1].swapcase()):
                continue
            q2 = q + d
            img2 = W.multiply(img, images[d])
            keep = len(img2) - lmax * (max_len - len(q2))
            if keep > max_len:
                continue
            m = min(keep, len(q2))
            if m > 0 and img2[:m] != q2[:m]:
                continue
            rec(q2, img2)

    rec("", "")
    return [p for p in out if p]


def find_nielsen_paths(f: TopRep, max_len: int, period: int = 1,
                       height: int | None = None) -> list:
    """Tight paths ``p`` with ``f^k_#(p) = p`` for some ``k <= period``.

    Returns ``(path, k)`` pairs with ``k`` minimal, in shortlex order; a path
    and its reverse are both reported.
    """
    G = f.graph
    found = {}
    for k in range(1, period + 1):
        for p in _fixed_paths(G, f.power_table(k), max_len):
            if height is not None and G.height(p) != height:
                continue
            found.setdefault(p, k)
    return sorted(found.items(), key=lambda t: W.shortlex_key(t[0]))


def find_periodic_circuits(f: TopRep, max_len: int, period: int = 1,
                           height: int | None = None) -> list:
    """Canonical circuits ``c`` with ``f^k_#(c) = c`` up to rotation, ``k <= period``."""
    G = f.graph
    if not G.is_rose():
        raise ValueError("periodic circuit search needs a rose")
    out = []
    rank = len(G.edges)
    tables = [f.power_table(k) for k in range(1, period + 1)]
    for c in W.conjugacy_classes(max_len, rank):
        if height is not None and G.height(c) != height:
            continue
        target = W.least_rotation(c)
        for k, t in enumerate(tables, 1):
            img = W.cyclic_core(c.translate(t))
            if W.least_rotation(img) == target:
                out.append((c, k))
                break
    return out


def rotationless_witness(f: TopRep, max_period: int = 6) -> dict:
    """Partial check: periodic directions with period <= max_period are fixed."""
    bad = []
    for d in f.graph.directions():
        x = d
        for k in range(1, max_period + 1):
            x = f.Df(x)
            if x == d:
                if k > 1:
                    bad.append({"direction": d, "period": k})
                break
    return {"asserted": f.rotationless, "checked_period": max_period,
            "consistent": not bad, "nonfixed_periodic_directions": bad}
