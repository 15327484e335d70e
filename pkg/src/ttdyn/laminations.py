"""Finite approximations of attracting laminations and their neighborhoods.

A generic leaf of the lamination of an EG stratum is approximated by a line
fixed by a power of ``f``: an H_r edge ``E`` whose image under ``f^p`` contains
``E`` in its interior is iterated, keeping track of where that copy of ``E``
lands, so that each window is a subpath of the next one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import words as W
from .errors import (CapExceeded, DisjointnessFailed, EmptyLaminationSet,
                     EmptyNeighborhood, NotEG, VerificationFailed)
from .stallings import SubgroupSystem, fiber_product, invariance, is_malnormal, meet
from .trainmap import (TopRep, find_nielsen_paths, find_periodic_circuits,
                       global_constant, iteration_cap)

MAX_PERIOD = 12


def _seam(u: str, v: str) -> int:
    """Number of cancelling pairs where ``u`` meets ``v``."""
    t = 0
    n = min(len(u), len(v))
    while t < n and u[-1 - t] == v[t].swapcase():
        t += 1
    return t


class LeafFamily:
    """Nested windows of a leaf of the attracting lamination of stratum ``r``."""

    def __init__(self, f: TopRep, r: int):
        if r not in f.eg_strata():
            raise NotEG(f"stratum {r} is not EG")
        self.f, self.r = f, r
        self.edge, self.period, self.offset = self._find_marker()
        self.table = f.power_table(self.period)
        self.window, self.marker = self.edge, 0
        self.depth = 0

    def _find_marker(self):
        f, r = self.f, self.r
        best = None
        for p in range(1, MAX_PERIOD + 1):
            for e in f.graph.stratum_edges(self.r):
                img = W.reduce(e.translate(f.power_table(p)))
                hits = [i for i in range(1, len(img) - 1) if img[i] == e]
                if hits:
                    i = min(hits, key=lambda k: abs(2 * k - len(img) + 1))
                    best = (e, p, i)
                    break
            if best:
                return best
        raise NotEG(f"no periodic interior edge found for stratum {r}")

    def step(self) -> None:
        w, m = self.window, self.marker
        left = W.reduce(w[:m].translate(self.table))
        mid = w[m].translate(self.table)
        right = W.reduce(w[m + 1:].translate(self.table))
        t1 = _seam(left, mid)
        if t1 > self.offset:
            raise ValueError("marker edge cancelled")
        x = left[:len(left) - t1] + mid[t1:]
        pos = len(left) - t1 + self.offset - t1
        t2 = _seam(x, right)
        if len(x) - t2 <= pos:
            raise ValueError("marker edge cancelled")
        self.window = x[:len(x) - t2] + right[t2:]
        self.marker = pos
        self.depth += self.period
        if len(self.window) > iteration_cap():
            raise CapExceeded("leaf window exceeds the cap")

    def ensure(self, radius: int) -> None:
        """Grow until the window reaches ``radius`` edges past the marker each way."""
        while self.marker < radius or len(self.window) - self.marker - 1 < radius:
            self.step()

    def ensure_depth(self, depth: int) -> None:
        while self.depth < depth:
            self.step()

    def segment(self, L: int) -> str:
        """Central subpath of length ``L`` around the marker edge."""
        if L < 1:
            raise ValueError("L must be >= 1")
        self.ensure(L)
        start = self.marker - (L - 1) // 2
        return self.window[start:start + L]

    def hr_length(self, p: str) -> int:
        return self.f.graph.stratum_length(p, self.r)

    def factors(self, T: int) -> set:
        """All window factors of H_r-length ``T`` starting and ending in H_r.

        The window is grown until one more step adds no new factor.
        """
        self.ensure(4 * T)
        prev = None
        while True:
            cur = self._factors_of(self.window, T)
            if cur == prev:
                return cur
            prev = cur
            self.step()

    def _factors_of(self, w: str, T: int) -> set:
        G = self.f.graph
        inr = [G.stratum_of(c) == self.r for c in w]
        out = set()
        pos = [i for i, b in enumerate(inr) if b]
        for k in range(len(pos) - T + 1):
            out.add(w[pos[k]:pos[k + T - 1] + 1])
        return out

    def carried_by(self, K: SubgroupSystem, L: int) -> bool:
        """True iff the central segment of length ``L`` lifts to some component of K."""
        return reads_somewhere(K, self.segment(L))


def reads_somewhere(K: SubgroupSystem, p: str) -> bool:
    for G in K.components:
        for v in range(G.n_vertices):
            if G.read(p, v) is not None:
                return True
    return False


def leaf_segment(f: TopRep, r: int, L: int) -> str:
    return LeafFamily(f, r).segment(L)


# -- neighborhoods ----------------------------------------------------------------

def _contains(text: str, seg: str, cyclic: bool) -> bool:
    if cyclic and text:
        reps = len(seg) // len(text) + 2
        text = text * reps
    return seg in text


@dataclass
class Neighborhood:
    """Weak neighborhood given by finitely many defining segments."""

    polarity: str
    segments: frozenset
    length: int = 0

    def __post_init__(self):
        both = set(self.segments) | {W.inverse(s) for s in self.segments}
        self._both = sorted(both, key=W.shortlex_key)

    def contains(self, p: str, cyclic: bool = False) -> bool:
        if not self.segments:
            raise EmptyNeighborhood(f"V{self.polarity} has no defining segments")
        return any(_contains(p, s, cyclic) for s in self._both)

    def witness(self, p: str, cyclic: bool = False):
        for s in self._both:
            if _contains(p, s, cyclic):
                return s
        return None


def in_neighborhood(p: str, V: Neighborhood, cyclic: bool = False) -> bool:
    return V.contains(p, cyclic)


class Dynamics:
    """A representative of φ, one of φ⁻¹, and a subgroup system, with cached data."""

    def __init__(self, f: TopRep, f_inv: TopRep | None, K: SubgroupSystem):
        self.f, self.f_inv, self.K = f, f_inv, K
        self._families = {}
        self._hoods = None

    @property
    def C(self) -> int:
        cs = [global_constant(g) for g in (self.f, self.f_inv) if g is not None and g.eg_strata()]
        return max(cs) if cs else 0

    def families(self, sign: int = 1) -> list:
        g = self.f if sign > 0 else self.f_inv
        if g is None:
            return []
        if sign not in self._families:
            self._families[sign] = [LeafFamily(g, r) for r in g.eg_strata()]
        return self._families[sign]

    def uncarried(self, sign: int = 1) -> list:
        L = max(2 * self.C, 1)
        return [fam for fam in self.families(sign) if not fam.carried_by(self.K, L)]

    def neighborhoods(self, max_doublings: int = 4):
        if self._hoods is None:
            self._hoods = build_neighborhoods(self, max_doublings=max_doublings)
        return self._hoods


def build_neighborhoods(dyn: Dynamics, max_doublings: int = 4):
    """Defining segments of V⁺ and V⁻ for the laminations not carried by K."""
    plus, minus = dyn.uncarried(1), dyn.uncarried(-1)
    if not plus or not minus:
        raise EmptyLaminationSet("no lamination outside K on one side")
    T = 2 * dyn.C
    for _ in range(max_doublings + 1):
        sp = set().union(*(fam.factors(T) for fam in plus))
        sm = set().union(*(fam.factors(T) for fam in minus))
        sm_both = sm | {W.inverse(s) for s in sm}
        clash = sp & sm_both
        if not clash:
            return Neighborhood("+", frozenset(sp), T), Neighborhood("-", frozenset(sm), T)
        bad = min(clash, key=W.shortlex_key)
        pair = (bad, bad if bad in sm else W.inverse(bad))
        T *= 2
    raise DisjointnessFailed("V+ and V- overlap after doubling", pair=pair)


# -- weak attraction ----------------------------------------------------------------

@dataclass
class Attraction:
    kind: str  # "AttractedPlus", "AttractedMinus", "CarriedByK", "Inconclusive"
    n: int | None = None
    trace: list = field(default_factory=list)

    @property
    def attracted(self) -> bool:
        return self.kind in ("AttractedPlus", "AttractedMinus")

    def to_json(self):
        return {"result": self.kind, "n": self.n, "trace": self.trace}


def weak_attraction_test(dyn: Dynamics, alpha: str, maxiter: int = 20) -> Attraction:
    """Iterate a circuit both ways until it enters V⁺ or V⁻.

    Forward and backward iterates are examined alternately at each ``n``;
    forward wins a tie.
    """
    core = W.cyclic_core(alpha)
    if dyn.K.carries(core):
        return Attraction("CarriedByK", 0, [])
    Vp, Vm = dyn.neighborhoods()
    fwd = bwd = core
    trace = []
    for n in range(0, maxiter + 1):
        if n:
            fwd = dyn.f.iterate(fwd, 1, cyclic=True)
            bwd = dyn.f_inv.iterate(bwd, 1, cyclic=True)
        trace.append([n, len(fwd), len(bwd)])
        if Vp.contains(fwd, cyclic=True):
            return Attraction("AttractedPlus", n, trace)
        if Vm.contains(bwd, cyclic=True):
            return Attraction("AttractedMinus", n, trace)
    return Attraction("Inconclusive", None, trace)


# -- admissibility ------------------------------------------------------------------

def check_admissible(dyn: Dynamics, maxlen: int = 6, maxiter: int = 30) -> dict:
    """Evaluate SA1-SA5; SA2 and SA5 rest on finite samples and are tagged empirical."""
    items = {}
    ok, wit = is_malnormal(dyn.K)
    items["SA1"] = {"status": "pass" if ok else "fail", "empirical": False,
                    "witness": None if ok else {"s": wit[0], "t": wit[1],
                                                "component": wit[2].generators()}}
    up, um = dyn.uncarried(1), dyn.uncarried(-1)
    ok2 = bool(up) and bool(um)
    items["SA2"] = {"status": "pass" if ok2 else "fail", "empirical": True,
                    "uncarried_plus": [fam.r for fam in up],
                    "uncarried_minus": [fam.r for fam in um],
                    "segment_length": 2 * dyn.C}
    inv_ok, info = invariance(dyn.K, dyn.f.to_automorphism())
    items["SA3"] = {"status": "pass" if inv_ok else "fail", "empirical": False,
                    "witness": None if inv_ok else {"component": info}}
    hoods = None
    if ok2:
        try:
            hoods = dyn.neighborhoods()
            items["SA4"] = {"status": "pass", "empirical": False,
                            "segment_length": hoods[0].length,
                            "n_plus": len(hoods[0].segments), "n_minus": len(hoods[1].segments)}
        except DisjointnessFailed as exc:
            items["SA4"] = {"status": "fail", "empirical": False, "witness": list(exc.pair)}
    else:
        items["SA4"] = {"status": "fail", "empirical": False, "witness": "no neighborhoods"}
    if hoods is None:
        items["SA5"] = {"status": "fail", "empirical": True, "witness": None,
                        "reason": "neighborhoods unavailable", "maxlen": maxlen, "maxiter": maxiter}
    else:
        failures = []
        tested = 0
        for c in W.conjugacy_classes(maxlen, dyn.f.graph.rank):
            res = weak_attraction_test(dyn, c, maxiter)
            if res.kind == "CarriedByK":
                continue
            tested += 1
            if not res.attracted:
                failures.append(c)
        items["SA5"] = {"status": "pass" if not failures else "fail", "empirical": True,
                        "maxlen": maxlen, "maxiter": maxiter, "tested": tested,
                        "witness": failures[0] if failures else None,
                        "failures": failures}
    return {"admissible": all(v["status"] == "pass" for v in items.values()),
            "items": items}


# -- nonattracting systems and the sink ---------------------------------------------

def _attracted_to(f: TopRep, fam: LeafFamily, V: Neighborhood, c: str, maxiter: int) -> bool:
    x = W.cyclic_core(c)
    for _ in range(maxiter + 1):
        if V.contains(x, cyclic=True):
            return True
        x = f.iterate(x, 1, cyclic=True)
    return False


def _subgraph_system(f: TopRep, edges: set) -> list:
    """Generator lists of pi_1 of the components of the subgraph spanned by ``edges``."""
    G = f.graph
    parent = list(range(G.n_vertices))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for e in G.edges:
        if e.id in edges:
            a, b = find(e.src), find(e.dst)
            if a != b:
                parent[a] = b
    out = []
    comps = {}
    for e in G.edges:
        if e.id in edges:
            comps.setdefault(find(e.src), []).append(e)
    for root, es in sorted(comps.items()):
        verts = {x for e in es for x in (e.src, e.dst)}
        if len(es) < len(verts):
            continue
        # loops in this component, written as words via the marking
        tree_path = {min(verts): ""}
        frontier = [min(verts)]
        used = set()
        while frontier:
            v = frontier.pop()
            for e in es:
                for d, a, b in ((e.id, e.src, e.dst), (e.id.upper(), e.dst, e.src)):
                    if a == v and b not in tree_path:
                        tree_path[b] = tree_path[v] + d
                        used.add(e.id)
                        frontier.append(b)
        gens = []
        for e in es:
            if e.id in used:
                continue
            loop = tree_path[e.src] + e.id + W.inverse(tree_path[e.dst])
            gens.append(G.path_to_word(W.reduce(loop)))
        if any(gens):
            out.append(gens)
    return out


def nonattracting_system(f: TopRep, r: int, supplied: SubgroupSystem | None = None,
                         verify_len: int = 5, maxiter: int = 20, nielsen_len: int = 8,
                         periodic_len: int = 0, periodic_period: int = 2) -> SubgroupSystem:
    """Nonattracting system for the lamination of stratum ``r``.

    With ``supplied`` the given system is only verified.  Otherwise the system
    is built from the components of the subgraph of edges outside H_r and the
    zero strata, plus closed height-r Nielsen loops up to ``nielsen_len``.
    Setting ``periodic_len`` also adds height-r periodic circuits up to that
    length (period at most ``periodic_period``).  Verification iterates every
    carried class up to ``verify_len`` and raises ``VerificationFailed`` if one
    is attracted to the lamination.
    """
    if r not in f.eg_strata():
        raise NotEG(f"stratum {r} is not EG")
    if supplied is None:
        zero = {s.r for s in f.strata_report.strata if s.kind == "zero"}
        edges = {e.id for e in f.graph.edges if e.stratum != r and e.stratum not in zero}
        gen_lists = _subgraph_system(f, edges)
        G = f.graph
        for p, _k in find_nielsen_paths(f, nielsen_len, height=r):
            if G.origin(p[0]) == G.terminus(p[-1]):
                gen_lists.append([G.path_to_word(p)])
        if periodic_len:
            for c, _k in find_periodic_circuits(f, periodic_len, periodic_period, height=r):
                gen_lists.append([G.path_to_word(c)])
        S = SubgroupSystem.from_lists(gen_lists) if gen_lists else SubgroupSystem.empty()
        S = _drop_nested(S)
    else:
        S = supplied
    verify_nonattracting(f, r, S, verify_len, maxiter)
    return S


def _drop_nested(S: SubgroupSystem) -> SubgroupSystem:
    """Remove components conjugate into another component."""
    comps = list(S.components)
    keep = []
    for i, A in enumerate(comps):
        cert = A.certificate()
        if not any(i != j and any(g.certificate() == cert for g in fiber_product(A, B))
                   for j, B in enumerate(comps)):
            keep.append(A)
    return SubgroupSystem(tuple(keep))


def verify_nonattracting(f: TopRep, r: int, S: SubgroupSystem, verify_len: int = 5,
                         maxiter: int = 20) -> None:
    fam = LeafFamily(f, r)
    T = 2 * global_constant(f)
    V = Neighborhood("+", frozenset(fam.factors(T)), T)
    for c in W.conjugacy_classes(verify_len, f.graph.rank):
        if S.carries(c) and _attracted_to(f, fam, V, c, maxiter):
            raise VerificationFailed(f"class [{c}] is carried but attracted", witness=c)


def sink(f: TopRep, systems: list | None = None) -> SubgroupSystem:
    """Iterated meet of the nonattracting systems of all EG strata."""
    eg = f.eg_strata()
    if not eg:
        return SubgroupSystem.whole(f.graph.rank)
    if systems is None:
        systems = [nonattracting_system(f, r) for r in eg]
    out = systems[0]
    for S in systems[1:]:
        out = meet(out, S)
    return out


def sink_report(f: TopRep, systems: list | None = None, maxlen: int = 5) -> dict:
    """The sink plus its malnormality and the carried-iff-carried-by-all check."""
    eg = f.eg_strata()
    if systems is None:
        systems = [nonattracting_system(f, r) for r in eg] if eg else []
    K = sink(f, systems)
    ok, wit = is_malnormal(K)
    mismatches = []
    for c in W.conjugacy_classes(maxlen, f.graph.rank):
        a = K.carries(c)
        b = all(S.carries(c) for S in systems) if systems else True
        if a != b:
            mismatches.append(c)
    return {"sink": K.to_json(), "malnormal": ok,
            "carried_iff_all": not mismatches, "mismatches": mismatches, "maxlen": maxlen}


# -- independence -------------------------------------------------------------------

def leaf_windows(dyn: Dynamics, depth: int = 12) -> list:
    """Leaf windows of both polarities (uncarried laminations only)."""
    out = []
    for sign in (1, -1):
        for fam in dyn.uncarried(sign):
            fam.ensure_depth(depth)
            out.append(fam.window)
    return out


def transport_windows(windows: list, theta: W.BasisAutomorphism) -> list:
    """Images of leaf windows under ``theta``, trimmed by the longest letter image."""
    trim = max(len(w) for w in theta.images)
    out = []
    for w in windows:
        x = theta.apply(w)
        out.append(x[trim:len(x) - trim] if len(x) > 2 * trim else "")
    return out


def independence_test(windows_i: list, windows_j: list, L: int = 40):
    """No common leaf subsegment of length ``L`` (either orientation).

    Returns ``(True, None)`` or ``(False, segment)``.
    """
    seen = set()
    for w in windows_i:
        for x in (w, W.inverse(w)):
            for k in range(len(x) - L + 1):
                seen.add(x[k:k + L])
    for w in windows_j:
        for k in range(len(w) - L + 1):
            s = w[k:k + L]
            if s in seen:
                return False, s
    return True, None
