"""Electric (coned-off) length relative to a subgroup system, and legality.

A subword of ``w`` is a *K-piece* when it reads a closed loop at some vertex of
the core graph of some component of K, i.e. it is an element of one of the
finitely many conjugates of ``K_s`` carried by that graph.  Coning these off,
a K-piece costs one step just like a letter.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

from . import words as W
from .errors import EmptySample, NotMalnormal, SearchBudgetExceeded
from .laminations import Dynamics
from .stallings import SubgroupSystem, is_malnormal
from .trainmap import find_nielsen_paths


class ElectricContext:
    """Coned-off length data for a malnormal subgroup system ``K``."""

    def __init__(self, K: SubgroupSystem, rank: int | None = None, check: bool = True):
        if check:
            ok, wit = is_malnormal(K)
            if not ok:
                raise NotMalnormal(f"system is not malnormal (components {wit[0]}, {wit[1]})")
        self.K = K
        self.rank = rank or max((W.word_rank("".join(g)) for g in K.generator_lists()), default=1)
        self.cores = [G for G in K.components]
        letters = {c for G in self.cores for a in G.adj for c in a}
        self.k_letters = "".join(sorted(letters, key=W.order_key))
        self._runs = re.compile(f"[{re.escape(self.k_letters)}]+") if letters else None
        self._balls = {}

    # K-pieces ------------------------------------------------------------
    def loops_from(self, w: str, j: int, stop: int | None = None):
        """End positions ``i > j`` with ``w[j:i]`` a K-piece."""
        stop = len(w) if stop is None else stop
        ends = set()
        for G in self.cores:
            for v in range(G.n_vertices):
                x = v
                for i in range(j, stop):
                    x = G.adj[x].get(w[i])
                    if x is None:
                        break
                    if x == v:
                        ends.add(i + 1)
        return sorted(ends)

    def is_piece(self, w: str) -> bool:
        return bool(w) and len(w) in self.loops_from(w, 0)

    def runs(self, w: str):
        """Maximal runs of letters that occur in some component (pieces live inside these)."""
        if self._runs is None:
            return []
        return [(m.start(), m.end()) for m in self._runs.finditer(w)]

    def pieces(self, w: str) -> list:
        """All intervals ``(j, i)`` such that ``w[j:i]`` is a K-piece."""
        out = []
        for a, b in self.runs(w):
            for j in range(a, b):
                for i in self.loops_from(w, j, b):
                    out.append((j, i))
        return out

    # lengths ----------------------------------------------------------------
    def electric_length(self, w: str) -> int:
        """Fewest letters and K-pieces whose concatenation spells ``w``."""
        w = W.reduce(w)
        # letters outside every run cost one each; only runs need the DP
        total = len(w)
        for a, b in self.runs(w):
            total -= (b - a) - self._run_cost(w, a, b)
        return total

    def _run_cost(self, w: str, a: int, b: int) -> int:
        n = b - a
        cost = list(range(n + 1))
        for j in range(n):
            c = cost[j] + 1
            if cost[j + 1] > c:
                cost[j + 1] = c
            for i in self.loops_from(w, a + j, b):
                i -= a
                if cost[i] > c:
                    cost[i] = c
        return cost[n]

    def electric_norm(self, alpha: str) -> int:
        """Minimum electric length over the cyclic rotations of the cyclic core."""
        core = W.cyclic_core(alpha)
        if not core:
            return 0
        for k, c in enumerate(core):
            if c not in self.k_letters:
                return self.electric_length(core[k:] + core[:k])
        # an optimal cyclic factorization either cuts at 0 or has a piece
        # across the seam, so only those rotations need the DP
        n = len(core)
        doubled = core + core
        starts = {0}
        for j in range(1, n):
            if any(i > n for i in self.loops_from(doubled, j, j + n)):
                starts.add(j)
        return min(self.electric_length(core[k:] + core[:k]) for k in starts)

    # exact search ------------------------------------------------------------
    def k_elements(self, cap: int) -> list:
        """Nontrivial reduced K-pieces of length at most ``cap``."""
        out = set()
        for G in self.cores:
            for v in range(G.n_vertices):
                stack = [(v, "")]
                while stack:
                    x, p = stack.pop()
                    if p and x == v:
                        out.add(p)
                    if len(p) == cap:
                        continue
                    for c, y in G.adj[x].items():
                        if p and c == p[-1].swapcase():
                            continue
                        stack.append((y, p + c))
        return sorted(out, key=W.shortlex_key)

    def ball(self, cap: int, radius: int, budget: int = 2_000_000) -> dict:
        """Breadth-first distances from the identity inside the word ball of ``radius``."""
        key = (cap, radius)
        if key in self._balls:
            return self._balls[key]
        for (c0, r0), d in self._balls.items():
            if c0 == cap and r0 >= radius:
                return d
        steps = list(W.alphabet(self.rank)) + self.k_elements(cap)
        dist = {"": 0}
        q = deque([""])
        while q:
            u = q.popleft()
            du = dist[u] + 1
            for s in steps:
                v = W.multiply(u, s)
                if len(v) <= radius and v not in dist:
                    dist[v] = du
                    q.append(v)
                    if len(dist) > budget:
                        raise SearchBudgetExceeded(f"ball exceeds {budget} words")
        self._balls[key] = dist
        return dist

    def exact_electric_length(self, w: str, cap: int = 8, radius: int | None = None,
                              budget: int = 2_000_000) -> int:
        """Search distance from 1 to ``w`` with letter and K-element steps.

        Only words of length at most ``radius`` (default ``|w| + 2``) are
        visited, so the value is an upper bound on the coned-off distance.
        """
        if cap < 1:
            raise ValueError("cap must be >= 1")
        w = W.reduce(w)
        radius = len(w) + 2 if radius is None else radius
        if (cap, radius) in self._balls:
            return self._balls[(cap, radius)][w]
        return self._meet_in_middle(w, cap, radius, budget)

    def _meet_in_middle(self, w: str, cap: int, radius: int, budget: int) -> int:
        # the step set is closed under inverses, so search from both ends
        steps = list(W.alphabet(self.rank)) + self.k_elements(cap)
        sides = [{"": 0}, {w: 0}]
        frontiers = [[""], [w]]
        if w == "":
            return 0
        visited = 2
        while frontiers[0] and frontiers[1]:
            k = 0 if len(frontiers[0]) <= len(frontiers[1]) else 1
            dist, other = sides[k], sides[1 - k]
            nxt = []
            best = None
            for u in frontiers[k]:
                du = dist[u] + 1
                for s in steps:
                    v = W.multiply(u, s)
                    if len(v) > radius or v in dist:
                        continue
                    dist[v] = du
                    nxt.append(v)
                    if v in other:
                        cand = du + other[v]
                        best = cand if best is None else min(best, cand)
            visited += len(nxt)
            if visited > budget:
                raise SearchBudgetExceeded(f"search exceeds {budget} words")
            if best is not None:
                return best
            frontiers[k] = nxt
        raise SearchBudgetExceeded("target unreachable inside the radius")


def electric_length(ctx: ElectricContext, w: str) -> int:
    return ctx.electric_length(w)


def electric_norm(ctx: ElectricContext, alpha: str) -> int:
    return ctx.electric_norm(alpha)


def exact_electric_length(ctx: ElectricContext, w: str, cap: int = 8, **kw) -> int:
    return ctx.exact_electric_length(w, cap, **kw)


# -- legality ---------------------------------------------------------------------

@dataclass
class Term:
    start: int
    path: str
    stratum: int
    kind: str  # "EG", "ignored"
    pieces: list = field(default_factory=list)  # (start, end, label)

    def to_json(self):
        return {"start": self.start, "path": self.path, "stratum": self.stratum,
                "kind": self.kind,
                "pieces": [{"start": a, "end": b, "label": lab} for a, b, lab in self.pieces]}


@dataclass
class LegalityBreakdown:
    circuit: str
    terms: list
    L_leg: int
    L_K: int
    threshold: int

    @property
    def ratio(self) -> float:
        return self.L_leg / self.L_K if self.L_K else 0.0

    def to_json(self):
        return {"circuit": self.circuit, "L_leg": self.L_leg, "L_K": self.L_K,
                "LEG_K": self.ratio, "threshold": self.threshold,
                "terms": [t.to_json() for t in self.terms]}


def _greedy(intervals):
    """Longest-first choice of pairwise disjoint intervals."""
    chosen = []
    for a, b in sorted(intervals, key=lambda t: (t[0] - t[1], t[0])):
        if all(b <= x or a >= y for x, y in chosen):
            chosen.append((a, b))
    return sorted(chosen)


def _split_terms(f, beta: str):
    """Cut a circuit where the stratum changes; zero-stratum edges join the run before them."""
    G = f.graph
    kinds = {s.r: s.kind for s in f.strata_report.strata}

    def key(c):
        return G.stratum_of(c)

    keys = [key(c) for c in beta]
    # carry the previous key across zero-stratum edges
    last = next((k for k in reversed(keys) if kinds[k] != "zero"), keys[0] if keys else None)
    eff = []
    for k in keys:
        if kinds[k] != "zero":
            last = k
        eff.append(last)
    if len(set(eff)) <= 1:
        return [(0, beta, eff[0] if eff else None)], beta
    # rotate so that the circuit starts at a term boundary
    shift = next(i for i in range(len(eff)) if eff[i] != eff[i - 1])
    beta = beta[shift:] + beta[:shift]
    eff = eff[shift:] + eff[:shift]
    terms = []
    start = 0
    for i in range(1, len(eff) + 1):
        if i == len(eff) or eff[i] != eff[start]:
            terms.append((start, beta[start:i], eff[start]))
            start = i
    return terms, beta


def legality(ctx: ElectricContext, dyn: Dynamics, beta: str, leaf_factor: float = 1.0,
             nielsen_len: int = 6) -> LegalityBreakdown:
    """Greedy decomposition of a circuit and its legality ratio relative to K.

    Within each term of an EG stratum whose lamination is not carried by K,
    K-pieces are removed first (longest first), then Nielsen paths are set
    aside, and what is left is covered by maximal leaf subpaths; those that
    are r-legal with H_r-length at least ``leaf_factor * C`` count as legal.
    """
    f = dyn.f
    beta = W.cyclic_core(beta)
    thr = max(1, int(round(leaf_factor * dyn.C)))
    fams = {fam.r: fam for fam in dyn.uncarried(1)}
    nielsen = set()
    for r in fams:
        nielsen.update(p for p, _ in find_nielsen_paths(f, nielsen_len, height=r))
    if not beta:
        return LegalityBreakdown(beta, [], 0, 0, thr)
    raw, beta = _split_terms(f, beta)
    terms = []
    L_leg = L_K = 0
    for start, t, r in raw:
        fam = fams.get(r)
        if fam is None:
            terms.append(Term(start, t, r, "ignored"))
            continue
        term = Term(start, t, r, "EG")
        kp = _greedy(ctx.pieces(t))
        term.pieces += [(a, b, "K") for a, b in kp]
        free = _gaps(len(t), kp)
        for a, b in free:
            L_K += b - a
        # Nielsen paths inside the free gaps
        npieces = []
        for a, b in free:
            seg = t[a:b]
            cand = [(a + i, a + i + len(p)) for p in nielsen
                    for i in _find_all(seg, p)]
            npieces += _greedy(cand)
        term.pieces += [(a, b, "nielsen") for a, b in npieces]
        fam.ensure(len(t) + 1)
        window = fam.window
        rev = W.inverse(window)
        for a, b in _gaps_within(free, npieces):
            for x, y in _leaf_cover(t, a, b, window, rev):
                seg = t[x:y]
                hr = fam.hr_length(seg)
                if hr >= thr and f.is_r_legal(seg, r):
                    term.pieces.append((x, y, "leaf"))
                    L_leg += y - x
                else:
                    term.pieces.append((x, y, "other"))
        term.pieces.sort()
        terms.append(term)
    return LegalityBreakdown(beta, terms, L_leg, L_K, thr)


def _find_all(s: str, p: str):
    i = s.find(p)
    while i != -1:
        yield i
        i = s.find(p, i + 1)


def _gaps(n: int, taken):
    out = []
    pos = 0
    for a, b in sorted(taken):
        if a > pos:
            out.append((pos, a))
        pos = max(pos, b)
    if pos < n:
        out.append((pos, n))
    return out


def _gaps_within(spans, taken):
    out = []
    for a, b in spans:
        inner = [(x - a, y - a) for x, y in taken if a <= x and y <= b]
        out += [(a + x, a + y) for x, y in _gaps(b - a, inner)]
    return out


def _leaf_cover(t: str, a: int, b: int, window: str, rev: str):
    """Cover ``t[a:b]`` left to right by maximal leaf subpaths."""
    out = []
    i = a
    while i < b:
        lo, hi = i + 1, b
        if t[i:lo] not in window and t[i:lo] not in rev:
            out.append((i, i + 1))
            i += 1
            continue
        while lo < hi:
            mid = (lo + hi + 1) // 2
            s = t[i:mid]
            if s in window or s in rev:
                lo = mid
            else:
                hi = mid - 1
        out.append((i, lo))
        i = lo
    return out


def legality_ratio(ctx: ElectricContext, dyn: Dynamics, beta: str, **kw) -> float:
    return legality(ctx, dyn, beta, **kw).ratio


def L_K(ctx: ElectricContext, dyn: Dynamics, beta: str) -> int:
    return legality(ctx, dyn, beta).L_K


def length_comparison(ctx: ElectricContext, dyn: Dynamics, samples) -> dict:
    """Largest distortion between L_K and the electric norm over uncarried samples."""
    rows = []
    for c in samples:
        c = W.cyclic_core(c)
        if not c or ctx.K.carries(c):
            continue
        lk = legality(ctx, dyn, c).L_K
        el = ctx.electric_norm(c)
        if lk == 0 or el == 0:
            ratio = float("inf")
        else:
            ratio = max(lk / el, el / lk)
        rows.append({"circuit": c, "L_K": lk, "electric": el, "ratio": ratio})
    if not rows:
        raise EmptySample("no uncarried circuit in the sample")
    J = max(r["ratio"] for r in rows)
    return {"J": J, "witness": max(rows, key=lambda r: r["ratio"])["circuit"], "rows": rows}
