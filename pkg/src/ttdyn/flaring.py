"""Finite experiments on exponential growth of electric lengths.

Every test produces a :class:`FlareReport` holding the raw traces, so that the
verdict can be recomputed from the stored numbers alone.  A "holds" verdict is
always scoped to the sampled family and the exponent range that was tried.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import words as W
from .electro import ElectricContext, legality
from .errors import BadConjugator, CapExceeded, NotInvariant, PreconditionFailed
from .laminations import Dynamics
from .stallings import CoreGraph
from .trainmap import iteration_cap


class Iterator:
    """Iterates of words and circuits under an automorphism and its inverse."""

    def __init__(self, aut: W.BasisAutomorphism):
        self.aut = aut
        self.inv = W.invert(aut)

    def orbit(self, w: str, n_max: int, sign: int = 1, cyclic: bool = False) -> list:
        g = self.aut if sign > 0 else self.inv
        cap = iteration_cap()
        w = W.reduce(w)
        if cyclic:
            w = W.cyclic_core(w)
        out = [w]
        for _ in range(n_max):
            x = w.translate(g.table)
            if len(x) > cap:
                raise CapExceeded(f"iterate length {len(x)} exceeds cap {cap}")
            w = W.reduce(x)
            if cyclic:
                w = W.cyclic_core(w)
            out.append(w)
        return out


# -- reports ---------------------------------------------------------------------

def _max_rule(factor):
    def ok(sample, n):
        s = sample["series"]
        return factor * sample["base"] <= max(s["fwd"][n], s["bwd"][n])
    return ok


def _count_rule(factor, need):
    def ok(sample, n):
        hits = sum(1 for v in sample["series"].values() if v[n] >= factor * sample["base"])
        return hits >= need
    return ok


def _first_good(sample, ok, n_min, n_max):
    """Least N with the inequality true for every n in [N, n_max], else None."""
    N = None
    for n in range(n_max, n_min - 1, -1):
        if ok(sample, n):
            N = n
        else:
            break
    return N


@dataclass
class FlareReport:
    test: str
    params: dict
    samples: list
    rejected: list = field(default_factory=list)
    verdict: str = "inconclusive"
    N: int | None = None
    witness: object = None
    notes: list = field(default_factory=list)

    def _rule(self):
        p = self.params
        if self.test in ("kstretch", "3of4"):
            return _count_rule(p["factor"], p["need"])
        return _max_rule(p["factor"])

    def evaluate(self):
        ok = self._rule()
        n_min, n_max = self.params.get("n_min", 1), self.params["n_max"]
        Ns = []
        self.witness = None
        if any(s.get("truncated") for s in self.samples):
            self.verdict, self.N = "inconclusive", None
            self.witness = next(s["sample"] for s in self.samples if s.get("truncated"))
            return self
        for s in self.samples:
            s["N"] = _first_good(s, ok, n_min, n_max)
            if s["N"] is None and self.witness is None:
                self.witness = s["sample"]
            Ns.append(s["N"])
        if not self.samples:
            self.verdict, self.N = "inconclusive", None
        elif self.witness is not None:
            self.verdict, self.N = "violated", None
        else:
            self.verdict, self.N = "holds", max(Ns)
        return self

    def verify_from_trace(self) -> bool:
        """Recompute every per-sample threshold from the traces and compare."""
        saved = (self.verdict, self.N, self.witness, [s.get("N") for s in self.samples])
        self.evaluate()
        now = (self.verdict, self.N, self.witness, [s.get("N") for s in self.samples])
        return saved == now

    def violations(self) -> list:
        return [s["sample"] for s in self.samples if s.get("N") is None]

    @property
    def exit_code(self) -> int:
        return {"holds": 0, "violated": 1}.get(self.verdict, 2)

    def to_json(self) -> dict:
        return {"test": self.test, "params": self.params, "verdict": self.verdict,
                "N": self.N, "witness": self.witness, "notes": self.notes,
                "rejected": self.rejected, "samples": self.samples}

    def summary(self) -> str:
        lines = [f"test: {self.test}", f"verdict: {self.verdict}"
                 + (f" (N = {self.N})" if self.N is not None else "")]
        if self.witness is not None:
            lines.append(f"witness: {self.witness}")
        lines.append(f"samples: {len(self.samples)}  rejected: {len(self.rejected)}")
        lines.append(f"{'sample':<24}{'base':>6}{'N':>6}")
        for s in self.samples[:50]:
            n = "-" if s.get("N") is None else str(s["N"])
            lines.append(f"{str(s['sample'])[:23]:<24}{s['base']:>6}{n:>6}")
        if len(self.samples) > 50:
            lines.append(f"... {len(self.samples) - 50} more")
        lines += self.notes
        return "\n".join(lines) + "\n"


# -- legality growth and exponent control ---------------------------------------

def _check_in_vplus(dyn: Dynamics, beta: str):
    Vp, Vm = dyn.neighborhoods()
    beta = W.cyclic_core(beta)
    if not Vp.contains(beta, cyclic=True):
        raise PreconditionFailed("circuit is not in V+")
    if Vm.contains(beta, cyclic=True):
        raise PreconditionFailed("circuit is in V-")
    return beta


def legality_growth(ctx: ElectricContext, dyn: Dynamics, beta: str, N: int = 15,
                    leaf_factor: float = 1.0) -> dict:
    """Trace of LEG_K along forward iterates, with the tail minimum and where it starts."""
    beta = _check_in_vplus(dyn, beta)
    trace = []
    x = beta
    for n in range(N + 1):
        if n:
            x = dyn.f.iterate(x, 1, cyclic=True)
        trace.append(legality(ctx, dyn, x, leaf_factor=leaf_factor).ratio)
    tail = trace[N // 2:]
    eps = min(tail)
    N0 = next(n for n in range(N + 1) if all(v >= eps for v in trace[n:]))
    return {"trace": trace, "epsilon": eps, "N0": N0}


def exponent_control(ctx: ElectricContext, dyn: Dynamics, beta: str, A: float,
                     n_max: int = 40, window: int = 5) -> dict:
    """Least N1 with ``L_K(f^n beta) >= A L_K(beta)`` for every n in [N1, N1 + window]."""
    beta = _check_in_vplus(dyn, beta)
    lk = []
    x = beta
    for n in range(n_max + window + 1):
        if n:
            x = dyn.f.iterate(x, 1, cyclic=True)
        lk.append(legality(ctx, dyn, x).L_K)
        if n >= window:
            start = n - window
            if all(v >= A * lk[0] for v in lk[start:n + 1]):
                return {"N1": start, "trace": lk}
    return {"N1": None, "trace": lk}


# -- conjugacy and hallway flaring ------------------------------------------------

def conjugacy_flaring(ctx: ElectricContext, aut: W.BasisAutomorphism, classes,
                      n_max: int = 16, factor: float = 3) -> FlareReport:
    """Test ``factor ||a|| <= max(||phi^n a||, ||phi^-n a||)`` on conjugacy classes."""
    it = Iterator(aut)
    samples, rejected = [], []
    for c in classes:
        c = W.canonical(c)
        if not c or ctx.K.carries(c):
            rejected.append({"sample": c, "reason": "carried by K"})
            continue
        s = {"sample": c, "base": ctx.electric_norm(c)}
        try:
            s["series"] = {"fwd": [ctx.electric_norm(x) for x in it.orbit(c, n_max, 1, True)],
                           "bwd": [ctx.electric_norm(x) for x in it.orbit(c, n_max, -1, True)]}
        except CapExceeded:
            s["series"] = {"fwd": [], "bwd": []}
            s["truncated"] = True
        samples.append(s)
    rep = FlareReport("conj", {"factor": factor, "n_max": n_max, "n_min": 1,
                               "automorphism": aut.to_json(), "K": ctx.K.to_json()},
                      samples, rejected)
    return rep.evaluate()


def hallway_flaring(ctx: ElectricContext, aut: W.BasisAutomorphism, words, n_max: int = 16,
                    L: int = 0, factor: float = 2, moreover: bool = False) -> FlareReport:
    """Test ``factor |w| <= max(|Phi^n w|, |Phi^-n w|)`` in electric length on elements.

    With ``moreover`` only cyclically reduced words of electric length above 1
    are kept and the ``L`` threshold is not applied.  A word and its inverse
    have mirrored traces, so only one of each pair is run.
    """
    it = Iterator(aut)
    samples, rejected = [], []
    seen = set()
    for w in words:
        w = W.reduce(w)
        if not w or w in seen or W.inverse(w) in seen:
            continue
        seen.add(w)
        if ctx.is_piece(w):
            rejected.append({"sample": w, "reason": "in K"})
            continue
        el = ctx.electric_length(w)
        if moreover:
            if not W.is_cyclically_reduced(w) or el <= 1:
                rejected.append({"sample": w, "reason": "not cyclically reduced or |w|_el <= 1"})
                continue
        elif el < L:
            rejected.append({"sample": w, "reason": f"|w|_el < {L}"})
            continue
        s = {"sample": w, "base": el}
        try:
            s["series"] = {"fwd": [ctx.electric_length(x) for x in it.orbit(w, n_max, 1)],
                           "bwd": [ctx.electric_length(x) for x in it.orbit(w, n_max, -1)]}
        except CapExceeded:
            s["series"] = {"fwd": [], "bwd": []}
            s["truncated"] = True
        samples.append(s)
    rep = FlareReport("hall", {"factor": factor, "n_max": n_max, "n_min": 1, "L": L,
                               "moreover": moreover, "automorphism": aut.to_json(),
                               "K": ctx.K.to_json()}, samples, rejected)
    return rep.evaluate()


# -- several automorphisms --------------------------------------------------------

def k_stretch(ctx: ElectricContext, auts: list, classes, n_max: int = 15,
              factor: float = 3, independence=None) -> FlareReport:
    """At least ``2k - 1`` of the ``2k`` iterate norms reach ``factor`` times the norm."""
    k = len(auts)
    its = [Iterator(a) for a in auts]
    samples, rejected = [], []
    for c in classes:
        c = W.canonical(c)
        if not c or ctx.K.carries(c):
            rejected.append({"sample": c, "reason": "carried by K"})
            continue
        series = {}
        for i, it in enumerate(its):
            series[f"{i}+"] = [ctx.electric_norm(x) for x in it.orbit(c, n_max, 1, True)]
            series[f"{i}-"] = [ctx.electric_norm(x) for x in it.orbit(c, n_max, -1, True)]
        samples.append({"sample": c, "base": ctx.electric_norm(c), "series": series})
    test = "3of4" if k == 2 else "kstretch"
    rep = FlareReport(test, {"factor": factor, "n_max": n_max, "n_min": 1, "k": k,
                             "need": 2 * k - 1,
                             "automorphisms": [a.to_json() for a in auts],
                             "K": ctx.K.to_json(), "independence": independence},
                      samples, rejected)
    rep.evaluate()
    if independence is not None and not independence.get("independent", True):
        rep.notes.append("independence test failed: " + str(independence.get("witness")))
    return rep


def three_of_four(ctx: ElectricContext, phi: W.BasisAutomorphism, psi: W.BasisAutomorphism,
                  classes, n_max: int = 15, factor: float = 3, independence=None) -> FlareReport:
    return k_stretch(ctx, [phi, psi], classes, n_max, factor, independence)


def stretch_counts(report: FlareReport, n: int) -> dict:
    """Per-sample number of iterate norms reaching the factor at exponent ``n``."""
    f = report.params["factor"]
    return {s["sample"]: sum(1 for v in s["series"].values() if v[n] >= f * s["base"])
            for s in report.samples}


# -- cone-bounded hallways ----------------------------------------------------------

def _based(gens) -> CoreGraph:
    return CoreGraph.from_generators(list(gens))


def _same_subgroup(gens1, gens2) -> bool:
    return _based(gens1).certificate() == _based(gens2).certificate()


def find_lift(aut: W.BasisAutomorphism, gens, maxlen: int = 3) -> W.BasisAutomorphism:
    """A lift ``i_x o aut`` that maps the subgroup ``<gens>`` onto itself."""
    rank = aut.rank
    for n in range(0, maxlen + 1):
        for x in W.reduced_words(n, rank):
            lift = W.BasisAutomorphism.inner(rank, x).compose(aut)
            if _same_subgroup([lift.apply(g) for g in gens], gens):
                return lift
    raise NotInvariant(f"no lift fixing <{','.join(gens)}> with conjugator length <= {maxlen}")


def find_conjugator(aut: W.BasisAutomorphism, gens, maxlen: int = 3) -> str:
    """Some ``x`` with ``aut(<gens>) = x^-1 <gens> x``."""
    img = [aut.apply(g) for g in gens]
    for n in range(0, maxlen + 1):
        for x in W.reduced_words(n, aut.rank):
            if _same_subgroup(img, [W.conjugate(g, W.inverse(x)) for g in gens]):
                return x
    raise NotInvariant(f"<{','.join(gens)}> is not mapped to a conjugate of itself")


def conjugator_growth(ctx: ElectricContext, aut: W.BasisAutomorphism, components: list,
                      s: int, pairs: list, n_max: int = 12, factor: float = 2) -> FlareReport:
    """Growth of the conjugators ``x_t`` for a lift fixing ``K_s``.

    ``components`` are generator lists of the based subgroups ``K_i`` and
    ``pairs`` is a list of ``(t, x_t)`` with ``aut(K_t) = x_t^-1 K_t x_t``.
    """
    Ks = _based(components[s])
    if not _same_subgroup([aut.apply(g) for g in components[s]], components[s]):
        raise NotInvariant(f"lift does not fix K_{s}")
    it = Iterator(aut)
    samples = []
    for t, x in pairs:
        if t == s:
            continue
        x = W.reduce(x)
        Kt = _based(components[t])
        if Ks.contains_element(x) or Kt.contains_element(x):
            raise BadConjugator(f"x_{t} = {x or '1'} lies in K_{s} or K_{t}")
        img = [aut.apply(g) for g in components[t]]
        if not _same_subgroup(img, [W.conjugate(g, W.inverse(x)) for g in components[t]]):
            raise NotInvariant(f"aut(K_{t}) is not x_{t}^-1 K_{t} x_{t}")
        fwd = it.orbit(x, n_max, 1)
        bwd = it.orbit(x, n_max, -1)
        tele = []
        prod = ""
        for n in range(n_max + 1):
            tele.append(ctx.electric_length(prod))
            prod = W.multiply(prod, fwd[n])
        samples.append({"sample": f"{t}:{x}", "base": ctx.electric_length(x),
                        "series": {"fwd": [ctx.electric_length(y) for y in fwd],
                                   "bwd": [ctx.electric_length(y) for y in bwd]},
                        "telescoped": tele})
    rep = FlareReport("cone", {"factor": factor, "n_max": n_max, "n_min": 1, "s": s,
                               "automorphism": aut.to_json(),
                               "components": [list(c) for c in components]}, samples)
    rep.evaluate()
    if not samples:
        rep.verdict, rep.N = "holds", 0
        rep.notes.append("no pairs with t != s: vacuous")
    return rep
