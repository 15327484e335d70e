import random

import pytest
from hypothesis import given, settings, strategies as st

from ttdyn import words as W
from ttdyn.electro import ElectricContext, legality, length_comparison
from ttdyn.errors import EmptySample, NotMalnormal, SearchBudgetExceeded
from ttdyn.inputs import load_system, load_toprep
from ttdyn.laminations import Dynamics
from ttdyn.stallings import CoreGraph, SubgroupSystem

GOLD = load_toprep("f3gold.json")
K_A = load_system("k_a.json")


@pytest.fixture(scope="module")
def ctx2():
    return ElectricContext(SubgroupSystem.from_lists([["a"]]), 2)


@pytest.fixture(scope="module")
def ctx3():
    return ElectricContext(K_A, 3)


@pytest.fixture(scope="module")
def dyn():
    return Dynamics(GOLD, load_toprep("f3gold_inv.json"), K_A)


def brute_electric(ctx, w):
    """Oracle: shortest split of w into letters and K-pieces, by trying every cut."""
    n = len(w)
    best = [0] + [n + 1] * n
    for i in range(1, n + 1):
        for j in range(i):
            part = w[j:i]
            if len(part) == 1 or _is_loop(ctx, part):
                best[i] = min(best[i], best[j] + 1)
    return best[n]


def _is_loop(ctx, p):
    return any(G.read(p, v) == v for G in ctx.K.components for v in range(G.n_vertices))


def test_examples(ctx3):
    assert ctx3.electric_length("aaaaa") == 1
    assert ctx3.electric_length("aaaaabaaac") == 4
    assert ctx3.electric_length("") == 0
    assert ctx3.exact_electric_length("aaaaaaaaa", 9) == 1
    assert ctx3.exact_electric_length("b") == 1


def test_not_malnormal():
    with pytest.raises(NotMalnormal):
        ElectricContext(SubgroupSystem.from_lists([["aa"]]), 2)


@settings(max_examples=200)
@given(st.text(alphabet="aAbB", max_size=14))
def test_dp_matches_cut_oracle(w):
    ctx = ElectricContext(SubgroupSystem.from_lists([["a"]]), 2)
    w = W.reduce(w)
    assert ctx.electric_length(w) == brute_electric(ctx, w)


def test_dp_vs_exact_sample(ctx2):
    rng = random.Random(2)
    words = list(W.words_up_to(6, 2))
    for w in rng.sample(words, 150):
        assert ctx2.exact_electric_length(w, 8, radius=8) <= ctx2.electric_length(w)


def test_family_ajbak(ctx2):
    for j in range(1, 5):
        for k in range(1, 5):
            w = "a" * j + "b" + "a" * k
            assert ctx2.electric_length(w) == 3
            assert ctx2.exact_electric_length(w, 8) == 3


def test_pieces_at_other_vertices():
    # the core of <a, bab> has three vertices; "abb" is a loop at a vertex other than the base
    ctx = ElectricContext(SubgroupSystem.from_lists([["a", "bab"]]), 2, check=False)
    assert ctx.is_piece("abb")
    assert not CoreGraph.from_generators(["a", "bab"]).contains_element("abb")
    assert ctx.electric_length("abbb") == 2


def test_budget():
    ctx = ElectricContext(SubgroupSystem.from_lists([["a"]]), 3)
    with pytest.raises(SearchBudgetExceeded):
        ctx.exact_electric_length("bcbcbcbcbc", 8, budget=100)


def test_norm(ctx3):
    assert ctx3.electric_norm("aab") == 2
    assert ctx3.electric_norm("baaaB") == 1
    assert ctx3.electric_norm("") == 0


COMM = ElectricContext(SubgroupSystem.from_lists([["ab"], ["bcBC"]]), 3)


@given(st.text(alphabet="bBcC", max_size=16))
def test_norm_matches_all_rotations(w):
    # every letter is a K-letter here, so the seam shortcut is exercised
    core = W.cyclic_core(w)
    full = min((COMM.electric_length(r) for r in W.cyclic_rotations(core)), default=0)
    assert COMM.electric_norm(w) == full


def test_norm_long_commutator_power():
    assert COMM.electric_norm("bcBC" * 30) == 1
    assert COMM.electric_norm("cBCb" * 30) == 1


def test_legality_examples(ctx3, dyn):
    leg = legality(ctx3, dyn, GOLD.iterate("b", 8))
    assert leg.ratio == pytest.approx(1.0)
    for k in (1, 4):
        br = legality(ctx3, dyn, "a" * k)
        assert br.L_K == 0 and br.ratio == 0
    br = legality(ctx3, dyn, "aaab")
    assert br.L_K == 1 and br.L_leg == 0 and br.ratio == 0


def test_legality_breakdown_json(ctx3, dyn):
    br = legality(ctx3, dyn, "aab" + GOLD.iterate("c", 9))
    js = br.to_json()
    assert js["L_K"] == br.L_K and 0 <= js["LEG_K"] <= 1
    covered = sum(b - a for t in br.terms for a, b, lab in t.pieces)
    assert covered == sum(len(t.path) for t in br.terms if t.kind == "EG")


def test_length_comparison(ctx3, dyn):
    free = [w for w in W.conjugacy_classes(4, 3) if "a" not in w.lower()]
    assert length_comparison(ctx3, dyn, free)["J"] == 1
    rows = length_comparison(ctx3, dyn, ["a" * k + "b" for k in range(1, 12)])
    assert rows["J"] == 2
    assert {r["electric"] for r in rows["rows"]} == {2}
    with pytest.raises(EmptySample):
        length_comparison(ctx3, dyn, ["aaa"])
