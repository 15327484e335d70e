import pytest
from hypothesis import given, settings, strategies as st

from ttdyn import words as W
from ttdyn.errors import EmptyLaminationSet, EmptyNeighborhood, NotEG, VerificationFailed
from ttdyn.inputs import load_system, load_toprep
from ttdyn.laminations import (Dynamics, LeafFamily, Neighborhood, build_neighborhoods,
                               check_admissible, in_neighborhood, independence_test,
                               leaf_segment, leaf_windows, nonattracting_system, sink,
                               sink_report, weak_attraction_test)
from ttdyn.stallings import SubgroupSystem
from ttdyn.trainmap import TopRep

GOLD = load_toprep("f3gold.json")
GOLD_INV = load_toprep("f3gold_inv.json")
K_A = load_system("k_a.json")


@pytest.fixture(scope="module")
def dyn():
    return Dynamics(GOLD, GOLD_INV, K_A)


def test_leaf_segment_examples():
    seg = leaf_segment(GOLD, 2, 5)
    assert len(seg) == 5 and seg in GOLD.iterate("b", 5)
    assert leaf_segment(GOLD, 2, 1) in ("b", "c")
    for L in (3, 7, 20):
        assert leaf_segment(GOLD, 2, L) in leaf_segment(GOLD, 2, 2 * L)


def test_leaf_segments_are_legal():
    fam = LeafFamily(GOLD, 2)
    fam.ensure(60)
    assert GOLD.is_r_legal(fam.window, 2)


def test_leaf_window_nesting():
    fam = LeafFamily(GOLD, 2)
    prev = fam.window
    for _ in range(6):
        fam.step()
        assert prev in fam.window
        prev = fam.window


def test_not_eg():
    with pytest.raises(NotEG):
        LeafFamily(GOLD, 1)


def test_neighborhood_membership(dyn):
    Vp, Vm = dyn.neighborhoods()
    seg = next(iter(Vp.segments))
    assert in_neighborhood(seg, Vp)
    assert in_neighborhood(W.inverse(seg), Vp)
    assert not in_neighborhood("a" * 40, Vp, cyclic=True)
    assert any(in_neighborhood(GOLD.iterate("b", n), Vp) for n in range(12))
    with pytest.raises(EmptyNeighborhood):
        Neighborhood("+", frozenset()).contains("ab")


def test_neighborhood_segments(dyn):
    Vp, Vm = dyn.neighborhoods()
    assert Vp.length >= 2 * dyn.C == 26
    for s in Vp.segments:
        assert GOLD.graph.stratum_length(s, 2) >= 2 * dyn.C
        assert not any(m in s or W.inverse(m) in s for m in Vm.segments)


def test_neighborhood_monotone(dyn):
    Vp, _ = dyn.neighborhoods()
    for w in list(W.words_up_to(3, 3))[:100]:
        inside = False
        for n in range(12):
            now = Vp.contains(GOLD.iterate(W.cyclic_core(w) or "a", n), cyclic=True)
            assert now or not inside
            inside = now


def test_empty_lamination_set():
    d = Dynamics(GOLD, GOLD_INV, SubgroupSystem.whole(3))
    with pytest.raises(EmptyLaminationSet):
        build_neighborhoods(d)


def test_weak_attraction_examples(dyn):
    assert weak_attraction_test(dyn, "aaaaa").kind == "CarriedByK"
    res = weak_attraction_test(dyn, "b")
    assert res.kind == "AttractedPlus" and res.n <= 10
    assert weak_attraction_test(dyn, "ab").kind == "AttractedPlus"
    # the commutator class of the Fibonacci part is periodic and never attracted
    res = weak_attraction_test(dyn, "bcBC")
    assert res.kind == "Inconclusive" and len(res.trace) == 21


def test_admissible_gold(dyn):
    rep = check_admissible(dyn, maxlen=4, maxiter=20)
    items = rep["items"]
    assert [items[k]["status"] for k in ("SA1", "SA2", "SA3", "SA4")] == ["pass"] * 4
    assert items["SA2"]["empirical"] and items["SA5"]["empirical"]
    assert items["SA5"]["failures"] == ["bcBC"]


def test_admissible_twist():
    d = Dynamics(load_toprep("f4twist.json"), load_toprep("f4twist_inv.json"), load_system("k_a_b.json"))
    rep = check_admissible(d, maxlen=4, maxiter=20)
    assert rep["items"]["SA5"]["status"] == "fail"
    assert rep["items"]["SA5"]["witness"] == "ab"


def test_admissible_whole():
    d = Dynamics(GOLD, GOLD_INV, SubgroupSystem.whole(3))
    rep = check_admissible(d, maxlen=3)
    assert rep["items"]["SA2"]["status"] == "fail"
    assert not rep["admissible"]


def test_nonattracting_system():
    assert nonattracting_system(GOLD, 2).generator_lists() == [["a"]]
    twist = load_toprep("f4twist.json")
    assert nonattracting_system(twist, 3).generator_lists() == [["a", "b"]]
    with pytest.raises(VerificationFailed) as exc:
        nonattracting_system(GOLD, 2, supplied=SubgroupSystem.from_lists([["b"]]))
    assert exc.value.witness == "b"


def test_periodic_augmentation():
    S = nonattracting_system(GOLD, 2, periodic_len=4)
    assert S.carries("bcBC") and S.carries("a")


def test_sink():
    assert sink(GOLD).generator_lists() == [["a"]]
    assert sink(load_toprep("f4twist.json")).generator_lists() == [["a", "b"]]
    ident = TopRep.on_rose(["a", "b"], [1, 1])
    assert sink(ident) == SubgroupSystem.whole(2)
    rep = sink_report(GOLD)
    assert rep["malnormal"] and rep["carried_iff_all"]


def test_sink_soundness(dyn):
    K = sink(GOLD)
    for c in W.conjugacy_classes(5, 3):
        if K.carries(c):
            assert not weak_attraction_test(dyn, c).attracted


def test_independence(dyn):
    wi = leaf_windows(dyn, 12)
    assert independence_test(wi, wi)[0] is False
    rev = leaf_windows(Dynamics(GOLD_INV, GOLD, K_A), 12)
    ok, seg = independence_test(wi, rev)
    assert not ok and len(seg) == 40


@settings(max_examples=25, deadline=None)
@given(st.text(alphabet="aAbBcC", min_size=1, max_size=6))
def test_trichotomy(dyn, w):
    c = W.cyclic_core(w)
    if not c:
        return
    res = weak_attraction_test(dyn, c)
    assert res.kind in ("CarriedByK", "AttractedPlus", "AttractedMinus", "Inconclusive")
    assert (res.kind == "CarriedByK") == K_A.carries(c)
