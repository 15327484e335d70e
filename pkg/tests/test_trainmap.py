import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttdyn import words as W
from ttdyn.inputs import load_toprep
from ttdyn.errors import CapExceeded, NotEG, NotIrreducible
from ttdyn.trainmap import (TopRep, bcc_bound, check_rtt, classify_strata, critical_constant,
                            empirical_cancellation, find_nielsen_paths, find_periodic_circuits,
                            global_constant, illegal_turns, pf_eigenvalue, turn_orbit, validate)
from ttdyn.trainmap import _paths

PHI = (1 + math.sqrt(5)) / 2
GOLD = load_toprep("f3gold.json")


def test_validate(gold):
    assert validate(gold)["valid"]
    assert validate(TopRep.on_rose(["a", "b", "c"], [1, 2, 2]))["valid"]
    # b and c both land in <a, b>; c is missing from every image
    bad = TopRep.on_rose(["a", "ab", "b"], [1, 2, 2])
    rep = validate(bad)
    assert not rep["valid"] and not rep["surjective"]


def test_transition_matrix(gold):
    assert gold.transition_matrix(2).tolist() == [[1, 1], [1, 0]]
    assert gold.transition_matrix(1).tolist() == [[1]]
    ident = TopRep.on_rose(["a", "b"], [1, 1])
    assert ident.transition_matrix(1).tolist() == [[1, 0], [0, 1]]


def test_pf_examples():
    assert abs(pf_eigenvalue([[1, 1], [1, 0]]) - 1.6180339887) < 1e-9
    assert pf_eigenvalue([[1]]) == pytest.approx(1, abs=1e-12)
    assert pf_eigenvalue([[2]]) == pytest.approx(2, abs=1e-12)
    with pytest.raises(NotIrreducible):
        pf_eigenvalue([[1, 1], [0, 1]])


def irreducible(M):
    n = len(M)
    R = (np.eye(n, dtype=int) + (np.array(M) > 0)).astype(int)
    return (np.linalg.matrix_power(R, n) > 0).all()


mats = st.integers(2, 3).flatmap(lambda n: st.lists(
    st.lists(st.integers(0, 3), min_size=n, max_size=n), min_size=n, max_size=n))


@settings(max_examples=150, deadline=None)
@given(mats)
def test_pf_matches_characteristic_roots(M):
    if not irreducible(M):
        return
    roots = np.roots(np.poly(np.array(M, dtype=float)))
    assert pf_eigenvalue(M) == pytest.approx(max(roots.real), abs=1e-7)


def test_classify(gold, twist):
    rep = classify_strata(gold).by_r
    assert rep[1].kind == "NEG" and rep[2].kind == "EG"
    assert rep[2].lam == pytest.approx(PHI, abs=1e-9)
    ident = classify_strata(TopRep.on_rose(["a", "b", "c"], [1, 2, 3])).by_r
    assert all(s.kind == "NEG" for s in ident.values())
    assert classify_strata(twist).by_r[3].kind == "EG"
    assert twist.transition_matrix(3).tolist() == [[1, 1], [1, 0]]


def test_turns(gold):
    ill = illegal_turns(gold)
    assert frozenset(("b", "c")) in ill
    assert frozenset(("B", "c")) not in ill
    orb = turn_orbit(gold, "C", "b", steps=6)
    assert all(x != y for x, y in orb)
    # degenerate turns are never counted as illegal turns
    assert not gold.is_legal_turn("b", "b")
    assert all(len(t) == 2 for t in ill)


def test_tf_preimage_closed(gold, twist):
    for f in (gold, twist):
        ill = illegal_turns(f)
        dirs = f.graph.directions()
        for d1 in dirs:
            for d2 in dirs:
                if d1 == d2:
                    continue
                image = frozenset((f.Df(d1), f.Df(d2)))
                if len(image) == 1 or image in ill:
                    assert frozenset((d1, d2)) in ill


def test_iterate(gold):
    assert gold.iterate("c", 3) == "bcb"
    assert gold.iterate("abc", 0) == "abc"
    fib = [1, 2, 3, 5, 8, 13, 21]
    assert [len(gold.iterate("b", n)) for n in range(7)] == fib


@given(st.text(alphabet="aAbBcC", max_size=6), st.integers(0, 6), st.integers(0, 6))
def test_iterate_composes(p, m, n):
    f = GOLD
    p = W.reduce(p)
    assert f.iterate(p, m + n) == f.iterate(f.iterate(p, n), m)


def test_growth_ratio(gold):
    lam = gold.lam(2)
    vals = [gold.graph.stratum_length(gold.iterate("b", n), 2) / lam ** n for n in (14, 15)]
    assert abs(vals[1] / vals[0] - 1) < 0.05


def test_iteration_cap(gold, monkeypatch):
    monkeypatch.setenv("TTDYN_ITER_CAP", "50")
    with pytest.raises(CapExceeded):
        gold.iterate("b", 12)


def test_rtt(gold, twist):
    assert check_rtt(gold)["pass"]
    assert check_rtt(twist)["pass"]
    assert check_rtt(TopRep.on_rose(["a", "b", "c"], [1, 2, 2]))["pass"]
    bad = TopRep.on_rose(["a", "Bc", "B"], [1, 2, 2])
    rep = check_rtt(bad)
    assert not rep["pass"]
    wit = rep["conditions"]["1"][0]
    assert wit["edge"] == "b" and "Bc" in wit["illegal_turns"]


def test_rtt_pass_means_legal_images(gold, twist, fib):
    for f in (gold, twist, fib):
        if not check_rtt(f)["pass"]:
            continue
        ill = illegal_turns(f)
        for r in f.eg_strata():
            for e in f.graph.stratum_edges(r):
                img = f.image(e)
                for x, y in zip(img, img[1:]):
                    assert frozenset((W.inverse(x), y)) not in ill


def test_bcc(gold):
    assert bcc_bound(gold) == 4
    ident = TopRep.on_rose(["a", "b", "c"], [1, 1, 1])
    assert empirical_cancellation(ident, samples=2000) == 0
    assert bcc_bound(ident) == 3
    assert empirical_cancellation(gold, samples=10000) <= bcc_bound(gold)


def test_critical_constant(gold):
    assert critical_constant(gold, 2) == pytest.approx(12.944, abs=1e-3)
    assert global_constant(gold) == 13
    with pytest.raises(NotEG):
        critical_constant(gold, 1)


def test_critical_constant_lambda_three():
    f = TopRep.on_rose(["aab", "ab"], [1, 1])
    lam = f.lam(1)
    assert critical_constant(f, 1) == pytest.approx(2 * bcc_bound(f) / (lam - 1))
    g = TopRep.on_rose(["aba", "a"], [1, 1])
    assert critical_constant(g, 1, bcc=7) == pytest.approx(2 * 7 / (g.lam(1) - 1))


def test_nielsen(gold):
    paths = dict(find_nielsen_paths(gold, 3))
    assert paths.get("a") == 1
    assert find_nielsen_paths(gold, 6, height=2) == []
    ident = TopRep.on_rose(["a", "b"], [1, 1])
    found = find_nielsen_paths(ident, 2)
    assert len(found) == 4 + 4 * 3


def test_periodic_circuits(gold):
    assert ("bcBC", 2) in find_periodic_circuits(gold, 4, 2, height=2)


def test_automorphism(gold):
    aut = gold.to_automorphism()
    assert aut.images == ("a", "bc", "b")
    assert TopRep.from_json(gold.to_json()).edge_map == gold.edge_map


def brute_nielsen(f, max_len, period):
    out = {}
    for p in _paths(f.graph, set(f.graph.edge_ids), max_len):
        for k in range(1, period + 1):
            if W.reduce(p.translate(f.power_table(k))) == p:
                out.setdefault(p, k)
                break
    return sorted(out.items(), key=lambda t: W.shortlex_key(t[0]))


@pytest.mark.parametrize("images,strata", [
    (["a", "bc", "b"], [1, 2, 2]),
    (["a", "b", "cd", "c"], [1, 2, 3, 3]),
    (["ab", "a"], [1, 1]),
    (["a", "bab", "c"], [1, 2, 3]),
    (["a", "b"], [1, 1]),
])
def test_nielsen_search_matches_exhaustive(images, strata):
    f = TopRep.on_rose(images, strata)
    for period in (1, 2):
        assert find_nielsen_paths(f, 5, period) == brute_nielsen(f, 5, period)
