import itertools

import pytest
from hypothesis import given, settings, strategies as st

from ttdyn import words as W
from ttdyn.errors import NotSurjective

from conftest import naive_reduce

letters3 = st.sampled_from("aAbBcC")
raw3 = st.text(alphabet="aAbBcC", max_size=40)
raw_long = st.text(alphabet="aAbB", min_size=60, max_size=400)


def test_reduce_examples():
    assert W.reduce("aAb") == "b"
    assert W.reduce("") == ""
    assert W.reduce("abBA") == ""


@given(raw3)
def test_reduce_matches_naive(w):
    assert W.reduce(w) == naive_reduce(w)


@settings(max_examples=60)
@given(raw_long)
def test_long_reduce_matches_naive(w):
    # long inputs take the vectorised path
    assert W.reduce(w) == naive_reduce(w)


def test_reduce_long_nested():
    w = "ab" * 50 + "BA" * 50 + "c"
    assert W.reduce(w) == "c"


@given(raw3, raw3)
def test_multiply_is_reduced_concatenation(u, v):
    u, v = W.reduce(u), W.reduce(v)
    assert W.multiply(u, v) == naive_reduce(u + v)


@given(raw3)
def test_inverse(w):
    w = W.reduce(w)
    assert W.multiply(w, W.inverse(w)) == ""


def test_cyclic_reduce_examples():
    assert W.cyclic_reduce("abA") == ("b", "a")
    assert W.cyclic_reduce("bc") == ("bc", "")


@given(raw3)
def test_cyclic_reduce_round_trip(w):
    w = W.reduce(w)
    core, x = W.cyclic_reduce(w)
    assert W.is_cyclically_reduced(core)
    assert W.product_of([x, core, W.inverse(x)]) == w


@given(raw3, st.text(alphabet="aAbBcC", max_size=6))
def test_canonical_is_class_invariant(w, x):
    w = W.reduce(w)
    assert W.canonical(W.conjugate(w, W.reduce(x))) == W.canonical(w)
    assert W.canonical(W.inverse(w)) == W.canonical(w)


def test_canonical_brute_force():
    # oracle: minimum over all rotations of the core and of its inverse
    for w in W.words_up_to(5, 2):
        core = W.cyclic_core(w)
        if not core:
            continue
        cands = W.cyclic_rotations(core) + W.cyclic_rotations(W.inverse(core))
        assert W.canonical(w) == min(cands, key=W.order_key)


def test_conjugacy_class_counts():
    # classes are canonical and distinct
    cls = W.conjugacy_classes(4, 2)
    assert len(cls) == len(set(cls))
    assert all(W.canonical(c) == c for c in cls)
    assert W.ConjugacyClass.of("BAb").rep == "a"


def test_reduced_word_counts():
    # 2r(2r-1)^(n-1) reduced words of length n
    for r in (2, 3):
        for n in range(1, 5):
            assert len(list(W.reduced_words(n, r))) == 2 * r * (2 * r - 1) ** (n - 1)


def test_apply_gold():
    phi = W.BasisAutomorphism(3, ("a", "bc", "b"))
    assert phi("b") == "bc"
    assert phi("") == ""
    assert (phi @ phi)("b") == "bcb"
    assert W.compose(phi, phi)("b") == "bcb"
    assert W.compose(phi, W.BasisAutomorphism.identity(3)) == phi


def test_invert_gold():
    phi = W.BasisAutomorphism(3, ("a", "bc", "b"))
    inv = W.invert(phi)
    assert inv.images == ("a", "c", "Cb")
    assert W.compose(phi, inv).is_identity()
    assert W.invert(W.BasisAutomorphism.identity(2)).is_identity()


def test_invert_not_surjective():
    with pytest.raises(NotSurjective):
        W.invert(W.BasisAutomorphism(2, ("aa", "b")))
    assert not W.is_surjective(W.BasisAutomorphism(2, ("aa", "b")))


nielsen = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.booleans(), st.booleans()),
                   max_size=6)


@given(nielsen)
def test_invert_random_automorphisms(moves):
    # products of elementary Nielsen moves are automorphisms
    imgs = list("abc")
    for i, j, inv, right in moves:
        if i == j:
            imgs[i] = W.inverse(imgs[i])
            continue
        y = W.inverse(imgs[j]) if inv else imgs[j]
        imgs[i] = W.multiply(imgs[i], y) if right else W.multiply(y, imgs[i])
    phi = W.BasisAutomorphism(3, tuple(imgs))
    psi = W.invert(phi)
    assert (phi @ psi).is_identity() and (psi @ phi).is_identity()


def test_word_validation():
    from ttdyn.errors import TtdynError
    with pytest.raises(TtdynError):
        W.check_word("a1")
    with pytest.raises(TtdynError):
        W.check_word("abc", rank=2)


def test_power():
    assert W.power("ab", 3) == "ababab"
    assert W.power("ab", -2) == "BABA"
    assert W.power("ab", 0) == ""


def test_raw_sequences_count():
    assert sum(1 for _ in W.raw_sequences(3, 2)) == 64
    assert set(W.reduced_words(2, 1)) == {"aa", "AA"}
    assert list(itertools.islice(W.words_up_to(1, 1), 5)) == ["a", "A"]
