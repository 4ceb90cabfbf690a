import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soficity_lab.errors import IncompleteMap, MismatchedRanks
from soficity_lab.presentations import (
    HNN2Presentation,
    Word,
    apply_map,
    free_reduce,
    hnn_mod2_relators,
    involution_check,
    random_word,
    swap_involution,
)
from soficity_lab.sofic import SoficApprox, evaluate_word

letters = st.tuples(st.sampled_from("abct"), st.sampled_from([1, -1]))
words = st.lists(letters, max_size=30).map(lambda ls: Word(tuple(ls)))


def test_parse_and_print():
    w = Word.parse("t a t^-1 b^-1")
    assert w.letters == (("t", 1), ("a", 1), ("t", -1), ("b", -1))
    assert str(w) == "t a t^-1 b^-1"
    assert Word.parse("a^3 b^-2").letters == (("a", 1),) * 3 + (("b", -1),) * 2
    assert str(Word()) == "1"
    with pytest.raises(ValueError):
        Word.parse("a^0")


def test_free_reduce_examples():
    assert free_reduce(Word.parse("a a^-1")) == Word()
    assert free_reduce(Word.parse("a b b^-1 a")) == Word.parse("a a")


@settings(max_examples=300)
@given(words)
def test_free_reduce_properties(w):
    r = free_reduce(w)
    assert r.is_reduced()
    assert len(r) <= len(w)
    assert free_reduce(r) == r
    assert free_reduce(w * w.inverse()) == Word()


def test_inverse_annihilation_random():
    rng = random.Random(0)
    for _ in range(1000):
        w = random_word("abt", rng.randint(0, 20), rng)
        assert free_reduce(w * w.inverse()) == Word()


def test_relators_rank1():
    rels = hnn_mod2_relators(["a"], ["b"])
    assert [str(r) for r in rels] == ["t t", "t a t^-1 b^-1"]


def test_relators_rank0_and_rank4():
    assert [str(r) for r in hnn_mod2_relators([], [])] == ["t t"]
    a = [f"a{j}" for j in range(1, 5)]
    b = [f"b{j}" for j in range(1, 5)]
    assert len(hnn_mod2_relators(a, b)) == 5


def test_relators_are_reduced():
    rels = hnn_mod2_relators(["x y"], ["y^-1 x"])
    assert all(r.is_reduced() for r in rels)
    assert str(rels[1]) == "t x y t^-1 x^-1 y"


def test_relators_without_t_squared():
    assert [str(r) for r in hnn_mod2_relators(["a"], ["b"], mod2=False)] == ["t a t^-1 b^-1"]


def test_mismatched_ranks():
    with pytest.raises(MismatchedRanks):
        hnn_mod2_relators(["a", "b"], ["c"])


def test_presentation_from_json_with_phi():
    pres = HNN2Presentation.from_json(
        {"hGenerators": ["x", "y"], "aWords": ["x", "y"], "bWords": ["y", "x"], "phi": [1, 0]}
    )
    assert [str(r) for r in pres.relators] == ["t t", "t x t^-1 x^-1", "t y t^-1 y^-1"]


def test_swap_involution_rank4():
    a = [f"a{j}" for j in range(1, 5)]
    b = [f"b{j}" for j in range(1, 5)]
    assert involution_check(a, b, swap_involution(a, b))


def test_involution_fixing_a_fails():
    assert not involution_check(["a1"], ["b1"], {"a1": "a1", "b1": "b1"})


def test_three_cycle_fails():
    assert not involution_check(["a"], ["b"], {"a": "b", "b": "c", "c": "a"})


def test_incomplete_map():
    with pytest.raises(IncompleteMap):
        involution_check(["a"], ["b"], {"a": "b"})
    with pytest.raises(IncompleteMap):
        apply_map(Word.parse("a c"), {"a": "b"})


def test_involution_square_acts_trivially():
    # omega^2(w) and w evaluate to the same permutation under any assignment
    rng = random.Random(7)
    a, b = ["a1", "a2"], ["b1", "b2"]
    omega = swap_involution(a, b)
    assert involution_check(a, b, omega)
    images = {g: Word(((omega[g], 1),)) for g in omega}
    for _ in range(100):
        n = 9
        assign = {}
        for g in a + b:
            p = list(range(n))
            rng.shuffle(p)
            assign[g] = tuple(p)
        model = SoficApprox(n, assign)
        w = random_word(a + b, 10, rng)
        assert evaluate_word(model, apply_map(apply_map(w, images), images)) == evaluate_word(model, w)


def test_relators_positive_control_in_sofic_model():
    # t swaps two copies of a 3-point set; a acts on the first copy, b on the second,
    # and t a t^-1 = b exactly, so every relator has defect 0
    a = (1, 2, 0, 3, 4, 5)
    b = (0, 1, 2, 4, 5, 3)
    t = (3, 4, 5, 0, 1, 2)
    rels = hnn_mod2_relators(["a"], ["b"])
    model = SoficApprox(6, {"a": a, "b": b, "t": t}, tuple(rels))
    for r in rels:
        assert evaluate_word(model, r) == tuple(range(6))
