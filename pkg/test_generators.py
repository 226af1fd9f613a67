"""Tests for the example families and random corpora"""

import numpy as np
import pytest

from core import ModelError
from formula_parser import render
from generators import (
    all_models, decreasing_state, disjoint_union, exhaustive_batches, gen_cn, gen_decreasing, gen_private_pair, pri_signature,
    pub_signature, random_group_sentence, random_model, random_sentence,
)


def test_cycle_shape():
    for n in (2, 4):
        model = gen_cn(n)
        assert len(model) == 5 * n
        for s in model.states:
            assert len(model.successors(s, "A")) == 1
            assert len(model.successors(s, "B")) == 1
        assert model.rel["A"] == {(t, s) for s, t in model.rel["A"]}
        assert set(model.states) - model.val["p"] == {"a_1", f"a_{2 * n + 1}"}
        assert model.val["q"] == {f"a_{4 * n + 1}"}


def test_cycle_rejects_bad_sizes():
    for n in (0, 3, -2, True):
        with pytest.raises(ModelError):
            gen_cn(n)


def test_private_pair():
    s_model, t_model = gen_private_pair({1, 2}, {1: 2, 2: 3}, 2)
    assert s_model.states == ("a", "b", "c1_1", "c1_2", "c2_1", "c2_2", "c2_3")
    assert t_model.rel["A"] - s_model.rel["A"] == {("a", "c2_1")}
    assert s_model.rel["B"] == t_model.rel["B"] == {("c1_2", "b"), ("c2_3", "b")}
    assert s_model.val["p"] == frozenset(s_model.states) - {"b"}
    assert s_model.validate() == []


def test_private_pair_errors():
    with pytest.raises(ModelError):
        gen_private_pair({1}, {1: 1}, 2)
    with pytest.raises(ModelError):
        gen_private_pair({1, 2}, {1: 1}, 1)
    with pytest.raises(ModelError):
        gen_private_pair({1}, {1: 0}, 1)


def test_decreasing_sequences():
    model = gen_decreasing(3)
    assert len(model) == 8
    assert model.states[0] == "r"
    assert model.successors("r", "A") == ("r.0", "r.1", "r.2")
    assert model.successors(decreasing_state((2, 1)), "A") == ("r.2.1.0",)
    assert model.successors("r.0", "A") == ()
    assert len(gen_decreasing(0)) == 1


def test_signatures():
    pri = pri_signature()
    assert pri.name == "Pri_A" and pri.types == ("Pri", "skp")
    assert pri.successors("Pri", "B") == ("skp",)
    assert pri.validate() == []
    assert pub_signature(("A", "B", "C")).successors("Pub", "C") == ("Pub",)


def test_exhaustive_models():
    assert sum(1 for _ in all_models(("A",), ("p",), 3)) == 4 + 64 + 4096
    assert sum(1 for _ in all_models(("A", "B"), ("p",), 2)) == 8 + 1024
    distinct = {(m.states, tuple(sorted(m.rel["A"])), tuple(sorted(m.val["p"]))) for m in all_models(("A",), ("p",), 2)}
    assert len(distinct) == 4 + 64
    batches = exhaustive_batches(("A", "B"), ("p",), 2)
    assert len(batches) == 6
    assert sum(len(b.states) for b in batches) == 8 + 2 * 1024
    assert all(b.validate() == [] for b in batches)


def test_disjoint_union_renames_states():
    s_model, t_model = gen_private_pair({1}, {1: 1}, 1)
    union = disjoint_union([s_model, t_model])
    assert len(union.states) == len(s_model.states) + len(t_model.states)
    assert ("m1.a", "m1.c1_1") in union.rel["A"]
    assert ("m0.a", "m0.c1_1") not in union.rel["A"]
    assert "m0.b" not in union.val["p"] and "m0.a" in union.val["p"]


def test_random_corpora_are_seeded():
    sig = pub_signature()
    first, second = np.random.default_rng(4), np.random.default_rng(4)
    for _ in range(10):
        assert render(random_sentence(first, sig)) == render(random_sentence(second, sig))
        assert random_model(first, sig.agents).to_dict() == random_model(second, sig.agents).to_dict()
    sentence = random_group_sentence(first, sig)
    assert render(sentence).startswith("[")


if __name__ == "__main__":
    print("🧪 Testing Generators...")
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"   ✓ {name}")
    print("✅ All tests passed!")
