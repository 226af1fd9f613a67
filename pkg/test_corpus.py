"""Tests for the axiom corpus and the sentence without finite models"""

import os

import numpy as np
import pytest

from corpus import (
    SCHEMES, no_fmp_announcement, no_fmp_body, no_fmp_sentence, power_sentence,
    star_free_schemes,
)
from formula_parser import parse_sentence, render
from generators import pri_signature, pub, pub_signature, random_model
from model_checker import ModelChecker
from syntax import DynBox, SKIP, Seq, has_star

FULL = os.environ.get("DEL_FULL_CORPUS") == "1"
INSTANCES = 25 if FULL else 4
MODELS = 10 if FULL else 3

PUB = pub_signature()
PRI = pri_signature()


def test_scheme_table():
    assert len(SCHEMES) == 14
    assert set(SCHEMES) - set(star_free_schemes()) == {"action_mix"}
    assert all(scheme.name == name for name, scheme in SCHEMES.items())


def test_instances_follow_their_flag():
    rng = np.random.default_rng(1)
    for scheme in SCHEMES.values():
        for instance in scheme.instances(rng, PUB, 3):
            assert has_star(instance) == scheme.star


def test_axioms_hold_everywhere():
    rng = np.random.default_rng(37)
    for sig in (PUB, PRI):
        checker = ModelChecker(sig)
        for scheme in SCHEMES.values():
            if scheme.star and sig is PRI:
                continue
            for instance in scheme.instances(rng, sig, INSTANCES):
                for _ in range(MODELS):
                    model = random_model(rng, sig.agents, max_states=4)
                    truth = checker.truth_set(model, instance)
                    if not truth.exact:
                        continue
                    assert truth.states == frozenset(model.states), f"{scheme.name}: {render(instance)}"


def test_no_finite_model_sentence():
    single = pub_signature(("A",))
    parsed = parse_sentence("[Pub(M_A true)*] M_A K_A false", single)
    assert parsed == no_fmp_sentence()
    assert no_fmp_announcement() == pub(parse_sentence("M_A true", single))
    assert no_fmp_body("B") == parse_sentence("M_B K_B false", PUB)


def test_powers_unfold_the_iteration():
    announce = no_fmp_announcement()
    assert power_sentence(0) == DynBox(SKIP, no_fmp_body())
    assert power_sentence(1) == DynBox(announce, no_fmp_body())
    assert power_sentence(3).program == Seq(Seq(announce, announce), announce)
    with pytest.raises(ValueError):
        power_sentence(-1)


if __name__ == "__main__":
    print("🧪 Testing Axiom Corpus...")
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"   ✓ {name}")
    print("✅ All tests passed!")
