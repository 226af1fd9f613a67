"""Tests for truth sets, program runs and the witness path search"""

import os

import numpy as np
import pytest

from core import StarNotAllowed
from corpus import no_fmp_sentence, power_sentence
from formula_parser import parse_program, parse_sentence
from generators import (
    chain_state, gen_cn, gen_decreasing, gen_private_pair, pri_signature, pub,
    pub_signature, random_model, random_program, random_sentence, random_simple_action,
)
from model_checker import ModelChecker, TruthStatus, diamond_star_paths, eval_sentence
from syntax import Atom, CDiamond, DynBox, DynDiamond, Not, Star, desugar, group

FULL = os.environ.get("DEL_FULL_CORPUS") == "1"
ROUNDS = 200 if FULL else 25
DESUGAR_ROUNDS = 500 if FULL else 60

PUB = pub_signature()
PRI = pri_signature()
p, q = Atom("p"), Atom("q")


def test_announcement_on_cycles():
    sentence = parse_sentence("<Pub(p)> E_{A,B} q", PUB)
    for n in (2, 4, 6):
        truth = eval_sentence(gen_cn(n), sentence, PUB)
        assert truth.exact
        assert truth.states == frozenset(f"a_{i}" for i in range(2 * n + 2, 5 * n + 1))
        assert f"a_{n + 1}" not in truth
        assert f"a_{3 * n + 1}" in truth


def test_private_announcement_values():
    s_model, t_model = gen_private_pair({1, 2}, {1: 2, 2: 3}, 1)
    chi = parse_sentence("<Pri(p, true)> E_{A} M_B ~p", PRI)
    chains = {chain_state(i, k) for i, length in ((1, 2), (2, 3)) for k in range(1, length + 1)}
    assert eval_sentence(s_model, chi, PRI).states == chains
    assert eval_sentence(t_model, chi, PRI).states == frozenset(t_model.states) - {"b"}


def test_private_announcement_single_chain():
    s_model, _ = gen_private_pair({1}, {1: 1}, 1)
    chi = parse_sentence("<Pri(p, true)> E_{A} M_B ~p", PRI)
    assert eval_sentence(s_model, chi, PRI).states == {"c1_1"}


def test_group_modalities():
    c2 = gen_cn(2)
    checker = ModelChecker(PUB)
    assert checker.truth_set(c2, parse_sentence("E_{A,B} q", PUB)).states == frozenset(c2.states)
    assert checker.truth_set(c2, parse_sentence("C_{A,B} p", PUB)).states == frozenset()
    # the A edges pair a_9 with a_10 only
    assert checker.truth_set(c2, parse_sentence("E_{A} q", PUB)).states == {"a_9", "a_10"}


def test_decreasing_powers():
    depth = 3
    model = gen_decreasing(depth)
    single = pub_signature(("A",))
    checker = ModelChecker(single)
    for k in range(depth):
        assert checker.holds(model, "r", power_sentence(k))
    assert not checker.holds(model, "r", power_sentence(depth))


def test_iteration_converges_on_decreasing_model():
    depth = 3
    single = pub_signature(("A",))
    truth = ModelChecker(single, star_fuel=depth + 2).truth_set(gen_decreasing(depth), no_fmp_sentence())
    assert truth.exact
    assert "r" not in truth


def test_iteration_flags_unknown_when_fuel_runs_out():
    single = pub_signature(("A",))
    truth = ModelChecker(single, star_fuel=1).truth_set(gen_decreasing(4), no_fmp_sentence())
    assert not truth.exact
    assert "r" in truth


def test_check_reports_status_at_a_state():
    single = pub_signature(("A",))
    model = gen_decreasing(4)
    assert ModelChecker(single, star_fuel=1).check(model, "r", no_fmp_sentence()) == (True, TruthStatus.UNKNOWN)
    assert ModelChecker(single, star_fuel=6).check(model, "r", no_fmp_sentence()) == (False, TruthStatus.EXACT)
    assert ModelChecker(single).check(model, "r", power_sentence(2)) == (True, TruthStatus.EXACT)


def test_iteration_after_crash():
    sentence = DynBox(Star(parse_program("Pub(p) ; crash", PUB)), p)
    c2 = gen_cn(2)
    truth = ModelChecker(PUB).truth_set(c2, sentence)
    assert truth.exact
    assert truth.states == c2.val["p"]


def test_nested_iteration_refused():
    nested = DynBox(Star(Star(pub(p))), q)
    with pytest.raises(StarNotAllowed):
        ModelChecker(PUB).truth_set(gen_cn(2), nested)
    with pytest.raises(StarNotAllowed):
        ModelChecker(PUB).run(gen_cn(2), Star(pub(p)))


def test_sequential_run_ids():
    result = ModelChecker(PUB).run(gen_cn(2), parse_program("Pub(p) ; Pub(q)", PUB))
    assert result.target.states == ("((a_9,Pub),Pub)",)
    assert result.pairing["((a_9,Pub),Pub)"] == ("a_9", "(Pub,Pub)")
    assert result.images("a_9") == ("((a_9,Pub),Pub)",)


def test_diamond_is_dual_of_box():
    rng = np.random.default_rng(11)
    checker = ModelChecker(PUB)
    for _ in range(ROUNDS):
        model = random_model(rng, PUB.agents)
        program = random_program(rng, PUB, depth=2)
        phi = random_sentence(rng, PUB, depth=2)
        left = checker.truth_set(model, DynDiamond(program, phi)).states
        right = checker.truth_set(model, Not(DynBox(program, Not(phi)))).states
        assert left == right


def test_witness_path_on_cycle():
    c2 = gen_cn(2)
    path = diamond_star_paths(c2, "a_6", pub(p), group("AB"), q, PUB)
    assert path is not None
    assert path.states[0] == "a_6" and path.states[-1] == "a_9"
    assert len(path) == 3
    assert diamond_star_paths(c2, "a_2", pub(p), group("AB"), q, PUB) is None


def test_witness_path_matches_truth():
    rng = np.random.default_rng(5)
    for sig in (PUB, PRI):
        checker = ModelChecker(sig)
        for _ in range(ROUNDS):
            model = random_model(rng, sig.agents, max_states=4)
            action = random_simple_action(rng, sig, length=int(rng.integers(1, 3)))
            agents = group(sig.agents[:int(rng.integers(1, len(sig.agents) + 1))])
            phi = random_sentence(rng, sig, depth=1, dynamic=False)
            truth = checker.truth_set(model, DynDiamond(action, CDiamond(agents, phi)))
            for s in model.states:
                path = checker.witness_path(model, s, action, agents, phi)
                assert (path is not None) == (s in truth)
                if path is not None:
                    assert checker.holds(model, path.states[-1], DynDiamond(path.actions[-1], phi))



def test_desugar_preserves_truth():
    rng = np.random.default_rng(37)
    for sig in (PUB, PRI):
        checker = ModelChecker(sig)
        for _ in range(DESUGAR_ROUNDS // 2):
            sentence = random_sentence(rng, sig, depth=3)
            model = random_model(rng, sig.agents, max_states=4)
            assert checker.truth_set(model, sentence) == checker.truth_set(model, desugar(sentence))

if __name__ == "__main__":
    print("🧪 Testing Model Checker...")
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"   ✓ {name}")
    print("✅ All tests passed!")
