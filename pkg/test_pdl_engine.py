"""Tests for the translation into PDL, the regex construction and PDL evaluation"""

import os

import numpy as np
import pytest

from core import ModelError
from formula_parser import parse_sentence
from generators import (
    gen_cn, pri_signature, pub_signature, random_group_sentence, random_model, random_sentence,
)
from model_checker import ModelChecker
from pdl_engine import (
    EMPTY, EPSILON, ActionAutomaton, PdlAgent, PdlAtom, PdlBox, PdlChoice, PdlDiamond,
    PdlSeq, PdlStar, PdlTest, RxLetter, automaton_language, nfa_to_regex, pdl_eval,
    pdl_relation, regex_language, regex_program, render_pdl, render_regex, rx_alt,
    rx_concat, rx_star, translate,
)

FULL = os.environ.get("DEL_FULL_CORPUS") == "1"
ROUNDS = 150 if FULL else 20

PUB = pub_signature()
PRI = pri_signature()


def test_epistemic_operators_translate_directly():
    assert translate(parse_sentence("K_A p", PUB), PUB) == PdlBox(PdlAgent("A"), PdlAtom("p"))
    assert render_pdl(translate(parse_sentence("K_A p", PUB), PUB)) == "[A]p"
    assert render_pdl(translate(parse_sentence("C_{A,B} p", PUB), PUB)) == "[(A + B)*]p"


def test_announcement_with_common_knowledge():
    target = translate(parse_sentence("[Pub(p)] C_{A,B} q", PUB), PUB)
    assert render_pdl(target) == "[?p ; (A ; ?p + B ; ?p)*]~(p & ~q)"


def test_two_state_regex():
    transitions = {
        ("alpha", "A"): ("alpha",),
        ("alpha", "B"): ("beta",),
        ("beta", "A"): ("alpha",),
    }
    automaton = ActionAutomaton(("alpha", "beta"), "alpha", ("A", "B"), transitions)
    assert automaton.validate() == []
    a, b = RxLetter("A", "alpha"), RxLetter("B", "beta")
    expected = rx_concat(rx_star(rx_alt(a, rx_concat(b, a))), rx_alt(EPSILON, b))
    found = nfa_to_regex(automaton, {"alpha", "beta"})
    for length in range(7):
        words = regex_language(expected, length)
        assert regex_language(found, length) == words
        assert automaton_language(automaton, {"alpha", "beta"}, length) == words


def test_self_loop_and_dead_automata():
    loop = ActionAutomaton(("s",), "s", ("A",), {("s", "A"): ("s",)})
    found = nfa_to_regex(loop, {"s"})
    assert render_regex(found) == "(As)*"
    assert nfa_to_regex(loop, set()) == EMPTY
    assert render_pdl(regex_program(EMPTY, None)) == "?false"
    assert render_pdl(regex_program(EPSILON, None)) == "?true"


def test_random_automata_match_their_regex():
    rng = np.random.default_rng(19)
    for _ in range(ROUNDS):
        size = int(rng.integers(1, 5))
        states = tuple(range(size))
        transitions = {}
        for s in states:
            for agent in ("A", "B"):
                targets = tuple(t for t in states if rng.random() < 0.4)
                if targets:
                    transitions[(s, agent)] = targets
        automaton = ActionAutomaton(states, 0, ("A", "B"), transitions)
        accept = {s for s in states if rng.random() < 0.5}
        rx = nfa_to_regex(automaton, accept)
        assert regex_language(rx, 5) == automaton_language(automaton, accept, 5)


def test_translation_preserves_truth():
    rng = np.random.default_rng(23)
    for sig in (PUB, PRI):
        checker = ModelChecker(sig)
        for i in range(ROUNDS):
            if i % 2:
                sentence = random_group_sentence(rng, sig)
            else:
                sentence = random_sentence(rng, sig, depth=2)
            target = translate(sentence, sig)
            model = random_model(rng, sig.agents, max_states=4)
            assert pdl_eval(model, target) == checker.truth_set(model, sentence).states


def test_program_relations():
    c2 = gen_cn(2)
    both = PdlSeq(PdlTest(PdlAtom("p")), PdlTest(PdlAtom("q")))
    assert pdl_relation(c2, both) == {("a_9", "a_9")}
    reach = PdlDiamond(PdlStar(PdlChoice(PdlAgent("A"), PdlAgent("B"))), PdlAtom("q"))
    assert pdl_eval(c2, reach) == frozenset(c2.states)
    assert pdl_eval(c2, PdlDiamond(PdlAgent("A"), PdlAtom("q"))) == {"a_10"}
    with pytest.raises(ModelError):
        pdl_eval(c2, PdlBox(PdlAgent("C"), PdlAtom("q")))


if __name__ == "__main__":
    print("🧪 Testing PDL Engine...")
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"   ✓ {name}")
    print("✅ All tests passed!")
