"""Tests for the filtration decider"""

import os
from functools import lru_cache

import numpy as np
import pytest

from core import EngineConfig, GuardError
from corpus import star_free_schemes
from decision_engine import DecisionEngine, Verdict, satisfiable, valid
from formula_parser import parse_sentence, render
from generators import (
    exhaustive_batches, pri_signature, pub, pub_signature, random_model, random_sentence,
)
from model_checker import ModelChecker
from pdl_engine import pdl_eval, translate
from syntax import Atom, Not, group, iff

FULL = os.environ.get("DEL_FULL_CORPUS") == "1"
AXIOM_INSTANCES = 20 if FULL else 2
ROUNDS = 200 if FULL else 25
MICRO_ROUNDS = 150 if FULL else 12

PUB = pub_signature()
PRI = pri_signature()
SINGLE = pub_signature(("A",))
SMALL = EngineConfig(edge_cell_cap=2 ** 20)
MEDIUM = EngineConfig(edge_cell_cap=2 ** 22)

UNSAT_TEXTS = {
    "Pub": ["p & ~p", "<Pub(p)> ~p", "K_A p & M_A ~p", "<Pub(p)> M_A ~p"],
    "Pri_A": ["p & ~p", "<Pri(p, true)> ~p", "K_A p & M_A ~p", "<Pri(p, true)> M_A ~p"],
}

p, q = Atom("p"), Atom("q")


@lru_cache(maxsize=None)
def small_models(agents):
    """Every one-atom model up to 3 states for one agent, up to 2 states for more"""
    return exhaustive_batches(agents, ("p",), 3 if len(agents) == 1 else 2)


def micro_corpus(rng, sig):
    """Known contradictions first, then one-atom sentences of depth 2"""
    fixed = [parse_sentence(text, sig) for text in UNSAT_TEXTS[sig.name]]
    return fixed + [random_sentence(rng, sig, atoms=("p",), depth=2) for _ in range(MICRO_ROUNDS)]


def test_contradiction_is_unsat():
    decision = satisfiable(parse_sentence("p & ~p", PUB), PUB)
    assert decision.verdict is Verdict.UNSAT
    assert not decision.satisfiable
    assert decision.model is None and decision.state is None


def test_satisfiable_sentence_has_checked_witness():
    sentence = parse_sentence("M_A p & [Pub(p)] K_A p & ~q", PUB)
    decision = DecisionEngine(PUB).satisfiable(sentence)
    assert decision.verdict is Verdict.SAT
    assert decision.survivor_count <= decision.atom_count
    assert ModelChecker(PUB).holds(decision.model, decision.state, sentence)


def test_validities():
    assert valid(parse_sentence("[Pub(p)] p", PUB), PUB)
    assert valid(parse_sentence("[Pub(p)] C_{A,B} p", PUB), PUB)
    assert valid(parse_sentence("C_{A,B} q -> K_A K_B q", PUB), PUB)
    assert not valid(parse_sentence("p -> K_A p", PUB), PUB)


def test_countermodel_refutes():
    sentence = parse_sentence("[Pub(p)] K_A q -> K_A q", PUB)
    decision = DecisionEngine(PUB).countermodel(sentence)
    assert decision.satisfiable
    assert not ModelChecker(PUB).holds(decision.model, decision.state, sentence)


def test_star_free_axioms_are_valid():
    rng = np.random.default_rng(29)
    attempted = skipped = 0
    for sig in (PUB, PRI):
        engine = DecisionEngine(sig, MEDIUM)
        for scheme in star_free_schemes().values():
            for instance in scheme.instances(rng, sig, AXIOM_INSTANCES, depth=2):
                attempted += 1
                try:
                    assert engine.valid(instance), f"{scheme.name}: {render(instance)}"
                except GuardError:
                    skipped += 1
    assert skipped * 4 <= attempted, f"{skipped} of {attempted} instances hit a size guard"


def test_unsat_verdicts_have_no_small_model():
    rng = np.random.default_rng(43)
    for sig, config in ((SINGLE, SMALL), (PUB, MEDIUM), (PRI, MEDIUM)):
        engine = DecisionEngine(sig, config)
        checker = ModelChecker(sig)
        sentences = micro_corpus(rng, sig)
        unsat = skipped = 0
        for sentence in sentences:
            try:
                decision = engine.satisfiable(sentence)
            except GuardError:
                skipped += 1
                continue
            if not decision.satisfiable:
                unsat += 1
                for batch in small_models(sig.agents):
                    assert not checker.truth_set(batch, sentence).states, render(sentence)
        assert unsat >= len(UNSAT_TEXTS[sig.name])
        assert skipped * 10 <= len(sentences)


def test_sentences_are_equivalent_to_their_normal_forms():
    rng = np.random.default_rng(47)
    attempted = skipped = 0
    for sig, config in ((SINGLE, SMALL), (PUB, MEDIUM)):
        engine = DecisionEngine(sig, config)
        for _ in range(ROUNDS):
            sentence = random_sentence(rng, sig, atoms=("p",), depth=2)
            attempted += 1
            try:
                assert engine.valid(iff(sentence, engine.rewriter.normalize(sentence))), render(sentence)
            except GuardError:
                skipped += 1
    assert skipped * 4 <= attempted


def test_validity_agrees_with_pdl_translation():
    rng = np.random.default_rng(53)
    for sig, config in ((SINGLE, SMALL), (PUB, MEDIUM)):
        engine = DecisionEngine(sig, config)
        corpus = micro_corpus(rng, sig)
        corpus += [Not(s) for s in corpus[:len(UNSAT_TEXTS[sig.name])]]
        valid_seen = 0
        for sentence in corpus:
            try:
                decision = engine.countermodel(sentence)
            except GuardError:
                continue
            target = translate(sentence, sig)
            if decision.satisfiable:
                assert decision.state not in pdl_eval(decision.model, target), render(sentence)
            else:
                valid_seen += 1
                for batch in small_models(sig.agents):
                    assert pdl_eval(batch, target) == frozenset(batch.states), render(sentence)
        assert valid_seen >= len(UNSAT_TEXTS[sig.name])


def test_true_somewhere_means_satisfiable():
    rng = np.random.default_rng(31)
    engine = DecisionEngine(SINGLE, SMALL)
    checker = ModelChecker(SINGLE)
    for _ in range(ROUNDS):
        sentence = random_sentence(rng, SINGLE, atoms=("p",), depth=2)
        model = random_model(rng, SINGLE.agents, atoms=("p",), max_states=4)
        if not checker.truth_set(model, sentence).states:
            continue
        try:
            decision = engine.satisfiable(sentence)
        except GuardError:
            continue
        assert decision.satisfiable


def test_good_paths_match_eliminated_graph():
    engine = DecisionEngine(PUB)
    sentence = parse_sentence("~[Pub(p)] C_{A} q & M_B p", PUB)
    normal = engine.rewriter.normalize(sentence)
    graph = engine.build_graph(normal)
    engine.eliminate(graph)
    boxed = parse_sentence("[Pub(p)] C_{A} q", PUB)
    assert boxed in graph.closure
    found = 0
    for atom in graph.survivors:
        path = engine.good_path_search(graph, int(atom), pub(p), group("A"), q)
        assert (path is not None) == (not graph.values(boxed)[atom])
        if path is not None:
            found += 1
            last = path.atoms[-1]
            assert graph.alive[last]
            assert len(path.actions) == len(path) + 1
    assert found > 0


def test_size_guards():
    with pytest.raises(GuardError):
        DecisionEngine(PUB, EngineConfig(atom_cap=2)).satisfiable(parse_sentence("p & q", PUB))
    with pytest.raises(GuardError):
        DecisionEngine(PUB, EngineConfig(edge_cell_cap=8)).satisfiable(parse_sentence("p & q", PUB))


if __name__ == "__main__":
    print("🧪 Testing Decision Engine...")
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"   ✓ {name}")
    print("✅ All tests passed!")
