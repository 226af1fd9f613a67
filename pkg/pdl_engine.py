"""
DEL Toolkit - PDL Engine
Translation of the star-free language into propositional dynamic logic,
and a reference PDL evaluator used to check it.

Translation works on normal forms. Booleans and K_A are homomorphic,
C_G becomes [(A + B ...)*]. A sentence [a]C_G phi becomes one conjunct per
action b reachable from a:

    [?pre'(a) ; R(a -> b)] ([b]phi)'

where R(a -> b) is a regular expression for the arrow paths from a to b
in the reachable part of the canonical action model. A letter (A, c) of
such a path is the program  A ; ?pre'(c), the empty word is ?true.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, Iterable, List, Set, Tuple

import numpy as np

from canon import oracle_for
from core import DEFAULT_CONFIG, DELError, EngineConfig, ModelError, Signature, StateModel
from formula_parser import render
from rewrite_engine import RewriteEngine
from syntax import And, Atom, Box, CBox, DynBox, Not, Pre, Top

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# PDL syntax
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PdlTop:
    pass


@dataclass(frozen=True)
class PdlAtom:
    name: str


@dataclass(frozen=True)
class PdlNot:
    arg: object


@dataclass(frozen=True)
class PdlAnd:
    left: object
    right: object


@dataclass(frozen=True)
class PdlBox:
    program: object
    arg: object


@dataclass(frozen=True)
class PdlDiamond:
    program: object
    arg: object


@dataclass(frozen=True)
class PdlAgent:
    name: str


@dataclass(frozen=True)
class PdlTest:
    sentence: object


@dataclass(frozen=True)
class PdlSeq:
    first: object
    second: object


@dataclass(frozen=True)
class PdlChoice:
    left: object
    right: object


@dataclass(frozen=True)
class PdlStar:
    body: object


PDL_TOP = PdlTop()
PDL_BOTTOM = PdlNot(PDL_TOP)


def pdl_conj(items: Iterable) -> object:
    items = list(items)
    if not items:
        return PDL_TOP
    out = items[-1]
    for x in reversed(items[:-1]):
        out = PdlAnd(x, out)
    return out


def pdl_choice(items: Iterable) -> object:
    """Left-nested choice; no alternatives at all is ?false"""
    items = list(items)
    if not items:
        return PdlTest(PDL_BOTTOM)
    out = items[0]
    for x in items[1:]:
        out = PdlChoice(out, x)
    return out


_P_CHOICE, _P_SEQ, _P_STAR = 1, 2, 3


def render_pdl(x) -> str:
    """Concrete syntax: programs  A  ?phi  a ; b  a + b  a*"""
    if isinstance(x, (PdlAgent, PdlTest, PdlSeq, PdlChoice, PdlStar)):
        return _program(x, 0)
    return _sentence(x)


def _sentence(x) -> str:
    if isinstance(x, PdlTop):
        return "true"
    if isinstance(x, PdlAtom):
        return x.name
    if isinstance(x, PdlNot):
        return "false" if isinstance(x.arg, PdlTop) else f"~{_unary(x.arg)}"
    if isinstance(x, PdlAnd):
        return f"{_unary(x.left)} & {_unary(x.right)}"
    if isinstance(x, PdlBox):
        return f"[{_program(x.program, 0)}]{_unary(x.arg)}"
    if isinstance(x, PdlDiamond):
        return f"<{_program(x.program, 0)}>{_unary(x.arg)}"
    raise TypeError(f"Not a PDL sentence: {x!r}")


def _unary(x) -> str:
    text = _sentence(x)
    return f"({text})" if isinstance(x, PdlAnd) else text


def _program(x, outer: int) -> str:
    if isinstance(x, PdlAgent):
        return x.name
    if isinstance(x, PdlTest):
        return f"?{_unary(x.sentence)}"
    if isinstance(x, PdlStar):
        return f"{_program(x.body, _P_STAR + 1)}*"
    if isinstance(x, PdlSeq):
        text, level = f"{_program(x.first, _P_SEQ)} ; {_program(x.second, _P_SEQ)}", _P_SEQ
    elif isinstance(x, PdlChoice):
        text, level = f"{_program(x.left, _P_CHOICE)} + {_program(x.right, _P_CHOICE)}", _P_CHOICE
    else:
        raise TypeError(f"Not a PDL program: {x!r}")
    return f"({text})" if level < outer else text


# ---------------------------------------------------------------------------
# Regular expressions over (agent, target) letters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RxEmpty:
    pass


@dataclass(frozen=True)
class RxEpsilon:
    pass


@dataclass(frozen=True)
class RxLetter:
    agent: str
    target: Hashable


@dataclass(frozen=True)
class RxConcat:
    left: object
    right: object


@dataclass(frozen=True)
class RxAlt:
    left: object
    right: object


@dataclass(frozen=True)
class RxStar:
    body: object


EMPTY = RxEmpty()
EPSILON = RxEpsilon()


def rx_concat(a, b):
    if isinstance(a, RxEmpty) or isinstance(b, RxEmpty):
        return EMPTY
    if isinstance(a, RxEpsilon):
        return b
    if isinstance(b, RxEpsilon):
        return a
    return RxConcat(a, b)


def rx_alt(a, b):
    if isinstance(a, RxEmpty):
        return b
    if isinstance(b, RxEmpty) or a == b:
        return a
    return RxAlt(a, b)


def rx_star(a):
    if isinstance(a, (RxEmpty, RxEpsilon)):
        return EPSILON
    if isinstance(a, RxStar):
        return a
    return RxStar(a)


def render_regex(rx, name=str) -> str:
    """Readable form; letters print as name(target) prefixed by the agent"""
    if isinstance(rx, RxEmpty):
        return "0"
    if isinstance(rx, RxEpsilon):
        return "e"
    if isinstance(rx, RxLetter):
        return f"{rx.agent}{name(rx.target)}"
    if isinstance(rx, RxConcat):
        return f"{render_regex(rx.left, name)}{render_regex(rx.right, name)}"
    if isinstance(rx, RxAlt):
        return f"({render_regex(rx.left, name)} + {render_regex(rx.right, name)})"
    if isinstance(rx, RxStar):
        return f"({render_regex(rx.body, name)})*"
    raise TypeError(f"Not a regular expression: {rx!r}")


Word = Tuple[Tuple[str, Hashable], ...]


def regex_language(rx, max_length: int) -> FrozenSet[Word]:
    """All words of the language with at most max_length letters"""
    if isinstance(rx, RxEmpty):
        return frozenset()
    if isinstance(rx, RxEpsilon):
        return frozenset({()})
    if isinstance(rx, RxLetter):
        return frozenset({((rx.agent, rx.target),)}) if max_length >= 1 else frozenset()
    if isinstance(rx, RxAlt):
        return regex_language(rx.left, max_length) | regex_language(rx.right, max_length)
    if isinstance(rx, RxConcat):
        lefts = regex_language(rx.left, max_length)
        rights = regex_language(rx.right, max_length)
        return frozenset(u + v for u in lefts for v in rights if len(u) + len(v) <= max_length)
    if isinstance(rx, RxStar):
        body = regex_language(rx.body, max_length) - {()}
        words: Set[Word] = {()}
        frontier = {()}
        while frontier:
            fresh = {u + v for u in frontier for v in body if len(u) + len(v) <= max_length} - words
            words |= fresh
            frontier = fresh
        return frozenset(words)
    raise TypeError(f"Not a regular expression: {rx!r}")


# ---------------------------------------------------------------------------
# Automata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActionAutomaton:
    """
    Finite automaton whose letters are (agent, target state) pairs.
    State order is the canonical order used for elimination.
    """
    states: Tuple
    initial: Hashable
    alphabet: Tuple[str, ...]
    transitions: Dict[Tuple[Hashable, str], Tuple] = field(default_factory=dict)

    def targets(self, state, agent: str) -> Tuple:
        return self.transitions.get((state, agent), ())

    def validate(self) -> List[str]:
        errors = []
        known = set(self.states)
        if self.initial not in known:
            errors.append(f"Initial state {self.initial!r} is not a state")
        for (s, agent), ts in self.transitions.items():
            if s not in known or any(t not in known for t in ts):
                errors.append(f"Transition from {s!r} on {agent} leaves the state set")
            if agent not in self.alphabet:
                errors.append(f"Transition label {agent} is outside the alphabet")
        return errors

    def __repr__(self) -> str:
        count = sum(len(ts) for ts in self.transitions.values())
        return f"ActionAutomaton(states={len(self.states)}, transitions={count})"


def action_automaton(action, agents: Iterable[str], signature: Signature) -> ActionAutomaton:
    """Arrow paths from a simple action through the canonical model, restricted to the group"""
    oracle = oracle_for(signature)
    agents = tuple(sorted(agents))
    states = oracle.reachable(action, agents)
    transitions = {
        (b, agent): oracle.successors(b, agent)
        for b in states for agent in agents
        if oracle.successors(b, agent)
    }
    return ActionAutomaton(states, action, agents, transitions)


def automaton_language(automaton: ActionAutomaton, accept: Iterable, max_length: int) -> FrozenSet[Word]:
    """Words of at most max_length letters leading from the initial state into accept"""
    accept = set(accept)
    words = set()
    frontier = [((), automaton.initial)]
    for _ in range(max_length + 1):
        nxt = []
        for word, state in frontier:
            if state in accept:
                words.add(word)
            if len(word) == max_length:
                continue
            for agent in automaton.alphabet:
                for t in automaton.targets(state, agent):
                    nxt.append((word + ((agent, t),), t))
        frontier = nxt
    return frozenset(words)


def nfa_to_regex(automaton: ActionAutomaton, accept: Iterable):
    """
    State elimination. Fresh start and final nodes are joined by epsilon to
    the initial and accepting states; states are removed in reverse
    canonical order.
    """
    accept = set(accept)
    start, final = object(), object()
    edges: Dict[Tuple, object] = {}

    def add(i, j, rx):
        edges[(i, j)] = rx_alt(edges.get((i, j), EMPTY), rx)

    add(start, automaton.initial, EPSILON)
    for s in automaton.states:
        if s in accept:
            add(s, final, EPSILON)
        for agent in automaton.alphabet:
            for t in automaton.targets(s, agent):
                add(s, t, RxLetter(agent, t))

    nodes = [start, *automaton.states, final]
    for q in reversed(automaton.states):
        nodes.remove(q)
        loop = rx_star(edges.pop((q, q), EMPTY))
        ins = [(i, edges.pop((i, q))) for i in nodes if (i, q) in edges]
        outs = [(j, edges.pop((q, j))) for j in nodes if (q, j) in edges]
        for i, into in ins:
            for j, out in outs:
                add(i, j, rx_concat(rx_concat(into, loop), out))
    return edges.get((start, final), EMPTY)


def regex_program(rx, letter) -> object:
    """PDL program of a regular expression; letter(agent, target) gives a letter's program"""
    if isinstance(rx, RxEmpty):
        return PdlTest(PDL_BOTTOM)
    if isinstance(rx, RxEpsilon):
        return PdlTest(PDL_TOP)
    if isinstance(rx, RxLetter):
        return letter(rx.agent, rx.target)
    if isinstance(rx, RxConcat):
        return PdlSeq(regex_program(rx.left, letter), regex_program(rx.right, letter))
    if isinstance(rx, RxAlt):
        return PdlChoice(regex_program(rx.left, letter), regex_program(rx.right, letter))
    if isinstance(rx, RxStar):
        return PdlStar(regex_program(rx.body, letter))
    raise TypeError(f"Not a regular expression: {rx!r}")


# ---------------------------------------------------------------------------
# Translation
# ---------------------------------------------------------------------------

class PdlTranslator:
    """Translation for one signature; results are memoized on normal forms"""

    def __init__(self, signature: Signature, config: EngineConfig = DEFAULT_CONFIG):
        self.signature = signature
        self.rewriter = RewriteEngine(signature, config)
        self.oracle = oracle_for(signature)
        self._memo: Dict[object, object] = {}

    def translate(self, sentence):
        return self._tr(self.rewriter.normalize(sentence))

    def _tr(self, t):
        found = self._memo.get(t)
        if found is None:
            found = self._memo[t] = self._compute(t)
        return found

    def _compute(self, t):
        if isinstance(t, Top):
            return PDL_TOP
        if isinstance(t, Atom):
            return PdlAtom(t.name)
        if isinstance(t, Not):
            return PdlNot(self._tr(t.arg))
        if isinstance(t, And):
            return PdlAnd(self._tr(t.left), self._tr(t.right))
        if isinstance(t, Box):
            return PdlBox(PdlAgent(t.agent), self._tr(t.arg))
        if isinstance(t, CBox):
            return PdlBox(PdlStar(pdl_choice(PdlAgent(a) for a in sorted(t.agents))), self._tr(t.arg))
        if isinstance(t, DynBox):
            return self._action_group(t.program, t.arg.agents, t.arg.arg)
        raise DELError(f"Not a normal form: {render(t)}")

    def _pre(self, action):
        return self._tr(self.rewriter.normal_form(Pre(action)))

    def _action_group(self, action, agents, body):
        automaton = action_automaton(action, agents, self.signature)

        def letter(agent, target):
            return PdlSeq(PdlAgent(agent), PdlTest(self._pre(target)))

        conjuncts = []
        for b in automaton.states:
            path = regex_program(nfa_to_regex(automaton, {b}), letter)
            program = PdlSeq(PdlTest(self._pre(action)), path)
            conjuncts.append(PdlBox(program, self._tr(self.rewriter.normal_form(DynBox(b, body)))))
        log.debug("Translated [%s] over %d reachable action(s)", render(action), len(automaton.states))
        return pdl_conj(conjuncts)


def translate(sentence, signature: Signature, config: EngineConfig = DEFAULT_CONFIG):
    return PdlTranslator(signature, config).translate(sentence)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

class PdlEvaluator:
    """Relational semantics over one state model; star is reflexive-transitive closure"""

    def __init__(self, model: StateModel):
        self.model = model
        self._truth: Dict[object, np.ndarray] = {}
        self._relations: Dict[object, np.ndarray] = {}

    def truth(self, sentence) -> np.ndarray:
        found = self._truth.get(sentence)
        if found is None:
            found = self._truth[sentence] = self._sentence(sentence)
        return found

    def relation(self, program) -> np.ndarray:
        found = self._relations.get(program)
        if found is None:
            found = self._relations[program] = self._program(program)
        return found

    def _sentence(self, x) -> np.ndarray:
        n = len(self.model.states)
        if isinstance(x, PdlTop):
            return np.ones(n, dtype=bool)
        if isinstance(x, PdlAtom):
            ext = self.model.val.get(x.name, frozenset())
            return np.array([s in ext for s in self.model.states], dtype=bool)
        if isinstance(x, PdlNot):
            return ~self.truth(x.arg)
        if isinstance(x, PdlAnd):
            return self.truth(x.left) & self.truth(x.right)
        if isinstance(x, PdlBox):
            return ~(self.relation(x.program) & ~self.truth(x.arg)[None, :]).any(axis=1)
        if isinstance(x, PdlDiamond):
            return (self.relation(x.program) & self.truth(x.arg)[None, :]).any(axis=1)
        raise TypeError(f"Not a PDL sentence: {x!r}")

    def _program(self, x) -> np.ndarray:
        if isinstance(x, PdlAgent):
            if x.name not in self.model.rel:
                raise ModelError(f"Unknown agent program '{x.name}'")
            return self.model.adjacency(x.name)
        if isinstance(x, PdlTest):
            return np.diag(self.truth(x.sentence))
        if isinstance(x, PdlSeq):
            return _compose(self.relation(x.first), self.relation(x.second))
        if isinstance(x, PdlChoice):
            return self.relation(x.left) | self.relation(x.right)
        if isinstance(x, PdlStar):
            closure = np.eye(len(self.model.states), dtype=bool) | self.relation(x.body)
            while True:
                wider = _compose(closure, closure)
                if (wider == closure).all():
                    return closure
                closure = wider
        raise TypeError(f"Not a PDL program: {x!r}")


def _compose(r: np.ndarray, s: np.ndarray) -> np.ndarray:
    return (r.astype(np.int32) @ s.astype(np.int32)) > 0


def pdl_eval(model: StateModel, sentence) -> FrozenSet[str]:
    vec = PdlEvaluator(model).truth(sentence)
    return frozenset(s for s, v in zip(model.states, vec) if v)


def pdl_relation(model: StateModel, program) -> FrozenSet[Tuple[str, str]]:
    matrix = PdlEvaluator(model).relation(program)
    states = model.states
    return frozenset((states[i], states[j]) for i, j in zip(*np.nonzero(matrix)))
