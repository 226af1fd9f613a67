"""
DEL Toolkit - Model Checker
Exact truth sets of sentences and denotations of programs over finite models.

Truth sets are computed as boolean numpy vectors indexed like model.states.
Group modalities use a breadth-first search over the reversed union of the
group's relations (scipy.sparse.csgraph). Iterated programs are unfolded
stage by stage until the marked, minimized targets repeat; when the unfold
budget runs out first the answer is flagged UNKNOWN.
"""

import logging
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from bisim_engine import quotient, totally_bisimilar
from canon import oracle_for, pre_of
from core import (
    DEFAULT_CONFIG, EngineConfig, Signature, StarNotAllowed, StateModel,
    UpdateResult, empty_model,
)
from formula_parser import render
from syntax import (
    And, Atom, Basic, Bottom, Box, CBox, CDiamond, Crash, Diamond, DynBox,
    DynDiamond, Implies, ModelProgram, Not, Or, Pre, Seq, Skip, Star, Top,
    Union,
)
from update_engine import pair_id, signature_program, update_product

log = logging.getLogger(__name__)

MARKER_PREFIX = "@"


class TruthStatus(Enum):
    EXACT = "exact"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TruthSet:
    """States where a sentence holds, with a flag for unconverged iteration"""
    states: FrozenSet[str]
    status: TruthStatus = TruthStatus.EXACT

    @property
    def exact(self) -> bool:
        return self.status is TruthStatus.EXACT

    def __contains__(self, state: str) -> bool:
        return state in self.states

    def __iter__(self) -> Iterator[str]:
        return iter(self.states)

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class WitnessPath:
    """Matched states and actions; agents[i] labels the step from i to i+1"""
    states: Tuple[str, ...]
    actions: Tuple
    agents: Tuple[str, ...]

    def __len__(self) -> int:
        return len(self.agents)

    def describe(self) -> str:
        parts = [f"({self.states[0]}, {render(self.actions[0])})"]
        for agent, s, a in zip(self.agents, self.states[1:], self.actions[1:]):
            parts.append(f"-{agent}-> ({s}, {render(a)})")
        return " ".join(parts)


def _program_star(program) -> bool:
    """Iteration in the program structure itself, not inside preconditions"""
    if isinstance(program, Star):
        return True
    if isinstance(program, Seq):
        return _program_star(program.first) or _program_star(program.second)
    if isinstance(program, Union):
        return _program_star(program.left) or _program_star(program.right)
    return False


def _fingerprint(model: StateModel) -> Tuple:
    profiles = sorted(tuple(sorted(model.atoms_at(s))) for s in model.states)
    edges = tuple(len(model.rel[a]) for a in model.agents)
    return (len(model.states), edges, tuple(profiles))


class ModelChecker:
    """
    Evaluates sentences and programs for one signature.
    Caches live for the duration of one public call; use one checker per thread.
    """

    def __init__(self, signature: Signature, config: EngineConfig = DEFAULT_CONFIG, star_fuel: Optional[int] = None):
        self.signature = signature
        self.config = config
        self.star_fuel = config.star_fuel if star_fuel is None else star_fuel
        self._memo: Dict[Tuple, np.ndarray] = {}
        self._runs: Dict[Tuple, UpdateResult] = {}
        self._unknown = False
        self._depth = 0

    # -- public API -------------------------------------------------------

    def truth_set(self, model: StateModel, sentence) -> TruthSet:
        with self._session():
            vec = self._vec(model, sentence)
            status = TruthStatus.UNKNOWN if self._unknown else TruthStatus.EXACT
            return TruthSet(self._to_states(model, vec), status)

    def check(self, model: StateModel, state: str, sentence) -> Tuple[bool, TruthStatus]:
        """Truth at one state together with the status of the computation"""
        model.require(state)
        truth = self.truth_set(model, sentence)
        return state in truth, truth.status

    def holds(self, model: StateModel, state: str, sentence) -> bool:
        """Truth at one state; an unconverged iteration reads as false and is logged"""
        value, status = self.check(model, state, sentence)
        if status is TruthStatus.UNKNOWN:
            log.warning("Iteration did not converge within %d unfoldings; '%s' at %s is UNKNOWN, reported as %s",
                        self.star_fuel, render(sentence), state, value)
        return value

    def run(self, model: StateModel, program) -> UpdateResult:
        with self._session():
            return self._run(model, program)

    def witness_path(self, model: StateModel, state: str, action, agents: Iterable[str], sentence) -> Optional[WitnessPath]:
        """
        Search matched state/action sequences for <action> E_C sentence:
        every visited state satisfies the current action's precondition and
        the last one satisfies <last action> sentence.
        """
        model.require(state)
        agents = tuple(sorted(agents))
        with self._session():
            oracle = oracle_for(self.signature)
            idx = model.index
            pre_ok: Dict = {}
            goal: Dict = {}

            def tables(action):
                if action not in pre_ok:
                    pre_ok[action] = self._vec(model, pre_of(action))
                    goal[action] = self._vec(model, DynDiamond(action, sentence))
                return pre_ok[action], goal[action]

            start = (state, action)
            parents = {start: None}
            queue = deque([start])
            while queue:
                node = queue.popleft()
                s, a = node
                ok, done = tables(a)
                if done[idx[s]]:
                    return self._unwind(parents, node)
                if not ok[idx[s]]:
                    continue
                for agent in agents:
                    for t in model.successors(s, agent):
                        for b in oracle.successors(a, agent):
                            nxt = (t, b)
                            if nxt not in parents:
                                parents[nxt] = (node, agent)
                                queue.append(nxt)
            return None

    # -- sessions ---------------------------------------------------------

    @contextmanager
    def _session(self):
        if self._depth == 0:
            self._memo.clear()
            self._runs.clear()
            self._unknown = False
        self._depth += 1
        try:
            yield
        finally:
            self._depth -= 1

    @staticmethod
    def _unwind(parents, node) -> WitnessPath:
        states, actions, agents = [], [], []
        while node is not None:
            states.append(node[0])
            actions.append(node[1])
            link = parents[node]
            if link is None:
                break
            node, agent = link
            agents.append(agent)
        return WitnessPath(tuple(reversed(states)), tuple(reversed(actions)), tuple(reversed(agents)))

    # -- sentences --------------------------------------------------------

    @staticmethod
    def _to_states(model: StateModel, vec: np.ndarray) -> FrozenSet[str]:
        return frozenset(model.states[i] for i in np.flatnonzero(vec))

    def _vector(self, model: StateModel, states: Iterable[str]) -> np.ndarray:
        vec = np.zeros(len(model.states), dtype=bool)
        idx = model.index
        for s in states:
            if s in idx:
                vec[idx[s]] = True
        return vec

    def _vec(self, model: StateModel, s) -> np.ndarray:
        key = (model, s)
        cached = self._memo.get(key)
        if cached is None:
            cached = self._compute(model, s)
            self._memo[key] = cached
        return cached

    def _compute(self, model: StateModel, s) -> np.ndarray:
        n = len(model.states)
        if isinstance(s, Top):
            return np.ones(n, dtype=bool)
        if isinstance(s, Bottom):
            return np.zeros(n, dtype=bool)
        if isinstance(s, Atom):
            return self._vector(model, model.val.get(s.name, ()))
        if isinstance(s, Not):
            return ~self._vec(model, s.arg)
        if isinstance(s, And):
            return self._vec(model, s.left) & self._vec(model, s.right)
        if isinstance(s, Or):
            return self._vec(model, s.left) | self._vec(model, s.right)
        if isinstance(s, Implies):
            return ~self._vec(model, s.left) | self._vec(model, s.right)
        if isinstance(s, Box):
            m = model.adjacency(s.agent)
            return ~(m & ~self._vec(model, s.arg)[None, :]).any(axis=1)
        if isinstance(s, Diamond):
            m = model.adjacency(s.agent)
            return (m & self._vec(model, s.arg)[None, :]).any(axis=1)
        if isinstance(s, CBox):
            return ~self._reaches(model, s.agents, ~self._vec(model, s.arg))
        if isinstance(s, CDiamond):
            return self._reaches(model, s.agents, self._vec(model, s.arg))
        if isinstance(s, DynBox):
            return self._dynbox(model, s.program, s.arg)
        if isinstance(s, DynDiamond):
            if _program_star(s.program):
                return ~self._dynbox(model, s.program, Not(s.arg))
            result = self._run(model, s.program)
            ok = self._vec(result.target, s.arg)
            out = np.zeros(n, dtype=bool)
            tidx, sidx = result.target.index, model.index
            for src, u in result.relation:
                if ok[tidx[u]]:
                    out[sidx[src]] = True
            return out
        if isinstance(s, Pre):
            return self._vec(model, pre_of(s.action))
        raise TypeError(f"Not a sentence: {s!r}")

    def _reaches(self, model: StateModel, agents, targets: np.ndarray) -> np.ndarray:
        """States with a path, possibly empty, into targets along the group's arrows"""
        n = len(model.states)
        if n == 0:
            return targets.copy()
        union = np.zeros((n, n), dtype=bool)
        for agent in agents:
            union |= model.adjacency(agent)
        graph = np.zeros((n + 1, n + 1), dtype=bool)
        graph[:n, :n] = union.T
        graph[n, :n] = targets
        order = breadth_first_order(csr_matrix(graph), n, directed=True, return_predecessors=False)
        out = np.zeros(n, dtype=bool)
        out[order[order < n]] = True
        return out

    def _dynbox(self, model: StateModel, program, body) -> np.ndarray:
        if not _program_star(program):
            result = self._run(model, program)
            ok = self._vec(result.target, body)
            out = np.ones(len(model.states), dtype=bool)
            tidx, sidx = result.target.index, model.index
            for src, u in result.relation:
                if not ok[tidx[u]]:
                    out[sidx[src]] = False
            return out
        if isinstance(program, Union):
            return self._dynbox(model, program.left, body) & self._dynbox(model, program.right, body)
        if isinstance(program, Seq):
            return self._vec(model, DynBox(program.first, DynBox(program.second, body)))
        return self._star_box(model, program.body, body)

    def _star_box(self, model: StateModel, step, body) -> np.ndarray:
        """
        [step*]body as the meet of [step^k]body. Images of each source state
        are tracked by marker atoms, so two stages whose marked quotients are
        totally bisimilar repeat forever after.
        """
        if _program_star(step):
            raise StarNotAllowed(f"Nested iteration is not supported: {render(Star(step))}")
        markers = {f"{MARKER_PREFIX}{s}": {s} for s in model.states}
        current = model.with_atoms(markers)
        result = np.ones(len(model.states), dtype=bool)
        seen = []
        for stage in range(self.star_fuel + 1):
            ok = self._vec(current, body)
            cidx = current.index
            for i, s in enumerate(model.states):
                if result[i] and any(not ok[cidx[u]] for u in current.val.get(f"{MARKER_PREFIX}{s}", ())):
                    result[i] = False
            minimal, _ = quotient(current)
            key = _fingerprint(minimal)
            if any(key == k and totally_bisimilar(minimal, q) for k, q in seen):
                log.debug("Iteration of %s converged after %d stage(s)", render(step), stage)
                return result
            seen.append((key, minimal))
            if stage < self.star_fuel:
                current = self._run(current, step).target
        log.debug("Iteration of %s did not converge within %d stage(s)", render(step), self.star_fuel)
        self._unknown = True
        return result

    # -- programs ---------------------------------------------------------

    def _run(self, model: StateModel, program) -> UpdateResult:
        key = (model, program)
        cached = self._runs.get(key)
        if cached is None:
            cached = self._compute_run(model, program)
            self._runs[key] = cached
        return cached

    def _evaluator(self, model: StateModel):
        return lambda sentence: self._to_states(model, self._vec(model, sentence))

    def _compute_run(self, model: StateModel, program) -> UpdateResult:
        if isinstance(program, Skip):
            return UpdateResult(
                model, model,
                frozenset((s, s) for s in model.states),
                {s: (s, "skip") for s in model.states},
            )
        if isinstance(program, Crash):
            return UpdateResult(model, empty_model(model.agents), frozenset(), {})
        if isinstance(program, Basic):
            pm = signature_program(self.signature, program.index, program.args)
            return update_product(model, pm, self._evaluator(model))
        if isinstance(program, ModelProgram):
            pm = program.model.with_designated(program.designated)
            return update_product(model, pm, self._evaluator(model))
        if isinstance(program, Seq):
            first = self._run(model, program.first)
            second = self._run(first.target, program.second)
            return _then(first, second)
        if isinstance(program, Union):
            return _choice(model, [self._run(model, program.left), self._run(model, program.right)])
        if isinstance(program, Star):
            raise StarNotAllowed("Iterated programs have no finite denotation; evaluate [p*] inside a sentence")
        raise TypeError(f"Not a program: {program!r}")


def _then(first: UpdateResult, second: UpdateResult) -> UpdateResult:
    relation = frozenset(
        (s, v) for s, u in first.relation for v in second.images(u)
    )
    pairing = {}
    for v in second.target.states:
        u, b = second.pairing[v]
        s, a = first.pairing[u]
        pairing[v] = (s, pair_id(a, b))
    return UpdateResult(first.source, second.target, relation, pairing)


def _choice(model: StateModel, results) -> UpdateResult:
    states, pairing, relation = [], {}, set()
    rel = {a: set() for a in model.agents}
    val: Dict[str, set] = {}
    for i, r in enumerate(results, start=1):
        tag = {u: pair_id(u, i) for u in r.target.states}
        states.extend(tag[u] for u in r.target.states)
        for u in r.target.states:
            s, a = r.pairing[u]
            pairing[tag[u]] = (s, pair_id(a, i))
        for agent, pairs in r.target.rel.items():
            rel[agent].update((tag[x], tag[y]) for x, y in pairs)
        for p, ext in r.target.val.items():
            val.setdefault(p, set()).update(tag[u] for u in ext)
        relation.update((s, tag[u]) for s, u in r.relation)
    target = StateModel(
        tuple(states),
        {a: frozenset(ps) for a, ps in rel.items()},
        {p: frozenset(ext) for p, ext in val.items()},
    )
    return UpdateResult(model, target, frozenset(relation), pairing)


# ---------------------------------------------------------------------------
# Module-level conveniences
# ---------------------------------------------------------------------------

def eval_sentence(model: StateModel, sentence, signature: Signature, fuel: Optional[int] = None,
                  config: EngineConfig = DEFAULT_CONFIG) -> TruthSet:
    return ModelChecker(signature, config, star_fuel=fuel).truth_set(model, sentence)


def eval_program(model: StateModel, program, signature: Signature) -> UpdateResult:
    return ModelChecker(signature).run(model, program)


def holds(model: StateModel, state: str, sentence, signature: Signature) -> bool:
    return ModelChecker(signature).holds(model, state, sentence)


def diamond_star_paths(model: StateModel, state: str, action, agents: Iterable[str], sentence,
                       signature: Signature) -> Optional[WitnessPath]:
    return ModelChecker(signature).witness_path(model, state, action, agents, sentence)
