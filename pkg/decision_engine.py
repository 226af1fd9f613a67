"""
DEL Toolkit - Decision Engine
Satisfiability and validity for the star-free language.

Pipeline:
1. desugar and normalize the input
2. closure of the normal form
3. enumerate atoms: atomic and K_A members are free choices, every other
   member is fixed by local coherence
4. filtration edges: U -A-> V when every K_A psi of U has psi in V
5. eliminate atoms until stable: unwitnessed M_A members, unfulfilled
   group eventualities, action eventualities without a good path
6. satisfiable iff a survivor contains the normal form; survivors form a
   witness model, model-checked before it is returned

Atoms are rows of a boolean matrix (atoms x closure members) built column
by column over all free assignments at once.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from canon import oracle_for
from core import (
    DEFAULT_CONFIG, DecisionError, EngineConfig, GuardError, Signature, StateModel,
)
from formula_parser import render
from rewrite_engine import ClosureSet, RewriteEngine
from syntax import And, Atom, Box, CBox, DynBox, Not, Pre, Top

log = logging.getLogger(__name__)


class Verdict(Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"


@dataclass(frozen=True)
class HintikkaAtom:
    """One polarity choice per closure member"""
    positive: FrozenSet
    negative: FrozenSet

    def __contains__(self, member) -> bool:
        return member in self.positive


@dataclass
class FiltrationGraph:
    closure: ClosureSet
    members: Tuple
    column: Dict[object, int]
    free: Tuple
    matrix: np.ndarray
    edges: Dict[str, np.ndarray]
    alive: np.ndarray

    def values(self, member) -> np.ndarray:
        try:
            return self.matrix[:, self.column[member]]
        except KeyError:
            raise DecisionError(f"Closure is missing {render(member)}")

    def atom(self, index: int) -> HintikkaAtom:
        row = self.matrix[index]
        return HintikkaAtom(
            frozenset(m for m, v in zip(self.members, row) if v),
            frozenset(m for m, v in zip(self.members, row) if not v),
        )

    @property
    def survivors(self) -> np.ndarray:
        return np.flatnonzero(self.alive)

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"FiltrationGraph(members={len(self.members)}, atoms={len(self)}, alive={int(self.alive.sum())})"


@dataclass(frozen=True)
class GoodPath:
    """Atoms and actions visited; agents[i] labels the step from i to i+1"""
    atoms: Tuple[int, ...]
    actions: Tuple
    agents: Tuple[str, ...]

    def __len__(self) -> int:
        return len(self.agents)


@dataclass
class Decision:
    verdict: Verdict
    sentence: object
    normal_form: object
    closure_size: int
    atom_count: int
    survivor_count: int
    rounds: int = 0
    model: Optional[StateModel] = None
    state: Optional[str] = None

    @property
    def satisfiable(self) -> bool:
        return self.verdict is Verdict.SAT

    def __repr__(self) -> str:
        return (f"Decision({self.verdict.value}, closure={self.closure_size}, "
                f"atoms={self.atom_count}, survivors={self.survivor_count})")


def state_name(index: int) -> str:
    return f"u{index}"


class DecisionEngine:
    def __init__(self, signature: Signature, config: EngineConfig = DEFAULT_CONFIG):
        self.signature = signature
        self.config = config
        self.rewriter = RewriteEngine(signature, config)
        self.oracle = oracle_for(signature)

    # -- public API -------------------------------------------------------

    def satisfiable(self, sentence) -> Decision:
        normal = self.rewriter.normalize(sentence)
        graph = self.build_graph(normal)
        rounds = self.eliminate(graph)
        hits = np.flatnonzero(graph.values(normal) & graph.alive)
        decision = Decision(
            verdict=Verdict.SAT if hits.size else Verdict.UNSAT,
            sentence=sentence,
            normal_form=normal,
            closure_size=len(graph.members),
            atom_count=len(graph),
            survivor_count=int(graph.alive.sum()),
            rounds=rounds,
        )
        log.debug("%s for %s", decision, render(sentence))
        if not hits.size:
            return decision
        decision.model = self.witness_model(graph)
        decision.state = state_name(int(hits[0]))
        if self.config.check_witness:
            self._check_witness(decision)
        return decision

    def valid(self, sentence) -> bool:
        return not self.satisfiable(Not(sentence)).satisfiable

    def countermodel(self, sentence) -> Decision:
        """Decision for the negation; SAT carries a model refuting the sentence"""
        return self.satisfiable(Not(sentence))

    def _check_witness(self, decision: Decision):
        from model_checker import ModelChecker

        checker = ModelChecker(self.signature, self.config)
        if not checker.holds(decision.model, decision.state, decision.sentence):
            raise DecisionError(
                f"Witness state {decision.state} does not satisfy {render(decision.sentence)}"
            )

    # -- atoms and edges --------------------------------------------------

    def build_graph(self, normal) -> FiltrationGraph:
        closure = self.rewriter.closure(normal)
        members = closure.ordered
        column = {m: i for i, m in enumerate(members)}
        free = tuple(m for m in members if isinstance(m, (Atom, Box)))
        count = 1 << len(free)
        if count > self.config.atom_limit:
            raise GuardError(
                f"{count} atoms exceed the limit of {self.config.atom_limit} "
                f"(atom_cap={self.config.atom_cap}, edge_cell_cap={self.config.edge_cell_cap})"
            )

        codes = np.arange(count, dtype=np.int64)
        values: Dict[object, np.ndarray] = {
            m: ((codes >> j) & 1).astype(bool) for j, m in enumerate(free)
        }

        def value(m) -> np.ndarray:
            if m not in values:
                if m not in column:
                    raise DecisionError(f"Closure is missing {render(m)}")
                values[m] = self._coherent(m, value, count)
            return values[m]

        if members:
            matrix = np.column_stack([value(m) for m in members])
        else:
            matrix = np.zeros((count, 0), dtype=bool)

        edges = {}
        for agent in self.signature.agents:
            boxes = [m for m in members if isinstance(m, Box) and m.agent == agent]
            if not boxes:
                edges[agent] = np.ones((count, count), dtype=bool)
                continue
            held = matrix[:, [column[b] for b in boxes]].astype(np.int32)
            missing = (~matrix[:, [column[b.arg] for b in boxes]]).astype(np.int32)
            edges[agent] = (held @ missing.T) == 0

        log.debug("Filtration over %d members: %d free, %d atoms", len(members), len(free), count)
        return FiltrationGraph(closure, members, column, free, matrix, edges, np.ones(count, dtype=bool))

    def _coherent(self, m, value, count: int) -> np.ndarray:
        """Value of a determined member in every atom"""
        if isinstance(m, Top):
            return np.ones(count, dtype=bool)
        if isinstance(m, Not):
            return ~value(m.arg)
        if isinstance(m, And):
            return value(m.left) & value(m.right)
        if isinstance(m, CBox):
            # C_G psi <-> psi & K_A C_G psi for A in G
            out = value(m.arg).copy()
            for agent in sorted(m.agents):
                out &= value(Box(agent, m))
            return out
        if isinstance(m, DynBox):
            # [a]C_G psi <-> nf([a]psi) & (nf(pre a) -> AND K_A [b]C_G psi over a -A-> b)
            group = m.arg
            now = value(self.rewriter.normal_form(DynBox(m.program, group.arg)))
            pre = value(self.rewriter.normal_form(Pre(m.program)))
            later = np.ones(count, dtype=bool)
            for agent in sorted(group.agents):
                for b in self.oracle.successors(m.program, agent):
                    later &= value(Box(agent, DynBox(b, group)))
            return now & (~pre | later)
        raise DecisionError(f"Unexpected closure member {render(m)}")

    # -- elimination ------------------------------------------------------

    def eliminate(self, graph: FiltrationGraph) -> int:
        """Remove atoms round by round until none fails; returns the round count"""
        rounds = 0
        while True:
            rounds += 1
            alive = graph.alive
            bad = np.zeros_like(alive)
            for m in graph.members:
                if isinstance(m, Box):
                    need = alive & ~graph.values(m)
                    if need.any():
                        witnesses = alive & ~graph.values(m.arg)
                        bad |= need & ~graph.edges[m.agent][:, witnesses].any(axis=1)
                elif isinstance(m, CBox):
                    need = alive & ~graph.values(m)
                    if need.any():
                        reach = self._group_reach(graph, m.agents, alive & ~graph.values(m.arg))
                        bad |= need & ~reach
                elif isinstance(m, DynBox):
                    need = alive & ~graph.values(m)
                    if need.any():
                        good = self._good_atoms(graph, m.program, m.arg.agents, m.arg.arg)
                        bad |= need & ~good[m.program]
            bad &= alive
            if not bad.any():
                return rounds
            log.debug("Round %d removes %d atom(s)", rounds, int(bad.sum()))
            graph.alive = alive & ~bad

    def _group_reach(self, graph: FiltrationGraph, agents, targets: np.ndarray) -> np.ndarray:
        reach = targets.copy()
        while True:
            step = reach.copy()
            for agent in sorted(agents):
                step |= graph.alive & graph.edges[agent][:, reach].any(axis=1)
            if (step == reach).all():
                return reach
            reach = step

    def _path_tables(self, graph: FiltrationGraph, action, agents, psi):
        members = self.oracle.reachable(action, agents)
        pre = {b: graph.values(self.rewriter.normal_form(Pre(b))) for b in members}
        end = {
            b: graph.alive & pre[b] & ~graph.values(self.rewriter.normal_form(DynBox(b, psi)))
            for b in members
        }
        return members, pre, end

    def _good_atoms(self, graph: FiltrationGraph, action, agents, psi) -> Dict[object, np.ndarray]:
        """For each reachable action b, the live atoms starting a good path at b"""
        members, pre, good = self._path_tables(graph, action, agents, psi)
        good = dict(good)
        changed = True
        while changed:
            changed = False
            for b in members:
                acc = good[b]
                for agent in sorted(agents):
                    for c in self.oracle.successors(b, agent):
                        if good[c].any():
                            acc = acc | (graph.alive & pre[b] & graph.edges[agent][:, good[c]].any(axis=1))
                if (acc != good[b]).any():
                    good[b] = acc
                    changed = True
        return good

    def good_path_search(self, graph: FiltrationGraph, atom: int, action, agents: Iterable[str], psi) -> Optional[GoodPath]:
        """
        Breadth-first search for a good path from (atom, action): every atom
        on it holds the precondition of its action, and the last one also
        refutes nf([action]psi).
        """
        agents = tuple(sorted(agents))
        if not graph.alive[atom]:
            return None
        _, pre, end = self._path_tables(graph, action, agents, psi)
        start = (atom, action)
        parents = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            u, b = node
            if end[b][u]:
                return _unwind(parents, node)
            if not pre[b][u]:
                continue
            for agent in agents:
                targets = np.flatnonzero(graph.edges[agent][u] & graph.alive)
                for c in self.oracle.successors(b, agent):
                    for v in targets:
                        nxt = (int(v), c)
                        if nxt not in parents:
                            parents[nxt] = (node, agent)
                            queue.append(nxt)
        return None

    # -- witnesses --------------------------------------------------------

    def witness_model(self, graph: FiltrationGraph) -> StateModel:
        """Survivors as states, filtration edges as relations, atomic members as valuation"""
        keep = graph.survivors
        names = [state_name(int(i)) for i in keep]
        rel = {}
        for agent, matrix in graph.edges.items():
            sub = matrix[np.ix_(keep, keep)]
            rel[agent] = frozenset((names[i], names[j]) for i, j in zip(*np.nonzero(sub)))
        val = {}
        for m in graph.members:
            if isinstance(m, Atom):
                column = graph.values(m)[keep]
                val[m.name] = frozenset(n for n, v in zip(names, column) if v)
        return StateModel(tuple(names), rel, val)


def _unwind(parents, node) -> GoodPath:
    atoms, actions, agents = [], [], []
    while True:
        atoms.append(node[0])
        actions.append(node[1])
        link = parents[node]
        if link is None:
            break
        node, agent = link
        agents.append(agent)
    return GoodPath(tuple(reversed(atoms)), tuple(reversed(actions)), tuple(reversed(agents)))


def satisfiable(sentence, signature: Signature, config: EngineConfig = DEFAULT_CONFIG) -> Decision:
    return DecisionEngine(signature, config).satisfiable(sentence)


def valid(sentence, signature: Signature, config: EngineConfig = DEFAULT_CONFIG) -> bool:
    return DecisionEngine(signature, config).valid(sentence)
