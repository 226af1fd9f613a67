"""
DEL Toolkit - Canonical Action Model
Arrows between simple actions, their preconditions, and the finite
fragments reachable from a given action.
"""

import logging
import threading
import weakref
from collections import deque
from typing import Dict, FrozenSet, Iterable, List, Tuple

from core import NotSimpleAction, ProgramModel, Signature
from formula_parser import render
from syntax import (
    Basic, BOTTOM, Crash, DynDiamond, Seq, Skip, TOP, action_length, is_simple,
)

log = logging.getLogger(__name__)


def pre_of(action):
    """
    Precondition of a simple action.

        skip -> true, crash -> false, s_i(psi...) -> psi_i,
        a ; b -> <a> pre(b)
    """
    if isinstance(action, Skip):
        return TOP
    if isinstance(action, Crash):
        return BOTTOM
    if isinstance(action, Basic):
        return action.args[action.index - 1]
    if isinstance(action, Seq) and is_simple(action):
        return DynDiamond(action.first, pre_of(action.second))
    raise NotSimpleAction(f"Not a simple action: {render(action)}")


class OmegaArrowOracle:
    """
    Successor sets of simple actions for one signature.
    Results are memoized under the canonical rendering; the memo is shared
    between threads behind a lock.
    """

    def __init__(self, signature: Signature):
        self.signature = signature
        self._memo: Dict[Tuple[str, str], Tuple] = {}
        self._lock = threading.Lock()

    def successors(self, action, agent: str) -> Tuple:
        key = (render(action, full=True), agent)
        with self._lock:
            cached = self._memo.get(key)
        if cached is not None:
            return cached
        found = tuple(sorted(set(self._compute(action, agent)), key=render))
        with self._lock:
            self._memo[key] = found
        return found

    def _compute(self, action, agent: str) -> List:
        if isinstance(action, Skip):
            return [action]
        if isinstance(action, Crash):
            return []
        if isinstance(action, Basic):
            sig = self.signature
            return [
                Basic(t, sig.index_of(t), action.args)
                for t in sig.successors(action.type_name, agent)
            ]
        if isinstance(action, Seq):
            lefts = self.successors(action.first, agent)
            rights = self.successors(action.second, agent)
            return [Seq(a, b) for a in lefts for b in rights]
        raise NotSimpleAction(f"Not a simple action: {render(action)}")

    def reachable(self, action, agents: Iterable[str]) -> Tuple:
        """Closure under the group's arrows, the action itself included, sorted"""
        agents = sorted(agents)
        seen = {action}
        queue = deque([action])
        while queue:
            current = queue.popleft()
            for agent in agents:
                for nxt in self.successors(current, agent):
                    if nxt not in seen:
                        seen.add(nxt)
                        queue.append(nxt)
        bound = self.signature.n ** action_length(action)
        if len(seen) > max(bound, 1):
            log.warning("Reachable set of %s has %d actions, above n^len = %d", render(action), len(seen), bound)
        return tuple(sorted(seen, key=render))

    def __len__(self) -> int:
        return len(self._memo)

    def __repr__(self) -> str:
        return f"OmegaArrowOracle(signature='{self.signature.name}', memo={len(self._memo)})"


_ORACLES: 'weakref.WeakKeyDictionary[Signature, OmegaArrowOracle]' = weakref.WeakKeyDictionary()
_ORACLES_LOCK = threading.Lock()


def oracle_for(signature: Signature) -> OmegaArrowOracle:
    with _ORACLES_LOCK:
        oracle = _ORACLES.get(signature)
        if oracle is None:
            oracle = OmegaArrowOracle(signature)
            _ORACLES[signature] = oracle
        return oracle


def successors(action, agent: str, signature: Signature) -> FrozenSet:
    return frozenset(oracle_for(signature).successors(action, agent))


def reachable(action, agents: Iterable[str], signature: Signature) -> FrozenSet:
    return frozenset(oracle_for(signature).reachable(action, agents))


def omega_program_model(action, signature: Signature) -> ProgramModel:
    """
    The part of the canonical action model reachable from one action,
    over every agent, designated at that action.
    Carrier ids are canonical renderings.
    """
    oracle = oracle_for(signature)
    members = oracle.reachable(action, signature.agents)
    ids = {b: render(b) for b in members}
    rel = {
        agent: frozenset((ids[b], ids[c]) for b in members for c in oracle.successors(b, agent))
        for agent in signature.agents
    }
    return ProgramModel(
        name=f"Omega[{ids[action]}]",
        carrier=tuple(ids[b] for b in members),
        rel=rel,
        pre={ids[b]: pre_of(b) for b in members},
        designated=frozenset({ids[action]}),
    )
