"""
DEL Toolkit - Bisimulation Engine
Largest bisimulations by partition refinement, minimization, and the
derived checks on updates and program models.
"""

import logging
from collections import deque
from typing import Callable, Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

from core import DELError, ModelError, ProgramModel, Signature, StateModel, UpdateResult

log = logging.getLogger(__name__)

Pair = Tuple[str, str]


def refine_partition(size: int, agents: Sequence[str], successors: Dict[str, List[List[int]]],
                     initial: Sequence[Hashable]) -> List[int]:
    """
    Coarsest partition of range(size) that refines `initial` and is stable
    under every agent relation. Splitters come from a worklist of blocks;
    a block that splits re-enters the worklist.
    Returns the block number of every node. Block order follows node order.
    """
    blocks: List[List[int]] = []
    block_of = [0] * size
    by_key: Dict[Hashable, int] = {}
    for x in range(size):
        b = by_key.get(initial[x])
        if b is None:
            b = by_key[initial[x]] = len(blocks)
            blocks.append([])
        blocks[b].append(x)
        block_of[x] = b

    predecessors = {a: [[] for _ in range(size)] for a in agents}
    for a in agents:
        for x, ys in enumerate(successors.get(a, ())):
            for y in ys:
                predecessors[a][y].append(x)

    work = deque(range(len(blocks)))
    queued = set(work)
    while work:
        b = work.popleft()
        queued.discard(b)
        splitter = list(blocks[b])
        for a in agents:
            marked = set()
            for y in splitter:
                marked.update(predecessors[a][y])
            for c in sorted({block_of[x] for x in marked}):
                inside = [x for x in blocks[c] if x in marked]
                if len(inside) == len(blocks[c]):
                    continue
                outside = [x for x in blocks[c] if x not in marked]
                blocks[c] = inside
                fresh = len(blocks)
                blocks.append(outside)
                for x in outside:
                    block_of[x] = fresh
                for d in (c, fresh):
                    if d not in queued:
                        work.append(d)
                        queued.add(d)
    return _renumber(block_of)


def _renumber(block_of: List[int]) -> List[int]:
    names: Dict[int, int] = {}
    return [names.setdefault(b, len(names)) for b in block_of]


def _union_blocks(left: StateModel, right: Optional[StateModel]) -> List[int]:
    models = [left] if right is None else [left, right]
    agents = sorted(left.rel)
    offsets, total = [], 0
    for m in models:
        offsets.append(total)
        total += len(m.states)
    successors = {a: [] for a in agents}
    initial = []
    for m, offset in zip(models, offsets):
        idx = m.index
        for s in m.states:
            initial.append(m.atoms_at(s))
            for a in agents:
                successors[a].append([offset + idx[t] for t in m.successors(s, a)])
    return refine_partition(total, agents, successors, initial)


def _check_agents(left: StateModel, right: StateModel):
    if set(left.rel) != set(right.rel):
        raise ModelError(f"Agent sets differ: {sorted(left.rel)} vs {sorted(right.rel)}")


def largest_bisimulation(left: StateModel, right: StateModel) -> FrozenSet[Pair]:
    """The greatest bisimulation between two models over the same agents"""
    _check_agents(left, right)
    blocks = _union_blocks(left, right)
    n = len(left.states)
    members: Dict[int, List[str]] = {}
    for j, t in enumerate(right.states):
        members.setdefault(blocks[n + j], []).append(t)
    return frozenset(
        (s, t) for i, s in enumerate(left.states) for t in members.get(blocks[i], ())
    )


def bisimilar(left: StateModel, s: str, right: StateModel, t: str) -> bool:
    left.require(s)
    right.require(t)
    _check_agents(left, right)
    blocks = _union_blocks(left, right)
    return blocks[left.index[s]] == blocks[len(left.states) + right.index[t]]


def totally_bisimilar(left: StateModel, right: StateModel) -> bool:
    """Every state on each side has a bisimilar partner on the other"""
    _check_agents(left, right)
    blocks = _union_blocks(left, right)
    n = len(left.states)
    return set(blocks[:n]) == set(blocks[n:])


def quotient(model: StateModel) -> Tuple[StateModel, Dict[str, str]]:
    """
    Bisimulation minimization.
    Classes are named "[s]" after their first member; returns the minimal
    model and the projection of every state onto its class.
    """
    blocks = _union_blocks(model, None)
    names: Dict[int, str] = {}
    for s, b in zip(model.states, blocks):
        names.setdefault(b, f"[{s}]")
    projection = {s: names[b] for s, b in zip(model.states, blocks)}
    states = tuple(names[b] for b in sorted(names))
    rel = {
        a: frozenset((projection[s], projection[t]) for s, t in pairs)
        for a, pairs in model.rel.items()
    }
    val = {p: frozenset(projection[s] for s in ext) for p, ext in model.val.items()}
    return StateModel(states, rel, val), projection


def is_bisimulation(left: StateModel, right: StateModel, relation) -> bool:
    """Atomic harmony plus both transfer conditions"""
    relation = frozenset(relation)
    if set(left.rel) != set(right.rel):
        return False
    for s, t in relation:
        if s not in left.index or t not in right.index:
            return False
        if left.atoms_at(s) != right.atoms_at(t):
            return False
        for a in left.rel:
            for s2 in left.successors(s, a):
                if not any((s2, t2) in relation for t2 in right.successors(t, a)):
                    return False
            for t2 in right.successors(t, a):
                if not any((s2, t2) in relation for s2 in left.successors(s, a)):
                    return False
    return True


def is_total_bisimulation(left: StateModel, right: StateModel, relation) -> bool:
    relation = frozenset(relation)
    if not is_bisimulation(left, right, relation):
        return False
    return {s for s, _ in relation} == set(left.states) and {t for _, t in relation} == set(right.states)


# ---------------------------------------------------------------------------
# Updates
# ---------------------------------------------------------------------------

def update_link(first: UpdateResult, second: UpdateResult) -> FrozenSet[Pair]:
    """Relate the images of each common source state: first^-1 ; id ; second"""
    return frozenset(
        (u, v) for s, u in first.relation for v in second.images(s)
    )


def updates_equivalent(first: UpdateResult, second: UpdateResult) -> bool:
    """
    Two updates of the same model agree up to bisimulation: every image of
    a source state under one update has a bisimilar image of the same
    state under the other, both ways.
    """
    if first.source is not second.source:
        raise ModelError("Updates must start from the same model")
    _check_agents(first.target, second.target)
    link = largest_bisimulation(first.target, second.target)
    for s in first.source.states:
        mine, theirs = first.images(s), second.images(s)
        if any(not any((u, v) in link for v in theirs) for u in mine):
            return False
        if any(not any((u, v) in link for u in mine) for v in theirs):
            return False
    return True


# ---------------------------------------------------------------------------
# Program models
# ---------------------------------------------------------------------------

Equivalence = Callable[[object, object], bool]


def decided_equivalence(signature: Signature) -> Equivalence:
    """
    Precondition equality as validity of the biconditional. Preconditions
    outside the decidable language fall back to syntactic equality.
    """
    from decision_engine import DecisionEngine
    from syntax import iff

    engine = DecisionEngine(signature)

    def equivalent(a, b) -> bool:
        if a == b:
            return True
        try:
            return engine.valid(iff(a, b))
        except DELError as e:
            log.debug("Falling back to syntactic precondition comparison: %s", e)
            return False

    return equivalent


def largest_program_bisimulation(left: ProgramModel, right: ProgramModel, signature: Signature,
                                 equivalent: Optional[Equivalence] = None) -> FrozenSet[Pair]:
    """Greatest relation matching equivalent preconditions and arrows both ways"""
    equivalent = equivalent or decided_equivalence(signature)
    nodes = [(left, a) for a in left.carrier] + [(right, a) for a in right.carrier]
    representatives: List = []
    initial = []
    for model, a in nodes:
        pre = model.pre[a]
        for k, rep in enumerate(representatives):
            if equivalent(rep, pre):
                initial.append(k)
                break
        else:
            initial.append(len(representatives))
            representatives.append(pre)

    agents = sorted(set(signature.agents) | set(left.rel) | set(right.rel))
    offset = len(left.carrier)
    successors = {ag: [] for ag in agents}
    for model, base in ((left, 0), (right, offset)):
        position = {a: base + i for i, a in enumerate(model.carrier)}
        for a in model.carrier:
            for ag in agents:
                successors[ag].append([position[b] for b in model.successors(a, ag)])
    blocks = refine_partition(len(nodes), agents, successors, initial)
    return frozenset(
        (a, b)
        for i, a in enumerate(left.carrier)
        for j, b in enumerate(right.carrier)
        if blocks[i] == blocks[offset + j]
    )


def program_models_bisimilar(left: ProgramModel, right: ProgramModel, signature: Signature,
                             equivalent: Optional[Equivalence] = None) -> bool:
    """Bisimilar program models whose designated sets correspond"""
    link = largest_program_bisimulation(left, right, signature, equivalent)
    forth = all(any((a, b) in link for b in right.designated) for a in left.designated)
    back = all(any((a, b) in link for a in left.designated) for b in right.designated)
    return forth and back
