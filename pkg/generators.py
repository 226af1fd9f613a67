"""
DEL Toolkit - Model Generators
Example signatures and models, and seeded random corpora for testing.

Every generator is deterministic: the named families depend only on their
arguments, the random ones only on the numpy Generator passed in.
"""

import logging
from itertools import islice, product
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from core import ModelError, Signature, StateModel
from syntax import (
    And, Atom, Basic, Box, CBox, CDiamond, CRASH, Diamond, DynBox, DynDiamond,
    Implies, Not, Or, SKIP, Seq, Star, TOP, Union, seq,
)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------

def pub_signature(agents: Sequence[str] = ("A", "B")) -> Signature:
    """Public announcement: one type, seen by everyone"""
    return Signature(
        name="Pub",
        agents=tuple(agents),
        types=("Pub",),
        arrows={a: frozenset({("Pub", "Pub")}) for a in agents},
    )


def pri_signature(agent: str = "A", others: Sequence[str] = ("B",)) -> Signature:
    """
    Private announcement to one agent. The insider sees which type happened;
    everyone else believes nothing happened (type skp).
    """
    arrows = {agent: frozenset({("Pri", "Pri"), ("skp", "skp")})}
    for other in others:
        arrows[other] = frozenset({("Pri", "skp"), ("skp", "skp")})
    return Signature(
        name=f"Pri_{agent}",
        agents=(agent, *others),
        types=("Pri", "skp"),
        arrows=arrows,
    )


def pub(announcement) -> Basic:
    return Basic("Pub", 1, (announcement,))


def pri(announcement, alternative=TOP) -> Basic:
    return Basic("Pri", 1, (announcement, alternative))


# ---------------------------------------------------------------------------
# Named model families
# ---------------------------------------------------------------------------

def gen_cn(n: int) -> StateModel:
    """
    A cycle a_1 .. a_5n with symmetric edges alternating A, B, A, ...
    starting at a_1 - a_2. p fails only at a_1 and a_(2n+1); q holds only
    at a_(4n+1).
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 2 or n % 2:
        raise ModelError(f"C_n needs an even n >= 2, got {n!r}")
    n = int(n)
    size = 5 * n
    states = tuple(f"a_{i}" for i in range(1, size + 1))
    rel = {"A": set(), "B": set()}
    for i in range(1, size + 1):
        j = i % size + 1
        agent = "A" if i % 2 else "B"
        rel[agent] |= {(f"a_{i}", f"a_{j}"), (f"a_{j}", f"a_{i}")}
    val = {
        "p": frozenset(s for s in states if s not in {"a_1", f"a_{2 * n + 1}"}),
        "q": frozenset({f"a_{4 * n + 1}"}),
    }
    return StateModel(states, {a: frozenset(ps) for a, ps in rel.items()}, val)


def chain_state(i: int, k: int) -> str:
    return f"c{i}_{k}"


def gen_private_pair(J: Iterable[int], f: Dict[int, int], j: int) -> Tuple[StateModel, StateModel]:
    """
    The pair S_f, T_f,j over states a, b and chains c{i}_1 .. c{i}_f(i).

    A: reflexive everywhere, a -> b, b -> c{i}_1, c{i}_k -> c{i}_(k+1)
    B: c{i}_f(i) -> b
    T adds exactly a -A-> c{j}_1. p holds everywhere except b.
    """
    J = sorted(set(J))
    if set(f) != set(J):
        raise ModelError(f"f must be defined exactly on J={J}, got keys {sorted(f)}")
    for i in J:
        if not isinstance(f[i], (int, np.integer)) or f[i] < 1:
            raise ModelError(f"f({i}) must be a positive integer, got {f[i]!r}")
    if j not in J:
        raise ModelError(f"j={j} is not a member of J={J}")

    chains = [chain_state(i, k) for i in J for k in range(1, f[i] + 1)]
    states = ("a", "b", *chains)
    a_arrows = {(s, s) for s in states} | {("a", "b")}
    b_arrows = set()
    for i in J:
        a_arrows.add(("b", chain_state(i, 1)))
        for k in range(1, f[i]):
            a_arrows.add((chain_state(i, k), chain_state(i, k + 1)))
        b_arrows.add((chain_state(i, f[i]), "b"))
    val = {"p": frozenset(s for s in states if s != "b")}

    s_model = StateModel(states, {"A": frozenset(a_arrows), "B": frozenset(b_arrows)}, val)
    t_arrows = a_arrows | {("a", chain_state(j, 1))}
    t_model = StateModel(states, {"A": frozenset(t_arrows), "B": frozenset(b_arrows)}, val)
    return s_model, t_model


def decreasing_state(sequence: Sequence[int]) -> str:
    return "r" + "".join(f".{m}" for m in sequence)


def gen_decreasing(depth: int, agent: str = "A") -> StateModel:
    """
    Strictly decreasing sequences of naturals below `depth`, the root being
    the empty sequence. Each sequence sees its one-step extensions. No atoms.
    A state's height equals its last entry (depth for the root).
    """
    if depth < 0:
        raise ModelError(f"Depth must be non-negative, got {depth}")
    states: List[str] = []
    edges = set()
    stack: List[Tuple[int, ...]] = [()]
    while stack:
        current = stack.pop()
        name = decreasing_state(current)
        states.append(name)
        bound = current[-1] if current else depth
        for m in reversed(range(bound)):
            child = current + (m,)
            edges.add((name, decreasing_state(child)))
            stack.append(child)
    return StateModel(tuple(states), {agent: frozenset(edges)}, {})


# ---------------------------------------------------------------------------
# Random corpora
# ---------------------------------------------------------------------------

def random_model(rng: np.random.Generator, agents: Sequence[str], atoms: Sequence[str] = ("p", "q"),
                 max_states: int = 5, edge_prob: float = 0.35, min_states: int = 1) -> StateModel:
    n = int(rng.integers(min_states, max_states + 1))
    states = tuple(f"s{i}" for i in range(n))
    rel = {}
    for agent in agents:
        matrix = rng.random((n, n)) < edge_prob
        rel[agent] = frozenset((states[i], states[j]) for i, j in zip(*np.nonzero(matrix)))
    val = {}
    for p in atoms:
        mask = rng.random(n) < 0.5
        val[p] = frozenset(s for s, v in zip(states, mask) if v)
    return StateModel(states, rel, val)


def choose(rng: np.random.Generator, items: Sequence):
    return items[int(rng.integers(len(items)))]


def random_group(rng: np.random.Generator, agents: Sequence[str]) -> frozenset:
    mask = rng.random(len(agents)) < 0.5
    chosen = [a for a, v in zip(agents, mask) if v]
    return frozenset(chosen or [choose(rng, agents)])


def random_sentence(rng: np.random.Generator, sig: Signature, atoms: Sequence[str] = ("p", "q"),
                    depth: int = 3, dynamic: bool = True, star: bool = False):
    """
    A random sentence of modal plus dynamic depth at most `depth`.
    Programs are star-free unless `star` is set.
    """
    if depth <= 0 or rng.random() < 0.2:
        return TOP if rng.random() < 0.1 else Atom(choose(rng, atoms))
    kinds = ["not", "and", "or", "implies", "box", "diamond", "cbox", "cdiamond"]
    if dynamic:
        kinds += ["dynbox", "dyndiamond", "dynbox"]
    kind = choose(rng, kinds)
    sub = lambda: random_sentence(rng, sig, atoms, depth - 1, dynamic, star)
    if kind == "not":
        return Not(sub())
    if kind in ("and", "or", "implies"):
        return {"and": And, "or": Or, "implies": Implies}[kind](sub(), sub())
    if kind in ("box", "diamond"):
        return (Box if kind == "box" else Diamond)(choose(rng, sig.agents), sub())
    if kind in ("cbox", "cdiamond"):
        return (CBox if kind == "cbox" else CDiamond)(random_group(rng, sig.agents), sub())
    program = random_program(rng, sig, atoms, depth - 1, star)
    return (DynBox if kind == "dynbox" else DynDiamond)(program, sub())


def random_basic(rng: np.random.Generator, sig: Signature, atoms: Sequence[str] = ("p", "q"),
                 arg_depth: int = 0) -> Basic:
    index = int(rng.integers(1, sig.n + 1))
    args = tuple(random_sentence(rng, sig, atoms, arg_depth, dynamic=False) for _ in range(sig.n))
    return Basic(sig.type_at(index), index, args)


def random_program(rng: np.random.Generator, sig: Signature, atoms: Sequence[str] = ("p", "q"),
                   depth: int = 1, star: bool = False):
    roll = rng.random()
    if depth <= 0 or roll < 0.5:
        return random_basic(rng, sig, atoms, max(depth - 1, 0))
    if roll < 0.58:
        return SKIP
    if roll < 0.62:
        return CRASH
    if roll < 0.78:
        return Seq(random_program(rng, sig, atoms, depth - 1, star), random_program(rng, sig, atoms, depth - 1, star))
    if star and roll > 0.92:
        return Star(random_program(rng, sig, atoms, depth - 1, star=False))
    return Union(random_program(rng, sig, atoms, depth - 1, star), random_program(rng, sig, atoms, depth - 1, star))


def random_simple_action(rng: np.random.Generator, sig: Signature, atoms: Sequence[str] = ("p", "q"),
                         length: int = 1, arg_depth: int = 0):
    """Left-nested composition of `length` basic actions"""
    return seq(random_basic(rng, sig, atoms, arg_depth) for _ in range(max(length, 1)))


def random_group_sentence(rng: np.random.Generator, sig: Signature, atoms: Sequence[str] = ("p", "q"),
                          max_length: int = 2, body_depth: int = 1):
    """[a]C_G phi for a random simple action a; the shape the PDL translation works hardest on"""
    action = random_simple_action(rng, sig, atoms, int(rng.integers(1, max_length + 1)))
    body = random_sentence(rng, sig, atoms, body_depth, dynamic=False)
    return DynBox(action, CBox(random_group(rng, sig.agents), body))



# ---------------------------------------------------------------------------
# Exhaustive corpora
# ---------------------------------------------------------------------------

def _subsets(items: Sequence) -> List[frozenset]:
    return [frozenset(x for x, bit in zip(items, bits) if bit) for bits in product((False, True), repeat=len(items))]


def all_models(agents: Sequence[str], atoms: Sequence[str] = ("p",), max_states: int = 3) -> Iterator[StateModel]:
    """Every model over states s0 .. s(n-1), 1 <= n <= max_states, in a fixed order"""
    for n in range(1, max_states + 1):
        states = tuple(f"s{i}" for i in range(n))
        relations = _subsets([(s, t) for s in states for t in states])
        extensions = _subsets(states)
        for rel in product(relations, repeat=len(agents)):
            for val in product(extensions, repeat=len(atoms)):
                yield StateModel(states, dict(zip(agents, rel)), dict(zip(atoms, val)))


def disjoint_union(models: Iterable[StateModel], prefix: str = "m") -> StateModel:
    """State s of the i-th model becomes {prefix}{i}.s; truth is preserved state by state"""
    states, rel, val = [], {}, {}
    for i, model in enumerate(models):
        rename = {s: f"{prefix}{i}.{s}" for s in model.states}
        states.extend(rename[s] for s in model.states)
        for agent, pairs in model.rel.items():
            rel.setdefault(agent, set()).update((rename[s], rename[t]) for s, t in pairs)
        for p, ext in model.val.items():
            val.setdefault(p, set()).update(rename[s] for s in ext)
    return StateModel(
        tuple(states),
        {a: frozenset(ps) for a, ps in rel.items()},
        {p: frozenset(ext) for p, ext in val.items()},
    )


def exhaustive_batches(agents: Sequence[str], atoms: Sequence[str] = ("p",), max_states: int = 3,
                       batch: int = 200) -> List[StateModel]:
    """all_models packed into disjoint unions of `batch` models each"""
    models = all_models(agents, atoms, max_states)
    batches = []
    while chunk := list(islice(models, batch)):
        batches.append(disjoint_union(chunk))
    log.debug("%d batch(es) of models up to %d states over %s", len(batches), max_states, list(agents))
    return batches


if __name__ == "__main__":
    print("🧪 Testing Generators...")
    c2 = gen_cn(2)
    print(f"   C_2: {c2}")
    assert len(c2.states) == 10
    assert set(c2.states) - c2.val["p"] == {"a_1", "a_5"}
    s, t = gen_private_pair({1}, {1: 1}, 1)
    assert t.rel["A"] - s.rel["A"] == {("a", "c1_1")}
    assert len(gen_decreasing(3).states) == 8
    print("✅ All tests passed!")
