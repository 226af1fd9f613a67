"""
DEL Toolkit - Axiom Corpus
Random instances of the axiom schemes, for soundness checks against the
model checker and validity checks against the decider.

Each scheme builds one instance from a numpy Generator and a signature.
Schemes marked `star` mention iteration and are out of reach of the
decider; everything else is star-free.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Sequence

import numpy as np

from canon import pre_of
from core import Signature
from generators import (
    choose, pub, random_basic, random_program, random_sentence,
    random_group, random_simple_action,
)
from syntax import (
    And, Atom, Basic, BOTTOM, Box, CBox, CRASH, DynBox, DynDiamond, Diamond,
    Implies, Not, SKIP, Seq, Star, TOP, Union, conj, iff, seq,
)

Builder = Callable[[np.random.Generator, Signature, Sequence[str], int], object]


@dataclass(frozen=True)
class AxiomScheme:
    name: str
    build: Builder
    star: bool = False

    def instances(self, rng: np.random.Generator, sig: Signature, count: int,
                  atoms: Sequence[str] = ("p", "q"), depth: int = 2) -> Iterator:
        for _ in range(count):
            yield self.build(rng, sig, atoms, depth)

    def __repr__(self) -> str:
        return f"AxiomScheme('{self.name}'{', star' if self.star else ''})"


def _sentence(rng, sig, atoms, depth):
    return random_sentence(rng, sig, atoms, depth)


def atomic_permanence(rng, sig, atoms, depth):
    action = random_basic(rng, sig, atoms, depth - 1)
    p = Atom(choose(rng, atoms))
    return iff(DynBox(action, p), Implies(action.args[action.index - 1], p))


def partial_functionality(rng, sig, atoms, depth):
    action = random_basic(rng, sig, atoms, depth - 1)
    chi = _sentence(rng, sig, atoms, depth - 1)
    return iff(
        DynBox(action, Not(chi)),
        Implies(action.args[action.index - 1], Not(DynBox(action, chi))),
    )


def action_knowledge(rng, sig, atoms, depth):
    action = random_basic(rng, sig, atoms, depth - 1)
    agent = choose(rng, sig.agents)
    phi = _sentence(rng, sig, atoms, depth - 1)
    known = conj(
        Box(agent, DynBox(Basic(t, sig.index_of(t), action.args), phi))
        for t in sig.successors(action.type_name, agent)
    )
    return iff(DynBox(action, Box(agent, phi)), Implies(action.args[action.index - 1], known))


def skip_axiom(rng, sig, atoms, depth):
    phi = _sentence(rng, sig, atoms, depth)
    return iff(DynBox(SKIP, phi), phi)


def crash_axiom(rng, sig, atoms, depth):
    return DynBox(CRASH, BOTTOM)


def composition(rng, sig, atoms, depth):
    first = random_program(rng, sig, atoms, 1)
    second = random_program(rng, sig, atoms, 1)
    phi = _sentence(rng, sig, atoms, depth - 1)
    return iff(DynBox(first, DynBox(second, phi)), DynBox(Seq(first, second), phi))


def choice(rng, sig, atoms, depth):
    left = random_program(rng, sig, atoms, 1)
    right = random_program(rng, sig, atoms, 1)
    phi = _sentence(rng, sig, atoms, depth - 1)
    return iff(DynBox(Union(left, right), phi), And(DynBox(left, phi), DynBox(right, phi)))


def epistemic_mix(rng, sig, atoms, depth):
    agents = random_group(rng, sig.agents)
    phi = _sentence(rng, sig, atoms, depth - 1)
    common = CBox(agents, phi)
    return Implies(common, And(phi, conj(Box(a, common) for a in sorted(agents))))


def action_mix(rng, sig, atoms, depth):
    body = random_program(rng, sig, atoms, 1)
    phi = _sentence(rng, sig, atoms, depth - 1)
    iterated = DynBox(Star(body), phi)
    return Implies(iterated, And(phi, DynBox(body, iterated)))


def _normality(pick):
    def build(rng, sig, atoms, depth):
        phi = _sentence(rng, sig, atoms, depth - 1)
        psi = _sentence(rng, sig, atoms, depth - 1)
        box = pick(rng, sig, atoms)
        return Implies(box(Implies(phi, psi)), Implies(box(phi), box(psi)))
    return build


def _program_box(rng, sig, atoms):
    program = random_program(rng, sig, atoms, 1)
    return lambda x: DynBox(program, x)


def _agent_box(rng, sig, atoms):
    agent = choose(rng, sig.agents)
    return lambda x: Box(agent, x)


def _group_box(rng, sig, atoms):
    agents = random_group(rng, sig.agents)
    return lambda x: CBox(agents, x)


program_normality = _normality(_program_box)
box_normality = _normality(_agent_box)
cbox_normality = _normality(_group_box)


def pre_law(rng, sig, atoms, depth):
    """<a>phi <-> pre(a) & [a]phi for simple a"""
    action = random_simple_action(rng, sig, atoms, int(rng.integers(1, 3)), max(depth - 2, 0))
    phi = _sentence(rng, sig, atoms, depth - 1)
    return iff(DynDiamond(action, phi), And(pre_of(action), DynBox(action, phi)))


def pre_monoid(rng, sig, atoms, depth):
    """skip is a unit, crash absorbs, and composition associates, as seen by preconditions"""
    a = random_simple_action(rng, sig, atoms, 1)
    b = random_simple_action(rng, sig, atoms, 1)
    c = random_simple_action(rng, sig, atoms, 1)
    law = int(rng.integers(5))
    if law == 0:
        return iff(pre_of(Seq(SKIP, a)), pre_of(a))
    if law == 1:
        return iff(pre_of(Seq(a, SKIP)), pre_of(a))
    if law == 2:
        return iff(pre_of(Seq(CRASH, a)), BOTTOM)
    if law == 3:
        return iff(pre_of(Seq(a, CRASH)), BOTTOM)
    return iff(pre_of(Seq(Seq(a, b), c)), pre_of(Seq(a, Seq(b, c))))


SCHEMES: Dict[str, AxiomScheme] = {
    s.name: s for s in [
        AxiomScheme("atomic_permanence", atomic_permanence),
        AxiomScheme("partial_functionality", partial_functionality),
        AxiomScheme("action_knowledge", action_knowledge),
        AxiomScheme("skip", skip_axiom),
        AxiomScheme("crash", crash_axiom),
        AxiomScheme("composition", composition),
        AxiomScheme("choice", choice),
        AxiomScheme("epistemic_mix", epistemic_mix),
        AxiomScheme("action_mix", action_mix, star=True),
        AxiomScheme("program_normality", program_normality),
        AxiomScheme("box_normality", box_normality),
        AxiomScheme("cbox_normality", cbox_normality),
        AxiomScheme("pre_law", pre_law),
        AxiomScheme("pre_monoid", pre_monoid),
    ]
}


def star_free_schemes() -> Dict[str, AxiomScheme]:
    return {name: s for name, s in SCHEMES.items() if not s.star}


# ---------------------------------------------------------------------------
# A satisfiable sentence without finite models
# ---------------------------------------------------------------------------

def no_fmp_body(agent: str = "A"):
    """M_A K_A false: some successor is a dead end"""
    return Diamond(agent, Box(agent, BOTTOM))


def no_fmp_announcement(agent: str = "A"):
    return pub(Diamond(agent, TOP))


def no_fmp_sentence(agent: str = "A"):
    """[(Pub(M_A true))*] M_A K_A false"""
    return DynBox(Star(no_fmp_announcement(agent)), no_fmp_body(agent))


def power_sentence(k: int, agent: str = "A"):
    """The k-th unfolding: k announcements of M_A true, then M_A K_A false"""
    if k < 0:
        raise ValueError(f"Power must be non-negative, got {k}")
    if k == 0:
        return DynBox(SKIP, no_fmp_body(agent))
    return DynBox(seq([no_fmp_announcement(agent)] * k), no_fmp_body(agent))
