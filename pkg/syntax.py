"""
DEL Toolkit - Abstract Syntax
Sentences and programs of the dynamic language, plus the extended terms
(first-class preconditions) used while rewriting.

Nodes are frozen dataclasses: structural equality and hashing come for free,
so sentences can key caches and live in sets.
"""

from dataclasses import dataclass, field
from typing import Any, FrozenSet, Iterable, Iterator, Set, Tuple, Union as TUnion

from core import StarNotAllowed


# ---------------------------------------------------------------------------
# Sentences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    arg: 'Sentence'


@dataclass(frozen=True)
class And:
    left: 'Sentence'
    right: 'Sentence'


@dataclass(frozen=True)
class Or:
    left: 'Sentence'
    right: 'Sentence'


@dataclass(frozen=True)
class Implies:
    left: 'Sentence'
    right: 'Sentence'


@dataclass(frozen=True)
class Box:
    agent: str
    arg: 'Sentence'


@dataclass(frozen=True)
class Diamond:
    agent: str
    arg: 'Sentence'


@dataclass(frozen=True)
class CBox:
    """Truth along every path labelled by the group, the empty path included"""
    agents: FrozenSet[str]
    arg: 'Sentence'


@dataclass(frozen=True)
class CDiamond:
    agents: FrozenSet[str]
    arg: 'Sentence'


@dataclass(frozen=True)
class DynBox:
    program: 'Program'
    arg: 'Sentence'


@dataclass(frozen=True)
class DynDiamond:
    program: 'Program'
    arg: 'Sentence'


@dataclass(frozen=True)
class Pre:
    """Precondition of a simple action; rewriting terms only"""
    action: 'Program'


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Crash:
    pass


@dataclass(frozen=True)
class Basic:
    """Action type number `index` (from 1) of the signature, with one sentence per type"""
    type_name: str
    index: int
    args: Tuple['Sentence', ...]


@dataclass(frozen=True)
class Seq:
    first: 'Program'
    second: 'Program'


@dataclass(frozen=True)
class Union:
    left: 'Program'
    right: 'Program'


@dataclass(frozen=True)
class Star:
    body: 'Program'


@dataclass(frozen=True, eq=False)
class ModelProgram:
    """
    A program model with a chosen designated set, used as a program.
    Only built internally, for preconditions of composed program models.
    """
    model: Any
    designated: FrozenSet[str] = field(default_factory=frozenset)


Sentence = TUnion[Top, Bottom, Atom, Not, And, Or, Implies, Box, Diamond,
                  CBox, CDiamond, DynBox, DynDiamond, Pre]
Program = TUnion[Skip, Crash, Basic, Seq, Union, Star, ModelProgram]

SENTENCE_TYPES = (Top, Bottom, Atom, Not, And, Or, Implies, Box, Diamond,
                  CBox, CDiamond, DynBox, DynDiamond, Pre)
PROGRAM_TYPES = (Skip, Crash, Basic, Seq, Union, Star, ModelProgram)

TOP = Top()
BOTTOM = Bottom()
SKIP = Skip()
CRASH = Crash()


def is_sentence(x) -> bool:
    return isinstance(x, SENTENCE_TYPES)


def is_program(x) -> bool:
    return isinstance(x, PROGRAM_TYPES)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def conj(items: Iterable[Sentence]) -> Sentence:
    """Right-nested conjunction; the empty conjunction is true"""
    items = list(items)
    if not items:
        return TOP
    result = items[-1]
    for s in reversed(items[:-1]):
        result = And(s, result)
    return result


def disj(items: Iterable[Sentence]) -> Sentence:
    items = list(items)
    if not items:
        return BOTTOM
    result = items[-1]
    for s in reversed(items[:-1]):
        result = Or(s, result)
    return result


def iff(a: Sentence, b: Sentence) -> Sentence:
    return And(Implies(a, b), Implies(b, a))


def seq(actions: Iterable[Program]) -> Program:
    """Left-nested composition of a nonempty sequence"""
    actions = list(actions)
    result = actions[0]
    for a in actions[1:]:
        result = Seq(result, a)
    return result


def group(agents: Iterable[str]) -> FrozenSet[str]:
    return frozenset(agents)


# ---------------------------------------------------------------------------
# Traversal
# ---------------------------------------------------------------------------

def children(x) -> Tuple:
    if isinstance(x, (Top, Bottom, Atom, Skip, Crash, ModelProgram)):
        return ()
    if isinstance(x, (Not, Box, Diamond, CBox, CDiamond)):
        return (x.arg,)
    if isinstance(x, (And, Or, Implies, Union)):
        return (x.left, x.right)
    if isinstance(x, (DynBox, DynDiamond)):
        return (x.program, x.arg)
    if isinstance(x, Pre):
        return (x.action,)
    if isinstance(x, Basic):
        return x.args
    if isinstance(x, Seq):
        return (x.first, x.second)
    if isinstance(x, Star):
        return (x.body,)
    raise TypeError(f"Not a syntax node: {x!r}")


def walk(x) -> Iterator:
    """Pre-order traversal over sentences and programs alike"""
    stack = [x]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def subsentences(x) -> Set[Sentence]:
    return {n for n in walk(x) if is_sentence(n)}


def atoms_of(x) -> FrozenSet[str]:
    return frozenset(n.name for n in walk(x) if isinstance(n, Atom))


def agents_of(x) -> FrozenSet[str]:
    found = set()
    for n in walk(x):
        if isinstance(n, (Box, Diamond)):
            found.add(n.agent)
        elif isinstance(n, (CBox, CDiamond)):
            found |= n.agents
    return frozenset(found)


def has_star(x) -> bool:
    return any(isinstance(n, Star) for n in walk(x))


def size(x) -> int:
    return sum(1 for _ in walk(x))


def modal_depth(x) -> int:
    if isinstance(x, (Box, Diamond, CBox, CDiamond)):
        return 1 + modal_depth(x.arg)
    return max((modal_depth(c) for c in children(x)), default=0)


def dynamic_depth(x) -> int:
    if isinstance(x, (DynBox, DynDiamond)):
        return 1 + max(dynamic_depth(x.program), dynamic_depth(x.arg))
    return max((dynamic_depth(c) for c in children(x)), default=0)


def is_simple(action) -> bool:
    """Composition tree over skip, crash and basic actions"""
    if isinstance(action, (Skip, Crash, Basic)):
        return True
    if isinstance(action, Seq):
        return is_simple(action.first) and is_simple(action.second)
    return False


def action_length(action) -> int:
    if isinstance(action, Seq):
        return action_length(action.first) + action_length(action.second)
    return 1


def basic_actions(action) -> Tuple[Basic, ...]:
    """Leaves of a composition, left to right"""
    if isinstance(action, Seq):
        return basic_actions(action.first) + basic_actions(action.second)
    return (action,)


# ---------------------------------------------------------------------------
# Desugaring
# ---------------------------------------------------------------------------

def desugar(s: Sentence) -> Sentence:
    """
    Remove skip, crash, choice and composition from every dynamic modality.

        [skip]phi      -> phi          <skip>phi      -> phi
        [crash]phi     -> true         <crash>phi     -> false
        [p + q]phi     -> [p]phi & [q]phi
        <p + q>phi     -> <p>phi | <q>phi
        [p ; q]phi     -> [p][q]phi    <p ; q>phi     -> <p><q>phi

    Iteration is refused.
    """
    if isinstance(s, (Top, Bottom, Atom, Pre)):
        return s
    if isinstance(s, Not):
        return Not(desugar(s.arg))
    if isinstance(s, (And, Or, Implies)):
        return type(s)(desugar(s.left), desugar(s.right))
    if isinstance(s, (Box, Diamond)):
        return type(s)(s.agent, desugar(s.arg))
    if isinstance(s, (CBox, CDiamond)):
        return type(s)(s.agents, desugar(s.arg))
    if isinstance(s, DynBox):
        return _desugar_box(s.program, desugar(s.arg))
    if isinstance(s, DynDiamond):
        return _desugar_diamond(s.program, desugar(s.arg))
    raise TypeError(f"Not a sentence: {s!r}")


def _desugar_basic(action: Basic) -> Basic:
    return Basic(action.type_name, action.index, tuple(desugar(a) for a in action.args))


def _desugar_box(program: Program, body: Sentence) -> Sentence:
    if isinstance(program, Skip):
        return body
    if isinstance(program, Crash):
        return TOP
    if isinstance(program, Union):
        return And(_desugar_box(program.left, body), _desugar_box(program.right, body))
    if isinstance(program, Seq):
        return _desugar_box(program.first, _desugar_box(program.second, body))
    if isinstance(program, Basic):
        return DynBox(_desugar_basic(program), body)
    if isinstance(program, ModelProgram):
        return DynBox(program, body)
    raise StarNotAllowed("Iteration cannot be desugared")


def _desugar_diamond(program: Program, body: Sentence) -> Sentence:
    if isinstance(program, Skip):
        return body
    if isinstance(program, Crash):
        return BOTTOM
    if isinstance(program, Union):
        return Or(_desugar_diamond(program.left, body), _desugar_diamond(program.right, body))
    if isinstance(program, Seq):
        return _desugar_diamond(program.first, _desugar_diamond(program.second, body))
    if isinstance(program, Basic):
        return DynDiamond(_desugar_basic(program), body)
    if isinstance(program, ModelProgram):
        return DynDiamond(program, body)
    raise StarNotAllowed("Iteration cannot be desugared")
