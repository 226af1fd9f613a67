"""
DEL Toolkit - Rewrite Engine
Normal forms for the star-free language, computed by a terminating
rewrite system over terms with first-class preconditions.

Rules (x, y, z range over terms; a over simple actions):
    r1  x -> y              ~(x & ~y)
    r2  pre(s_i(y1..yn))    y_i
    r3  pre(x ; y)          pre(x) & [x]pre(y)
    r4  [x]p                pre(x) -> p           (p an atom or true)
    r5  [x]~y               pre(x) -> ~[x]y
    r6  [x](y & z)          [x]y & [x]z
    r7  [a]K_A x            pre(a) -> AND{ K_A [b]x : a -A-> b }
    r8  [x][y]z             [x ; y]z
    r9  x ; (y ; z)         (x ; y) ; z

Strategy: leftmost-outermost, with r9 applied to an action before any rule
looks at the modality that carries it. Normal compositions nest to the left.

Each rule makes a numeric interpretation of terms strictly smaller; the
interpretation is exposed as `measure` and checked on request.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterator, List, Optional, Set, Tuple

from canon import oracle_for
from core import (
    DEFAULT_CONFIG, DELError, EngineConfig, FuelExhausted, GuardError, NotSimpleAction, Signature,
    StarNotAllowed,
)
from formula_parser import render
from syntax import (
    And, Atom, Basic, Bottom, Box, CBox, CDiamond, Diamond, DynBox, DynDiamond,
    Crash, Implies, ModelProgram, Not, Or, Pre, Seq, Skip, Star, Top, TOP, Union, conj,
    desugar, walk,
)

log = logging.getLogger(__name__)


class MeasureViolation(DELError):
    """A rewrite step failed to decrease the interpretation"""


# ---------------------------------------------------------------------------
# Interpretation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Measure:
    """Natural number interpretation of a term; None once past the bit cap"""
    value: Optional[int]

    @property
    def overflow(self) -> bool:
        return self.value is None

    def exceeds(self, other: 'Measure') -> Optional[bool]:
        """self > other, or None when either side overflowed"""
        if self.overflow or other.overflow:
            return None
        return self.value > other.value

    def __str__(self) -> str:
        return "overflow" if self.overflow else str(self.value)


def _capped(value: Optional[int], cap: int) -> Optional[int]:
    if value is None or value.bit_length() > cap:
        return None
    return value


def _power(base: Optional[int], exponent: Optional[int], cap: int) -> Optional[int]:
    if base is None or exponent is None:
        return None
    if base <= 1:
        return base
    if exponent * math.log2(base) > cap:
        return None
    return base ** exponent


def _interpret(t, cap: int) -> Optional[int]:
    if isinstance(t, (Top, Atom)):
        return 3
    if isinstance(t, Not):
        a = _interpret(t.arg, cap)
        return None if a is None else _capped(a + 1, cap)
    if isinstance(t, And):
        a, b = _interpret(t.left, cap), _interpret(t.right, cap)
        return None if a is None or b is None else _capped(a + b, cap)
    if isinstance(t, Implies):
        a, b = _interpret(t.left, cap), _interpret(t.right, cap)
        return None if a is None or b is None else _capped(a + b + 3, cap)
    if isinstance(t, Box):
        a = _interpret(t.arg, cap)
        return None if a is None else _capped(a + 2, cap)
    if isinstance(t, CBox):
        a = _interpret(t.arg, cap)
        return None if a is None else _capped(a + 1, cap)
    if isinstance(t, DynBox):
        return _power(_interpret(t.program, cap), _interpret(t.arg, cap), cap)
    if isinstance(t, Pre):
        return _interpret(t.action, cap)
    if isinstance(t, Basic):
        values = [_interpret(a, cap) for a in t.args]
        return None if None in values else _capped(sum(values) + 1, cap)
    if isinstance(t, Seq):
        a, b = _interpret(t.first, cap), _interpret(t.second, cap)
        return None if b is None else _power(a, b + 1, cap)
    if isinstance(t, (Bottom, Or, Diamond, CDiamond, DynDiamond)):
        return _interpret(expand_abbreviations(t), cap)
    if isinstance(t, (Skip, Crash, Union, Star, ModelProgram)):
        require_simple_actions(t)
    raise TypeError(f"No interpretation for {t!r}")


def measure(t, bit_cap: int = DEFAULT_CONFIG.measure_bit_cap) -> Measure:
    """
    Examples:
        p           -> 3
        ~p          -> 4
        [Pub(p)]q   -> 4 ** 3 = 64
    """
    return Measure(_interpret(t, bit_cap))


# ---------------------------------------------------------------------------
# Term shapes
# ---------------------------------------------------------------------------

def expand_abbreviations(t):
    """Rewrite false, |, M_A, E_C and <a> into the core connectives"""
    if isinstance(t, (Top, Atom)):
        return t
    if isinstance(t, Bottom):
        return Not(TOP)
    if isinstance(t, Not):
        return Not(expand_abbreviations(t.arg))
    if isinstance(t, And):
        return And(expand_abbreviations(t.left), expand_abbreviations(t.right))
    if isinstance(t, Implies):
        return Implies(expand_abbreviations(t.left), expand_abbreviations(t.right))
    if isinstance(t, Or):
        return Not(And(Not(expand_abbreviations(t.left)), Not(expand_abbreviations(t.right))))
    if isinstance(t, Box):
        return Box(t.agent, expand_abbreviations(t.arg))
    if isinstance(t, Diamond):
        return Not(Box(t.agent, Not(expand_abbreviations(t.arg))))
    if isinstance(t, CBox):
        return CBox(t.agents, expand_abbreviations(t.arg))
    if isinstance(t, CDiamond):
        return Not(CBox(t.agents, Not(expand_abbreviations(t.arg))))
    if isinstance(t, DynBox):
        return DynBox(expand_abbreviations(t.program), expand_abbreviations(t.arg))
    if isinstance(t, DynDiamond):
        return Not(DynBox(expand_abbreviations(t.program), Not(expand_abbreviations(t.arg))))
    if isinstance(t, Pre):
        return Pre(expand_abbreviations(t.action))
    if isinstance(t, Basic):
        return Basic(t.type_name, t.index, tuple(expand_abbreviations(a) for a in t.args))
    if isinstance(t, Seq):
        return Seq(expand_abbreviations(t.first), expand_abbreviations(t.second))
    return t


def require_simple_actions(t):
    """Refuse terms whose dynamic modalities carry more than compositions of basic actions"""
    for node in walk(t):
        if isinstance(node, Star):
            raise StarNotAllowed(f"Iteration cannot be rewritten: {render(node)}")
        if isinstance(node, (Skip, Crash, Union, ModelProgram)):
            raise NotSimpleAction(f"'{render(node)}' is not a composition of basic actions; desugar the sentence first")


def _normal_action(a) -> bool:
    if isinstance(a, Basic):
        return all(is_normal_form(x) for x in a.args)
    if isinstance(a, Seq):
        return isinstance(a.second, Basic) and _normal_action(a.first) and _normal_action(a.second)
    return False


def is_normal_form(t) -> bool:
    """
    Recognizer for the irreducible sentences:
    atoms and true, closed under ~, &, K_A and C_G, plus [a]C_G phi with a a
    left-nested composition of basic actions whose arguments are normal.
    """
    if isinstance(t, (Top, Atom)):
        return True
    if isinstance(t, Not):
        return is_normal_form(t.arg)
    if isinstance(t, And):
        return is_normal_form(t.left) and is_normal_form(t.right)
    if isinstance(t, (Box, CBox)):
        return is_normal_form(t.arg)
    if isinstance(t, DynBox):
        return isinstance(t.arg, CBox) and _normal_action(t.program) and is_normal_form(t.arg.arg)
    return False


# ---------------------------------------------------------------------------
# Rewriting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RewriteStep:
    rule: str
    term: object

    def describe(self) -> str:
        return f"{self.rule}: {render(self.term, full=False)}"


@dataclass(frozen=True)
class ClosureSet:
    """The finite set of normal forms the decider builds atoms over"""
    members: FrozenSet

    @cached_property
    def ordered(self) -> Tuple:
        return tuple(sorted(self.members, key=render))

    def __contains__(self, t) -> bool:
        return t in self.members

    def __iter__(self) -> Iterator:
        return iter(self.ordered)

    def __len__(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:
        return f"ClosureSet(members={len(self.members)})"


def _reassociate(action) -> Optional[object]:
    """One r9 step inside an action, leftmost-outermost; None if none applies"""
    if not isinstance(action, Seq):
        return None
    if isinstance(action.second, Seq):
        return Seq(Seq(action.first, action.second.first), action.second.second)
    inner = _reassociate(action.first)
    if inner is not None:
        return Seq(inner, action.second)
    inner = _reassociate(action.second)
    if inner is not None:
        return Seq(action.first, inner)
    return None


class RewriteEngine:
    """
    Rewriting for one signature (r7 consults its arrows).
    Normal forms are memoized per engine.
    """

    def __init__(self, signature: Signature, config: EngineConfig = DEFAULT_CONFIG):
        self.signature = signature
        self.config = config
        self.oracle = oracle_for(signature)
        self._normal: Dict[object, object] = {}

    # -- single steps -----------------------------------------------------

    def _root(self, t) -> Optional[Tuple[object, str]]:
        if isinstance(t, Implies):
            return Not(And(t.left, Not(t.right))), 'r1'
        if isinstance(t, Pre):
            a = t.action
            if isinstance(a, Basic):
                return a.args[a.index - 1], 'r2'
            if isinstance(a, Seq):
                return And(Pre(a.first), DynBox(a.first, Pre(a.second))), 'r3'
            return None
        if isinstance(t, Seq):
            new = _reassociate(t)
            return (new, 'r9') if new is not None else None
        if not isinstance(t, DynBox):
            return None
        x, body = t.program, t.arg
        if isinstance(body, (Atom, Top)):
            return Implies(Pre(x), body), 'r4'
        if isinstance(body, Not):
            return Implies(Pre(x), Not(DynBox(x, body.arg))), 'r5'
        if isinstance(body, And):
            return And(DynBox(x, body.left), DynBox(x, body.right)), 'r6'
        if isinstance(body, Box):
            if isinstance(x, ModelProgram):
                raise NotSimpleAction("Program models cannot be rewritten")
            succ = self.oracle.successors(x, body.agent)
            return Implies(Pre(x), conj(Box(body.agent, DynBox(b, body.arg)) for b in succ)), 'r7'
        if isinstance(body, DynBox):
            return DynBox(Seq(x, body.program), body.arg), 'r8'
        return None

    def _step(self, t) -> Optional[Tuple[object, str]]:
        if isinstance(t, DynBox):
            new = _reassociate(t.program)
            if new is not None:
                return DynBox(new, t.arg), 'r9'
        elif isinstance(t, Pre):
            new = _reassociate(t.action)
            if new is not None:
                return Pre(new), 'r9'

        found = self._root(t)
        if found is not None:
            return found

        if isinstance(t, Not):
            inner = self._step(t.arg)
            return (Not(inner[0]), inner[1]) if inner else None
        if isinstance(t, (And, Implies)):
            inner = self._step(t.left)
            if inner:
                return type(t)(inner[0], t.right), inner[1]
            inner = self._step(t.right)
            return (type(t)(t.left, inner[0]), inner[1]) if inner else None
        if isinstance(t, Box):
            inner = self._step(t.arg)
            return (Box(t.agent, inner[0]), inner[1]) if inner else None
        if isinstance(t, CBox):
            inner = self._step(t.arg)
            return (CBox(t.agents, inner[0]), inner[1]) if inner else None
        if isinstance(t, DynBox):
            inner = self._step(t.program)
            if inner:
                return DynBox(inner[0], t.arg), inner[1]
            inner = self._step(t.arg)
            return (DynBox(t.program, inner[0]), inner[1]) if inner else None
        if isinstance(t, Pre):
            inner = self._step(t.action)
            return (Pre(inner[0]), inner[1]) if inner else None
        if isinstance(t, Basic):
            for i, arg in enumerate(t.args):
                inner = self._step(arg)
                if inner:
                    args = t.args[:i] + (inner[0],) + t.args[i + 1:]
                    return Basic(t.type_name, t.index, args), inner[1]
            return None
        if isinstance(t, Seq):
            inner = self._step(t.first)
            if inner:
                return Seq(inner[0], t.second), inner[1]
            inner = self._step(t.second)
            return (Seq(t.first, inner[0]), inner[1]) if inner else None
        return None

    def step(self, t, verify: bool = True) -> Optional[RewriteStep]:
        """One leftmost-outermost step, or None on a normal term"""
        found = self._step(t)
        if found is None:
            return None
        new, rule = found
        if verify:
            self._verify(t, new, rule)
        return RewriteStep(rule, new)

    def _verify(self, before, after, rule: str):
        cap = self.config.measure_bit_cap
        verdict = measure(before, cap).exceeds(measure(after, cap))
        if verdict is None:
            log.debug("Skipping measure check for %s: interpretation above %d bits", rule, cap)
        elif not verdict:
            raise MeasureViolation(f"Rule {rule} did not decrease the measure on {render(before)}")

    # -- normal forms -----------------------------------------------------

    def normal_form(self, t, trace: Optional[List[RewriteStep]] = None):
        """Rewrite a term (abbreviations allowed) until no rule applies"""
        if trace is None and t in self._normal:
            return self._normal[t]
        current = expand_abbreviations(t)
        require_simple_actions(current)
        fuel = self.config.normalize_fuel
        steps = 0
        while True:
            found = self.step(current, verify=self.config.verify_measure)
            if found is None:
                break
            steps += 1
            if steps > fuel:
                raise FuelExhausted(f"Normalization exceeded {fuel} steps on {render(t)}")
            if trace is not None:
                trace.append(found)
            current = found.term
        self._normal[t] = current
        return current

    def normalize(self, sentence, trace: Optional[List[RewriteStep]] = None):
        """Normal form of a star-free sentence; the result is equivalent to it"""
        if any(isinstance(n, (ModelProgram, Pre)) for n in walk(sentence)):
            raise NotSimpleAction("Only sentences of the star-free language can be normalized")
        return self.normal_form(desugar(sentence), trace)

    # -- closure ----------------------------------------------------------

    def closure(self, sentence) -> ClosureSet:
        """
        The finite set the decider works over. Closed under subsentences;
        contains K_A C_G phi for every C_G phi and agent A in G; and for
        every [a]C_G phi and b reachable from a by G, the members
        K_A [b]C_G phi, [b]C_G phi, nf(pre(b)) and nf([b]phi).
        """
        if not is_normal_form(sentence):
            raise DELError(f"Closure needs a normal form, got {render(sentence)}")
        members: Set = set()
        self._close(sentence, members, set())
        log.debug("Closure of %s has %d members", render(sentence), len(members))
        return ClosureSet(frozenset(members))

    def _add(self, t, members: Set):
        members.add(t)
        if len(members) > self.config.closure_cap:
            raise GuardError(f"Closure exceeds {self.config.closure_cap} members")

    def _close(self, t, members: Set, done: Set):
        if t in done:
            return
        done.add(t)
        self._add(t, members)
        if isinstance(t, (Not, Box)):
            self._close(t.arg, members, done)
        elif isinstance(t, And):
            self._close(t.left, members, done)
            self._close(t.right, members, done)
        elif isinstance(t, CBox):
            self._close(t.arg, members, done)
            for agent in sorted(t.agents):
                self._close(Box(agent, t), members, done)
        elif isinstance(t, DynBox):
            group = t.arg
            self._close(group, members, done)
            for b in self.oracle.reachable(t.program, group.agents):
                for leaf in _leaves(b):
                    for arg in leaf.args:
                        self._close(arg, members, done)
                self._close(self.normal_form(Pre(b)), members, done)
                self._close(self.normal_form(DynBox(b, group.arg)), members, done)
                carried = DynBox(b, group)
                self._add(carried, members)
                for agent in sorted(group.agents):
                    self._add(Box(agent, carried), members)


def _leaves(action) -> Tuple[Basic, ...]:
    if isinstance(action, Seq):
        return _leaves(action.first) + _leaves(action.second)
    return (action,)


# ---------------------------------------------------------------------------
# Module-level conveniences
# ---------------------------------------------------------------------------

def rewrite_step(t, signature: Signature, config: EngineConfig = DEFAULT_CONFIG):
    """
    One step with the measure check; None when t is normal.
    A term written with abbreviations first steps to its expansion.
    """
    core = expand_abbreviations(t)
    require_simple_actions(core)
    found = RewriteEngine(signature, config).step(core, verify=True)
    if found is None:
        return None if core == t else core
    return found.term


def normalize(sentence, signature: Signature, config: EngineConfig = DEFAULT_CONFIG,
              trace: Optional[List[RewriteStep]] = None):
    return RewriteEngine(signature, config).normalize(sentence, trace)


def closure(sentence, signature: Signature, config: EngineConfig = DEFAULT_CONFIG) -> ClosureSet:
    return RewriteEngine(signature, config).closure(sentence)
