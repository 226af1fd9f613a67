"""
DEL Toolkit - Core Data Structures
Signatures, state models, program models, updates and engine settings.

Everything here is immutable after construction. Sentences stored inside
program models are opaque to this module; evaluation lives in the model
checker.
"""

import json
import logging
import math
from dataclasses import dataclass, field, asdict, fields
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

log = logging.getLogger(__name__)

Pair = Tuple[str, str]
Relation = FrozenSet[Pair]


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class DELError(ValueError):
    """Base class for every error raised by the toolkit"""


class ParseError(DELError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None and line > 0:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class SignatureError(DELError):
    pass


class ArityError(DELError):
    pass


class ModelError(DELError):
    pass


class UnknownStateError(ModelError):
    pass


class StarNotAllowed(DELError):
    """Iteration found where only star-free programs are accepted"""


class NotSimpleAction(DELError):
    pass


class GuardError(DELError):
    """A configured size or fuel guard refused the input"""


class FuelExhausted(GuardError):
    pass


class DecisionError(DELError):
    """The decider produced a witness that does not satisfy its input"""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass
class EngineConfig:
    """
    Limits shared by the engines.
    Loaded from JSON with the same keys; unknown keys are rejected.

    The decider checks atom_cap and edge_cell_cap (atoms squared) separately,
    so with the defaults it stops at 2**13 atoms, not 2**20. `atom_limit`
    gives the bound that actually applies.
    """
    normalize_fuel: int = 1_000_000
    measure_bit_cap: int = 2 ** 20
    closure_cap: int = 64
    atom_cap: int = 2 ** 20
    edge_cell_cap: int = 2 ** 26
    star_fuel: int = 8
    verify_measure: bool = False
    check_witness: bool = True

    @property
    def atom_limit(self) -> int:
        return min(self.atom_cap, math.isqrt(self.edge_cell_cap))

    def validate(self) -> List[str]:
        errors = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type in ('int', int) and (not isinstance(value, int) or value < 0):
                errors.append(f"{f.name} must be a non-negative integer, got {value!r}")
        return errors

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EngineConfig':
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DELError(f"Unknown configuration keys: {sorted(unknown)}")
        config = cls(**data)
        errors = config.validate()
        if errors:
            raise DELError("; ".join(errors))
        return config

    @classmethod
    def load(cls, path: str) -> 'EngineConfig':
        with open(path, 'r') as f:
            return cls.from_dict(json.load(f))


DEFAULT_CONFIG = EngineConfig()


def _freeze_relation(pairs: Iterable) -> Relation:
    return frozenset((str(a), str(b)) for a, b in pairs)


# ---------------------------------------------------------------------------
# Action signatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Signature:
    """
    A finite frame of action types with a fixed enumeration.
    Types are numbered from 1 in the order given.
    """
    name: str
    agents: Tuple[str, ...]
    types: Tuple[str, ...]
    arrows: Dict[str, Relation] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.types)

    @cached_property
    def _positions(self) -> Dict[str, int]:
        return {t: i + 1 for i, t in enumerate(self.types)}

    def index_of(self, type_name: str) -> int:
        try:
            return self._positions[type_name]
        except KeyError:
            raise SignatureError(f"Unknown action type '{type_name}' in signature '{self.name}'")

    def type_at(self, index: int) -> str:
        if not 1 <= index <= self.n:
            raise SignatureError(f"Type index {index} outside 1..{self.n}")
        return self.types[index - 1]

    def has_agent(self, agent: str) -> bool:
        return agent in self.agents

    def successors(self, type_name: str, agent: str) -> Tuple[str, ...]:
        """Types reachable by one agent arrow, in enumeration order"""
        targets = {b for a, b in self.arrows.get(agent, ()) if a == type_name}
        return tuple(t for t in self.types if t in targets)

    def validate(self) -> List[str]:
        errors = []
        if not self.types:
            errors.append("Signature needs at least one action type")
        if len(set(self.types)) != len(self.types):
            errors.append(f"Repeated action types: {list(self.types)}")
        if len(set(self.agents)) != len(self.agents):
            errors.append(f"Repeated agents: {list(self.agents)}")
        declared = set(self.types)
        for agent, pairs in self.arrows.items():
            if agent not in self.agents:
                errors.append(f"Arrow agent '{agent}' is not declared")
            for a, b in sorted(pairs):
                if a not in declared or b not in declared:
                    errors.append(f"Dangling arrow {a} -> {b} for agent '{agent}'")
        return errors

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'agents': list(self.agents),
            'types': list(self.types),
            'arrows': {a: [list(p) for p in sorted(self.arrows.get(a, ()))] for a in self.agents},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Signature':
        for key in ('name', 'agents', 'types', 'arrows'):
            if key not in data:
                raise SignatureError(f"Signature JSON is missing '{key}'")
        if not isinstance(data['arrows'], dict):
            raise SignatureError("'arrows' must map agents to lists of type pairs")
        try:
            arrows = {str(agent): _freeze_relation(pairs) for agent, pairs in data['arrows'].items()}
        except (TypeError, ValueError) as e:
            raise SignatureError(f"Malformed arrow list: {e}")
        agents = tuple(str(a) for a in data['agents'])
        for agent in agents:
            arrows.setdefault(agent, frozenset())
        sig = cls(
            name=str(data['name']),
            agents=agents,
            types=tuple(str(t) for t in data['types']),
            arrows=arrows,
        )
        errors = sig.validate()
        if errors:
            raise SignatureError("; ".join(errors))
        return sig

    def __repr__(self) -> str:
        return f"Signature(name='{self.name}', types={len(self.types)}, agents={len(self.agents)})"


# ---------------------------------------------------------------------------
# State models
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StateModel:
    """
    A finite Kripke model.
    Missing atoms are false everywhere; every agent has an entry in rel.
    """
    states: Tuple[str, ...]
    rel: Dict[str, Relation]
    val: Dict[str, FrozenSet[str]] = field(default_factory=dict)

    @property
    def agents(self) -> Tuple[str, ...]:
        return tuple(sorted(self.rel))

    @cached_property
    def index(self) -> Dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def _succ(self) -> Dict[str, Dict[str, Tuple[str, ...]]]:
        table: Dict[str, Dict[str, List[str]]] = {a: {} for a in self.rel}
        for agent, pairs in self.rel.items():
            for s, t in pairs:
                table[agent].setdefault(s, []).append(t)
        order = self.index
        return {
            a: {s: tuple(sorted(ts, key=order.__getitem__)) for s, ts in m.items()}
            for a, m in table.items()
        }

    @cached_property
    def _matrices(self) -> Dict[str, np.ndarray]:
        return {}

    def successors(self, state: str, agent: str) -> Tuple[str, ...]:
        return self._succ.get(agent, {}).get(state, ())

    def adjacency(self, agent: str) -> np.ndarray:
        """Boolean adjacency matrix for one agent, rows are sources"""
        cache = self._matrices
        if agent not in cache:
            m = np.zeros((len(self.states), len(self.states)), dtype=bool)
            idx = self.index
            for s, t in self.rel.get(agent, ()):
                m[idx[s], idx[t]] = True
            cache[agent] = m
        return cache[agent]

    def holds(self, atom: str, state: str) -> bool:
        return state in self.val.get(atom, ())

    def atoms_at(self, state: str) -> FrozenSet[str]:
        return frozenset(p for p, ext in self.val.items() if state in ext)

    def require(self, state: str):
        if state not in self.index:
            raise UnknownStateError(f"Unknown state '{state}'")

    def with_atoms(self, extra: Dict[str, Iterable[str]]) -> 'StateModel':
        val = dict(self.val)
        for p, ext in extra.items():
            val[p] = frozenset(ext)
        return StateModel(self.states, self.rel, val)

    def restrict(self, keep: Iterable[str]) -> 'StateModel':
        """Submodel on the given states"""
        kept = set(keep)
        return StateModel(
            states=tuple(s for s in self.states if s in kept),
            rel={a: frozenset((s, t) for s, t in ps if s in kept and t in kept) for a, ps in self.rel.items()},
            val={p: ext & kept for p, ext in self.val.items()},
        )

    def validate(self) -> List[str]:
        errors = []
        declared = set(self.states)
        if len(declared) != len(self.states):
            errors.append("Repeated state ids")
        for agent, pairs in self.rel.items():
            for s, t in sorted(pairs):
                if s not in declared or t not in declared:
                    errors.append(f"Edge {s} -> {t} of agent '{agent}' uses an undeclared state")
        for p, ext in self.val.items():
            missing = ext - declared
            if missing:
                errors.append(f"Atom '{p}' holds at undeclared states {sorted(missing)}")
        return errors

    def to_dict(self) -> Dict[str, Any]:
        order = self.index
        key = lambda pair: (order[pair[0]], order[pair[1]])
        return {
            'states': list(self.states),
            'agents': {a: [list(p) for p in sorted(self.rel[a], key=key)] for a in self.agents},
            'valuation': {p: sorted(self.val[p], key=order.__getitem__) for p in sorted(self.val)},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], agents: Optional[Iterable[str]] = None) -> 'StateModel':
        """
        Build from model JSON.
        When agents are given (from the signature) the model may omit agents
        without edges, but may not mention undeclared ones.
        """
        if 'states' not in data:
            raise ModelError("Model JSON is missing 'states'")
        rel = {str(a): _freeze_relation(ps) for a, ps in data.get('agents', {}).items()}
        if agents is not None:
            allowed = set(agents)
            extra = set(rel) - allowed
            if extra:
                raise ModelError(f"Model uses agents not in the signature: {sorted(extra)}")
            for a in allowed:
                rel.setdefault(a, frozenset())
        val = {str(p): frozenset(str(s) for s in ext) for p, ext in data.get('valuation', {}).items()}
        model = cls(tuple(str(s) for s in data['states']), rel, val)
        errors = model.validate()
        if errors:
            raise ModelError("; ".join(errors))
        return model

    def __len__(self) -> int:
        return len(self.states)

    def __repr__(self) -> str:
        edges = sum(len(p) for p in self.rel.values())
        return f"StateModel(states={len(self.states)}, agents={len(self.rel)}, edges={edges}, atoms={len(self.val)})"


def empty_model(agents: Iterable[str]) -> StateModel:
    return StateModel((), {a: frozenset() for a in agents}, {})


# ---------------------------------------------------------------------------
# Program models and updates
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProgramModel:
    """
    Action model with preconditions and a designated set.
    pre maps every carrier id to a sentence.
    """
    name: str
    carrier: Tuple[str, ...]
    rel: Dict[str, Relation]
    pre: Dict[str, Any]
    designated: FrozenSet[str]

    def successors(self, action: str, agent: str) -> Tuple[str, ...]:
        targets = {b for a, b in self.rel.get(agent, ()) if a == action}
        return tuple(x for x in self.carrier if x in targets)

    def with_designated(self, designated: Iterable[str]) -> 'ProgramModel':
        return ProgramModel(self.name, self.carrier, self.rel, self.pre, frozenset(designated))

    def validate(self) -> List[str]:
        errors = []
        declared = set(self.carrier)
        if len(declared) != len(self.carrier):
            errors.append(f"Program model '{self.name}' repeats carrier ids")
        missing = declared - set(self.pre)
        if missing:
            errors.append(f"No precondition for {sorted(missing)}")
        if not self.designated <= declared:
            errors.append(f"Designated actions {sorted(self.designated - declared)} are not in the carrier")
        for agent, pairs in self.rel.items():
            for a, b in sorted(pairs):
                if a not in declared or b not in declared:
                    errors.append(f"Arrow {a} -> {b} of agent '{agent}' leaves the carrier")
        return errors

    def __len__(self) -> int:
        return len(self.carrier)

    def __repr__(self) -> str:
        return f"ProgramModel(name='{self.name}', actions={len(self.carrier)}, designated={len(self.designated)})"


@dataclass(frozen=True, eq=False)
class UpdateResult:
    """
    The update induced on one model.
    pairing maps each target state to (source state, action id).
    """
    source: StateModel
    target: StateModel
    relation: Relation
    pairing: Dict[str, Pair]

    @cached_property
    def _images(self) -> Dict[str, Tuple[str, ...]]:
        table: Dict[str, List[str]] = {}
        for s, u in self.relation:
            table.setdefault(s, []).append(u)
        order = self.target.index
        return {s: tuple(sorted(us, key=order.__getitem__)) for s, us in table.items()}

    def images(self, state: str) -> Tuple[str, ...]:
        return self._images.get(state, ())

    def is_standard(self) -> bool:
        """The inverse of the relation is a partial function"""
        seen = set()
        for _, u in self.relation:
            if u in seen:
                return False
            seen.add(u)
        return True

    def __repr__(self) -> str:
        return f"UpdateResult(source={len(self.source)}, target={len(self.target)}, pairs={len(self.relation)})"


def load_json(path: str) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise DELError(f"Invalid JSON in {path}: {e}")
