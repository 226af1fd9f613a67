"""
DEL Toolkit - Update Engine
Builds program models and applies them to state models.

Operations:
1. update_product: restricted product of a state model with a program model
2. compose_program_models / union_program_models: sequencing and choice
3. signature_program: the program model of a basic action
4. program_model: any star-free program as a single program model
"""

import logging
from typing import Any, Callable, Dict, FrozenSet, Iterable, List

from core import (
    ArityError, ModelError, ProgramModel, Signature, StarNotAllowed,
    StateModel, UpdateResult,
)
from syntax import (
    Basic, Crash, DynDiamond, ModelProgram, Seq, Skip, Star, TOP, Union,
)

log = logging.getLogger(__name__)

Evaluator = Callable[[Any], Iterable[str]]


def pair_id(left: str, right: Any) -> str:
    return f"({left},{right})"


def update_product(model: StateModel, program: ProgramModel, evaluate: Evaluator) -> UpdateResult:
    """
    Pair old states with the actions whose preconditions they satisfy.

    evaluate(sentence) returns the states of `model` where the sentence holds.
    Arrows are componentwise; valuation is inherited from the old state.
    """
    alive: Dict[str, List[str]] = {s: [] for s in model.states}
    for action in program.carrier:
        ext = set(evaluate(program.pre[action]))
        for s in model.states:
            if s in ext:
                alive[s].append(action)

    states, pairing = [], {}
    for s in model.states:
        for action in alive[s]:
            u = pair_id(s, action)
            if u in pairing:
                raise ModelError(f"Target id collision on '{u}'")
            pairing[u] = (s, action)
            states.append(u)

    rel = {}
    for agent in model.agents:
        arrows = program.rel.get(agent, frozenset())
        edges = set()
        for s, t in model.rel[agent]:
            for a in alive[s]:
                for b in alive[t]:
                    if (a, b) in arrows:
                        edges.add((pair_id(s, a), pair_id(t, b)))
        rel[agent] = frozenset(edges)

    val = {
        p: frozenset(u for u in states if pairing[u][0] in ext)
        for p, ext in model.val.items()
    }
    relation = frozenset(
        (s, pair_id(s, a)) for s in model.states for a in alive[s] if a in program.designated
    )
    result = UpdateResult(model, StateModel(tuple(states), rel, val), relation, pairing)
    if not result.is_standard():
        raise ModelError(f"Update by '{program.name}' is not standard")
    return result


def signature_program(signature: Signature, index: int, args) -> ProgramModel:
    """The signature as a program model, preconditions from args, designated at type `index`"""
    args = tuple(args)
    if len(args) != signature.n:
        raise ArityError(f"Signature '{signature.name}' needs {signature.n} argument(s), got {len(args)}")
    designated = signature.type_at(index)
    return ProgramModel(
        name=f"{signature.name}:{designated}",
        carrier=signature.types,
        rel=dict(signature.arrows),
        pre=dict(zip(signature.types, args)),
        designated=frozenset({designated}),
    )


def skip_program_model(agents: Iterable[str]) -> ProgramModel:
    return ProgramModel(
        name="skip",
        carrier=("skip",),
        rel={a: frozenset({("skip", "skip")}) for a in agents},
        pre={"skip": TOP},
        designated=frozenset({"skip"}),
    )


def crash_program_model(agents: Iterable[str] = ()) -> ProgramModel:
    return ProgramModel("crash", (), {a: frozenset() for a in agents}, {}, frozenset())


def compose_program_models(first: ProgramModel, second: ProgramModel) -> ProgramModel:
    """
    Sequencing. The pair (s,d) is executable where s can run and afterwards
    d's precondition holds: pre = <(first, {s})> pre_second(d).
    """
    carrier = tuple(pair_id(s, d) for s in first.carrier for d in second.carrier)
    agents = set(first.rel) | set(second.rel)
    rel = {}
    for agent in sorted(agents):
        left = first.rel.get(agent, frozenset())
        right = second.rel.get(agent, frozenset())
        rel[agent] = frozenset(
            (pair_id(s, d), pair_id(s2, d2)) for s, s2 in left for d, d2 in right
        )
    pre = {
        pair_id(s, d): DynDiamond(ModelProgram(first, frozenset({s})), second.pre[d])
        for s in first.carrier for d in second.carrier
    }
    designated = frozenset(
        pair_id(s, d) for s in first.designated for d in second.designated
    )
    return ProgramModel(f"{first.name};{second.name}", carrier, rel, pre, designated)


def union_program_models(models: List[ProgramModel]) -> ProgramModel:
    """Disjoint union; element a of the i-th model (from 1) becomes (a,i)"""
    carrier, pre, designated = [], {}, set()
    rel: Dict[str, set] = {}
    for i, m in enumerate(models, start=1):
        for a in m.carrier:
            carrier.append(pair_id(a, i))
            pre[pair_id(a, i)] = m.pre[a]
        designated |= {pair_id(a, i) for a in m.designated}
        for agent, pairs in m.rel.items():
            rel.setdefault(agent, set()).update((pair_id(a, i), pair_id(b, i)) for a, b in pairs)
    name = "+".join(m.name for m in models) or "crash"
    return ProgramModel(name, tuple(carrier), {a: frozenset(p) for a, p in rel.items()}, pre, frozenset(designated))


def power_program_model(model: ProgramModel, k: int, agents: Iterable[str]) -> ProgramModel:
    """model composed with itself k times; the zeroth power is skip"""
    if k < 0:
        raise ValueError(f"Power must be non-negative, got {k}")
    result = skip_program_model(agents)
    for i in range(k):
        result = model if i == 0 else compose_program_models(result, model)
    return result


def program_model(program, signature: Signature) -> ProgramModel:
    """A star-free program as one program model"""
    if isinstance(program, Skip):
        return skip_program_model(signature.agents)
    if isinstance(program, Crash):
        return crash_program_model(signature.agents)
    if isinstance(program, Basic):
        return signature_program(signature, program.index, program.args)
    if isinstance(program, Seq):
        return compose_program_models(program_model(program.first, signature), program_model(program.second, signature))
    if isinstance(program, Union):
        return union_program_models([program_model(program.left, signature), program_model(program.right, signature)])
    if isinstance(program, ModelProgram):
        return program.model.with_designated(program.designated)
    if isinstance(program, Star):
        raise StarNotAllowed("Iteration has no finite program model; use bounded powers")
    raise TypeError(f"Not a program: {program!r}")


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def program_model_to_dict(model: ProgramModel) -> Dict[str, Any]:
    from formula_parser import render

    return {
        'states': list(model.carrier),
        'agents': {a: [list(p) for p in sorted(ps)] for a, ps in sorted(model.rel.items())},
        'pre': {a: render(model.pre[a]) for a in model.carrier},
        'designated': sorted(model.designated),
    }


def program_model_from_dict(data: Dict[str, Any], signature: Signature, name: str = "program") -> ProgramModel:
    from formula_parser import parse_sentence

    for key in ('states', 'pre', 'designated'):
        if key not in data:
            raise ModelError(f"Program-model JSON is missing '{key}'")
    carrier = tuple(str(s) for s in data['states'])
    rel = {a: frozenset((str(x), str(y)) for x, y in ps) for a, ps in data.get('agents', {}).items()}
    for agent in signature.agents:
        rel.setdefault(agent, frozenset())
    pre = {str(a): parse_sentence(text, signature) for a, text in data['pre'].items()}
    model = ProgramModel(name, carrier, rel, pre, frozenset(str(d) for d in data['designated']))
    errors = model.validate()
    if errors:
        raise ModelError("; ".join(errors))
    return model
