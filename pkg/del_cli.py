#!/usr/bin/env python3
"""
DEL Toolkit - Command Line Interface

Usage:
    del check --sig pub.json --model c2.json --state a_6 --formula "<Pub(p)> E_{A,B} q"
    del eval --sig pub.json --model c2.json --formula "K_A p" --xlsx table.xlsx
    del normalize --sig pub.json --formula "[Pub(p)]q" --trace
    del decide --sig pub.json --formula "p & ~p"
    del translate --sig pub.json --formula "[Pub(p)] C_{A,B} q"
    del bisim --model s.json --other t.json
    del gen cn 2 -o c2.json

Exit codes: 0 success or true, 1 false or UNSAT, 2 errors and unknown answers.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from core import DELError, EngineConfig, StateModel, load_json
from formula_parser import parse_sentence, parse_signature, render

log = logging.getLogger(__name__)

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


class UsageError(DELError):
    """Missing or inconsistent command-line arguments"""


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def _config(args) -> EngineConfig:
    return EngineConfig.load(args.config) if args.config else EngineConfig()


def _signature(args):
    if not args.sig:
        raise UsageError("--sig is required for this command")
    return parse_signature(load_json(args.sig))


def _model(path: str, agents=None) -> StateModel:
    return StateModel.from_dict(load_json(path), agents=agents)


def _formula(args, sig, text: Optional[str] = None):
    text = text if text is not None else args.formula
    if not text:
        raise UsageError("--formula is required for this command")
    return parse_sentence(text, sig)


def _write_json(data: Dict[str, Any], path: Optional[str]):
    text = json.dumps(data, indent=2)
    if path:
        with open(path, 'w') as f:
            f.write(text + "\n")
        print(f"✅ Written to {path}")
    else:
        print(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    """Truth of one sentence at one state"""
    from model_checker import ModelChecker

    sig = _signature(args)
    config = _config(args)
    model = _model(args.model, sig.agents)
    if not args.state:
        raise UsageError("--state is required for check")
    model.require(args.state)
    sentence = _formula(args, sig)
    result = ModelChecker(sig, config, star_fuel=args.unfold).truth_set(model, sentence)
    if not result.exact:
        print(f"⚠️ UNKNOWN: iteration did not converge within {args.unfold or config.star_fuel} unfoldings")
        return EXIT_ERROR
    if args.state in result:
        print(f"✅ true at {args.state}")
        return EXIT_TRUE
    print(f"❌ false at {args.state}")
    return EXIT_FALSE


def cmd_eval(args) -> int:
    """Truth sets of one or more sentences"""
    from report_export import ReportExporter, truth_table

    sig = _signature(args)
    config = _config(args)
    model = _model(args.model, sig.agents)
    if not args.formula:
        raise UsageError("--formula is required for eval")
    sentences = [_formula(args, sig, text) for text in args.formula]
    table = truth_table(model, sentences, sig, config, fuel=args.unfold)
    unknown = set(table.attrs['unknown'])
    for name in table.columns:
        states = [s for s, v in table[name].items() if v]
        flag = " (UNKNOWN: not converged)" if name in unknown else ""
        print(f"{name}: {{{', '.join(states)}}}{flag}")
    if args.xlsx:
        path = ReportExporter().export(args.xlsx, model, table)
        print(f"✅ Report saved to {path}")
    return EXIT_ERROR if unknown else EXIT_TRUE


def cmd_normalize(args) -> int:
    from rewrite_engine import RewriteEngine

    sig = _signature(args)
    engine = RewriteEngine(sig, _config(args))
    trace: Optional[List] = [] if args.trace else None
    normal = engine.normalize(_formula(args, sig), trace)
    if trace is not None:
        for i, step in enumerate(trace, 1):
            print(f"{i:4d}  {step.describe()}")
    print(render(normal))
    return EXIT_TRUE


def cmd_decide(args) -> int:
    """Satisfiability, or validity with --valid"""
    from decision_engine import DecisionEngine
    from bisim_engine import quotient

    sig = _signature(args)
    engine = DecisionEngine(sig, _config(args))
    sentence = _formula(args, sig)
    decision = engine.countermodel(sentence) if args.valid else engine.satisfiable(sentence)
    log.info("%r", decision)

    if args.valid:
        print("VALID" if not decision.satisfiable else "NOT VALID")
    else:
        print(decision.verdict.value)
    print(f"   Closure: {decision.closure_size} members, atoms: {decision.atom_count}, "
          f"survivors: {decision.survivor_count}")

    if decision.satisfiable:
        model, state = decision.model, decision.state
        if args.minimize:
            model, projection = quotient(model)
            state = projection[state]
        label = "Countermodel" if args.valid else "Witness"
        print(f"   {label}: {model} at {state}")
        if args.witness:
            _write_json({'state': state, 'model': model.to_dict()}, args.witness)

    found = decision.satisfiable
    if args.valid:
        return EXIT_FALSE if found else EXIT_TRUE
    return EXIT_TRUE if found else EXIT_FALSE


def cmd_translate(args) -> int:
    from pdl_engine import render_pdl, translate

    sig = _signature(args)
    print(render_pdl(translate(_formula(args, sig), sig, _config(args))))
    return EXIT_TRUE


def cmd_bisim(args) -> int:
    from bisim_engine import bisimilar, largest_bisimulation, totally_bisimilar

    agents = _signature(args).agents if args.sig else None
    left = _model(args.model, agents)
    right = _model(args.other, agents) if args.other else left
    if args.state or args.other_state:
        if not (args.state and args.other_state):
            raise UsageError("--state and --other-state go together")
        same = bisimilar(left, args.state, right, args.other_state)
        print(f"{'✅' if same else '❌'} {args.state} and {args.other_state} are "
              f"{'' if same else 'not '}bisimilar")
        return EXIT_TRUE if same else EXIT_FALSE

    link = largest_bisimulation(left, right)
    order_l, order_r = left.index, right.index
    for s, t in sorted(link, key=lambda p: (order_l[p[0]], order_r[p[1]])):
        print(f"   {s} ~ {t}")
    total = totally_bisimilar(left, right)
    print(f"{'✅' if total else '⚠️'} {len(link)} pair(s); total: {'yes' if total else 'no'}")
    return EXIT_TRUE if total else EXIT_FALSE


def cmd_gen(args) -> int:
    import generators

    if args.family == 'cn':
        _write_json(generators.gen_cn(args.n).to_dict(), args.output)
    elif args.family == 'private':
        f = {}
        for item in args.f:
            key, _, value = item.partition(':')
            try:
                f[int(key)] = int(value)
            except ValueError:
                raise UsageError(f"--f entries look like i:f(i), got '{item}'")
        s_model, t_model = generators.gen_private_pair(args.J, f, args.j)
        _write_json({'S': s_model.to_dict(), 'T': t_model.to_dict()}, args.output)
    elif args.family == 'decreasing':
        _write_json(generators.gen_decreasing(args.depth).to_dict(), args.output)
    elif args.family == 'sig':
        if args.kind == 'pub':
            sig = generators.pub_signature(args.agents)
        else:
            sig = generators.pri_signature(args.agents[0], args.agents[1:])
        _write_json(sig.to_dict(), args.output)
    return EXIT_TRUE


COMMANDS = {
    'check': cmd_check,
    'eval': cmd_eval,
    'normalize': cmd_normalize,
    'decide': cmd_decide,
    'translate': cmd_translate,
    'bisim': cmd_bisim,
    'gen': cmd_gen,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Engine configuration (JSON)')
    common.add_argument('-v', '--verbose', action='store_true', help='Debug logging')

    with_sig = argparse.ArgumentParser(add_help=False, parents=[common])
    with_sig.add_argument('--sig', help='Action signature (JSON)')

    parser = argparse.ArgumentParser(
        prog='del',
        description='DEL Toolkit - dynamic epistemic logic over action signatures',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Model checking
  del check --sig pub.json --model c2.json --state a_6 --formula "<Pub(p)> E_{A,B} q"

  # Normal form with the rewrite steps
  del normalize --sig pub.json --formula "[Pub(p)]q" --trace

  # Satisfiability with a witness model
  del decide --sig pub.json --formula "M_A p & [Pub(p)] K_A p" --witness w.json

  # Example models
  del gen cn 4 -o c4.json
  del gen private --J 1 2 --f 1:2 2:3 --j 1 -o pair.json
        """
    )
    sub = parser.add_subparsers(dest='command', help='Commands')

    p = sub.add_parser('check', parents=[with_sig], help='Truth of a sentence at a state')
    p.add_argument('--model', required=True, help='State model (JSON)')
    p.add_argument('--state', help='State id')
    p.add_argument('--formula', help='Sentence')
    p.add_argument('--unfold', type=int, help='Unfolding budget for iterated programs')

    p = sub.add_parser('eval', parents=[with_sig], help='Truth sets of sentences')
    p.add_argument('--model', required=True, help='State model (JSON)')
    p.add_argument('--formula', action='append', help='Sentence (repeatable)')
    p.add_argument('--unfold', type=int, help='Unfolding budget for iterated programs')
    p.add_argument('--xlsx', help='Write an Excel report')

    p = sub.add_parser('normalize', parents=[with_sig], help='Normal form of a star-free sentence')
    p.add_argument('--formula', help='Sentence')
    p.add_argument('--trace', action='store_true', help='Print every rewrite step')

    p = sub.add_parser('decide', parents=[with_sig], help='Satisfiability or validity')
    p.add_argument('--formula', help='Sentence')
    p.add_argument('--valid', action='store_true', help='Decide validity instead')
    p.add_argument('--witness', help='Write the witness (or countermodel) as JSON')
    p.add_argument('--minimize', action='store_true', help='Minimize the witness up to bisimulation')

    p = sub.add_parser('translate', parents=[with_sig], help='Equivalent PDL sentence')
    p.add_argument('--formula', help='Sentence')

    p = sub.add_parser('bisim', parents=[with_sig], help='Bisimulation between models')
    p.add_argument('--model', required=True, help='State model (JSON)')
    p.add_argument('--other', help='Second model (default: the first)')
    p.add_argument('--state', help='State of the first model')
    p.add_argument('--other-state', dest='other_state', help='State of the second model')

    p = sub.add_parser('gen', parents=[common], help='Example models and signatures')
    families = p.add_subparsers(dest='family', required=True)
    g = families.add_parser('cn', help='The cycle C_n')
    g.add_argument('n', type=int)
    g.add_argument('-o', '--output', help='Output JSON file')
    g = families.add_parser('private', help='The pair S_f, T_f,j')
    g.add_argument('--J', nargs='+', type=int, required=True)
    g.add_argument('--f', nargs='+', required=True, help='Chain lengths as i:f(i)')
    g.add_argument('--j', type=int, required=True)
    g.add_argument('-o', '--output', help='Output JSON file')
    g = families.add_parser('decreasing', help='Decreasing sequences up to a depth')
    g.add_argument('depth', type=int)
    g.add_argument('-o', '--output', help='Output JSON file')
    g = families.add_parser('sig', help='Announcement signatures')
    g.add_argument('kind', choices=['pub', 'pri'])
    g.add_argument('--agents', nargs='+', default=['A', 'B'])
    g.add_argument('-o', '--output', help='Output JSON file')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_TRUE

    if not args.command:
        parser.print_help()
        return EXIT_ERROR

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
    )
    try:
        return COMMANDS[args.command](args)
    except (DELError, OSError, json.JSONDecodeError) as e:
        print(f"❌ Error: {e}")
        log.debug("Command failed", exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
