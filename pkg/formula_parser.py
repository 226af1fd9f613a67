"""
DEL Toolkit - Formula Parser
Turns concrete syntax into sentence and program trees, and prints them back.

Notation:
1. Agent modalities: K_A phi (box), M_A phi (diamond)
2. Group closure: C_{A,B} phi (box), E_{A,B} phi (diamond)
3. Dynamic modalities: [prog] phi, <prog> phi
4. Programs: skip | crash | Name(s1, ..., sn) | p ; q | p + q | p*
5. Connectives, tightest first: ~ and modalities, &, |, -> (right), <->

The grammar lives in docs/GRAMMAR.md as EBNF; GRAMMAR below is its
executable form.
"""

import json
import logging
from typing import Any, Dict, List, Optional, Union as TUnion

from lark import Lark, Transformer, Token
from lark.exceptions import UnexpectedInput, VisitError

from core import ArityError, DELError, ParseError, Signature, SignatureError
from syntax import (
    And, Atom, Basic, Bottom, Box, CBox, CDiamond, Crash, Diamond, DynBox,
    DynDiamond, Implies, ModelProgram, Not, Or, Pre, Seq, Skip, Star, Top,
    Union, BOTTOM, CRASH, SKIP, TOP, iff,
)

log = logging.getLogger(__name__)

GRAMMAR = r"""
    ?sentence: imp_level
             | imp_level "<->" imp_level            -> iff

    ?imp_level: or_level
              | or_level "->" imp_level            -> implies

    ?or_level: and_level
             | or_level "|" and_level              -> or_

    ?and_level: unary
              | and_level "&" unary                -> and_

    ?unary: "~" unary                              -> not_
          | KBOX unary                             -> box
          | MDIA unary                             -> diamond
          | CBOX agent_list "}" unary              -> cbox
          | EDIA agent_list "}" unary              -> cdiamond
          | "[" program "]" unary                  -> dynbox
          | "<" program ">" unary                  -> dyndiamond
          | leaf

    ?leaf: "true"                                  -> top
         | "false"                                 -> bottom
         | "pre" "(" program ")"                   -> pre
         | NAME                                    -> atom
         | "(" sentence ")"

    agent_list: NAME ("," NAME)*

    ?program: seq_level
            | program "+" seq_level                -> union

    ?seq_level: postfix
              | seq_level ";" postfix              -> seq

    ?postfix: pterm
            | postfix "*"                          -> star

    ?pterm: "skip"                                 -> skip
          | "crash"                                -> crash
          | NAME "(" sentence ("," sentence)* ")"  -> basic
          | "(" program ")"

    KBOX.2: /K_[A-Za-z][A-Za-z0-9_]*/
    MDIA.2: /M_[A-Za-z][A-Za-z0-9_]*/
    CBOX.3: "C_{"
    EDIA.3: "E_{"
    NAME: /[A-Za-z][A-Za-z0-9_]*/

    %import common.WS
    %ignore WS
"""

_PARSER = Lark(GRAMMAR, start=['sentence', 'program'], parser='lalr')


class _TreeBuilder(Transformer):
    """Builds syntax nodes and checks names and arity against the signature"""

    def __init__(self, signature: Signature, extended: bool = False):
        super().__init__()
        self.signature = signature
        self.extended = extended

    def _agent(self, name: str) -> str:
        if not self.signature.has_agent(name):
            raise ParseError(f"Unknown agent '{name}'")
        return name

    def iff(self, items):
        return iff(items[0], items[1])

    def implies(self, items):
        return Implies(items[0], items[1])

    def or_(self, items):
        return Or(items[0], items[1])

    def and_(self, items):
        return And(items[0], items[1])

    def not_(self, items):
        return Not(items[0])

    def box(self, items):
        return Box(self._agent(items[0][2:]), items[1])

    def diamond(self, items):
        return Diamond(self._agent(items[0][2:]), items[1])

    def cbox(self, items):
        return CBox(items[1], items[2])

    def cdiamond(self, items):
        return CDiamond(items[1], items[2])

    def agent_list(self, items):
        return frozenset(self._agent(str(t)) for t in items)

    def dynbox(self, items):
        return DynBox(items[0], items[1])

    def dyndiamond(self, items):
        return DynDiamond(items[0], items[1])

    def top(self, items):
        return TOP

    def bottom(self, items):
        return BOTTOM

    def pre(self, items):
        if not self.extended:
            raise ParseError("pre(...) is only allowed in extended terms")
        return Pre(items[0])

    def atom(self, items):
        return Atom(str(items[0]))

    def union(self, items):
        return Union(items[0], items[1])

    def seq(self, items):
        return Seq(items[0], items[1])

    def star(self, items):
        return Star(items[0])

    def skip(self, items):
        return SKIP

    def crash(self, items):
        return CRASH

    def basic(self, items):
        name = str(items[0])
        args = tuple(items[1:])
        try:
            index = self.signature.index_of(name)
        except SignatureError:
            raise ParseError(f"Unknown action type '{name}'")
        if len(args) != self.signature.n:
            raise ArityError(
                f"Action '{name}' takes {self.signature.n} argument(s), got {len(args)}"
            )
        return Basic(name, index, args)


def _parse(text: str, signature: Signature, start: str, extended: bool):
    try:
        tree = _PARSER.parse(text, start=start)
    except UnexpectedInput as e:
        context = e.get_context(text).strip().replace('\n', ' ^ ') if e.line and e.line > 0 else 'end of input'
        raise ParseError(f"Syntax error near: {context}", e.line, e.column)
    try:
        return _TreeBuilder(signature, extended).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, DELError):
            raise e.orig_exc
        raise


def parse_sentence(text: str, signature: Signature, extended: bool = False):
    """
    Parse a sentence.

    Examples:
        'K_A p'                    -> Box('A', Atom('p'))
        '<Pub(p)> E_{A,B} q'       -> DynDiamond(Basic('Pub', 1, (p,)), CDiamond({A,B}, q))
    """
    return _parse(text, signature, 'sentence', extended)


def parse_program(text: str, signature: Signature, extended: bool = False):
    return _parse(text, signature, 'program', extended)


def parse_signature(source: TUnion[str, Dict[str, Any]]) -> Signature:
    """Signature from JSON text or an already decoded dict"""
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as e:
            raise SignatureError(f"Signature is not valid JSON: {e}")
    if not isinstance(source, dict):
        raise SignatureError("Signature JSON must be an object")
    return Signature.from_dict(source)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_IMP, _OR, _AND, _UNARY, _LEAF = 1, 2, 3, 4, 5
_CHOICE, _SEQ, _STAR, _TERM = 1, 2, 3, 4


def _sentence_level(s) -> int:
    if isinstance(s, Implies):
        return _IMP
    if isinstance(s, Or):
        return _OR
    if isinstance(s, And):
        return _AND
    if isinstance(s, (Not, Box, Diamond, CBox, CDiamond, DynBox, DynDiamond)):
        return _UNARY
    return _LEAF


def _program_level(p) -> int:
    if isinstance(p, Union):
        return _CHOICE
    if isinstance(p, Seq):
        return _SEQ
    if isinstance(p, Star):
        return _STAR
    return _TERM


def _group(agents) -> str:
    return ",".join(sorted(agents))


class _Printer:
    def __init__(self, full: bool):
        self.full = full

    def sentence(self, s, minimum: int = 0) -> str:
        level = _sentence_level(s)
        text = self._sentence_body(s)
        if level < minimum or (self.full and minimum > 0 and level < _LEAF):
            return f"({text})"
        return text

    def program(self, p, minimum: int = 0) -> str:
        level = _program_level(p)
        text = self._program_body(p)
        if level < minimum or (self.full and minimum > 0 and level < _TERM):
            return f"({text})"
        return text

    def _sentence_body(self, s) -> str:
        if isinstance(s, Top):
            return "true"
        if isinstance(s, Bottom):
            return "false"
        if isinstance(s, Atom):
            return s.name
        if isinstance(s, Not):
            return "~" + self.sentence(s.arg, _UNARY)
        if isinstance(s, Box):
            return f"K_{s.agent} " + self.sentence(s.arg, _UNARY)
        if isinstance(s, Diamond):
            return f"M_{s.agent} " + self.sentence(s.arg, _UNARY)
        if isinstance(s, CBox):
            return f"C_{{{_group(s.agents)}}} " + self.sentence(s.arg, _UNARY)
        if isinstance(s, CDiamond):
            return f"E_{{{_group(s.agents)}}} " + self.sentence(s.arg, _UNARY)
        if isinstance(s, DynBox):
            return f"[{self.program(s.program)}] " + self.sentence(s.arg, _UNARY)
        if isinstance(s, DynDiamond):
            return f"<{self.program(s.program)}> " + self.sentence(s.arg, _UNARY)
        if isinstance(s, Pre):
            return f"pre({self.program(s.action)})"
        if isinstance(s, And):
            return self.sentence(s.left, _AND) + " & " + self.sentence(s.right, _UNARY)
        if isinstance(s, Or):
            return self.sentence(s.left, _OR) + " | " + self.sentence(s.right, _AND)
        if isinstance(s, Implies):
            return self.sentence(s.left, _OR) + " -> " + self.sentence(s.right, _IMP)
        raise TypeError(f"Cannot render {s!r}")

    def _program_body(self, p) -> str:
        if isinstance(p, Skip):
            return "skip"
        if isinstance(p, Crash):
            return "crash"
        if isinstance(p, Basic):
            return f"{p.type_name}(" + ", ".join(self.sentence(a) for a in p.args) + ")"
        if isinstance(p, Seq):
            return self.program(p.first, _SEQ) + " ; " + self.program(p.second, _STAR)
        if isinstance(p, Union):
            return self.program(p.left, _CHOICE) + " + " + self.program(p.right, _SEQ)
        if isinstance(p, Star):
            return self.program(p.body, _STAR) + "*"
        if isinstance(p, ModelProgram):
            return f"({p.model.name}, {{{','.join(sorted(p.designated))}}})"
        raise TypeError(f"Cannot render {p!r}")


_PLAIN = _Printer(full=False)
_FULL = _Printer(full=True)


def render(x, full: bool = False) -> str:
    """
    Concrete syntax for a sentence or a program.
    full=True parenthesizes every compound subterm.
    """
    printer = _FULL if full else _PLAIN
    if isinstance(x, (Skip, Crash, Basic, Seq, Union, Star, ModelProgram)):
        return printer.program(x)
    return printer.sentence(x)


if __name__ == "__main__":
    from generators import pub_signature

    print("🧪 Testing Formula Parser...")
    sig = pub_signature()
    for text in ["K_A p", "<Pub(p)> E_{A,B} q", "[Pub(p) + skip ; crash] ~q -> p", "[Pub(p)*] M_B true"]:
        tree = parse_sentence(text, sig)
        print(f"   {text!r:40} -> {render(tree)!r}")
        assert parse_sentence(render(tree), sig) == tree
    print("✅ All tests passed!")
