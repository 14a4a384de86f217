"""Formula parsing, state-level evaluation and plan formulas.

Grammar (``!``, ``K[i]`` and ``C`` bind tightest, then ``&``, ``|``, and the
right-associative ``->``)::

    φ ::= true | false | IDENT | !φ | φ & φ | φ | φ | φ -> φ | K[IDENT] φ | C φ | (φ)

Identifiers are letters, digits and underscores, optionally joined by single
hyphens (``at-1``, ``try-take``). The parser is an operator-precedence parser
with explicit stacks, so nesting depth is unbounded.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Mapping, Sequence

from delplan.core import Action, DelError, Signature, State, truth_set
from delplan.formula import (
    BOT,
    TOP,
    And,
    Applied,
    Atom,
    Common,
    Formula,
    Implies,
    Knows,
    Not,
    Or,
)

__all__ = [
    "FormulaSyntaxError",
    "UnknownSymbolError",
    "UnknownActionError",
    "PlanMode",
    "parse_formula",
    "evaluate",
    "holds_at",
    "plan_formula",
    "IDENT_PATTERN",
]

IDENT_PATTERN = r"[A-Za-z0-9_]+(?:-(?!>)[A-Za-z0-9_]+)*"
KEYWORDS = frozenset({"true", "false", "C"})


class FormulaSyntaxError(DelError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownSymbolError(DelError, ValueError):
    def __init__(self, kind: str, name: str, position: int | None = None):
        where = "" if position is None else f" at position {position}"
        super().__init__(f"unknown {kind} {name!r}{where}")
        self.kind = kind
        self.name = name
        self.position = position


class UnknownActionError(DelError, LookupError):
    pass


class PlanMode(enum.Enum):
    STANDARD = "standard"
    IC = "ic"


_TOKEN = re.compile(
    rf"""
    (?P<ws>\s+)
  | (?P<knows>K\[\s*(?P<agent>{IDENT_PATTERN})\s*\])
  | (?P<arrow>->)
  | (?P<op>[!&|()])
  | (?P<ident>{IDENT_PATTERN})
    """,
    re.VERBOSE,
)

_BINARY = {"&": (3, And), "|": (2, Or), "->": (1, Implies)}


def _tokens(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup if m.lastgroup != "agent" else "knows"
        if m.group("knows") is not None:
            yield "knows", m.group("agent"), pos
        elif kind == "arrow":
            yield "op", "->", pos
        elif kind == "op":
            yield "op", m.group("op"), pos
        elif kind == "ident":
            yield "ident", m.group("ident"), pos
        pos = m.end()
    yield "end", None, len(text)


def parse_formula(text: str, sig: Signature | None = None) -> Formula:
    """Parse ``text``; with a signature, unknown propositions and agents are errors."""
    operands: list[Formula] = []
    # operator stack entries: (kind, payload, position)
    ops: list[tuple[str, object, int]] = []
    expect_operand = True

    def reduce_top() -> None:
        kind, payload, _ = ops.pop()
        if kind == "not":
            operands.append(Not(operands.pop()))
        elif kind == "common":
            operands.append(Common(operands.pop()))
        elif kind == "knows":
            operands.append(Knows(payload, operands.pop()))
        else:
            right = operands.pop()
            left = operands.pop()
            operands.append(_BINARY[payload][1](left, right))

    for kind, value, pos in _tokens(text):
        if expect_operand:
            if kind == "ident":
                if value == "C":
                    ops.append(("common", None, pos))
                elif value == "true":
                    operands.append(TOP)
                    expect_operand = False
                elif value == "false":
                    operands.append(BOT)
                    expect_operand = False
                else:
                    if sig is not None and not sig.has_prop(value):
                        raise UnknownSymbolError("proposition", value, pos)
                    operands.append(Atom(value))
                    expect_operand = False
            elif kind == "knows":
                if sig is not None and value not in sig.agents:
                    raise UnknownSymbolError("agent", value, pos)
                ops.append(("knows", value, pos))
            elif value == "!":
                ops.append(("not", None, pos))
            elif value == "(":
                ops.append(("paren", None, pos))
            elif kind == "end":
                raise FormulaSyntaxError("unexpected end of formula", pos)
            else:
                raise FormulaSyntaxError(f"expected a formula, found {value!r}", pos)
            continue

        if kind == "op" and value in _BINARY:
            prec = _BINARY[value][0]
            right_assoc = value == "->"
            while ops and ops[-1][0] != "paren":
                top_kind, top_value, _ = ops[-1]
                if top_kind != "binary":
                    reduce_top()
                    continue
                top_prec = _BINARY[top_value][0]
                if top_prec > prec or (top_prec == prec and not right_assoc):
                    reduce_top()
                else:
                    break
            ops.append(("binary", value, pos))
            expect_operand = True
        elif value == ")":
            while ops and ops[-1][0] != "paren":
                reduce_top()
            if not ops:
                raise FormulaSyntaxError("unbalanced ')'", pos)
            ops.pop()
        elif kind == "end":
            while ops:
                if ops[-1][0] == "paren":
                    raise FormulaSyntaxError("unclosed '('", ops[-1][2])
                reduce_top()
        else:
            shown = value if value is not None else text[pos:pos + 10]
            raise FormulaSyntaxError(f"expected an operator, found {shown!r}", pos)
    assert len(operands) == 1
    return operands[0]


def evaluate(s: State, phi: Formula) -> bool:
    """A state satisfies φ when every designated world does."""
    return s.designated <= truth_set(s.model, phi)


def holds_at(s: State, world: int, phi: Formula) -> bool:
    return world in truth_set(s.model, phi)


def plan_formula(
    plan: Sequence[Action],
    goal: Formula,
    owner: Mapping[str, str] | None,
    mode: PlanMode,
) -> Formula:
    """The formula a state must satisfy for ``plan`` to be a plan in ``mode``.

    STANDARD: <<a1>> ... <<an>> goal.
    IC: K[owner(a1)] <<a1>> ... K[owner(an)] <<an>> goal.
    """
    phi = goal
    for action in reversed(list(plan)):
        phi = Applied(action, phi)
        if mode is PlanMode.IC:
            if owner is None or action.name not in owner:
                raise UnknownActionError(f"action {action.name!r} has no owner")
            phi = Knows(owner[action.name], phi)
    return phi
