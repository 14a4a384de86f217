"""Formula trees for the epistemic language and its dynamic extension.

Nodes are hash-consed: constructing a node whose class and children match a
live node returns that same object, so equality is identity and hashing is
O(1). This keeps per-model truth caches cheap even for very deep formulas.
All traversals below use explicit stacks.
"""

from __future__ import annotations

import threading
import weakref
from typing import TYPE_CHECKING, Any, Callable, Iterator

if TYPE_CHECKING:
    from delplan.core import Action

__all__ = [
    "Formula",
    "Top",
    "Bot",
    "Atom",
    "Not",
    "And",
    "Or",
    "Implies",
    "Knows",
    "Common",
    "Box",
    "Diamond",
    "Applied",
    "TOP",
    "BOT",
    "conjunction",
    "disjunction",
    "iter_postorder",
    "atoms_of",
    "agents_of",
    "actions_of",
    "is_static",
    "normalize",
    "to_text",
]

_table: "weakref.WeakValueDictionary[tuple, Formula]" = weakref.WeakValueDictionary()
_lock = threading.Lock()


class Formula:
    """Base class; instances are immutable and interned."""

    __slots__ = ("__weakref__",)
    _fields: tuple[str, ...] = ()

    def __new__(cls, *args: Any) -> "Formula":
        if len(args) != len(cls._fields):
            raise TypeError(f"{cls.__name__} takes {len(cls._fields)} arguments, got {len(args)}")
        cls._check(args)
        key = (cls, *[a if isinstance(a, str) else id(a) for a in args])
        with _lock:
            node = _table.get(key)
            if node is None:
                node = object.__new__(cls)
                for name, value in zip(cls._fields, args):
                    object.__setattr__(node, name, value)
                _table[key] = node
        return node

    @classmethod
    def _check(cls, args: tuple) -> None:
        pass

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("formulas are immutable")

    def __reduce__(self):
        return (type(self), tuple(getattr(self, f) for f in self._fields))

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {to_text(self)}>"

    def __str__(self) -> str:
        return to_text(self)

    # Builder sugar: p & q, p | q, ~p, p >> q
    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __rshift__(self, other: "Formula") -> "Formula":
        return Implies(self, other)


def _require_formula(*values: Any) -> None:
    for v in values:
        if not isinstance(v, Formula):
            raise TypeError(f"expected a Formula, got {type(v).__name__}")


def _require_name(value: Any, what: str) -> None:
    if not isinstance(value, str) or not value:
        raise TypeError(f"{what} must be a non-empty string")


class Top(Formula):
    __slots__ = ()


class Bot(Formula):
    __slots__ = ()


class Atom(Formula):
    __slots__ = ("name",)
    _fields = ("name",)
    name: str

    @classmethod
    def _check(cls, args):
        _require_name(args[0], "proposition")


class _Unary(Formula):
    __slots__ = ("arg",)
    _fields = ("arg",)
    arg: Formula

    @classmethod
    def _check(cls, args):
        _require_formula(args[0])

    def children(self):
        return (self.arg,)


class Not(_Unary):
    __slots__ = ()


class Common(_Unary):
    __slots__ = ()


class _Binary(Formula):
    __slots__ = ("left", "right")
    _fields = ("left", "right")
    left: Formula
    right: Formula

    @classmethod
    def _check(cls, args):
        _require_formula(*args)

    def children(self):
        return (self.left, self.right)


class And(_Binary):
    __slots__ = ()


class Or(_Binary):
    __slots__ = ()


class Implies(_Binary):
    __slots__ = ()


class Knows(Formula):
    __slots__ = ("agent", "arg")
    _fields = ("agent", "arg")
    agent: str
    arg: Formula

    @classmethod
    def _check(cls, args):
        _require_name(args[0], "agent")
        _require_formula(args[1])

    def children(self):
        return (self.arg,)


class _Dynamic(Formula):
    __slots__ = ("action", "arg")
    _fields = ("action", "arg")
    action: "Action"
    arg: Formula

    @classmethod
    def _check(cls, args):
        if not hasattr(args[0], "event_model"):
            raise TypeError("dynamic modalities take an Action")
        _require_formula(args[1])

    def children(self):
        return (self.arg,)


class Box(_Dynamic):
    """[a]φ: every designated event whose precondition holds leads to φ."""

    __slots__ = ()


class Diamond(_Dynamic):
    """<a>φ, i.e. ¬[a]¬φ."""

    __slots__ = ()


class Applied(_Dynamic):
    """<<a>>φ, i.e. <a>⊤ ∧ [a]φ: a is applicable and necessarily yields φ."""

    __slots__ = ()


TOP = Top()
BOT = Bot()


def conjunction(parts) -> Formula:
    """Left-folded conjunction; the empty conjunction is ⊤."""
    result: Formula | None = None
    for p in parts:
        result = p if result is None else And(result, p)
    return TOP if result is None else result


def disjunction(parts) -> Formula:
    result: Formula | None = None
    for p in parts:
        result = p if result is None else Or(result, p)
    return BOT if result is None else result


def iter_postorder(root: Formula) -> Iterator[Formula]:
    """Yield each distinct subformula once, children before parents."""
    seen: set[int] = set()
    stack: list[tuple[Formula, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for child in reversed(node.children()):
            if id(child) not in seen:
                stack.append((child, False))


def atoms_of(phi: Formula) -> set[str]:
    """Propositions occurring in φ, excluding those inside action preconditions."""
    return {n.name for n in iter_postorder(phi) if isinstance(n, Atom)}


def agents_of(phi: Formula) -> set[str]:
    return {n.agent for n in iter_postorder(phi) if isinstance(n, Knows)}


def actions_of(phi: Formula) -> list["Action"]:
    found: dict[int, Action] = {}
    for n in iter_postorder(phi):
        if isinstance(n, _Dynamic):
            found.setdefault(id(n.action), n.action)
    return list(found.values())


def is_static(phi: Formula) -> bool:
    return not any(isinstance(n, _Dynamic) for n in iter_postorder(phi))


def _rebuild(root: Formula, rule: Callable[[Formula, Callable[[Formula], Formula]], Formula]) -> Formula:
    done: dict[int, Formula] = {}
    for node in iter_postorder(root):
        done[id(node)] = rule(node, lambda child: done[id(child)])
    return done[id(root)]


def normalize(phi: Formula) -> Formula:
    """Rewrite ∨, →, <a> and <<a>> into the core connectives ⊤ ⊥ p ¬ ∧ K C [a]."""

    def rule(node: Formula, sub: Callable[[Formula], Formula]) -> Formula:
        if isinstance(node, Or):
            return Not(And(Not(sub(node.left)), Not(sub(node.right))))
        if isinstance(node, Implies):
            return Not(And(sub(node.left), Not(sub(node.right))))
        if isinstance(node, Diamond):
            return Not(Box(node.action, Not(sub(node.arg))))
        if isinstance(node, Applied):
            return And(Not(Box(node.action, BOT)), Box(node.action, sub(node.arg)))
        if isinstance(node, Not):
            return Not(sub(node.arg))
        if isinstance(node, And):
            return And(sub(node.left), sub(node.right))
        if isinstance(node, Knows):
            return Knows(node.agent, sub(node.arg))
        if isinstance(node, Common):
            return Common(sub(node.arg))
        if isinstance(node, Box):
            return Box(node.action, sub(node.arg))
        return node

    return _rebuild(phi, rule)


# Printing. Binding strength: prefix operators > & > | > ->.
_PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_PREFIX, _PREC_ATOM = 1, 2, 3, 4, 5
_BINARY_TOKEN = {And: "&", Or: "|", Implies: "->"}
_BINARY_PREC = {And: _PREC_AND, Or: _PREC_OR, Implies: _PREC_IMPLIES}


def _precedence(node: Formula) -> int:
    return _BINARY_PREC.get(type(node), _PREC_PREFIX if node.children() else _PREC_ATOM)


def to_text(phi: Formula) -> str:
    """Render φ in the task-file syntax with minimal parentheses.

    Static formulas round-trip through the parser to the identical node.
    Dynamic modalities print as ``[a]``, ``<a>`` and ``<<a>>`` for display only.
    """
    out: dict[int, str] = {}

    def wrap(child: Formula, min_prec: int) -> str:
        text = out[id(child)]
        return f"({text})" if _precedence(child) < min_prec else text

    for node in iter_postorder(phi):
        kind = type(node)
        if kind is Top:
            text = "true"
        elif kind is Bot:
            text = "false"
        elif kind is Atom:
            text = node.name
        elif kind is Not:
            text = "!" + wrap(node.arg, _PREC_PREFIX)
        elif kind is Knows:
            text = f"K[{node.agent}] " + wrap(node.arg, _PREC_PREFIX)
        elif kind is Common:
            text = "C " + wrap(node.arg, _PREC_PREFIX)
        elif kind in _BINARY_TOKEN:
            prec = _BINARY_PREC[kind]
            if kind is Implies:
                left, right = wrap(node.left, prec + 1), wrap(node.right, prec)
            else:
                left, right = wrap(node.left, prec), wrap(node.right, prec + 1)
            text = f"{left} {_BINARY_TOKEN[kind]} {right}"
        else:
            name = node.action.name
            opener = {Box: f"[{name}]", Diamond: f"<{name}>", Applied: f"<<{name}>>"}[kind]
            text = f"{opener} " + wrap(node.arg, _PREC_PREFIX)
        out[id(node)] = text
    return out[id(phi)]
