"""Epistemic models, event models, product update and perspective shifts.

Indistinguishability relations are equivalence relations stored as
partitions. Worlds and events are dense integer indices; optional names are
kept only for display and serialization, and product updates record the
(world, event) pair each new world came from.

Truth sets (the worlds of a model satisfying a formula) are computed here,
because product update needs precondition truth and dynamic modalities need
product update. ``delplan.logic`` exposes the state-level API on top.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any

from delplan.formula import (
    And,
    Applied,
    Atom,
    Bot,
    Box,
    Common,
    Diamond,
    Formula,
    Implies,
    Knows,
    Not,
    Or,
    Top,
    actions_of,
    agents_of,
    atoms_of,
)

__all__ = [
    "DelError",
    "InvalidAgentError",
    "SignatureError",
    "NotApplicableError",
    "NotLocalError",
    "PostconditionConflictError",
    "Signature",
    "Partition",
    "EpistemicModel",
    "State",
    "Postcondition",
    "EventModel",
    "Action",
    "PlanningTask",
    "truth_set",
    "is_local_for",
    "action_is_local_for",
    "perspective_shift",
    "global_states",
    "is_applicable",
    "product_update",
    "update_designated",
    "public_action",
]


class DelError(Exception):
    """Base class for errors raised by the DEL layer."""


class InvalidAgentError(DelError, ValueError):
    pass


class SignatureError(DelError, ValueError):
    """Mismatched signatures or undeclared symbols."""


class NotApplicableError(DelError):
    pass


class NotLocalError(DelError, ValueError):
    pass


class PostconditionConflictError(DelError, ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    agents: tuple[str, ...]
    props: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "props", tuple(self.props))
        for what, names in (("agents", self.agents), ("props", self.props)):
            if not names:
                raise SignatureError(f"signature needs at least one of {what}")
            if len(set(names)) != len(names):
                raise SignatureError(f"duplicate identifiers in {what}")
        object.__setattr__(self, "_agent_index", {a: i for i, a in enumerate(self.agents)})
        object.__setattr__(self, "_prop_set", frozenset(self.props))

    def agent_index(self, agent: str) -> int:
        try:
            return self._agent_index[agent]
        except KeyError:
            raise InvalidAgentError(f"unknown agent {agent!r}") from None

    def has_prop(self, p: str) -> bool:
        return p in self._prop_set

    def check_formula(self, phi: Formula) -> None:
        """Raise SignatureError if φ mentions an undeclared agent or proposition."""
        for p in sorted(atoms_of(phi)):
            if p not in self._prop_set:
                raise SignatureError(f"undeclared proposition {p!r}")
        for a in sorted(agents_of(phi)):
            if a not in self._agent_index:
                raise SignatureError(f"undeclared agent {a!r}")
        for action in actions_of(phi):
            if action.event_model.signature != self:
                raise SignatureError(f"action {action.name!r} uses a different signature")


@dataclass(frozen=True)
class Partition:
    """An equivalence relation on 0..n-1 as blocks plus an element→block index."""

    blocks: tuple[tuple[int, ...], ...]
    index: tuple[int, ...]

    @classmethod
    def from_labels(cls, labels: Sequence[Hashable]) -> "Partition":
        """Elements with equal labels share a block; blocks ordered by least element."""
        number: dict[Hashable, int] = {}
        index = []
        members: list[list[int]] = []
        for x, label in enumerate(labels):
            b = number.get(label)
            if b is None:
                b = number[label] = len(members)
                members.append([])
            members[b].append(x)
            index.append(b)
        return cls(tuple(tuple(m) for m in members), tuple(index))

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[Iterable[int]]) -> "Partition":
        """Build from explicit blocks; elements not mentioned become singletons."""
        labels: list[Any] = [("solo", x) for x in range(n)]
        seen: set[int] = set()
        for b, block in enumerate(blocks):
            for x in block:
                if not 0 <= x < n:
                    raise ValueError(f"element {x} out of range 0..{n - 1}")
                if x in seen:
                    raise ValueError(f"element {x} appears in two blocks")
                seen.add(x)
                labels[x] = ("block", b)
        return cls.from_labels(labels)

    @classmethod
    def discrete(cls, n: int) -> "Partition":
        return cls(tuple((x,) for x in range(n)), tuple(range(n)))

    @classmethod
    def total(cls, n: int) -> "Partition":
        return cls((tuple(range(n)),), (0,) * n)

    def __len__(self) -> int:
        return len(self.index)

    def block_of(self, x: int) -> tuple[int, ...]:
        return self.blocks[self.index[x]]

    def same(self, x: int, y: int) -> bool:
        return self.index[x] == self.index[y]

    def closure(self, xs: Iterable[int]) -> frozenset[int]:
        out: set[int] = set()
        for b in {self.index[x] for x in xs}:
            out.update(self.blocks[b])
        return frozenset(out)

    def is_closed(self, xs: Iterable[int]) -> bool:
        xs = frozenset(xs)
        return all(set(self.block_of(x)) <= xs for x in xs)


def _check_relations(signature: Signature, relations: Sequence[Partition], n: int, what: str) -> tuple:
    relations = tuple(relations)
    if len(relations) != len(signature.agents):
        raise SignatureError(f"{what} needs one partition per agent")
    for agent, rel in zip(signature.agents, relations):
        if len(rel) != n:
            raise ValueError(f"partition for {agent!r} does not cover all {n} {what} elements")
    return relations


@dataclass(frozen=True, eq=False)
class EpistemicModel:
    """Finite S5 Kripke model. Compared by identity; use bisim for equivalence."""

    signature: Signature
    valuation: tuple[frozenset[str], ...]
    relations: tuple[Partition, ...]
    names: tuple[str, ...] | None = None
    origin: tuple[tuple[int, int], ...] | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        valuation = tuple(frozenset(v) for v in self.valuation)
        if not valuation:
            raise ValueError("an epistemic model needs at least one world")
        object.__setattr__(self, "valuation", valuation)
        for v in valuation:
            for p in v:
                if not self.signature.has_prop(p):
                    raise SignatureError(f"undeclared proposition {p!r}")
        object.__setattr__(
            self, "relations", _check_relations(self.signature, self.relations, len(valuation), "worlds")
        )
        if self.names is not None and len(self.names) != len(valuation):
            raise ValueError("one name per world required")

    @classmethod
    def build(
        cls,
        signature: Signature,
        worlds: Mapping[str, Iterable[str]],
        indist: Mapping[str, Iterable[Iterable[str]]] | None = None,
    ) -> "EpistemicModel":
        """Construct from named worlds; agents missing from ``indist`` see everything."""
        names = tuple(worlds)
        where = {name: i for i, name in enumerate(names)}
        indist = indist or {}
        for agent in indist:
            signature.agent_index(agent)
        relations = []
        for agent in signature.agents:
            blocks = [[where[w] for w in block] for block in indist.get(agent, ())]
            relations.append(Partition.from_blocks(len(names), blocks))
        return cls(signature, tuple(frozenset(worlds[n]) for n in names), tuple(relations), names)

    @property
    def size(self) -> int:
        return len(self.valuation)

    @property
    def worlds(self) -> range:
        return range(len(self.valuation))

    def partition(self, agent: str) -> Partition:
        return self.relations[self.signature.agent_index(agent)]

    def world_name(self, w: int) -> str:
        return self.names[w] if self.names is not None else f"w{w}"

    def components(self) -> Partition:
        """Connected components of the union of all agents' relations."""
        comp = self._cache.get("components")
        if comp is None:
            parent = list(self.worlds)

            def find(x: int) -> int:
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for rel in self.relations:
                for block in rel.blocks:
                    root = find(block[0])
                    for x in block[1:]:
                        parent[find(x)] = root
            comp = self._cache["components"] = Partition.from_labels([find(w) for w in self.worlds])
        return comp


@dataclass(frozen=True)
class State:
    """An epistemic model with a non-empty set of designated worlds."""

    model: EpistemicModel
    designated: frozenset[int]

    def __post_init__(self) -> None:
        designated = frozenset(self.designated)
        if not designated:
            raise ValueError("a state needs at least one designated world")
        if not all(0 <= w < self.model.size for w in designated):
            raise ValueError("designated worlds must belong to the model")
        object.__setattr__(self, "designated", designated)

    @property
    def signature(self) -> Signature:
        return self.model.signature

    @property
    def is_global(self) -> bool:
        return len(self.designated) == 1

    def __repr__(self) -> str:
        names = ", ".join(self.model.world_name(w) for w in sorted(self.designated))
        return f"State({self.model.size} worlds, designated {{{names}}})"


@dataclass(frozen=True)
class Postcondition:
    """A conjunction of literals; both sets empty means ⊤."""

    positive: frozenset[str] = frozenset()
    negative: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "positive", frozenset(self.positive))
        object.__setattr__(self, "negative", frozenset(self.negative))
        clash = self.positive & self.negative
        if clash:
            raise PostconditionConflictError(f"postcondition sets and clears {sorted(clash)}")

    def apply(self, valuation: frozenset[str]) -> frozenset[str]:
        return (valuation - self.negative) | self.positive

    def __str__(self) -> str:
        literals = sorted(self.positive) + ["!" + p for p in sorted(self.negative)]
        return " & ".join(literals) if literals else "top"


TRIVIAL_POST = Postcondition()


@dataclass(frozen=True)
class EventModel:
    signature: Signature
    pre: tuple[Formula, ...]
    post: tuple[Postcondition, ...]
    relations: tuple[Partition, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        pre, post = tuple(self.pre), tuple(self.post)
        if not pre:
            raise ValueError("an event model needs at least one event")
        if len(post) != len(pre):
            raise ValueError("one postcondition per event required")
        for phi in pre:
            self.signature.check_formula(phi)
        for p in post:
            for q in p.positive | p.negative:
                if not self.signature.has_prop(q):
                    raise SignatureError(f"undeclared proposition {q!r}")
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "post", post)
        object.__setattr__(self, "relations", _check_relations(self.signature, self.relations, len(pre), "events"))
        if self.names is not None and len(self.names) != len(pre):
            raise ValueError("one name per event required")

    @property
    def size(self) -> int:
        return len(self.pre)

    def partition(self, agent: str) -> Partition:
        return self.relations[self.signature.agent_index(agent)]

    def event_name(self, e: int) -> str:
        return self.names[e] if self.names is not None else f"e{e}"


@dataclass(frozen=True)
class Action:
    name: str
    event_model: EventModel
    designated: frozenset[int]

    def __post_init__(self) -> None:
        designated = frozenset(self.designated)
        if not designated:
            raise ValueError(f"action {self.name!r} needs at least one designated event")
        if not all(0 <= e < self.event_model.size for e in designated):
            raise ValueError(f"action {self.name!r} designates unknown events")
        object.__setattr__(self, "designated", designated)

    @property
    def signature(self) -> Signature:
        return self.event_model.signature

    def __repr__(self) -> str:
        return f"Action({self.name!r}, {self.event_model.size} events)"


def public_action(name: str, signature: Signature, pre: Formula, post: Postcondition = TRIVIAL_POST) -> Action:
    """Single-event action observed by everyone (a public announcement when post is ⊤)."""
    model = EventModel(signature, (pre,), (post,), tuple(Partition.total(1) for _ in signature.agents))
    return Action(name, model, frozenset({0}))


# Truth sets ---------------------------------------------------------------

def _truths(model: EpistemicModel) -> dict:
    return model._cache.setdefault("truth", {})


def _full_product(model: EpistemicModel, events: EventModel):
    """Product of the whole model with the whole event model (cached on the model)."""
    products = model._cache.setdefault("products", {})
    hit = products.get(id(events))
    if hit is not None and hit[0] is events:
        return hit[1], hit[2]
    try:
        product, index = _product(model, events)
    except NotApplicableError:
        product, index = None, {}
    products[id(events)] = (events, product, index)
    return product, index


def _missing(model: EpistemicModel, phi: Formula) -> list[tuple[EpistemicModel, Formula]]:
    """Sub-evaluations that must be cached before φ can be combined in this model."""
    truths = _truths(model)
    if isinstance(phi, (Box, Diamond, Applied)):
        events = phi.action.event_model
        pending = [(model, pre) for pre in set(events.pre) if pre not in truths]
        if pending:
            return pending
        product, _ = _full_product(model, events)
        if product is None or phi.arg in _truths(product):
            return []
        return [(product, phi.arg)]
    return [(model, c) for c in phi.children() if c not in truths]


def _combine(model: EpistemicModel, phi: Formula) -> frozenset[int]:
    truths = _truths(model)
    kind = type(phi)
    everything = frozenset(model.worlds)
    if kind is Top:
        return everything
    if kind is Bot:
        return frozenset()
    if kind is Atom:
        return frozenset(w for w in model.worlds if phi.name in model.valuation[w])
    if kind is Not:
        return everything - truths[phi.arg]
    if kind is And:
        return truths[phi.left] & truths[phi.right]
    if kind is Or:
        return truths[phi.left] | truths[phi.right]
    if kind is Implies:
        return (everything - truths[phi.left]) | truths[phi.right]
    if kind is Knows:
        inner = truths[phi.arg]
        rel = model.partition(phi.agent)
        return frozenset(w for block in rel.blocks if inner.issuperset(block) for w in block)
    if kind is Common:
        inner = truths[phi.arg]
        comp = model.components()
        return frozenset(w for block in comp.blocks if inner.issuperset(block) for w in block)
    # dynamic modalities
    action = phi.action
    events = action.event_model
    product, index = _full_product(model, events)
    after = _truths(product)[phi.arg] if product is not None else frozenset()
    pres = [truths[pre] for pre in events.pre]
    designated = sorted(action.designated)
    result = set()
    for w in model.worlds:
        live = [e for e in designated if w in pres[e]]
        if kind is Diamond:
            ok = any(index[(w, e)] in after for e in live)
        else:
            ok = all(index[(w, e)] in after for e in live)
            if kind is Applied:
                ok = ok and bool(live)
        if ok:
            result.add(w)
    return frozenset(result)


def truth_set(model: EpistemicModel, phi: Formula) -> frozenset[int]:
    """The worlds of ``model`` at which φ holds (memoized per model)."""
    truths = _truths(model)
    hit = truths.get(phi)
    if hit is not None:
        return hit
    stack = [(model, phi)]
    while stack:
        m, f = stack[-1]
        if f in _truths(m):
            stack.pop()
            continue
        pending = _missing(m, f)
        if pending:
            stack.extend(pending)
            continue
        _truths(m)[f] = _combine(m, f)
        stack.pop()
    return truths[phi]


# State operations ----------------------------------------------------------

def is_local_for(s: State, agent: str) -> bool:
    return s.model.partition(agent).is_closed(s.designated)


def action_is_local_for(a: Action, agent: str) -> bool:
    return a.event_model.partition(agent).is_closed(a.designated)


def perspective_shift(s: State, agent: str) -> State:
    """Agent's associated local state: close the designated set under its relation."""
    closed = s.model.partition(agent).closure(s.designated)
    if closed == s.designated:
        return s
    return State(s.model, closed)


def global_states(s: State) -> list[State]:
    """One global state per designated world, in world order."""
    if s.is_global:
        return [s]
    return [State(s.model, frozenset({w})) for w in sorted(s.designated)]


def _same_signature(s: State, a: Action) -> None:
    if s.model.signature != a.event_model.signature:
        raise SignatureError(f"action {a.name!r} and state use different signatures")


def is_applicable(a: Action, s: State) -> bool:
    """Every designated world meets the precondition of some designated event."""
    _same_signature(s, a)
    events = a.event_model
    pres = [truth_set(s.model, events.pre[e]) for e in sorted(a.designated)]
    return all(any(w in p for p in pres) for w in s.designated)


def _product(model: EpistemicModel, events: EventModel):
    pres = [truth_set(model, pre) for pre in events.pre]
    pairs = [(w, e) for w in model.worlds for e in range(events.size) if w in pres[e]]
    if not pairs:
        raise NotApplicableError("no world satisfies any event precondition")
    index = {pair: i for i, pair in enumerate(pairs)}
    valuation = tuple(events.post[e].apply(model.valuation[w]) for w, e in pairs)
    relations = tuple(
        Partition.from_labels([(wr.index[w], er.index[e]) for w, e in pairs])
        for wr, er in zip(model.relations, events.relations)
    )
    return EpistemicModel(model.signature, valuation, relations, origin=tuple(pairs)), index


def update_designated(s: State, a: Action) -> tuple[EpistemicModel, frozenset[int]]:
    """Product model and surviving designated pairs; the pair set may be empty."""
    _same_signature(s, a)
    model, index = _product(s.model, a.event_model)
    designated = frozenset(
        index[(w, e)] for w in s.designated for e in a.designated if (w, e) in index
    )
    return model, designated


def product_update(s: State, a: Action) -> State:
    """s ⊗ a. Keeps every surviving designated pair; raises only if none survives."""
    model, designated = update_designated(s, a)
    if not designated:
        raise NotApplicableError(f"action {a.name!r} leaves no designated world")
    return State(model, designated)


@dataclass(frozen=True, eq=False)
class PlanningTask:
    """Initial state, named actions, owner per action, and a static goal formula."""

    initial: State
    actions: Mapping[str, Action]
    owner: Mapping[str, str]
    goal: Formula

    def __post_init__(self) -> None:
        sig = self.initial.signature
        if not isinstance(self.actions, MappingProxyType) and isinstance(self.actions, dict):
            object.__setattr__(self, "actions", MappingProxyType(dict(sorted(self.actions.items()))))
        if isinstance(self.owner, dict):
            object.__setattr__(self, "owner", MappingProxyType(dict(self.owner)))
        by_agent: dict[str, list[str]] = {a: [] for a in sig.agents}
        for name, action in self.actions.items():
            if action.name != name:
                raise ValueError(f"action registered as {name!r} is named {action.name!r}")
            if name not in self.owner:
                raise ValueError(f"action {name!r} has no owner")
            agent = self.owner[name]
            sig.agent_index(agent)
            if action.event_model.signature != sig:
                raise SignatureError(f"action {name!r} uses a different signature")
            if not action_is_local_for(action, agent):
                raise NotLocalError(f"action {name!r} is not local for owner {agent!r}")
            by_agent[agent].append(name)
        sig.check_formula(self.goal)
        object.__setattr__(self, "_by_agent", {a: tuple(sorted(ns)) for a, ns in by_agent.items()})

    @property
    def signature(self) -> Signature:
        return self.initial.signature

    @property
    def action_names(self) -> list[str]:
        return sorted(self.actions)

    def actions_of(self, agent: str) -> tuple[str, ...]:
        self.signature.agent_index(agent)
        return self._by_agent[agent]

    def action(self, name: str) -> Action:
        try:
            return self.actions[name]
        except KeyError:
            raise KeyError(f"unknown action {name!r}") from None

    def with_initial(self, s: State) -> "PlanningTask":
        """The same task started from ``s``."""
        task = object.__new__(PlanningTask)
        for attr in ("actions", "owner", "goal", "_by_agent"):
            object.__setattr__(task, attr, getattr(self, attr))
        if s.signature != self.signature:
            raise SignatureError("replacement state uses a different signature")
        object.__setattr__(task, "initial", s)
        return task

    def for_agent(self, agent: str) -> "PlanningTask":
        """The agent's associated task: the initial state seen from its perspective."""
        return self.with_initial(perspective_shift(self.initial, agent))
