"""Line-oriented text format for planning tasks.

Example::

    agents: anne, bob
    props: m, h
    worlds:
      w {m}
      v {}
    indist[bob]: w, v
    designated: w
    action try-take owner=bob:
      event e pre="m" post="h & !m"
      event f pre="!m" post="top"
      indist[anne]: e, f
      designated: e, f
    goal: "h"

Blocks of an ``indist`` line are separated by ``|``; worlds or events not
mentioned are singletons, and an agent without an ``indist`` line tells
everything apart. ``#`` starts a comment. A world may also be given inline
as ``worlds: w {m}``.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from delplan.core import (
    Action,
    DelError,
    EpistemicModel,
    EventModel,
    NotLocalError,
    Partition,
    PlanningTask,
    Postcondition,
    PostconditionConflictError,
    Signature,
    SignatureError,
    State,
)
from delplan.formula import Formula, is_static, to_text
from delplan.logic import IDENT_PATTERN, KEYWORDS, FormulaSyntaxError, UnknownSymbolError, parse_formula

__all__ = ["TaskSyntaxError", "TaskSemanticError", "parse_task", "serialize_task", "task_digest", "load_task"]

_IDENT = re.compile(rf"^{IDENT_PATTERN}$")


class TaskSyntaxError(DelError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class TaskSemanticError(DelError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


@dataclass
class _ActionDraft:
    name: str
    owner: str
    line: int
    events: list[tuple[str, Formula, Postcondition]] = field(default_factory=list)
    indist: dict[str, list[list[str]]] = field(default_factory=dict)
    designated: list[str] | None = None


_HEADER = re.compile(r"^(?P<key>agents|props|worlds|designated|goal)\s*:\s*(?P<rest>.*)$")
_INDIST = re.compile(rf"^indist\[\s*(?P<agent>{IDENT_PATTERN})\s*\]\s*:\s*(?P<rest>.*)$")
_ACTION = re.compile(rf"^action\s+(?P<name>{IDENT_PATTERN})\s+owner\s*=\s*(?P<owner>{IDENT_PATTERN})\s*:\s*$")
_EVENT = re.compile(
    rf'^event\s+(?P<name>{IDENT_PATTERN})\s+pre\s*=\s*"(?P<pre>[^"]*)"\s+post\s*=\s*"(?P<post>[^"]*)"\s*$'
)
_WORLD = re.compile(rf"^(?P<name>{IDENT_PATTERN})\s*\{{(?P<props>[^}}]*)\}}\s*$")
_QUOTED = re.compile(r'^"(?P<text>[^"]*)"\s*$')
_LITERAL = re.compile(rf"^(?P<neg>!?)\s*(?P<prop>{IDENT_PATTERN})$")


def _strip_comment(line: str) -> str:
    in_quote = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.agents: list[str] | None = None
        self.props: list[str] | None = None
        self.worlds: list[tuple[str, list[str], int]] = []
        self.indist: dict[str, list[list[str]]] = {}
        self.designated: list[str] | None = None
        self.actions: list[_ActionDraft] = []
        self.goal: Formula | None = None
        self.sig: Signature | None = None
        self.in_worlds = False

    def fail(self, message: str, lineno: int, column: int = 1):
        raise TaskSyntaxError(message, lineno, column)

    def ident_list(self, text: str, lineno: int, col: int) -> list[str]:
        items = [t.strip() for t in text.split(",")]
        if items == [""]:
            return []
        offset = col
        for item, raw in zip(items, text.split(",")):
            if not _IDENT.match(item):
                self.fail(f"expected an identifier, found {item!r}", lineno, offset + len(raw) - len(raw.lstrip()))
            offset += len(raw) + 1
        return items

    def blocks(self, text: str, lineno: int, col: int) -> list[list[str]]:
        out = []
        offset = col
        for raw in text.split("|"):
            ids = self.ident_list(raw, lineno, offset)
            if not ids:
                self.fail("empty block", lineno, offset)
            out.append(ids)
            offset += len(raw) + 1
        return out

    def formula(self, text: str, lineno: int, col: int) -> Formula:
        try:
            return parse_formula(text, self.signature(lineno))
        except FormulaSyntaxError as e:
            self.fail(str(e).rsplit(" at position", 1)[0], lineno, col + e.position)
        except UnknownSymbolError as e:
            raise TaskSemanticError(f"undeclared {e.kind} {e.name!r}", lineno) from None

    def signature(self, lineno: int) -> Signature:
        if self.sig is None:
            if self.agents is None or self.props is None:
                raise TaskSemanticError("agents and props must be declared first", lineno)
            try:
                self.sig = Signature(tuple(self.agents), tuple(self.props))
            except SignatureError as e:
                raise TaskSemanticError(str(e), lineno) from None
        return self.sig

    def postcondition(self, text: str, lineno: int, col: int) -> Postcondition:
        text = text.strip()
        if text in ("top", "true"):
            return Postcondition()
        pos, neg = set(), set()
        for raw in text.split("&"):
            m = _LITERAL.match(raw.strip())
            if m is None:
                self.fail(f"expected a literal, found {raw.strip()!r}", lineno, col)
            p = m.group("prop")
            if not self.signature(lineno).has_prop(p):
                raise TaskSemanticError(f"undeclared proposition {p!r}", lineno)
            (neg if m.group("neg") else pos).add(p)
        try:
            return Postcondition(frozenset(pos), frozenset(neg))
        except PostconditionConflictError as e:
            raise TaskSemanticError(str(e), lineno) from None

    def check_agent(self, agent: str, lineno: int) -> None:
        if agent not in self.signature(lineno).agents:
            raise TaskSemanticError(f"undeclared agent {agent!r}", lineno)

    def run(self) -> PlanningTask:
        for lineno, raw in enumerate(self.lines, 1):
            line = _strip_comment(raw).rstrip()
            body = line.lstrip()
            if not body:
                continue
            col = len(line) - len(body) + 1
            self.line(body, lineno, col)
        return self.build()

    def line(self, body: str, lineno: int, col: int) -> None:
        action = self.actions[-1] if self.actions and self.goal is None else None
        m = _EVENT.match(body)
        if m:
            if action is None:
                self.fail("event outside an action", lineno, col)
            pre = self.formula(m.group("pre"), lineno, col + m.start("pre"))
            post = self.postcondition(m.group("post"), lineno, col + m.start("post"))
            action.events.append((m.group("name"), pre, post))
            return
        m = _ACTION.match(body)
        if m:
            self.in_worlds = False
            self.check_agent(m.group("owner"), lineno)
            self.actions.append(_ActionDraft(m.group("name"), m.group("owner"), lineno))
            return
        m = _INDIST.match(body)
        if m:
            self.in_worlds = False
            agent = m.group("agent")
            self.check_agent(agent, lineno)
            target = action.indist if action is not None else self.indist
            if agent in target:
                raise TaskSemanticError(f"duplicate indist line for {agent!r}", lineno)
            target[agent] = self.blocks(m.group("rest"), lineno, col + m.start("rest"))
            return
        m = _HEADER.match(body)
        if m:
            self.header(m.group("key"), m.group("rest"), lineno, col + m.start("rest"), action)
            return
        if self.in_worlds:
            self.world(body, lineno, col)
            return
        self.fail(f"unrecognized line {body[:30]!r}", lineno, col)

    def header(self, key: str, rest: str, lineno: int, col: int, action: _ActionDraft | None) -> None:
        self.in_worlds = False
        if key == "designated" and action is not None:
            if action.designated is not None:
                raise TaskSemanticError(f"duplicate designated line in action {action.name!r}", lineno)
            action.designated = self.ident_list(rest, lineno, col)
            return
        if key in ("agents", "props"):
            if getattr(self, key) is not None:
                raise TaskSemanticError(f"duplicate {key} line", lineno)
            setattr(self, key, self.ident_list(rest, lineno, col))
            return
        if key == "worlds":
            self.signature(lineno)
            self.in_worlds = True
            if rest.strip():
                self.world(rest.strip(), lineno, col)
            return
        if key == "designated":
            if self.designated is not None:
                raise TaskSemanticError("duplicate designated line", lineno)
            self.designated = self.ident_list(rest, lineno, col)
            return
        # goal
        if self.goal is not None:
            raise TaskSemanticError("duplicate goal", lineno)
        m = _QUOTED.match(rest)
        if m is None:
            self.fail('goal must be a quoted formula', lineno, col)
        self.goal = self.formula(m.group("text"), lineno, col + 1)

    def world(self, body: str, lineno: int, col: int) -> None:
        m = _WORLD.match(body)
        if m is None:
            self.fail("expected a world: name {props}", lineno, col)
        props = self.ident_list(m.group("props"), lineno, col + m.start("props"))
        for p in props:
            if not self.signature(lineno).has_prop(p):
                raise TaskSemanticError(f"undeclared proposition {p!r}", lineno)
        self.worlds.append((m.group("name"), props, lineno))

    def build(self) -> PlanningTask:
        sig = self.signature(len(self.lines))
        if not self.worlds:
            raise TaskSemanticError("no worlds declared")
        names = [w for w, _, _ in self.worlds]
        index = _unique_index(names, "world")
        relations = []
        for agent in sig.agents:
            blocks = [[_lookup(index, w, "world") for w in b] for b in self.indist.get(agent, ())]
            relations.append(_partition(len(names), blocks, f"indist[{agent}]"))
        model = EpistemicModel(sig, tuple(frozenset(p) for _, p, _ in self.worlds), tuple(relations), tuple(names))
        if not self.designated:
            raise TaskSemanticError("the initial state needs designated worlds")
        initial = State(model, frozenset(_lookup(index, w, "world") for w in self.designated))
        actions, owner = {}, {}
        for draft in self.actions:
            if draft.name in actions:
                raise TaskSemanticError(f"duplicate action {draft.name!r}", draft.line)
            if not draft.events:
                raise TaskSemanticError(f"action {draft.name!r} has no events", draft.line)
            if not draft.designated:
                raise TaskSemanticError(f"action {draft.name!r} has no designated events", draft.line)
            ev_index = _unique_index([e for e, _, _ in draft.events], "event", draft.line)
            ev_rel = []
            for agent in sig.agents:
                blocks = [[_lookup(ev_index, e, "event", draft.line) for e in b] for b in draft.indist.get(agent, ())]
                ev_rel.append(_partition(len(draft.events), blocks, f"indist[{agent}]", draft.line))
            events = EventModel(
                sig,
                tuple(p for _, p, _ in draft.events),
                tuple(q for _, _, q in draft.events),
                tuple(ev_rel),
                tuple(e for e, _, _ in draft.events),
            )
            designated = frozenset(_lookup(ev_index, e, "event", draft.line) for e in draft.designated)
            actions[draft.name] = Action(draft.name, events, designated)
            owner[draft.name] = draft.owner
        if self.goal is None:
            raise TaskSemanticError("missing goal")
        try:
            return PlanningTask(initial, actions, owner, self.goal)
        except NotLocalError as e:
            raise TaskSemanticError(str(e)) from None


def _unique_index(names: list[str], what: str, line: int | None = None) -> dict[str, int]:
    index: dict[str, int] = {}
    for i, n in enumerate(names):
        if n in index:
            raise TaskSemanticError(f"duplicate {what} {n!r}", line)
        index[n] = i
    return index


def _lookup(index: dict[str, int], name: str, what: str, line: int | None = None) -> int:
    if name not in index:
        raise TaskSemanticError(f"unknown {what} {name!r}", line)
    return index[name]


def _partition(n: int, blocks: list[list[int]], what: str, line: int | None = None) -> Partition:
    try:
        return Partition.from_blocks(n, blocks)
    except ValueError as e:
        raise TaskSemanticError(f"{what}: {e}", line) from None


def parse_task(text: str) -> PlanningTask:
    return _Parser(text).run()


def load_task(path: str) -> PlanningTask:
    with open(path, encoding="utf-8") as fh:
        return parse_task(fh.read())


def _names(given: tuple[str, ...] | None, n: int, prefix: str) -> list[str]:
    if given is not None and len(set(given)) == n and all(_IDENT.match(x) and x not in KEYWORDS for x in given):
        return list(given)
    return [f"{prefix}{i}" for i in range(n)]


def _blocks_text(rel: Partition, names: list[str]) -> str | None:
    blocks = [b for b in rel.blocks if len(b) > 1]
    if not blocks:
        return None
    return " | ".join(", ".join(names[x] for x in b) for b in blocks)


def _formula_text(phi: Formula) -> str:
    if not is_static(phi):
        raise ValueError("dynamic modalities cannot be written to a task file")
    return to_text(phi)


def serialize_task(task: PlanningTask) -> str:
    """Render ``task`` in the task-file format (deterministic)."""
    sig = task.signature
    model = task.initial.model
    lines = [f"agents: {', '.join(sig.agents)}", f"props: {', '.join(sig.props)}", "worlds:"]
    wnames = _names(model.names, model.size, "w")
    for w in model.worlds:
        props = ", ".join(p for p in sig.props if p in model.valuation[w])
        lines.append(f"  {wnames[w]} {{{props}}}")
    for agent, rel in zip(sig.agents, model.relations):
        text = _blocks_text(rel, wnames)
        if text is not None:
            lines.append(f"indist[{agent}]: {text}")
    lines.append("designated: " + ", ".join(wnames[w] for w in sorted(task.initial.designated)))
    for name in task.action_names:
        action = task.actions[name]
        events = action.event_model
        enames = _names(events.names, events.size, "e")
        lines.append(f"action {name} owner={task.owner[name]}:")
        for e in range(events.size):
            lines.append(f'  event {enames[e]} pre="{_formula_text(events.pre[e])}" post="{events.post[e]}"')
        for agent, rel in zip(sig.agents, events.relations):
            text = _blocks_text(rel, enames)
            if text is not None:
                lines.append(f"  indist[{agent}]: {text}")
        lines.append("  designated: " + ", ".join(enames[e] for e in sorted(action.designated)))
    lines.append(f'goal: "{_formula_text(task.goal)}"')
    return "\n".join(lines) + "\n"


def task_digest(task: PlanningTask) -> str:
    """SHA-256 of the serialized task, used in policy file headers."""
    return hashlib.sha256(serialize_task(task).encode()).hexdigest()
