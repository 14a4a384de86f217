"""Joint and global policies, strong-policy validation, synthesis and execution.

Global states are identified by their canonical bisimulation key, so a
global policy is a finite map from keys to sets of action names; every
entry keeps a representative state. The local state an agent associates
with a global state is a function of the global key, which makes joint
policies (per-agent maps over local keys) and global policies
interconvertible.
"""

from __future__ import annotations

import enum
import heapq
import random
from collections import deque
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field

from delplan.bisim import CanonicalState, contract
from delplan.core import (
    DelError,
    PlanningTask,
    State,
    global_states,
    is_applicable,
    perspective_shift,
    product_update,
    update_designated,
)
from delplan.logic import evaluate

__all__ = [
    "SuccessorKind",
    "PolicyEntry",
    "GlobalPolicy",
    "JointPolicy",
    "InvalidPolicyError",
    "ResourceLimitError",
    "ExecutionError",
    "Violation",
    "PolicyReport",
    "Outcome",
    "Step",
    "ExecutionTrace",
    "successors",
    "local_view",
    "joint_to_global",
    "global_to_joint",
    "validate_policy",
    "find_ic_policy",
    "SynthesisStats",
    "execute",
    "worst_case",
    "reachable_entries",
]


class SuccessorKind(enum.Enum):
    CENTRALIZED = "cen"
    PERSPECTIVE_SENSITIVE = "ps"


class InvalidPolicyError(DelError, ValueError):
    pass


class ResourceLimitError(DelError):
    """The node budget of a search ran out before the search was decided."""


class ExecutionError(DelError, RuntimeError):
    """An execution of a policy that should be strong got stuck or looped."""


def successors(task: PlanningTask, s: State, name: str, kind: SuccessorKind) -> list[State]:
    """Global successors of global state ``s`` under action ``name``.

    CENTRALIZED: Globals(s ⊗ a). PERSPECTIVE_SENSITIVE: Globals(s^owner ⊗ a).
    Raises NotApplicableError when no designated world survives the update.
    """
    if not s.is_global:
        raise ValueError("successors are defined for global states")
    action = task.action(name)
    if kind is SuccessorKind.PERSPECTIVE_SENSITIVE:
        s = perspective_shift(s, task.owner[name])
    return global_states(product_update(s, action))


def local_view(s: State, agent: str) -> CanonicalState:
    """Canonical form of the agent's associated local state of ``s``."""
    return contract(perspective_shift(s, agent))


@dataclass(frozen=True)
class PolicyEntry:
    state: State
    actions: frozenset[str]


class GlobalPolicy(Mapping):
    """Map from canonical global states to non-empty sets of action names."""

    def __init__(self, entries: Iterable[tuple[State, Iterable[str]]] = ()):
        table: dict[CanonicalState, PolicyEntry] = {}
        for s, names in entries:
            names = frozenset(names)
            if not names:
                continue
            if not s.is_global:
                raise ValueError("policy entries must be global states")
            key = contract(s)
            old = table.get(key)
            if old is not None:
                names |= old.actions
                s = old.state
            table[key] = PolicyEntry(s, names)
        self._table = dict(sorted(table.items(), key=lambda kv: kv[0].key))

    def __getitem__(self, key: CanonicalState) -> PolicyEntry:
        return self._table[key]

    def __iter__(self) -> Iterator[CanonicalState]:
        return iter(self._table)

    def __len__(self) -> int:
        return len(self._table)

    def actions_at(self, s: State) -> frozenset[str]:
        entry = self._table.get(contract(s))
        return entry.actions if entry is not None else frozenset()

    def items_by_key(self) -> list[tuple[str, frozenset[str]]]:
        return [(k.key_hex, e.actions) for k, e in self._table.items()]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GlobalPolicy):
            return NotImplemented
        return {k: e.actions for k, e in self._table.items()} == {k: e.actions for k, e in other._table.items()}

    def __hash__(self):  # mutable-looking mapping semantics; not hashable
        raise TypeError("GlobalPolicy is unhashable")

    def __repr__(self) -> str:
        body = ", ".join(f"{k.key_hex[:8]}: {sorted(e.actions)}" for k, e in self._table.items())
        return f"GlobalPolicy({{{body}}})"


@dataclass
class JointPolicy:
    """Per-agent partial maps from canonical local states to one owned action."""

    maps: dict[str, dict[CanonicalState, tuple[State, str]]] = field(default_factory=dict)

    def get(self, agent: str, local: CanonicalState) -> str | None:
        hit = self.maps.get(agent, {}).get(local)
        return hit[1] if hit is not None else None

    def assign(self, agent: str, local_state: State, name: str) -> None:
        key = contract(local_state)
        table = self.maps.setdefault(agent, {})
        old = table.get(key)
        if old is not None and old[1] != name:
            raise InvalidPolicyError(f"agent {agent!r} assigned both {old[1]!r} and {name!r} to one local state")
        table[key] = (local_state, name)

    def __len__(self) -> int:
        return sum(len(t) for t in self.maps.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JointPolicy):
            return NotImplemented

        def flat(jp):
            return {(a, k, v[1]) for a, t in jp.maps.items() for k, v in t.items()}

        return flat(self) == flat(other)


def joint_to_global(task: PlanningTask, jp: JointPolicy, domain: Iterable[State]) -> GlobalPolicy:
    """π(s) = {π_i(s^i) : π_i(s^i) defined} for every global s in ``domain``."""
    entries = []
    for s in domain:
        names = set()
        for agent in task.signature.agents:
            name = jp.get(agent, local_view(s, agent))
            if name is not None:
                names.add(name)
        entries.append((s, names))
    return GlobalPolicy(entries)


def _structural_violations(task: PlanningTask, gp: GlobalPolicy) -> list["Violation"]:
    """KOP, DET and UNIF violations of ``gp``."""
    found = []
    for key, entry in gp.items():
        s = entry.state
        owners: dict[str, str] = {}
        for name in sorted(entry.actions):
            if name not in task.actions:
                found.append(Violation("unknown-action", key, s, name, f"unknown action {name!r}"))
                continue
            agent = task.owner[name]
            local = perspective_shift(s, agent)
            if not is_applicable(task.actions[name], local):
                found.append(Violation("kop", key, s, name, f"{name} not applicable from {agent}'s perspective"))
            if agent in owners:
                found.append(Violation("det", key, s, name, f"{agent} is assigned {owners[agent]} and {name}"))
            owners.setdefault(agent, name)
            for t in global_states(local):
                if name not in gp.actions_at(t):
                    found.append(
                        Violation("unif", contract(t), t, name, f"{agent} cannot tell this state from one assigned {name}")
                    )
    return found


def global_to_joint(task: PlanningTask, gp: GlobalPolicy) -> JointPolicy:
    """π_i(s^i) = a for every entry (s, A') and a ∈ A' owned by i."""
    problems = [v for v in _structural_violations(task, gp) if v.kind in ("kop", "det", "unif", "unknown-action")]
    if problems:
        raise InvalidPolicyError("; ".join(v.describe() for v in problems[:5]))
    jp = JointPolicy()
    for entry in gp.values():
        for name in sorted(entry.actions):
            agent = task.owner[name]
            jp.assign(agent, perspective_shift(entry.state, agent), name)
    return jp


@dataclass(frozen=True)
class Violation:
    kind: str
    key: CanonicalState
    state: State
    action: str | None
    detail: str

    def describe(self) -> str:
        act = f" action={self.action}" if self.action else ""
        return f"{self.kind}: state={self.key.key_hex}{act} ({self.detail})"


@dataclass(frozen=True)
class PolicyReport:
    kind: SuccessorKind
    entries: int
    violations: tuple[Violation, ...]

    @property
    def finite(self) -> bool:
        return True

    @property
    def valid(self) -> bool:
        return not self.violations

    def of_kind(self, kind: str) -> list[Violation]:
        return [v for v in self.violations if v.kind == kind]

    def summary(self) -> str:
        if self.valid:
            return f"valid strong policy ({self.entries} entries, successors={self.kind.value})"
        lines = [f"invalid policy: {len(self.violations)} violation(s)"]
        lines += ["  " + v.describe() for v in self.violations]
        return "\n".join(lines)


def validate_policy(task: PlanningTask, gp: GlobalPolicy, kind: SuccessorKind) -> PolicyReport:
    """Check finiteness, foundedness, closedness under ``kind``, KOP, DET and UNIF."""
    violations = _structural_violations(task, gp)
    for s in global_states(task.initial):
        if not evaluate(s, task.goal) and not gp.actions_at(s):
            violations.append(Violation("foundedness", contract(s), s, None, "initial global state not covered"))
    checked: set[CanonicalState] = set()
    for key, entry in gp.items():
        for name in sorted(entry.actions):
            if name not in task.actions:
                continue
            action = task.actions[name]
            source = entry.state
            if kind is SuccessorKind.PERSPECTIVE_SENSITIVE:
                source = perspective_shift(source, task.owner[name])
            if not is_applicable(action, source):
                if kind is SuccessorKind.CENTRALIZED:
                    violations.append(Violation("closedness", key, entry.state, name, "action not applicable"))
                continue
            for t in global_states(product_update(source, action)):
                canon = contract(t)
                if canon in checked:
                    continue
                checked.add(canon)
                if not evaluate(t, task.goal) and not gp.actions_at(t):
                    violations.append(Violation("closedness", canon, t, name, f"successor of {name} not covered"))
    return PolicyReport(kind, len(gp), tuple(violations))


# Synthesis -----------------------------------------------------------------

_INF = float("inf")


class _Global:
    __slots__ = ("canon", "state", "goal", "expanded", "options", "rank", "parents", "depth")

    def __init__(self, canon: CanonicalState, state: State, goal: bool, depth: int):
        self.canon = canon
        self.state = state
        self.goal = goal
        self.expanded = False
        self.options: list[_Option] = []
        self.rank = _INF
        self.parents: list[_Option] = []
        self.depth = depth


class _Option:
    """Agent ``agent`` doing ``name`` in local state ``local``; an AND node over its outcomes."""

    __slots__ = ("local", "agent", "name", "children", "parents", "rank", "pending")

    def __init__(self, local: CanonicalState, agent: str, name: str, children: list[_Global]):
        self.local = local
        self.agent = agent
        self.name = name
        self.children = children
        self.parents: list[_Global] = []
        self.rank = _INF
        self.pending = 0


@dataclass(frozen=True)
class SynthesisStats:
    global_nodes: int
    local_nodes: int
    options: int
    layers: int
    max_worlds: int
    worst_case: int | None


class _AndOrSearch:
    """Layered AND-OR graph over canonical global states.

    OR branching is over (agent, action) options of the agent's local state
    and AND branching over the perspective-sensitive outcomes. Options hang
    off local states, so all global states an agent cannot tell apart share
    the same options, which is what keeps the extracted policy uniform.
    Ranks are the least fixpoint of rank(goal) = 0,
    rank(option) = 1 + max(children), rank(state) = min(options); nodes on
    cycles without an exit keep rank infinity.
    """

    def __init__(self, task: PlanningTask, max_nodes: int):
        self.task = task
        self.max_nodes = max_nodes
        self.nodes: dict[CanonicalState, _Global] = {}
        self.locals: dict[tuple[str, CanonicalState], list[_Option]] = {}
        self.option_count = 0
        self.max_worlds = 0
        self.agents = task.signature.agents
        self.created: list[_Global] = []

    def node(self, s: State, depth: int) -> _Global:
        canon = contract(s)
        hit = self.nodes.get(canon)
        if hit is None:
            if len(self.nodes) >= self.max_nodes:
                raise ResourceLimitError(f"more than {self.max_nodes} global states")
            rep = canon.state
            self.max_worlds = max(self.max_worlds, s.model.size)
            hit = self.nodes[canon] = _Global(canon, rep, evaluate(rep, self.task.goal), depth)
            self.created.append(hit)
        return hit

    def local_options(self, agent: str, local: CanonicalState, depth: int) -> list[_Option]:
        hit = self.locals.get((agent, local))
        if hit is not None:
            return hit
        options = []
        view = local.state
        for name in self.task.actions_of(agent):
            action = self.task.actions[name]
            if not is_applicable(action, view):
                continue
            after = product_update(view, action)
            self.max_worlds = max(self.max_worlds, after.model.size)
            children = [self.node(t, depth + 1) for t in global_states(after)]
            options.append(_Option(local, agent, name, children))
        self.option_count += len(options)
        self.locals[(agent, local)] = options
        return options

    def expand(self, g: _Global) -> None:
        g.expanded = True
        for agent in self.agents:
            for opt in self.local_options(agent, local_view(g.state, agent), g.depth):
                g.options.append(opt)
                opt.parents.append(g)

    def label(self) -> None:
        """Knuth-style shortest-hyperpath labeling over the current graph."""
        heap: list[tuple[int, int, _Global]] = []
        options = {id(o): o for opts in self.locals.values() for o in opts}
        for o in options.values():
            o.rank = _INF
            o.pending = len(o.children)
        tick = 0
        for g in self.nodes.values():
            g.rank = _INF
            if g.goal:
                heapq.heappush(heap, (0, tick, g))
                tick += 1
        done: set[int] = set()
        while heap:
            rank, _, g = heapq.heappop(heap)
            if id(g) in done:
                continue
            done.add(id(g))
            g.rank = rank
            for o in g.parents:
                o.pending -= 1
                if o.pending == 0:
                    o.rank = 1 + max(c.rank for c in o.children)
                    for p in o.parents:
                        if id(p) not in done:
                            heapq.heappush(heap, (o.rank, tick, p))
                            tick += 1

    def link_children(self) -> None:
        """Record option membership on child nodes (children may repeat across options)."""
        for g in self.nodes.values():
            g.parents = []
        for opts in self.locals.values():
            for o in opts:
                for c in set(o.children):
                    c.parents.append(o)
        for opts in self.locals.values():
            for o in opts:
                o.children = list(dict.fromkeys(o.children))


def _extract(search: _AndOrSearch, roots: list[_Global]) -> GlobalPolicy:
    task = search.task
    agent_order = {a: i for i, a in enumerate(search.agents)}
    jp = JointPolicy()
    chosen: dict[tuple[str, CanonicalState], _Option] = {}
    domain: dict[CanonicalState, State] = {}
    work = deque(roots)
    visited: set[CanonicalState] = set()
    while work:
        g = work.popleft()
        if g.canon in visited:
            continue
        visited.add(g.canon)
        domain.setdefault(g.canon, g.state)
        if g.goal:
            continue
        views = {a: local_view(g.state, a) for a in search.agents}
        if any((a, views[a]) in chosen for a in search.agents):
            continue
        best = min(
            (o for o in g.options if o.rank < _INF),
            key=lambda o: (o.rank, agent_order[o.agent], o.name),
        )
        chosen[(best.agent, best.local)] = best
        jp.assign(best.agent, best.local.state, best.name)
        for t in global_states(best.local.state):
            domain.setdefault(contract(t), t)
        work.extend(best.children)
    return joint_to_global(task, jp, domain.values())


def find_ic_policy(
    task: PlanningTask,
    max_nodes: int = 10**6,
    stats: list | None = None,
) -> GlobalPolicy | None:
    """Implicitly coordinated strong policy with optimal worst-case depth, or None.

    Returns None when the fully explored AND-OR graph has no solution and
    raises ResourceLimitError when more than ``max_nodes`` global states
    would be needed. If ``stats`` is a list, a SynthesisStats is appended.
    """
    if max_nodes < 1:
        raise ValueError("max_nodes must be positive")
    search = _AndOrSearch(task, max_nodes)
    roots = list(dict.fromkeys(search.node(s, 0) for s in global_states(task.initial)))
    frontier = [g for g in roots if not g.goal]
    layers = 0
    result = None
    while True:
        search.link_children()
        search.label()
        worst = max(g.rank for g in roots)
        if worst < _INF and layers >= worst:
            result = _extract(search, roots)
            break
        if not frontier:
            if worst < _INF:
                result = _extract(search, roots)
            break
        search.created = []
        for g in frontier:
            search.expand(g)
        frontier = [g for g in search.created if not g.goal]
        layers += 1
    if stats is not None:
        worst_case_depth = max(g.rank for g in roots)
        stats.append(
            SynthesisStats(
                len(search.nodes),
                len(search.locals),
                search.option_count,
                layers,
                search.max_worlds,
                None if worst_case_depth == _INF else int(worst_case_depth),
            )
        )
    return result


# Execution -----------------------------------------------------------------

class Outcome(enum.Enum):
    GOAL_REACHED = "goal-reached"
    STUCK = "stuck"


@dataclass(frozen=True)
class Step:
    state: State
    agent: str
    action: str
    result: State

    @property
    def result_key(self) -> str:
        return contract(self.result).key_hex


@dataclass(frozen=True)
class ExecutionTrace:
    start: State
    steps: tuple[Step, ...]
    outcome: Outcome

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def final(self) -> State:
        return self.steps[-1].result if self.steps else self.start

    @property
    def actions(self) -> tuple[str, ...]:
        return tuple(st.action for st in self.steps)

    def lines(self) -> list[str]:
        out = [f"start: state={contract(self.start).key_hex}"]
        for n, st in enumerate(self.steps, 1):
            out.append(f"step {n}: agent={st.agent} action={st.action} -> state={st.result_key}")
        out.append(f"outcome: {self.outcome.value}")
        return out


def execute(task: PlanningTask, gp: GlobalPolicy, seed: int, strict: bool = True) -> ExecutionTrace:
    """Run the policy once; actual outcomes follow the centralized successors.

    The seeded chooser picks the initial global state, an action among those
    the policy prescribes, and the outcome. With ``strict`` a stuck run or a
    repeated state raises ExecutionError, since neither can happen for a
    strong policy.
    """
    rng = random.Random(seed)
    current = rng.choice(global_states(task.initial))
    start = current
    seen = {contract(current)}
    steps = []
    while not evaluate(current, task.goal):
        names = sorted(gp.actions_at(current))
        if not names:
            if strict:
                raise ExecutionError(f"stuck after {len(steps)} steps at {contract(current).key_hex}")
            return ExecutionTrace(start, tuple(steps), Outcome.STUCK)
        name = rng.choice(names)
        nxt = rng.choice(successors(task, current, name, SuccessorKind.CENTRALIZED))
        steps.append(Step(current, task.owner[name], name, nxt))
        canon = contract(nxt)
        if canon in seen:
            raise ExecutionError(f"state {canon.key_hex} repeats within one execution")
        seen.add(canon)
        current = nxt
    return ExecutionTrace(start, tuple(steps), Outcome.GOAL_REACHED)


def worst_case(
    task: PlanningTask, gp: GlobalPolicy, kind: SuccessorKind = SuccessorKind.CENTRALIZED
) -> tuple[int, tuple[str, ...]]:
    """Longest execution over all choices and outcomes, with one witness action list.

    Raises ExecutionError if some execution gets stuck or can loop.
    """
    memo: dict[CanonicalState, tuple[int, tuple[str, ...]]] = {}
    on_path: set[CanonicalState] = set()

    start = global_states(task.initial)
    # explicit stack: (state, canon, child results pending)
    stack: list[tuple[State, CanonicalState, bool]] = [(s, contract(s), False) for s in start]
    while stack:
        s, canon, expanded = stack.pop()
        if canon in memo and not expanded:
            continue
        if evaluate(s, task.goal):
            memo[canon] = (0, ())
            continue
        names = sorted(gp.actions_at(s))
        if not names:
            raise ExecutionError(f"execution can get stuck at {canon.key_hex}")
        outcomes = [(n, t, contract(t)) for n in names for t in successors(task, s, n, kind)]
        if not expanded:
            if canon in on_path:
                raise ExecutionError(f"execution can loop through {canon.key_hex}")
            on_path.add(canon)
            stack.append((s, canon, True))
            for _, t, c in outcomes:
                if c not in memo:
                    if c in on_path:
                        raise ExecutionError(f"execution can loop through {c.key_hex}")
                    stack.append((t, c, False))
            continue
        on_path.discard(canon)
        best = max(((memo[c][0] + 1, (n, *memo[c][1])) for n, _, c in outcomes), key=lambda x: x[0])
        memo[canon] = best
    return max((memo[contract(s)] for s in start), key=lambda x: x[0])


def reachable_entries(task: PlanningTask, keys: Mapping[str, frozenset[str]]) -> GlobalPolicy:
    """Rebuild a policy from key-indexed action sets by exploring from the initial state.

    Representatives are found by following perspective-sensitive successors
    and the global states each acting agent cannot tell apart. Keys that are
    never reached are left out.
    """
    pending = dict(keys)
    found: list[tuple[State, frozenset[str]]] = []
    queue = deque(global_states(task.initial))
    seen: set[CanonicalState] = set()
    while queue and pending:
        s = queue.popleft()
        canon = contract(s)
        if canon in seen:
            continue
        seen.add(canon)
        names = pending.pop(canon.key_hex, None)
        if names is None:
            continue
        found.append((s, names))
        for name in sorted(names):
            if name not in task.actions:
                continue
            agent = task.owner[name]
            local = perspective_shift(s, agent)
            queue.extend(global_states(local))
            model, designated = update_designated(local, task.actions[name])
            queue.extend(State(model, frozenset({w})) for w in sorted(designated))
    return GlobalPolicy(found)
