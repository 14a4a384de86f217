"""Verification and breadth-first search for sequential plans."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from delplan.bisim import contract
from delplan.core import Action, PlanningTask, State, is_applicable, perspective_shift, product_update
from delplan.logic import PlanMode, UnknownActionError, evaluate, plan_formula

__all__ = ["SearchResult", "resolve_plan", "verify_plan", "search_plan", "find_plan", "expand"]


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a plan search.

    ``plan`` is None when no plan was found; ``exhausted`` then tells whether
    the whole reachable space was explored (no plan exists at any depth) or
    the depth limit cut the search short.
    """

    plan: tuple[str, ...] | None
    exhausted: bool
    expanded: int
    generated: int

    @property
    def found(self) -> bool:
        return self.plan is not None


def resolve_plan(task: PlanningTask, plan: Sequence[str]) -> list[Action]:
    actions = []
    for name in plan:
        if name not in task.actions:
            raise UnknownActionError(f"unknown action {name!r}")
        actions.append(task.actions[name])
    return actions


def verify_plan(task: PlanningTask, plan: Sequence[str], mode: PlanMode) -> bool:
    """Check the plan formula of ``plan`` on the task's initial state."""
    phi = plan_formula(resolve_plan(task, plan), task.goal, task.owner, mode)
    return evaluate(task.initial, phi)


def expand(task: PlanningTask, s: State, name: str, mode: PlanMode) -> State | None:
    """Successor of ``s`` under action ``name`` in the search, or None if not applicable.

    In IC mode the state is first shifted to the owner's perspective; the
    applicability test and the update both happen there.
    """
    action = task.actions[name]
    if mode is PlanMode.IC:
        s = perspective_shift(s, task.owner[name])
    if not is_applicable(action, s):
        return None
    return product_update(s, action)


def search_plan(task: PlanningTask, mode: PlanMode, max_depth: int, dedup: bool = True) -> SearchResult:
    """Breadth-first search for a shortest plan, ties broken by action names.

    With ``dedup`` bisimilar states are expanded once; states are stored in
    contracted form either way, which keeps models small without changing
    any truth value.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be non-negative")
    names = task.action_names
    start = contract(task.initial)
    if evaluate(start.state, task.goal):
        return SearchResult((), True, 0, 1)
    seen = {start}
    frontier: list[tuple[State, tuple[str, ...]]] = [(start.state, ())]
    expanded = generated = 0
    for _ in range(max_depth):
        layer = []
        for s, plan in frontier:
            expanded += 1
            for name in names:
                t = expand(task, s, name, mode)
                if t is None:
                    continue
                generated += 1
                canon = contract(t)
                if dedup:
                    if canon in seen:
                        continue
                    seen.add(canon)
                if evaluate(canon.state, task.goal):
                    return SearchResult((*plan, name), False, expanded, generated)
                layer.append((canon.state, (*plan, name)))
        frontier = layer
        if not frontier:
            return SearchResult(None, True, expanded, generated)
    return SearchResult(None, False, expanded, generated)


def find_plan(task: PlanningTask, mode: PlanMode, max_depth: int) -> tuple[str, ...] | None:
    return search_plan(task, mode, max_depth).plan
