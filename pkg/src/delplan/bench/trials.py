"""Seeded benchmark trials producing one row per instance.

Trial ``t`` of a batch with base seed ``s`` uses instance seed ``s + t``.
The graph comes from ``watts_strogatz`` with that seed and the sender and
addressee are a uniformly random ordered pair of distinct agents drawn from
``random.Random(f"pair:{seed}")``.
"""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass, fields

from delplan.bench.cards import ALICE_HAND, russian_cards
from delplan.bench.domains import check_name, mailcheck, mailtell
from delplan.bench.graphs import NeighborhoodGraph, WsParams, full_path_length, watts_strogatz
from delplan.logic import PlanMode
from delplan.policy import SuccessorKind, find_ic_policy, validate_policy, worst_case
from delplan.seqplan import search_plan

__all__ = ["TrialRow", "sample_pair", "mailtell_trial", "mailcheck_trial", "cards_trial", "run_batch", "ROW_FIELDS"]

# The published announcement used by the verification trial.
PUBLISHED_HANDS = (ALICE_HAND, (0, 3, 4), (1, 5, 6), (2, 3, 6), (2, 4, 5))


@dataclass(frozen=True)
class TrialRow:
    trial: int
    N: int
    K: int
    beta: float
    seed: int
    sender: str
    addressee: str
    path_length: int
    result_length: int | None
    wall_time: float
    checks: int = 0
    max_worlds: int = 0

    def as_csv(self) -> str:
        values = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and f.name == "wall_time":
                values.append(f"{v:.4f}")
            else:
                values.append("" if v is None else str(v))
        return ",".join(values)


ROW_FIELDS = tuple(f.name for f in fields(TrialRow))


def sample_pair(graph: NeighborhoodGraph, seed: int) -> tuple[str, str]:
    sender, addressee = random.Random(f"pair:{seed}").sample(list(graph.nodes), 2)
    return sender, addressee


def mailtell_trial(trial: int, n: int, k: int, beta: float, seed: int, max_depth: int = 20) -> TrialRow:
    """IC plan length versus the sender-addressee distance."""
    graph = watts_strogatz(WsParams(n, k, beta, seed))
    sender, addressee = sample_pair(graph, seed)
    task = mailtell(graph, sender, addressee)
    start = time.perf_counter()
    result = search_plan(task, PlanMode.IC, max_depth)
    elapsed = time.perf_counter() - start
    length = len(result.plan) if result.plan is not None else None
    return TrialRow(trial, n, k, beta, seed, sender, addressee, graph.distance(sender, addressee), length, elapsed)


def mailcheck_trial(trial: int, n: int, k: int, beta: float, seed: int, max_nodes: int = 10**6) -> TrialRow:
    """Worst-case execution length of a synthesized policy versus the full path length."""
    graph = watts_strogatz(WsParams(n, k, beta, seed))
    sender, addressee = sample_pair(graph, seed)
    task = mailcheck(graph, sender, addressee)
    stats: list = []
    start = time.perf_counter()
    gp = find_ic_policy(task, max_nodes, stats=stats)
    elapsed = time.perf_counter() - start
    length, checks = None, 0
    if gp is not None:
        length, witness = worst_case(task, gp)
        check_names = {check_name(i) for i in graph.nodes}
        checks = sum(1 for a in witness if a in check_names)
    return TrialRow(
        trial, n, k, beta, seed, sender, addressee, full_path_length(graph, sender), length, elapsed,
        checks, stats[0].max_worlds,
    )


def cards_trial() -> dict:
    """Validate the published two-stage protocol; returns a small report."""
    start = time.perf_counter()
    rc = russian_cards()
    task = rc.task_for_hands(PUBLISHED_HANDS)
    gp = find_ic_policy(task)
    ps = validate_policy(task, gp, SuccessorKind.PERSPECTIVE_SENSITIVE) if gp is not None else None
    return {
        "worlds": rc.initial.model.size,
        "candidates": len(rc.candidates),
        "policy_entries": 0 if gp is None else len(gp),
        "valid": bool(ps and ps.valid),
        "wall_time": time.perf_counter() - start,
    }


def run_batch(kind: str, trials: int, n: int, k: int, beta: float, seed: int, **options) -> list[TrialRow]:
    runner = {"mailtell": mailtell_trial, "mailcheck": mailcheck_trial}[kind]
    return [runner(t, n, k, beta, seed + t, **options) for t in range(trials)]


def rows_as_dicts(rows: list[TrialRow]) -> list[dict]:
    return [asdict(r) for r in rows]
