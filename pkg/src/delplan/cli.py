"""Command-line interface.

Exit status: 0 success or solution found, 1 proven no solution (or a
negative check), 2 search budget exhausted, 3 input error.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from delplan.bench.cards import russian_cards
from delplan.bench.domains import apartment, letter, mailcheck, mailtell
from delplan.bench.graphs import WsParams, watts_strogatz
from delplan.bench.trials import PUBLISHED_HANDS, ROW_FIELDS, cards_trial, run_batch, sample_pair
from delplan.core import DelError, PlanningTask
from delplan.logic import PlanMode
from delplan.policy import (
    ExecutionError,
    ResourceLimitError,
    SuccessorKind,
    execute,
    find_ic_policy,
    validate_policy,
)
from delplan.policyfile import PolicyFileError, read_policy, write_policy
from delplan.seqplan import search_plan, verify_plan
from delplan.taskfile import TaskSemanticError, TaskSyntaxError, load_task, serialize_task

EXIT_OK, EXIT_NONE, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _task(args) -> PlanningTask:
    task = load_task(args.task)
    if getattr(args, "perspective", None):
        if args.perspective not in task.signature.agents:
            raise InputError(f"unknown agent {args.perspective!r}")
        task = task.for_agent(args.perspective)
    return task


def cmd_plan(args) -> int:
    task = _task(args)
    result = search_plan(task, PlanMode(args.mode), args.max_depth)
    if result.plan is not None:
        print(" ".join(result.plan))
        return EXIT_OK
    if result.exhausted:
        print("no plan exists")
        return EXIT_NONE
    print(f"no plan within depth {args.max_depth}")
    return EXIT_BUDGET


def cmd_check(args) -> int:
    task = _task(args)
    plan = [p.strip() for p in args.plan.split(",") if p.strip()]
    for name in plan:
        if name not in task.actions:
            raise InputError(f"unknown action {name!r}")
    if verify_plan(task, plan, PlanMode(args.mode)):
        print("plan")
        return EXIT_OK
    print("not a plan")
    return EXIT_NONE


def _synthesize(task: PlanningTask, max_nodes: int):
    try:
        return find_ic_policy(task, max_nodes), EXIT_OK
    except ResourceLimitError as e:
        print(f"budget exhausted: {e}", file=sys.stderr)
        return None, EXIT_BUDGET


def cmd_policy(args) -> int:
    task = _task(args)
    gp, status = _synthesize(task, args.max_nodes)
    if status != EXIT_OK:
        return status
    if gp is None:
        print("no implicitly coordinated policy exists")
        return EXIT_NONE
    _emit(write_policy(task, gp), args.output)
    return EXIT_OK


def _read_policy(task: PlanningTask, path: str):
    with open(path, encoding="utf-8") as fh:
        gp, unresolved = read_policy(task, fh.read())
    for key in unresolved:
        print(f"warning: policy entry {key} matches no reachable state", file=sys.stderr)
    return gp


def cmd_validate(args) -> int:
    task = _task(args)
    gp = _read_policy(task, args.policy)
    kind = SuccessorKind(args.successor)
    report = validate_policy(task, gp, kind)
    print(report.summary())
    return EXIT_OK if report.valid else EXIT_NONE


def cmd_exec(args) -> int:
    task = _task(args)
    if args.policy:
        gp = _read_policy(task, args.policy)
    else:
        gp, status = _synthesize(task, args.max_nodes)
        if status != EXIT_OK:
            return status
        if gp is None:
            print("no implicitly coordinated policy exists")
            return EXIT_NONE
    try:
        trace = execute(task, gp, args.seed, strict=False)
    except ExecutionError as e:
        print(f"execution failed: {e}", file=sys.stderr)
        return EXIT_NONE
    _emit("\n".join(trace.lines()) + "\n", args.output)
    return EXIT_OK if trace.outcome.value == "goal-reached" else EXIT_NONE


def _generated_task(args) -> PlanningTask:
    if args.domain == "apartment":
        return apartment(args.announce)
    if args.domain == "letter":
        return letter()
    if args.domain == "cards":
        return russian_cards().task_for_hands(PUBLISHED_HANDS)
    graph = watts_strogatz(WsParams(args.agents, args.k, args.beta, args.seed))
    sender, addressee = sample_pair(graph, args.seed)
    sender = args.sender if args.sender is not None else sender
    addressee = args.addressee if args.addressee is not None else addressee
    if sender == addressee:
        raise InputError("sender and addressee must differ")
    build = mailtell if args.domain == "mailtell" else mailcheck
    return build(graph, sender, addressee)


def cmd_gen(args) -> int:
    _emit(serialize_task(_generated_task(args)), args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.domain == "cards":
        report = cards_trial()
        text = "".join(f"{k}: {v}\n" for k, v in report.items())
        _emit(text, args.output)
        return EXIT_OK if report["valid"] else EXIT_NONE
    rows = run_batch(args.domain, args.trials, args.agents, args.k, args.beta, args.seed)
    lines = [",".join(ROW_FIELDS)] + [r.as_csv() for r in rows]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="delplan", description="Epistemic planning with implicit coordination")
    sub = parser.add_subparsers(dest="command", required=True)

    def task_args(p, perspective=True):
        p.add_argument("--task", required=True, help="task file")
        if perspective:
            p.add_argument("--perspective", metavar="AGENT", help="plan from this agent's associated task")

    p = sub.add_parser("plan", help="find a shortest sequential plan")
    task_args(p)
    p.add_argument("--mode", choices=[m.value for m in PlanMode], default="ic")
    p.add_argument("--max-depth", type=int, default=20)
    p.set_defaults(run=cmd_plan)

    p = sub.add_parser("check", help="verify a sequential plan")
    task_args(p)
    p.add_argument("--plan", required=True, help="comma-separated action names")
    p.add_argument("--mode", choices=[m.value for m in PlanMode], default="ic")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("policy", help="synthesize an implicitly coordinated policy")
    task_args(p)
    p.add_argument("--max-nodes", type=int, default=10**6)
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_policy)

    p = sub.add_parser("validate-policy", help="check a policy file against a task")
    task_args(p)
    p.add_argument("--policy", required=True)
    p.add_argument("--successor", choices=[k.value for k in SuccessorKind], default="ps")
    p.set_defaults(run=cmd_validate)

    p = sub.add_parser("exec", help="run one seeded execution of a policy")
    task_args(p)
    p.add_argument("--policy", help="policy file (synthesized when omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-nodes", type=int, default=10**6)
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_exec)

    p = sub.add_parser("gen", help="write a benchmark task file")
    p.add_argument("domain", choices=["mailtell", "mailcheck", "cards", "apartment", "letter"])
    p.add_argument("--agents", type=int, default=10)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sender")
    p.add_argument("--addressee")
    p.add_argument("--announce", action="store_true", help="apartment: add Anne's announcement")
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("bench", help="run seeded benchmark trials")
    p.add_argument("domain", choices=["mailtell", "mailcheck", "cards"])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--agents", type=int, default=10)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.run(args)
    except (OSError, InputError, TaskSyntaxError, TaskSemanticError, PolicyFileError, DelError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
