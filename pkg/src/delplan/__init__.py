"""Epistemic planning with implicit coordination over DEL models."""

from delplan.bisim import CanonicalState, contract, equivalent
from delplan.core import (
    Action,
    EpistemicModel,
    EventModel,
    Partition,
    PlanningTask,
    Postcondition,
    Signature,
    State,
    global_states,
    is_applicable,
    is_local_for,
    perspective_shift,
    product_update,
)
from delplan.logic import PlanMode, evaluate, parse_formula, plan_formula
from delplan.policy import (
    GlobalPolicy,
    JointPolicy,
    SuccessorKind,
    execute,
    find_ic_policy,
    global_to_joint,
    joint_to_global,
    successors,
    validate_policy,
)
from delplan.seqplan import find_plan, verify_plan
from delplan.taskfile import parse_task, serialize_task

__all__ = [
    "Action", "EpistemicModel", "EventModel", "Partition", "PlanningTask", "Postcondition", "Signature",
    "State", "global_states", "is_applicable", "is_local_for", "perspective_shift", "product_update",
    "PlanMode", "evaluate", "parse_formula", "plan_formula", "CanonicalState", "contract", "equivalent",
    "find_plan", "verify_plan", "GlobalPolicy", "JointPolicy", "SuccessorKind", "execute", "find_ic_policy",
    "global_to_joint", "joint_to_global", "successors", "validate_policy", "parse_task", "serialize_task",
]
