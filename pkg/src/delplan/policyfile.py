"""Text form of global policies.

::

    # policy
    # task-sha256: <digest of the serialized task>
    <state-key-hex> : <action>[, <action>]*

Keys are canonical state fingerprints, so reading a policy needs the task:
representatives are recovered by exploring from the task's initial state.
"""

from __future__ import annotations

import re

from delplan.core import PlanningTask
from delplan.policy import GlobalPolicy, reachable_entries
from delplan.taskfile import task_digest

__all__ = ["PolicyFileError", "write_policy", "read_policy"]

_ENTRY = re.compile(r"^(?P<key>[0-9a-f]{32})\s*:\s*(?P<actions>.+)$")
_DIGEST = re.compile(r"^#\s*task-sha256:\s*(?P<digest>[0-9a-f]{64})\s*$")


class PolicyFileError(ValueError):
    pass


def write_policy(task: PlanningTask, gp: GlobalPolicy) -> str:
    lines = ["# policy", f"# task-sha256: {task_digest(task)}"]
    for key, actions in gp.items_by_key():
        lines.append(f"{key} : {', '.join(sorted(actions))}")
    return "\n".join(lines) + "\n"


def read_policy(task: PlanningTask, text: str, check_digest: bool = True) -> tuple[GlobalPolicy, list[str]]:
    """Parse a policy for ``task``; also returns the keys no reachable state matched."""
    keys: dict[str, frozenset[str]] = {}
    digest = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        m = _DIGEST.match(line)
        if m:
            digest = m.group("digest")
            continue
        if line.startswith("#"):
            continue
        m = _ENTRY.match(line)
        if m is None:
            raise PolicyFileError(f"line {lineno}: expected '<key> : <actions>'")
        names = frozenset(a.strip() for a in m.group("actions").split(","))
        if "" in names:
            raise PolicyFileError(f"line {lineno}: empty action name")
        keys[m.group("key")] = keys.get(m.group("key"), frozenset()) | names
    if check_digest and digest is not None and digest != task_digest(task):
        raise PolicyFileError("policy was written for a different task")
    gp = reachable_entries(task, keys)
    found = {k for k, _ in gp.items_by_key()}
    return gp, sorted(set(keys) - found)
