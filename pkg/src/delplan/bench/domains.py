"""Task generators: the apartment key scenario and the letter-passing family.

Letter passing (MailTell and MailCheck) uses the propositions ``at-i`` (the
letter is with agent i) and ``for-i`` (agent i is the addressee). The initial
model has one world per possible addressee other than the sender. In
MailTell the sender knows the addressee and every other agent considers all
addressees possible; passing the letter along an edge i-j tells j (and only
j) the addressee. In MailCheck nobody knows the addressee at the start, the
holder can privately read the address (``check``), and passing requires the
holder to know the letter is for someone else. Passing is public in both
variants, so the letter position stays common knowledge.

Worst-case cost accounting for MailCheck: an optimal policy walks the full
path (shortest walk visiting every agent) and every agent reached for the
first time, other than the last one, checks once. The worst case is
therefore ``full_path_length + (N - 2)`` actions.
"""

from __future__ import annotations

from collections.abc import Sequence

from delplan.bench.graphs import NeighborhoodGraph, WsParams, path_graph, watts_strogatz
from delplan.core import (
    Action,
    EpistemicModel,
    EventModel,
    Partition,
    PlanningTask,
    Postcondition,
    Signature,
    State,
    perspective_shift,
    public_action,
)
from delplan.formula import Atom, Implies, Knows, Not, conjunction

__all__ = [
    "apartment",
    "letter",
    "mailtell",
    "mailcheck",
    "pass_name",
    "check_name",
    "letter_goal",
]


def apartment(with_announce: bool = False) -> PlanningTask:
    """Anne knows the key is under the mat (m); Bob does not; the goal is that Bob has it (h).

    The initial state is global with the actual world ``w`` (m true). Bob's
    ``try-take`` succeeds exactly when m holds and Anne cannot tell the two
    outcomes apart. ``announce`` is Anne's public announcement of m.
    """
    sig = Signature(("anne", "bob"), ("m", "h"))
    model = EpistemicModel.build(sig, {"w": {"m"}, "v": set()}, {"bob": [["w", "v"]]})
    m, h = Atom("m"), Atom("h")
    take_events = EventModel(
        sig,
        (m, Not(m)),
        (Postcondition({"h"}, {"m"}), Postcondition()),
        (Partition.total(2), Partition.discrete(2)),
        ("e", "f"),
    )
    actions = {"try-take": Action("try-take", take_events, frozenset({0, 1}))}
    owner = {"try-take": "bob"}
    if with_announce:
        actions["announce"] = public_action("announce", sig, m)
        owner["announce"] = "anne"
    return PlanningTask(State(model, frozenset({0})), actions, owner, h)


def pass_name(i: str, j: str, agents: Sequence[str]) -> str:
    return f"a{i}{j}" if all(len(a) == 1 for a in agents) else f"a{i}_{j}"


def check_name(i: str) -> str:
    return f"check{i}" if len(i) == 1 else f"check_{i}"


def letter_goal(agents: Sequence[str]):
    """Every agent that is the addressee has the letter."""
    return conjunction(Implies(Atom(f"for-{i}"), Atom(f"at-{i}")) for i in agents)


def _network(network: WsParams | NeighborhoodGraph) -> NeighborhoodGraph:
    return watts_strogatz(network) if isinstance(network, WsParams) else network


def _letter_setup(graph: NeighborhoodGraph, sender: str, addressee: str, sender_knows: bool):
    agents = graph.nodes
    if sender not in agents or addressee not in agents:
        raise ValueError("sender and addressee must be nodes of the graph")
    if sender == addressee:
        raise ValueError("sender and addressee must differ")
    props = tuple(f"at-{i}" for i in agents) + tuple(f"for-{i}" for i in agents)
    sig = Signature(agents, props)
    candidates = [k for k in agents if k != sender]
    valuation = tuple(frozenset({f"at-{sender}", f"for-{k}"}) for k in candidates)
    n = len(candidates)
    relations = tuple(
        Partition.discrete(n) if (a == sender and sender_knows) else Partition.total(n) for a in agents
    )
    model = EpistemicModel(sig, valuation, relations, tuple(f"w{k}" for k in candidates))
    actual = candidates.index(addressee)
    return sig, model, candidates, actual


def _directed_edges(graph: NeighborhoodGraph) -> list[tuple[str, str]]:
    return sorted([*graph.edges, *((v, u) for u, v in graph.edges)],
                  key=lambda e: (graph.nodes.index(e[0]), graph.nodes.index(e[1])))


def mailtell(network: WsParams | NeighborhoodGraph, sender: str, addressee: str) -> PlanningTask:
    """Letter passing where each pass privately tells the receiver the addressee.

    Returns the sender's associated task; the sender knows the addressee, so
    its initial state is global.
    """
    graph = _network(network)
    sig, model, candidates, actual = _letter_setup(graph, sender, addressee, sender_knows=True)
    agents = graph.nodes
    actions, owner = {}, {}
    n = len(candidates)
    for i, j in _directed_edges(graph):
        events = EventModel(
            sig,
            tuple(Atom(f"at-{i}") & Atom(f"for-{k}") for k in candidates),
            tuple(Postcondition({f"at-{j}"}, {f"at-{i}"}) for _ in candidates),
            tuple(Partition.discrete(n) if a == j else Partition.total(n) for a in agents),
            tuple(f"for-{k}" for k in candidates),
        )
        name = pass_name(i, j, agents)
        actions[name] = Action(name, events, frozenset(range(n)))
        owner[name] = i
    initial = perspective_shift(State(model, frozenset({actual})), sender)
    return PlanningTask(initial, actions, owner, letter_goal(agents))


def letter() -> PlanningTask:
    """Three agents on the path 1-2-3; agent 1 holds a letter for agent 3."""
    return mailtell(path_graph(("1", "2", "3")), "1", "3")


def mailcheck(network: WsParams | NeighborhoodGraph, sender: str, addressee: str) -> PlanningTask:
    """Letter passing where the holder must read the address before passing on.

    Nobody knows the addressee initially, so the returned (sender's) task
    designates every world.
    """
    graph = _network(network)
    sig, model, candidates, actual = _letter_setup(graph, sender, addressee, sender_knows=False)
    agents = graph.nodes
    actions, owner = {}, {}
    for i in agents:
        at_i, for_i = Atom(f"at-{i}"), Atom(f"for-{i}")
        events = EventModel(
            sig,
            (at_i & for_i, at_i & Not(for_i)),
            (Postcondition(), Postcondition()),
            tuple(Partition.discrete(2) if a == i else Partition.total(2) for a in agents),
            ("mine", "other"),
        )
        name = check_name(i)
        actions[name] = Action(name, events, frozenset({0, 1}))
        owner[name] = i
    for i, j in _directed_edges(graph):
        pre = Atom(f"at-{i}") & Knows(i, Not(Atom(f"for-{i}")))
        name = pass_name(i, j, agents)
        actions[name] = public_action(name, sig, pre, Postcondition({f"at-{j}"}, {f"at-{i}"}))
        owner[name] = i
    initial = perspective_shift(State(model, frozenset({actual})), sender)
    return PlanningTask(initial, actions, owner, letter_goal(agents))

