import pytest
from hypothesis import given, settings

from delplan.bench.cards import russian_cards
from delplan.bench.domains import apartment, letter, mailcheck
from delplan.bench.graphs import path_graph
from delplan.bench.trials import PUBLISHED_HANDS
from delplan.bisim import equivalent
from delplan.policy import find_ic_policy
from delplan.policyfile import PolicyFileError, read_policy, write_policy
from delplan.taskfile import TaskSemanticError, TaskSyntaxError, parse_task, serialize_task, task_digest
from strategies import any_tasks

APARTMENT = """\
# the key under the mat
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
"""


def same_task(a, b):
    assert a.signature == b.signature
    assert equivalent(a.initial, b.initial)
    assert a.initial.model.valuation == b.initial.model.valuation
    assert a.goal == b.goal
    assert dict(a.owner) == dict(b.owner)
    for name in a.action_names:
        x, y = a.action(name), b.action(name)
        assert x.designated == y.designated
        assert x.event_model.pre == y.event_model.pre
        assert x.event_model.post == y.event_model.post
        assert [p.blocks for p in x.event_model.relations] == [p.blocks for p in y.event_model.relations]


def test_handwritten_apartment_matches_generator():
    same_task(parse_task(APARTMENT), apartment())


@pytest.mark.parametrize(
    "make",
    [
        lambda: apartment(),
        lambda: apartment(True),
        letter,
        lambda: mailcheck(path_graph("1234"), "2", "4"),
        lambda: russian_cards().task_for_hands(PUBLISHED_HANDS),
    ],
)
def test_generator_round_trip(make):
    task = make()
    text = serialize_task(task)
    again = parse_task(text)
    same_task(task, again)
    assert serialize_task(again) == text
    assert task_digest(again) == task_digest(task)


@settings(max_examples=200)
@given(any_tasks(max_actions=3, max_worlds=4))
def test_random_round_trip(task):
    again = parse_task(serialize_task(task))
    same_task(task, again)


def test_not_local_for_owner():
    text = APARTMENT.replace("designated: e, f", "designated: e").replace("owner=bob", "owner=anne")
    with pytest.raises(TaskSemanticError, match="not local for owner"):
        parse_task(text)


def test_undeclared_proposition_is_named():
    with pytest.raises(TaskSemanticError, match="'k'"):
        parse_task(APARTMENT.replace('goal: "h"', 'goal: "k"'))
    with pytest.raises(TaskSemanticError, match="'z'"):
        parse_task(APARTMENT.replace("w {m}", "w {m, z}"))


def test_undeclared_agent_is_named():
    with pytest.raises(TaskSemanticError, match="carol"):
        parse_task(APARTMENT.replace("owner=bob", "owner=carol"))


def test_syntax_error_position():
    with pytest.raises(TaskSyntaxError) as info:
        parse_task(APARTMENT.replace('goal: "h"', 'goal: "h &"'))
    assert info.value.line == 14
    with pytest.raises(TaskSyntaxError) as info:
        parse_task(APARTMENT.replace("designated: w\n", "designated w\n"))
    assert info.value.line == 8


def test_missing_sections():
    with pytest.raises(TaskSemanticError, match="missing goal"):
        parse_task(APARTMENT.replace('goal: "h"\n', ""))
    with pytest.raises(TaskSemanticError):
        parse_task(APARTMENT.replace("designated: w\n", ""))


def test_duplicate_world():
    with pytest.raises(TaskSemanticError, match="duplicate"):
        parse_task(APARTMENT.replace("  v {}", "  w {}"))


def test_inline_worlds():
    text = APARTMENT.replace("worlds:\n  w {m}\n", "worlds: w {m}\n")
    same_task(parse_task(text), apartment())


def test_policy_file_round_trip():
    task = letter().for_agent("2")
    gp = find_ic_policy(task)
    text = write_policy(task, gp)
    assert text.startswith("# policy\n# task-sha256: ")
    back, unresolved = read_policy(task, text)
    assert back == gp and unresolved == []


def test_policy_file_for_other_task():
    task = letter().for_agent("2")
    text = write_policy(task, find_ic_policy(task))
    with pytest.raises(PolicyFileError):
        read_policy(apartment(), text)
    with pytest.raises(PolicyFileError):
        read_policy(task, text + "garbage\n")


def test_unresolved_policy_keys_are_reported():
    task = letter().for_agent("2")
    text = write_policy(task, find_ic_policy(task)) + "0" * 32 + " : a12\n"
    back, unresolved = read_policy(task, text)
    assert unresolved == ["0" * 32]
    assert len(back) == 3
