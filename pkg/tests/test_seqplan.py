import pytest
from hypothesis import given, settings

from delplan.bench.domains import apartment, letter
from delplan.core import is_applicable, perspective_shift, product_update
from delplan.logic import PlanMode, UnknownActionError, plan_formula
from delplan.seqplan import find_plan, resolve_plan, search_plan, verify_plan
from oracle import all_sequences, state_holds
from strategies import any_tasks


def reference_verify(task, plan, mode):
    formula = plan_formula(resolve_plan(task, plan), task.goal, task.owner, mode)
    return state_holds(task.initial, formula)


def test_apartment_plans():
    task = apartment()
    assert verify_plan(task, ["try-take"], PlanMode.STANDARD)
    assert verify_plan(task.for_agent("anne"), ["try-take"], PlanMode.STANDARD)
    assert not verify_plan(task.for_agent("bob"), ["try-take"], PlanMode.STANDARD)
    assert not verify_plan(task.for_agent("anne"), ["try-take"], PlanMode.IC)
    assert verify_plan(apartment(True).for_agent("anne"), ["announce", "try-take"], PlanMode.IC)


def test_apartment_search():
    assert find_plan(apartment(True).for_agent("anne"), PlanMode.IC, 5) == ("announce", "try-take")
    result = search_plan(apartment().for_agent("anne"), PlanMode.IC, 10)
    assert result.plan is None and result.exhausted


def test_apartment_search_agrees_with_brute_force():
    task = apartment(True).for_agent("anne")
    valid = [p for p in all_sequences(task.action_names, 2) if reference_verify(task, p, PlanMode.IC)]
    assert min(valid, key=len) == find_plan(task, PlanMode.IC, 2)


def test_letter_plans():
    task = letter()
    for agent, expected in [("1", True), ("2", False), ("3", False)]:
        assert verify_plan(task.for_agent(agent), ["a12", "a23"], PlanMode.IC) == expected
    assert find_plan(task.for_agent("1"), PlanMode.IC, 5) == ("a12", "a23")
    result = search_plan(task.for_agent("2"), PlanMode.IC, 10)
    assert result.plan is None and result.exhausted


def test_goal_at_start_gives_empty_plan():
    task = apartment()
    done = task.with_initial(product_update(task.initial, task.action("try-take")))
    assert find_plan(done, PlanMode.IC, 3) == ()
    assert verify_plan(done, [], PlanMode.STANDARD)


def test_unknown_action_is_an_error():
    with pytest.raises(UnknownActionError):
        verify_plan(apartment(), ["fly"], PlanMode.IC)


def test_depth_zero_is_not_exhaustive_when_actions_remain():
    result = search_plan(apartment(True).for_agent("anne"), PlanMode.IC, 0)
    assert result.plan is None and not result.exhausted


@settings(max_examples=150)
@given(any_tasks(max_actions=3, max_worlds=3))
def test_verify_matches_reference(task):
    for plan in all_sequences(task.action_names, 2):
        for mode in PlanMode:
            assert verify_plan(task, plan, mode) == reference_verify(task, plan, mode)


@settings(max_examples=150)
@given(any_tasks(max_actions=3, max_worlds=3))
def test_ic_recursion(task):
    for plan in all_sequences(task.action_names, 3):
        if not plan:
            continue
        first = task.action(plan[0])
        view = perspective_shift(task.initial, task.owner[plan[0]])
        expected = is_applicable(first, view) and verify_plan(
            task.with_initial(product_update(view, first)), plan[1:], PlanMode.IC
        )
        assert verify_plan(task, plan, PlanMode.IC) == expected


@settings(max_examples=150)
@given(any_tasks(max_actions=3, max_worlds=3, global_initial=True))
def test_ic_implies_standard_on_global_tasks(task):
    for plan in all_sequences(task.action_names, 3):
        if verify_plan(task, plan, PlanMode.IC):
            assert verify_plan(task, plan, PlanMode.STANDARD)


@settings(max_examples=150)
@given(any_tasks(max_actions=3, max_worlds=3))
def test_search_is_sound_and_optimal(task):
    for mode in PlanMode:
        plan = find_plan(task, mode, 3)
        lengths = [len(p) for p in all_sequences(task.action_names, 3) if reference_verify(task, p, mode)]
        if plan is None:
            assert not lengths
        else:
            assert reference_verify(task, plan, mode)
            assert len(plan) == min(lengths)


@settings(max_examples=100)
@given(any_tasks(max_actions=3, max_worlds=3))
def test_dedup_does_not_change_plan_length(task):
    for mode in PlanMode:
        with_dedup = search_plan(task, mode, 3, dedup=True).plan
        without = search_plan(task, mode, 3, dedup=False).plan
        assert (with_dedup is None) == (without is None)
        if with_dedup is not None:
            assert len(with_dedup) == len(without)
