import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delplan.bench.domains import apartment
from delplan.core import Signature, is_applicable, perspective_shift, product_update
from delplan.formula import BOT, TOP, And, Applied, Atom, Box, Common, Diamond, Implies, Knows, Not, Or
from delplan.logic import (
    FormulaSyntaxError,
    PlanMode,
    UnknownActionError,
    UnknownSymbolError,
    evaluate,
    parse_formula,
    plan_formula,
)
from oracle import state_holds
from strategies import AGENTS, actions, dynamic_formulas, global_states_, static_formulas, states

m, h = Atom("m"), Atom("h")
SIG = Signature(("anne", "bob"), ("m", "h"))


def test_parse_knowledge_and_negation():
    assert parse_formula("K[anne] m & !K[bob] m", SIG) == And(Knows("anne", m), Not(Knows("bob", m)))


def test_parse_common_knowledge():
    assert parse_formula("C (h | !h)", SIG) == Common(Or(h, Not(h)))


def test_parse_precedence_and_associativity():
    assert parse_formula("m | h & m") == Or(m, And(h, m))
    assert parse_formula("m -> h -> m") == Implies(m, Implies(h, m))
    assert parse_formula("!m & h") == And(Not(m), h)
    assert parse_formula("K[anne] m -> h") == Implies(Knows("anne", m), h)
    assert parse_formula("true & false") == And(TOP, BOT)


def test_parse_hyphenated_identifiers():
    assert parse_formula("for-1 -> at-1") == Implies(Atom("for-1"), Atom("at-1"))


@pytest.mark.parametrize("text, position", [("m &", 3), ("(m", 0), ("m h", 2), ("K[anne m", 1), ("&", 0)])
def test_syntax_errors_carry_a_position(text, position):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    assert info.value.position == position


def test_unknown_symbols_are_named():
    with pytest.raises(UnknownSymbolError, match="zz"):
        parse_formula("m & zz", SIG)
    with pytest.raises(UnknownSymbolError, match="carol"):
        parse_formula("K[carol] m", SIG)


def test_apartment_knowledge_formula():
    s = apartment().initial
    assert evaluate(s, parse_formula("K[anne] m & !K[bob] m & K[anne] !K[bob] m", SIG))


def test_apartment_updates():
    task = apartment()
    s, take = task.initial, task.action("try-take")
    assert evaluate(product_update(s, take), Common(h))
    assert not evaluate(product_update(perspective_shift(s, "bob"), take), h)
    assert evaluate(s, TOP)


def test_plan_formula_shapes():
    task = apartment(True)
    announce, take = task.action("announce"), task.action("try-take")
    assert plan_formula([], h, task.owner, PlanMode.IC) == h
    assert plan_formula([take], h, task.owner, PlanMode.IC) == Knows("bob", Applied(take, h))
    assert plan_formula([announce, take], h, task.owner, PlanMode.IC) == Knows(
        "anne", Applied(announce, Knows("bob", Applied(take, h)))
    )
    assert plan_formula([announce, take], h, task.owner, PlanMode.STANDARD) == Applied(
        announce, Applied(take, h)
    )


def test_plan_formula_unknown_owner():
    task = apartment()
    with pytest.raises(UnknownActionError):
        plan_formula([task.action("try-take")], h, {}, PlanMode.IC)


@settings(max_examples=300)
@given(states(max_worlds=5), static_formulas(max_depth=3))
def test_evaluate_matches_reference_semantics(s, phi):
    assert evaluate(s, phi) == state_holds(s, phi)


@settings(max_examples=150)
@given(st.data())
def test_dynamic_evaluation_matches_reference_semantics(data):
    s = data.draw(states(max_worlds=3))
    pool = [data.draw(actions(f"x{i}", max_events=2)) for i in range(2)]
    phi = data.draw(dynamic_formulas(pool, max_depth=2))
    assert evaluate(s, phi) == state_holds(s, phi)


@settings(max_examples=200)
@given(global_states_(max_worlds=4), actions(max_events=3), static_formulas(max_depth=2))
def test_box_diamond_duality(s, a, phi):
    # Pointwise duality; on multi-world states truth is universal over designated worlds.
    assert evaluate(s, Diamond(a, phi)) == (not evaluate(s, Box(a, Not(phi))))


@settings(max_examples=200)
@given(states(max_worlds=4), actions(max_events=3), static_formulas(max_depth=2))
def test_applied_is_applicability_then_truth(s, a, phi):
    expected = is_applicable(a, s) and evaluate(product_update(s, a), phi)
    assert evaluate(s, Applied(a, phi)) == expected


@settings(max_examples=200)
@given(states(max_worlds=5), static_formulas(max_depth=2), st.sampled_from(AGENTS))
def test_common_knowledge_is_known(s, phi, agent):
    if evaluate(s, Common(phi)):
        assert evaluate(s, Knows(agent, Common(phi)))


@settings(max_examples=200)
@given(states(max_worlds=5), static_formulas(max_depth=2), st.sampled_from(AGENTS))
def test_s5_truth_and_positive_introspection(s, phi, agent):
    assert evaluate(s, Implies(Knows(agent, phi), phi))
    assert evaluate(s, Implies(Knows(agent, phi), Knows(agent, Knows(agent, phi))))
    assert evaluate(s, Implies(Not(Knows(agent, phi)), Knows(agent, Not(Knows(agent, phi)))))
