"""Restricted Russian cards: Alice announces five hands, then Bob announces Eve's card.

Seven cards 0..6 are dealt three to Alice, three to Bob and one to Eve.
Each agent sees only its own hand. Alice holds 012 in the designated
worlds. Stage one: Alice publicly announces that her hand is one of five
hands (one of them 012, so the announcement is truthful). Stage two: Bob
publicly announces Eve's card. The goal: Alice and Bob know each other's
hands and Eve learns, for no card outside her hand, who holds it.

The first-stage candidates are generated lazily; building all 46376 actions
is only needed for the long-running synthesis mode.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from functools import lru_cache
from math import comb

from delplan.core import Action, EpistemicModel, Partition, PlanningTask, Signature, State, public_action
from delplan.formula import Atom, Formula, Knows, Not, conjunction, disjunction

__all__ = [
    "CARDS",
    "PLAYERS",
    "ALICE_HAND",
    "Deal",
    "deals",
    "hand_name",
    "announcement_name",
    "eve_card_name",
    "CandidateAnnouncements",
    "RussianCards",
    "russian_cards",
    "cards_goal",
]

CARDS = tuple(range(7))
PLAYERS = ("alice", "bob", "eve")
ALICE_HAND = (0, 1, 2)


@dataclass(frozen=True)
class Deal:
    alice: tuple[int, ...]
    bob: tuple[int, ...]
    eve: tuple[int, ...]

    def __post_init__(self) -> None:
        if (len(self.alice), len(self.bob), len(self.eve)) != (3, 3, 1):
            raise ValueError("a deal gives 3 cards to alice and bob and 1 to eve")
        if sorted(self.alice + self.bob + self.eve) != list(CARDS):
            raise ValueError("hands must partition the seven cards")

    def hand(self, player: str) -> tuple[int, ...]:
        return getattr(self, player)


def prop(player: str, card: int) -> str:
    return f"{player}_has_{card}"


def deals() -> list[Deal]:
    """All 140 deals, ordered by Alice's hand then Bob's."""
    out = []
    for a in itertools.combinations(CARDS, 3):
        rest = [c for c in CARDS if c not in a]
        for b in itertools.combinations(rest, 3):
            out.append(Deal(a, b, tuple(c for c in rest if c not in b)))
    return out


def hand_name(hand: Sequence[int]) -> str:
    return "".join(str(c) for c in hand)


def announcement_name(hands: Sequence[Sequence[int]]) -> str:
    return "announce-" + "-".join(hand_name(h) for h in hands)


def eve_card_name(card: int) -> str:
    return f"eve-holds-{card}"


@lru_cache(maxsize=1)
def _signature() -> Signature:
    return Signature(PLAYERS, tuple(prop(p, c) for p in PLAYERS for c in CARDS))


def _hand_formula(player: str, hand: Sequence[int]) -> Formula:
    return conjunction(Atom(prop(player, c)) for c in hand)


def _announcement(hands: Sequence[Sequence[int]]) -> Action:
    pre = disjunction(_hand_formula("alice", h) for h in hands)
    return public_action(announcement_name(hands), _signature(), pre)


class CandidateAnnouncements(Mapping):
    """All truthful five-hand announcements for Alice, built on access.

    Names sort in generation order: 012 first, then the other four hands in
    lexicographic combination order.
    """

    def __init__(self) -> None:
        hands = list(itertools.combinations(CARDS, 3))
        self._others = [h for h in hands if h != ALICE_HAND]
        self._cache: dict[str, Action] = {}

    def __len__(self) -> int:
        return comb(len(self._others), 4)

    def hand_sets(self) -> Iterator[tuple[tuple[int, ...], ...]]:
        for rest in itertools.combinations(self._others, 4):
            yield (ALICE_HAND, *rest)

    def __iter__(self) -> Iterator[str]:
        return (announcement_name(h) for h in self.hand_sets())

    def __contains__(self, name: object) -> bool:
        return isinstance(name, str) and self._parse(name) is not None

    def _parse(self, name: str):
        if not name.startswith("announce-"):
            return None
        parts = name[len("announce-"):].split("-")
        if len(parts) != 5 or parts[0] != hand_name(ALICE_HAND):
            return None
        hands = []
        for p in parts:
            if len(p) != 3 or not p.isdigit():
                return None
            hands.append(tuple(int(ch) for ch in p))
        rest = hands[1:]
        if rest != sorted(rest) or len(set(rest)) != 4:
            return None
        if any(h not in self._others for h in rest):
            return None
        return hands

    def __getitem__(self, name: str) -> Action:
        hit = self._cache.get(name)
        if hit is not None:
            return hit
        hands = self._parse(name) if isinstance(name, str) else None
        if hands is None:
            raise KeyError(name)
        action = self._cache[name] = _announcement(hands)
        return action


def cards_goal() -> Formula:
    parts = []
    for watcher, target in (("alice", "bob"), ("bob", "alice")):
        for c in CARDS:
            p = Atom(prop(target, c))
            parts.append(Knows(watcher, p) | Knows(watcher, Not(p)))
    for c in CARDS:
        hidden = Not(Knows("eve", Atom(prop("alice", c)))) & Not(Knows("eve", Atom(prop("bob", c))))
        parts.append(Atom(prop("eve", c)) | hidden)
    return conjunction(parts)


@dataclass(frozen=True)
class RussianCards:
    initial: State
    candidates: CandidateAnnouncements
    eve_announcements: Mapping[str, Action]
    goal: Formula

    def task(self, first_stage: Sequence[str] | None = None) -> PlanningTask:
        """Alice's task with the given first-stage announcements (all candidates if None)."""
        names = list(self.candidates) if first_stage is None else list(first_stage)
        actions = {n: self.candidates[n] for n in names}
        owner = {n: "alice" for n in names}
        actions.update(self.eve_announcements)
        owner.update({n: "bob" for n in self.eve_announcements})
        return PlanningTask(self.initial, actions, owner, self.goal)

    def task_for_hands(self, hands: Sequence[Sequence[int]]) -> PlanningTask:
        ordered = [tuple(ALICE_HAND)] + sorted(tuple(h) for h in hands if tuple(h) != ALICE_HAND)
        return self.task([announcement_name(ordered)])


def russian_cards() -> RussianCards:
    sig = _signature()
    all_deals = deals()
    valuation = tuple(
        frozenset(prop(p, c) for p in PLAYERS for c in d.hand(p)) for d in all_deals
    )
    relations = tuple(Partition.from_labels([d.hand(p) for d in all_deals]) for p in PLAYERS)
    names = tuple(f"{hand_name(d.alice)}.{hand_name(d.bob)}.{hand_name(d.eve)}" for d in all_deals)
    model = EpistemicModel(sig, valuation, relations, names)
    designated = frozenset(i for i, d in enumerate(all_deals) if d.alice == ALICE_HAND)
    eve = {eve_card_name(c): public_action(eve_card_name(c), sig, Atom(prop("eve", c))) for c in CARDS}
    return RussianCards(State(model, designated), CandidateAnnouncements(), eve, cards_goal())
