"""Bisimulation contraction and canonical keys for states.

Contraction keeps the part of the model reachable from the designated
worlds, splits worlds by valuation and refines by the set of classes each
agent considers possible, until stable. The designated set of the quotient
is the set of classes that contain a designated world. Classes are numbered
by the rank of their signature in every round, so the numbering never
depends on the input world order and the quotient is canonical.

Two states get equal canonical forms exactly when every designated world of
each is bisimilar to some designated world of the other. For global states
this is pointed bisimilarity. The relation is preserved by product update,
perspective shifts and ``Globals``, which is what makes keys usable as
policy indices.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from delplan.core import EpistemicModel, Partition, State

__all__ = ["CanonicalState", "contract", "equivalent", "canonical_key", "bisimulation_classes"]


@dataclass(frozen=True)
class CanonicalState:
    """A contracted state plus its canonical form and a fingerprint of that form.

    Equality and hashing use the full form, so fingerprint collisions cannot
    merge distinct states.
    """

    state: State = field(compare=False)
    form: tuple = field(repr=False)
    key: bytes = field(compare=False)
    world_class: tuple[int, ...] = field(compare=False, repr=False)

    @property
    def key_hex(self) -> str:
        return self.key.hex()

    @property
    def size(self) -> int:
        return self.state.model.size


def _rank(values: list) -> list[int]:
    order = {v: i for i, v in enumerate(sorted(set(values)))}
    return [order[v] for v in values]


def bisimulation_classes(model: EpistemicModel, worlds: list[int]) -> list[int]:
    """Canonical class number of each world in ``worlds`` (a union of components)."""
    position = {w: i for i, w in enumerate(worlds)}
    colors = _rank([tuple(sorted(model.valuation[w])) for w in worlds])
    count = len(set(colors))
    blocks = []
    for rel in model.relations:
        seen = sorted({rel.index[w] for w in worlds})
        blocks.append([[position[w] for w in rel.blocks[b]] for b in seen])
    while True:
        labels: list[list] = [[c] for c in colors]
        for agent_blocks in blocks:
            for block in agent_blocks:
                seen_colors = tuple(sorted({colors[x] for x in block}))
                for x in block:
                    labels[x].append(seen_colors)
        colors = _rank([tuple(lab) for lab in labels])
        new_count = len(set(colors))
        if new_count == count:
            return colors
        count = new_count


@dataclass(frozen=True)
class _Quotient:
    worlds: tuple[int, ...]
    world_class: tuple[int, ...]
    model: EpistemicModel
    form: tuple


def _quotient(model: EpistemicModel, worlds: list[int]) -> _Quotient:
    colors = bisimulation_classes(model, worlds)
    k = max(colors) + 1
    member = [0] * k
    for x, c in enumerate(colors):
        member[c] = worlds[x]
    where = {w: x for x, w in enumerate(worlds)}
    relations = []
    for rel in model.relations:
        # classes are related when their members see the same set of classes
        labels = [tuple(sorted({colors[where[v]] for v in rel.block_of(w)})) for w in member]
        relations.append(Partition.from_labels(labels))
    valuation = tuple(model.valuation[w] for w in member)
    quotient = EpistemicModel(model.signature, valuation, tuple(relations))
    form = (tuple(tuple(sorted(v)) for v in valuation), tuple(p.index for p in relations))
    world_class = [-1] * model.size
    for x, w in enumerate(worlds):
        world_class[w] = colors[x]
    return _Quotient(tuple(worlds), tuple(world_class), quotient, form)


def contract(s: State) -> CanonicalState:
    """Bisimulation contraction of ``s`` (memoized per model and designated set)."""
    model = s.model
    memo = model._cache.setdefault("contract", {})
    hit = memo.get(s.designated)
    if hit is not None:
        return hit
    comp = model.components()
    component_ids = frozenset(comp.index[w] for w in s.designated)
    quotients = model._cache.setdefault("quotients", {})
    q = quotients.get(component_ids)
    if q is None:
        worlds = sorted(w for b in component_ids for w in comp.blocks[b])
        q = quotients[component_ids] = _quotient(model, worlds)
    designated = frozenset(q.world_class[w] for w in s.designated)
    form = (*q.form, tuple(sorted(designated)))
    key = hashlib.blake2b(repr(form).encode(), digest_size=16).digest()
    result = CanonicalState(State(q.model, designated), form, key, q.world_class)
    memo[s.designated] = result
    return result


def canonical_key(s: State) -> bytes:
    return contract(s).key


def equivalent(s: State, t: State) -> bool:
    """True iff the two states are bisimilar in the sense of ``contract``."""
    if s.signature != t.signature:
        return False
    return contract(s) == contract(t)
