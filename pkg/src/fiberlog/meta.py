"""Relation typing read from the ``@Meta@Logic`` fiber.

Each ``has_property`` record there declares one property of a relation::

    {"from":"is_a","rel":"has_property","domain":"@Meta@Logic","to":"monotone"}

Recognised values are ``monotone``, ``non_monotone`` and ``acyclic``.
"""

from __future__ import annotations

from .errors import ConflictingTyping, MetaFrozen
from .store import META, Fiber

MONOTONE = "monotone"
NON_MONOTONE = "non_monotone"
ACYCLIC = "acyclic"

DEFAULT_MONOTONE = frozenset({"is_a", "requires"})
DEFAULT_ACYCLIC = frozenset({"is_a", "requires", "causes"})


class MetaTyping:
    def __init__(self):
        self._monotonicity: dict[str, str] = {}
        self._acyclic: set[str] = set()
        self.frozen = False

    @property
    def monotonicity(self) -> dict[str, str]:
        return dict(self._monotonicity)

    @property
    def acyclic(self) -> frozenset:
        return frozenset(self._acyclic)

    def _check_mutable(self):
        if self.frozen:
            raise MetaFrozen("relation typing is read-only for the rest of the session")

    def declare(self, rel: str, value: str) -> None:
        self._check_mutable()
        if value == ACYCLIC:
            self._acyclic.add(rel)
        elif value in (MONOTONE, NON_MONOTONE):
            seen = self._monotonicity.get(rel)
            if seen is not None and seen != value:
                raise ConflictingTyping(f"{rel} declared both {seen} and {value}")
            self._monotonicity[rel] = value
        else:
            raise ValueError(f"unknown relation property {value!r}")

    def freeze(self) -> MetaTyping:
        self.frozen = True
        return self

    def typing_of(self, rel: str) -> str:
        return self._monotonicity.get(rel, NON_MONOTONE)

    def is_monotone(self, rel: str) -> bool:
        return self.typing_of(rel) == MONOTONE

    def is_acyclic(self, rel: str) -> bool:
        return rel in self._acyclic

    def to_json(self) -> dict:
        return {
            "monotonicity": dict(sorted(self._monotonicity.items())),
            "acyclic": sorted(self._acyclic),
        }


def build_typing(meta: Fiber) -> MetaTyping:
    if meta.domain != META:
        raise ValueError(f"typing is read from {META.raw}, not {meta.domain.raw}")
    typing = MetaTyping()
    for t in sorted(meta.records, key=lambda r: r.sort_key()):
        if t.rel == "has_property" and t.to in (MONOTONE, NON_MONOTONE, ACYCLIC):
            typing.declare(t.frm, t.to)
    for rel in DEFAULT_MONOTONE:
        if rel not in typing._monotonicity:
            typing.declare(rel, MONOTONE)
    # no value exists to opt out of acyclicity, so these always apply
    for rel in DEFAULT_ACYCLIC:
        typing.declare(rel, ACYCLIC)
    return typing


def typing_of(typing: MetaTyping, rel: str) -> str:
    return typing.typing_of(rel)


def freeze(typing: MetaTyping) -> MetaTyping:
    return typing.freeze()
