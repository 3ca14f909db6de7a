"""Write-time falsification.

Every validated insert is checked against the target fiber alone, in a
fixed order: frozen meta-layer, causal reversal, cycles in acyclic
relations, registered contradiction pairs.  A rejected record is never
stored.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import DuplicateRule, MalformedTuple, MetaFrozen
from .meta import MetaTyping
from .store import ADDED, META, Fiber, FourTuple, KnowledgeBase

ACCEPTED = "accepted"
REJECTED = "rejected"

CAUSAL_REVERSAL = "causal_reversal"
CYCLE = "cycle"
CONSTRAINT_VIOLATION = "constraint_violation"
CONTRADICTION = "contradiction"
META_FROZEN = "meta_frozen"


@dataclass(frozen=True)
class ValidationOutcome:
    record: FourTuple
    verdict: str
    reason: Optional[str] = None
    witness: tuple[FourTuple, ...] = ()
    duplicate: bool = False

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPTED

    def to_json(self) -> dict:
        return {
            "tuple": self.record.to_json(),
            "verdict": self.verdict,
            "reason": self.reason,
            "witness": [t.to_json() for t in self.witness],
        }


@dataclass(frozen=True)
class ContradictionRule:
    """Two relations that may not both hold for one subject within one domain."""

    rel_a: str
    rel_b: str
    scope: str = field(default="same_subject_same_domain")

    def __post_init__(self):
        if self.rel_a == self.rel_b:
            raise ValueError("a contradiction rule needs two different relations")

    @property
    def key(self) -> frozenset:
        return frozenset((self.rel_a, self.rel_b))


def register_contradiction(kb: KnowledgeBase, rule: ContradictionRule) -> None:
    if kb.meta_frozen:
        raise MetaFrozen("contradiction rules must be registered before the session starts")
    if rule.key in kb.contradictions:
        raise DuplicateRule(f"{rule.rel_a}/{rule.rel_b} already registered")
    kb.contradictions.add(rule.key)


def find_path(fiber: Optional[Fiber], src: str, dst: str, rel: str) -> Optional[list[FourTuple]]:
    """Shortest ``rel`` path from src to dst inside one fiber, or None.

    A concept reaches itself by the empty path.
    """
    if src == dst:
        return []
    if fiber is None:
        return None
    came_from: dict[str, str] = {src: src}
    queue = deque([src])
    while queue:
        node = queue.popleft()
        for nxt in sorted(fiber.successors(node, rel)):
            if nxt in came_from:
                continue
            came_from[nxt] = node
            if nxt == dst:
                path = []
                while nxt != src:
                    prev = came_from[nxt]
                    path.append(FourTuple(prev, rel, fiber.domain, nxt))
                    nxt = prev
                path.reverse()
                return path
            queue.append(nxt)
    return None


def _contradicting(kb: KnowledgeBase, fiber: Optional[Fiber], t: FourTuple) -> list[FourTuple]:
    if fiber is None or not kb.contradictions:
        return []
    rivals = {other for key in kb.contradictions if t.rel in key for other in key if other != t.rel}
    return sorted(
        (FourTuple(t.frm, rel, t.domain, to) for rel in rivals for to in fiber.successors(t.frm, rel)),
        key=FourTuple.sort_key,
    )


def check(kb: KnowledgeBase, t: FourTuple, typing: MetaTyping) -> ValidationOutcome:
    """Run every write-time check without storing anything."""
    if not isinstance(t, FourTuple):
        raise MalformedTuple(f"expected a FourTuple, got {type(t).__name__}")
    if t.domain == META and (kb.meta_frozen or typing.frozen):
        return ValidationOutcome(t, REJECTED, META_FROZEN)
    fiber = kb.fibers.get(t.domain)
    if t.rel == "causes":
        path = find_path(fiber, t.to, t.frm, "causes")
        if path is not None:
            return ValidationOutcome(t, REJECTED, CAUSAL_REVERSAL, tuple(path))
    if typing.is_acyclic(t.rel):
        path = find_path(fiber, t.to, t.frm, t.rel)
        if path is not None:
            return ValidationOutcome(t, REJECTED, CYCLE, tuple(path))
    clash = _contradicting(kb, fiber, t)
    if clash:
        return ValidationOutcome(t, REJECTED, CONTRADICTION, tuple(clash))
    return ValidationOutcome(t, ACCEPTED)


def insert_validated(
    kb: KnowledgeBase,
    t: FourTuple,
    typing: MetaTyping,
    audit: Optional[list] = None,
    origin: str = "insert",
) -> ValidationOutcome:
    outcome = check(kb, t, typing)
    if outcome.accepted:
        status = kb.add(t)
        if status != ADDED:
            outcome = ValidationOutcome(t, ACCEPTED, duplicate=True)
    if audit is not None:
        entry = outcome.to_json()
        entry["origin"] = origin
        audit.append(entry)
    return outcome
