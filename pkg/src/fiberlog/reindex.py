"""Typed inheritance: copy monotone records from a parent fiber into its children.

Records whose relation is not monotone are simply never looked at for
copying; there is no blocked marker.  Copies go through validated insert, so
an inherited edge that would close a cycle in the child is rejected and
logged like any other write.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import FiberlogError, NoParent
from .lattice import DomainPath, as_domain, parent
from .meta import MetaTyping
from .store import META, FourTuple, KnowledgeBase
from .validation import insert_validated


class TypingNotFrozen(FiberlogError):
    pass


def _require_frozen(typing: MetaTyping):
    if not typing.frozen:
        raise TypingNotFrozen("reindexing needs a frozen typing; start a session first")


def reindex_domain(
    kb: KnowledgeBase, child, typing: MetaTyping, audit: Optional[list] = None
) -> int:
    """Pull monotone records of the parent fiber into ``child``; return how many were added."""
    _require_frozen(typing)
    child = as_domain(child)
    up = parent(child)
    if up is None:
        raise NoParent(f"{child.raw} is a root domain")
    source = kb.fibers.get(up)
    if source is None:
        return 0
    target = kb.fibers.get(child)
    added = 0
    for t in sorted(source.records, key=FourTuple.sort_key):
        if not typing.is_monotone(t.rel):
            continue
        copy = FourTuple(t.frm, t.rel, child, t.to)
        if target is not None and copy in target:
            continue
        outcome = insert_validated(kb, copy, typing, audit, origin=f"reindex:{up.raw}")
        if outcome.accepted and not outcome.duplicate:
            added += 1
        target = kb.fibers.get(child)
    return added


@dataclass
class ReindexSummary:
    added: dict[str, int] = field(default_factory=dict)
    passes: int = 0

    @property
    def total(self) -> int:
        return sum(self.added.values())

    def to_json(self) -> dict:
        return {"added": dict(sorted(self.added.items())), "passes": self.passes, "total": self.total}


def reindex_all(kb: KnowledgeBase, typing: MetaTyping, audit: Optional[list] = None) -> ReindexSummary:
    """One root-to-leaf pass over the lattice, one depth level at a time.

    Parents are complete before their children are processed, so a single
    pass reaches the fixpoint; ``passes`` counts the depth levels visited.
    """
    _require_frozen(typing)
    summary = ReindexSummary()
    for level in kb.lattice.by_depth()[1:]:
        summary.passes += 1
        for d in level:
            if d == META or d in kb.lattice.fused:
                continue
            summary.added[d.raw] = reindex_domain(kb, d, typing, audit)
    return summary


def expected_inheritance(kb: KnowledgeBase, typing: MetaTyping) -> dict[DomainPath, set[FourTuple]]:
    """Records each fiber would hold after reindexing, ignoring validation.

    Used as a reference recomputation in tests; it walks every ancestor
    directly instead of cascading.
    """
    out: dict[DomainPath, set[FourTuple]] = {}
    for d in kb.lattice.domains:
        if d == META or d in kb.lattice.fused:
            continue
        got = set(kb.fibers[d].records) if d in kb.fibers else set()
        for anc in d.ancestors():
            if anc in kb.fibers:
                got.update(
                    FourTuple(t.frm, t.rel, d, t.to) for t in kb.fibers[anc].records if typing.is_monotone(t.rel)
                )
        out[d] = got
    return out
