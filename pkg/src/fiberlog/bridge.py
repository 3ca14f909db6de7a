"""Cross-domain operations over the bridge store.

Bridges are kept apart from the fibers; no bridge operation ever changes a
fiber's records.  Concept occurrence for a domain counts the domain's own
fiber and the fibers of every domain specializing it, so a bridge between
``@ICD11@Respiratory`` and ``@ICD11@Infectious`` sees records filed under
their ``@...@Anatomical`` and ``@...@Etiological`` sub-axes.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .errors import UnknownConcept
from .lattice import as_domain
from .store import BridgeRecord, FourTuple, KnowledgeBase

ACCEPTED = "accepted"
REJECTED = "rejected"


def _occurs(kb: KnowledgeBase, concept: str, d) -> bool:
    return any(concept in f.concepts() for f in kb.subtree_fibers(d))


def _subjects(kb: KnowledgeBase, d) -> set[str]:
    return {frm for f in kb.subtree_fibers(d) for frm, _ in f.index_forward}


def _concepts(kb: KnowledgeBase, d) -> set[str]:
    out = set()
    for f in kb.subtree_fibers(d):
        out |= f.concepts()
    return out


def fused_name(d1, d2) -> str:
    return "@Fused@" + "_".join(as_domain(d1).segments) + "@" + "_".join(as_domain(d2).segments)


def check_analogy(kb: KnowledgeBase, a: str, d1, b: str, d2, rels: Iterable[str]):
    """Existential out-neighbourhood match of ``a`` in d1 against ``b`` in d2.

    Holds when, for each relation in ``rels``, every edge ``a -rel-> x`` in
    F(d1) is met by at least one edge ``b -rel-> y`` in F(d2).  The witness
    lists every matched ``(rel, x, y)``.
    """
    rels = set(rels)
    if not rels:
        raise ValueError("analogy check needs at least one relation")
    f1, f2 = kb.get_fiber(d1), kb.get_fiber(d2)
    holds = True
    witness = set()
    for rel in sorted(rels):
        xs = f1.successors(a, rel)
        if not xs:
            continue
        ys = f2.successors(b, rel)
        if not ys:
            holds = False
            continue
        witness.update((rel, x, y) for x in xs for y in ys)
    return holds, witness


def add_bridge(kb: KnowledgeBase, b: BridgeRecord, rels: Optional[Iterable[str]] = None) -> str:
    """Check and store a bridge record.

    ``rels`` is the relation signature used for ``analogous_to``; by default
    every relation on the source concept's out-edges in ``domain_1``.
    """
    if b.rel == "same_entity_across":
        for d in (b.domain_1, b.domain_2):
            if not _occurs(kb, b.frm, d):
                raise UnknownConcept(f"{b.frm} does not occur in {d.raw}")
    elif b.rel == "analogous_to":
        if b.to is None:
            raise ValueError("analogous_to needs a 'to' concept")
        if rels is None:
            source = kb.fibers.get(b.domain_1)
            rels = {rel for frm, rel in source.index_forward if frm == b.frm} if source else ()
        rels = set(rels)
        if rels:
            holds, _ = check_analogy(kb, b.frm, b.domain_1, b.to, b.domain_2, rels)
            if not holds:
                return REJECTED
    elif b.rel == "fuses_with":
        if b.to is None:
            b = BridgeRecord(b.frm, b.rel, b.domain_1, b.domain_2, fused_name(b.domain_1, b.domain_2))
        as_domain(b.to)
    kb.store_bridge(b)
    return ACCEPTED


def bridges_between(kb: KnowledgeBase, d1, d2, rel: Optional[str] = None) -> list[BridgeRecord]:
    key = frozenset((as_domain(d1), as_domain(d2)))
    return sorted((x for x in kb.bridges.get(key, ()) if rel is None or x.rel == rel), key=BridgeRecord.sort_key)


def cross_fiber_intersection(kb: KnowledgeBase, d1, d2) -> set[str]:
    explicit = {x.frm for x in bridges_between(kb, d1, d2, "same_entity_across")}
    return explicit | (_subjects(kb, d1) & _subjects(kb, d2))


def cross_session_diff(kb: KnowledgeBase, d1, d2, rels: Iterable[str]) -> set[FourTuple]:
    """Records under d2 with a relation in ``rels`` touching a concept known under d1."""
    rels = set(rels)
    earlier = _concepts(kb, d1)
    return {
        t
        for f in kb.subtree_fibers(d2)
        for t in f.records
        if t.rel in rels and (t.frm in earlier or t.to in earlier)
    }
