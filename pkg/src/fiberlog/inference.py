"""Fiber-scoped queries.

Every query names a domain and reads only that domain's fiber (plus the
shared ``@Universal`` fiber when asked).  Closure is plain indexed graph
traversal with a visited set, so legal cycles in non-acyclic relations
still terminate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import NotAnAncestor
from .lattice import BEFORE, DomainPath, as_domain, specializes, temporal_order
from .store import FiberView, FourTuple, KnowledgeBase

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True)
class Query:
    domain: DomainPath
    rel: Optional[str] = None
    frm: Optional[str] = None
    to: Optional[str] = None
    closure: bool = False
    include_universal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "domain", as_domain(self.domain))
        if self.closure:
            if self.rel is None:
                raise ValueError("closure queries need a relation")
            if self.frm is None and self.to is None:
                raise ValueError("closure queries need a start concept")


@dataclass(frozen=True)
class Constraint:
    rel: str
    feature: str
    direction: str = FORWARD

    def __post_init__(self):
        if not self.feature:
            raise ValueError("constraint feature must be non-empty")
        if self.direction not in (FORWARD, BACKWARD):
            raise ValueError(f"direction must be forward or backward, not {self.direction!r}")

    @classmethod
    def parse(cls, text: str) -> Constraint:
        """Parse the CLI form ``rel:feature[:backward]``."""
        parts = text.split(":")
        if len(parts) == 2:
            return cls(parts[0], parts[1])
        if len(parts) == 3 and parts[2] in (FORWARD, BACKWARD):
            return cls(parts[0], parts[1], parts[2])
        raise ValueError(f"bad constraint {text!r}, expected rel:feature[:backward]")


def match(kb: KnowledgeBase, q: Query) -> set[FourTuple]:
    view = kb.get_fiber(q.domain, q.include_universal)
    if q.frm is not None and q.rel is not None:
        tos = view.successors(q.frm, q.rel)
        if q.to is not None:
            tos = {q.to} & set(tos)
        return {view.edge(q.frm, q.rel, to) for to in tos}
    if q.to is not None and q.rel is not None:
        return {view.edge(frm, q.rel, q.to) for frm in view.predecessors(q.rel, q.to)}
    return {
        t
        for t in view
        if (q.frm is None or t.frm == q.frm)
        and (q.rel is None or t.rel == q.rel)
        and (q.to is None or t.to == q.to)
    }


def _step(view: FiberView, node: str, rel: str, direction: str):
    if direction == FORWARD:
        return view.successors(node, rel)
    return view.predecessors(rel, node)


def _traverse(view: FiberView, start: str, rel: str, direction: str, trace: Optional[list]):
    reached: set[str] = set()
    expanded = {start}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt in sorted(_step(view, node, rel, direction)):
            if nxt not in reached:
                reached.add(nxt)
                if trace is not None:
                    edge = (node, rel, nxt) if direction == FORWARD else (nxt, rel, node)
                    trace.append(view.edge(*edge))
            if nxt not in expanded:
                expanded.add(nxt)
                queue.append(nxt)
    return reached


def closure(
    kb: KnowledgeBase,
    start: str,
    rel: str,
    d,
    direction: str = FORWARD,
    include_universal: bool = False,
) -> set[str]:
    """Concepts reachable from ``start`` by one or more ``rel`` edges inside the fiber."""
    view = kb.get_fiber(d, include_universal)
    return _traverse(view, start, rel, direction, None)


def closure_trace(
    kb: KnowledgeBase,
    start: str,
    rel: str,
    d,
    direction: str = FORWARD,
    include_universal: bool = False,
) -> tuple[set[str], list[FourTuple]]:
    """Closure plus the records that justified each reached concept, in discovery order.

    The trace is itself a valid set of records: loading it into an empty
    knowledge base and re-running the same closure gives the same answer.
    """
    view = kb.get_fiber(d, include_universal)
    trace: list[FourTuple] = []
    reached = _traverse(view, start, rel, direction, trace)
    return reached, trace


def ancestors(kb: KnowledgeBase, concept: str, rel: str, d, include_universal: bool = False) -> set[str]:
    return closure(kb, concept, rel, d, FORWARD, include_universal)


def descendants(kb: KnowledgeBase, concept: str, rel: str, d, include_universal: bool = False) -> set[str]:
    return closure(kb, concept, rel, d, BACKWARD, include_universal)


def _reaches(view: FiberView, start: str, rel: str, target: str, direction: str) -> bool:
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for nxt in _step(view, node, rel, direction):
            if nxt == target:
                return True
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def satisfies(view: FiberView, entity: str, c: Constraint) -> bool:
    return _reaches(view, entity, c.rel, c.feature, c.direction)


def multi_constraint(
    kb: KnowledgeBase, d, constraints: Sequence[Constraint]
) -> tuple[set[str], list[int]]:
    """Narrow the fiber's subjects one constraint at a time.

    Returns the surviving candidates and the candidate count before any
    constraint followed by the count after each one.
    """
    if not constraints:
        raise ValueError("at least one constraint is required")
    view = kb.get_fiber(d, include_universal=True)
    candidates = view.subjects()
    counts = [len(candidates)]
    for c in constraints:
        candidates = {e for e in candidates if satisfies(view, e, c)}
        counts.append(len(candidates))
    return candidates, counts


def temporal_query(kb: KnowledgeBase, rel: str, before, scope) -> set[FourTuple]:
    """Records under ``scope`` whose domain comes strictly before ``before``."""
    before, scope = as_domain(before), as_domain(scope)
    if not specializes(before, scope):
        raise NotAnAncestor(f"{scope.raw} is not an ancestor of {before.raw}")
    out = set()
    for fiber in kb.subtree_fibers(scope):
        if temporal_order(fiber.domain, before) != BEFORE:
            continue
        out.update(t for t in fiber.records if t.rel == rel)
    return out


def run_query(kb: KnowledgeBase, q: Query):
    """Closure queries return concept names, plain queries return records."""
    if not q.closure:
        return match(kb, q)
    if q.frm is not None:
        found = closure(kb, q.frm, q.rel, q.domain, FORWARD, q.include_universal)
    else:
        found = closure(kb, q.to, q.rel, q.domain, BACKWARD, q.include_universal)
    if q.frm is not None and q.to is not None:
        return found & {q.to}
    return found
