"""A reasoning session: frozen relation typing, mutable fibers, an audit log.

The typing is read from ``@Meta@Logic`` when the session starts and stays
fixed until :meth:`Session.end`.  All writes go through one lock.
"""

from __future__ import annotations

import threading
from typing import Iterable, Optional, Sequence

from . import bridge, inference, reindex, validation
from .meta import MetaTyping, build_typing
from .store import ADDED, BridgeRecord, FourTuple, KnowledgeBase
from .validation import ContradictionRule, ValidationOutcome


class Session:
    def __init__(
        self,
        kb: Optional[KnowledgeBase] = None,
        rules: Iterable[ContradictionRule] = (),
        audit: Optional[list] = None,
    ):
        self.kb = kb if kb is not None else KnowledgeBase()
        self.audit: list[dict] = audit if audit is not None else []
        self._lock = threading.Lock()
        for rule in rules:
            validation.register_contradiction(self.kb, rule)
        self.typing: MetaTyping = build_typing(self.kb.meta).freeze()
        self.kb.meta_frozen = True

    def end(self) -> KnowledgeBase:
        """Release the meta-layer; the next session rebuilds the typing."""
        self.kb.meta_frozen = False
        return self.kb

    # writes
    def insert(self, t: FourTuple, checked: bool = True) -> ValidationOutcome:
        with self._lock:
            if checked:
                return validation.insert_validated(self.kb, t, self.typing, self.audit)
            status = self.kb.add(t)
            outcome = ValidationOutcome(t, validation.ACCEPTED, duplicate=status != ADDED)
            entry = outcome.to_json()
            entry["origin"] = "unchecked"
            self.audit.append(entry)
            return outcome

    def remove(self, t: FourTuple) -> str:
        with self._lock:
            return self.kb.remove(t)

    def reindex(self, domain=None):
        with self._lock:
            if domain is None:
                return reindex.reindex_all(self.kb, self.typing, self.audit)
            return reindex.reindex_domain(self.kb, domain, self.typing, self.audit)

    def add_bridge(self, b: BridgeRecord, rels=None) -> str:
        with self._lock:
            return bridge.add_bridge(self.kb, b, rels)

    # reads
    def query(self, q: inference.Query):
        return inference.run_query(self.kb, q)

    def closure(self, start, rel, d, direction=inference.FORWARD, include_universal=False):
        return inference.closure(self.kb, start, rel, d, direction, include_universal)

    def multi_constraint(self, d, constraints: Sequence[inference.Constraint]):
        return inference.multi_constraint(self.kb, d, constraints)

    def temporal(self, rel, before, scope):
        return inference.temporal_query(self.kb, rel, before, scope)
