"""Domain-scoped inference over ``{from, rel, domain, to}`` records."""

from .errors import (
    ConflictingTyping,
    DuplicateRule,
    EmptyLattice,
    FiberlogError,
    InvalidSpec,
    MalformedDomain,
    MalformedTuple,
    MetaFrozen,
    NoParent,
    NotAnAncestor,
    ParseError,
    UnknownConcept,
)
from .inference import Constraint, Query, closure, closure_trace, match, multi_constraint, temporal_query
from .lattice import DomainLattice, DomainPath, common_ancestor, parent, parse_domain, specializes, temporal_compare
from .meta import MetaTyping, build_typing
from .session import Session
from .store import BridgeRecord, Fiber, FourTuple, KnowledgeBase, load_jsonl, save_jsonl
from .validation import ContradictionRule, ValidationOutcome, insert_validated, register_contradiction

__version__ = "0.1.0"
