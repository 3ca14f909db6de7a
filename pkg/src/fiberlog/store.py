"""Four-tuple records, per-domain fibers, and the JSONL wire format."""

from __future__ import annotations

import json
import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .errors import MalformedDomain, MalformedTuple, MetaFrozen, ParseError
from .lattice import DomainLattice, DomainPath, as_domain, parse_domain, specializes

META = parse_domain("@Meta@Logic")
UNIVERSAL = parse_domain("@Universal")

ADDED = "added"
DUPLICATE = "duplicate"
REMOVED = "removed"
ABSENT = "absent"

BRIDGE_RELATIONS = frozenset({"same_entity_across", "analogous_to", "fuses_with"})

_NAME = re.compile(r"[A-Za-z0-9_]+")
_TUPLE_KEYS = frozenset({"from", "rel", "domain", "to"})
_BRIDGE_KEYS = frozenset({"from", "rel", "domain_1", "domain_2"})


def _check_name(value, what):
    if not isinstance(value, str) or not _NAME.fullmatch(value):
        raise MalformedTuple(f"{what} must match [A-Za-z0-9_]+, got {value!r}")
    return value


@dataclass(frozen=True)
class FourTuple:
    frm: str
    rel: str
    domain: DomainPath
    to: str

    def __post_init__(self):
        _check_name(self.frm, "from")
        _check_name(self.rel, "rel")
        _check_name(self.to, "to")
        if not isinstance(self.domain, DomainPath):
            try:
                object.__setattr__(self, "domain", parse_domain(self.domain))
            except MalformedDomain as exc:
                raise MalformedTuple(str(exc)) from None

    def sort_key(self):
        return (self.domain.raw, self.rel, self.frm, self.to)

    def to_json(self) -> dict:
        return {"from": self.frm, "rel": self.rel, "domain": self.domain.raw, "to": self.to}

    @classmethod
    def from_json(cls, obj: dict) -> FourTuple:
        if not isinstance(obj, dict) or set(obj) != _TUPLE_KEYS:
            keys = sorted(obj) if isinstance(obj, dict) else type(obj).__name__
            raise MalformedTuple(f"expected keys {sorted(_TUPLE_KEYS)}, got {keys}")
        return cls(obj["from"], obj["rel"], obj["domain"], obj["to"])

    def __str__(self):
        return f"{self.rel}({self.frm}, {self.to}, {self.domain.raw})"


@dataclass(frozen=True)
class BridgeRecord:
    """A cross-domain record; lives outside every fiber."""

    frm: str
    rel: str
    domain_1: DomainPath
    domain_2: DomainPath
    to: Optional[str] = None

    def __post_init__(self):
        _check_name(self.frm, "from")
        if self.rel not in BRIDGE_RELATIONS:
            raise MalformedTuple(f"unknown bridge relation {self.rel!r}")
        try:
            for name in ("domain_1", "domain_2"):
                object.__setattr__(self, name, as_domain(getattr(self, name)))
        except MalformedDomain as exc:
            raise MalformedTuple(str(exc)) from None
        if self.domain_1 == self.domain_2:
            raise MalformedTuple("a bridge needs two distinct domains")
        if self.to is not None and not isinstance(self.to, str):
            raise MalformedTuple("bridge 'to' must be a string")

    @property
    def pair(self) -> frozenset:
        return frozenset((self.domain_1, self.domain_2))

    def sort_key(self):
        d1, d2 = sorted((self.domain_1.raw, self.domain_2.raw))
        return (d1, d2, self.rel, self.frm, self.to or "")

    def to_json(self) -> dict:
        out = {
            "from": self.frm,
            "rel": self.rel,
            "domain_1": self.domain_1.raw,
            "domain_2": self.domain_2.raw,
        }
        if self.to is not None:
            out["to"] = self.to
        return out

    @classmethod
    def from_json(cls, obj: dict) -> BridgeRecord:
        keys = set(obj)
        if not (_BRIDGE_KEYS <= keys <= _BRIDGE_KEYS | {"to"}):
            raise MalformedTuple(f"bad bridge keys {sorted(keys)}")
        return cls(obj["from"], obj["rel"], obj["domain_1"], obj["domain_2"], obj.get("to"))


def record_from_json(obj):
    """Build a FourTuple or BridgeRecord depending on the exact key set."""
    if isinstance(obj, dict) and ("domain_1" in obj or "domain_2" in obj):
        return BridgeRecord.from_json(obj)
    return FourTuple.from_json(obj)


class Fiber:
    """All records sharing one domain, with forward and backward indexes."""

    def __init__(self, domain: DomainPath):
        self.domain = domain
        self.records: set[FourTuple] = set()
        self.index_forward: dict[tuple[str, str], set[str]] = defaultdict(set)
        self.index_backward: dict[tuple[str, str], set[str]] = defaultdict(set)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __contains__(self, t):
        return t in self.records

    def add(self, t: FourTuple) -> bool:
        if t in self.records:
            return False
        self.records.add(t)
        self.index_forward[(t.frm, t.rel)].add(t.to)
        self.index_backward[(t.rel, t.to)].add(t.frm)
        return True

    def discard(self, t: FourTuple) -> bool:
        if t not in self.records:
            return False
        self.records.remove(t)
        for index, key, value in (
            (self.index_forward, (t.frm, t.rel), t.to),
            (self.index_backward, (t.rel, t.to), t.frm),
        ):
            bucket = index[key]
            bucket.discard(value)
            if not bucket:
                del index[key]
        return True

    def successors(self, concept: str, rel: str):
        return self.index_forward.get((concept, rel), ())

    def predecessors(self, rel: str, concept: str):
        return self.index_backward.get((rel, concept), ())

    def concepts(self) -> set[str]:
        out = set()
        for t in self.records:
            out.add(t.frm)
            out.add(t.to)
        return out


class FiberView:
    """Read-only union of fibers, typically F(d) plus F(@Universal).

    ``touched`` counts the index entries handed out, so callers can check
    that a query only ever reads its own fiber.
    """

    def __init__(self, domain: DomainPath, fibers: Iterable[Fiber]):
        self.domain = domain
        self._fibers = [f for f in fibers if f is not None]
        self.touched = 0

    def __len__(self):
        return sum(len(f) for f in self._fibers)

    def __iter__(self) -> Iterator[FourTuple]:
        for f in self._fibers:
            for t in f.records:
                self.touched += 1
                yield t

    @property
    def records(self) -> set[FourTuple]:
        return set(self)

    def successors(self, concept: str, rel: str) -> set[str]:
        if len(self._fibers) == 1:
            out = self._fibers[0].successors(concept, rel)
            self.touched += len(out)
            return out
        out = set()
        for f in self._fibers:
            out.update(f.successors(concept, rel))
        self.touched += len(out)
        return out

    def predecessors(self, rel: str, concept: str) -> set[str]:
        if len(self._fibers) == 1:
            out = self._fibers[0].predecessors(rel, concept)
            self.touched += len(out)
            return out
        out = set()
        for f in self._fibers:
            out.update(f.predecessors(rel, concept))
        self.touched += len(out)
        return out

    def edge(self, frm: str, rel: str, to: str) -> FourTuple:
        """The stored record behind an edge seen through this view."""
        for f in self._fibers:
            t = FourTuple(frm, rel, f.domain, to)
            if t in f.records:
                return t
        raise KeyError((frm, rel, to))

    def subjects(self) -> set[str]:
        out = set()
        for f in self._fibers:
            out.update(frm for frm, _ in f.index_forward)
        return out


class KnowledgeBase:
    """Fibers keyed by domain, the domain lattice, and the bridge store."""

    def __init__(self, records: Iterable = ()):
        self.fibers: dict[DomainPath, Fiber] = {}
        self.lattice = DomainLattice()
        self.bridges: dict[frozenset, set[BridgeRecord]] = defaultdict(set)
        self.contradictions: set[frozenset] = set()
        self.meta_frozen = False
        for r in records:
            if isinstance(r, BridgeRecord):
                self.store_bridge(r)
            else:
                self.add(r)

    # sizes
    def __len__(self):
        return sum(len(f) for f in self.fibers.values())

    @property
    def n_records(self) -> int:
        return len(self)

    @property
    def n_worlds(self) -> int:
        """Number of fibers other than the meta and universal ones."""
        return sum(1 for d, f in self.fibers.items() if f.records and d not in (META, UNIVERSAL))

    @property
    def universal(self) -> Fiber:
        return self.fibers.get(UNIVERSAL) or Fiber(UNIVERSAL)

    @property
    def meta(self) -> Fiber:
        return self.fibers.get(META) or Fiber(META)

    def records(self) -> Iterator[FourTuple]:
        for f in self.fibers.values():
            yield from f.records

    def __contains__(self, t: FourTuple):
        f = self.fibers.get(t.domain)
        return f is not None and t in f

    # mutation
    def _guard(self, t: FourTuple):
        if self.meta_frozen and t.domain == META:
            raise MetaFrozen(f"{META.raw} is read-only while a session is active")

    def add(self, t: FourTuple) -> str:
        if not isinstance(t, FourTuple):
            raise MalformedTuple(f"expected a FourTuple, got {type(t).__name__}")
        self._guard(t)
        fiber = self.fibers.get(t.domain)
        if fiber is None:
            fiber = self.fibers[t.domain] = Fiber(t.domain)
            self.lattice.add(t.domain)
        return ADDED if fiber.add(t) else DUPLICATE

    def remove(self, t: FourTuple) -> str:
        self._guard(t)
        fiber = self.fibers.get(t.domain)
        if fiber is None or not fiber.discard(t):
            return ABSENT
        return REMOVED

    def store_bridge(self, b: BridgeRecord) -> None:
        """Raw bridge storage; acceptance checks live in :mod:`fiberlog.bridge`."""
        self.bridges[b.pair].add(b)
        self.lattice.add(b.domain_1)
        self.lattice.add(b.domain_2)
        if b.rel == "fuses_with" and b.to:
            self.lattice.add_fused(b.to)

    def all_bridges(self) -> list[BridgeRecord]:
        return sorted((b for group in self.bridges.values() for b in group), key=BridgeRecord.sort_key)

    # reading
    def get_fiber(self, d, include_universal: bool = False) -> FiberView:
        d = as_domain(d)
        parts = [self.fibers.get(d)]
        if include_universal and d != UNIVERSAL:
            parts.append(self.fibers.get(UNIVERSAL))
        return FiberView(d, parts)

    def subtree_fibers(self, d) -> list[Fiber]:
        """F(d) together with the fibers of every domain specializing d."""
        d = as_domain(d)
        return [f for dom, f in sorted(self.fibers.items()) if specializes(dom, d)]

    def record_set(self) -> set[FourTuple]:
        return set(self.records())


def get_fiber(kb: KnowledgeBase, d, include_universal: bool = False) -> FiberView:
    return kb.get_fiber(d, include_universal)


def iter_jsonl(lines: Iterable[str]):
    """Parse JSONL lines into records, reporting 1-based line numbers on failure."""
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=lineno) from None
        try:
            yield record_from_json(obj)
        except MalformedTuple as exc:
            raise MalformedTuple(str(exc), line=lineno) from None


def read_jsonl(path, kb: Optional[KnowledgeBase] = None) -> KnowledgeBase:
    """Load a JSONL file into ``kb`` (a fresh one when omitted)."""
    kb = KnowledgeBase() if kb is None else kb
    with open(path, encoding="utf-8") as fh:
        for rec in iter_jsonl(fh):
            if isinstance(rec, BridgeRecord):
                kb.store_bridge(rec)
            else:
                kb.add(rec)
    return kb


def load_jsonl(path) -> KnowledgeBase:
    return read_jsonl(path)


def dump_lines(kb: KnowledgeBase) -> list[str]:
    recs = sorted(kb.records(), key=FourTuple.sort_key)
    lines = [json.dumps(t.to_json(), separators=(",", ":")) for t in recs]
    lines.extend(json.dumps(b.to_json(), separators=(",", ":")) for b in kb.all_bridges())
    return lines


def save_jsonl(kb: KnowledgeBase, path) -> int:
    lines = dump_lines(kb)
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return len(lines)
