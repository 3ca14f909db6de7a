"""Domain paths and the prefix-specialization order over them.

A domain is written ``@Seg1@Seg2...``.  A path specializes every path whose
segments form a prefix of its own, so ``@Physics@Quantum`` specializes
``@Physics``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .errors import EmptyLattice, MalformedDomain

_SEGMENT = re.compile(r"[A-Za-z0-9_]+")
# greedy stem, so "ICD11" splits as ("ICD", 11) and "Turn12" as ("Turn", 12)
_NUMBERED = re.compile(r"([A-Za-z0-9_]*[A-Za-z_])(\d+)")

BEFORE = "before"
AFTER = "after"
EQUAL = "equal"
INCOMPARABLE = "incomparable"


@dataclass(frozen=True, order=True)
class DomainPath:
    segments: tuple[str, ...]

    def __post_init__(self):
        if not self.segments:
            raise MalformedDomain("a domain needs at least one segment")
        for seg in self.segments:
            if not isinstance(seg, str) or not _SEGMENT.fullmatch(seg):
                raise MalformedDomain(f"illegal domain segment {seg!r}")

    @property
    def raw(self) -> str:
        return "@" + "@".join(self.segments)

    @property
    def depth(self) -> int:
        return len(self.segments)

    def __str__(self):
        return self.raw

    def __repr__(self):
        return f"DomainPath({self.raw!r})"

    def ancestors(self) -> Iterator[DomainPath]:
        """Yield proper ancestors, nearest first."""
        for i in range(len(self.segments) - 1, 0, -1):
            yield DomainPath(self.segments[:i])


def parse_domain(s: str) -> DomainPath:
    if not isinstance(s, str) or not s:
        raise MalformedDomain("empty domain string")
    if not s.startswith("@"):
        raise MalformedDomain(f"domain must start with '@': {s!r}")
    parts = s[1:].split("@")
    for part in parts:
        if not part:
            raise MalformedDomain(f"empty segment in {s!r}")
        if not _SEGMENT.fullmatch(part):
            raise MalformedDomain(f"illegal characters in segment {part!r} of {s!r}")
    return DomainPath(tuple(parts))


def as_domain(d) -> DomainPath:
    """Accept either a DomainPath or its string form."""
    if isinstance(d, DomainPath):
        return d
    return parse_domain(d)


def specializes(child: DomainPath, parent: DomainPath) -> bool:
    n = len(parent.segments)
    return len(child.segments) >= n and child.segments[:n] == parent.segments


def common_ancestor(a: DomainPath, b: DomainPath) -> Optional[DomainPath]:
    shared = []
    for x, y in zip(a.segments, b.segments):
        if x != y:
            break
        shared.append(x)
    return DomainPath(tuple(shared)) if shared else None


def parent(p: DomainPath) -> Optional[DomainPath]:
    if len(p.segments) <= 1:
        return None
    return DomainPath(p.segments[:-1])


def _numbered(segment: str):
    m = _NUMBERED.fullmatch(segment)
    if m is None:
        return None
    return m.group(1), int(m.group(2))


def temporal_compare(a: DomainPath, b: DomainPath) -> str:
    """Order two sibling domains by the integer suffix of their last segment.

    Only the leaf verdict is reported: ``@CBT@Session1@Turn3`` and
    ``@CBT@Session2@Turn1`` are incomparable here even though their parents
    are ordered.  Use :func:`temporal_order` to walk the shared path.
    """
    if a == b:
        return EQUAL
    if a.segments[:-1] != b.segments[:-1]:
        return INCOMPARABLE
    na, nb = _numbered(a.segments[-1]), _numbered(b.segments[-1])
    if na is None or nb is None or na[0] != nb[0]:
        return INCOMPARABLE
    if na[1] < nb[1]:
        return BEFORE
    if na[1] > nb[1]:
        return AFTER
    # Turn03 vs Turn3: same number, different spelling
    return INCOMPARABLE


def temporal_order(a: DomainPath, b: DomainPath) -> str:
    """Compare two paths at the first segment where they diverge."""
    if a == b:
        return EQUAL
    for i, (x, y) in enumerate(zip(a.segments, b.segments)):
        if x != y:
            return temporal_compare(DomainPath(a.segments[: i + 1]), DomainPath(b.segments[: i + 1]))
    # one path is a prefix of the other
    return INCOMPARABLE


class DomainLattice:
    """The set of known domains under prefix specialization.

    ``add`` registers a domain together with all of its prefixes.  Fused
    domains created by bridges are registered alone, without prefixes, so
    they stay incomparable with the domains they join.
    """

    def __init__(self, domains: Iterable = ()):
        self.domains: set[DomainPath] = set()
        self.fused: set[DomainPath] = set()
        for d in domains:
            self.add(d)

    def add(self, d) -> DomainPath:
        d = as_domain(d)
        self.domains.add(d)
        self.domains.update(d.ancestors())
        return d

    def add_fused(self, d) -> DomainPath:
        d = as_domain(d)
        self.domains.add(d)
        self.fused.add(d)
        return d

    def __contains__(self, d) -> bool:
        return as_domain(d) in self.domains

    def __iter__(self):
        return iter(sorted(self.domains))

    def __len__(self):
        return len(self.domains)

    def parent(self, d) -> Optional[DomainPath]:
        return parent(as_domain(d))

    def height(self) -> int:
        if not self.domains:
            raise EmptyLattice("lattice has no domains")
        return max(d.depth for d in self.domains)

    def descendants(self, d, include_self: bool = True) -> list[DomainPath]:
        d = as_domain(d)
        return sorted(x for x in self.domains if specializes(x, d) and (include_self or x != d))

    def by_depth(self) -> list[list[DomainPath]]:
        """Stored domains grouped by depth, shallowest first."""
        if not self.domains:
            return []
        levels: list[list[DomainPath]] = [[] for _ in range(self.height())]
        for d in self.domains:
            levels[d.depth - 1].append(d)
        return [sorted(level) for level in levels]


def height(lattice: DomainLattice) -> int:
    return lattice.height()
