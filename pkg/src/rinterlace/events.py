"""Increasing events: monotone predicates on trajectory configurations.

Built-in events are specified by an :class:`EventSpec` (plain data, so
events cross process boundaries for parallel estimation) and all factor
through the visited-sites view of a configuration.  Custom events may
supply any predicate; :func:`check_monotone` property-tests the
monotonicity contract rather than assuming it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .capacity import Equilibrium
from .errors import InvalidInputError
from .lattice import LatticeSet, Site, neighbors
from .process import (
    Configuration,
    interlacement_set,
    sample_configuration,
    with_extra_trace,
)
from .walk import DEFAULT_EXCURSION_BUDGET, draw_trace

__all__ = [
    "EVENT_KINDS",
    "EventSpec",
    "IncreasingEvent",
    "build_event",
    "parse_event",
    "evaluate",
    "connected",
    "MonotoneReport",
    "check_monotone",
]

EVENT_KINDS = ("nonempty", "two_point", "site_visited", "full_cover")

# parameter names required by each kind, in canonical order
_KIND_PARAMS = {
    "nonempty": (),
    "two_point": ("v", "z"),
    "site_visited": ("x",),
    "full_cover": (),
}
# CLI surface spelling of each kind
_KIND_CLI = {"site_visited": "site"}
_CLI_KIND = {"site": "site_visited"}


@dataclass(frozen=True)
class EventSpec:
    """Kind plus parameter sites of a built-in event."""

    kind: str
    sites: tuple[Site, ...] = ()

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise InvalidInputError(
                f"unknown event kind {self.kind!r}; choose from {EVENT_KINDS}"
            )
        want = len(_KIND_PARAMS[self.kind])
        if len(self.sites) != want:
            raise InvalidInputError(
                f"event {self.kind!r} takes {want} site parameter(s), "
                f"got {len(self.sites)}"
            )

    def canonical_name(self) -> str:
        """The CLI-syntax spelling, used as the event name in reports."""
        kind = _KIND_CLI.get(self.kind, self.kind)
        params = _KIND_PARAMS[self.kind]
        parts = [kind]
        for key, site in zip(params, self.sites):
            parts.append(f"{key}=({','.join(str(c) for c in site)})")
        return " ".join(parts)


def parse_event(text: str) -> EventSpec:
    """Parse CLI event syntax.

    Accepted forms: ``nonempty``, ``two_point v=(x,y,z) z=(x,y,z)``,
    ``site x=(x,y,z)``, ``full_cover``.
    """
    tokens = text.strip().split()
    if not tokens:
        raise InvalidInputError("empty event specification")
    kind = _CLI_KIND.get(tokens[0], tokens[0])
    if kind not in EVENT_KINDS:
        raise InvalidInputError(
            f"unknown event kind {tokens[0]!r}; choose from "
            f"{tuple(_KIND_CLI.get(k, k) for k in EVENT_KINDS)}"
        )
    given: dict[str, Site] = {}
    for token in tokens[1:]:
        key, sep, value = token.partition("=")
        if not sep:
            raise InvalidInputError(f"malformed event parameter {token!r}")
        given[key] = _parse_site(value, key)
    want = _KIND_PARAMS[kind]
    if set(given) != set(want):
        raise InvalidInputError(
            f"event {kind!r} needs parameters {list(want)}, got {sorted(given)}"
        )
    return EventSpec(kind, tuple(given[k] for k in want))


def _parse_site(text: str, key: str) -> Site:
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    try:
        return tuple(int(part) for part in body.split(","))
    except ValueError:
        raise InvalidInputError(
            f"event parameter {key}={text!r} is not an integer tuple"
        ) from None


@dataclass(frozen=True)
class IncreasingEvent:
    """A named monotone predicate on configurations.

    Built-in events carry their :class:`EventSpec`; custom events supply a
    ``predicate`` callable instead (and are then not picklable for
    multi-process runs unless the callable is).
    """

    name: str
    spec: EventSpec | None = None
    predicate: Callable[[Configuration], bool] | None = field(
        default=None, compare=False
    )

    def evaluate(self, c: Configuration) -> bool:
        if self.predicate is not None:
            return bool(self.predicate(c))
        if self.spec is None:
            raise InvalidInputError(f"event {self.name!r} has no predicate")
        return _evaluate_builtin(self.spec, c)


def build_event(spec: EventSpec, lattice: LatticeSet) -> IncreasingEvent:
    """Validate parameters against G and name the event canonically."""
    for site in spec.sites:
        if site not in lattice:
            raise InvalidInputError(
                f"event parameter site {site} lies outside the set"
            )
    return IncreasingEvent(name=spec.canonical_name(), spec=spec)


def evaluate(ev: IncreasingEvent, c: Configuration) -> bool:
    """Whether the event occurs under configuration ``c``."""
    return ev.evaluate(c)


def _evaluate_builtin(spec: EventSpec, c: Configuration) -> bool:
    lattice = c.lattice
    for site in spec.sites:
        if site not in lattice:
            raise InvalidInputError(
                f"event parameter site {site} lies outside the configuration's set"
            )
    kind = spec.kind
    # Each branch is a pure function of interlacement_set(c); the early-exit
    # forms below are equivalent because every trace visits its start.
    if kind == "nonempty":
        return len(c.points) > 0
    if kind == "site_visited":
        x = spec.sites[0]
        return any(x in p.trace.visited for p in c.points)
    if kind == "full_cover":
        occupied: set[Site] = set()
        for p in c.points:
            occupied.update(p.trace.visited)
            if len(occupied) == len(lattice):
                return True
        return len(occupied) == len(lattice)
    # two_point: both endpoints in I, joined by a path inside I
    v, z = spec.sites
    occupied = set()
    for p in c.points:
        occupied.update(p.trace.visited)
    return _connected_ids(lattice, occupied, v, z)


def _connected_ids(lattice: LatticeSet, occupied: set, v: Site, z: Site) -> bool:
    """BFS over member ids; assumes v, z are members of the lattice."""
    if v == z:
        return v in occupied
    if v not in occupied or z not in occupied:
        return False
    rows = lattice._nbr_id_rows
    sites = lattice.sites
    target = lattice.site_id(z)
    occ = {lattice.site_id(s) for s in occupied}
    seen = {lattice.site_id(v)}
    frontier = [lattice.site_id(v)]
    while frontier:
        fresh = []
        for i in frontier:
            for j in rows[i]:
                if j < 0 or j in seen or j not in occ:
                    continue
                if j == target:
                    return True
                seen.add(j)
                fresh.append(j)
        frontier = fresh
    return False


def connected(occupied, v: Site, z: Site) -> bool:
    """True iff a nearest-neighbor path inside ``occupied`` joins v and z.

    The degenerate case v = z is resolved as ``v in occupied`` (a length-0
    path), which is this artifact's convention for the two-point event.
    """
    if v == z:
        return v in occupied
    if v not in occupied or z not in occupied:
        return False
    seen = {v}
    frontier = [v]
    while frontier:
        fresh = []
        for s in frontier:
            for w in neighbors(s):
                if w == z:
                    return True
                if w in occupied and w not in seen:
                    seen.add(w)
                    fresh.append(w)
        frontier = fresh
    return False


# ----------------------------------------------------------------------
# monotonicity property check
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneReport:
    """Outcome of an add-one-trajectory perturbation sweep."""

    trials: int
    violations: int
    first_violation: int | None = None

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_monotone(
    ev: IncreasingEvent,
    eq: Equilibrium,
    u: float,
    trials: int,
    rng: np.random.Generator,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> MonotoneReport:
    """Sample configurations, add one trajectory, count true->false flips.

    A correct increasing event yields zero violations; a decreasing
    predicate (e.g. one built on the vacant set) is caught quickly.
    """
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    violations = 0
    first = None
    for t in range(trials):
        c = sample_configuration(eq, u, rng, budget=budget)
        before = ev.evaluate(c)
        extra = draw_trace(eq, rng, budget=budget)
        after = ev.evaluate(with_extra_trace(c, extra))
        if before and not after:
            violations += 1
            if first is None:
                first = t
    return MonotoneReport(trials=trials, violations=violations, first_violation=first)
