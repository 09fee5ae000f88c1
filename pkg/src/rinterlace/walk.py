"""Exact-in-law sampling of a walk's visits to G, run "to infinity".

No truncation enters the law: whenever the walk steps out of G to a site z,
a single Bernoulli decides between escaping forever (probability
``1 - h(z)``) and returning, and conditioned on returning the re-entry site
is drawn directly from the first-entry kernel K(z, .) / h(z) supplied by
:class:`~rinterlace.capacity.Equilibrium`.  The excursion's wandering
outside G never has to be simulated because a trace only records visits to
G; collapsing it keeps every excursion O(1) regardless of how far the walk
would have strayed.  Each kernel weight is exact up to the Green table's
precision, so the law of the recorded visits equals the law of (range of
the infinite walk) intersected with G at that accuracy.

:func:`sample_trace_stepwise` keeps the step-resolved alternative — the
Doob h-transform walk with transition weights proportional to the hit
probability of the destination — whose visit law is identical.  It exists
so tests can check the two constructions against each other; it is not the
production path because its excursion lengths are heavy-tailed (no finite
mean), which makes large sampling runs infeasible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .capacity import Equilibrium
from .errors import BudgetExceededError
from .lattice import Site

__all__ = [
    "GTrace",
    "SamplerStats",
    "DEFAULT_EXCURSION_BUDGET",
    "sample_start",
    "sample_trace",
    "sample_trace_stepwise",
    "draw_trace",
    "trace_to_dict",
    "trace_from_dict",
]

logger = logging.getLogger(__name__)

# For sample_trace: excursions allowed to one trace.  For the step-resolved
# variant: steps allowed to one excursion.  Either way the budget converts a
# pathological run into an observable (a logged discard) rather than silent
# truncation bias; the collapsed sampler draws geometrically many excursions
# per trace, so in practice it never comes close.
DEFAULT_EXCURSION_BUDGET = 10**6


@dataclass(frozen=True)
class GTrace:
    """One trajectory as seen from G.

    Attributes
    ----------
    start : Site
        First visit (a member of G).
    visits : tuple of Site
        Ordered visits with multiplicity, beginning with ``start``.
    excursions : tuple of bool
        One flag per consecutive-visit transition: True when the walk left
        G between the two visits, False when they are one walk step apart.
    exits : tuple of Site
        Every site just outside G the walk stepped to, in order; the last
        exit is the one from which the walk escaped for good.
    """

    start: Site
    visits: tuple[Site, ...]
    excursions: tuple[bool, ...]
    exits: tuple[Site, ...]

    @cached_property
    def visited(self) -> frozenset[Site]:
        """Distinct visited sites (the trace's contribution to the process)."""
        return frozenset(self.visits)

    def __len__(self) -> int:
        return len(self.visits)


@dataclass
class SamplerStats:
    """Counters for trace sampling; tracks the budget-discard rate."""

    traces: int = 0
    discards: int = 0

    @property
    def discard_rate(self) -> float:
        total = self.traces + self.discards
        return self.discards / total if total else 0.0


def sample_start(eq: Equilibrium, rng: np.random.Generator) -> Site:
    """Draw the trajectory starting site from the normalized measure."""
    i = int(np.searchsorted(eq._start_cum, rng.random(), side="right"))
    return eq.lattice.sites[min(i, len(eq.lattice) - 1)]


def sample_trace(
    start: Site,
    eq: Equilibrium,
    rng: np.random.Generator,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> GTrace:
    """Sample the full visit sequence of one walk from ``start``.

    Inside G the walk is a plain simple random walk.  On stepping out to z
    the excursion is collapsed: escape with probability ``1 - h(z)``, else
    re-enter at a site drawn from the first-entry kernel.

    Parameters
    ----------
    start : Site
        Member of G where the walk begins.
    eq : Equilibrium
        Solved equilibrium data for G (supplies the first-entry kernel).
    rng : numpy.random.Generator
        Source of randomness; consumed in buffered blocks.
    budget : int
        Maximum number of excursions in one trace.

    Raises
    ------
    BudgetExceededError
        If the trace exceeds ``budget`` excursions; the caller must discard
        the sample (see :func:`draw_trace`).
    InvalidInputError
        If ``start`` is not a member of G.
    """
    lattice = eq.lattice
    cur = lattice.site_id(start)
    two_d = 2 * lattice.dimension
    id_rows = lattice._nbr_id_rows
    site_rows = lattice._nbr_site_rows
    sites = lattice.sites
    entry_row = eq._entry_row

    visits = [start]
    flags: list[bool] = []
    exits: list[Site] = []
    excursions = 0

    # buffered uniforms: one block refill per 256 decisions
    buf = rng.random(256).tolist()
    pos = 0

    while True:
        if pos == 256:
            buf = rng.random(256).tolist()
            pos = 0
        k = int(buf[pos] * two_d)
        pos += 1
        nxt = id_rows[cur][k]
        if nxt >= 0:
            visits.append(sites[nxt])
            flags.append(False)
            cur = nxt
            continue

        # stepped outside to z: escape check, then collapsed re-entry
        z = site_rows[cur][k]
        exits.append(z)
        hit, entry_sites, entry_ids, cum, total = entry_row(z)
        if pos == 256:
            buf = rng.random(256).tolist()
            pos = 0
        u_escape = buf[pos]
        pos += 1
        if u_escape >= hit:
            break  # escaped to infinity

        excursions += 1
        if excursions > budget:
            raise BudgetExceededError(
                f"trace exceeded {budget} excursions"
            )
        if pos == 256:
            buf = rng.random(256).tolist()
            pos = 0
        r = buf[pos] * total
        pos += 1
        j = 0
        while cum[j] < r:
            j += 1
        visits.append(entry_sites[j])
        flags.append(True)
        cur = entry_ids[j]

    return GTrace(start, tuple(visits), tuple(flags), tuple(exits))


def sample_trace_stepwise(
    start: Site,
    eq: Equilibrium,
    rng: np.random.Generator,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> GTrace:
    """Step-resolved reference sampler with the same visit law.

    Excursions are walked site by site under the Doob h-transform
    (:meth:`Equilibrium.conditioned_step_distribution`) instead of being
    collapsed through the first-entry kernel.  Kept for cross-validation;
    excursion lengths are heavy-tailed, so use small sample sizes and
    expect occasional budget discards.

    Raises
    ------
    BudgetExceededError
        If one excursion exceeds ``budget`` steps.
    """
    lattice = eq.lattice
    cur = lattice.site_id(start)
    two_d = 2 * lattice.dimension
    id_rows = lattice._nbr_id_rows
    site_rows = lattice._nbr_site_rows
    sites = lattice.sites
    hit = eq.hit_probability
    cond_cum = eq._conditioned_cum

    visits = [start]
    flags: list[bool] = []
    exits: list[Site] = []

    buf = rng.random(256).tolist()
    pos = 0

    while True:
        if pos == 256:
            buf = rng.random(256).tolist()
            pos = 0
        k = int(buf[pos] * two_d)
        pos += 1
        nxt = id_rows[cur][k]
        if nxt >= 0:
            visits.append(sites[nxt])
            flags.append(False)
            cur = nxt
            continue

        z = site_rows[cur][k]
        exits.append(z)
        if pos == 256:
            buf = rng.random(256).tolist()
            pos = 0
        u_escape = buf[pos]
        pos += 1
        if u_escape >= hit(z):
            break  # escaped to infinity

        steps = 0
        while True:
            nbrs, ids, cum, total = cond_cum(z)
            if pos == 256:
                buf = rng.random(256).tolist()
                pos = 0
            r = buf[pos] * total
            pos += 1
            j = 0
            while cum[j] < r:
                j += 1
            entered = ids[j]
            if entered >= 0:
                visits.append(nbrs[j])
                flags.append(True)
                cur = entered
                break
            z = nbrs[j]
            steps += 1
            if steps > budget:
                raise BudgetExceededError(
                    f"conditioned excursion exceeded {budget} steps"
                )

    return GTrace(start, tuple(visits), tuple(flags), tuple(exits))


def draw_trace(
    eq: Equilibrium,
    rng: np.random.Generator,
    stats: SamplerStats | None = None,
    start: Site | None = None,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> GTrace:
    """Sample a trace, discarding and resampling on budget overruns.

    Discards are logged and counted in ``stats`` (when given); the sample
    is never truncated.  With ``start=None`` each attempt draws a fresh
    starting site from the normalized measure.
    """
    while True:
        s = sample_start(eq, rng) if start is None else start
        try:
            trace = sample_trace(s, eq, rng, budget=budget)
        except BudgetExceededError:
            if stats is not None:
                stats.discards += 1
            logger.warning("discarded a trace: excursion budget %d exceeded", budget)
            continue
        if stats is not None:
            stats.traces += 1
        return trace


# ----------------------------------------------------------------------
# fixture serialization
# ----------------------------------------------------------------------


def trace_to_dict(trace: GTrace) -> dict:
    """JSON-ready view of a trace (coordinate lists + excursion flags)."""
    return {
        "start": list(trace.start),
        "visits": [list(v) for v in trace.visits],
        "excursions": [bool(f) for f in trace.excursions],
        "exits": [list(z) for z in trace.exits],
    }


def trace_from_dict(payload: dict) -> GTrace:
    """Rebuild a trace from :func:`trace_to_dict` output."""
    visits = tuple(tuple(int(c) for c in v) for v in payload["visits"])
    flags = tuple(bool(f) for f in payload["excursions"])
    if len(flags) != max(0, len(visits) - 1):
        raise ValueError("excursion flags must pair consecutive visits")
    exits = tuple(tuple(int(c) for c in z) for z in payload.get("exits", []))
    start = tuple(int(c) for c in payload["start"])
    if not visits or visits[0] != start:
        raise ValueError("start must be the first visit")
    return GTrace(start, visits, flags, exits)
