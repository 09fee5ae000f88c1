"""The restricted trajectory process: level-coupled Poisson configurations.

A :class:`LevelProcess` carries one coupled realization for every intensity
in ``[0, u_max]``: the number of trajectories is Poisson(u_max * capacity),
each trajectory gets an independent Uniform(0, u_max] level, and restricting
to intensity u keeps exactly the points with level <= u.  All level slices
of one realization are therefore monotonically nested, which is what the
finite-difference derivative estimator exploits (common random numbers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacity import Equilibrium
from .errors import InvalidInputError
from .lattice import LatticeSet, Site
from .walk import (
    DEFAULT_EXCURSION_BUDGET,
    GTrace,
    SamplerStats,
    draw_trace,
    trace_from_dict,
    trace_to_dict,
)

__all__ = [
    "LevelPoint",
    "LevelProcess",
    "Configuration",
    "ADDED_TRACE_LEVEL",
    "sample_level_process",
    "sample_configuration",
    "empty_configuration",
    "restrict",
    "interlacement_set",
    "vacant_set",
    "with_extra_trace",
    "points_to_json",
    "points_from_json",
]

# Sentinel level marking a trajectory appended by hand (the added-trajectory
# derivative estimator): the level index of such a trajectory carries no
# information, so it is never materialized as a real number in (0, u].
ADDED_TRACE_LEVEL = math.inf


@dataclass(frozen=True)
class LevelPoint:
    """One trajectory tagged with its intensity level."""

    level: float
    trace: GTrace


@dataclass(frozen=True)
class LevelProcess:
    """A coupled realization serving every intensity in [0, u_max]."""

    lattice: LatticeSet
    u_max: float
    points: tuple[LevelPoint, ...]  # sorted by level


@dataclass(frozen=True)
class Configuration:
    """The process restricted to intensity u: all points with level <= u.

    A configuration extended by :func:`with_extra_trace` additionally holds
    one point at the sentinel level (infinity), which no restriction ever
    produces; its level is never compared.
    """

    lattice: LatticeSet
    u: float
    points: tuple[LevelPoint, ...]


def sample_level_process(
    eq: Equilibrium,
    u_max: float,
    rng: np.random.Generator,
    stats: SamplerStats | None = None,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> LevelProcess:
    """Sample one coupled realization up to intensity ``u_max``.

    The trajectory count is Poisson(u_max * cap); given the count, levels
    are independent Uniform(0, u_max] (sorted ascending), and traces are
    drawn independently from the normalized starting measure.
    """
    if u_max <= 0.0:
        raise InvalidInputError(f"u_max must be positive, got {u_max}")
    count = int(rng.poisson(u_max * eq.capacity))
    # 1 - U puts the levels in (0, u_max], keeping them almost surely distinct
    levels = np.sort(u_max * (1.0 - rng.random(count)))
    points = tuple(
        LevelPoint(float(lvl), draw_trace(eq, rng, stats=stats, budget=budget))
        for lvl in levels
    )
    return LevelProcess(eq.lattice, float(u_max), points)


def restrict(lp: LevelProcess, u: float) -> Configuration:
    """The configuration at intensity ``u``: points with level <= u."""
    if not 0.0 <= u <= lp.u_max:
        raise InvalidInputError(
            f"restriction level {u} outside [0, {lp.u_max}]"
        )
    kept = tuple(p for p in lp.points if p.level <= u)
    return Configuration(lp.lattice, float(u), kept)


def empty_configuration(lattice: LatticeSet, u: float = 0.0) -> Configuration:
    """The configuration with no trajectories (the only one at u = 0)."""
    return Configuration(lattice, float(u), ())


def sample_configuration(
    eq: Equilibrium,
    u: float,
    rng: np.random.Generator,
    stats: SamplerStats | None = None,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> Configuration:
    """One configuration at intensity ``u`` (empty when u = 0)."""
    if u == 0.0:
        return empty_configuration(eq.lattice)
    lp = sample_level_process(eq, u, rng, stats=stats, budget=budget)
    return Configuration(eq.lattice, float(u), lp.points)


def interlacement_set(c: Configuration) -> frozenset[Site]:
    """Sites of G visited by at least one trajectory of ``c``."""
    out: set[Site] = set()
    for p in c.points:
        out.update(p.trace.visited)
    return frozenset(out)


def vacant_set(c: Configuration) -> frozenset[Site]:
    """Sites of G visited by no trajectory of ``c``."""
    return frozenset(c.lattice.sites) - interlacement_set(c)


def with_extra_trace(c: Configuration, trace: GTrace) -> Configuration:
    """``c`` plus one independent trajectory at the sentinel level."""
    return Configuration(
        c.lattice, c.u, c.points + (LevelPoint(ADDED_TRACE_LEVEL, trace),)
    )


# ----------------------------------------------------------------------
# fixture serialization: a JSON list of {level, trace}
# ----------------------------------------------------------------------


def points_to_json(points) -> list[dict]:
    """Fixture view of a point sequence for deterministic replay."""
    return [
        {"level": p.level, "trace": trace_to_dict(p.trace)} for p in points
    ]


def points_from_json(payload) -> tuple[LevelPoint, ...]:
    """Rebuild points from :func:`points_to_json` output."""
    return tuple(
        LevelPoint(float(item["level"]), trace_from_dict(item["trace"]))
        for item in payload
    )
