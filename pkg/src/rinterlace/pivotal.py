"""Plus-pivotal trajectory counting by leave-one-out re-evaluation.

A trajectory of an occurring increasing event is plus-pivotal when removing
it (alone) makes the event fail.  When the event does not occur, the count
is zero by definition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .events import IncreasingEvent
from .process import Configuration

__all__ = ["PivotalReport", "count_plus_pivotal"]


@dataclass(frozen=True)
class PivotalReport:
    """Occurrence flag, pivotal count, and the indices that were pivotal."""

    occurred: bool
    n_plus: int
    pivotal_indices: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "occurred": self.occurred,
            "n_plus": self.n_plus,
            "pivotal_indices": list(self.pivotal_indices),
        }


def count_plus_pivotal(ev: IncreasingEvent, c: Configuration) -> PivotalReport:
    """Count the trajectories whose sole removal makes ``ev`` fail on ``c``.

    Costs one evaluation plus one per trajectory (O(M) evaluations).
    """
    if not ev.evaluate(c):
        return PivotalReport(occurred=False, n_plus=0, pivotal_indices=())
    points = c.points
    pivotal = []
    for i in range(len(points)):
        reduced = Configuration(c.lattice, c.u, points[:i] + points[i + 1:])
        if not ev.evaluate(reduced):
            pivotal.append(i)
    return PivotalReport(occurred=True, n_plus=len(pivotal), pivotal_indices=tuple(pivotal))
