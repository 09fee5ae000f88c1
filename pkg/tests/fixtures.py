"""Deterministic hand-built configurations used by the event, pivotal, and
acceptance tests.

The centerpiece is a four-trace configuration on a 5x5x1 slab where exactly
three of the four traces are individually indispensable for connecting two
opposite corners of the bottom row: the three traces that jointly tile the
path (0,0,0)-(4,0,0) are each load-bearing, while the fourth trace sits on
the row above and can be removed freely.
"""

from rinterlace import Configuration, LatticeSet, LevelPoint, trace_from_dict

PATH_ENDPOINTS = ((0, 0, 0), (4, 0, 0))


def _trace(sites):
    return trace_from_dict(
        {
            "start": list(sites[0]),
            "visits": [list(s) for s in sites],
            "excursions": [False] * (len(sites) - 1),
            "exits": [],
        }
    )


def slab_lattice() -> LatticeSet:
    return LatticeSet.from_box((5, 5, 1))


def four_trace_configuration(u: float = 1.0):
    """(lattice, configuration) with traces A, B, C tiling the bottom row
    and a spare trace D on the row above; removal of any one of A/B/C
    disconnects the corners, removal of D does not."""
    lattice = slab_lattice()
    traces = [
        _trace([(0, 0, 0), (1, 0, 0)]),
        _trace([(1, 0, 0), (2, 0, 0), (3, 0, 0)]),
        _trace([(3, 0, 0), (4, 0, 0)]),
        _trace([(0, 1, 0), (1, 1, 0)]),
    ]
    levels = (0.1, 0.2, 0.3, 0.4)
    points = tuple(LevelPoint(lv, tr) for lv, tr in zip(levels, traces))
    return lattice, Configuration(lattice, u, points)
