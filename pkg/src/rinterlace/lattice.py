"""Finite subsets of the integer lattice Z^d and simple-random-walk geometry.

A :class:`LatticeSet` is an immutable, deterministically ordered finite set of
integer sites together with precomputed adjacency, which every other module
builds on.  Only dimensions d >= 3 are supported: the walk must be transient
for escape probabilities to be meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, UnsupportedDimensionError

__all__ = ["Site", "LatticeSet", "neighbors", "srw_step"]

# A lattice site is a plain tuple of ints; keeping the alias purely for
# readability of signatures.
Site = tuple[int, ...]


def neighbors(site: Site) -> list[Site]:
    """Return the 2d nearest neighbors of ``site`` in a fixed order.

    Order is -e1, +e1, -e2, +e2, ...; deterministic so that seeded sampling
    is reproducible.
    """
    out = []
    for axis in range(len(site)):
        for step in (-1, 1):
            out.append(site[:axis] + (site[axis] + step,) + site[axis + 1:])
    return out


def srw_step(site: Site, rng: np.random.Generator) -> Site:
    """One step of the simple random walk: a uniformly chosen neighbor."""
    d = len(site)
    k = int(rng.integers(2 * d))
    axis, step = divmod(k, 2)
    return site[:axis] + (site[axis] + (1 if step else -1),) + site[axis + 1:]


@dataclass(frozen=True)
class LatticeSet:
    """A finite set G of sites in Z^d with precomputed adjacency.

    Construct through :meth:`from_sites` or :meth:`from_box`; the constructor
    itself assumes ``sites`` is already sorted and duplicate-free.

    Attributes
    ----------
    sites : tuple of Site
        All member sites in lexicographic order.  The position of a site in
        this tuple is its integer id throughout the package.
    dimension : int
        Lattice dimension d (>= 3).
    """

    sites: tuple[Site, ...]
    dimension: int
    _index: dict = field(repr=False, hash=False, compare=False)
    _neighbor_ids: np.ndarray = field(repr=False, hash=False, compare=False)
    # Plain-Python mirrors of the adjacency, for the samplers' hot loops
    # (scalar ndarray indexing is several times slower than list indexing).
    _nbr_id_rows: list = field(repr=False, hash=False, compare=False)
    _nbr_site_rows: list = field(repr=False, hash=False, compare=False)

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @staticmethod
    def from_sites(sites) -> "LatticeSet":
        """Build from an iterable of integer coordinate tuples."""
        cleaned = sorted({tuple(int(c) for c in s) for s in sites})
        if not cleaned:
            raise InvalidInputError("a lattice set must contain at least one site")
        d = len(cleaned[0])
        if any(len(s) != d for s in cleaned):
            raise InvalidInputError("all sites must share one dimension")
        if d < 3:
            raise UnsupportedDimensionError(
                f"dimension {d} is not supported: the walk must be transient (d >= 3)"
            )
        index = {s: i for i, s in enumerate(cleaned)}
        nbr = np.full((len(cleaned), 2 * d), -1, dtype=np.int64)
        site_rows = []
        for i, s in enumerate(cleaned):
            row = neighbors(s)
            site_rows.append(row)
            for j, w in enumerate(row):
                nbr[i, j] = index.get(w, -1)
        return LatticeSet(tuple(cleaned), d, index, nbr, nbr.tolist(), site_rows)

    @staticmethod
    def from_box(sides, origin=None) -> "LatticeSet":
        """Build the full box ``prod_j {origin_j, ..., origin_j + sides_j - 1}``.

        Parameters
        ----------
        sides : sequence of int
            Positive side lengths, one per axis; the length fixes d.
        origin : sequence of int, optional
            Lower corner; defaults to the origin.
        """
        sides = tuple(int(s) for s in sides)
        if any(s <= 0 for s in sides):
            raise InvalidInputError(f"box sides must be positive, got {sides}")
        if origin is None:
            origin = (0,) * len(sides)
        origin = tuple(int(c) for c in origin)
        if len(origin) != len(sides):
            raise InvalidInputError("origin and sides must have equal length")
        ranges = [range(o, o + s) for o, s in zip(origin, sides)]
        grids = np.meshgrid(*ranges, indexing="ij")
        sites = zip(*(g.ravel().tolist() for g in grids))
        return LatticeSet.from_sites(sites)

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.sites)

    def __contains__(self, site) -> bool:
        return site in self._index

    def __iter__(self):
        return iter(self.sites)

    def site_id(self, site: Site) -> int:
        """Integer id of ``site`` (its position in :attr:`sites`)."""
        try:
            return self._index[site]
        except KeyError:
            raise InvalidInputError(f"site {site} is not in the set") from None

    def get_id(self, site: Site, default: int = -1) -> int:
        """Like :meth:`site_id`, but returns ``default`` for non-members."""
        return self._index.get(site, default)

    @property
    def neighbor_ids(self) -> np.ndarray:
        """(n, 2d) array of member-neighbor ids, -1 where the neighbor is outside."""
        return self._neighbor_ids

    def internal_boundary(self) -> tuple[Site, ...]:
        """Sites of G having at least one lattice neighbor outside G."""
        on_boundary = (self._neighbor_ids < 0).any(axis=1)
        return tuple(s for s, b in zip(self.sites, on_boundary) if b)

    def describe(self) -> dict:
        """JSON-friendly description used in reports."""
        return {
            "dimension": self.dimension,
            "n_sites": len(self.sites),
            "sites": [list(s) for s in self.sites],
        }
