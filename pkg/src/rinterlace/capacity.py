"""Equilibrium measure, capacity, and hitting probabilities of a finite set.

The last-exit decomposition turns escape probabilities into a dense linear
system over the Green's matrix of G: solving ``green_matrix(G) @ e = 1``
yields the equilibrium measure ``e`` (supported on the internal boundary),
whose total mass is the capacity.  The same object answers, for any site z,

    h(z) = P_z[walk ever hits G] = sum_y g(z, y) e(y),

which drives the escape decision in the trace sampler, and the stronger
first-entry identity

    K(z, y) = P_z[walk hits G, first at y] = sum_w g(z, w) * inv(G_mat)[w, y],

whose row sums reproduce h(z) exactly (``inv(G_mat) @ 1`` is the equilibrium
measure).  K lets a sampler replace an entire outside excursion by one
Bernoulli draw (return or not) plus one categorical draw (the re-entry
site), which is what makes trace sampling O(1) per excursion instead of
step-resolved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NumericalFailureError
from .green import PotentialTable
from .lattice import LatticeSet, Site, neighbors

__all__ = ["Equilibrium", "equilibrium_measure"]

# Solve-quality gates.  Residual is checked unconditionally; the clamp bound
# is the magnitude of negative weight still attributable to roundoff.
_RESIDUAL_TOL = 1e-8
_CLAMP_TOL = 1e-10


@dataclass
class Equilibrium:
    """Solved equilibrium data for one set, plus memoized hit probabilities.

    Attributes
    ----------
    lattice : LatticeSet
        The set G.
    table : PotentialTable
        Green's function source used for the solve and for ``hit_probability``.
    weights : numpy.ndarray
        Equilibrium measure per site id; tiny negative roundoff clamped to 0.
    capacity : float
        Sum of the *solved* weights (pre-clamp), kept consistent with the
        linear system rather than with the clamped sampling weights.
    residual : float
        Max-norm residual of the solve.
    """

    lattice: LatticeSet
    table: PotentialTable
    weights: np.ndarray
    capacity: float
    residual: float
    _matrix: np.ndarray = field(repr=False)
    _start_cum: np.ndarray = field(repr=False)
    _hit_cache: dict = field(default_factory=dict, repr=False)
    _cond_cache: dict = field(default_factory=dict, repr=False)
    _entry_cache: dict = field(default_factory=dict, repr=False)
    _inverse_cache: np.ndarray | None = field(default=None, repr=False)

    # -- measure views ---------------------------------------------------

    def measure(self) -> dict[Site, float]:
        """Equilibrium measure as a site -> weight map."""
        return dict(zip(self.lattice.sites, self.weights.tolist()))

    def normalized(self) -> dict[Site, float]:
        """Starting-site distribution (the measure normalized to mass one)."""
        total = float(self.weights.sum())
        return {s: w / total for s, w in zip(self.lattice.sites, self.weights.tolist())}

    # -- hitting probability ----------------------------------------------

    def hit_probability(self, z: Site) -> float:
        """P_z[walk ever hits G], clamped to [0, 1]; exactly 1.0 on G."""
        if z in self.lattice:
            return 1.0
        value = self._hit_cache.get(z)
        if value is None:
            green = self.table.green
            w = self.weights
            acc = 0.0
            for i, y in enumerate(self.lattice.sites):
                acc += w[i] * green(z, y)
            value = min(1.0, max(0.0, acc))
            self._hit_cache[z] = value
        return value

    def conditioned_step_distribution(self, z: Site):
        """Step law of the walk from z conditioned to hit G.

        Doob h-transform with h = ``hit_probability`` (h = 1 on G): the
        probability of moving to neighbor w is proportional to h(w).

        Returns
        -------
        (tuple of Site, numpy.ndarray)
            The 2d neighbors of z and their probabilities (sum 1).
        """
        if z in self.lattice:
            raise InvalidInputError(
                f"conditioned step is defined outside G; {z} is a member"
            )
        nbrs, _, cum, total = self._conditioned_cum(z)
        probs = np.diff(np.concatenate(([0.0], cum)))
        return nbrs, probs / total

    def _conditioned_cum(self, z: Site):
        """Cached (neighbors, member ids, cumulative weights, total).

        Cumulative weights are a plain Python list: the trace sampler scans
        them element by element in its hot loop.
        """
        entry = self._cond_cache.get(z)
        if entry is None:
            nbrs = tuple(neighbors(z))
            ids = tuple(self.lattice.get_id(w) for w in nbrs)
            weights = [
                1.0 if i >= 0 else self.hit_probability(w)
                for w, i in zip(nbrs, ids)
            ]
            total = 0.0
            cum = []
            for w in weights:
                total += w
                cum.append(total)
            if total <= 0.0:
                raise NumericalFailureError(
                    f"conditioned-step weights vanish at {z}"
                )
            entry = (nbrs, ids, cum, total)
            self._cond_cache[z] = entry
        return entry

    # -- first-entry kernel -------------------------------------------------

    def entry_distribution(self, z: Site):
        """Law of the first site of G hit by the walk from z, given it hits.

        Returns
        -------
        (tuple of Site, numpy.ndarray, float)
            Sites of G carrying entry mass, their conditional probabilities
            (sum 1), and h(z) = P_z[walk ever hits G].
        """
        if z in self.lattice:
            raise InvalidInputError(
                f"entry distribution is defined outside G; {z} is a member"
            )
        hit, sites, _, cum, total = self._entry_row(z)
        probs = np.diff(np.concatenate(([0.0], np.asarray(cum)))) / total
        return sites, probs, hit

    def _green_inverse(self) -> np.ndarray:
        """Inverse of the Green's matrix of G, computed once on demand."""
        if self._inverse_cache is None:
            self._inverse_cache = np.linalg.inv(self._matrix)
        return self._inverse_cache

    def _entry_row(self, z: Site):
        """Cached (h, entry sites, entry ids, cumulative weights, total).

        The row K(z, .) = g(z, .) @ inv(G_mat) is exact to table precision;
        entries at non-boundary sites and negative roundoff are clamped to
        zero, and the row sum doubles as h(z), so the escape Bernoulli and
        the re-entry categorical stay mutually consistent by construction.
        Cumulative weights are a plain Python list for the sampler's linear
        scan; only sites with positive mass are kept.
        """
        entry = self._entry_cache.get(z)
        if entry is None:
            green = self.table.green
            g_vec = np.array([green(z, y) for y in self.lattice.sites])
            row = g_vec @ self._green_inverse()
            np.clip(row, 0.0, None, out=row)
            raw = float(row.sum())
            if raw <= 0.0:
                raise NumericalFailureError(
                    f"first-entry weights vanish at {z}"
                )
            hit = min(1.0, raw)
            keep = np.nonzero(row > 1e-15 * raw)[0]
            sites = tuple(self.lattice.sites[i] for i in keep)
            ids = keep.tolist()
            total = 0.0
            cum = []
            for i in keep:
                total += float(row[i])
                cum.append(total)
            entry = (hit, sites, ids, cum, total)
            self._entry_cache[z] = entry
            # Share the work: h(z) is the same row sum.
            self._hit_cache.setdefault(z, hit)
        return entry


def equilibrium_measure(lattice: LatticeSet, table: PotentialTable) -> Equilibrium:
    """Solve the last-exit system for G and package the result.

    Raises
    ------
    NumericalFailureError
        If the dense solve leaves a residual above 1e-8 or produces negative
        weights beyond roundoff size; the condition estimate is attached.
    """
    matrix = table.green_matrix(lattice)
    ones = np.ones(len(lattice))
    try:
        solved = np.linalg.solve(matrix, ones)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(
            f"equilibrium solve failed: {exc}", condition=float(np.linalg.cond(matrix))
        ) from None

    residual = float(np.abs(matrix @ solved - ones).max())
    if residual > _RESIDUAL_TOL:
        raise NumericalFailureError(
            f"equilibrium residual {residual:.3e} exceeds {_RESIDUAL_TOL:.0e}",
            condition=float(np.linalg.cond(matrix)),
        )
    if solved.min() < -_CLAMP_TOL:
        raise NumericalFailureError(
            f"equilibrium weight {solved.min():.3e} is negative beyond roundoff",
            condition=float(np.linalg.cond(matrix)),
        )

    capacity = float(solved.sum())
    if capacity <= 0.0:
        raise NumericalFailureError("capacity is non-positive")

    # Clamp protects sampling only; capacity above stays with the solve.
    weights = np.where(solved < 0.0, 0.0, solved)
    start_cum = np.cumsum(weights / weights.sum())
    return Equilibrium(
        lattice=lattice,
        table=table,
        weights=weights,
        capacity=capacity,
        residual=residual,
        _matrix=matrix,
        _start_cum=start_cum,
    )
