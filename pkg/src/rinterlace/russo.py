"""Four independent Monte Carlo estimators of dP(A)/du, with cross-checks.

For an increasing event A of the restricted trajectory process, the
derivative of u -> P(A) admits three exact expressions, each of which this
module turns into an unbiased (or, for the finite difference, bias-budgeted)
Monte Carlo estimator:

e1  capacity x P(adding one independent trajectory to a configuration that
    misses A makes A occur) -- the only expression meaningful at u = 0,
    where it gives the right derivative;
e2  (1/u) x E[number of plus-pivotal trajectories];
e3  (1/u) x (E[M 1_A] - u x capacity x P(A)), with M the trajectory count;
fd  a central finite difference on one coupled realization per replica
    (common random numbers: both levels share the same trajectories).

The module also provides the closed forms available for the
vacant-set-misses-something event ("nonempty"), the deterministic
total-variation check with its 1/sqrt(theta) bound, the universal
derivative bound sqrt(capacity/u), and a grid scan of the pivotal density.

Determinism contract: replicas are simulated in fixed-size chunks, each
chunk from its own seeded RNG stream derived from (seed, estimator tag,
chunk index).  Chunks are assembled in index order, so results are
bit-identical for any worker count; the worker count never enters reports.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .capacity import Equilibrium, equilibrium_measure
from .errors import (
    EstimatorDisagreementError,
    InsufficientDataError,
    InvalidInputError,
)
from .events import EventSpec, IncreasingEvent, build_event, evaluate
from .green import PotentialTable
from .lattice import LatticeSet
from .pivotal import count_plus_pivotal
from .process import (
    restrict,
    sample_configuration,
    sample_level_process,
    with_extra_trace,
)
from .walk import DEFAULT_EXCURSION_BUDGET, draw_trace

__all__ = [
    "Estimate",
    "DerivativeBundle",
    "ScanPoint",
    "ScanReport",
    "DEFAULT_FD_STEP_FRACTION",
    "estimate_probability",
    "derivative_added_trajectory",
    "derivative_pivotal",
    "derivative_conditional",
    "derivative_finite_difference",
    "derivative_bundle",
    "conditional_trajectory_mean",
    "nonempty_probability",
    "nonempty_derivative",
    "nonempty_conditional_mean",
    "tv_distance_check",
    "universal_bound_check",
    "pivotal_density_scan",
]

# Replicas per RNG stream.  Small enough that stream-creation overhead is
# negligible, large enough that a run of any size is split identically no
# matter how many workers execute it.
_CHUNK = 512

# Estimator tags entering the per-chunk seed derivation; never reuse one.
_TAGS = {
    "prob": 0,
    "added": 1,
    "pivotal": 2,
    "conditional": 3,
    "fd": 4,
    "condpair": 5,
}

# Default finite-difference half-step as a fraction of u.
DEFAULT_FD_STEP_FRACTION = 0.05

_POISSON_TAIL = 1e-12  # truncation mass for the deterministic TV series


# ----------------------------------------------------------------------
# result containers
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo mean with its standard error.

    Attributes
    ----------
    mean : float
        Sample mean (times any deterministic scale of the estimator).
    stderr : float
        Sample standard deviation / sqrt(n); 0.0 when n = 1.
    n : int
        Number of replicas.
    seed : int
        Master seed of the run.
    meta : dict
        At least ``u``, ``cap``, ``event``, and ``kind``.
    """

    mean: float
    stderr: float
    n: int
    seed: int
    meta: dict

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n": self.n,
            "seed": self.seed,
            "meta": dict(self.meta),
        }


@dataclass(frozen=True)
class DerivativeBundle:
    """The four derivative estimates at one (event, u), plus cross-checks.

    ``checks`` holds one entry per estimator pair (and per estimator against
    the closed form, when one is known), each recording the sigma distance
    and whether it stays within ``max_sigma``.
    """

    added_trajectory: Estimate
    pivotal_count: Estimate
    conditional_count: Estimate
    finite_difference: Estimate
    closed_form: float | None
    max_sigma: float
    checks: tuple[dict, ...]

    @property
    def all_pass(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def estimates(self) -> dict[str, Estimate]:
        """The four estimates under their report keys."""
        return {
            "e1": self.added_trajectory,
            "e2": self.pivotal_count,
            "e3": self.conditional_count,
            "fd": self.finite_difference,
        }

    def to_dict(self) -> dict:
        out: dict = {
            key: {"mean": est.mean, "stderr": est.stderr}
            for key, est in self.estimates().items()
        }
        if self.closed_form is not None:
            out["closed_form"] = self.closed_form
        out["checks"] = [dict(c) for c in self.checks]
        return out


@dataclass(frozen=True)
class ScanPoint:
    """One grid point of a pivotal-density scan."""

    u: float
    estimate: Estimate
    below: bool
    undecided: bool


@dataclass(frozen=True)
class ScanReport:
    """Fraction of a u-grid on which the derivative sits under a threshold.

    The derivative integrates to at most 1 over any interval, so on a grid
    of the interval (u1, u2) the fraction of points where it stays at or
    under alpha/(u2-u1) must exceed 1 - 1/alpha, up to the statistical
    resolution ``eps_stat`` (the fraction of points whose 3-sigma interval
    straddles the threshold).
    """

    u1: float
    u2: float
    alpha: float
    grid_size: int
    threshold: float
    points: tuple[ScanPoint, ...]
    fraction_below: float
    eps_stat: float
    target: float
    holds: bool

    def to_dict(self) -> dict:
        return {
            "u1": self.u1,
            "u2": self.u2,
            "alpha": self.alpha,
            "grid_size": self.grid_size,
            "threshold": self.threshold,
            "fraction_below": self.fraction_below,
            "eps_stat": self.eps_stat,
            "target": self.target,
            "holds": self.holds,
            "points": [
                {
                    "u": p.u,
                    "mean": p.estimate.mean,
                    "stderr": p.estimate.stderr,
                    "below": p.below,
                    "undecided": p.undecided,
                }
                for p in self.points
            ],
        }

    def csv_rows(self) -> list[tuple[float, str, float, float]]:
        """(u, estimator, mean, stderr) rows for the scan CSV."""
        return [
            (p.u, "e2", p.estimate.mean, p.estimate.stderr) for p in self.points
        ]


# ----------------------------------------------------------------------
# replica simulation
# ----------------------------------------------------------------------


def _simulate_chunk(
    eq: Equilibrium,
    event: IncreasingEvent,
    kind: str,
    u: float,
    h: float | None,
    budget: int,
    rng: np.random.Generator,
    count: int,
) -> np.ndarray:
    """Raw per-replica values for one chunk (scales applied later).

    Emitting indicator- and count-valued floats here keeps the later
    aggregation exact: a mean of 0/1 values times a scale reproduces the
    scale bit-for-bit when every indicator is 1.
    """
    if kind == "prob":
        out = np.empty(count)
        for i in range(count):
            c = sample_configuration(eq, u, rng, budget=budget)
            out[i] = 1.0 if evaluate(event, c) else 0.0
        return out

    if kind == "added":
        out = np.empty(count)
        for i in range(count):
            c = sample_configuration(eq, u, rng, budget=budget)
            if evaluate(event, c):
                out[i] = 0.0
                continue
            extra = draw_trace(eq, rng, budget=budget)
            occurred = evaluate(event, with_extra_trace(c, extra))
            out[i] = 1.0 if occurred else 0.0
        return out

    if kind == "pivotal":
        out = np.empty(count)
        for i in range(count):
            c = sample_configuration(eq, u, rng, budget=budget)
            out[i] = float(count_plus_pivotal(event, c).n_plus)
        return out

    if kind == "conditional":
        theta = u * eq.capacity
        out = np.zeros(count)
        for i in range(count):
            c = sample_configuration(eq, u, rng, budget=budget)
            if evaluate(event, c):
                out[i] = len(c.points) - theta
        return out

    if kind == "fd":
        out = np.zeros(count)
        for i in range(count):
            lp = sample_level_process(eq, u + h, rng, budget=budget)
            if evaluate(event, restrict(lp, u + h)):
                # The event is increasing, so the lower level can only fail
                # when the upper one does; the difference is 0 or 1.
                if not evaluate(event, restrict(lp, u - h)):
                    out[i] = 1.0
        return out

    if kind == "condpair":
        out = np.zeros((count, 2))
        for i in range(count):
            c = sample_configuration(eq, u, rng, budget=budget)
            if evaluate(event, c):
                out[i, 0] = len(c.points)
                out[i, 1] = 1.0
        return out

    raise InvalidInputError(f"unknown estimator kind {kind!r}")


# Per-process cache of (Equilibrium, IncreasingEvent) contexts, so a worker
# pays the table build and the dense solve once, not once per chunk.
_WORKER_CONTEXTS: dict = {}


def _context_for(key):
    ctx = _WORKER_CONTEXTS.get(key)
    if ctx is None:
        dimension, precision, radius, sites, ev_kind, ev_sites = key
        lattice = LatticeSet.from_sites(list(sites))
        table = PotentialTable(
            dimension=dimension, precision=precision, asymptotic_radius=radius
        )
        eq = equilibrium_measure(lattice, table)
        event = build_event(EventSpec(kind=ev_kind, sites=ev_sites), lattice)
        ctx = (eq, event)
        _WORKER_CONTEXTS[key] = ctx
    return ctx


def _chunk_job(args):
    """Top-level worker entry point (must be picklable)."""
    key, kind, u, h, budget, seed_path, count = args
    eq, event = _context_for(key)
    rng = np.random.default_rng(np.random.SeedSequence(seed_path))
    return _simulate_chunk(eq, event, kind, u, h, budget, rng, count)


def _collect_values(
    eq: Equilibrium,
    event: IncreasingEvent,
    kind: str,
    u: float,
    n: int,
    seed: int,
    workers: int,
    h: float | None = None,
    budget: int = DEFAULT_EXCURSION_BUDGET,
    seed_extras: tuple[int, ...] = (),
) -> np.ndarray:
    """Assemble all replica values in chunk order (worker-count invariant)."""
    if n < 1:
        raise InvalidInputError(f"sample count must be >= 1, got {n}")
    if seed < 0:
        raise InvalidInputError(f"seed must be a nonnegative integer, got {seed}")
    if workers < 1:
        raise InvalidInputError(f"worker count must be >= 1, got {workers}")

    full, rem = divmod(n, _CHUNK)
    counts = [_CHUNK] * full + ([rem] if rem else [])
    tag = _TAGS[kind]
    paths = [(seed, tag, *seed_extras, i) for i in range(len(counts))]

    if workers == 1 or len(counts) == 1:
        parts = [
            _simulate_chunk(
                eq,
                event,
                kind,
                u,
                h,
                budget,
                np.random.default_rng(np.random.SeedSequence(path)),
                c,
            )
            for path, c in zip(paths, counts)
        ]
    else:
        if event.spec is None:
            raise InvalidInputError(
                "custom-predicate events do not serialize; run them with workers=1"
            )
        key = (
            eq.lattice.dimension,
            eq.table.precision,
            eq.table.asymptotic_radius,
            eq.lattice.sites,
            event.spec.kind,
            event.spec.sites,
        )
        jobs = [
            (key, kind, u, h, budget, path, c) for path, c in zip(paths, counts)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(_chunk_job, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
            )

    return np.concatenate(parts, axis=0)


def _as_estimate(
    values: np.ndarray,
    n: int,
    seed: int,
    meta: dict,
    scale: float = 1.0,
) -> Estimate:
    mean = scale * float(values.mean())
    stderr = (
        abs(scale) * float(values.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    )
    return Estimate(mean=mean, stderr=stderr, n=n, seed=seed, meta=meta)


def _meta(eq: Equilibrium, event: IncreasingEvent, u: float, kind: str, **extra):
    meta = {"u": u, "cap": eq.capacity, "event": event.name, "kind": kind}
    meta.update(extra)
    return meta


# ----------------------------------------------------------------------
# the estimators
# ----------------------------------------------------------------------


def estimate_probability(
    eq: Equilibrium,
    event: IncreasingEvent,
    u: float,
    n: int,
    seed: int,
    workers: int = 1,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> Estimate:
    """P(A) at intensity u as a plain indicator mean (u = 0 allowed)."""
    if u < 0.0:
        raise InvalidInputError(f"intensity must be nonnegative, got {u}")
    values = _collect_values(eq, event, "prob", u, n, seed, workers, budget=budget)
    return _as_estimate(values, n, seed, _meta(eq, event, u, "probability"))


def derivative_added_trajectory(
    eq: Equilibrium,
    event: IncreasingEvent,
    u: float,
    n: int,
    seed: int,
    workers: int = 1,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> Estimate:
    """Derivative as capacity x P(one added trajectory turns A on).

    Each replica samples a configuration at u and one independent
    trajectory; the estimator is capacity times the indicator that the
    configuration misses A but the extended one hits it.  Valid at u = 0
    (right derivative), where the configuration is always empty and the
    mean is exactly capacity whenever a single trajectory always
    triggers A.
    """
    if u < 0.0:
        raise InvalidInputError(f"intensity must be nonnegative, got {u}")
    values = _collect_values(eq, event, "added", u, n, seed, workers, budget=budget)
    return _as_estimate(
        values,
        n,
        seed,
        _meta(eq, event, u, "added-trajectory"),
        scale=eq.capacity,
    )


def derivative_pivotal(
    eq: Equilibrium,
    event: IncreasingEvent,
    u: float,
    n: int,
    seed: int,
    workers: int = 1,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> Estimate:
    """Derivative as (1/u) x mean count of plus-pivotal trajectories."""
    if u <= 0.0:
        raise InvalidInputError(
            f"the pivotal-count expression divides by u; u must be > 0, got {u}"
        )
    values = _collect_values(eq, event, "pivotal", u, n, seed, workers, budget=budget)
    return _as_estimate(
        values,
        n,
        seed,
        _meta(eq, event, u, "pivotal-count"),
        scale=1.0 / u,
    )


def derivative_conditional(
    eq: Equilibrium,
    event: IncreasingEvent,
    u: float,
    n: int,
    seed: int,
    workers: int = 1,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> Estimate:
    """Derivative as (1/u) x (E[M 1_A] - u x capacity x P(A)).

    Computed per replica as the single value 1_A x (M - u x capacity),
    then averaged.  Because the expression is a linear combination of the
    correlated pair (M 1_A, 1_A) from the same sample, the sample standard
    deviation of the per-replica values equals the covariance-aware
    (delta-method) standard error of the combination; no separate
    covariance estimate is needed.
    """
    if u <= 0.0:
        raise InvalidInputError(
            f"the conditional expression divides by u; u must be > 0, got {u}"
        )
    values = _collect_values(
        eq, event, "conditional", u, n, seed, workers, budget=budget
    )
    return _as_estimate(
        values,
        n,
        seed,
        _meta(eq, event, u, "conditional-count"),
        scale=1.0 / u,
    )


def derivative_finite_difference(
    eq: Equilibrium,
    event: IncreasingEvent,
    u: float,
    n: int,
    seed: int,
    h: float | None = None,
    workers: int = 1,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> Estimate:
    """Central difference (P(u+h) - P(u-h)) / 2h on coupled realizations.

    Each replica draws one realization up to u + h and evaluates the event
    on its restrictions to u + h and u - h, so the difference is a 0/1
    indicator per replica (common random numbers).  Default h is
    ``DEFAULT_FD_STEP_FRACTION * u``.
    """
    if u <= 0.0:
        raise InvalidInputError(f"finite difference needs u > 0, got {u}")
    if h is None:
        h = DEFAULT_FD_STEP_FRACTION * u
    if not 0.0 < h < u:
        raise InvalidInputError(
            f"finite-difference half-step must satisfy 0 < h < u, got h={h}, u={u}"
        )
    values = _collect_values(
        eq, event, "fd", u, n, seed, workers, h=h, budget=budget
    )
    return _as_estimate(
        values,
        n,
        seed,
        _meta(eq, event, u, "finite-difference", h=h),
        scale=1.0 / (2.0 * h),
    )


# ----------------------------------------------------------------------
# closed forms for the nonempty event
# ----------------------------------------------------------------------


def nonempty_probability(u: float, capacity: float) -> float:
    """P(at least one trajectory visits G) = 1 - exp(-u x capacity)."""
    return -math.expm1(-u * capacity)


def nonempty_derivative(u: float, capacity: float) -> float:
    """d/du of :func:`nonempty_probability` = capacity x exp(-u x capacity)."""
    return capacity * math.exp(-u * capacity)


def nonempty_conditional_mean(u: float, capacity: float) -> float:
    """E[trajectory count | at least one] = theta / (1 - exp(-theta))."""
    theta = u * capacity
    if theta <= 0.0:
        raise InvalidInputError(f"conditional mean needs u > 0, got u={u}")
    return theta / -math.expm1(-theta)


# ----------------------------------------------------------------------
# the bundle
# ----------------------------------------------------------------------


def _sigma_distance(m1: float, s1: float, m2: float, s2: float) -> float:
    spread = math.hypot(s1, s2)
    diff = abs(m1 - m2)
    if spread == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / spread


def derivative_bundle(
    eq: Equilibrium,
    event: IncreasingEvent,
    u: float,
    n: int,
    seed: int,
    h: float | None = None,
    workers: int = 1,
    budget: int = DEFAULT_EXCURSION_BUDGET,
    max_sigma: float = 4.0,
    closed_form: float | str | None = "auto",
    strict: bool = True,
) -> DerivativeBundle:
    """All four derivative estimates at (event, u), cross-checked pairwise.

    Parameters
    ----------
    closed_form : float, "auto", or None
        Reference value for the derivative.  "auto" supplies the known
        closed form when the event is the built-in nonempty event and
        nothing otherwise.
    max_sigma : float
        Disagreement limit in combined-standard-error units.
    strict : bool
        When True (default), any check beyond ``max_sigma`` raises
        :class:`EstimatorDisagreementError` naming the pair and the seed;
        when False the failing checks are only recorded in the bundle.

    Raises
    ------
    EstimatorDisagreementError
        Under ``strict`` when estimators (or the closed form) disagree.
    """
    e1 = derivative_added_trajectory(eq, event, u, n, seed, workers, budget)
    e2 = derivative_pivotal(eq, event, u, n, seed, workers, budget)
    e3 = derivative_conditional(eq, event, u, n, seed, workers, budget)
    fd = derivative_finite_difference(
        eq, event, u, n, seed, h=h, workers=workers, budget=budget
    )

    if closed_form == "auto":
        is_nonempty = event.spec is not None and event.spec.kind == "nonempty"
        reference = nonempty_derivative(u, eq.capacity) if is_nonempty else None
    else:
        reference = closed_form

    named = [("e1", e1), ("e2", e2), ("e3", e3), ("fd", fd)]
    checks = []
    for i, (name_a, a) in enumerate(named):
        for name_b, b in named[i + 1 :]:
            sigma = _sigma_distance(a.mean, a.stderr, b.mean, b.stderr)
            checks.append(
                {
                    "pair": f"{name_a}:{name_b}",
                    "difference": a.mean - b.mean,
                    "sigma": sigma,
                    "max_sigma": max_sigma,
                    "pass": sigma <= max_sigma,
                }
            )
    if reference is not None:
        for name_a, a in named:
            sigma = _sigma_distance(a.mean, a.stderr, reference, 0.0)
            checks.append(
                {
                    "pair": f"{name_a}:closed_form",
                    "difference": a.mean - reference,
                    "sigma": sigma,
                    "max_sigma": max_sigma,
                    "pass": sigma <= max_sigma,
                }
            )

    bundle = DerivativeBundle(
        added_trajectory=e1,
        pivotal_count=e2,
        conditional_count=e3,
        finite_difference=fd,
        closed_form=reference,
        max_sigma=max_sigma,
        checks=tuple(checks),
    )
    if strict and not bundle.all_pass:
        failing = [c["pair"] for c in checks if not c["pass"]]
        raise EstimatorDisagreementError(
            f"derivative estimators disagree beyond {max_sigma} sigma "
            f"for event {event.name!r} at u={u}: pairs {failing}; "
            f"seed={seed}, n={n} (replay with these to reproduce)"
        )
    return bundle


# ----------------------------------------------------------------------
# conditional trajectory count
# ----------------------------------------------------------------------


def conditional_trajectory_mean(
    eq: Equilibrium,
    event: IncreasingEvent,
    u: float,
    n: int,
    seed: int,
    workers: int = 1,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> Estimate:
    """E[trajectory count | A occurs] as a ratio estimator.

    The standard error comes from the delta method on the correlated pair
    (mean of M 1_A, mean of 1_A) computed from shared samples.

    Raises
    ------
    InsufficientDataError
        If the event never occurs among the n samples.
    """
    if u <= 0.0:
        raise InvalidInputError(f"conditioning needs u > 0, got {u}")
    pairs = _collect_values(eq, event, "condpair", u, n, seed, workers, budget=budget)
    x = pairs[:, 0]  # M * 1_A
    y = pairs[:, 1]  # 1_A
    occurrences = int(y.sum())
    if occurrences == 0:
        raise InsufficientDataError(
            f"event {event.name!r} never occurred in {n} samples at u={u}; "
            "cannot form a conditional mean"
        )
    mean_y = float(y.mean())
    ratio = float(x.mean()) / mean_y
    if n > 1 and occurrences > 0:
        sxx = float(x.var(ddof=1))
        syy = float(y.var(ddof=1))
        sxy = float(np.cov(x, y, ddof=1)[0, 1])
        var_ratio = (sxx - 2.0 * ratio * sxy + ratio * ratio * syy) / (
            mean_y * mean_y * n
        )
        stderr = math.sqrt(max(var_ratio, 0.0))
    else:
        stderr = 0.0
    meta = _meta(eq, event, u, "conditional-trajectory-mean", occurrences=occurrences)
    return Estimate(mean=ratio, stderr=stderr, n=n, seed=seed, meta=meta)


# ----------------------------------------------------------------------
# deterministic checks and bounds
# ----------------------------------------------------------------------


def tv_distance_check(theta: float) -> dict:
    """Total-variation cost of one extra trajectory, with its bound.

    For X ~ Poisson(theta), the distance equals E|X/theta - 1|, summed
    deterministically as exp(-theta) + sum_k |p_k - p_{k-1}| over the
    Poisson weights p_k.  Past the mode the dropped terms telescope to the
    last included weight, so the series runs until both the remaining mass
    and that weight are negligible (absolute error well under 1e-12).
    The bound is theta^(-1/2).
    """
    if theta <= 0.0:
        raise InvalidInputError(f"theta must be positive, got {theta}")
    p = math.exp(-theta)
    cumulative = p
    tv = p  # k = 0 term: |p_0 - 0|
    prev = p
    k = 1
    while cumulative < 1.0 - _POISSON_TAIL or prev > 1e-16 or k <= theta:
        p = prev * theta / k
        tv += abs(p - prev)
        cumulative += p
        prev = p
        k += 1
        if k > 10_000_000:  # unreachable for sane theta; guards the loop
            break
    bound = 1.0 / math.sqrt(theta)
    return {"theta": theta, "tv": tv, "bound": bound, "holds": tv <= bound}


def universal_bound_check(
    eq: Equilibrium,
    event: IncreasingEvent,
    u: float,
    n: int,
    seed: int,
    workers: int = 1,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> dict:
    """Verify dP/du <= sqrt(capacity/u) and E[pivotal count] <= sqrt(theta).

    Both inequalities are universal over increasing events.  Each is
    checked against its Monte Carlo estimate plus a 3-sigma allowance; the
    report carries the numbers and per-check flags.
    """
    if u <= 0.0:
        raise InvalidInputError(f"bound check needs u > 0, got {u}")
    theta = u * eq.capacity
    e1 = derivative_added_trajectory(eq, event, u, n, seed, workers, budget)
    e2 = derivative_pivotal(eq, event, u, n, seed, workers, budget)

    derivative_bound = math.sqrt(eq.capacity / u)
    derivative_holds = e1.mean <= derivative_bound + 3.0 * e1.stderr

    pivotal_mean = u * e2.mean  # back to the raw count scale
    pivotal_stderr = u * e2.stderr
    pivotal_bound = math.sqrt(theta)
    pivotal_holds = pivotal_mean <= pivotal_bound + 3.0 * pivotal_stderr

    return {
        "u": u,
        "cap": eq.capacity,
        "theta": theta,
        "event": event.name,
        "n": n,
        "seed": seed,
        "derivative_mean": e1.mean,
        "derivative_stderr": e1.stderr,
        "derivative_bound": derivative_bound,
        "derivative_holds": derivative_holds,
        "pivotal_mean": pivotal_mean,
        "pivotal_stderr": pivotal_stderr,
        "pivotal_bound": pivotal_bound,
        "pivotal_holds": pivotal_holds,
        "holds": derivative_holds and pivotal_holds,
    }


def pivotal_density_scan(
    eq: Equilibrium,
    event: IncreasingEvent,
    u1: float,
    u2: float,
    grid_size: int,
    alpha: float,
    n: int,
    seed: int,
    workers: int = 1,
    budget: int = DEFAULT_EXCURSION_BUDGET,
) -> ScanReport:
    """Scan the derivative over (u1, u2) against the level alpha/(u2-u1).

    The grid is the ``grid_size`` midpoints of equal subintervals (so u = 0
    never enters the 1/u expression even when u1 = 0).  A point counts as
    below when its point estimate sits at or under the threshold;
    ``eps_stat`` is the fraction of points whose 3-sigma interval straddles
    the threshold, and the asserted inequality is
    fraction_below > 1 - 1/alpha - eps_stat.
    """
    if not 0.0 <= u1 < u2:
        raise InvalidInputError(
            f"scan interval must satisfy 0 <= u1 < u2, got u1={u1}, u2={u2}"
        )
    if alpha <= 1.0:
        raise InvalidInputError(f"alpha must exceed 1, got {alpha}")
    if grid_size < 1:
        raise InvalidInputError(f"grid size must be >= 1, got {grid_size}")

    width = u2 - u1
    threshold = alpha / width
    step = width / grid_size
    points = []
    for j in range(grid_size):
        uj = u1 + (j + 0.5) * step
        values = _collect_values(
            eq,
            event,
            "pivotal",
            uj,
            n,
            seed,
            workers,
            budget=budget,
            seed_extras=(j,),
        )
        est = _as_estimate(
            values,
            n,
            seed,
            _meta(eq, event, uj, "pivotal-count", grid_index=j),
            scale=1.0 / uj,
        )
        below = est.mean <= threshold
        undecided = abs(est.mean - threshold) < 3.0 * est.stderr
        points.append(ScanPoint(u=uj, estimate=est, below=below, undecided=undecided))

    fraction = sum(1 for p in points if p.below) / grid_size
    eps_stat = sum(1 for p in points if p.undecided) / grid_size
    target = 1.0 - 1.0 / alpha - eps_stat
    return ScanReport(
        u1=u1,
        u2=u2,
        alpha=alpha,
        grid_size=grid_size,
        threshold=threshold,
        points=tuple(points),
        fraction_below=fraction,
        eps_stat=eps_stat,
        target=target,
        holds=fraction > target,
    )
