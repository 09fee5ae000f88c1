"""Acceptance gate: one test per shipped guarantee, each printing a
single PASS/FAIL line with the measured values (run with ``-s`` to see
the lines as they complete).

The eleven guarantees:

 1. potential-kernel golden value and harmonic identity
 2. capacity closed forms, monotonicity, subadditivity
 3. trace visited-set law against a truncated brute-force oracle
 4. closed-form occupation probability on the 2x2x2 box
 5. four-way derivative estimator consistency on a 3x3 grid
 6. exact right derivative at u = 0
 7. pivotal counting on the four-trace fixture and failing configurations
 8. universal derivative / pivotal bounds plus the density scan
 9. deterministic total-variation series against 1/sqrt(theta)
10. monotonicity of every built-in event under added trajectories
11. bit-identical reports for any worker count
"""

import itertools
import json
import math
import shutil
import subprocess
import sys
import time

import numpy as np
import pytest

from rinterlace import (
    IncreasingEvent,
    LatticeSet,
    PotentialTable,
    SamplerStats,
    build_event,
    check_monotone,
    count_plus_pivotal,
    derivative_added_trajectory,
    derivative_bundle,
    draw_trace,
    equilibrium_measure,
    estimate_probability,
    evaluate,
    neighbors,
    parse_event,
    pivotal_density_scan,
    sample_configuration,
    tv_distance_check,
    vacant_set,
)

from fixtures import four_trace_configuration
from oracles import green_quadrature_oracle, truncated_hit_fraction

pytestmark = pytest.mark.acceptance

GRID_SEED = 20_250_819
GRID_N = 100_000
GRID_THETAS = (0.5, 1.0, 2.0)
GRID_EVENTS = (
    "nonempty",
    "two_point v=(0,0,0) z=(3,3,3)",
    "site x=(0,0,0)",
)


def conclude(number: int, label: str, ok: bool, detail: str):
    line = f"CRITERION {number:02d} {'PASS' if ok else 'FAIL'} | {label} | {detail}"
    print(line, flush=True)
    assert ok, line


@pytest.fixture(scope="module")
def grid_bundles(box444_eq):
    """Derivative bundles for three events x three intensities, shared by
    the consistency and bound criteria."""
    bundles = {}
    for text in GRID_EVENTS:
        event = build_event(parse_event(text), box444_eq.lattice)
        for theta in GRID_THETAS:
            u = theta / box444_eq.capacity
            bundles[(text, theta)] = derivative_bundle(
                box444_eq,
                event,
                u,
                GRID_N,
                GRID_SEED,
                max_sigma=3.0,
                strict=False,
            )
    return bundles


def test_criterion_01_potential_kernel(table3):
    started = time.monotonic()
    oracle = green_quadrature_oracle((0, 0, 0))
    origin_error = abs(table3.green((0, 0, 0)) - oracle)

    worst_residual = 0.0
    for v in itertools.product(range(-10, 11), repeat=3):
        mean = sum(table3.green(w) for w in neighbors(v)) / 6.0
        source = 1.0 if v == (0, 0, 0) else 0.0
        worst_residual = max(worst_residual, abs(mean - table3.green(v) + source))
    elapsed = time.monotonic() - started

    ok = origin_error <= 1e-6 and worst_residual <= 1e-8 and elapsed < 30.0
    conclude(
        1,
        "potential kernel golden value + harmonic identity",
        ok,
        f"origin error {origin_error:.2e} (<=1e-6), worst residual "
        f"{worst_residual:.2e} (<=1e-8), {elapsed:.1f}s (<30s)",
    )


def test_criterion_02_capacity(table3, singleton_eq, pair_eq):
    g0 = table3.green((0, 0, 0))
    singleton_error = abs(singleton_eq.capacity - 1.0 / g0)
    pair_error = abs(pair_eq.capacity - 2.0 / (2.0 * g0 - 1.0))

    rng = np.random.default_rng(2102)
    window = list(itertools.product(range(4), repeat=3))
    violations = 0
    worst_gap = 0.0
    for _ in range(100):
        size_b = int(rng.integers(2, 13))
        b_idx = rng.choice(len(window), size=size_b, replace=False)
        b_sites = [window[i] for i in b_idx]
        size_a = int(rng.integers(1, size_b + 1))
        a_sites = [b_sites[i] for i in rng.choice(size_b, size=size_a, replace=False)]
        size_c = int(rng.integers(1, 13))
        c_idx = rng.choice(len(window), size=size_c, replace=False)
        c_sites = [window[i] for i in c_idx]

        cap = {
            key: equilibrium_measure(LatticeSet.from_sites(sites), table3).capacity
            for key, sites in (
                ("a", a_sites),
                ("b", b_sites),
                ("c", c_sites),
                ("bc", sorted(set(b_sites) | set(c_sites))),
            )
        }
        mono_gap = cap["a"] - cap["b"]
        sub_gap = cap["bc"] - (cap["b"] + cap["c"])
        worst_gap = max(worst_gap, mono_gap, sub_gap)
        if mono_gap > 1e-8 or sub_gap > 1e-8:
            violations += 1

    ok = singleton_error <= 1e-8 and pair_error <= 1e-8 and violations == 0
    conclude(
        2,
        "capacity closed forms + monotonicity + subadditivity",
        ok,
        f"singleton err {singleton_error:.2e}, pair err {pair_error:.2e} "
        f"(<=1e-8), 100 random set pairs, worst inequality gap "
        f"{worst_gap:.2e}, violations {violations}",
    )


def test_criterion_03_sampler_law(pair_eq):
    n = 100_000
    stats = SamplerStats()
    rng = np.random.default_rng(2103)
    a, b = (0, 0, 0), (1, 0, 0)
    counts = {frozenset({a}): 0, frozenset({b}): 0, frozenset({a, b}): 0}
    for _ in range(n):
        counts[draw_trace(pair_eq, rng, stats=stats).visited] += 1
    law = {k: v / n for k, v in counts.items()}

    # Oracle: a trajectory is a plain walk from either end (by symmetry,
    # each with weight 1/2); it covers the pair iff it ever hits the other
    # end, estimated by truncated brute force at radius 50.
    frac = truncated_hit_fraction(a, [b], 50, n, np.random.default_rng(2113))
    oracle = {
        frozenset({a, b}): frac,
        frozenset({a}): (1.0 - frac) / 2.0,
        frozenset({b}): (1.0 - frac) / 2.0,
    }
    tv = 0.5 * sum(abs(law[k] - oracle[k]) for k in oracle)

    ok = tv <= 0.01 and stats.discard_rate < 1e-4
    conclude(
        3,
        "trace visited-set law vs truncated brute force",
        ok,
        f"TV {tv:.4f} (<=0.01) over {n} samples, discard rate "
        f"{stats.discard_rate:.2e} (<1e-4)",
    )


def test_criterion_04_closed_form_probability(box222_eq):
    event = build_event(parse_event("nonempty"), box222_eq.lattice)
    details = []
    ok = True
    for theta in (0.5, 1.0, 2.0):
        started = time.monotonic()
        u = theta / box222_eq.capacity
        est = estimate_probability(box222_eq, event, u, 100_000, 2104)
        elapsed = time.monotonic() - started
        target = -math.expm1(-theta)
        gap = abs(est.mean - target)
        ok = ok and gap <= 3.0 * est.stderr and elapsed < 60.0
        details.append(
            f"theta={theta}: |{est.mean:.5f}-{target:.5f}|="
            f"{gap:.2e}<={3 * est.stderr:.2e}, {elapsed:.1f}s"
        )
    conclude(4, "occupation probability closed form", ok, "; ".join(details))


def test_criterion_05_estimator_consistency(grid_bundles):
    worst_sigma = 0.0
    worst_cell = ""
    failed = []
    for (text, theta), bundle in grid_bundles.items():
        for check in bundle.checks:
            if check["sigma"] > worst_sigma:
                worst_sigma = check["sigma"]
                worst_cell = f"{text} theta={theta} {check['pair']}"
            if not check["pass"]:
                failed.append(f"{text} theta={theta} {check['pair']}")
    n_checks = sum(len(b.checks) for b in grid_bundles.values())
    ok = not failed
    conclude(
        5,
        "four-way derivative consistency (3 events x 3 intensities)",
        ok,
        f"{n_checks} checks at 3 sigma, n={GRID_N}; worst {worst_sigma:.2f} "
        f"sigma at {worst_cell}"
        + (f"; FAILED: {failed}" if failed else ""),
    )


def test_criterion_06_right_derivative_at_zero(box222_eq):
    event = build_event(parse_event("nonempty"), box222_eq.lattice)
    est = derivative_added_trajectory(box222_eq, event, 0.0, 2000, 2106)
    ok = est.mean == box222_eq.capacity and est.stderr == 0.0
    conclude(
        6,
        "right derivative at u=0 equals capacity exactly",
        ok,
        f"estimate {est.mean!r} == capacity {box222_eq.capacity!r}, "
        f"stderr {est.stderr}",
    )


def test_criterion_07_pivotal_fixture(box444_eq):
    lattice, config = four_trace_configuration()
    event = build_event(parse_event("two_point v=(0,0,0) z=(4,0,0)"), lattice)
    report = count_plus_pivotal(event, config)
    fixture_ok = report.n_plus == 3 and report.pivotal_indices == (0, 1, 2)

    corner_event = build_event(
        parse_event("two_point v=(0,0,0) z=(3,3,3)"), box444_eq.lattice
    )
    rng = np.random.default_rng(2107)
    u = 0.7 / box444_eq.capacity
    checked = 0
    nonzero = 0
    while checked < 1000:
        c = sample_configuration(box444_eq, u, rng)
        if evaluate(corner_event, c):
            continue
        failing = count_plus_pivotal(corner_event, c)
        if failing.n_plus != 0 or failing.occurred:
            nonzero += 1
        checked += 1

    ok = fixture_ok and nonzero == 0
    conclude(
        7,
        "pivotal counting: fixture + failing configurations",
        ok,
        f"four-trace fixture n_plus={report.n_plus} (expect 3), indices "
        f"{report.pivotal_indices}; {checked} failing configs with "
        f"{nonzero} nonzero counts",
    )


def test_criterion_08_universal_bounds(box444_eq, grid_bundles):
    cap = box444_eq.capacity
    bound_failures = []
    worst_margin = -math.inf
    for (text, theta), bundle in grid_bundles.items():
        u = theta / cap
        e1 = bundle.added_trajectory
        derivative_slack = e1.mean - (math.sqrt(cap / u) + 3.0 * e1.stderr)
        e2 = bundle.pivotal_count
        pivotal_slack = u * e2.mean - (math.sqrt(theta) + 3.0 * u * e2.stderr)
        worst_margin = max(worst_margin, derivative_slack, pivotal_slack)
        if derivative_slack > 0 or pivotal_slack > 0:
            bound_failures.append(f"{text} theta={theta}")

    event = build_event(parse_event(GRID_EVENTS[1]), box444_eq.lattice)
    scan = pivotal_density_scan(
        box444_eq, event, 0.5 / cap, 4.0 / cap, 8, 4.0, 20_000, 2108
    )

    ok = not bound_failures and scan.holds
    conclude(
        8,
        "universal derivative/pivotal bounds + density scan",
        ok,
        f"9 grid cells, worst bound margin {worst_margin:.3f} (<=0); scan "
        f"fraction {scan.fraction_below:.3f} > target {scan.target:.3f} "
        f"(alpha=4, eps_stat {scan.eps_stat:.3f})"
        + (f"; FAILED: {bound_failures}" if bound_failures else ""),
    )


def test_criterion_09_total_variation_series():
    details = []
    ok = True
    for theta in (0.25, 1.0, 4.0, 16.0, 64.0, 256.0):
        report = tv_distance_check(theta)
        ok = ok and report["holds"]
        details.append(f"theta={theta:g}: tv={report['tv']:.4f}<={report['bound']:.4f}")
    unit_gap = abs(tv_distance_check(1.0)["tv"] - 2.0 * math.exp(-1.0))
    ok = ok and unit_gap <= 1e-9
    conclude(
        9,
        "total-variation series vs 1/sqrt(theta)",
        ok,
        "; ".join(details) + f"; |tv(1)-2/e|={unit_gap:.1e} (<=1e-9)",
    )


def test_criterion_10_monotonicity_sweep(box222_eq, singleton_eq):
    events = (
        "nonempty",
        "two_point v=(0,0,0) z=(1,1,1)",
        "site x=(0,0,0)",
        "full_cover",
    )
    u = 1.0 / box222_eq.capacity
    total_trials = 0
    total_violations = 0
    for index, text in enumerate(events):
        event = build_event(parse_event(text), box222_eq.lattice)
        report = check_monotone(
            event, box222_eq, u, 2500, np.random.default_rng(2110 + index)
        )
        total_trials += report.trials
        total_violations += report.violations

    planted = IncreasingEvent(
        "vacant_nonempty", predicate=lambda c: len(vacant_set(c)) > 0
    )
    caught = check_monotone(
        planted,
        singleton_eq,
        0.5 / singleton_eq.capacity,
        200,
        np.random.default_rng(2120),
    )

    ok = total_violations == 0 and total_trials == 10_000 and caught.violations > 0
    conclude(
        10,
        "monotonicity sweep over built-in events",
        ok,
        f"{total_trials} perturbations across {len(events)} events, "
        f"{total_violations} flips; planted decreasing event flipped "
        f"{caught.violations}/200 times",
    )


def test_criterion_11_worker_invariant_reports(tmp_path):
    script = shutil.which("rinterlace")
    base = [script] if script else [sys.executable, "-m", "rinterlace.cli"]
    outputs = []
    for name, workers in (("one", "1"), ("one-again", "1"), ("two", "2")):
        out_dir = tmp_path / name
        cmd = base + [
            "verify-russo",
            "--box", "2,2,2",
            "--event", "nonempty",
            "--u", "0.35",
            "--n", "4000",
            "--seed", "7",
            "--workers", workers,
            "--output", str(out_dir),
            "--no-figures",
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=300)
        assert proc.returncode == 0, proc.stderr
        outputs.append(
            (
                (out_dir / "verify-russo.json").read_bytes(),
                (out_dir / "verify-russo.csv").read_bytes(),
            )
        )

    repeat_same = outputs[0] == outputs[1]
    workers_same = outputs[0] == outputs[2]
    payload = json.loads(outputs[0][0])
    ok = repeat_same and workers_same and payload["all_pass"] is True
    conclude(
        11,
        "bit-identical verify-russo reports for any worker count",
        ok,
        f"rerun identical: {repeat_same}; workers 1 vs 2 identical: "
        f"{workers_same}; all_pass: {payload['all_pass']}",
    )
