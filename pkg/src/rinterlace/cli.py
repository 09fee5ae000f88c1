"""Command-line surface: batch runs that end in files, never in a UI.

Subcommands
-----------
capacity      solve the equilibrium system of a set and report its capacity
sample        draw level-tagged trajectory samples as a replayable fixture
estimate      Monte Carlo P(A) over a list of intensities
verify-russo  the four derivative estimators, cross-checked pairwise
verify-bounds universal derivative / pivotal-count bounds
tv-lemma      deterministic total-variation series against 1/sqrt(theta)
scan-pivotal  grid scan of the derivative against alpha/(u2-u1)

Configuration values come from (highest priority first) command-line flags,
the ``--config`` JSON file, then built-in defaults; the default output
directory can also be set with the RINTERLACE_OUTPUT_DIR environment
variable.  Exit status is 0 only when every requested check passes; invalid
configuration exits 2 with a message naming the offending field.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import equilibrium_measure
from .errors import InvalidInputError, RInterlaceError
from .events import build_event, parse_event
from .green import DEFAULT_ASYMPTOTIC_RADIUS, DEFAULT_PRECISION, PotentialTable
from .lattice import LatticeSet
from .process import points_to_json, sample_level_process
from .reporting import (
    ENV_OUTPUT_DIR,
    resolve_output_dir,
    versions,
    write_csv,
    write_json,
)
from .russo import (
    conditional_trajectory_mean,
    derivative_bundle,
    estimate_probability,
    pivotal_density_scan,
    tv_distance_check,
    universal_bound_check,
)
from .walk import DEFAULT_EXCURSION_BUDGET

__all__ = ["main"]

_COMMANDS = (
    "capacity",
    "sample",
    "estimate",
    "verify-russo",
    "verify-bounds",
    "tv-lemma",
    "scan-pivotal",
)

# Defaults applied after flags and config file both stayed silent.
_DEFAULTS = {
    "dimension": None,  # inferred from the set spec when omitted
    "box": None,
    "sites": None,
    "sites_file": None,
    "origin": None,
    "event": "nonempty",
    "u": None,
    "count": 1,
    "u1": None,
    "u2": None,
    "grid": 8,
    "alpha": 4.0,
    "theta": None,
    "n": 10000,
    "seed": 0,
    "h": None,
    "max_sigma": 4.0,
    "eps_g": DEFAULT_PRECISION,
    "asymptotic_radius": DEFAULT_ASYMPTOTIC_RADIUS,
    "budget": DEFAULT_EXCURSION_BUDGET,
    "workers": 1,
    "output": None,
    "name": None,
    "no_figures": False,
}


class _ConfigError(Exception):
    """Invalid configuration; carries the offending field's name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"invalid config: {field}: {message}")
        self.field = field


# ----------------------------------------------------------------------
# parsing helpers
# ----------------------------------------------------------------------


def _parse_int_list(value, field: str) -> tuple[int, ...]:
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [part for part in str(value).replace("(", "").replace(")", "").split(",") if part.strip()]
    try:
        return tuple(int(v) for v in items)
    except (TypeError, ValueError):
        raise _ConfigError(field, f"expected comma-separated integers, got {value!r}") from None


def _parse_float_list(value, field: str) -> tuple[float, ...]:
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [part for part in str(value).split(",") if part.strip()]
    try:
        out = tuple(float(v) for v in items)
    except (TypeError, ValueError):
        raise _ConfigError(field, f"expected comma-separated numbers, got {value!r}") from None
    if not out:
        raise _ConfigError(field, "expected at least one value")
    return out


def _parse_sites(value, field: str) -> list[tuple[int, ...]]:
    if isinstance(value, (list, tuple)):
        groups = list(value)
    else:
        groups = [g for g in str(value).split(";") if g.strip()]
    sites = []
    for g in groups:
        if isinstance(g, (list, tuple)):
            sites.append(tuple(int(c) for c in g))
        else:
            sites.append(_parse_int_list(g, field))
    if not sites:
        raise _ConfigError(field, "expected at least one site")
    return sites


def _require(cfg: dict, key: str):
    value = cfg.get(key)
    if value is None:
        raise _ConfigError(key, "required but not provided")
    return value


def _as_int(cfg, key, minimum=None):
    value = cfg.get(key)
    if value is None:
        return None
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise _ConfigError(key, f"expected an integer, got {value!r}") from None
    if minimum is not None and out < minimum:
        raise _ConfigError(key, f"must be >= {minimum}, got {out}")
    return out


def _as_float(cfg, key, positive=False):
    value = cfg.get(key)
    if value is None:
        return None
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise _ConfigError(key, f"expected a number, got {value!r}") from None
    if positive and out <= 0:
        raise _ConfigError(key, f"must be positive, got {out}")
    return out


# ----------------------------------------------------------------------
# argument parser
# ----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--output", help=f"output directory (default: ${ENV_OUTPUT_DIR} or .)")
    common.add_argument("--name", help="report basename (default: the subcommand)")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--n", type=int, help="Monte Carlo replicas per estimator")
    common.add_argument("--workers", type=int, help="parallel worker processes")
    common.add_argument("--eps-g", dest="eps_g", type=float, help="potential-table precision")
    common.add_argument(
        "--asymptotic-radius",
        dest="asymptotic_radius",
        type=float,
        help="distance beyond which the far-field power law is used",
    )
    common.add_argument("--budget", type=int, help="excursion budget per trace")
    common.add_argument(
        "--no-figures",
        dest="no_figures",
        action="store_const",
        const=True,
        help="skip PNG rendering next to the reports",
    )
    common.add_argument("--dimension", type=int, help="lattice dimension (>= 3)")
    common.add_argument("--box", help="box sides, e.g. 4,4,4")
    common.add_argument("--origin", help="box corner, e.g. 0,0,0")
    common.add_argument("--sites", help="explicit sites, e.g. 0,0,0;1,0,0")
    common.add_argument("--sites-file", dest="sites_file", help="JSON file with a list of sites")

    parser = argparse.ArgumentParser(
        prog="rinterlace",
        description="Trajectory-process sampling and derivative verification on a finite set",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", parents=[common], help="equilibrium measure and capacity")

    p = sub.add_parser("sample", parents=[common], help="draw level-tagged trajectory fixtures")
    p.add_argument("--u", help="intensity level (single value)")
    p.add_argument("--count", type=int, help="independent realizations to draw")

    p = sub.add_parser("estimate", parents=[common], help="P(A) over a list of intensities")
    p.add_argument("--event", help="event spec, e.g. 'two_point v=(0,0,0) z=(3,3,3)'")
    p.add_argument("--u", help="comma-separated intensities")

    p = sub.add_parser("verify-russo", parents=[common], help="four-estimator derivative check")
    p.add_argument("--event", help="event spec")
    p.add_argument("--u", help="comma-separated intensities")
    p.add_argument("--h", type=float, help="finite-difference half-step (default 0.05 u)")
    p.add_argument("--max-sigma", dest="max_sigma", type=float, help="disagreement limit")

    p = sub.add_parser("verify-bounds", parents=[common], help="universal bound checks")
    p.add_argument("--event", help="event spec")
    p.add_argument("--u", help="comma-separated intensities")

    p = sub.add_parser("tv-lemma", parents=[common], help="deterministic TV series check")
    p.add_argument("--theta", help="comma-separated theta values")

    p = sub.add_parser("scan-pivotal", parents=[common], help="derivative grid scan")
    p.add_argument("--event", help="event spec")
    p.add_argument("--u1", type=float, help="interval start (>= 0)")
    p.add_argument("--u2", type=float, help="interval end (> u1)")
    p.add_argument("--grid", type=int, help="grid points (midpoints of equal cells)")
    p.add_argument("--alpha", type=float, help="density level (> 1)")

    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    """Flags > config file > defaults, with unknown config keys rejected."""
    cfg = dict(_DEFAULTS)
    file_values = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise _ConfigError("config", f"file not found: {path}")
        try:
            file_values = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise _ConfigError("config", f"not valid JSON: {exc}") from None
        if not isinstance(file_values, dict):
            raise _ConfigError("config", "top level must be an object")
        for key in file_values:
            if key not in _DEFAULTS:
                raise _ConfigError(key, "unknown configuration key")
    cfg.update(file_values)
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    return cfg


# ----------------------------------------------------------------------
# shared setup
# ----------------------------------------------------------------------


def _build_lattice(cfg: dict) -> tuple[LatticeSet, dict]:
    """Construct the set G from box/sites/sites-file and describe it."""
    chosen = [k for k in ("box", "sites", "sites_file") if cfg.get(k) is not None]
    if len(chosen) == 0:
        raise _ConfigError("box", "one of --box, --sites, or --sites-file is required")
    if len(chosen) > 1:
        raise _ConfigError(chosen[1], f"conflicts with --{chosen[0].replace('_', '-')}")

    dimension = _as_int(cfg, "dimension")
    if cfg.get("box") is not None:
        sides = _parse_int_list(cfg["box"], "box")
        if any(s < 1 for s in sides):
            raise _ConfigError("box", f"sides must be >= 1, got {sides}")
        if dimension is not None and dimension != len(sides):
            raise _ConfigError(
                "dimension", f"{dimension} does not match a box with {len(sides)} sides"
            )
        origin = (
            _parse_int_list(cfg["origin"], "origin")
            if cfg.get("origin") is not None
            else (0,) * len(sides)
        )
        if len(origin) != len(sides):
            raise _ConfigError("origin", f"needs {len(sides)} coordinates, got {len(origin)}")
        try:
            lattice = LatticeSet.from_box(sides, origin=origin)
        except InvalidInputError as exc:
            raise _ConfigError("box", str(exc)) from None
        spec = {"box": list(sides), "origin": list(origin)}
    else:
        source_field = "sites" if cfg.get("sites") is not None else "sites_file"
        if source_field == "sites":
            raw_sites = _parse_sites(cfg["sites"], "sites")
        else:
            path = Path(cfg["sites_file"])
            if not path.is_file():
                raise _ConfigError("sites_file", f"file not found: {path}")
            try:
                payload = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise _ConfigError("sites_file", f"not valid JSON: {exc}") from None
            raw_sites = _parse_sites(payload, "sites_file")
        if dimension is not None and any(len(s) != dimension for s in raw_sites):
            raise _ConfigError("dimension", f"{dimension} does not match the site coordinates")
        try:
            lattice = LatticeSet.from_sites(raw_sites)
        except InvalidInputError as exc:
            raise _ConfigError(source_field, str(exc)) from None
        spec = {"sites": [list(s) for s in lattice.sites]}

    return lattice, spec


def _build_table(cfg: dict, dimension: int) -> PotentialTable:
    eps_g = _as_float(cfg, "eps_g", positive=True)
    radius = _as_float(cfg, "asymptotic_radius", positive=True)
    try:
        return PotentialTable(
            dimension=dimension, precision=eps_g, asymptotic_radius=radius
        )
    except InvalidInputError as exc:
        raise _ConfigError("eps_g", str(exc)) from None


def _build_eventobj(cfg: dict, lattice: LatticeSet):
    text = cfg.get("event") or "nonempty"
    try:
        spec = parse_event(text)
        return build_event(spec, lattice)
    except InvalidInputError as exc:
        raise _ConfigError("event", str(exc)) from None


def _resolved_config(cfg: dict, command: str, set_spec: dict, **extra) -> dict:
    resolved = {
        "command": command,
        "set": set_spec,
        "event": cfg.get("event"),
        "n": cfg.get("n"),
        "seed": cfg.get("seed"),
        "eps_g": cfg.get("eps_g"),
        "asymptotic_radius": cfg.get("asymptotic_radius"),
        "excursion_budget": cfg.get("budget"),
        "versions": versions(),
    }
    resolved.update(extra)
    return resolved


def _figures_enabled(cfg: dict) -> bool:
    return not bool(cfg.get("no_figures"))


def _out_base(cfg: dict, command: str) -> Path:
    out_dir = resolve_output_dir(cfg.get("output"))
    base = cfg.get("name") or command
    return out_dir / base


# ----------------------------------------------------------------------
# subcommand handlers (each returns the process exit status)
# ----------------------------------------------------------------------


def _cmd_capacity(cfg: dict) -> int:
    lattice, set_spec = _build_lattice(cfg)
    table = _build_table(cfg, lattice.dimension)
    eq = equilibrium_measure(lattice, table)
    boundary = lattice.internal_boundary()
    payload = {
        "config": _resolved_config(cfg, "capacity", set_spec, event=None, n=None),
        "cap": eq.capacity,
        "residual": eq.residual,
        "dimension": lattice.dimension,
        "set_size": len(lattice),
        "boundary_size": len(boundary),
        "measure": [
            {"site": list(site), "weight": weight}
            for site, weight in eq.measure().items()
        ],
    }
    write_json(_out_base(cfg, "capacity").with_suffix(".json"), payload)
    return 0


def _cmd_sample(cfg: dict) -> int:
    lattice, set_spec = _build_lattice(cfg)
    table = _build_table(cfg, lattice.dimension)
    eq = equilibrium_measure(lattice, table)
    u_values = _parse_float_list(_require(cfg, "u"), "u")
    if len(u_values) != 1:
        raise _ConfigError("u", f"sample takes a single intensity, got {len(u_values)}")
    u = u_values[0]
    if u <= 0:
        raise _ConfigError("u", f"must be positive, got {u}")
    count = _as_int(cfg, "count", minimum=1)
    seed = _as_int(cfg, "seed", minimum=0)
    budget = _as_int(cfg, "budget", minimum=1)

    samples = []
    for index in range(count):
        rng = np.random.default_rng(np.random.SeedSequence((seed, 1000, index)))
        lp = sample_level_process(eq, u, rng, budget=budget)
        samples.append(points_to_json(lp.points))
    payload = {
        "config": _resolved_config(
            cfg, "sample", set_spec, event=None, u=u, count=count
        ),
        "cap": eq.capacity,
        "u": u,
        "samples": samples,
    }
    write_json(_out_base(cfg, "sample").with_suffix(".json"), payload)
    return 0


def _cmd_estimate(cfg: dict) -> int:
    lattice, set_spec = _build_lattice(cfg)
    table = _build_table(cfg, lattice.dimension)
    eq = equilibrium_measure(lattice, table)
    event = _build_eventobj(cfg, lattice)
    u_values = _parse_float_list(_require(cfg, "u"), "u")
    n = _as_int(cfg, "n", minimum=1)
    seed = _as_int(cfg, "seed", minimum=0)
    workers = _as_int(cfg, "workers", minimum=1)
    budget = _as_int(cfg, "budget", minimum=1)

    results = []
    rows = []
    for u in u_values:
        if u < 0:
            raise _ConfigError("u", f"must be nonnegative, got {u}")
        est = estimate_probability(eq, event, u, n, seed, workers, budget)
        results.append({"u": u, "mean": est.mean, "stderr": est.stderr})
        rows.append((u, "prob", est.mean, est.stderr))

    base = _out_base(cfg, "estimate")
    payload = {
        "config": _resolved_config(
            cfg, "estimate", set_spec, event=event.name, u=list(u_values)
        ),
        "cap": eq.capacity,
        "event": event.name,
        "results": results,
        "figures": [],
    }
    write_csv(base.with_suffix(".csv"), rows)
    if _figures_enabled(cfg):
        from .figures import save_probability_figure

        fig_path = base.with_suffix(".png")
        save_probability_figure(results, fig_path)
        payload["figures"] = [fig_path.name]
    write_json(base.with_suffix(".json"), payload)
    return 0


def _cmd_verify_russo(cfg: dict) -> int:
    lattice, set_spec = _build_lattice(cfg)
    table = _build_table(cfg, lattice.dimension)
    eq = equilibrium_measure(lattice, table)
    event = _build_eventobj(cfg, lattice)
    u_values = _parse_float_list(_require(cfg, "u"), "u")
    n = _as_int(cfg, "n", minimum=1)
    seed = _as_int(cfg, "seed", minimum=0)
    workers = _as_int(cfg, "workers", minimum=1)
    budget = _as_int(cfg, "budget", minimum=1)
    h = _as_float(cfg, "h", positive=True)
    max_sigma = _as_float(cfg, "max_sigma", positive=True)

    results = []
    rows = []
    all_pass = True
    for u in u_values:
        if u <= 0:
            raise _ConfigError("u", f"derivative verification needs u > 0, got {u}")
        bundle = derivative_bundle(
            eq,
            event,
            u,
            n,
            seed,
            h=h,
            workers=workers,
            budget=budget,
            max_sigma=max_sigma,
            strict=False,
        )
        entry = {
            "event": event.name,
            "G": set_spec,
            "u": u,
            "cap": eq.capacity,
            "n": n,
            "seed": seed,
            "h": bundle.finite_difference.meta["h"],
        }
        entry.update(bundle.to_dict())
        try:
            cm = conditional_trajectory_mean(eq, event, u, n, seed, workers, budget)
            entry["conditional_mean"] = {"mean": cm.mean, "stderr": cm.stderr}
        except RInterlaceError:
            entry["conditional_mean"] = None
        results.append(entry)
        all_pass = all_pass and bundle.all_pass
        for key, est in bundle.estimates().items():
            rows.append((u, key, est.mean, est.stderr))

    base = _out_base(cfg, "verify-russo")
    payload = {
        "config": _resolved_config(
            cfg,
            "verify-russo",
            set_spec,
            event=event.name,
            u=list(u_values),
            h=h,
            max_sigma=max_sigma,
        ),
        "cap": eq.capacity,
        "results": results,
        "all_pass": all_pass,
        "figures": [],
    }
    write_csv(base.with_suffix(".csv"), rows)
    if _figures_enabled(cfg):
        from .figures import save_derivative_figure

        fig_path = base.with_suffix(".png")
        save_derivative_figure(results, fig_path)
        payload["figures"] = [fig_path.name]
    write_json(base.with_suffix(".json"), payload)
    return 0 if all_pass else 1


def _cmd_verify_bounds(cfg: dict) -> int:
    lattice, set_spec = _build_lattice(cfg)
    table = _build_table(cfg, lattice.dimension)
    eq = equilibrium_measure(lattice, table)
    event = _build_eventobj(cfg, lattice)
    u_values = _parse_float_list(_require(cfg, "u"), "u")
    n = _as_int(cfg, "n", minimum=1)
    seed = _as_int(cfg, "seed", minimum=0)
    workers = _as_int(cfg, "workers", minimum=1)
    budget = _as_int(cfg, "budget", minimum=1)

    results = []
    rows = []
    all_hold = True
    for u in u_values:
        if u <= 0:
            raise _ConfigError("u", f"bound verification needs u > 0, got {u}")
        report = universal_bound_check(eq, event, u, n, seed, workers, budget)
        results.append(report)
        all_hold = all_hold and report["holds"]
        rows.append((u, "derivative", report["derivative_mean"], report["derivative_stderr"]))
        rows.append((u, "pivotal_count", report["pivotal_mean"], report["pivotal_stderr"]))

    base = _out_base(cfg, "verify-bounds")
    payload = {
        "config": _resolved_config(
            cfg, "verify-bounds", set_spec, event=event.name, u=list(u_values)
        ),
        "cap": eq.capacity,
        "results": results,
        "all_hold": all_hold,
        "figures": [],
    }
    write_csv(base.with_suffix(".csv"), rows)
    if _figures_enabled(cfg):
        from .figures import save_bounds_figure

        fig_path = base.with_suffix(".png")
        save_bounds_figure(results, fig_path)
        payload["figures"] = [fig_path.name]
    write_json(base.with_suffix(".json"), payload)
    return 0 if all_hold else 1


def _cmd_tv_lemma(cfg: dict) -> int:
    thetas = _parse_float_list(_require(cfg, "theta"), "theta")
    for theta in thetas:
        if theta <= 0:
            raise _ConfigError("theta", f"must be positive, got {theta}")
    results = [tv_distance_check(theta) for theta in thetas]
    all_hold = all(r["holds"] for r in results)

    base = _out_base(cfg, "tv-lemma")
    payload: dict = {
        "config": {
            "command": "tv-lemma",
            "theta": list(thetas),
            "versions": versions(),
        },
        "results": results,
        "all_hold": all_hold,
        "figures": [],
    }
    if len(results) == 1:
        payload.update(results[0])  # single theta: spec keys at the top level
    if _figures_enabled(cfg):
        from .figures import save_tv_figure

        fig_path = base.with_suffix(".png")
        save_tv_figure(results, fig_path)
        payload["figures"] = [fig_path.name]
    write_json(base.with_suffix(".json"), payload)
    return 0 if all_hold else 1


def _cmd_scan_pivotal(cfg: dict) -> int:
    lattice, set_spec = _build_lattice(cfg)
    table = _build_table(cfg, lattice.dimension)
    eq = equilibrium_measure(lattice, table)
    event = _build_eventobj(cfg, lattice)
    u1 = _as_float(cfg, "u1")
    u2 = _as_float(cfg, "u2")
    if u1 is None:
        raise _ConfigError("u1", "required but not provided")
    if u2 is None:
        raise _ConfigError("u2", "required but not provided")
    grid = _as_int(cfg, "grid", minimum=1)
    alpha = _as_float(cfg, "alpha")
    n = _as_int(cfg, "n", minimum=1)
    seed = _as_int(cfg, "seed", minimum=0)
    workers = _as_int(cfg, "workers", minimum=1)
    budget = _as_int(cfg, "budget", minimum=1)
    if not 0 <= u1 < u2:
        raise _ConfigError("u1", f"needs 0 <= u1 < u2, got u1={u1}, u2={u2}")
    if alpha is None or alpha <= 1:
        raise _ConfigError("alpha", f"must exceed 1, got {alpha}")

    scan = pivotal_density_scan(
        eq, event, u1, u2, grid, alpha, n, seed, workers, budget
    )
    base = _out_base(cfg, "scan-pivotal")
    payload = {
        "config": _resolved_config(
            cfg,
            "scan-pivotal",
            set_spec,
            event=event.name,
            u1=u1,
            u2=u2,
            grid=grid,
            alpha=alpha,
        ),
        "cap": eq.capacity,
        "scan": scan.to_dict(),
        "figures": [],
    }
    write_csv(base.with_suffix(".csv"), scan.csv_rows())
    if _figures_enabled(cfg):
        from .figures import save_scan_figure

        fig_path = base.with_suffix(".png")
        save_scan_figure(scan.to_dict(), fig_path)
        payload["figures"] = [fig_path.name]
    write_json(base.with_suffix(".json"), payload)
    return 0 if scan.holds else 1


_HANDLERS = {
    "capacity": _cmd_capacity,
    "sample": _cmd_sample,
    "estimate": _cmd_estimate,
    "verify-russo": _cmd_verify_russo,
    "verify-bounds": _cmd_verify_bounds,
    "tv-lemma": _cmd_tv_lemma,
    "scan-pivotal": _cmd_scan_pivotal,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        return _HANDLERS[args.command](cfg)
    except _ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvalidInputError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return 2
    except RInterlaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
