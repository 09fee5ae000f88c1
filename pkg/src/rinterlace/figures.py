"""Figure rendering for CLI reports (headless, PNG files).

Each function takes plain serialized data (the same dictionaries that go
into the JSON reports) and writes one PNG next to the delimited output.
Rendering is suppressed entirely by the CLI's ``--no-figures`` flag, so
nothing here is load-bearing for the numerical checks.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = [
    "save_probability_figure",
    "save_derivative_figure",
    "save_bounds_figure",
    "save_tv_figure",
    "save_scan_figure",
]

_ESTIMATOR_STYLE = {
    "e1": dict(color="#1f77b4", marker="o", label="added trajectory (e1)"),
    "e2": dict(color="#d62728", marker="s", label="pivotal count (e2)"),
    "e3": dict(color="#2ca02c", marker="^", label="conditional count (e3)"),
    "fd": dict(color="#9467bd", marker="d", label="finite difference (fd)"),
}


def _finish(fig, ax, path: Path) -> Path:
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_probability_figure(results: list[dict], path: Path) -> Path:
    """P(A) against u with standard-error bars."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    us = [r["u"] for r in results]
    means = [r["mean"] for r in results]
    errs = [r["stderr"] for r in results]
    ax.errorbar(us, means, yerr=errs, color="#1f77b4", marker="o", capsize=3)
    ax.set_xlabel("intensity u")
    ax.set_ylabel("estimated P(A)")
    ax.set_title("Event probability vs intensity")
    return _finish(fig, ax, path)


def save_derivative_figure(results: list[dict], path: Path) -> Path:
    """The four derivative estimators against u, plus the closed form."""
    fig, ax = plt.subplots(figsize=(6.8, 4.4))
    us = [r["u"] for r in results]
    offsets = [-1.5, -0.5, 0.5, 1.5]
    span = (max(us) - min(us)) if len(us) > 1 else max(us[0], 1.0)
    nudge = 0.004 * span
    for off, key in zip(offsets, ("e1", "e2", "e3", "fd")):
        style = _ESTIMATOR_STYLE[key]
        xs = [u + off * nudge for u in us]
        means = [r[key]["mean"] for r in results]
        errs = [r[key]["stderr"] for r in results]
        ax.errorbar(
            xs, means, yerr=[3 * e for e in errs], capsize=3, linestyle="none", **style
        )
    closed = [(r["u"], r["closed_form"]) for r in results if "closed_form" in r]
    if closed:
        ax.plot(
            [c[0] for c in closed],
            [c[1] for c in closed],
            color="black",
            linestyle="--",
            label="closed form",
        )
    ax.set_xlabel("intensity u")
    ax.set_ylabel("dP(A)/du (3-sigma bars)")
    ax.set_title("Derivative estimators, four independent routes")
    ax.legend(fontsize=8)
    return _finish(fig, ax, path)


def save_bounds_figure(results: list[dict], path: Path) -> Path:
    """Derivative and pivotal-count means against their universal bounds."""
    fig, ax = plt.subplots(figsize=(6.8, 4.4))
    us = [r["u"] for r in results]
    ax.errorbar(
        us,
        [r["derivative_mean"] for r in results],
        yerr=[3 * r["derivative_stderr"] for r in results],
        color="#1f77b4",
        marker="o",
        linestyle="none",
        capsize=3,
        label="derivative estimate",
    )
    ax.plot(
        us,
        [r["derivative_bound"] for r in results],
        color="#1f77b4",
        linestyle="--",
        label="bound sqrt(cap/u)",
    )
    ax.errorbar(
        us,
        [r["pivotal_mean"] for r in results],
        yerr=[3 * r["pivotal_stderr"] for r in results],
        color="#d62728",
        marker="s",
        linestyle="none",
        capsize=3,
        label="mean pivotal count",
    )
    ax.plot(
        us,
        [r["pivotal_bound"] for r in results],
        color="#d62728",
        linestyle=":",
        label="bound sqrt(u cap)",
    )
    ax.set_xlabel("intensity u")
    ax.set_ylabel("estimate vs bound (3-sigma bars)")
    ax.set_title("Universal derivative and pivotal-count bounds")
    ax.legend(fontsize=8)
    return _finish(fig, ax, path)


def save_tv_figure(results: list[dict], path: Path) -> Path:
    """Total-variation series value against its 1/sqrt(theta) bound."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    thetas = [r["theta"] for r in results]
    ax.plot(thetas, [r["tv"] for r in results], marker="o", color="#2ca02c", label="tv")
    ax.plot(
        thetas,
        [r["bound"] for r in results],
        linestyle="--",
        color="black",
        label="bound theta^(-1/2)",
    )
    if len(thetas) > 1:
        ax.set_xscale("log")
    ax.set_xlabel("theta = u x capacity")
    ax.set_ylabel("total variation")
    ax.set_title("Added-trajectory TV distance and its bound")
    ax.legend(fontsize=8)
    return _finish(fig, ax, path)


def save_scan_figure(scan: dict, path: Path) -> Path:
    """Pivotal-density grid scan with its threshold line."""
    fig, ax = plt.subplots(figsize=(6.8, 4.4))
    points = scan["points"]
    us = [p["u"] for p in points]
    ax.errorbar(
        us,
        [p["mean"] for p in points],
        yerr=[3 * p["stderr"] for p in points],
        color="#1f77b4",
        marker="o",
        capsize=3,
        label="derivative estimate (e2)",
    )
    ax.axhline(
        scan["threshold"],
        color="#d62728",
        linestyle="--",
        label=f"threshold alpha/(u2-u1) = {scan['threshold']:.4g}",
    )
    ax.set_xlabel("intensity u")
    ax.set_ylabel("(1/u) x mean pivotal count")
    ax.set_title(
        f"Pivotal density scan: fraction below = {scan['fraction_below']:.3f}"
        f" (target > {scan['target']:.3f})"
    )
    ax.legend(fontsize=8)
    return _finish(fig, ax, path)
