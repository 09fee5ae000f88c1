"""Deterministic report files: strict JSON and delimited grid output.

Reports are replayable artifacts: they embed the fully resolved
configuration (tolerances, seeds, sample counts, library versions) and are
written with sorted keys and no timestamps, so rerunning the same command
with the same seed produces byte-identical files regardless of how many
workers executed the run.
"""

from __future__ import annotations

import csv
import json
import math
import os
import sys
from pathlib import Path

__all__ = [
    "ENV_OUTPUT_DIR",
    "CSV_HEADER",
    "versions",
    "resolve_output_dir",
    "write_json",
    "write_csv",
]

# Environment variable supplying the default output directory.
ENV_OUTPUT_DIR = "RINTERLACE_OUTPUT_DIR"

# Fixed column layout of every delimited grid report.
CSV_HEADER = ("u", "estimator", "mean", "stderr")


def versions() -> dict:
    """Library versions embedded in every report (replayability)."""
    import numpy
    import scipy

    from . import __version__

    return {
        "rinterlace": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "python": ".".join(str(v) for v in sys.version_info[:3]),
    }


def resolve_output_dir(flag_value: str | None, env: dict | None = None) -> Path:
    """Output directory: flag beats the environment beats the cwd."""
    if flag_value:
        return Path(flag_value)
    mapping = os.environ if env is None else env
    from_env = mapping.get(ENV_OUTPUT_DIR)
    return Path(from_env) if from_env else Path(".")


def _sanitize(value):
    """Replace non-finite floats so the JSON stays strictly parseable."""
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    return value


def write_json(path: Path, payload: dict) -> Path:
    """Write a report as sorted-key JSON (byte-stable across reruns)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_sanitize(payload), sort_keys=True, indent=2)
    path.write_text(text + "\n")
    return path


def write_csv(path: Path, rows) -> Path:
    """Write (u, estimator, mean, stderr) rows with a fixed header.

    Floats are rendered with ``repr`` (shortest round-trip form), keeping
    the file byte-stable and lossless.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for u, estimator, mean, stderr in rows:
            writer.writerow([repr(float(u)), estimator, repr(float(mean)), repr(float(stderr))])
    return path
