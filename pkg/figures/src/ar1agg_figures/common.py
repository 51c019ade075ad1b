"""Shared plumbing for the figure scripts.

The figure scripts consume only the documented CSV/JSON interchange files
written by the ar1agg CLI; they never import the library itself.  Rendering
is read-only and deterministic: a pinned style plus stripped PNG metadata
makes repeated renders byte-identical for identical inputs.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

EXIT_SCHEMA = 2

_STYLE = {
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "svg.hashsalt": "ar1agg-figures",
}


class SchemaError(Exception):
    """An input file is missing or its header does not match the contract."""


def apply_style() -> None:
    plt.rcdefaults()
    plt.rcParams.update(_STYLE)


def read_table(path: Path, header: list[str]) -> dict[str, np.ndarray]:
    """Read a CSV with an exact expected header into float columns."""
    try:
        with open(path, newline="") as f:
            reader = csv.reader(f)
            got = next(reader, None)
            if got != header:
                raise SchemaError(f"{path}: expected header {header}, got {got}")
            rows = [row for row in reader if row]
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e}") from e
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    cols = {}
    for j, name in enumerate(header):
        try:
            cols[name] = np.array([float(row[j]) if row[j] != "" else np.nan
                                   for row in rows])
        except (IndexError, ValueError) as e:
            raise SchemaError(f"{path}: bad value in column {name}: {e}") from e
    return cols


def read_json(path: Path) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(f"cannot read {path}: {e}") from e


def true_density(mixing_cfg: dict, x: np.ndarray) -> np.ndarray:
    """Recompute the true mixing density from a provenance mixing block.

    Only the shipped closed-form family is supported; anything else is a
    schema error because the overlay would be unverifiable.
    """
    if mixing_cfg.get("family") != "BetaEdge":
        raise SchemaError(f"no closed-form density for mixing {mixing_cfg!r}")
    beta = float(mixing_cfg["beta"])
    z = 2.0 ** (beta + 2.0) / ((beta + 1.0) * (beta + 2.0))
    out = np.zeros_like(x)
    inside = (x > -1.0) & (x < 1.0)
    out[inside] = (1.0 + x[inside]) * (1.0 - x[inside]) ** beta / z
    return out


def save(fig, out_path: Path) -> None:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    # strip the version-dependent Software chunk so renders are byte-stable
    meta = {"Software": None} if out_path.suffix.lower() == ".png" else None
    fig.savefig(out_path, metadata=meta)
    plt.close(fig)


def run(render_fn, argv=None) -> int:
    """Standard entry point: parse --in/--out, render, map schema errors to 2."""
    import argparse

    p = argparse.ArgumentParser()
    p.add_argument("--in", dest="indir", required=True,
                   help="directory of CLI outputs")
    p.add_argument("--out", dest="out", required=True,
                   help="output image file")
    args = p.parse_args(argv)
    try:
        render_fn(Path(args.indir), Path(args.out))
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    return 0
