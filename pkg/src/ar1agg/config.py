"""JSON (de)serialization for triplets, mixing laws and run configs.

The on-disk format is the interchange contract: provenance sidecars written
by the CLI round-trip through these functions bit-exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .levy import CenteredGamma, LevyTriplet, NoJumps, TruncatedStable
from .mixing import BetaEdge, MixingLaw, PointMass, TableDensity

__all__ = [
    "triplet_to_dict",
    "triplet_from_dict",
    "mixing_to_dict",
    "mixing_from_dict",
    "load_json",
    "dump_json",
]


def triplet_to_dict(t: LevyTriplet) -> dict:
    j = t.jumps
    if isinstance(j, NoJumps):
        jumps = {"family": "NoJumps"}
    elif isinstance(j, CenteredGamma):
        jumps = {"family": "CenteredGamma", "shape": j.shape, "scale": j.scale}
    else:
        jumps = {
            "family": "TruncatedStable",
            "alpha": j.alpha,
            "c_plus": j.c_plus,
            "c_minus": j.c_minus,
            "cutoff": j.cutoff,
        }
    return {"sigma": t.sigma, "jumps": jumps}


def triplet_from_dict(d: dict) -> LevyTriplet:
    try:
        jd = d.get("jumps", {"family": "NoJumps"})
        fam = jd["family"]
        if fam == "NoJumps":
            jumps = NoJumps()
        elif fam == "CenteredGamma":
            jumps = CenteredGamma(float(jd["shape"]), float(jd["scale"]))
        elif fam == "TruncatedStable":
            jumps = TruncatedStable(
                float(jd["alpha"]), float(jd["c_plus"]),
                float(jd["c_minus"]), float(jd["cutoff"]),
            )
        else:
            raise ConfigError(f"unknown jump family {fam!r}")
        return LevyTriplet(sigma=float(d["sigma"]), jumps=jumps)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"bad triplet config: {e}") from e


def mixing_to_dict(m: MixingLaw) -> dict:
    if isinstance(m, BetaEdge):
        return {"family": "BetaEdge", "beta": m.beta}
    if isinstance(m, PointMass):
        return {"family": "PointMass", "c": m.c}
    return {"family": "TableDensity", "table": getattr(m, "source_path", None), "beta": m.beta}


def mixing_from_dict(d: dict, base_dir: Path | None = None) -> MixingLaw:
    try:
        fam = d["family"]
        if fam == "BetaEdge":
            return BetaEdge(float(d["beta"]))
        if fam == "PointMass":
            return PointMass(float(d["c"]))
        if fam == "TableDensity":
            path = Path(d["table"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            grid, vals = [], []
            with open(path, newline="") as f:
                for row in csv.DictReader(f):
                    grid.append(float(row["x"]))
                    vals.append(float(row["phi"]))
            m = TableDensity(np.array(grid), np.array(vals), float(d["beta"]))
            m.source_path = str(path)
            return m
        raise ConfigError(f"unknown mixing family {fam!r}")
    except (KeyError, TypeError, ValueError, OSError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"bad mixing config: {e}") from e


def load_json(path) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e


def dump_json(obj: dict, path) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")
