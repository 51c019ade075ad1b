"""Overlay of estimated mixing densities against the true density.

Input directory: either a single `disagg` run (phi.csv + phi_provenance.json)
or a directory whose immediate subdirectories are disagg runs; every run
found is drawn as one curve, labelled by its K.  The true density is
recomputed from the provenance panel config, never taken from the estimate
files, so the overlay is an independent cross-check.
"""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from . import common


def _find_runs(indir: Path) -> list[Path]:
    if (indir / "phi.csv").exists():
        return [indir]
    runs = sorted(d for d in indir.iterdir()
                  if d.is_dir() and (d / "phi.csv").exists())
    if not runs:
        raise common.SchemaError(f"no phi.csv found under {indir}")
    return runs


def render(indir: Path, out: Path) -> None:
    common.apply_style()
    runs = _find_runs(indir)

    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    mixing_cfg = None
    for run_dir in runs:
        cols = common.read_table(run_dir / "phi.csv", ["x", "phi_hat"])
        prov = common.read_json(run_dir / "phi_provenance.json")
        panel = prov.get("panel")
        if panel is None:
            raise common.SchemaError(
                f"{run_dir}: provenance has no panel block, cannot recompute "
                "the true density"
            )
        if mixing_cfg is None:
            mixing_cfg = panel["mixing"]
        elif panel["mixing"] != mixing_cfg:
            raise common.SchemaError("runs mix different true densities")
        ax.plot(cols["x"], cols["phi_hat"],
                label=f"estimate, K={int(prov['K'])}, q={prov['q']}")

    grid = np.linspace(-1.0, 1.0, 513)
    ax.plot(grid, common.true_density(mixing_cfg, grid), "k--",
            label=f"truth (beta={mixing_cfg['beta']})")
    ax.set_xlim(-1.0, 1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend(fontsize=8)
    ax.set_title("mixing density estimates")
    fig.tight_layout()
    common.save(fig, out)


def main(argv=None) -> int:
    return common.run(render, argv)


if __name__ == "__main__":
    sys.exit(main())
