"""MISE as a function of the truncation level K, one line per q.

Input directory: a `mise` run (mise.csv + mise_provenance.json).  This is the
companion view to the by-q plot; it makes the variance blow-up beyond the
optimal K directly visible.
"""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from . import common


def render(indir: Path, out: Path) -> None:
    common.apply_style()
    cols = common.read_table(indir / "mise.csv", ["q", "K", "mise", "stderr"])
    prov = common.read_json(indir / "mise_provenance.json")

    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    for q in np.unique(cols["q"]):
        sel = cols["q"] == q
        order = np.argsort(cols["K"][sel])
        ax.errorbar(cols["K"][sel][order], cols["mise"][sel][order],
                    yerr=cols["stderr"][sel][order], marker="o",
                    capsize=2, label=f"q={q}")
    ax.set_xlabel("K")
    ax.set_ylabel("MISE")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    beta = prov.get("mixing", {}).get("beta", "?")
    ax.set_title(f"MISE vs K (beta={beta}, n={prov.get('n_time', '?')}, "
                 f"R={prov.get('replications', '?')})")
    fig.tight_layout()
    common.save(fig, out)


def main(argv=None) -> int:
    return common.run(render, argv)


if __name__ == "__main__":
    sys.exit(main())
