"""MISE as a function of the weight exponent q, one line per K.

Input directory: a `mise` run (mise.csv + mise_provenance.json).
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
    for k in np.unique(cols["K"]):
        sel = cols["K"] == k
        order = np.argsort(cols["q"][sel])
        ax.errorbar(cols["q"][sel][order], cols["mise"][sel][order],
                    yerr=cols["stderr"][sel][order], marker="o",
                    capsize=2, label=f"K={int(k)}")
    ax.set_xlabel("q")
    ax.set_ylabel("MISE")
    ax.legend(fontsize=8)
    beta = prov.get("mixing", {}).get("beta", "?")
    ax.set_title(f"MISE vs q (beta={beta}, n={prov.get('n_time', '?')}, "
                 f"R={prov.get('replications', '?')})")
    fig.tight_layout()
    common.save(fig, out)


def main(argv=None) -> int:
    return common.run(render, argv)


if __name__ == "__main__":
    sys.exit(main())
