"""Three-panel summary of one simulated aggregate path: the first 500
values, the marginal histogram, and the empirical autocovariance.

Input directory: a `simulate` run (series.csv + series_provenance.json).
"""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from . import common

_SHOW = 500
_MAX_LAG = 50


def _autocov(x: np.ndarray, max_lag: int) -> np.ndarray:
    xc = x - x.mean()
    n = len(x)
    return np.array([float(xc[: n - j] @ xc[j:]) / n
                     for j in range(max_lag + 1)])


def render(indir: Path, out: Path) -> None:
    common.apply_style()
    cols = common.read_table(indir / "series.csv", ["t", "value"])
    prov = common.read_json(indir / "series_provenance.json")
    x = cols["value"]
    cfg = prov.get("config", {})

    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2))
    head = x[:_SHOW]
    axes[0].plot(cols["t"][: len(head)], head, color="tab:blue")
    axes[0].set_title(f"first {len(head)} values")
    axes[0].set_xlabel("t")

    axes[1].hist(x, bins=60, density=True, color="tab:blue", alpha=0.7)
    axes[1].set_title("marginal histogram")
    axes[1].set_xlabel("value")

    lags = min(_MAX_LAG, len(x) - 1)
    axes[2].plot(range(lags + 1), _autocov(x, lags), marker=".",
                 color="tab:blue")
    axes[2].set_title("empirical autocovariance")
    axes[2].set_xlabel("lag")

    fig.suptitle(
        f"aggregate path: n_micro={cfg.get('n_micro', '?')}, "
        f"n={len(x)}, seed={cfg.get('seed', '?')}"
    )
    fig.tight_layout()
    common.save(fig, out)


def main(argv=None) -> int:
    return common.run(render, argv)


if __name__ == "__main__":
    sys.exit(main())
