"""Figure-script tests, including the rendering acceptance criterion.

Inputs are produced by running the ar1agg CLI, so the figure package is
exercised strictly through the documented CSV/JSON interchange files.
"""

import json

import numpy as np
import pytest

from ar1agg import cli
from ar1agg_figures import common, fig1_trajectory, fig2_density_estimates
from ar1agg_figures import fig3_mise_by_q, fig4_mise_by_k

PANEL = {
    "n_micro": 50,
    "n_time": 1500,
    "seed": 20260612,
    "mixing": {"family": "BetaEdge", "beta": 0.75},
    "triplet": {"sigma": 1.0, "jumps": {"family": "NoJumps"}},
}


def _run_cli(args):
    rc = cli.main(list(args))
    assert rc == 0, args
    return rc


@pytest.fixture(scope="module")
def cli_outputs(tmp_path_factory):
    """One simulate run, two disagg runs (K=1, K=3), one mise grid."""
    root = tmp_path_factory.mktemp("cli_outputs")

    sim_cfg = root / "sim.json"
    sim_cfg.write_text(json.dumps({"panel": PANEL}))
    _run_cli(["simulate", "--config", str(sim_cfg), "--out", str(root / "sim")])

    for k in (1, 3):
        d_cfg = root / f"disagg{k}.json"
        d_cfg.write_text(json.dumps({"panel": PANEL, "q": 0.5, "K": k}))
        _run_cli(["disagg", "--config", str(d_cfg),
                  "--out", str(root / "disagg" / f"K{k}")])

    m_cfg = root / "mise.json"
    m_cfg.write_text(json.dumps({
        "panel": {**PANEL, "n_micro": 10, "n_time": 400},
        "q_grid": [0.0, 0.5, 1.0], "K_grid": [0, 1, 2], "replications": 2,
    }))
    _run_cli(["mise", "--config", str(m_cfg), "--out", str(root / "mise")])
    return root


class TestAcceptanceCriterion11:
    def test_all_four_figures_render(self, cli_outputs, tmp_path):
        jobs = [
            (fig1_trajectory, cli_outputs / "sim", "fig1.png"),
            (fig2_density_estimates, cli_outputs / "disagg", "fig2.png"),
            (fig3_mise_by_q, cli_outputs / "mise", "fig3.png"),
            (fig4_mise_by_k, cli_outputs / "mise", "fig4.png"),
        ]
        for mod, indir, name in jobs:
            out = tmp_path / name
            assert mod.main(["--in", str(indir), "--out", str(out)]) == 0
            assert out.stat().st_size > 0
        print("[criterion 11] PASS: figures 1-4 rendered from CLI outputs")

    def test_truth_overlay_matches_estimate_support(self, cli_outputs):
        # the recomputed overlay must live on the estimate's support (-1, 1)
        # with the provenance beta, vanishing at both endpoints
        prov = common.read_json(
            cli_outputs / "disagg" / "K1" / "phi_provenance.json")
        cols = common.read_table(cli_outputs / "disagg" / "K1" / "phi.csv",
                                 ["x", "phi_hat"])
        mix = prov["panel"]["mixing"]
        grid = np.linspace(-1.0, 1.0, 513)
        truth = common.true_density(mix, grid)
        assert truth[0] == 0.0 and truth[-1] == 0.0
        assert np.trapezoid(truth, grid) == pytest.approx(1.0, abs=1e-3)
        assert cols["x"].min() > -1.0 and cols["x"].max() < 1.0
        inner = (grid > cols["x"].min()) & (grid < cols["x"].max())
        assert np.all(truth[inner] > 0.0)


class TestDeterminism:
    def test_pixel_identical_rerender(self, cli_outputs, tmp_path):
        outs = []
        for i in range(2):
            out = tmp_path / f"render{i}.png"
            assert fig1_trajectory.main(["--in", str(cli_outputs / "sim"),
                                         "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestSchemaValidation:
    def test_missing_input_exits_2(self, tmp_path):
        assert fig1_trajectory.main(["--in", str(tmp_path / "nope"),
                                     "--out", str(tmp_path / "f.png")]) == 2

    def test_bad_header_exits_2(self, tmp_path):
        (tmp_path / "series.csv").write_text("time,val\n0,1.0\n")
        (tmp_path / "series_provenance.json").write_text("{}")
        assert fig1_trajectory.main(["--in", str(tmp_path),
                                     "--out", str(tmp_path / "f.png")]) == 2

    def test_missing_panel_provenance_exits_2(self, tmp_path):
        (tmp_path / "phi.csv").write_text("x,phi_hat\n0.0,0.5\n")
        (tmp_path / "phi_provenance.json").write_text(
            json.dumps({"panel": None, "q": 0.5, "K": 1}))
        assert fig2_density_estimates.main(
            ["--in", str(tmp_path), "--out", str(tmp_path / "f.png")]) == 2

    def test_unknown_mixing_family_rejected(self):
        with pytest.raises(common.SchemaError):
            common.true_density({"family": "PointMass", "c": 0.5},
                                np.array([0.0]))

    def test_empty_csv_rejected(self, tmp_path):
        p = tmp_path / "mise.csv"
        p.write_text("q,K,mise,stderr\n")
        with pytest.raises(common.SchemaError):
            common.read_table(p, ["q", "K", "mise", "stderr"])
