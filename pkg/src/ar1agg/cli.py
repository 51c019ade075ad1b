"""Command-line surface.

Subcommands: simulate, theory, scaling, disagg, mise.  Every run is
deterministic given (config, seed) and writes a provenance JSON sidecar that
round-trips through the config parser.  Exit codes: 0 success, 2 config or
domain error, 3 numeric failure, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import config as _config
from . import disagg, limits, mixing, panel
from .errors import BudgetError, ConfigError, DomainError, NumericError
from .levy import classify_regime
from .mixing import BetaEdge, psi_one

_PRESETS = {"regime_i", "regime_iii", "regime_iv", "oracle_iid"}


def _load(args) -> dict:
    if getattr(args, "preset", None):
        if args.preset not in _PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; have {sorted(_PRESETS)}")
        ref = resources.files("ar1agg.presets") / f"{args.preset}.json"
        with resources.as_file(ref) as p:
            cfg = _config.load_json(p)
    elif args.config:
        cfg = _config.load_json(args.config)
    else:
        raise ConfigError("either --config or --preset is required")
    if args.seed is not None:
        cfg["seed"] = args.seed
        if "panel" in cfg:
            cfg["panel"]["seed"] = args.seed
    return cfg


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _provenance(out: Path, name: str, payload: dict) -> None:
    _config.dump_json(payload, out / f"{name}_provenance.json")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> None:
    cfg = _load(args)
    pcfg = panel.PanelConfig.from_dict(cfg.get("panel", cfg))
    series = panel.simulate_aggregate(pcfg, threads=args.threads)
    out = _outdir(args)
    panel.write_series_csv(series, out / "series.csv")
    _provenance(out, "series", series.provenance())


def cmd_theory(args) -> None:
    cfg = _load(args)
    src = cfg.get("panel", cfg)
    m = _config.mixing_from_dict(src["mixing"])
    t = _config.triplet_from_dict(src["triplet"])
    sigma_w2 = t.second_moment()
    out = _outdir(args)

    lags = [int(v) for v in cfg.get("r_lags", [0, 1, 2, 4, 8, 16, 32, 64])]
    with open(out / "r.csv", "w", newline="") as f:
        f.write("t,r\n")
        for lag in lags:
            f.write(f"{lag},{mixing.theoretical_r(m, lag, sigma_w2)!r}\n")

    thetas = [float(v) for v in cfg.get("thetas", [0.25, 0.5, 1.0, 2.0])]
    with open(out / "theta.csv", "w", newline="") as f:
        f.write("theta,re,im\n")
        for th in thetas:
            v = limits.theta_log_cf(th, m, t)
            f.write(f"{th!r},{v.real!r},{v.imag!r}\n")

    regime = None
    if isinstance(m, BetaEdge):
        rep = classify_regime(m.beta, t, psi_one(m))
        regime = {
            "regime": rep.regime.value,
            "exponent": rep.exponent,
            "limit_name": rep.limit_name,
            "constants": rep.constants,
        }
        _config.dump_json(regime, out / "regime.json")
    _provenance(out, "theory", {
        "mixing": _config.mixing_to_dict(m),
        "triplet": _config.triplet_to_dict(t),
        "sigma_w2": sigma_w2,
        "r_lags": lags,
        "thetas": thetas,
        "regime": regime,
    })


def cmd_scaling(args) -> None:
    cfg = _load(args)
    pcfg = panel.PanelConfig.from_dict(cfg["panel"])
    n_grid = np.asarray(cfg["n_grid"], dtype=int)
    reps = int(cfg["replications"])
    stat = limits.ScaleStat(cfg.get("scale_stat", "MedianAbs"))
    exp = limits.run_scaling_experiment(pcfg, n_grid, reps, stat,
                                        threads=args.threads)
    out = _outdir(args)
    limits.write_scaling_csv(exp, out / "scaling.csv")
    summary = None
    if isinstance(pcfg.mixing, BetaEdge):
        rep = classify_regime(pcfg.mixing.beta, pcfg.triplet, psi_one(pcfg.mixing))
        summary = {
            "regime": rep.regime.value,
            "beta": pcfg.mixing.beta,
            "alpha": rep.constants.get("alpha"),
            "H_theory": rep.exponent,
            "H_hat": exp.h_hat,
            "stderr": exp.stderr,
        }
    else:
        summary = {
            "regime": "oracle",
            "beta": float("nan"),
            "alpha": None,
            "H_theory": 0.5,
            "H_hat": exp.h_hat,
            "stderr": exp.stderr,
        }
    limits.write_scaling_summary_csv([summary], out / "scaling_summary.csv")
    _provenance(out, "scaling", {
        "panel": pcfg.to_dict(),
        "n_grid": [int(v) for v in n_grid],
        "replications": reps,
        "scale_stat": stat.value,
    })


def cmd_disagg(args) -> None:
    cfg = _load(args)
    if "series_csv" in cfg:
        series = _read_series(cfg["series_csv"])
        pdict = None
    else:
        pcfg = panel.PanelConfig.from_dict(cfg["panel"])
        series = panel.simulate_aggregate(pcfg, threads=args.threads).values
        pdict = pcfg.to_dict()
    q = float(cfg["q"])
    if "K" in cfg:
        k = int(cfg["K"])
    else:
        k = disagg.select_K(len(series), float(cfg.get("gamma", 0.3)))
    sigma_w2 = cfg.get("sigma_w2")
    basis = disagg.build_basis(q, k)
    est = disagg.estimate(series, q, k,
                          sigma_w2=None if sigma_w2 is None else float(sigma_w2),
                          basis=basis)
    out = _outdir(args)
    disagg.write_phi_csv(est, basis, out / "phi.csv")
    _provenance(out, "phi", {
        "panel": pdict,
        "series_csv": cfg.get("series_csv"),
        "q": q,
        "K": k,
        "mode": est.mode.value,
        "zeta_coeffs": [float(v) for v in est.zeta_coeffs],
        "sigma_hat_w2": est.sigma_hat_w2,
        "n": est.n,
    })


def cmd_mise(args) -> None:
    cfg = _load(args)
    src = cfg.get("panel", cfg)
    truth = _config.mixing_from_dict(src["mixing"])
    t = _config.triplet_from_dict(src["triplet"])
    gamma = cfg.get("gamma")
    k_grid = cfg.get("K_grid")
    if k_grid is None:
        if gamma is None:
            raise ConfigError("provide K_grid or gamma")
        k_grid = [disagg.select_K(int(src["n_time"]), float(gamma))]
    rows = disagg.mise_experiment(
        truth, t,
        n_micro=int(src["n_micro"]),
        n=int(src["n_time"]),
        q_grid=cfg["q_grid"],
        k_grid=k_grid,
        replications=int(cfg["replications"]),
        seed=int(src["seed"]),
        threads=args.threads,
    )
    out = _outdir(args)
    disagg.write_mise_csv(rows, out / "mise.csv")
    _provenance(out, "mise", {
        "mixing": _config.mixing_to_dict(truth),
        "triplet": _config.triplet_to_dict(t),
        "n_micro": int(src["n_micro"]),
        "n_time": int(src["n_time"]),
        "q_grid": [float(v) for v in cfg["q_grid"]],
        "K_grid": [int(v) for v in k_grid],
        "replications": int(cfg["replications"]),
        "seed": int(src["seed"]),
    })


def _read_series(path) -> np.ndarray:
    import csv

    vals = []
    try:
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != ["t", "value"]:
                raise ConfigError(
                    f"series CSV {path} must have header t,value, "
                    f"got {reader.fieldnames}"
                )
            for row in reader:
                vals.append(float(row["value"]))
    except OSError as e:
        raise ConfigError(f"cannot read series CSV {path}: {e}") from e
    if not vals:
        raise ConfigError(f"series CSV {path} is empty")
    return np.array(vals)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ar1agg",
        description="Aggregated random-coefficient AR(1) panels: simulation, "
                    "limit theory, and mixing-density disaggregation.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    handlers = {
        "simulate": (cmd_simulate, "simulate an aggregate panel path"),
        "theory": (cmd_theory, "tabulate r(t), the limit log-cf, and the regime"),
        "scaling": (cmd_scaling, "partial-sum scaling-exponent experiment"),
        "disagg": (cmd_disagg, "estimate the mixing density from a path"),
        "mise": (cmd_mise, "Monte Carlo MISE study over a (q, K) grid"),
    }
    for name, (fn, help_) in handlers.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON config path")
        sp.add_argument("--preset", help=f"named config: {sorted(_PRESETS)}")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--threads", type=int, default=1)
        sp.set_defaults(handler=fn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except (ConfigError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    except BudgetError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
