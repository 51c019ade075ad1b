"""Limit theory of the aggregate: exact log-cf, limit laws, scaling experiment.

Two computational pieces live here.

1. theta_log_cf: the marginal log-characteristic function of the limit
   aggregate, Theta(theta) = E[ sum_{k>=0} V(theta a^k) ], by the mixing
   module's endpoint-aware quadrature over a.  Near the unit root the inner
   sum has ~1/(1-a) relevant terms, far too many to add up at the innermost
   quadrature nodes (1-a ~ 1e-11); there the sum is replaced by its
   Euler-Maclaurin expansion, whose leading term is an a-independent
   integral of V computed once per theta.

2. run_scaling_experiment: simulate partial sums S_n over a grid of n,
   measure how their spread grows, and fit the growth exponent.  This is the
   desk-scale verification of the four normalization regimes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
import math

import numpy as np

from .errors import BudgetError, DomainError, NumericError
from .levy import LevyTriplet, levy_moment, omega, v_log_cf_grid
from .mixing import Integrand, MixingLaw, moment_functional
from .panel import AggregatedSeries, PanelConfig, simulate_aggregate

__all__ = [
    "ScaleStat",
    "ScalingExperiment",
    "theta_log_cf",
    "empirical_cf",
    "run_scaling_experiment",
    "run_scaling_from_paths",
    "fbm_variance_constant",
    "regime_iii_limit_cf",
    "write_scaling_csv",
    "write_scaling_summary_csv",
]

# switch to the Euler-Maclaurin tail once ln(1/a) drops below this
_EM_CUT = 0.1
# direct summation stops once |theta| a^k falls below this
_TERM_FLOOR = 1e-7


# ---------------------------------------------------------------------------
# Theta(theta)
# ---------------------------------------------------------------------------

def _v_em_data(t: LevyTriplet, theta: float):
    """Per-theta constants for the Euler-Maclaurin tail.

    Returns (V(theta), DV, D3V, I) where D = theta d/dtheta acting on V and
    I = int_0^1 V(theta w) dw / w.  With L = ln(1/a),

        sum_{k>=0} V(theta a^k) = I/L + V/2 + (L/12) DV - (L^3/720) D3V + O(L^5).
    """
    h = 0.05
    stencil = theta * np.exp(h * np.arange(-2, 3))
    v = v_log_cf_grid(t, stencil)
    dv = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h)
    d3v = (v[4] - 2.0 * v[3] + 2.0 * v[1] - v[0]) / (2.0 * h**3)
    w, wt = np.polynomial.legendre.leggauss(200)
    w = (w + 1.0) / 2.0
    wt = wt / 2.0
    ival = np.sum(wt * v_log_cf_grid(t, theta * w) / w)
    return v[2], dv, d3v, ival


def _inner_sum(a: np.ndarray, theta: float, t: LevyTriplet, em) -> np.ndarray:
    """sum_{k>=0} V(theta a^k) for an array of coefficients a in (-1, 1)."""
    a = np.asarray(a, dtype=float)
    v0, dv, d3v, ival = em
    out = np.empty(a.shape, dtype=complex)
    absa = np.abs(a)
    with np.errstate(divide="ignore"):
        el = -np.log(absa)  # a = 0 gives el = inf, handled by the direct branch
    neg_deep = (a < 0) & (el < _EM_CUT)
    use_em = (a > 0) & (el < _EM_CUT)
    direct = ~(use_em | neg_deep)

    if np.any(use_em):
        L = el[use_em]
        out[use_em] = ival / L + v0 / 2.0 + L / 12.0 * dv - L**3 / 720.0 * d3v
    if np.any(neg_deep):
        # split into even/odd subsequences, each geometric with ratio a^2 > 0
        for i in np.nonzero(neg_deep)[0]:
            L2 = -2.0 * math.log(absa[i])
            s_even = ival / L2 + v0 / 2.0 + L2 / 12.0 * dv - L2**3 / 720.0 * d3v
            v0o, dvo, d3vo, ivo = _v_em_data(t, theta * a[i])
            s_odd = ivo / L2 + v0o / 2.0 + L2 / 12.0 * dvo - L2**3 / 720.0 * d3vo
            out[i] = s_even + s_odd
    if np.any(direct):
        ad = a[direct]
        if abs(theta) <= _TERM_FLOOR:
            kmax = np.ones(ad.shape, dtype=int)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                kmax = np.ceil(
                    np.log(_TERM_FLOOR / abs(theta)) / np.log(np.abs(ad))
                )
            kmax = np.where(np.isfinite(kmax), kmax, 1.0).astype(int)
            kmax = np.clip(kmax, 1, None)
        res = np.zeros(ad.shape, dtype=complex)
        args = []
        idx = []
        for i, (ai, ki) in enumerate(zip(ad, kmax)):
            args.append(theta * ai ** np.arange(ki))
            idx.append(np.full(ki, i))
        vv = v_log_cf_grid(t, np.concatenate(args))
        np.add.at(res, np.concatenate(idx), vv)
        out[direct] = res
    return out


def theta_log_cf(theta: float, m: MixingLaw, t: LevyTriplet,
                 tol: float = 1e-8) -> complex:
    """Theta(theta) = E[sum_{k>=0} V(theta a^k)], the marginal log-cf of the
    limit aggregate."""
    if not 0.0 < tol <= 1e-4:
        raise DomainError("tol must lie in (0, 1e-4]")
    if theta == 0.0:
        return 0.0 + 0.0j
    em = _v_em_data(t, theta)
    # near the unit root u = 1-a: u * inner_sum -> I(theta)/1 smoothly
    g = Integrand(
        fn=lambda x: _inner_sum(x, theta, t, em),
        edge_order=1.0,
        edge_fn=lambda u: u * _inner_sum(1.0 - u, theta, t, em),
    )
    return complex(moment_functional(m, g))


def empirical_cf(values: np.ndarray, thetas: np.ndarray,
                 n_batches: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Time-average estimate of E exp(i theta X) with batch-means errors.

    Returns (cf, stderr) arrays over thetas; stderr is the standard error of
    the mean of `n_batches` contiguous batch means, which stays honest under
    the serial dependence of the aggregate.
    """
    x = np.asarray(values, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    z = np.exp(1j * np.outer(thetas, x))
    cf = z.mean(axis=1)
    nb = min(n_batches, x.size)
    cut = (x.size // nb) * nb
    bm = z[:, :cut].reshape(len(thetas), nb, -1).mean(axis=2)
    se = np.abs(bm - cf[:, None]).std(axis=1, ddof=1) / math.sqrt(nb)
    return cf, se


# ---------------------------------------------------------------------------
# Limit-law constants
# ---------------------------------------------------------------------------

def fbm_variance_constant(beta: float, sigma: float, psi1: float) -> float:
    """Variance of the fractional-Brownian limit at unit time:
    sigma^2 * psi1 * Gamma(beta - 2), positive on beta in (0, 1)."""
    if not 0.0 < beta < 1.0:
        raise DomainError("beta must lie in (0, 1)")
    return sigma**2 * psi1 * math.gamma(beta - 2.0)


def regime_iii_limit_cf(theta: float, tau: float, beta: float,
                        t: LevyTriplet, psi1: float) -> complex:
    """Log-cf of the (1+beta)-stable Levy limit at time tau:
    -tau |theta|^{1+beta} psi1 * omega(theta; 1+beta, pi_beta^+, pi_beta^-),
    where pi_beta^{+-} = (1+beta)^{-1} int x^{1+beta} per jump side.  The
    first omega slot takes the positive-side moment: this is the order that
    reproduces tau psi1 |theta|^{1+beta} int_0^inf V(sgn(theta) y) y^{-beta-2} dy
    (checked numerically in the tests), and it gives a right-skewed limit
    for positive jumps, as it must."""
    if tau <= 0:
        raise DomainError("tau must be > 0")
    if not 0.0 < beta < 1.0:
        raise DomainError("beta must lie in (0, 1)")
    if t.sigma != 0.0 or t.is_degenerate():
        raise DomainError("regime III requires sigma = 0 and a nonzero jump measure")
    if theta == 0.0:
        return 0.0 + 0.0j
    alpha = 1.0 + beta
    pip = levy_moment(t, alpha, side="plus") / alpha
    pim = levy_moment(t, alpha, side="minus") / alpha
    return -tau * abs(theta) ** alpha * psi1 * omega(theta, alpha, pip, pim)


# ---------------------------------------------------------------------------
# Scaling experiment
# ---------------------------------------------------------------------------

class ScaleStat(str, Enum):
    MedianAbs = "MedianAbs"
    IQR = "IQR"
    StdDev = "StdDev"


def _spread(col: np.ndarray, stat: ScaleStat) -> float:
    if stat is ScaleStat.MedianAbs:
        return float(np.median(np.abs(col)))
    if stat is ScaleStat.IQR:
        q1, q3 = np.percentile(col, [25.0, 75.0])
        return float(q3 - q1)
    return float(np.std(col, ddof=1))


@dataclass(frozen=True)
class ScalingExperiment:
    n_grid: np.ndarray
    replications: int
    scale_stat: ScaleStat
    s_table: np.ndarray  # shape (R, len(n_grid)): partial sums
    h_hat: float
    stderr: float


def _fit_exponent(n_grid: np.ndarray, s_table: np.ndarray,
                  stat: ScaleStat) -> tuple[float, float]:
    # the scaling law is asymptotic: fit on the top half of the grid only
    top = int(math.ceil(len(n_grid) / 2.0))
    ns = n_grid[-top:]
    cols = s_table[:, -top:]
    scales = np.array([_spread(cols[:, j], stat) for j in range(top)])
    if np.any(scales <= 0.0) or not np.all(np.isfinite(scales)):
        raise NumericError("degenerate scale statistic in exponent fit")
    x = np.log(ns.astype(float))
    slope = np.polyfit(x, np.log(scales), 1)[0]
    r = s_table.shape[0]
    jk = np.empty(r)
    for i in range(r):
        sub = np.delete(cols, i, axis=0)
        sc = np.array([_spread(sub[:, j], stat) for j in range(top)])
        jk[i] = np.polyfit(x, np.log(sc), 1)[0]
    se = math.sqrt((r - 1) / r * np.sum((jk - jk.mean()) ** 2))
    return float(slope), float(se)


def run_scaling_from_paths(paths: np.ndarray, n_grid: np.ndarray,
                           stat: ScaleStat = ScaleStat.MedianAbs) -> ScalingExperiment:
    """Exponent experiment on precomputed paths (rows: replicates).

    S_n for all n in the grid comes from one prefix-sum pass per path.
    """
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    n_grid = np.asarray(n_grid, dtype=int)
    if paths.shape[0] < 2:
        raise DomainError("need at least 2 replicate paths")
    if np.any(np.diff(n_grid) <= 0) or n_grid[-1] > paths.shape[1]:
        raise DomainError("n_grid must be increasing and within the path length")
    csum = np.cumsum(paths, axis=1)
    s_table = csum[:, n_grid - 1]
    h, se = _fit_exponent(n_grid, s_table, stat)
    return ScalingExperiment(n_grid, paths.shape[0], stat, s_table, h, se)


_SEED_STRIDE = 0x9E3779B97F4A7C15


def run_scaling_experiment(cfg: PanelConfig, n_grid, replications: int,
                           stat: ScaleStat = ScaleStat.MedianAbs,
                           threads: int = 1,
                           max_cells: int = 5_000_000_000) -> ScalingExperiment:
    """Simulate `replications` aggregate paths of length max(n_grid) and fit
    the partial-sum growth exponent.  Replicate r reruns the panel with a
    derived seed, so the whole experiment is reproducible from cfg.seed."""
    n_grid = np.asarray(n_grid, dtype=int)
    if replications < 2:
        raise DomainError("need at least 2 replications")
    n_max = int(n_grid[-1])
    if cfg.n_micro * n_max * replications > max_cells:
        raise BudgetError(
            f"{cfg.n_micro} units x {n_max} steps x {replications} replicates "
            f"exceeds the budget of {max_cells} cells"
        )

    def one(r: int) -> np.ndarray:
        seed_r = (cfg.seed + _SEED_STRIDE * (r + 1)) % 2**64
        c = replace(cfg, n_time=n_max, seed=seed_r)
        return simulate_aggregate(c).values

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(replications)))
    else:
        rows = [one(r) for r in range(replications)]
    return run_scaling_from_paths(np.vstack(rows), n_grid, stat)


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def write_scaling_csv(exp: ScalingExperiment, path) -> None:
    with open(path, "w", newline="") as f:
        f.write("n,replicate,S_n\n")
        for r in range(exp.replications):
            for j, n in enumerate(exp.n_grid):
                f.write(f"{int(n)},{r},{float(exp.s_table[r, j])!r}\n")


def write_scaling_summary_csv(rows: list[dict], path) -> None:
    """Summary rows: regime, beta, alpha, H_theory, H_hat, stderr."""
    with open(path, "w", newline="") as f:
        f.write("regime,beta,alpha,H_theory,H_hat,stderr\n")
        for row in rows:
            alpha = row.get("alpha")
            f.write(
                f"{row['regime']},{float(row['beta'])!r},"
                f"{'' if alpha is None else repr(float(alpha))},"
                f"{float(row['H_theory'])!r},{float(row['H_hat'])!r},"
                f"{float(row['stderr'])!r}\n"
            )
