"""Disaggregation: recover the mixing density from one aggregate path.

The estimator expands zeta(x) = phi(x) / (1-x^2)^q in the orthonormal
polynomial basis {G_k} of L2((1-x^2)^q dx).  The moment identity

    sigma_W^{-2} (r(j) - r(j+2)) = int x^j phi(x) dx

turns basis coefficients zeta_k = int G_k phi dx into linear combinations of
autocovariance differences, which are then replaced by sample
autocovariances.  The density estimate is phi_hat(x) = zeta_hat(x)(1-x^2)^q.

The basis is generated from the monic three-term recurrence for the
symmetric Jacobi weight, carried in extended precision because the monomial
coefficients grow exponentially in the degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import mpmath as mp
import numpy as np
from scipy import special

from .errors import DomainError, NumericError
from .levy import LevyTriplet
from .mixing import (BetaEdge, Integrand, MixingLaw, check_conditions,
                     density, moment_functional, psi)

__all__ = [
    "GegenbauerBasis",
    "DensityEstimate",
    "EstimateMode",
    "build_basis",
    "sample_autocov",
    "estimate",
    "evaluate_phi_hat",
    "select_K",
    "zeta_exact",
    "weighted_energy",
    "ise",
    "ise_from_coeffs",
    "mise_experiment",
    "write_phi_csv",
    "write_mise_csv",
    "GAMMA_MAX",
]

GAMMA_MAX = 1.0 / (2.0 * math.log(1.0 + math.sqrt(2.0)))  # ~ 0.56715


# ---------------------------------------------------------------------------
# Basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GegenbauerBasis:
    """Orthonormal polynomials G_0..G_K for the weight (1-x^2)^q.

    coeff[k, j] is the x^j monomial coefficient of G_k (zero when j and k
    differ in parity); betas/norms carry the monic recurrence
    p_{k+1} = x p_k - beta_k p_{k-1}, G_k = p_k / sqrt(h_k).
    """

    q: float
    K: int
    coeff: np.ndarray   # (K+1, K+1)
    betas: np.ndarray   # beta_1..beta_K (recurrence), betas[0] unused
    norms: np.ndarray   # sqrt(h_k), k = 0..K

    def evaluate(self, x) -> np.ndarray:
        """All G_k at the points x, by the recurrence; shape (K+1, len(x))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((self.K + 1, x.size))
        p_prev = np.ones_like(x)
        out[0] = p_prev / self.norms[0]
        if self.K >= 1:
            p = x.copy()
            out[1] = p / self.norms[1]
            for k in range(1, self.K):
                p_prev, p = p, x * p - self.betas[k] * p_prev
                out[k + 1] = p / self.norms[k + 1]
        return out


def _monic_beta(k: int, q: mp.mpf) -> mp.mpf:
    # symmetric-Jacobi monic recurrence coefficient; the k = 1 case is the
    # cancelled form, which stays finite at q = -1/2
    if k == 1:
        return 1 / (2 * q + 3)
    k = mp.mpf(k)
    return k * (k + 2 * q) / ((2 * k + 2 * q + 1) * (2 * k + 2 * q - 1))


def build_basis(q: float, K: int) -> GegenbauerBasis:
    """Construct the orthonormal basis and self-check orthonormality on
    400 Gauss-Jacobi nodes (tolerance 1e-8)."""
    if q <= -1.0:
        raise DomainError("q must be > -1")
    if not 0 <= K <= 64:
        raise DomainError("K must lie in [0, 64]")
    with mp.workdps(60):
        mq = mp.mpf(q)
        beta0 = mp.sqrt(mp.pi) * mp.gamma(mq + 1) / mp.gamma(mq + mp.mpf(3) / 2)
        betas = [mp.mpf(0)] + [_monic_beta(k, mq) for k in range(1, K + 1)]
        polys = [[mp.mpf(1)]]
        if K >= 1:
            polys.append([mp.mpf(0), mp.mpf(1)])
        for k in range(1, K):
            prev, cur = polys[k - 1], polys[k]
            nxt = [mp.mpf(0)] + cur[:]
            for j, c in enumerate(prev):
                nxt[j] -= betas[k] * c
            polys.append(nxt)
        h = [beta0]
        for k in range(1, K + 1):
            h.append(h[-1] * betas[k])
        coeff = np.zeros((K + 1, K + 1))
        norms = np.empty(K + 1)
        for k in range(K + 1):
            s = mp.sqrt(h[k])
            norms[k] = float(s)
            for j, c in enumerate(polys[k]):
                coeff[k, j] = float(c / s)

    basis = GegenbauerBasis(q=float(q), K=K, coeff=coeff,
                            betas=np.array([float(b) for b in betas]),
                            norms=norms)
    # orthonormality is the defining contract: verify it, loudly
    nodes, weights = special.roots_jacobi(400, q, q)
    vals = basis.evaluate(nodes)
    gram = (vals * weights) @ vals.T
    dev = float(np.max(np.abs(gram - np.eye(K + 1))))
    if dev > 1e-8:
        raise NumericError(
            f"basis failed the orthonormality self-check (max deviation {dev:.2e})",
            achieved_tol=dev,
        )
    return basis


# ---------------------------------------------------------------------------
# Estimator
# ---------------------------------------------------------------------------

class EstimateMode(str, Enum):
    VarianceEstimated = "VarianceEstimated"
    VarianceKnown = "VarianceKnown"


@dataclass(frozen=True)
class DensityEstimate:
    q: float
    K: int
    zeta_coeffs: np.ndarray
    sigma_hat_w2: float
    mode: EstimateMode
    n: int


def sample_autocov(series: np.ndarray, j: int) -> float:
    """r_hat(j) = n^{-1} sum_{i<=n-j} (x_i - xbar)(x_{i+j} - xbar).

    The divisor is n regardless of the lag (the positive-semidefinite
    convention), not n - j.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if not 0 <= j <= n - 1:
        raise DomainError(f"lag {j} outside [0, {n - 1}]")
    xc = x - x.mean()
    return float(np.dot(xc[: n - j], xc[j:]) / n)


def estimate(series: np.ndarray, q: float, K: int,
             sigma_w2: float | None = None,
             basis: GegenbauerBasis | None = None) -> DensityEstimate:
    """Coefficient estimates zeta_hat_k from one aggregate path.

    With sigma_w2 omitted the innovation variance is estimated as
    r_hat(0) - r_hat(2); in that mode zeta_hat_0 = g_00 exactly, which
    forces int phi_hat = 1 for every input series.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if K + 2 >= n:
        raise DomainError("need K + 2 < n")
    if basis is None:
        basis = build_basis(q, K)
    elif basis.q != q or basis.K < K:
        raise DomainError("basis does not match (q, K)")
    r = np.array([sample_autocov(x, j) for j in range(K + 3)])
    diffs = r[: K + 1] - r[2: K + 3]
    if sigma_w2 is None:
        s2 = float(diffs[0])
        if s2 <= 0.0:
            raise NumericError(
                f"degenerate sample: r_hat(0) - r_hat(2) = {s2} <= 0"
            )
        mode = EstimateMode.VarianceEstimated
    else:
        if sigma_w2 <= 0.0:
            raise DomainError("sigma_w2 must be > 0")
        s2 = float(sigma_w2)
        mode = EstimateMode.VarianceKnown
    zeta = basis.coeff[: K + 1, : K + 1] @ (diffs / s2)
    return DensityEstimate(q=q, K=K, zeta_coeffs=zeta, sigma_hat_w2=s2,
                           mode=mode, n=n)


def evaluate_phi_hat(est: DensityEstimate, basis: GegenbauerBasis, x):
    """phi_hat(x) = sum_k zeta_hat_k G_k(x) * (1-x^2)^q; may go negative."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(xa) >= 1.0):
        raise DomainError("evaluation points must lie in (-1, 1)")
    if basis.q != est.q or basis.K < est.K:
        raise DomainError("basis does not match the estimate")
    vals = basis.evaluate(xa)[: est.K + 1]
    out = (est.zeta_coeffs @ vals) * (1.0 - xa**2) ** est.q
    return float(out[0]) if np.isscalar(x) else out


def select_K(n: int, gamma: float) -> int:
    """Truncation level floor(gamma * ln n); gamma must stay below
    1 / (2 ln(1 + sqrt 2)) ~ 0.56715 or the coefficient growth of the basis
    overwhelms the sqrt(n) rate of the autocovariances."""
    if n < 2:
        raise DomainError("n must be >= 2")
    if not 0.0 < gamma < GAMMA_MAX:
        raise DomainError(
            f"gamma must lie in (0, {GAMMA_MAX:.5f}), got {gamma}"
        )
    return int(math.floor(gamma * math.log(n)))


# ---------------------------------------------------------------------------
# Exact coefficients and integrated squared error
# ---------------------------------------------------------------------------

def zeta_exact(truth: MixingLaw, basis: GegenbauerBasis) -> np.ndarray:
    """zeta_k = int G_k(x) phi(x) dx by endpoint-aware quadrature."""
    out = np.empty(basis.K + 1)
    for k in range(basis.K + 1):
        g = Integrand(fn=lambda x, k=k: basis.evaluate(x)[k])
        out[k] = moment_functional(truth, g)
    return out


def weighted_energy(truth: MixingLaw, q: float) -> float:
    """T = int phi(x)^2 (1-x^2)^{-q} dx, the squared norm of phi / w in
    L2(w), w = (1-x^2)^q.  Finite exactly when the square-integrability
    condition holds."""
    rep = check_conditions(truth, q)
    if not rep.phicond_ok:
        raise DomainError(
            f"int phi^2 (1-x^2)^(-q) diverges for q = {q}; admissible "
            f"range ({rep.q_admissible[0]}, {rep.q_admissible[1]})"
        )
    if isinstance(truth, BetaEdge):
        g = Integrand(
            fn=lambda x: density(truth, x) * (1.0 - x * x) ** (-q),
            edge_order=q - truth.beta,
            edge_fn=lambda u: psi(truth, 1.0 - u) * (2.0 - u) ** (-q),
        )
    else:
        g = Integrand(fn=lambda x: density(truth, x) * (1.0 - x * x) ** (-q))
    return float(moment_functional(truth, g))


def ise_from_coeffs(zeta_hat: np.ndarray, zeta_true: np.ndarray,
                    energy: float) -> float:
    """Weighted ISE by Parseval: int (phi_hat - phi)^2 (1-x^2)^{-q} dx
    = sum_{k<=K} (zeta_hat_k - zeta_k)^2 + (T - sum_{k<=K} zeta_k^2)."""
    zeta_hat = np.asarray(zeta_hat, dtype=float)
    zeta_true = np.asarray(zeta_true, dtype=float)
    if zeta_hat.shape != zeta_true.shape:
        raise DomainError("coefficient arrays must have equal length")
    tail = energy - float(np.sum(zeta_true**2))
    return float(np.sum((zeta_hat - zeta_true) ** 2)) + max(tail, 0.0)


def ise(est: DensityEstimate, basis: GegenbauerBasis, truth: MixingLaw) -> float:
    """Weighted integrated squared error of one estimate against the truth."""
    zt = zeta_exact(truth, basis)[: est.K + 1]
    t_energy = weighted_energy(truth, est.q)
    return ise_from_coeffs(est.zeta_coeffs, zt, t_energy)


# ---------------------------------------------------------------------------
# Monte Carlo study
# ---------------------------------------------------------------------------

def mise_experiment(truth: MixingLaw, t: LevyTriplet, n_micro: int, n: int,
                    q_grid, k_grid, replications: int, seed: int,
                    threads: int = 1,
                    max_cells: int = 5_000_000_000) -> list[dict]:
    """Mean ISE over replicated panel simulations, for every (q, K) pair.

    One series is simulated per replicate and reused across the whole
    (q, K) grid; for each q the coefficients are estimated once at
    max(k_grid) and truncated, so adding K values is nearly free.
    Returns rows {q, K, mise, stderr}.
    """
    from .errors import BudgetError
    from .panel import PanelConfig, simulate_aggregate
    from .limits import _SEED_STRIDE
    from concurrent.futures import ThreadPoolExecutor

    q_grid = [float(q) for q in q_grid]
    k_grid = sorted(int(k) for k in k_grid)
    k_max = k_grid[-1]
    if n_micro * n * replications > max_cells:
        raise BudgetError(
            f"{n_micro} units x {n} steps x {replications} replicates "
            f"exceeds the budget of {max_cells} cells"
        )
    bases = {q: build_basis(q, k_max) for q in q_grid}
    zeta_true = {q: zeta_exact(truth, bases[q]) for q in q_grid}
    energy = {q: weighted_energy(truth, q) for q in q_grid}

    def one(r: int) -> np.ndarray:
        seed_r = (seed + _SEED_STRIDE * (r + 1)) % 2**64
        cfg = PanelConfig(n_micro=n_micro, n_time=n, seed=seed_r,
                          mixing=truth, triplet=t)
        series = simulate_aggregate(cfg).values
        vals = np.empty((len(q_grid), len(k_grid)))
        for qi, q in enumerate(q_grid):
            est = estimate(series, q, k_max, basis=bases[q])
            for ki, k in enumerate(k_grid):
                vals[qi, ki] = ise_from_coeffs(
                    est.zeta_coeffs[: k + 1], zeta_true[q][: k + 1], energy[q]
                )
        return vals

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cube = np.stack(list(pool.map(one, range(replications))))
    else:
        cube = np.stack([one(r) for r in range(replications)])
    rows = []
    for qi, q in enumerate(q_grid):
        for ki, k in enumerate(k_grid):
            col = cube[:, qi, ki]
            rows.append({
                "q": q,
                "K": k,
                "mise": float(col.mean()),
                "stderr": float(col.std(ddof=1) / math.sqrt(replications)),
            })
    return rows


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def write_phi_csv(est: DensityEstimate, basis: GegenbauerBasis, path,
                  grid_size: int = 512) -> None:
    """Estimate CSV: header x,phi_hat on an open uniform grid of (-1, 1)."""
    xs = (np.arange(grid_size) + 0.5) / grid_size * 2.0 - 1.0
    ys = evaluate_phi_hat(est, basis, xs)
    with open(path, "w", newline="") as f:
        f.write("x,phi_hat\n")
        for x, y in zip(xs, ys):
            f.write(f"{float(x)!r},{float(y)!r}\n")


def write_mise_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as f:
        f.write("q,K,mise,stderr\n")
        for row in rows:
            f.write(
                f"{float(row['q'])!r},{int(row['K'])},"
                f"{float(row['mise'])!r},{float(row['stderr'])!r}\n"
            )
