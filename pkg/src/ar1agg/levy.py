"""Infinitely divisible innovation laws represented by their characteristic triplet.

A law W with zero mean and finite variance is described by (sigma, pi): a
Gaussian component of scale sigma plus a jump measure pi from one of the
parametric families below.  Its log-characteristic function is

    V(theta) = integral (e^{i theta y} - 1 - i theta y) pi(dy) - sigma^2 theta^2 / 2.

All families either truncate or exponentially damp large jumps, so every
representable triplet has finite moments of all orders and W is mean-zero by
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError

__all__ = [
    "NoJumps",
    "CenteredGamma",
    "TruncatedStable",
    "LevyTriplet",
    "Regime",
    "RegimeReport",
    "v_log_cf",
    "v_log_cf_grid",
    "pi_tail",
    "levy_moment",
    "jump_moment_signed",
    "sample_increment",
    "sample_increments",
    "omega",
    "stable_log_cf",
    "sample_stable",
    "classify_regime",
]


# ---------------------------------------------------------------------------
# Jump families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoJumps:
    """Pure Gaussian: no jump component."""


@dataclass(frozen=True)
class CenteredGamma:
    """W = Gamma(shape, scale) - shape*scale.

    Levy density shape * x^{-1} e^{-x/scale} on (0, infinity); all positive
    moments of pi are finite (exponential damping).
    """

    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise DomainError("CenteredGamma requires shape > 0 and scale > 0")


@dataclass(frozen=True)
class TruncatedStable:
    """Two-sided stable-like jumps truncated at a finite cutoff.

    Levy density alpha * c_pm * |x|^{-1-alpha} on 0 < +-x <= cutoff, zero
    beyond, so the tail functions are
    Pi^{+-}(x) = c_pm (x^{-alpha} - cutoff^{-alpha}) for 0 < x <= cutoff.
    """

    alpha: float
    c_plus: float
    c_minus: float
    cutoff: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise DomainError("TruncatedStable requires alpha in (0, 2)")
        if self.c_plus < 0 or self.c_minus < 0 or self.c_plus + self.c_minus <= 0:
            raise DomainError("TruncatedStable requires c_plus, c_minus >= 0, c_plus + c_minus > 0")
        if self.cutoff <= 0:
            raise DomainError("TruncatedStable requires cutoff > 0")


JumpFamily = Union[NoJumps, CenteredGamma, TruncatedStable]


@dataclass(frozen=True)
class LevyTriplet:
    """Characteristic triplet (mu, sigma, pi); mu is always 0 here."""

    sigma: float
    jumps: JumpFamily = field(default_factory=NoJumps)
    mu: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise DomainError("sigma must be >= 0")
        if self.mu != 0.0:
            raise DomainError("mean-zero laws only: mu must be 0")

    def second_moment(self) -> float:
        """E W^2 = sigma^2 + integral x^2 pi(dx)."""
        return self.sigma**2 + levy_moment(self, 2.0)

    def is_degenerate(self) -> bool:
        return self.sigma == 0.0 and isinstance(self.jumps, NoJumps)


# ---------------------------------------------------------------------------
# Levy-measure functionals
# ---------------------------------------------------------------------------

def pi_tail(t: LevyTriplet, x: float, side: str = "plus") -> float:
    """Tail mass Pi^side(x) of the jump measure, x > 0."""
    if x <= 0:
        raise DomainError(f"pi_tail requires x > 0, got {x}")
    if side not in ("plus", "minus"):
        raise DomainError(f"side must be 'plus' or 'minus', got {side!r}")
    j = t.jumps
    if isinstance(j, NoJumps):
        return 0.0
    if isinstance(j, CenteredGamma):
        if side == "minus":
            return 0.0
        # integral_x^inf shape * y^{-1} e^{-y/scale} dy = shape * E1(x/scale)
        return j.shape * float(special.exp1(x / j.scale))
    c = j.c_plus if side == "plus" else j.c_minus
    if c == 0.0 or x >= j.cutoff:
        return 0.0
    return c * (x ** -j.alpha - j.cutoff ** -j.alpha)


def levy_moment(t: LevyTriplet, p: float, side: str | None = None) -> float:
    """Absolute jump moment integral |x|^p pi(dx) (one-sided when requested).

    For the truncated-stable family the small-jump integral diverges unless
    p > alpha.
    """
    if p <= 0:
        raise DomainError("levy_moment requires p > 0")
    j = t.jumps
    if isinstance(j, NoJumps):
        return 0.0
    if isinstance(j, CenteredGamma):
        if side == "minus":
            return 0.0
        return j.shape * float(special.gamma(p)) * j.scale**p
    if p <= j.alpha:
        raise DomainError(
            f"integral |x|^p pi(dx) diverges at the origin for p={p} <= alpha={j.alpha}"
        )
    per_unit_c = j.alpha / (p - j.alpha) * j.cutoff ** (p - j.alpha)
    if side == "plus":
        return j.c_plus * per_unit_c
    if side == "minus":
        return j.c_minus * per_unit_c
    return (j.c_plus + j.c_minus) * per_unit_c


def jump_moment_signed(t: LevyTriplet, k: int) -> float:
    """Signed moment integral x^k pi(dx) for integer k >= 2."""
    if k < 2:
        raise DomainError("signed jump moments defined for k >= 2 only")
    j = t.jumps
    if isinstance(j, NoJumps):
        return 0.0
    if isinstance(j, CenteredGamma):
        return j.shape * math.gamma(k) * j.scale**k
    sign = 1.0 if k % 2 == 0 else -1.0
    per_unit_c = j.alpha / (k - j.alpha) * j.cutoff ** (k - j.alpha)
    return (j.c_plus + sign * j.c_minus) * per_unit_c


# ---------------------------------------------------------------------------
# Log-characteristic function
# ---------------------------------------------------------------------------

def _compensated_exp(u: np.ndarray) -> np.ndarray:
    """e^{iu} - 1 - iu, evaluated without cancellation for small |u|."""
    u = np.asarray(u, dtype=float)
    re = -2.0 * np.sin(u / 2.0) ** 2
    small = np.abs(u) < 1e-4
    # sin(u) - u = -u^3/6 (1 - u^2/20 + ...)
    im = np.where(small, -(u**3) / 6.0 * (1.0 - u**2 / 20.0), np.sin(u) - u)
    return re + 1j * im


def _ts_side_integral(theta: float, alpha: float, c: float, cutoff: float) -> complex:
    """integral_0^cutoff (e^{i theta y}-1-i theta y) alpha c y^{-1-alpha} dy.

    Substitutes w = y^{2-alpha} so the integrand is bounded at the origin.
    """
    if c == 0.0:
        return 0.0 + 0.0j
    p = 2.0 - alpha

    def h(w: float, part: str) -> float:
        y = w ** (1.0 / p)
        val = complex(_compensated_exp(np.array([theta * y]))[0]) * (alpha * c / p) * y**-2
        return val.real if part == "re" else val.imag

    w_max = cutoff**p
    pts = []
    if theta != 0.0:
        w_split = (1.0 / abs(theta)) ** p
        if 0.0 < w_split < w_max:
            pts.append(w_split)
    out = 0.0 + 0.0j
    for part in ("re", "im"):
        val, err = integrate.quad(h, 0.0, w_max, args=(part,), points=pts or None,
                                  limit=200, epsabs=1e-12, epsrel=1e-11)
        if err > 1e-8:
            raise NumericError(
                f"jump-integral quadrature did not converge (abserr={err:.2e})",
                achieved_tol=err,
            )
        out += val if part == "re" else 1j * val
    return out


def _ts_series(j: TruncatedStable, thetas: np.ndarray) -> np.ndarray:
    """Jump part of V by the cumulant series sum_{k>=2} (i theta)^k pi_k / k!.

    The jump measure has bounded support, so the series is entire in theta;
    it is used when |theta| * cutoff is small enough for fast convergence.
    """
    out = np.zeros(thetas.shape, dtype=complex)
    term = np.ones(thetas.shape, dtype=complex)  # (i theta)^k / k!
    it = 1j * thetas
    tri = LevyTriplet(0.0, j)
    for k in range(1, 61):
        term = term * it / k
        if k >= 2:
            out += term * jump_moment_signed(tri, k)
            # bound the magnitude with the absolute moment: signed odd
            # moments can vanish without the series having converged
            bound = np.abs(term) * levy_moment(tri, float(k))
            if np.all(bound < 1e-16 * (1.0 + np.abs(out))):
                break
    return out


def v_log_cf(t: LevyTriplet, theta: float) -> complex:
    """V(theta), the log-characteristic function of the triplet's law."""
    return complex(v_log_cf_grid(t, np.array([theta], dtype=float))[0])


def v_log_cf_grid(t: LevyTriplet, thetas: np.ndarray) -> np.ndarray:
    """Vectorized V over an array of theta values."""
    thetas = np.asarray(thetas, dtype=float)
    out = -0.5 * (t.sigma**2) * thetas**2 + 0.0j
    j = t.jumps
    if isinstance(j, NoJumps):
        return out
    if isinstance(j, CenteredGamma):
        # closed form: -shape*log(1 - i theta scale) - i theta shape scale
        z = 1.0 - 1j * thetas * j.scale
        small = np.abs(thetas * j.scale) < 1e-5
        # log(1-iu) + iu = u^2/2 + i u^3/3 - ... for small u, avoids cancellation
        u = thetas * j.scale
        series = u**2 / 2.0 * (1.0 - u**2 / 2.0) + 1j * (u**3 / 3.0)
        exact = np.log(z) + 1j * u
        return out - j.shape * np.where(small, series, exact)
    # jumps at +y contribute e^{i theta y} terms, jumps at -y contribute
    # e^{-i theta y} terms with the opposite tail constant; small arguments
    # go through the entire cumulant series, large ones through quadrature
    jump = np.empty(thetas.shape, dtype=complex)
    small = np.abs(thetas) * j.cutoff <= 8.0
    if np.any(small):
        jump[small] = _ts_series(j, thetas[small])
    for idx in np.nonzero(~small)[0]:
        th = thetas[idx]
        jump[idx] = (
            _ts_side_integral(th, j.alpha, j.c_plus, j.cutoff)
            + _ts_side_integral(-th, j.alpha, j.c_minus, j.cutoff)
        )
    return out + jump


# ---------------------------------------------------------------------------
# Increment sampling (triangular-array innovations)
# ---------------------------------------------------------------------------

def _ts_small_jump_threshold(j: TruncatedStable, dt: float) -> float:
    """Largest delta with substituted-Gaussian std >= 5*delta (capped at cutoff).

    The small-jump variance below delta is (c+ + c-) alpha/(2-alpha) delta^{2-alpha},
    so dt * m2(delta) >= 25 delta^2 solves in closed form.  Choosing the largest
    admissible delta keeps the compound-Poisson rate as low as the Gaussian
    substitution allows.
    """
    c_tot = j.c_plus + j.c_minus
    delta = (dt * c_tot * j.alpha / ((2.0 - j.alpha) * 25.0)) ** (1.0 / j.alpha)
    return min(delta, j.cutoff)


def _ts_increments(j: TruncatedStable, sigma: float, dt: float, size: int,
                   rng: np.random.Generator) -> np.ndarray:
    delta = _ts_small_jump_threshold(j, dt)
    a, cutoff = j.alpha, j.cutoff
    # small jumps (|x| <= delta): centered normal with the matched variance
    m2_small = (j.c_plus + j.c_minus) * a / (2.0 - a) * delta ** (2.0 - a)
    var = sigma**2 * dt + dt * m2_small
    out = rng.normal(0.0, math.sqrt(var), size)
    if delta >= cutoff:
        return out
    # jumps above delta: compound Poisson with inverse-tail sizes, compensated
    lam_p = j.c_plus * (delta**-a - cutoff**-a)
    lam_m = j.c_minus * (delta**-a - cutoff**-a)
    lam = lam_p + lam_m

    def side_mean(c):
        if c == 0.0:
            return 0.0
        if a == 1.0:
            return c * a * math.log(cutoff / delta)
        return c * a / (1.0 - a) * (cutoff ** (1.0 - a) - delta ** (1.0 - a))

    mean_big = side_mean(j.c_plus) - side_mean(j.c_minus)
    counts = rng.poisson(dt * lam, size)
    total = int(counts.sum())
    if total > 0:
        u = rng.random(total)
        sizes = (delta**-a - u * (delta**-a - cutoff**-a)) ** (-1.0 / a)
        signs = np.where(rng.random(total) < lam_p / lam, 1.0, -1.0)
        jump_sum = np.zeros(size)
        idx = np.repeat(np.arange(size), counts)
        np.add.at(jump_sum, idx, signs * sizes)
        out += jump_sum
    out -= dt * mean_big
    return out


def sample_increments(t: LevyTriplet, dt: float, size: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Draw `size` independent time-dt increments of the Levy process of W.

    The increments are mean-zero with variance dt * E W^2; summing 1/dt of
    them reproduces the law of W exactly for the Gaussian and centered-gamma
    families, and up to the small-jump Gaussian substitution for truncated
    stable jumps.
    """
    if not 0.0 < dt <= 1.0:
        raise DomainError(f"dt must lie in (0, 1], got {dt}")
    j = t.jumps
    if isinstance(j, NoJumps):
        return rng.normal(0.0, t.sigma * math.sqrt(dt), size)
    if isinstance(j, CenteredGamma):
        out = rng.gamma(j.shape * dt, j.scale, size) - j.shape * j.scale * dt
        if t.sigma > 0:
            out += rng.normal(0.0, t.sigma * math.sqrt(dt), size)
        return out
    return _ts_increments(j, t.sigma, dt, size, rng)


def sample_increment(t: LevyTriplet, dt: float, rng: np.random.Generator) -> float:
    return float(sample_increments(t, dt, 1, rng)[0])


# ---------------------------------------------------------------------------
# Stable laws in the (c1, c2) tail parametrization
# ---------------------------------------------------------------------------

def omega(theta: float, alpha: float, c1: float, c2: float) -> complex:
    """omega(theta; alpha, c1, c2): the stable log-cf is -|theta|^alpha * omega.

    For alpha = 2 we adopt the convention omega = c1 + c2, i.e. variance
    2*(c1 + c2) (the tail constants lose their meaning in the Gaussian case
    and only the total scale survives).
    """
    if c1 < 0 or c2 < 0 or c1 + c2 <= 0:
        raise DomainError("require c1, c2 >= 0 with c1 + c2 > 0")
    if alpha == 2.0:
        return complex(c1 + c2)
    if alpha == 1.0:
        if c1 != c2:
            raise DomainError("alpha = 1 supported only in the symmetric case c1 = c2")
        return complex((c1 + c2) * math.pi / 2.0)
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
    g = math.gamma(2.0 - alpha) / (1.0 - alpha)
    s = 1.0 if theta > 0 else (-1.0 if theta < 0 else 0.0)
    return g * (
        (c1 + c2) * math.cos(math.pi * alpha / 2.0)
        - 1j * (c1 - c2) * s * math.sin(math.pi * alpha / 2.0)
    )


def stable_log_cf(theta: float, alpha: float, c1: float, c2: float) -> complex:
    return -abs(theta) ** alpha * omega(theta, alpha, c1, c2)


def sample_stable(alpha: float, c1: float, c2: float, rng: np.random.Generator,
                  size: int | None = None) -> float | np.ndarray:
    """Polar (Chambers-Mallows-Stuck) sampler for the law exp(-|theta|^alpha omega)."""
    n = 1 if size is None else size
    if alpha == 2.0:
        out = rng.normal(0.0, math.sqrt(2.0 * (c1 + c2)), n)
        return float(out[0]) if size is None else out
    if alpha == 1.0:
        if c1 != c2:
            raise DomainError("alpha = 1 supported only in the symmetric case c1 = c2")
        scale = (c1 + c2) * math.pi / 2.0
        u = rng.uniform(-math.pi / 2.0, math.pi / 2.0, n)
        out = scale * np.tan(u)
        return float(out[0]) if size is None else out
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
    if c1 + c2 <= 0:
        raise DomainError("require c1 + c2 > 0")
    # map to the one-parametrization S_alpha(scale, skew, 0)
    g = math.gamma(2.0 - alpha) / (1.0 - alpha)
    sigma_a = g * (c1 + c2) * math.cos(math.pi * alpha / 2.0)  # = scale^alpha > 0
    skew = (c1 - c2) / (c1 + c2)
    tphi = math.tan(math.pi * alpha / 2.0)
    theta0 = math.atan(skew * tphi) / alpha
    pref = (1.0 + skew**2 * tphi**2) ** (1.0 / (2.0 * alpha))
    u = rng.uniform(-math.pi / 2.0, math.pi / 2.0, n)
    w = rng.exponential(1.0, n)
    x = (
        pref
        * np.sin(alpha * (u + theta0))
        / np.cos(u) ** (1.0 / alpha)
        * (np.cos(u - alpha * (u + theta0)) / w) ** ((1.0 - alpha) / alpha)
    )
    out = sigma_a ** (1.0 / alpha) * x
    return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# Partial-sum regime classification
# ---------------------------------------------------------------------------

class Regime(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    exponent: float
    limit_name: str
    constants: dict


def small_jump_index(j: JumpFamily) -> float | None:
    """Index alpha with x^alpha Pi(x) -> const as x -> 0.

    Centered-gamma tails blow up only logarithmically at the origin, so the
    effective index is 0; the pure-Gaussian family has no jumps at all.
    """
    if isinstance(j, NoJumps):
        return None
    if isinstance(j, CenteredGamma):
        return 0.0
    return j.alpha


def classify_regime(beta: float, t: LevyTriplet, psi1: float = 1.0) -> RegimeReport:
    """Place (beta, triplet) into one of the four partial-sum scaling regimes.

    Normalization exponents: I -> 1 - beta/2, II -> 1 - beta/alpha,
    III -> 1/(1+beta), IV -> 1/2.  The boundary cases beta = 1 and
    alpha = 1 + beta are rejected.
    """
    if beta <= 0:
        raise DomainError("beta must be > 0")
    if beta == 1.0:
        raise DomainError("beta = 1 is a boundary case with no covered limit")
    if t.is_degenerate():
        raise DomainError("degenerate triplet (sigma = 0, no jumps) has no limit regime")
    if beta > 1.0:
        return RegimeReport(
            Regime.IV, 0.5, "Brownian motion",
            {"sigma_phi2": None},  # resolved against a mixing law by mixing.sigma_phi2
        )
    if t.sigma > 0.0:
        const = t.sigma**2 * psi1 * float(special.gamma(beta - 2.0))
        return RegimeReport(
            Regime.I, 1.0 - beta / 2.0, "fractional Brownian motion",
            {"fbm_variance": const, "hurst": 1.0 - beta / 2.0},
        )
    alpha = small_jump_index(t.jumps)
    if alpha == 1.0 + beta:
        raise DomainError("alpha = 1 + beta is a boundary case with no covered limit")
    if alpha is not None and 1.0 + beta < alpha < 2.0:
        return RegimeReport(
            Regime.II, 1.0 - beta / alpha, "self-similar stable process",
            {"alpha": alpha, "hurst": 1.0 - beta / alpha},
        )
    # pi != 0 with a small-jump index below 1 + beta: moment condition holds
    # for some p < 1 + beta by construction of both jump families
    return RegimeReport(
        Regime.III, 1.0 / (1.0 + beta), "stable Levy process",
        {"stable_index": 1.0 + beta},
    )
