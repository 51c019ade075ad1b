"""Mixing laws for the random AR coefficient and their functionals.

The central object is the law Phi of the coefficient a on (-1, 1).  Most
quantities of interest are expectations E[g(a)] where g blows up at the unit
root like (1-x)^{-s}; the quadrature here is built around that endpoint
behavior instead of fighting it.

The workhorse family is BetaEdge(beta) with density

    phi(x) = Z^{-1} (1+x) (1-x)^beta,   Z = 2^{beta+2} / ((beta+1)(beta+2)),

whose polynomial decay at x=1 produces long memory in the aggregate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy import special

from .errors import DomainError
from . import levy as _levy

__all__ = [
    "BetaEdge",
    "PointMass",
    "TableDensity",
    "Integrand",
    "ConditionReport",
    "density",
    "psi",
    "psi_one",
    "sample",
    "moment_functional",
    "theoretical_r",
    "sigma_phi2",
    "cum4_theoretical",
    "check_conditions",
]

# boundary of the unit-root edge segment: x in (1 - _EDGE, 1) is handled by
# weighted quadrature in u = 1 - x
_EDGE = 0.5
_N_INTERIOR = 256
_N_PANEL = 48
_N_LEVELS = 36


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BetaEdge:
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise DomainError("BetaEdge requires beta > 0")

    @property
    def z_norm(self) -> float:
        return 2.0 ** (self.beta + 2.0) / ((self.beta + 1.0) * (self.beta + 2.0))


@dataclass(frozen=True)
class PointMass:
    c: float

    def __post_init__(self):
        if not -1.0 < self.c < 1.0:
            raise DomainError("PointMass requires c in (-1, 1)")


class TableDensity:
    """Tabulated density on an interior grid of (-1, 1).

    `beta` declares the edge exponent at x = 1 so condition checks can reason
    about it; the table itself must integrate to 1 (trapezoid, 1e-8).
    """

    def __init__(self, grid: np.ndarray, values: np.ndarray, beta: float):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 8:
            raise DomainError("TableDensity needs matching 1-d grid/values, >= 8 points")
        if grid[0] <= -1.0 or grid[-1] >= 1.0 or np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing inside (-1, 1)")
        if np.any(values < 0):
            raise DomainError("density values must be nonnegative")
        total = float(np.trapezoid(values, grid))
        if abs(total - 1.0) > 1e-8:
            raise DomainError(f"table integrates to {total!r}, not 1 (tol 1e-8)")
        if beta <= 0:
            raise DomainError("declared edge exponent beta must be > 0")
        self.grid = grid
        self.values = values
        self.beta = beta
        cdf = np.concatenate([[0.0], np.cumsum(np.diff(grid) * (values[1:] + values[:-1]) / 2.0)])
        self._cdf = cdf / cdf[-1]

    def __repr__(self):
        return f"TableDensity(n={self.grid.size}, beta={self.beta})"


MixingLaw = Union[BetaEdge, PointMass, TableDensity]


# ---------------------------------------------------------------------------
# Densities and sampling
# ---------------------------------------------------------------------------

def density(m: MixingLaw, x: float) -> float:
    if isinstance(m, PointMass):
        raise DomainError("a point mass has no density")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) >= 1.0):
        raise DomainError("density defined on (-1, 1) only")
    if isinstance(m, BetaEdge):
        out = (1.0 + xa) * (1.0 - xa) ** m.beta / m.z_norm
    else:
        out = np.interp(xa, m.grid, m.values, left=0.0, right=0.0)
    return float(out) if np.isscalar(x) else out


def psi(m: BetaEdge, x) -> float:
    """The smooth factor of the BetaEdge density: phi(x) = psi(x)(1-x)^beta."""
    if not isinstance(m, BetaEdge):
        raise DomainError("psi is defined for the BetaEdge family")
    return (1.0 + np.asarray(x, dtype=float)) / m.z_norm


def psi_one(m: BetaEdge) -> float:
    """psi(1) = (beta+1)(beta+2)/2^{beta+1}, the unit-root density prefactor."""
    if not isinstance(m, BetaEdge):
        raise DomainError("psi_one is defined for the BetaEdge family")
    b = m.beta
    return (b + 1.0) * (b + 2.0) / 2.0 ** (b + 1.0)


def sample(m: MixingLaw, rng: np.random.Generator, size: int | None = None):
    """Draw from the mixing law.  BetaEdge is sampled exactly by rejection:
    u = 1 - a has density proportional to (2-u) u^beta on (0, 2), so draw u
    from the u^beta envelope and accept with probability (2-u)/2."""
    n = 1 if size is None else size
    if isinstance(m, PointMass):
        out = np.full(n, m.c)
    elif isinstance(m, BetaEdge):
        out = np.empty(n)
        filled = 0
        while filled < n:
            todo = n - filled
            mdraw = todo + int(0.3 * todo) + 16
            u = 2.0 * rng.random(mdraw) ** (1.0 / (m.beta + 1.0))
            acc = u[rng.random(mdraw) < (2.0 - u) / 2.0]
            take = min(acc.size, todo)
            out[filled:filled + take] = 1.0 - acc[:take]
            filled += take
    else:
        u = rng.random(n)
        out = np.interp(u, m._cdf, m.grid)
    return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# Endpoint-aware quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Integrand:
    """g(x) for E[g(a)], with declared behavior at the unit root.

    edge_order s means g(x) ~ (1-x)^{-s} as x -> 1; edge_fn(u), when given,
    must equal g(1-u) * u^s and stay bounded as u -> 0 (supplying it avoids
    overflow and cancellation at tiny u).  fn must accept numpy arrays.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    edge_order: float = 0.0
    edge_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def edge_values(self, u: np.ndarray) -> np.ndarray:
        if self.edge_fn is not None:
            return self.edge_fn(u)
        return self.fn(1.0 - u) * u ** self.edge_order


@lru_cache(maxsize=64)
def _gl_nodes(n: int):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=64)
def _jacobi_nodes(n: int, b: float):
    # weight (1-t)^0 (1+t)^b on (-1, 1)
    t, w = special.roots_jacobi(n, 0.0, b)
    return t, w


def _as_integrand(g) -> Integrand:
    return g if isinstance(g, Integrand) else Integrand(fn=g)


def moment_functional(m: MixingLaw, g) -> float | complex:
    """E[g(a)] under the mixing law.

    For BetaEdge the integral is split at x = 1 - 0.5; the edge piece is
    computed in u = 1-x over dyadic panels down to ~1e-11, whose innermost
    panel carries the u^{beta-s} singularity on Gauss-Jacobi nodes.  The
    panel cascade also resolves integrands that decay on a scale much
    shorter than the edge segment (a^t for t in the thousands).
    """
    g = _as_integrand(g)
    if isinstance(m, PointMass):
        val = g.fn(np.array([m.c]))[0]
        return complex(val) if np.iscomplexobj(np.asarray(val)) else float(val)
    if isinstance(m, TableDensity):
        vals = g.fn(m.grid) * m.values
        out = np.trapezoid(vals, m.grid)
        return complex(out) if np.iscomplexobj(vals) else float(out)

    beta = m.beta
    b = beta - g.edge_order
    if b <= -1.0:
        raise DomainError(
            f"E[g(a)] diverges: singularity order {g.edge_order} at the unit root "
            f"exceeds beta + 1 = {beta + 1}"
        )
    zinv = 1.0 / m.z_norm

    # interior: x in (-1, 1 - _EDGE), plain Gauss-Legendre against phi
    t, w = _gl_nodes(_N_INTERIOR)
    lo, hi = -1.0, 1.0 - _EDGE
    x = (hi + lo) / 2.0 + (hi - lo) / 2.0 * t
    total = (hi - lo) / 2.0 * np.sum(w * g.fn(x) * (1.0 + x) * (1.0 - x) ** beta) * zinv

    # edge: integral over u in (0, _EDGE) of f(u) u^b du, f(u) = edge_vals*(2-u)/Z
    hi_u = _EDGE
    for _ in range(_N_LEVELS):
        lo_u = hi_u / 2.0
        t, w = _gl_nodes(_N_PANEL)
        u = (hi_u + lo_u) / 2.0 + (hi_u - lo_u) / 2.0 * t
        vals = g.edge_values(u) * (2.0 - u) * u**b
        total = total + (hi_u - lo_u) / 2.0 * np.sum(w * vals) * zinv
        hi_u = lo_u
    # innermost [0, hi_u] with the Jacobi weight u^b
    t, w = _jacobi_nodes(_N_PANEL, round(b, 12))
    u = hi_u * (1.0 + t) / 2.0
    vals = g.edge_values(u) * (2.0 - u)
    total = total + (hi_u / 2.0) ** (b + 1.0) * np.sum(w * vals) * zinv

    return complex(total) if np.iscomplexobj(np.asarray(total)) else float(total)


# ---------------------------------------------------------------------------
# Built-in functionals of the theory
# ---------------------------------------------------------------------------

def _r_integrand(t: int) -> Integrand:
    # a^t / (1 - a^2): order-1 pole, edge form (1-u)^t / (2-u)
    return Integrand(
        fn=lambda x: x ** t / (1.0 - x * x),
        edge_order=1.0,
        edge_fn=lambda u: (1.0 - u) ** t / (2.0 - u),
    )


def theoretical_r(m: MixingLaw, t: int, sigma_w2: float) -> float:
    """Autocovariance r(t) = sigma_w2 * E[a^t / (1 - a^2)] of the aggregate."""
    if t < 0:
        raise DomainError("lag t must be >= 0")
    return sigma_w2 * moment_functional(m, _r_integrand(int(t)))


def sigma_phi2(m: MixingLaw, sigma_w2: float) -> float:
    """Limiting variance of n^{-1/2} partial sums in the short-memory case.

    Equals sigma_w2 * E[(1-a)^{-2}], which is the long-run variance
    sum_{t in Z} r(t): summing the geometric kernel gives
    E[(1/(1-a^2)) (1 + 2a/(1-a))] = E[(1-a)^{-2}].  Sanity anchor: a == 0
    makes the aggregate an iid sequence with variance sigma_w2, and the
    formula returns exactly sigma_w2.
    """
    if isinstance(m, BetaEdge) and m.beta <= 1.0:
        raise DomainError("E[(1-a)^{-2}] is infinite for beta <= 1")
    g = Integrand(
        fn=lambda x: 1.0 / (1.0 - x) ** 2,
        edge_order=2.0,
        edge_fn=lambda u: np.ones_like(u),
    )
    return sigma_w2 * moment_functional(m, g)


def cum4_theoretical(m: MixingLaw, t: "_levy.LevyTriplet") -> float:
    """Marginal fourth cumulant of the aggregate: pi_4 * E[1/(1-a^4)]."""
    pi4 = _levy.jump_moment_signed(t, 4)
    if pi4 == 0.0:
        return 0.0
    g = Integrand(
        fn=lambda x: 1.0 / (1.0 - x ** 4),
        edge_order=1.0,
        edge_fn=lambda u: 1.0 / ((2.0 - u) * (1.0 + (1.0 - u) ** 2)),
    )
    return pi4 * moment_functional(m, g)


# ---------------------------------------------------------------------------
# Condition checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    moment_ok: bool
    phicond_ok: bool
    q_valid: bool
    q_admissible: tuple[float, float]


def check_conditions(m: MixingLaw, q: float) -> ConditionReport:
    """Report whether E[1/(1-|a|)] < infinity and the weighted-density
    square-integrability int phi^2 (1-x^2)^{-q} dx < infinity hold.

    For BetaEdge the latter holds exactly when -1 < q < 1 + 2*beta.
    """
    if isinstance(m, PointMass):
        return ConditionReport(True, True, q > -1.0, (-1.0, math.inf))
    beta = m.beta
    upper = 1.0 + 2.0 * beta
    q_valid = q > -1.0
    moment_ok = beta > 0.0
    phicond_ok = q_valid and q < upper
    if isinstance(m, TableDensity) and phicond_ok:
        # numeric spot check on the tabulated interior
        w = (1.0 - m.grid ** 2) ** (-q)
        phicond_ok = bool(np.isfinite(np.trapezoid(m.values ** 2 * w, m.grid)))
    return ConditionReport(moment_ok, phicond_ok, q_valid, (-1.0, upper))
