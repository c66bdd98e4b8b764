"""Integral estimates for products of reciprocal powers and for ``exp(-potential)``,
measure discretization, and tail bounds for Gram integrals over C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaincc, gammaln

from .errors import MassTooLarge, NoCoerciveTerm
from .grid import PolarGrid, build_polar_grid, integrate
from .weights import (
    Const,
    LogAtom,
    LogOnePlusSq,
    LogPotential,
    PlanarMeasure,
    RadialPoly,
    WeightExpr,
    log_potential,
)

DEFAULT_LEVELS = 6
KERNEL_FLOOR = 20.0


def section2_bound(R: float, alpha: float) -> float:
    """``28 R^2 / (2 - alpha)``."""
    return 28.0 * R * R / (2.0 - alpha)


@dataclass(frozen=True)
class Truncation:
    """Integration radius ``R_max`` and a bound on the neglected integral beyond it."""

    R_max: float
    tail_estimate: float


def _check_centers(centers):
    alphas = np.array([float(a) for a, _ in centers])
    pts = np.array([complex(z) for _, z in centers])
    if np.any(alphas <= 0):
        raise ValueError("exponents must be positive")
    return alphas, pts


def reciprocal_power_integral(
    centers: Sequence, R: float, grid: Optional[PolarGrid] = None, levels: int = DEFAULT_LEVELS
) -> float:
    """Quadrature of ``int_{|z|<R} prod_i |z - z_i|^(-alpha_i) dlambda``.

    ``centers`` is a sequence of ``(alpha_i, z_i)``. A grid refined at every
    ``z_i`` is built when none is given.
    """
    alphas, pts = _check_centers(centers)
    if alphas.sum() >= 2:
        raise MassTooLarge(f"sum of exponents {alphas.sum()} >= 2")
    if grid is None:
        grid = build_polar_grid(R, 64, 64, list(pts), levels)

    def f(z):
        return np.exp(-np.log(np.abs(z[:, None] - pts[None, :])) @ alphas)

    a, p = _merge(alphas, pts)
    return _subtracted_integral(f, a, p, _regular_factors(a, p), grid)


def convexity_bound_check(centers: Sequence, z: complex):
    """Both sides of ``prod |z-z_i|^-a_i <= sum (a_i/a) |z-z_i|^-a``.

    Returns ``(lhs, rhs)``.
    """
    alphas, pts = _check_centers(centers)
    d = np.abs(complex(z) - pts)
    if np.any(d == 0):
        raise ValueError("z coincides with a center")
    a = alphas.sum()
    lhs = float(np.exp(-np.dot(alphas, np.log(d))))
    rhs = float(np.dot(alphas / a, d ** (-a)))
    return lhs, rhs


def exp_neg_potential_integral(
    mu: PlanarMeasure, R: float, grid: Optional[PolarGrid] = None, levels: int = DEFAULT_LEVELS
) -> float:
    """Quadrature of ``int_{|z|<R} exp(-U_mu(z)) dlambda`` with ``U_mu`` the log potential."""
    if mu.total_mass >= 2:
        raise MassTooLarge(f"measure mass {mu.total_mass} >= 2")
    if grid is None:
        centers = [c for c in mu.atom_centers if abs(c) < R]
        grid = build_polar_grid(R, 64, 64, centers, levels)
    inside = [(a, c) for a, c in mu.atoms if abs(c) < grid.outer_radius]
    if not inside:
        return integrate(lambda z: np.exp(-log_potential(mu, z)), grid)
    a, p = _merge(np.array([m for m, _ in inside]), np.array([c for _, c in inside]))
    rest = PlanarMeasure(tuple(x for x in mu.atoms if abs(x[1]) >= grid.outer_radius),
                         mu.components, mu.support_radius)
    coeffs = _regular_factors(a, p, lambda z: log_potential(rest, z))
    return _subtracted_integral(lambda z: np.exp(-log_potential(mu, z)), a, p, coeffs, grid)


def _merge(alphas, pts):
    """Combine exponents of coincident centers."""
    uniq, inv = np.unique(pts, return_inverse=True)
    return np.bincount(inv, weights=alphas, minlength=uniq.size), uniq


def disc_power_integral(center: complex, alpha: float, R: float, n: int = 4096) -> float:
    """``int_{|z|<R} |z - center|^(-alpha) dlambda`` for ``alpha < 2``, ``|center| < R``.

    In polar coordinates about ``center`` this is
    ``int rho(theta)^(2-alpha) / (2-alpha) dtheta`` with ``rho`` the distance to
    the circle, a smooth periodic integrand, so the trapezoid rule converges
    geometrically.
    """
    a = abs(complex(center))
    th = 2 * np.pi * np.arange(n) / n
    rho = -a * np.cos(th) + np.sqrt(R * R - (a * np.sin(th)) ** 2)
    return float(2 * np.pi / n * np.sum(rho ** (2 - alpha)) / (2 - alpha))


def _regular_factors(alphas, pts, continuous=None):
    """``prod_{j != i} |z_i - z_j|^(-alpha_j) exp(-continuous(z_i))`` for each center."""
    d = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(d, 1.0)
    log_c = -np.log(d) @ alphas
    if continuous is not None:
        log_c = log_c - continuous(pts)
    return np.exp(log_c)


def _subtracted_integral(f, alphas, pts, coeffs, grid: PolarGrid) -> float:
    """``int f`` where ``f ~ c_i |z - z_i|^(-alpha_i)`` near each ``z_i``.

    The leading singular terms are integrated exactly; the grid only sees the
    remainder, which is ``O(|z - z_i|^(1 - alpha_i))``.
    """

    def remainder(z):
        sing = np.abs(z[:, None] - pts[None, :]) ** (-alphas[None, :])
        return f(z) - sing @ coeffs

    exact = sum(c * disc_power_integral(p, a, grid.outer_radius) for a, p, c in zip(alphas, pts, coeffs))
    return integrate(remainder, grid) + float(exact)


# ---------------------------------------------------------------------------
# discretization


def _partition_shape(N: int):
    n_r = 1
    for d in range(1, int(math.isqrt(N)) + 1):
        if N % d == 0 and 4 * d * d <= N:
            n_r = d
    return n_r, N // n_r


def partition_cells(radius: float, N: int) -> np.ndarray:
    """``N`` equal-area polar cells ``(r0, r1, t0, t1)`` covering ``|z| < radius``."""
    n_r, n_theta = _partition_shape(N)
    rr = radius * np.sqrt(np.arange(n_r + 1) / n_r)
    tt = np.linspace(0.0, 2 * np.pi, n_theta + 1)
    r0, t0 = np.meshgrid(rr[:-1], tt[:-1], indexing="ij")
    r1, t1 = np.meshgrid(rr[1:], tt[1:], indexing="ij")
    return np.column_stack([r0.ravel(), r1.ravel(), t0.ravel(), t1.ravel()])


def partition_points(cells: np.ndarray) -> np.ndarray:
    r0, r1, t0, t1 = cells.T
    return np.sqrt(0.5 * (r0**2 + r1**2)) * np.exp(0.5j * (t0 + t1))


def discretize_measure(mu: PlanarMeasure, N: int, kernel_floor: float = KERNEL_FLOOR):
    """Replace ``mu`` by ``N`` point masses on a regular partition of its support.

    Cell ``K_i`` gets the mass ``mu(K_i)`` placed at its area-centroid point.

    Returns
    -------
    PlanarMeasure
        Purely atomic; total mass equals that of ``mu``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    cells = partition_cells(mu.support_radius, N)
    pts = partition_points(cells)
    r0, r1, t0, t1 = cells.T
    masses = np.zeros(len(cells))
    for comp in mu.components:
        masses += comp.mass_in_cell(r0, r1, t0, t1)
    for a, c in mu.atoms:
        r, t = abs(c), np.mod(np.angle(c), 2 * np.pi)
        hit = np.flatnonzero((r >= r0) & (r < r1) & (t >= t0) & (t < t1))
        masses[hit[0] if hit.size else np.argmin(np.abs(pts - c))] += a
    # exact conservation: push the rounding residue into the largest cell
    total = mu.total_mass
    masses[np.argmax(masses)] += total - masses.sum()
    atoms = tuple((float(m), complex(p)) for m, p in zip(masses, pts) if m > 0)
    return PlanarMeasure(atoms, (), mu.support_radius)


def truncated_potential(mu: PlanarMeasure, z, kernel_floor: float = KERNEL_FLOOR):
    """``int max(log|z - zeta|, -n) dmu`` for an atomic ``mu``."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape)
    for a, c in mu.atoms:
        with np.errstate(divide="ignore"):
            out += a * np.maximum(np.log(np.abs(z - c)), -kernel_floor)
    return out


def discretization_gap(mu: PlanarMeasure, sigma: PlanarMeasure, samples, kernel_floor: float = KERNEL_FLOOR):
    """Sup over ``samples`` of ``|U^n_sigma - U^n_mu|`` (truncated potentials).

    ``mu`` must be free of atoms; its continuous part is evaluated in closed
    form. Truncation at ``-n`` changes a bounded density's potential by less
    than ``sup(rho) * pi * exp(-2n) * (n + 1/2)``, below double precision for
    ``n = 20``, so the untruncated closed form stands in for it.
    """
    if mu.atoms:
        raise ValueError("reference measure must have no atoms")
    ref = log_potential(mu, samples)
    disc = truncated_potential(sigma, samples, kernel_floor)
    return float(np.max(np.abs(disc - ref)))


# ---------------------------------------------------------------------------
# tails


def tail_bound(w: WeightExpr, degree: int, R_max: float) -> Truncation:
    """Rigorous bound on ``int_{|z|>R_max} |z|^(2 degree) exp(-phi) dlambda``.

    The fastest-growing RadialPoly ``c |z|^(2p)`` gives the closed form; every
    other term is bounded below on ``|z| >= R_max`` by a multiple of
    ``log|z|`` plus a constant.
    """
    lead = w.coercive_term()
    if lead is None:
        raise NoCoerciveTerm("weight has no RadialPoly term with positive coefficient")
    if R_max <= 0:
        raise ValueError("R_max must be positive")
    c, p = lead.coeff, lead.power
    log_mass = 0.0  # phi_rest >= log_mass * log|z| + shift on |z| >= R_max
    shift = 0.0
    skipped = False
    for t in w.terms:
        if t is lead and not skipped:
            skipped = True
        elif isinstance(t, RadialPoly):
            pass
        elif isinstance(t, Const):
            shift += t.value
        elif isinstance(t, LogOnePlusSq):
            log_mass += t.coeff
        elif isinstance(t, LogAtom):
            if abs(t.center) >= R_max:
                return Truncation(R_max, math.inf)
            log_mass += t.mass
            shift += t.mass * math.log1p(-abs(t.center) / R_max)
        elif isinstance(t, LogPotential):
            m = t.measure.total_mass
            rho = t.measure.support_radius
            if t.sign > 0:
                if rho >= R_max:
                    return Truncation(R_max, math.inf)
                log_mass += m
                shift += m * math.log1p(-rho / R_max)
            else:
                # -int log|z-zeta| >= -m log(|z| + rho) >= -m log|z| - m log(1 + rho/R_max)
                log_mass -= m
                shift -= m * math.log1p(rho / R_max)
    s = 2.0 * degree - log_mass + 1.0  # integrand r^s exp(-c r^{2p}) * 2 pi dr
    if s + 1.0 <= 0:
        if R_max < 1:
            return Truncation(R_max, math.inf)
        s = 0.0
    a = (s + 1.0) / (2.0 * p)
    x = c * R_max ** (2 * p)
    q = gammaincc(a, x)
    if q > 0:
        log_tail = math.log(q) + gammaln(a)
    else:
        # asymptotic Gamma(a, x) <= x^(a-1) e^-x / (1 - (a-1)/x) for x > 2(a-1)
        if x <= 2 * max(a - 1, 0):
            return Truncation(R_max, math.inf)
        log_tail = (a - 1) * math.log(x) - x + math.log(2.0)
    log_tail += math.log(2 * math.pi / (2 * p)) - a * math.log(c) - shift
    return Truncation(float(R_max), float(math.exp(log_tail)) if log_tail > -745 else 0.0)
