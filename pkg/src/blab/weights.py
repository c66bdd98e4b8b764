"""Closed-form subharmonic weights on C, their Riesz measures and potentials.

A weight is a sum of terms, each subharmonic and given in closed form, so the
sum equals its own upper regularization. Measures are finite sums of point
masses plus continuous components (radial closed-form densities, uniform
circle measures, or densities sampled on a polar grid).

All arrays of points are complex; evaluation is vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np

from .errors import InsufficientResolution, NonIntegrableWeight, NotMonotone
from .grid import build_polar_grid


def _as_points(z):
    return np.asarray(z, dtype=complex)


def _log_abs(x):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x))


def _scalar_or_array(out, z):
    return float(out) if np.ndim(z) == 0 else out


# ---------------------------------------------------------------------------
# measure components


@dataclass(frozen=True)
class RadialPowerDensity:
    """Density ``coeff * |zeta|**exponent`` on the disc ``|zeta| < radius``."""

    coeff: float
    exponent: float
    radius: float

    def __post_init__(self):
        if self.coeff < 0 or self.exponent <= -2 or self.radius < 0:
            raise ValueError(f"invalid radial power density {self}")

    def mass_within(self, r):
        e = self.exponent + 2.0
        r = np.minimum(np.asarray(r, dtype=float), self.radius)
        return 2 * np.pi * self.coeff * r**e / e

    @property
    def mass(self) -> float:
        return float(self.mass_within(self.radius))

    def potential(self, z):
        # P(r) = m(r) log r + int_r^R log s dm(s), m = mass inside r
        e = self.exponent + 2.0
        R = self.radius
        if self.coeff == 0 or R == 0:
            return np.zeros(np.shape(z))
        r = np.abs(_as_points(z))
        rc = np.minimum(r, R)

        def F(s):
            with np.errstate(divide="ignore", invalid="ignore"):
                v = s**e * (np.log(s) / e - 1.0 / e**2)
            return np.where(s > 0, v, 0.0)

        with np.errstate(divide="ignore", invalid="ignore"):
            mlog = np.where(r > 0, self.mass_within(rc) * np.log(np.where(r > 0, r, 1.0)), 0.0)
        return mlog + 2 * np.pi * self.coeff * (F(R) - F(rc))

    def density(self, z):
        r = np.abs(_as_points(z))
        with np.errstate(divide="ignore"):
            v = self.coeff * r**self.exponent
        return np.where(r < self.radius, v, 0.0)

    def restrict(self, R):
        return replace(self, radius=min(self.radius, R))

    def scaled(self, f):
        return replace(self, coeff=self.coeff * f)

    def mass_in_cell(self, r0, r1, t0, t1):
        return (self.mass_within(r1) - self.mass_within(r0)) * (t1 - t0) / (2 * np.pi)

    @property
    def is_radial(self):
        return True


@dataclass(frozen=True)
class InverseSquareDensity:
    """Density ``coeff * (1 + |zeta|**2)**-2`` on the disc ``|zeta| < radius``."""

    coeff: float
    radius: float

    def mass_within(self, r):
        r = np.minimum(np.asarray(r, dtype=float), self.radius)
        return np.pi * self.coeff * r**2 / (1 + r**2)

    @property
    def mass(self) -> float:
        return float(self.mass_within(self.radius))

    def potential(self, z):
        R = self.radius
        if self.coeff == 0 or R == 0:
            return np.zeros(np.shape(z))
        r = np.abs(_as_points(z))
        rc = np.minimum(r, R)

        def F(s):
            # antiderivative in u = s^2 of (pi k / 2) log(u) / (1+u)^2, F(0) = 0
            u = s**2
            with np.errstate(divide="ignore", invalid="ignore"):
                v = 0.5 * np.pi * self.coeff * (np.log(u) * (1 - 1 / (1 + u)) - np.log1p(u))
            return np.where(s > 0, v, 0.0)

        with np.errstate(divide="ignore", invalid="ignore"):
            mlog = np.where(r > 0, self.mass_within(rc) * np.log(np.where(r > 0, r, 1.0)), 0.0)
        return mlog + F(R) - F(rc)

    def density(self, z):
        r = np.abs(_as_points(z))
        return np.where(r < self.radius, self.coeff / (1 + r**2) ** 2, 0.0)

    def restrict(self, R):
        return replace(self, radius=min(self.radius, R))

    def scaled(self, f):
        return replace(self, coeff=self.coeff * f)

    def mass_in_cell(self, r0, r1, t0, t1):
        return (self.mass_within(r1) - self.mass_within(r0)) * (t1 - t0) / (2 * np.pi)

    @property
    def is_radial(self):
        return True


@dataclass(frozen=True)
class CircleMeasure:
    """Mass ``mass`` spread uniformly on the circle ``|zeta| = rho``."""

    mass: float
    rho: float

    @property
    def radius(self):
        return self.rho

    def potential(self, z):
        r = np.abs(_as_points(z))
        return self.mass * np.log(np.maximum(r, self.rho))

    def restrict(self, R):
        return self if self.rho < R else replace(self, mass=0.0)

    def scaled(self, f):
        return replace(self, mass=self.mass * f)

    def mass_in_cell(self, r0, r1, t0, t1):
        inside = (r0 <= self.rho) & (self.rho < r1)
        return np.where(inside, self.mass * (t1 - t0) / (2 * np.pi), 0.0)

    @property
    def is_radial(self):
        return True


@dataclass(frozen=True, eq=False)
class GridDensity:
    """A nonnegative density sampled at the nodes of a midpoint polar grid.

    ``values[i]`` is the density at ``nodes[i]``; ``weights[i]`` the cell area.
    The measure acts as the point masses ``values * weights`` at the nodes.
    """

    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    radius: float
    n_r: int
    n_theta: int

    @classmethod
    def from_function(cls, f: Callable, radius: float, n_r: int = 64, n_theta: int = 64):
        grid = build_polar_grid(radius, n_r, n_theta, order=1)
        values = np.asarray(f(grid.nodes), dtype=float)
        if np.any(values < 0):
            raise ValueError("density must be nonnegative")
        return cls(grid.nodes, grid.weights, values, float(radius), n_r, n_theta)

    @classmethod
    def from_values(cls, values, radius: float, n_r: int, n_theta: int):
        grid = build_polar_grid(radius, n_r, n_theta, order=1)
        values = np.asarray(values, dtype=float)
        if values.shape != grid.nodes.shape:
            raise ValueError(f"expected {grid.nodes.size} density values, got {values.size}")
        if np.any(values < 0):
            raise ValueError("density must be nonnegative")
        return cls(grid.nodes, grid.weights, values, float(radius), n_r, n_theta)

    @property
    def masses(self):
        return self.values * self.weights

    @property
    def mass(self) -> float:
        return float(np.sum(self.masses))

    def potential(self, z):
        z = _as_points(z)
        out = np.zeros(z.shape)
        m = self.masses
        for lo in range(0, m.size, 2048):
            d = z[..., None] - self.nodes[lo:lo + 2048]
            out += _log_abs(d) @ m[lo:lo + 2048]
        return out

    def restrict(self, R):
        if R >= self.radius:
            return self
        keep = np.abs(self.nodes) < R
        return replace(self, values=np.where(keep, self.values, 0.0))

    def scaled(self, f):
        return replace(self, values=self.values * f)

    def mass_in_cell(self, r0, r1, t0, t1):
        r = np.abs(self.nodes)
        t = np.mod(np.angle(self.nodes), 2 * np.pi)
        out = np.zeros(np.shape(r0))
        for i in range(out.size):
            sel = (r >= r0[i]) & (r < r1[i]) & (t >= t0[i]) & (t < t1[i])
            out[i] = np.sum(self.masses[sel])
        return out

    @property
    def is_radial(self):
        return False


Component = Union[RadialPowerDensity, InverseSquareDensity, CircleMeasure, GridDensity]


@dataclass(frozen=True, eq=False)
class PlanarMeasure:
    """Nonnegative measure on a disc: point masses plus continuous components.

    Attributes
    ----------
    atoms : tuple of (mass, center)
    components : tuple
        Continuous parts (radial densities, circle measures, grid densities).
    support_radius : float
    """

    atoms: tuple = ()
    components: tuple = ()
    support_radius: float = 1.0

    def __post_init__(self):
        atoms = tuple((float(a), complex(c)) for a, c in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "components", tuple(self.components))
        for a, c in atoms:
            if a <= 0:
                raise ValueError(f"atom mass must be positive, got {a}")
            if abs(c) >= self.support_radius:
                raise ValueError(f"atom at {c} outside support radius {self.support_radius}")
        for comp in self.components:
            if comp.radius > self.support_radius * (1 + 1e-12):
                raise ValueError("component extends beyond support radius")

    @property
    def atom_mass(self) -> float:
        return float(sum(a for a, _ in self.atoms))

    @property
    def total_mass(self) -> float:
        return self.atom_mass + float(sum(c.mass for c in self.components))

    @property
    def is_radial(self) -> bool:
        return all(c == 0 for _, c in self.atoms) and all(c.is_radial for c in self.components)

    @property
    def atom_centers(self) -> tuple:
        return tuple(c for _, c in self.atoms)

    def restrict(self, R: float) -> "PlanarMeasure":
        """Restriction to the open disc of radius ``R``."""
        atoms = tuple((a, c) for a, c in self.atoms if abs(c) < R)
        comps = tuple(c.restrict(R) for c in self.components)
        return PlanarMeasure(atoms, comps, min(self.support_radius, R))

    def scaled(self, f: float) -> "PlanarMeasure":
        if f <= 0:
            return PlanarMeasure((), (), self.support_radius)
        atoms = tuple((a * f, c) for a, c in self.atoms)
        return PlanarMeasure(atoms, tuple(c.scaled(f) for c in self.components), self.support_radius)

    def __add__(self, other: "PlanarMeasure") -> "PlanarMeasure":
        return PlanarMeasure(
            self.atoms + other.atoms,
            self.components + other.components,
            max(self.support_radius, other.support_radius),
        )

    def potential(self, z):
        return log_potential(self, z)


def circle_measure(mass: float, rho: float, support_radius: Optional[float] = None) -> PlanarMeasure:
    """Uniform measure of total ``mass`` on the circle ``|zeta| = rho``."""
    return PlanarMeasure((), (CircleMeasure(mass, rho),), support_radius or 2 * rho)


def uniform_disc_measure(mass: float, radius: float) -> PlanarMeasure:
    """Uniform area density of total ``mass`` on ``|zeta| < radius``."""
    dens = RadialPowerDensity(mass / (np.pi * radius**2), 0.0, radius)
    return PlanarMeasure((), (dens,), radius)


def log_potential(mu: PlanarMeasure, z):
    """Logarithmic potential ``sum a_i log|z - z_i| + int log|z - zeta| dmu_c``.

    Equals -inf exactly at atom centers.
    """
    zz = _as_points(z)
    out = np.zeros(zz.shape)
    for a, c in mu.atoms:
        out = out + a * _log_abs(zz - c)
    for comp in mu.components:
        out = out + comp.potential(zz)
    return _scalar_or_array(out, z)


# ---------------------------------------------------------------------------
# weight terms


@dataclass(frozen=True)
class RadialPoly:
    """``coeff * |z|**(2 * power)``."""

    coeff: float
    power: int = 1

    def __post_init__(self):
        if self.coeff < 0 or self.power < 1:
            raise ValueError(f"RadialPoly needs coeff >= 0 and power >= 1, got {self}")

    def __call__(self, z):
        return self.coeff * np.abs(z) ** (2 * self.power)

    def scaled(self, f):
        return replace(self, coeff=self.coeff * f)

    def riesz(self, R):
        # (1/2pi) Lap(c r^{2p}) = (2 c p^2 / pi) r^{2p-2}
        if self.coeff == 0:
            return PlanarMeasure((), (), R)
        dens = RadialPowerDensity(2 * self.coeff * self.power**2 / np.pi, 2.0 * self.power - 2, R)
        return PlanarMeasure((), (dens,), R)

    is_radial = True
    singular_centers = ()


@dataclass(frozen=True)
class LogAtom:
    """``mass * log|z - center|``."""

    mass: float
    center: complex = 0j

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError(f"LogAtom mass must be positive, got {self.mass}")
        object.__setattr__(self, "center", complex(self.center))

    def __call__(self, z):
        return self.mass * _log_abs(z - self.center)

    def scaled(self, f):
        return replace(self, mass=self.mass * f)

    def riesz(self, R):
        if abs(self.center) < R:
            return PlanarMeasure(((self.mass, self.center),), (), R)
        return PlanarMeasure((), (), R)

    @property
    def is_radial(self):
        return self.center == 0

    @property
    def singular_centers(self):
        return (self.center,)


@dataclass(frozen=True, eq=False)
class LogPotential:
    """``sign * int_{|zeta| < radius} log|z - zeta| dmu(zeta)``.

    ``sign = -1`` only occurs inside Riesz-split remainders, where it cancels
    part of another term; the full remainder is still subharmonic.
    """

    measure: PlanarMeasure
    radius: float
    sign: float = 1.0

    def __call__(self, z):
        return self.sign * log_potential(self.measure, z)

    def scaled(self, f):
        return replace(self, measure=self.measure.scaled(f))

    def riesz(self, R):
        if self.sign < 0:
            raise ValueError("Riesz measure of a signed (remainder) potential is not supported")
        return self.measure.restrict(R)

    @property
    def is_radial(self):
        return self.measure.is_radial

    @property
    def singular_centers(self):
        return self.measure.atom_centers if self.sign > 0 else ()


@dataclass(frozen=True)
class Const:
    """Constant ``value``."""

    value: float

    def __call__(self, z):
        return np.full(np.shape(z), float(self.value))

    def scaled(self, f):
        return replace(self, value=self.value * f)

    def riesz(self, R):
        return PlanarMeasure((), (), R)

    is_radial = True
    singular_centers = ()


@dataclass(frozen=True)
class LogOnePlusSq:
    """``(coeff / 2) * log(1 + |z|**2)``."""

    coeff: float

    def __post_init__(self):
        if self.coeff < 0:
            raise ValueError(f"LogOnePlusSq coeff must be >= 0, got {self.coeff}")

    def __call__(self, z):
        return 0.5 * self.coeff * np.log1p(np.abs(z) ** 2)

    def scaled(self, f):
        return replace(self, coeff=self.coeff * f)

    def riesz(self, R):
        if self.coeff == 0:
            return PlanarMeasure((), (), R)
        return PlanarMeasure((), (InverseSquareDensity(self.coeff / np.pi, R),), R)

    is_radial = True
    singular_centers = ()


WeightTerm = Union[RadialPoly, LogAtom, LogPotential, Const, LogOnePlusSq]


@dataclass(frozen=True, eq=False)
class WeightExpr:
    """A weight ``phi`` given as a sum of closed-form terms."""

    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, z):
        zz = _as_points(z)
        out = np.zeros(zz.shape)
        for t in self.terms:
            out = out + t(zz)
        return _scalar_or_array(out, z)

    def __add__(self, other):
        if isinstance(other, WeightExpr):
            return WeightExpr(self.terms + other.terms)
        return WeightExpr(self.terms + (other,))

    def scaled(self, f: float) -> "WeightExpr":
        """Return ``f * phi``; terms with a vanishing coefficient are dropped."""
        if f == 0:
            return WeightExpr(())
        return WeightExpr(tuple(t.scaled(f) for t in self.terms))

    def shifted(self, c: float) -> "WeightExpr":
        return WeightExpr(self.terms + (Const(c),))

    @property
    def is_radial(self) -> bool:
        return all(t.is_radial for t in self.terms)

    @property
    def is_constant(self) -> bool:
        """True when every term is a Const or a RadialPoly with zero coefficient."""
        return all(
            isinstance(t, Const) or (isinstance(t, RadialPoly) and t.coeff == 0) for t in self.terms
        )

    @property
    def singular_centers(self) -> tuple:
        out = []
        for t in self.terms:
            out.extend(t.singular_centers)
        return tuple(dict.fromkeys(out))

    @property
    def pole_masses(self) -> dict:
        """Total mass of ``log|z - c|`` singularities per center ``c``."""
        out = {}
        for t in self.terms:
            if isinstance(t, LogAtom):
                out[t.center] = out.get(t.center, 0.0) + t.mass
            elif isinstance(t, LogPotential) and t.sign > 0:
                for a, c in t.measure.atoms:
                    out[c] = out.get(c, 0.0) + a
        return out

    def coercive_term(self) -> Optional[RadialPoly]:
        """The fastest-growing RadialPoly term with positive coefficient."""
        polys = [t for t in self.terms if isinstance(t, RadialPoly) and t.coeff > 0]
        if not polys:
            return None
        return max(polys, key=lambda t: (t.power, t.coeff))


def fock(m: float = 1.0) -> WeightExpr:
    """The weight ``m |z|^2``."""
    return WeightExpr((RadialPoly(m, 1),))


def check_integrable(w: WeightExpr) -> None:
    """Raise unless ``exp(-w)`` is locally integrable.

    A pole ``a log|z - c|`` makes ``exp(-w)`` behave like ``|z - c|^(-a)``,
    integrable near ``c`` only for ``a < 2``.
    """
    for c, a in w.pole_masses.items():
        if a >= 2:
            raise NonIntegrableWeight(f"log pole of mass {a} >= 2 at {c}: exp(-phi) is not integrable")


def eval_weight(w: WeightExpr, z):
    """Evaluate ``phi(z)``; ``-inf`` exactly at LogAtom centers."""
    return w(z)


# ---------------------------------------------------------------------------
# Riesz measure and decomposition


def riesz_measure(w: WeightExpr, R: float, min_resolution: Optional[int] = None) -> PlanarMeasure:
    """Riesz measure ``(1/2pi) Lap(phi)`` restricted to the disc ``|z| < R``.

    Parameters
    ----------
    w : WeightExpr
    R : float
    min_resolution : int, optional
        Minimal ``n_r`` and ``n_theta`` required of grid-sampled densities
        carried by LogPotential terms.

    Raises
    ------
    InsufficientResolution
        If a grid density is coarser than ``min_resolution``.
    """
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    mu = PlanarMeasure((), (), R)
    for t in w.terms:
        if isinstance(t, LogPotential) and min_resolution is not None:
            for comp in t.measure.components:
                if isinstance(comp, GridDensity) and min(comp.n_r, comp.n_theta) < min_resolution:
                    raise InsufficientResolution(
                        f"density grid {comp.n_r}x{comp.n_theta} coarser than {min_resolution}"
                    )
        part = t.riesz(R)
        mu = PlanarMeasure(mu.atoms + part.atoms, mu.components + part.components, R)
    return mu


@dataclass(frozen=True, eq=False)
class RieszSplit:
    """``phi = potential_part + remainder`` on the disc of radius ``disc_radius``."""

    potential_part: LogPotential
    remainder: WeightExpr
    disc_radius: float

    @property
    def measure(self) -> PlanarMeasure:
        return self.potential_part.measure

    def __call__(self, z):
        return self.potential_part(z) + self.remainder(z)


def riesz_split(w: WeightExpr, R: float, min_resolution: Optional[int] = None) -> RieszSplit:
    """Split ``w`` into the log potential of its Riesz measure on ``|z| < R``
    and a remainder which is harmonic on that disc.

    Atoms and potentials supported inside the disc cancel symbolically; other
    terms keep their closed form and the remainder subtracts their restricted
    potential.
    """
    mu = riesz_measure(w, R, min_resolution)
    kept = []
    subtract = PlanarMeasure((), (), R)
    for t in w.terms:
        if isinstance(t, LogAtom) and abs(t.center) < R:
            continue
        if isinstance(t, LogPotential) and t.sign > 0 and t.measure.support_radius <= R:
            continue
        kept.append(t)
        if isinstance(t, (LogAtom, Const)):
            continue
        part = t.riesz(R)
        if part.atoms or part.components:
            subtract = subtract + part
    if subtract.atoms or subtract.components:
        kept.append(LogPotential(subtract, R, sign=-1.0))
    return RieszSplit(LogPotential(mu, R), WeightExpr(tuple(kept)), R)


# ---------------------------------------------------------------------------
# weight comparison constants


def upper_bound_constant(R: float) -> float:
    """``log 2 + log(1 + R^2) / 2``: ``log|z - zeta| <= log(1+|z|^2)/2 + M_R`` for ``|zeta| < R``."""
    return math.log(2.0) + 0.5 * math.log1p(R * R)


def lower_bound_constant(R: float, eps: float) -> float:
    """Constant ``C`` with ``log|z - zeta| >= log(1+|z|^2)/2 - C``
    whenever ``|z| >= R + eps/2`` and ``|zeta| < R``.
    """
    if R <= 0 or eps <= 0:
        raise ValueError("R and eps must be positive")
    return 0.5 * math.log(1.0 / R**2 + 1.0) - math.log(1.0 - 2 * R / (2 * R + eps))


def condition_b_probe(w: WeightExpr, R_max: float, factor: float = 1.25, n_steps: int = 64):
    """Search radii ``R < R + c <= R_max`` with Riesz mass ``alpha > 0`` on
    ``|z| < R`` and ``beta < 2`` on ``|z| < R + c``.

    Outer radii scan ``R_max / factor**k``; the inner radius is half the outer
    one. Returns ``(R, c, alpha, beta)`` for the first hit, else ``None``.
    """
    if R_max <= 0:
        raise ValueError("R_max must be positive")
    for k in range(n_steps):
        outer = R_max / factor**k
        R = 0.5 * outer
        beta = riesz_measure(w, outer).total_mass
        if beta >= 2:
            continue
        alpha = riesz_measure(w, R).total_mass
        if alpha > 0:
            return (R, outer - R, alpha, beta)
    return None


def companion_weight(w: WeightExpr, R: float) -> WeightExpr:
    """``psi = (alpha/2) log(1+|z|^2) + remainder`` where ``alpha`` is the Riesz
    mass of ``w`` on ``|z| < R``."""
    split = riesz_split(w, R)
    alpha = split.measure.total_mass
    head = (LogOnePlusSq(alpha),) if alpha > 0 else ()
    return WeightExpr(head + split.remainder.terms)


# ---------------------------------------------------------------------------
# sequences


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """An increasing sequence ``phi_1 <= phi_2 <= ... <= phi``.

    Monotonicity is checked on a seeded random sample at construction.
    """

    generator: Callable[[int], WeightExpr]
    limit: WeightExpr
    description: str = ""
    check_points: int = 256
    check_j: int = 16
    seed: int = 0

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        r = 4.0 * np.sqrt(rng.random(self.check_points))
        z = r * np.exp(2j * np.pi * rng.random(self.check_points))
        lim = self.limit(z)
        prev = None
        for j in range(1, self.check_j + 1):
            cur = self(j)(z)
            if prev is not None and np.any(prev > cur + 1e-12 * (1 + np.abs(cur))):
                raise NotMonotone(f"phi_{j - 1} > phi_{j} at a sample point")
            if np.any(cur > lim + 1e-12 * (1 + np.abs(lim))):
                raise NotMonotone(f"phi_{j} exceeds the limit at a sample point")
            prev = cur

    def __call__(self, j: int) -> WeightExpr:
        return self.generator(j)

    @classmethod
    def scaled(cls, limit: WeightExpr, **kw):
        """``phi_j = (1 - 1/j) phi`` (needs ``phi >= 0``)."""
        return cls(lambda j: limit.scaled(1.0 - 1.0 / j), limit, "scaled", **kw)

    @classmethod
    def shifted(cls, limit: WeightExpr, **kw):
        """``phi_j = phi - 1/j``."""
        return cls(lambda j: limit.shifted(-1.0 / j), limit, "shifted", **kw)

    @classmethod
    def constant(cls, limit: WeightExpr, **kw):
        return cls(lambda j: limit, limit, "constant", **kw)
