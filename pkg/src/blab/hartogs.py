"""Bergman kernels of Hartogs domains ``{(z, t) : |t| < exp(-phi(z))}``.

Two routes are provided:

* :func:`ligocka_partial` sums ``2(k+1) K_{2(k+1)phi}(z, w) (t conj(s))^k``
  over one-variable weighted kernels;
* :func:`hartogs_direct_kernel` works directly in two variables for radial
  weights, where the monomials ``z^a t^b`` are orthogonal on the domain and
  their norms reduce to one-dimensional radial integrals.

Normalization: the series above is the reproducing kernel for the measure
``dlambda(z) x dlambda(t) / (2 pi)``. The direct route uses the same fiber
measure by default; pass ``fiber_measure="lebesgue"`` for the kernel with
respect to plain Lebesgue measure, which is smaller by the factor ``2 pi``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .bergman import build_kernel, kernel_eval
from .errors import NonRadialWeight, PointOutsideDomain, RadiusOrderViolated
from .weights import WeightExpr, WeightSequence, check_integrable

K_MAX = 24
TAIL_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class HartogsDomain:
    weight: WeightExpr
    description: str = ""

    def fiber_radius(self, z):
        return np.exp(-np.asarray(self.weight(z)))

    def contains(self, z, t) -> bool:
        return bool(np.all(np.abs(t) < self.fiber_radius(z)))


@dataclass(frozen=True, eq=False)
class LigockaSeries:
    """Kernel models for the weights ``2(k+1) phi``, ``k = 0..k_max``.

    ``polydisc = (center, r1, r2)`` is the bidisc ``|z - center| < r1, |t| < r2``
    used for the Cauchy tail estimate.
    """

    weight: WeightExpr
    k_max: int
    degree: int
    per_k_models: tuple
    polydisc: tuple = (0j, 0.5, 0.5)

    @property
    def domain(self) -> HartogsDomain:
        return HartogsDomain(self.weight)

    @property
    def tail_bound_params(self):
        return self.polydisc[1], self.polydisc[2]


def build_ligocka_series(
    weight: WeightExpr,
    k_max: int = K_MAX,
    degree: int = 12,
    polydisc: tuple = (0j, 0.5, 0.5),
    workers: int = 1,
) -> LigockaSeries:
    weights = [weight.scaled(2.0 * (k + 1)) for k in range(k_max + 1)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            models = list(pool.map(lambda w: build_kernel(w, degree), weights))
    else:
        models = [build_kernel(w, degree) for w in weights]
    return LigockaSeries(weight, k_max, degree, tuple(models), tuple(polydisc))


def _series_terms(series: LigockaSeries, z, w):
    """``c_k(z, w) = 2(k+1) K_{2(k+1)phi}(z, w)``, shape ``(k_max+1,) + z.shape``."""
    return np.array([2.0 * (k + 1) * np.asarray(kernel_eval(m, z, w))
                     for k, m in enumerate(series.per_k_models)])


def ligocka_partial(series: LigockaSeries, z, t, w, s, check: bool = True):
    """``sum_{k<=k_max} 2(k+1) K_{2(k+1)phi}(z, w) (t conj(s))^k``.

    Raises
    ------
    PointOutsideDomain
        If ``(z, t)`` or ``(w, s)`` is outside the domain (when ``check``).
    """
    if check:
        dom = series.domain
        if not dom.contains(z, t) or not dom.contains(w, s):
            raise PointOutsideDomain("probe point outside the Hartogs domain")
    c = _series_terms(series, z, w)
    u = np.asarray(t, dtype=complex) * np.conj(s)
    powers = u[None, ...] ** np.arange(series.k_max + 1).reshape((-1,) + (1,) * np.ndim(u))
    out = np.sum(c * powers, axis=0)
    return complex(out) if np.ndim(out) == 0 else out


def sample_sup(series: LigockaSeries, n_angles: int = 8) -> float:
    """``max |K_Omega|`` over the distinguished boundary of the closed bidisc ``P x P``.

    By the maximum principle the sup over the closed bidisc is attained there,
    but sampling only gives a lower estimate of it.
    """
    z0, r1, r2 = series.polydisc
    th = 2 * np.pi * np.arange(n_angles) / n_angles
    zs = z0 + r1 * np.exp(1j * th)
    Z, W = np.meshgrid(zs, zs, indexing="ij")
    c = _series_terms(series, Z.ravel(), W.ravel())  # (k, pairs)
    phases = np.exp(1j * 2 * np.pi * np.arange(2 * n_angles) / (2 * n_angles))
    u = (r2**2) * phases
    powers = u[None, :] ** np.arange(series.k_max + 1)[:, None]  # (k, phases)
    vals = np.abs(c.T @ powers)
    return float(vals.max())


@dataclass(frozen=True)
class TailEstimate:
    """Bound on ``sum_{k >= k_from} |2(k+1) K_{2(k+1)phi}(z,w) (t conj(s))^k|``."""

    value: float
    ratio: float
    M: float
    k_from: int
    heuristic_M: bool = True

    @property
    def negligible(self) -> bool:
        return self.value < 1e-16 * self.M

    @property
    def diverging(self) -> bool:
        return self.ratio > 0.99


def ligocka_tail(series: LigockaSeries, r1_prime: float, r2_prime: float, k_from: int,
                 M: Optional[float] = None) -> TailEstimate:
    """Cauchy-estimate tail bound on ``|z - center| <= r1', |t|, |s| <= r2'``.

    With ``M = sup |K_Omega|`` on the closed bidisc of radii ``(r1, r2)``,
    the ``k``-th coefficient is at most ``M / r2^(2k)``, giving the bound
    ``M sum_{k >= k_from} 2(k+1) q^k`` with ``q = (r2'/r2)^2``.
    """
    _, r1, r2 = series.polydisc
    if not (0 < r1_prime <= r1 and 0 < r2_prime < r2):
        raise RadiusOrderViolated(f"need 0 < r1' <= {r1} and 0 < r2' < {r2}")
    if M is None:
        M = sample_sup(series)
    q = (r2_prime / r2) ** 2
    # sum_{k>=k0} (k+1) q^k = q^k0 ((k0+1)/(1-q) + q/(1-q)^2)
    s = q**k_from * ((k_from + 1) / (1 - q) + q / (1 - q) ** 2)
    return TailEstimate(float(2 * M * s), float(q), float(M), int(k_from))


def check_polydisc(weight: WeightExpr, polydisc: tuple, n: int = 256) -> None:
    """Raise unless the closed bidisc lies inside the Hartogs domain (sampled)."""
    z0, r1, r2 = polydisc
    rr = r1 * np.sqrt(np.linspace(0, 1, 16))
    th = 2 * np.pi * np.arange(n) / n
    zs = (z0 + rr[:, None] * np.exp(1j * th)[None, :]).ravel()
    if np.any(r2 >= np.exp(-np.asarray(weight(zs)))):
        raise PointOutsideDomain("polydisc is not inside the Hartogs domain")


# ---------------------------------------------------------------------------
# direct two-variable oracle


def _radial_integral(weight: WeightExpr, a: int, b: int) -> float:
    """``int_0^inf r^(2a+1) exp(-(2b+2) phi(r)) dr``."""
    m = 2.0 * b + 2.0

    def log_f(r):
        with np.errstate(divide="ignore"):
            return (2 * a + 1) * np.log(r) - m * np.asarray(weight(np.asarray(r, dtype=complex)))

    # in u = log r the integrand r^(2a+2) e^(-m phi) decays exponentially at
    # both ends, even next to a pole of mass just below the integrability limit
    us = np.linspace(-700.0, math.log(1e3), 8000)
    lg = log_f(np.exp(us)) + us
    top = float(lg.max())
    peak = float(us[np.argmax(lg)])
    keep = us[lg > top - 60.0]
    lo, hi = float(keep.min()) - 1.0, float(keep.max()) + 1.0
    g = lambda u: math.exp(float(log_f(np.array(math.exp(u)))) + u - top)
    val, _ = quad(g, lo, hi, points=[peak], limit=400, epsabs=0.0, epsrel=1e-13)
    return val * math.exp(top)


def direct_norms(domain: HartogsDomain, bidegree: tuple, fiber_measure: str = "normalized") -> np.ndarray:
    """``||z^a t^b||^2`` on the domain for ``a <= d_z``, ``b <= d_w``.

    With Lebesgue measure,
    ``||z^a t^b||^2 = 2 pi int r^(2a) (2 pi / (2b+2)) exp(-(2b+2) phi(r)) r dr``;
    the normalized fiber measure divides this by ``2 pi``.
    """
    if not domain.weight.is_radial:
        raise NonRadialWeight("direct Hartogs kernel needs a radial weight")
    if fiber_measure not in ("normalized", "lebesgue"):
        raise ValueError(f"unknown fiber measure {fiber_measure!r}")
    d_z, d_w = bidegree
    # the largest fiber power carries the strongest pole
    check_integrable(domain.weight.scaled(2.0 * d_w + 2.0))
    out = np.empty((d_z + 1, d_w + 1))
    for a in range(d_z + 1):
        for b in range(d_w + 1):
            out[a, b] = 2 * np.pi * (2 * np.pi / (2 * b + 2)) * _radial_integral(domain.weight, a, b)
    if fiber_measure == "normalized":
        out /= 2 * np.pi
    return out


def hartogs_direct_kernel(domain: HartogsDomain, z, t, w, s, bidegree: tuple = (12, 24),
                          fiber_measure: str = "normalized", norms: Optional[np.ndarray] = None):
    """``sum_{a,b} z^a conj(w)^a t^b conj(s)^b / ||z^a t^b||^2`` for a radial weight."""
    if norms is None:
        norms = direct_norms(domain, bidegree, fiber_measure)
    d_z, d_w = norms.shape[0] - 1, norms.shape[1] - 1
    u = np.asarray(z, dtype=complex) * np.conj(w)
    v = np.asarray(t, dtype=complex) * np.conj(s)
    pa = u[..., None] ** np.arange(d_z + 1)
    pb = v[..., None] ** np.arange(d_w + 1)
    out = np.einsum("...a,ab,...b->...", pa, 1.0 / norms, pb)
    return complex(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# convergence


@dataclass
class HartogsReport:
    """Per-j sup over probes of ``|K_{Omega_j} - K_Omega|`` plus tail bounds."""

    js: list
    k_max: int
    degree: int
    sup_gap: np.ndarray
    tail: np.ndarray
    limit_values: np.ndarray
    values: np.ndarray
    tail_ok: bool
    M: float
    probes: list = field(default_factory=list)

    @property
    def sup_gap_with_tail(self) -> np.ndarray:
        return self.sup_gap + self.tail

    @property
    def monotone_decreasing(self) -> bool:
        g = self.sup_gap
        return bool(np.all(g[1:] <= g[:-1] * (1 + 1e-8)))

    def csv_rows(self):
        yield ["j", "k_max", "degree", "sup_gap", "tail_bound", "sup_gap_with_tail"]
        for i, j in enumerate(self.js):
            yield [str(j), str(self.k_max), str(self.degree), repr(float(self.sup_gap[i])),
                   repr(float(self.tail[i])), repr(float(self.sup_gap_with_tail[i]))]

    def to_json(self) -> dict:
        return {
            "js": self.js, "k_max": self.k_max, "degree": self.degree,
            "sup_gap": self.sup_gap.tolist(), "tail": self.tail.tolist(),
            "tail_ok": self.tail_ok, "M": self.M, "heuristic_M": True,
            "monotone_decreasing": self.monotone_decreasing,
            "probes": [[[p[0].real, p[0].imag], [p[1].real, p[1].imag],
                        [p[2].real, p[2].imag], [p[3].real, p[3].imag]] for p in self.probes],
        }


def probe_arrays(probes):
    arr = np.array([[complex(x) for x in p] for p in probes], dtype=complex)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


def hartogs_convergence(
    seq: WeightSequence,
    probes: Sequence,
    k_max: int = K_MAX,
    degree: int = 12,
    j_max: int = 32,
    polydisc: tuple = (0j, 0.5, 0.5),
    workers: int = 1,
) -> HartogsReport:
    """Compare ``K_{Omega_j}`` with ``K_Omega`` on probe pairs ``(z, t, w, s)``.

    Probes must lie in ``Omega``, hence in every ``Omega_j``. The tail bound of
    the limit series (the largest kernel, by domain monotonicity) is reported
    for every ``j`` and must stay below ``1e-8`` of the smallest partial sum.
    """
    z, t, w, s = probe_arrays(probes)
    dom = HartogsDomain(seq.limit)
    if not (dom.contains(z, t) and dom.contains(w, s)):
        raise PointOutsideDomain("probe outside the limit Hartogs domain")
    check_polydisc(seq.limit, polydisc)
    limit = build_ligocka_series(seq.limit, k_max, degree, polydisc, workers)
    lim_vals = ligocka_partial(limit, z, t, w, s, check=False)
    _, r1, r2 = polydisc
    r1p = float(np.max(np.abs(np.concatenate([z, w]) - polydisc[0])))
    # all-zero fibers: the tail vanishes identically, any tiny radius bounds it
    r2p = max(float(np.max(np.abs(np.concatenate([t, s])))), 1e-6 * r2)
    est = ligocka_tail(limit, max(r1p, 1e-12), r2p, k_max + 1)
    tail_ok = bool(est.value < TAIL_TOLERANCE * np.min(np.abs(lim_vals)))
    js = list(range(1, j_max + 1))
    gaps, tails, vals = [], [], []
    for j in js:
        ser = build_ligocka_series(seq(j), k_max, degree, polydisc, workers)
        v = ligocka_partial(ser, z, t, w, s, check=False)
        vals.append(v)
        gaps.append(float(np.max(np.abs(v - lim_vals))))
        tails.append(est.value)
    return HartogsReport(js, k_max, degree, np.array(gaps), np.array(tails), np.asarray(lim_vals),
                         np.array(vals), tail_ok, est.M, [tuple(p) for p in probes])
