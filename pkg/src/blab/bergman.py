"""Truncated weighted Bergman kernels from monomial Gram matrices.

For a weight ``phi`` and degree ``d`` the Gram matrix
``G[j, k] = int z^j conj(z)^k exp(-phi) dlambda`` is assembled by quadrature
on a disc large enough that the neglected tail is negligible. With
``G = L L^H`` and ``v(z) = L^{-1} m(z)``, ``m(z) = (1, z, ..., z^d)``,

    K_d(z, w) = sum_i v_i(z) conj(v_i(w)),

the reproducing kernel of the polynomials of degree ``<= d`` in ``H(phi)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .errors import GramNotPositiveDefinite, NoCoerciveTerm
from .grid import PolarGrid, build_polar_grid
from .quad import Truncation, tail_bound
from .weights import WeightExpr, WeightSequence, check_integrable

TAIL_RATIO = 1e-10
SCALE_ABOVE = 16
MONOTONE_SLACK = 1e-8


def default_grid(w: WeightExpr, degree: int, R_max: float, n_r: int = 40, order: int = 6,
                 levels: int = 6) -> PolarGrid:
    centers = [c for c in w.singular_centers if abs(c) < R_max]
    n_theta = max(16, degree + 2)
    return build_polar_grid(R_max, n_r, n_theta, centers, levels, order=order)


def _scales(w: WeightExpr, degree: int) -> np.ndarray:
    if degree <= SCALE_ABOVE:
        return np.ones(degree + 1)
    lead = w.coercive_term()
    c = lead.coeff if lead is not None else 1.0
    k = np.arange(degree + 1)
    return np.exp(0.5 * (math.log(math.pi) + gammaln(k + 1) - (k + 1) * math.log(c)))


@dataclass(frozen=True, eq=False)
class KernelModel:
    """Gram matrix, Cholesky factor and diagnostics for one weight and degree.

    A constant weight has no nonzero entire function of finite norm; its
    model has an empty basis and the kernel vanishes identically.
    """

    weight: WeightExpr
    degree: int
    gram: np.ndarray
    factor: np.ndarray
    truncation: Optional[Truncation]
    grid: Optional[PolarGrid]
    scales: np.ndarray
    condition: float = math.nan

    @property
    def empty(self) -> bool:
        return self.gram.shape[0] == 0

    def monomials(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        k = np.arange(self.gram.shape[0])
        return z[..., None] ** k / self.scales

    def coefficients(self, z) -> np.ndarray:
        """``v(z) = L^{-1} m(z)``, the orthonormal basis evaluated at ``z``.

        Shape ``z.shape + (d + 1,)``.
        """
        z = np.asarray(z, dtype=complex)
        if self.empty:
            return np.zeros(z.shape + (0,), dtype=complex)
        m = self.monomials(z).reshape(-1, self.gram.shape[0])
        v = solve_triangular(self.factor, m.T, lower=True)
        return v.T.reshape(z.shape + (self.gram.shape[0],))

    def __call__(self, z, w):
        return kernel_eval(self, z, w)

    def diagnostics(self) -> dict:
        return {
            "degree": self.degree,
            "grid_nodes": 0 if self.grid is None else len(self.grid),
            "R_max": None if self.truncation is None else self.truncation.R_max,
            "tail_estimate": None if self.truncation is None else self.truncation.tail_estimate,
            "gram_condition": self.condition,
        }


def assemble_gram(w: WeightExpr, degree: int, grid: PolarGrid, scales=None) -> np.ndarray:
    if scales is None:
        scales = np.ones(degree + 1)
    mass = grid.weights * np.exp(-w(grid.nodes))
    V = grid.nodes[:, None] ** np.arange(degree + 1) / scales
    G = (V * mass[:, None]).T @ V.conj()
    return 0.5 * (G + G.conj().T)


def build_kernel(
    w: WeightExpr,
    degree: int,
    grid: Optional[PolarGrid] = None,
    truncation: Optional[Truncation] = None,
) -> KernelModel:
    """Assemble and factor the degree-``degree`` Gram matrix of ``w``.

    Without an explicit truncation, ``R_max`` grows by 25% steps until the tail
    bound is below ``1e-10`` times the smallest Gram diagonal entry.

    Raises
    ------
    GramNotPositiveDefinite
        When the Cholesky factorization fails. No regularization is attempted.
    NoCoerciveTerm
        When the weight is neither constant nor coercive.
    NonIntegrableWeight
        When a log pole of mass >= 2 makes every Gram entry infinite.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if w.is_constant:
        z0 = np.zeros((0, 0), dtype=complex)
        return KernelModel(w, degree, z0, z0, None, None, np.ones(0), 0.0)
    check_integrable(w)
    scales = _scales(w, degree)

    lead = w.coercive_term()
    if lead is None:
        raise NoCoerciveTerm("weight is neither constant nor coercive")
    if truncation is None and grid is not None:
        truncation = tail_bound(w, degree, grid.outer_radius)
        G = assemble_gram(w, degree, grid, scales)
    elif truncation is None:
        R_max = max(0.5, (30.0 / lead.coeff) ** (1.0 / (2 * lead.power)))
        for _ in range(60):
            truncation = tail_bound(w, degree, R_max)
            grid = default_grid(w, degree, R_max)
            G = assemble_gram(w, degree, grid, scales)
            diag_min = float(np.min(G.diagonal().real * scales**2))
            if truncation.tail_estimate < TAIL_RATIO * diag_min:
                break
            R_max *= 1.25
    else:
        if grid is None:
            grid = default_grid(w, degree, truncation.R_max)
        G = assemble_gram(w, degree, grid, scales)

    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise GramNotPositiveDefinite(
            f"Gram matrix of degree {degree} is not positive definite; lower the degree"
        ) from exc
    if not np.all(np.isfinite(L)):
        raise GramNotPositiveDefinite("Cholesky factor is not finite")
    with np.errstate(all="ignore"):
        cond = float(np.linalg.cond(G))
    return KernelModel(w, degree, G, L, truncation, grid, scales, cond)


def kernel_eval(model: KernelModel, z, w):
    """``K_d(z, w)``; exact Hermitian symmetry by construction."""
    vz = model.coefficients(z)
    vw = model.coefficients(w)
    out = np.sum(vz * vw.conj(), axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


def kernel_diag(model: KernelModel, z):
    """``K_d(z, z)``, a nonnegative real number."""
    v = model.coefficients(z)
    out = np.sum(np.abs(v) ** 2, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def kernel_diag_by_degree(model: KernelModel, z) -> np.ndarray:
    """``K_e(z, z)`` for ``e = 0..d``. Leading blocks of ``L`` factor leading blocks of ``G``."""
    v = model.coefficients(z)
    return np.cumsum(np.abs(v) ** 2, axis=-1)


def reproduce_check(model: KernelModel, f_coeffs: Sequence[complex], w: complex):
    """Return ``(f(w), int f conj(K(., w)) exp(-phi) dlambda)`` on the model's grid."""
    coeffs = np.asarray(f_coeffs, dtype=complex)
    if coeffs.size - 1 > model.degree:
        raise ValueError("polynomial degree exceeds model degree")
    # numpy polyval wants highest power first
    lhs = complex(np.polyval(coeffs[::-1], complex(w)))
    if model.empty:
        return lhs, 0j
    nodes = model.grid.nodes
    mass = model.grid.weights * np.exp(-model.weight(nodes))
    fz = np.polyval(coeffs[::-1], nodes)
    kz = kernel_eval(model, nodes, np.full(nodes.shape, complex(w)))
    rhs = complex(np.sum(fz * kz.conj() * mass))
    return lhs, rhs


def extremal_diag(model: KernelModel, z: complex) -> float:
    """``sup |f(z)|^2`` over polynomials of degree ``<= d`` with quadrature norm ``<= 1``.

    Computed from the SVD of the weighted Vandermonde matrix, without the
    Gram matrix: with ``sqrt(W) V = U S Vh`` the constraint becomes ``|b| <= 1``
    for ``b = S Vh a`` and the supremum is ``|S^-1 conj(Vh) m(z)|^2``.
    """
    nodes = model.grid.nodes
    sq = np.sqrt(model.grid.weights * np.exp(-model.weight(nodes)))
    V = nodes[:, None] ** np.arange(model.degree + 1) / model.scales
    # quadrature norm of f = sum a_k z^k is |(sq * V) a|
    _, s, vh = np.linalg.svd(sq[:, None] * V, full_matrices=False)
    m = complex(z) ** np.arange(model.degree + 1) / model.scales
    # f(z) = m^T a = m^T Vh^H S^-1 b; maximize over |b| <= 1
    g = (vh.conj() @ m) / s
    return float(np.sum(np.abs(g) ** 2))


# ---------------------------------------------------------------------------
# convergence experiments


def _build_many(weights, degree, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda wt: build_kernel(wt, degree), weights))
    return [build_kernel(wt, degree) for wt in weights]


@dataclass
class ConvergenceReport:
    """Diagonal kernel values ``K_{phi_j}(z, z)`` against the limit ``K_phi(z, z)``.

    ``values[j-1, p]`` and ``limit[p]`` are at degree ``degree``.
    ``d_stability[j-1, p]`` is ``K_d - K_{d-2}`` at the same point.
    """

    points: list
    js: list
    degree: int
    values: np.ndarray
    limit: np.ndarray
    monotone_in_j: np.ndarray
    monotone_in_d: np.ndarray
    d_stability: np.ndarray
    diagnostics: list = field(default_factory=list)

    @property
    def gaps(self) -> np.ndarray:
        return self.limit[None, :] - self.values

    @property
    def all_monotone(self) -> bool:
        return bool(np.all(self.monotone_in_j) and np.all(self.monotone_in_d))

    def csv_rows(self):
        yield ["point_re", "point_im", "j", "degree", "K_j", "K_limit", "gap"]
        gaps = self.gaps
        for p, z in enumerate(self.points):
            for i, j in enumerate(self.js):
                yield [repr(float(z.real)), repr(float(z.imag)), str(j), str(self.degree),
                       repr(float(self.values[i, p])), repr(float(self.limit[p])),
                       repr(float(gaps[i, p]))]

    def to_json(self) -> dict:
        return {
            "points": [[float(z.real), float(z.imag)] for z in self.points],
            "js": list(self.js),
            "degree": self.degree,
            "values": self.values.tolist(),
            "limit": self.limit.tolist(),
            "gaps": self.gaps.tolist(),
            "monotone_in_j": self.monotone_in_j.tolist(),
            "monotone_in_d": self.monotone_in_d.tolist(),
            "d_stability": self.d_stability.tolist(),
            "diagnostics": self.diagnostics,
        }


def _monotone(seq, slack=MONOTONE_SLACK) -> bool:
    seq = np.asarray(seq, dtype=float)
    return bool(np.all(seq[:-1] <= seq[1:] + slack * np.abs(seq[1:])))


def kernel_convergence(
    seq: WeightSequence, points: Sequence[complex], degree: int, j_max: int, workers: int = 1
) -> ConvergenceReport:
    """Evaluate ``K_{phi_j}(z, z)`` for ``j = 1..j_max`` and the limit weight."""
    pts = [complex(z) for z in points]
    js = list(range(1, j_max + 1))
    models = _build_many([seq(j) for j in js] + [seq.limit], degree, workers)
    lim_model = models[-1]
    limit = np.asarray(kernel_diag(lim_model, np.array(pts)), dtype=float)
    values = np.array([kernel_diag(m, np.array(pts)) for m in models[:-1]], dtype=float)
    values = values.reshape(len(js), len(pts))
    mono_j = np.array([_monotone(np.append(values[:, p], limit[p])) for p in range(len(pts))])
    mono_d = np.zeros((len(js), len(pts)), dtype=bool)
    stab = np.zeros((len(js), len(pts)))
    for i, m in enumerate(models[:-1]):
        for p, z in enumerate(pts):
            by_d = kernel_diag_by_degree(m, z)
            mono_d[i, p] = _monotone(by_d) if by_d.size else True
            stab[i, p] = by_d[-1] - by_d[-3] if by_d.size >= 3 else math.nan
    diags = [dict(j=j, **m.diagnostics()) for j, m in zip(js, models[:-1])]
    diags.append(dict(j="limit", **lim_model.diagnostics()))
    return ConvergenceReport(pts, js, degree, values, limit, mono_j, mono_d, stab, diags)


@dataclass
class OffdiagReport:
    """Per-j ``|K_j(z,w) - K(z,w)|^2`` against ``C (K(w,w) - K_j(w,w))``."""

    z: complex
    w: complex
    js: list
    lhs: np.ndarray
    diag_gap: np.ndarray
    C: float

    @property
    def rhs(self) -> np.ndarray:
        return self.C * self.diag_gap

    @property
    def converging(self) -> bool:
        """Off-diagonal error shrinks along with the diagonal gap."""
        if self.lhs.size < 2:
            return True
        scale = max(float(self.lhs.max()), 1e-300)
        return bool(self.lhs[-1] <= self.lhs[0] + 1e-14 * scale and _monotone(self.diag_gap[::-1], 1e-6))

    def csv_rows(self):
        yield ["z_re", "z_im", "w_re", "w_im", "j", "lhs", "diag_gap", "rhs"]
        for i, j in enumerate(self.js):
            yield [repr(self.z.real), repr(self.z.imag), repr(self.w.real), repr(self.w.imag), str(j),
                   repr(float(self.lhs[i])), repr(float(self.diag_gap[i])), repr(float(self.rhs[i]))]

    def to_json(self) -> dict:
        return {"z": [self.z.real, self.z.imag], "w": [self.w.real, self.w.imag], "js": self.js,
                "lhs": self.lhs.tolist(), "diag_gap": self.diag_gap.tolist(), "C": self.C,
                "converging": self.converging}


def offdiag_convergence(seq: WeightSequence, z: complex, w: complex, degree: int, j_max: int,
                        workers: int = 1) -> OffdiagReport:
    """Off-diagonal errors versus diagonal gaps; ``C`` is the largest observed ratio."""
    js = list(range(1, j_max + 1))
    models = _build_many([seq(j) for j in js] + [seq.limit], degree, workers)
    lim = models[-1]
    k_lim = kernel_eval(lim, z, w)
    d_lim = kernel_diag(lim, w)
    lhs = np.array([abs(kernel_eval(m, z, w) - k_lim) ** 2 for m in models[:-1]])
    gap = np.array([d_lim - kernel_diag(m, w) for m in models[:-1]])
    pos = gap > 1e-300
    C = float(np.max(lhs[pos] / gap[pos])) if np.any(pos) else 0.0
    return OffdiagReport(complex(z), complex(w), js, lhs, gap, C)
