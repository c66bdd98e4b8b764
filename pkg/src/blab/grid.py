"""Polar quadrature grids on discs with local refinement near singular points.

A grid is a union of polar cells ``[r0, r1] x [t0, t1]``. Every cell carries a
tensor rule whose weights add up to the exact cell area, so the weights of a
grid always partition the disc area. Cells close to a singular center are
split dyadically (2 x 2) for a number of rounds, which gives a mesh graded
towards the singularity. Nodes are strictly interior to cells, hence never
coincide with a cell corner or edge.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CenterOutOfDomain, NonFiniteIntegrand

_CHUNK = 1 << 14


@dataclass(frozen=True, eq=False)
class PolarGrid:
    """Quadrature nodes and weights covering the disc of radius ``outer_radius``.

    Attributes
    ----------
    nodes : ndarray of complex
        Quadrature nodes.
    weights : ndarray of float
        Positive weights, summing to ``pi * outer_radius**2``.
    outer_radius : float
    refinement_centers : tuple of complex
    levels : int
        Number of refinement rounds applied at each center.
    cells : ndarray, shape (n_cells, 4)
        Cell bounds ``(r0, r1, t0, t1)``, kept for diagnostics.
    """

    nodes: np.ndarray
    weights: np.ndarray
    outer_radius: float
    refinement_centers: tuple = ()
    levels: int = 0
    cells: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return self.nodes.size

    @property
    def area(self) -> float:
        return float(np.pi * self.outer_radius**2)

    def dump_csv(self, path) -> None:
        """Write ``re, im, weight`` rows (debugging aid)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["re", "im", "weight"])
            for z, w in zip(self.nodes, self.weights):
                writer.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(w))])


def _split(cells: np.ndarray) -> np.ndarray:
    r0, r1, t0, t1 = cells.T
    rm = 0.5 * (r0 + r1)
    tm = 0.5 * (t0 + t1)
    parts = [
        np.column_stack([r0, rm, t0, tm]),
        np.column_stack([r0, rm, tm, t1]),
        np.column_stack([rm, r1, t0, tm]),
        np.column_stack([rm, r1, tm, t1]),
    ]
    return np.concatenate(parts, axis=0)


def _near(cells: np.ndarray, center: complex) -> np.ndarray:
    """Cells whose midpoint lies within one cell diameter of ``center``."""
    r0, r1, t0, t1 = cells.T
    rm = 0.5 * (r0 + r1)
    tm = 0.5 * (t0 + t1)
    mid = rm * np.exp(1j * tm)
    diam = np.hypot(r1 - r0, r1 * (t1 - t0))
    return np.abs(mid - center) < diam


def _cell_nodes(cells: np.ndarray, order: int):
    r0, r1, t0, t1 = cells.T
    if order == 1:
        # node at the area-centroid radius: exact for integrands in |z|^2
        r = np.sqrt(0.5 * (r0**2 + r1**2))[:, None]
        t = (0.5 * (t0 + t1))[:, None]
        w = (0.5 * (r1**2 - r0**2) * (t1 - t0))[:, None]
        return (r * np.exp(1j * t)).ravel(), w.ravel()
    x, wx = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    wx = 0.5 * wx
    r = r0[:, None] + (r1 - r0)[:, None] * x[None, :]
    wr = (r1 - r0)[:, None] * wx[None, :] * r
    t = t0[:, None] + (t1 - t0)[:, None] * x[None, :]
    wt = (t1 - t0)[:, None] * wx[None, :]
    z = r[:, :, None] * np.exp(1j * t[:, None, :])
    w = wr[:, :, None] * wt[:, None, :]
    return z.ravel(), w.ravel()


def build_polar_grid(
    R: float,
    n_r: int = 64,
    n_theta: int = 64,
    singular_centers: Sequence[complex] = (),
    levels: int = 6,
    order: int = 1,
) -> PolarGrid:
    """Build a polar grid on the disc ``|z| < R``.

    Parameters
    ----------
    R : float
        Disc radius.
    n_r, n_theta : int
        Number of radial and angular cells of the base tensor grid (>= 4).
    singular_centers : sequence of complex
        Points where the integrand may be singular; cells near them are
        refined ``levels`` times.
    levels : int
        Rounds of dyadic refinement per center.
    order : int
        Points per direction in each cell. ``1`` is the midpoint rule (node at
        the area centroid radius); larger values use Gauss-Legendre.

    Returns
    -------
    PolarGrid
    """
    if R <= 0:
        raise ValueError(f"radius must be positive, got {R}")
    if n_r < 4 or n_theta < 4:
        raise ValueError("n_r and n_theta must both be >= 4")
    centers = tuple(complex(c) for c in singular_centers)
    for c in centers:
        if abs(c) >= R:
            raise CenterOutOfDomain(f"singular center {c} outside disc of radius {R}")

    rr = np.linspace(0.0, R, n_r + 1)
    tt = np.linspace(0.0, 2 * np.pi, n_theta + 1)
    r0, t0 = np.meshgrid(rr[:-1], tt[:-1], indexing="ij")
    r1, t1 = np.meshgrid(rr[1:], tt[1:], indexing="ij")
    cells = np.column_stack([r0.ravel(), r1.ravel(), t0.ravel(), t1.ravel()])

    for _ in range(levels if centers else 0):
        mask = np.zeros(len(cells), dtype=bool)
        for c in centers:
            mask |= _near(cells, c)
        if not mask.any():
            break
        cells = np.concatenate([cells[~mask], _split(cells[mask])], axis=0)

    # stable ordering keeps sums bit-reproducible
    idx = np.lexsort((cells[:, 2], cells[:, 0]))
    cells = cells[idx]
    nodes, weights = _cell_nodes(cells, order)
    for c in centers:
        if np.any(nodes == c):
            raise AssertionError("quadrature node coincides with a singular center")
    return PolarGrid(nodes, weights, float(R), centers, int(levels), cells)


def integrate(f: Callable[[np.ndarray], np.ndarray], grid: PolarGrid, workers: int = 1) -> float:
    """Sum ``f(node) * weight`` over the grid.

    ``f`` receives an array of complex nodes. Partial sums are taken over fixed
    chunks and reduced in chunk order, so the result does not depend on
    ``workers``.
    """
    bounds = [(i, min(i + _CHUNK, len(grid))) for i in range(0, len(grid), _CHUNK)]

    def partial(b):
        lo, hi = b
        vals = np.asarray(f(grid.nodes[lo:hi]), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = grid.nodes[lo:hi][~np.isfinite(vals)][0]
            raise NonFiniteIntegrand(f"integrand not finite at node {bad}")
        return float(np.dot(vals, grid.weights[lo:hi]))

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(partial, bounds))
    else:
        parts = [partial(b) for b in bounds]
    return float(sum(parts))
