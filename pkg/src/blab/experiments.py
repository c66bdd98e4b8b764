"""Experiment configurations and runners used by the ``blab`` command.

Each runner returns an :class:`Outcome` holding CSV rows, a JSON document
and a list of named checks. Randomized experiments draw everything from
``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bergman, hartogs, quad
from .errors import ConfigError
from .grid import build_polar_grid
from .io import complex_from_json, load_json, sequence_from_json, weight_from_json, weight_to_json
from .weights import (
    GridDensity,
    InverseSquareDensity,
    PlanarMeasure,
    RadialPowerDensity,
    WeightExpr,
    companion_weight,
    lower_bound_constant,
    riesz_measure,
    upper_bound_constant,
    uniform_disc_measure,
)

EXPERIMENTS = (
    "kernel_convergence",
    "offdiag_convergence",
    "hartogs_convergence",
    "section2_bounds",
    "weight_comparison",
    "discretization_study",
)
MAX_DEGREE = 32
MAX_J = 1000
MAX_GRID = 1024


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class Outcome:
    rows: list
    document: dict
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    seed: int = 0
    output: str = "blab_report"
    weight: Any = None
    sequence: Any = None
    base_dir: Path = Path(".")

    def param(self, key, default=None, kind=float, lo=None, hi=None):
        v = self.params.get(key, default)
        if v is None:
            raise ConfigError(f"missing parameter {key!r}")
        try:
            v = kind(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"parameter {key!r}: {exc}") from exc
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            raise ConfigError(f"parameter {key!r}={v} outside [{lo}, {hi}]")
        return v


def parse_config(doc: dict, base_dir: Path = Path("."), seed=None, output=None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    exp = doc.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}; expected one of {', '.join(EXPERIMENTS)}")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    cfg_seed = doc.get("seed", 0)
    if not isinstance(cfg_seed, int) or isinstance(cfg_seed, bool):
        raise ConfigError("seed must be an integer")
    cfg = ExperimentConfig(
        experiment=exp,
        params=params,
        seed=cfg_seed if seed is None else seed,
        output=output or doc.get("output", "blab_report"),
        base_dir=base_dir,
    )
    if "weight" in doc:
        cfg.weight = weight_from_json(doc["weight"], base_dir)
    if "sequence" in doc:
        cfg.sequence = sequence_from_json(doc["sequence"], base_dir, seed=cfg.seed)
    if exp in ("kernel_convergence", "offdiag_convergence", "hartogs_convergence") and cfg.sequence is None:
        raise ConfigError(f"{exp} needs a 'sequence'")
    # range validation up front so bad configs fail before any work
    if "degree" in params:
        cfg.param("degree", kind=int, lo=0, hi=MAX_DEGREE)
    if "j_max" in params:
        cfg.param("j_max", kind=int, lo=1, hi=MAX_J)
    for key in ("n_r", "n_theta"):
        if key in params:
            cfg.param(key, kind=int, lo=4, hi=MAX_GRID)
    return cfg


def load_config(path, seed=None, output=None) -> ExperimentConfig:
    path = Path(path)
    return parse_config(load_json(path), path.parent, seed, output)


def _points(raw, default):
    raw = default if raw is None else raw
    try:
        return [complex_from_json(p) for p in raw]
    except ConfigError:
        raise
    except TypeError as exc:
        raise ConfigError(f"bad point list: {exc}") from exc


# ---------------------------------------------------------------------------
# runners


def run_kernel_convergence(cfg: ExperimentConfig, workers=1) -> Outcome:
    degree = cfg.param("degree", 8, int, 0, MAX_DEGREE)
    j_max = cfg.param("j_max", 32, int, 1, MAX_J)
    pts = _points(cfg.params.get("points"), [[0, 0], [0.5, 0], [1, 1]])
    rep = bergman.kernel_convergence(cfg.sequence, pts, degree, j_max, workers)
    checks = [
        Check("diagonal nonnegative", bool(np.all(rep.values >= 0) and np.all(rep.limit >= 0))),
        Check("monotone in j (slack 1e-8)", bool(np.all(rep.monotone_in_j))),
        Check("monotone in degree", bool(np.all(rep.monotone_in_d))),
        Check("gap shrinks", bool(np.all(np.abs(rep.gaps[-1]) <= np.abs(rep.gaps[0]) + 1e-12)),
              f"final max gap {float(np.max(np.abs(rep.gaps[-1]))):.3e}"),
    ]
    return Outcome(list(rep.csv_rows()), rep.to_json(), checks)


def run_offdiag_convergence(cfg: ExperimentConfig, workers=1) -> Outcome:
    degree = cfg.param("degree", 10, int, 0, MAX_DEGREE)
    j_max = cfg.param("j_max", 32, int, 1, MAX_J)
    z = complex_from_json(cfg.params.get("z", [1, 0]))
    w = complex_from_json(cfg.params.get("w", [0, 0]))
    rep = bergman.offdiag_convergence(cfg.sequence, z, w, degree, j_max, workers)
    checks = [
        # C is the largest observed ratio, so only its finiteness carries information
        Check("calibrated constant C finite", bool(np.isfinite(rep.C)), f"C = {rep.C:.4g}"),
        Check("off-diagonal error shrinks with the diagonal gap", rep.converging),
    ]
    return Outcome(list(rep.csv_rows()), rep.to_json(), checks)


def random_probes(rng, n, r_z, r_t, center=0j):
    """The origin probe followed by ``n`` uniform probes on the bidisc of radii ``(r_z, r_t)``."""

    def disc(r, size):
        return r * np.sqrt(rng.random(size)) * np.exp(2j * np.pi * rng.random(size))

    z = center + disc(r_z, n)
    t = disc(r_t, n)
    w = center + disc(r_z, n)
    s = disc(r_t, n)
    return [(0j, 0j, 0j, 0j)] + list(zip(z, t, w, s))


def run_hartogs_convergence(cfg: ExperimentConfig, workers=1) -> Outcome:
    degree = cfg.param("degree", 12, int, 0, MAX_DEGREE)
    j_max = cfg.param("j_max", 32, int, 1, MAX_J)
    k_max = cfg.param("k_max", hartogs.K_MAX, int, 0, 200)
    r_z = cfg.param("probe_r_z", 0.5, float, 0.0)
    r_t = cfg.param("probe_r_t", 0.2 * math.exp(-0.25), float, 0.0)
    r1 = cfg.param("polydisc_r1", r_z, float, 0.0)
    r2 = cfg.param("polydisc_r2", 0.9 * math.exp(-r1**2), float, 0.0)
    n = cfg.param("n_probes", 64, int, 1)
    probes = random_probes(np.random.default_rng(cfg.seed), n, r_z, r_t)
    rep = hartogs.hartogs_convergence(cfg.sequence, probes, k_max, degree, j_max, (0j, r1, r2), workers)
    checks = [
        Check("tail bound < 1e-8 of partial sums", rep.tail_ok, f"tail {rep.tail[0]:.3e}, M {rep.M:.4g}"),
        Check("sup-gap decreasing in j (slack 1e-8)", rep.monotone_decreasing),
    ]
    thr = cfg.params.get("gap_threshold")
    if thr is not None:
        checks.append(Check("final sup-gap below threshold", bool(rep.sup_gap[-1] <= float(thr)),
                            f"{rep.sup_gap[-1]:.6g} vs {float(thr):.6g}"))
    return Outcome(list(rep.csv_rows()), rep.to_json(), checks)


def random_atom_config(rng, radii=(0.5, 1.0, 2.0), max_atoms=5, alpha_range=(0.1, 1.9)):
    R = float(rng.choice(radii))
    n = int(rng.integers(1, max_atoms + 1))
    alpha = float(rng.uniform(*alpha_range))
    parts = rng.dirichlet(np.ones(n)) * alpha
    rad = 0.999 * R * np.sqrt(rng.random(n))
    pts = rad * np.exp(2j * np.pi * rng.random(n))
    return R, [(float(a), complex(z)) for a, z in zip(parts, pts)]


def random_measure(rng, radii=(0.5, 1.0, 2.0), alpha_range=(0.1, 1.9)):
    """Atoms plus one smooth density on a disc, total mass in ``alpha_range``."""
    R = float(rng.choice(radii))
    alpha = float(rng.uniform(*alpha_range))
    n_atoms = int(rng.integers(0, 4))
    share = rng.dirichlet(np.ones(n_atoms + 1)) * alpha
    rad = 0.999 * R * np.sqrt(rng.random(n_atoms))
    atoms = tuple((float(a), complex(z)) for a, z in zip(share[:-1], rad * np.exp(2j * np.pi * rng.random(n_atoms))))
    m = float(share[-1])
    kind = int(rng.integers(0, 3))
    rd = float(R * rng.uniform(0.3, 1.0))
    if kind == 0:
        q = float(rng.uniform(0.0, 2.0))
        comp = RadialPowerDensity(m * (q + 2) / (2 * np.pi * rd ** (q + 2)), q, rd)
    elif kind == 1:
        comp = InverseSquareDensity(m * (1 + rd**2) / (np.pi * rd**2), rd)
    else:
        c = complex(0.3 * rd * rng.standard_normal(), 0.3 * rd * rng.standard_normal())
        width = 0.25 * rd
        g = GridDensity.from_function(lambda z: np.exp(-np.abs(z - c) ** 2 / width**2), rd, 12, 16)
        comp = g.scaled(m / g.mass)
    return R, PlanarMeasure(atoms, (comp,), R)


def run_section2_bounds(cfg: ExperimentConfig, workers=1) -> Outcome:
    rng = np.random.default_rng(cfg.seed)
    n_cfg = cfg.param("n_configs", 100, int, 0)
    n_meas = cfg.param("n_measures", 100, int, 0)
    n_conv = cfg.param("n_convexity", 10_000, int, 0)
    slack = cfg.param("slack", 1.05, float, 1.0)
    levels = cfg.param("levels", quad.DEFAULT_LEVELS, int, 0, 20)
    rows = [["kind", "index", "R", "n_atoms", "alpha", "value", "bound", "ok"]]
    viol_int = 0
    for i in range(n_cfg):
        R, centers = random_atom_config(rng)
        alpha = sum(a for a, _ in centers)
        val = quad.reciprocal_power_integral(centers, R, levels=levels)
        bound = quad.section2_bound(R, alpha)
        ok = val <= bound * slack
        viol_int += not ok
        rows.append(["reciprocal_power", str(i), repr(R), str(len(centers)), repr(alpha), repr(val),
                     repr(bound), str(ok)])
    viol_exp = 0
    for i in range(n_meas):
        R, mu = random_measure(rng)
        val = quad.exp_neg_potential_integral(mu, R, levels=levels)
        bound = quad.section2_bound(R, mu.total_mass)
        ok = val <= bound * slack
        viol_exp += not ok
        rows.append(["exp_neg_potential", str(i), repr(R), str(len(mu.atoms)), repr(mu.total_mass),
                     repr(val), repr(bound), str(ok)])
    viol_conv = 0
    for i in range(n_conv):
        _, centers = random_atom_config(rng, radii=(1.0,))
        z = complex(*rng.uniform(-2, 2, 2))
        lhs, rhs = quad.convexity_bound_check(centers, z)
        viol_conv += not (lhs <= rhs * (1 + 1e-12))
    checks = [
        Check(f"reciprocal-power integral <= 28R^2/(2-alpha)*{slack}", viol_int == 0,
              f"{viol_int} violations in {n_cfg}"),
        Check(f"exp(-potential) integral <= 28R^2/(2-alpha)*{slack}", viol_exp == 0,
              f"{viol_exp} violations in {n_meas}"),
        Check("convexity inequality", viol_conv == 0, f"{viol_conv} violations in {n_conv}"),
    ]
    doc = {"n_configs": n_cfg, "n_measures": n_meas, "n_convexity": n_conv, "seed": cfg.seed,
           "violations": {"reciprocal_power": viol_int, "exp_neg_potential": viol_exp,
                          "convexity": viol_conv}}
    return Outcome(rows, doc, checks)


def weight_comparison_samples(rng, n):
    """Seeded ``(z, zeta, R, eps)`` samples for both comparison lemmas."""
    R = rng.uniform(0.1, 5.0, n)
    eps = rng.uniform(0.05, 5.0, n)
    zeta = 0.999 * R * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    z_any = rng.uniform(0, 50, n) * np.exp(2j * np.pi * rng.random(n))
    z_far = (R + eps / 2) * rng.uniform(1.0, 10.0, n) * np.exp(2j * np.pi * rng.random(n))
    return R, eps, zeta, z_any, z_far


def run_weight_comparison(cfg: ExperimentConfig, workers=1) -> Outcome:
    rng = np.random.default_rng(cfg.seed)
    n = cfg.param("n_samples", 1000, int, 1)
    R, eps, zeta, z_any, z_far = weight_comparison_samples(rng, n)
    M = np.array([upper_bound_constant(r) for r in R])
    C = np.array([lower_bound_constant(r, e) for r, e in zip(R, eps)])
    up = np.log(np.abs(z_any - zeta)) <= 0.5 * np.log1p(np.abs(z_any) ** 2) + M + 1e-12
    low = np.log(np.abs(z_far - zeta)) >= 0.5 * np.log1p(np.abs(z_far) ** 2) - C - 1e-12
    rows = [["index", "R", "eps", "M_R", "C", "upper_ok", "lower_ok"]]
    for i in range(n):
        rows.append([str(i), repr(float(R[i])), repr(float(eps[i])), repr(float(M[i])), repr(float(C[i])),
                     str(bool(up[i])), str(bool(low[i]))])
    checks = [
        Check("log|z-zeta| <= log(1+|z|^2)/2 + M_R", bool(up.all()), f"{int((~up).sum())} violations in {n}"),
        Check("log|z-zeta| >= log(1+|z|^2)/2 - C(R,eps)", bool(low.all()), f"{int((~low).sum())} violations in {n}"),
    ]
    doc = {"n_samples": n, "seed": cfg.seed, "upper_violations": int((~up).sum()),
           "lower_violations": int((~low).sum())}
    if cfg.weight is not None:
        Rw = cfg.param("R", 1.0, float, 0.0)
        cw = companion_check(cfg.weight, Rw, rng, cfg.param("n_companion", 200, int, 1))
        checks.extend(cw.checks)
        doc["companion"] = cw.document
    return Outcome(rows, doc, checks)


def companion_check(w: WeightExpr, R: float, rng, n: int) -> Outcome:
    """Compare ``phi`` with its companion ``psi`` on random points.

    Everywhere ``phi - psi <= alpha M_R``; on ``|z| >= 3R`` also
    ``|phi - psi| <= alpha M_R`` (for ``R >= 1/4``).
    """
    psi = companion_weight(w, R)
    alpha = riesz_measure(w, R).total_mass
    bound = alpha * upper_bound_constant(R)
    z_all = 3 * R * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    z_out = R * rng.uniform(3.0, 50.0, n) * np.exp(2j * np.pi * rng.random(n))
    d_all = w(z_all) - psi(z_all)
    d_out = w(z_out) - psi(z_out)
    tol = 1e-9 * (1 + bound)
    checks = [
        Check("phi - psi <= alpha*M_R", bool(np.all(d_all <= bound + tol))),
        Check("|phi - psi| <= alpha*M_R on |z| >= 3R", bool(np.all(np.abs(d_out) <= bound + tol)),
              f"max {float(np.max(np.abs(d_out))):.4g} vs {bound:.4g}"),
    ]
    return Outcome([], {"alpha": alpha, "bound": bound, "weight": weight_to_json(w),
                        "max_abs_diff_exterior": float(np.max(np.abs(d_out)))}, checks)


def run_discretization_study(cfg: ExperimentConfig, workers=1) -> Outcome:
    Ns = [int(n) for n in cfg.params.get("Ns", [16, 64, 256, 1024])]
    floor = cfg.param("kernel_floor", quad.KERNEL_FLOOR, float, 0.0)
    radius = cfg.param("radius", 0.5, float, 0.0)
    mass = cfg.param("mass", 1.0, float, 0.0)
    thr = cfg.param("gap_threshold", 1e-2, float, 0.0)
    mu = uniform_disc_measure(mass, radius)
    samples = discretization_samples(2 * radius)
    gaps = []
    rows = [["N", "gap", "mass_error"]]
    for N in Ns:
        sigma = quad.discretize_measure(mu, N, floor)
        g = quad.discretization_gap(mu, sigma, samples, floor)
        gaps.append(g)
        rows.append([str(N), repr(g), repr(sigma.total_mass - mu.total_mass)])
    dec = all(b < a for a, b in zip(gaps, gaps[1:]))
    checks = [
        Check("sup-gap strictly decreasing in N", dec, ", ".join(f"{g:.3e}" for g in gaps)),
        Check(f"sup-gap at N={Ns[-1]} below {thr:g}", gaps[-1] < thr),
    ]
    return Outcome(rows, {"Ns": Ns, "gaps": gaps, "kernel_floor": floor}, checks)


def discretization_samples(extent: float, n_side: int = 10) -> np.ndarray:
    """A ``n_side x n_side`` Cartesian sample grid on ``[-extent, extent]^2`` (offset from axes)."""
    x = extent * (2 * (np.arange(n_side) + 0.5) / n_side - 1)
    X, Y = np.meshgrid(x, x)
    return (X + 1j * Y).ravel()


RUNNERS: dict[str, Callable[[ExperimentConfig, int], Outcome]] = {
    "kernel_convergence": run_kernel_convergence,
    "offdiag_convergence": run_offdiag_convergence,
    "hartogs_convergence": run_hartogs_convergence,
    "section2_bounds": run_section2_bounds,
    "weight_comparison": run_weight_comparison,
    "discretization_study": run_discretization_study,
}


def run(cfg: ExperimentConfig, workers: int = 1) -> Outcome:
    return RUNNERS[cfg.experiment](cfg, workers)


def experiment_grid(cfg: ExperimentConfig):
    """The base quadrature grid an experiment integrates on (for ``grid-dump``)."""
    n_r = cfg.param("n_r", 64, int, 4, MAX_GRID)
    n_t = cfg.param("n_theta", 64, int, 4, MAX_GRID)
    levels = cfg.param("levels", quad.DEFAULT_LEVELS, int, 0, 20)
    w = cfg.weight if cfg.weight is not None else (cfg.sequence.limit if cfg.sequence else None)
    R = cfg.param("R", 1.0, float, 0.0)
    centers = [] if w is None else [c for c in w.singular_centers if abs(c) < R]
    return build_polar_grid(R, n_r, n_t, centers, levels)
