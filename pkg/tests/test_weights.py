import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import dblquad

from blab.errors import InsufficientResolution, NotMonotone
from blab.weights import (
    CircleMeasure,
    Const,
    GridDensity,
    LogAtom,
    LogOnePlusSq,
    LogPotential,
    PlanarMeasure,
    RadialPoly,
    RadialPowerDensity,
    WeightExpr,
    WeightSequence,
    circle_measure,
    companion_weight,
    condition_b_probe,
    eval_weight,
    fock,
    log_potential,
    lower_bound_constant,
    riesz_measure,
    riesz_split,
    uniform_disc_measure,
    upper_bound_constant,
)

MIXED = WeightExpr((RadialPoly(1.0), LogAtom(0.5, 0.3), LogOnePlusSq(0.7), Const(-1.0)))


# --- evaluation ---------------------------------------------------------------


def test_eval_fock():
    assert eval_weight(fock(), 1 + 1j) == pytest.approx(2.0, rel=1e-15)


def test_eval_log_pole():
    assert eval_weight(WeightExpr((LogAtom(1.0, 0j),)), 0j) == -math.inf


def test_eval_log_one_plus_sq():
    w = WeightExpr((LogOnePlusSq(1.0),))
    assert eval_weight(w, 0j) == 0.0
    # coefficient a means (a/2) log(1 + |z|^2)
    assert eval_weight(w, 1.0) == pytest.approx(0.5 * math.log(2))


def test_eval_vectorized_matches_scalar():
    zs = np.array([0.1, -0.5j, 1 + 2j])
    assert np.allclose(MIXED(zs), [MIXED(z) for z in zs], rtol=1e-15)


# --- Riesz measures -----------------------------------------------------------


def test_riesz_fock_unit_disc():
    mu = riesz_measure(fock(), 1.0)
    assert mu.total_mass == pytest.approx(2.0, rel=1e-14)
    (comp,) = mu.components
    assert comp.density(0.3) == pytest.approx(2 / math.pi, rel=1e-14)


def test_riesz_atom():
    mu = riesz_measure(WeightExpr((LogAtom(0.5, 0.3),)), 1.0)
    assert mu.atoms == ((0.5, 0.3 + 0j),)
    assert mu.components == () or mu.total_mass == pytest.approx(0.5)


def test_riesz_atom_plus_fock():
    mu = riesz_measure(WeightExpr((RadialPoly(1.0), LogAtom(0.5, 0j))), 0.5)
    assert mu.atoms == ((0.5, 0j),)
    assert mu.total_mass == pytest.approx(1.0, rel=1e-14)


def test_riesz_atom_outside_disc_dropped():
    assert riesz_measure(WeightExpr((LogAtom(0.5, 2.0),)), 1.0).total_mass == 0.0


@pytest.mark.parametrize("p, c", [(1, 1.0), (2, 0.3), (3, 2.0)])
def test_riesz_radial_poly_density_is_laplacian(p, c):
    # (1/2pi) Lap(c r^2p) = (1/2pi) c (2p)^2 r^(2p-2)
    mu = riesz_measure(WeightExpr((RadialPoly(c, p),)), 1.3)
    (comp,) = mu.components
    r = 0.7
    assert comp.density(r) == pytest.approx(c * 4 * p * p * r ** (2 * p - 2) / (2 * math.pi), rel=1e-13)
    assert mu.total_mass == pytest.approx(2 * c * p * 1.3 ** (2 * p), rel=1e-13)


def test_riesz_log_one_plus_sq_mass():
    mu = riesz_measure(WeightExpr((LogOnePlusSq(2.0),)), 3.0)
    assert mu.total_mass == pytest.approx(2.0 * 9 / 10, rel=1e-13)


def test_riesz_const_empty():
    assert riesz_measure(WeightExpr((Const(3.0),)), 1.0).total_mass == 0.0


def test_riesz_grid_resolution():
    g = GridDensity.from_function(lambda z: np.ones(z.shape), 0.5, 8, 8)
    w = WeightExpr((LogPotential(PlanarMeasure((), (g,), 0.5), 0.5),))
    riesz_measure(w, 1.0, min_resolution=8)
    with pytest.raises(InsufficientResolution):
        riesz_measure(w, 1.0, min_resolution=16)


def test_riesz_additive():
    a = WeightExpr((RadialPoly(0.5), LogAtom(0.2, 0.1j)))
    b = WeightExpr((LogOnePlusSq(1.0), LogAtom(0.3, -0.4)))
    ma, mb, mab = (riesz_measure(w, 0.9) for w in (a, b, a + b))
    assert mab.atoms == ma.atoms + mb.atoms
    assert mab.total_mass == pytest.approx(ma.total_mass + mb.total_mass, rel=1e-14)
    z = np.array([0.05, 0.5 + 0.5j, 2.0])
    assert np.allclose(log_potential(mab, z), log_potential(ma, z) + log_potential(mb, z), rtol=1e-13)


# --- potentials ---------------------------------------------------------------


def test_potential_unit_atom():
    assert log_potential(PlanarMeasure(((1.0, 0j),), (), 1.0), math.e) == pytest.approx(1.0, rel=1e-15)


def test_potential_two_atoms():
    mu = PlanarMeasure(((1.0, 0j), (1.0, 1.0)), (), 1.5)
    assert log_potential(mu, 2.0) == pytest.approx(0.6931471805599453, rel=1e-15)


def test_potential_circle():
    mu = circle_measure(1.0, 0.5)
    assert log_potential(mu, 2.0) == pytest.approx(math.log(2.0), rel=1e-14)
    assert log_potential(mu, 0.2j) == pytest.approx(math.log(0.5), rel=1e-14)


def test_potential_at_atom_is_minus_inf():
    assert log_potential(PlanarMeasure(((0.3, 0.2), ), (), 1.0), 0.2) == -math.inf


@pytest.mark.parametrize(
    "comp",
    [RadialPowerDensity(1.3, 0.5, 0.8), RadialPowerDensity(0.2, 2.0, 1.0), uniform_disc_measure(1.0, 0.5).components[0]],
)
@pytest.mark.parametrize("z", [0.0, 0.3, 0.6 + 0.2j, 1.7])
def test_density_potential_against_dblquad(comp, z):
    R = comp.radius
    f = lambda r, t: r * comp.density(r) * math.log(abs(z - r * complex(math.cos(t), math.sin(t))))
    # split both ranges at z, where the integrand has a log singularity
    cuts = [0.0] + ([abs(z)] if 0 < abs(z) < R else []) + [R]
    arg = cmath.phase(z) % (2 * math.pi)
    t_cuts = [0.0] + ([arg] if 0 < arg else []) + [2 * math.pi]
    ref = sum(dblquad(f, t0, t1, a, b, epsabs=1e-11, epsrel=1e-11)[0]
              for a, b in zip(cuts, cuts[1:]) for t0, t1 in zip(t_cuts, t_cuts[1:]))
    assert comp.potential(np.array([z]))[0] == pytest.approx(ref, abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 3), st.floats(-2, 2), st.floats(-2, 2), st.floats(-3, 3), st.floats(-3, 3))
def test_potential_of_atom_exact(a, cx, cy, x, y):
    c, z = complex(cx, cy), complex(x, y)
    if z == c:
        return
    mu = PlanarMeasure(((a, c),), (), abs(c) + 1)
    # exact up to round-off in |z - c| and the log
    assert log_potential(mu, z) == pytest.approx(a * math.log(abs(z - c)), rel=1e-15, abs=1e-15)


# --- Riesz split --------------------------------------------------------------


def test_split_pure_potential():
    w = WeightExpr((LogAtom(0.4, 0.2j),))
    s = riesz_split(w, 1.0)
    assert s.remainder.terms == ()
    assert s.measure.atoms == ((0.4, 0.2j),)


def test_split_const():
    s = riesz_split(WeightExpr((Const(3.0),)), 1.0)
    assert s.measure.total_mass == 0.0
    assert s.remainder.terms == (Const(3.0),)


def test_split_fock_remainder_at_origin():
    # -int_{|z|<1} log|z| (2/pi) dlambda = 1
    s = riesz_split(fock(), 1.0)
    assert s.remainder(0j) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("R", [0.5, 1.0, 2.5])
def test_split_round_trip(R):
    s = riesz_split(MIXED, R)
    rng = np.random.default_rng(1)
    z = R * np.sqrt(rng.random(200)) * np.exp(2j * np.pi * rng.random(200))
    assert np.allclose(s(z), MIXED(z), rtol=0, atol=1e-11)


def test_split_remainder_harmonic_mean_value():
    s = riesz_split(MIXED, 1.0)
    th = 2 * np.pi * np.arange(256) / 256
    for c, r in [(0j, 0.5), (0.2 + 0.1j, 0.3)]:
        assert np.mean(s.remainder(c + r * np.exp(1j * th))) == pytest.approx(s.remainder(c), abs=1e-10)


# --- comparison constants -----------------------------------------------------


def test_upper_constant_values():
    assert upper_bound_constant(1.0) == pytest.approx(1.0397207708399179, rel=1e-15)
    assert upper_bound_constant(0.0) == pytest.approx(math.log(2))


def test_lower_constant_values():
    assert lower_bound_constant(1.0, 1.0) == pytest.approx(0.5 * math.log(2) + math.log(3), rel=1e-15)
    vals = [lower_bound_constant(R, 1.0) for R in (1, 10, 100, 1000)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 10), st.floats(0, 0.999), st.floats(0, 2 * math.pi), st.floats(0, 100), st.floats(0, 2 * math.pi))
def test_upper_inequality(R, s, a, r, b):
    zeta = R * s * complex(math.cos(a), math.sin(a))
    z = r * complex(math.cos(b), math.sin(b))
    if z == zeta:
        return
    assert math.log(abs(z - zeta)) <= 0.5 * math.log1p(abs(z) ** 2) + upper_bound_constant(R) + 1e-12


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0, 0.999), st.floats(0, 2 * math.pi),
       st.floats(1, 50), st.floats(0, 2 * math.pi))
def test_lower_inequality(R, eps, s, a, k, b):
    zeta = R * s * complex(math.cos(a), math.sin(a))
    z = (R + eps / 2) * k * complex(math.cos(b), math.sin(b))
    assert math.log(abs(z - zeta)) >= 0.5 * math.log1p(abs(z) ** 2) - lower_bound_constant(R, eps) - 1e-12


# --- Condition (B) and companion ----------------------------------------------


def test_condition_b_half_atom():
    hit = condition_b_probe(WeightExpr((LogAtom(0.5, 0j),)), 1.0)
    assert hit == pytest.approx((0.5, 0.5, 0.5, 0.5))


def test_condition_b_fock():
    R, c, alpha, beta = condition_b_probe(fock(), 0.9)
    assert alpha == pytest.approx(2 * R * R, rel=1e-13)
    assert beta == pytest.approx(2 * (R + c) ** 2, rel=1e-13)
    assert 0 < alpha < 1.62 and beta < 2


def test_condition_b_none():
    assert condition_b_probe(WeightExpr((Const(0.0),)), 5.0) is None


def test_condition_b_heavy_atom_never_admissible():
    # every disc around 0 carries mass 3 >= 2
    assert condition_b_probe(WeightExpr((LogAtom(3.0, 0j),)), 1.0) is None


def test_condition_b_shrinks_past_heavy_outer_atom():
    w = WeightExpr((LogAtom(0.4, 0j), LogAtom(3.0, 0.8)))
    R, c, alpha, beta = condition_b_probe(w, 1.0)
    assert R + c <= 0.8 and alpha == 0.4 and beta == 0.4


def test_companion_of_atom():
    psi = companion_weight(WeightExpr((LogAtom(0.8, 0.1),)), 1.0)
    assert psi.terms == (LogOnePlusSq(0.8),)


def test_companion_of_const():
    assert companion_weight(WeightExpr((Const(2.0),)), 1.0).terms == (Const(2.0),)


def test_companion_bounded_difference():
    w = WeightExpr((LogAtom(0.5, 0j), RadialPoly(1.0)))
    R = 1.0
    psi = companion_weight(w, R)
    alpha = riesz_measure(w, R).total_mass
    bound = alpha * upper_bound_constant(R)
    rng = np.random.default_rng(3)
    inside = 3 * R * np.sqrt(rng.random(500)) * np.exp(2j * np.pi * rng.random(500))
    outside = R * rng.uniform(3, 40, 500) * np.exp(2j * np.pi * rng.random(500))
    assert np.all(w(inside) - psi(inside) <= bound + 1e-9)
    assert np.all(np.abs(w(outside) - psi(outside)) <= bound + 1e-9)


# --- subharmonicity -----------------------------------------------------------

SUBHARMONIC = [
    fock(),
    MIXED,
    WeightExpr((RadialPoly(0.4, 3), LogAtom(1.2, -0.5 + 0.5j))),
    WeightExpr((LogPotential(circle_measure(0.7, 0.4, 1.0), 1.0), LogOnePlusSq(1.5))),
    WeightExpr((LogPotential(PlanarMeasure((), (RadialPowerDensity(1.0, 1.0, 0.6),), 0.6), 0.6),)),
]


@pytest.mark.parametrize("w", SUBHARMONIC)
def test_sub_mean_value(w):
    rng = np.random.default_rng(11)
    centers = 3 * np.sqrt(rng.random(1000)) * np.exp(2j * np.pi * rng.random(1000))
    th = 2 * np.pi * (np.arange(64) + 0.5) / 64
    r = rng.uniform(0.001, 0.1, 1000)
    ring = centers[:, None] + r[:, None] * np.exp(1j * th)[None, :]
    avg = w(ring.ravel()).reshape(ring.shape).mean(axis=1)
    ok = np.isfinite(w(centers))
    assert np.all(avg[ok] >= w(centers)[ok] - 1e-9)


# --- sequences ----------------------------------------------------------------


def test_sequences_monotone():
    for make in (WeightSequence.scaled, WeightSequence.shifted, WeightSequence.constant):
        seq = make(fock())
        z = np.array([0.0, 0.5, 1 + 1j])
        vals = np.array([seq(j)(z) for j in range(1, 20)])
        assert np.all(np.diff(vals, axis=0) >= -1e-15)
        assert np.all(vals <= seq.limit(z) + 1e-15)


def test_sequence_not_monotone():
    with pytest.raises(NotMonotone):
        WeightSequence(lambda j: fock().scaled(1.0 + 1.0 / j), fock())


def test_scaled_first_term_is_constant():
    assert WeightSequence.scaled(fock())(1).is_constant


def test_measure_validation():
    with pytest.raises(ValueError):
        PlanarMeasure(((-1.0, 0j),), (), 1.0)
    with pytest.raises(ValueError):
        PlanarMeasure(((1.0, 2.0),), (), 1.0)
    with pytest.raises(ValueError):
        PlanarMeasure((), (CircleMeasure(1.0, 2.0),), 1.0)
