import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blab.errors import CenterOutOfDomain, NonFiniteIntegrand
from blab.grid import build_polar_grid, integrate

# 4 E(m = 0.09): integral of |z - 0.3|^-1 over the unit disc, via translated polar coordinates
SHIFTED_RECIPROCAL = 6.1393338596929965


def test_unit_disc_area():
    g = build_polar_grid(1.0, 64, 64)
    assert abs(g.weights.sum() - math.pi) <= 1e-12 * math.pi


def test_constant_integrand_radius_two():
    g = build_polar_grid(2.0, 64, 64)
    assert integrate(lambda z: np.ones(z.shape), g) == pytest.approx(4 * math.pi, rel=1e-12)


def test_second_moment():
    g = build_polar_grid(1.0, 256, 256)
    assert abs(integrate(lambda z: np.abs(z) ** 2, g) - math.pi / 2) < 1e-6


def test_shifted_reciprocal_three_levels():
    g = build_polar_grid(1.0, 64, 64, [0.3], levels=3)
    val = integrate(lambda z: 1 / np.abs(z - 0.3), g)
    assert val <= 28
    assert val == pytest.approx(SHIFTED_RECIPROCAL, rel=0.02)


def test_log_integrand():
    g = build_polar_grid(1.0, 64, 64, [0.0])
    assert abs(integrate(lambda z: np.log(np.abs(z)), g) + math.pi / 2) < 1e-3


def test_refinement_doubling_changes_singular_integral_little():
    f = lambda z: np.abs(z - 0.2j) ** -1.5
    a = integrate(f, build_polar_grid(1.0, 64, 64, [0.2j], levels=6))
    b = integrate(f, build_polar_grid(1.0, 64, 64, [0.2j], levels=12))
    assert abs(a - b) < 0.01 * b


def test_center_outside_rejected():
    with pytest.raises(CenterOutOfDomain):
        build_polar_grid(1.0, 16, 16, [1.5])


def test_too_coarse_rejected():
    with pytest.raises(ValueError):
        build_polar_grid(1.0, 3, 16)


def test_nonfinite_integrand():
    g = build_polar_grid(1.0, 16, 16)
    with pytest.raises(NonFiniteIntegrand):
        integrate(lambda z: np.full(z.shape, np.inf), g)


def test_workers_bit_identical():
    g = build_polar_grid(1.0, 128, 128, [0.1, -0.4j], levels=6)
    f = lambda z: np.exp(-np.abs(z - 0.1)) / np.abs(z + 0.4j) ** 0.5
    assert integrate(f, g, workers=1) == integrate(f, g, workers=4)


def test_dump_csv(tmp_path):
    g = build_polar_grid(1.0, 4, 4)
    path = tmp_path / "g.csv"
    g.dump_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "re,im,weight"
    assert len(lines) == 1 + g.weights.size


@settings(max_examples=30, deadline=None)
@given(
    R=st.floats(0.1, 10.0),
    n_r=st.integers(4, 40),
    n_theta=st.integers(4, 40),
    centers=st.lists(st.tuples(st.floats(0, 0.99), st.floats(0, 2 * math.pi)), max_size=3),
    levels=st.integers(0, 4),
)
def test_area_partition_and_no_node_at_center(R, n_r, n_theta, centers, levels):
    cs = [R * r * complex(math.cos(t), math.sin(t)) for r, t in centers]
    g = build_polar_grid(R, n_r, n_theta, cs, levels)
    assert abs(g.weights.sum() - math.pi * R * R) <= 1e-12 * math.pi * R * R
    assert np.all(g.weights > 0)
    for c in cs:
        assert np.min(np.abs(g.nodes - c)) > 0
