"""Distance estimates: exact values, brackets, and metric axioms.

Frozen closed forms for the Heisenberg group in this normalization:
horizontal points are at Euclidean distance, and the purely vertical
point (0, 0, z) is at 2 sqrt(pi |z|) (the isoperimetric circle lifting
area z).
"""

import numpy as np
import pytest

import srlab.distance as dist
from srlab.models import get_model


@pytest.fixture(scope="module")
def heis():
    return get_model("heisenberg")


def test_horizontal_point(heis):
    est = dist.cc_distance(heis, np.zeros(3), [1.0, 0.0, 0.0])
    assert est.value == pytest.approx(1.0, abs=1e-12)
    assert est.lower == pytest.approx(1.0, abs=1e-12)
    assert est.method == "geodesic-shooting"


def test_vertical_point(heis):
    for z in (0.25, 1.0, 4.0):
        est = dist.cc_distance(heis, np.zeros(3), [0.0, 0.0, z])
        assert est.value == pytest.approx(2.0 * np.sqrt(np.pi * z), rel=1e-10)


def test_coincident_points(heis):
    est = dist.cc_distance(heis, [0.3, 0.2, 0.1], [0.3, 0.2, 0.1])
    assert est.value == 0.0


def test_bracket_ordering(heis):
    rng = np.random.default_rng(1)
    for _ in range(30):
        x, y = rng.uniform(-1.5, 1.5, (2, 3))
        est = dist.cc_distance(heis, x, y)
        assert est.lower <= est.value + 1e-12
        assert est.value <= est.upper + 1e-12


def test_left_invariance(heis):
    rng = np.random.default_rng(2)
    x, y, g = rng.uniform(-1, 1, (3, 3))
    d1 = dist.cc_distance(heis, x, y).value
    d2 = dist.cc_distance(heis, heis.compose(g, x), heis.compose(g, y)).value
    assert d1 == pytest.approx(d2, rel=1e-10)


def test_triangle_inequality_sweep(heis):
    rng = np.random.default_rng(3)
    for _ in range(100):
        a, b, c = rng.uniform(-1, 1, (3, 3))
        dab = dist.cc_distance(heis, a, b).value
        dbc = dist.cc_distance(heis, b, c).value
        dac = dist.cc_distance(heis, a, c).value
        assert dac <= dab + dbc + 1e-9


def test_symmetry(heis):
    rng = np.random.default_rng(4)
    for _ in range(20):
        x, y = rng.uniform(-1, 1, (2, 3))
        assert dist.cc_distance(heis, x, y).value == pytest.approx(
            dist.cc_distance(heis, y, x).value, rel=1e-10
        )


def test_graph_estimate_brackets_exact_value(heis):
    x = np.zeros(3)
    y = np.array([0.5, 0.4, 0.3])
    exact = dist.cc_distance(heis, x, y)
    graph = dist._graph_estimate(heis, x, y, epsilon=0.05, pad=0.6)
    # the axis-aligned lattice overestimates by at most the taxicab
    # factor plus vertical zig-zagging
    assert exact.value <= graph + 1e-9
    assert graph <= 2.0 * exact.value


def test_engel_graph_fallback():
    m = get_model("engel")
    est = dist.cc_distance(m, np.zeros(4), [0.4, 0.3, 0.0, 0.0], epsilon=0.1)
    assert est.method == "graph"
    assert est.epsilon == 0.1
    assert est.lower <= est.value <= est.upper
    assert est.lower == pytest.approx(0.5)  # horizontal projection


def test_su2_pair_one_parameter_subgroup():
    m = get_model("su2-pair")
    est = dist.cc_distance(m, np.zeros(6), [0.25, 0, 0, 0, 0, 0], epsilon=0.125)
    # straight horizontal flow attains the factor projection bound
    assert est.value == pytest.approx(0.25, abs=1e-9)
    assert est.lower == pytest.approx(0.25, abs=1e-9)
