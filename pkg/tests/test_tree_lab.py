import math

import numpy as np
import pytest

from potlab import (AnalyticTree, Edge, alpha_star, critical_values, exterior_branch, hausdorff,
                    score_tree, search_tree, solve_fiber, star_tree, tree_measure)
from potlab.errors import InputError, InvalidTree
from potlab.tree_lab import _bivariate

QUAD = [0, 1, 1]          # y + y^2
CUBIC = [0, 1, 0, 1]      # y + y^3
FULL = [0, 1, 1, 1]       # y + y^2 + y^3
S3 = 3 * math.sqrt(3) / 2


def example_density(x):
    return np.sqrt(4 + x) / np.sqrt(-x) / (2 * np.pi)


def test_sigma_quadratic():
    np.testing.assert_allclose(critical_values(QUAD), [-4], atol=1e-14)


def test_sigma_cubic():
    np.testing.assert_allclose(critical_values(CUBIC), [-S3 * 1j, S3 * 1j], atol=1e-12)


def test_sigma_full_cubic():
    s = critical_values(FULL)
    assert s.size == 2
    P = np.polynomial.Polynomial(FULL)
    for a in P.deriv().roots():
        assert abs(P.deriv()(a)) < 1e-10
        assert np.min(np.abs(s - 1 / P(a))) < 1e-10


def test_sigma_rejects_bad_input():
    with pytest.raises(InputError):
        critical_values([1, 1])
    with pytest.raises(InputError):
        critical_values([0, 0, 1])


def test_exterior_branch_quadratic():
    b = exterior_branch(QUAD, 100.0)
    assert abs(b.value - alpha_star(100.0)) < 1e-15
    # Laurent series 1/z - 1/z^2 + 2/z^3 at z = 100
    assert abs(b.value - 0.009902) < 1e-7
    assert abs(b.a2 + 1) < 1e-10


def test_exterior_branch_linear():
    b = exterior_branch([0, 1], 7.0)
    assert abs(b.value - 1 / 7) < 1e-15 and abs(b.a2) < 1e-14


def test_exterior_branch_cubic():
    b = exterior_branch(CUBIC, 50.0)
    assert b.residual < 0.01
    assert abs(50 * (b.value + b.value ** 3) - 1) < 1e-12


def test_density_matches_closed_form():
    tm = tree_measure(star_tree([-4], ctrl_per_edge=0), QUAD, n=50)
    (e,) = tm.edges
    x = e.z.real
    assert e.z.size == 50 and np.all((x > -4) & (x < 0))
    rho = e.arclength_density
    assert np.abs(rho.imag).max() < 1e-12
    np.testing.assert_allclose(rho.real, example_density(x), rtol=1e-6)
    sc = score_tree(tm)
    assert abs(sc.mass - 1) < 1e-8 and abs(sc.total_variation - 1) < 1e-8
    assert sc.positivity_defect < 1e-8


def test_to_measure_matches_reference():
    mu = tree_measure(star_tree([-4]), QUAD, n=32).to_measure()
    z = np.array([10.0, 5j, -7 - 3j])
    np.testing.assert_allclose(mu.cauchy_transform(z), alpha_star(z), rtol=1e-10)


def test_spurious_stub_rejected():
    T = AnalyticTree([0, -4, 1, 2], [Edge(0, 1, [-2]), Edge(2, 3, [1.5])])
    with pytest.raises(InvalidTree):
        tree_measure(T, QUAD)


def test_crossing_and_missing_node_rejected():
    with pytest.raises(InvalidTree):
        AnalyticTree([0, -4, -2 + 1j, -2 - 1j],
                     [Edge(0, 1, []), Edge(1, 2, []), Edge(2, 3, [])]).validate()
    with pytest.raises(InvalidTree):
        AnalyticTree([0, -3], [Edge(0, 1, [-1.5])]).validate(required=[-4])


def bent_path():
    return AnalyticTree([0, -4], [Edge(1, 0, [-2 + 1j])])


def test_bent_path_has_defect():
    sc = score_tree(tree_measure(bent_path(), QUAD, n=32))
    assert sc.positivity_defect > 0.1
    assert abs(sc.mass - 1) < 1e-8
    assert sc.total_variation >= 1 - 1e-6


def test_orientation_invariance():
    a = score_tree(tree_measure(AnalyticTree([0, -4], [Edge(0, 1, [-1 + 0.5j, -3 + 0.5j])]),
                                QUAD))
    b = score_tree(tree_measure(AnalyticTree([0, -4], [Edge(1, 0, [-3 + 0.5j, -1 + 0.5j])]),
                                QUAD))
    assert abs(a.mass - b.mass) < 1e-10
    assert abs(a.total_variation - b.total_variation) < 1e-10


@pytest.mark.parametrize("tree", ["star", "steiner"])
def test_cubic_trees(tree):
    s = critical_values(CUBIC)
    if tree == "star":
        T = star_tree(s)
    else:
        w = 0.8
        T = AnalyticTree([0, s[0], s[1], w],
                         [Edge(0, 3, [w / 3, 2 * w / 3]), Edge(3, 1, [w + (s[0] - w) / 2]),
                          Edge(3, 2, [w + (s[1] - w) / 2])])
    tm = tree_measure(T, CUBIC)
    sc = score_tree(tm)
    assert abs(sc.mass - 1) < 1e-8
    assert sc.total_variation >= 1 - 1e-6
    # the transform reproduces the branch near 1/z on |z| = R
    P = _bivariate(CUBIC)
    z = 20 * np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8)
    ref = np.array([min(solve_fiber(P, zz), key=lambda r: abs(r - 1 / zz)) for zz in z])
    np.testing.assert_allclose(tm.cauchy_transform(z), ref, rtol=1e-6)


def test_search_zero_iterations():
    res = search_tree(QUAD, seed=1, iterations=0)
    assert len(res.trace) == 1
    assert hausdorff(res.tree, np.linspace(-4, 0, 4001)) < 1e-3
    assert res.score.objective == res.initial_objective


def test_search_is_deterministic(tmp_path):
    a = search_tree(CUBIC, seed=3, iterations=15)
    b = search_tree(CUBIC, seed=3, iterations=15)
    a.write_trace(tmp_path / "a.csv")
    b.write_trace(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    best = [r["best"] for r in a.trace]
    assert all(y <= x for x, y in zip(best[:-1], best[1:]))


def test_tree_json_roundtrip(tmp_path):
    T = bent_path()
    T.save(tmp_path / "t.json")
    U = AnalyticTree.load(tmp_path / "t.json")
    for p, q in zip(T.polylines(), U.polylines()):
        np.testing.assert_array_equal(p, q)


def test_hausdorff_measures_geometry():
    assert hausdorff(star_tree([-4]), np.linspace(-4, 0, 40001)) < 1e-3
    d = hausdorff(bent_path(), np.linspace(-4, 0, 4001))
    assert 0.9 < d < 1.3
