import itertools

import numpy as np
import pytest

from potlab import (CollinearConfiguration, Grid, RegionMask, assemble_configuration,
                    enumerate_collinear_configurations, envelope_configuration,
                    extreme_point_profile, interface_lipschitz, max_configuration,
                    separation_angle, verify_forward_star, verify_subharmonic)
from potlab.configurations import collinear_frame, max_adjacent_jump
from potlab.errors import InputError, NotCollinear

from conftest import tuple_from_constant_branches

SMALL = Grid.square(0.0, 0.1, 81)
UNIT = Grid.square(0.0, 1.0, 81)


def test_profile_square():
    assert extreme_point_profile([1, 1j, -1, -1j]) == ["extreme"] * 4


def test_profile_collinear():
    assert extreme_point_profile([0, 2, -0.5]) == ["on_edge", "extreme", "extreme"]


def test_profile_triangle():
    assert extreme_point_profile([0, 1, 0.5 + 0.5j]) == ["extreme"] * 3


def test_profile_degenerate_warns():
    with pytest.warns(RuntimeWarning):
        assert extreme_point_profile([1, 1, 1]) == ["on_edge"] * 3


def test_profile_interior():
    assert extreme_point_profile([1, 1j, -1, -1j, 0.1])[-1] == "interior"


def test_max_zero_and_2x(zero_and_2x):
    F = max_configuration(zero_and_2x, [0, 1], UNIT)
    X = UNIT.Z.real
    np.testing.assert_allclose(F.V, np.maximum(0, 2 * X), atol=1e-13)
    assert np.all(F.active[X < -1e-12] == 0) and np.all(F.active[X > 1e-12] == 1)


def test_max_three_branch(three_branch):
    F = max_configuration(three_branch, [0, 1, 2], SMALL)
    x, y = SMALL.Z.real, SMALL.Z.imag
    exact = np.maximum.reduce([0 * x, 4 * x + x * x - y * y, -x])
    assert np.abs(F.V - exact).max() < 1e-13


def test_singleton(three_branch):
    F = max_configuration(three_branch, [2], SMALL)
    assert np.all(F.active == 2)
    np.testing.assert_allclose(F.V, -SMALL.Z.real, atol=1e-14)


def test_bad_index_set(three_branch):
    with pytest.raises(InputError):
        max_configuration(three_branch, [0, 5], SMALL)


def _brute_force_count(k):
    seqs = [s for r in range(k + 1) for s in itertools.combinations(range(1, k + 1), r)
            if s and s[0] == 1 and s[-1] == k]
    return len(seqs) ** 2


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_enumeration_count(k):
    cfgs = enumerate_collinear_configurations(k)
    assert len(cfgs) == 4 ** (k - 2) == _brute_force_count(k)
    assert len(set(cfgs)) == len(cfgs)


def test_enumeration_k3_middle():
    cfgs = enumerate_collinear_configurations(3)
    assert sum(c.uses(2) for c in cfgs) == 3


def test_collinear_rejects_bad_sequences():
    with pytest.raises(InputError):
        CollinearConfiguration((1, 3), (2, 3))


def test_collinear_frame(three_branch):
    d, order = collinear_frame(three_branch, 0.0)
    assert abs(d - 1) < 1e-12
    assert order == (2, 0, 1)


def test_collinear_frame_rejects_triangle():
    H = tuple_from_constant_branches([0, 1, 0.5 + 0.5j])
    with pytest.raises(NotCollinear):
        collinear_frame(H)


def test_assemble_k2_equals_max(zero_and_2x):
    F = assemble_configuration(zero_and_2x, CollinearConfiguration((1, 2), (1, 2)), UNIT)
    G = max_configuration(zero_and_2x, [0, 1], UNIT)
    np.testing.assert_allclose(F.V, G.V, atol=1e-14)
    np.testing.assert_array_equal(F.active, G.active)


@pytest.mark.parametrize("cfg", enumerate_collinear_configurations(3), ids=str)
def test_assembled_three_branch_subharmonic(three_branch, cfg):
    F = assemble_configuration(three_branch, cfg, SMALL)
    rep = verify_subharmonic(F)
    assert rep["pass"], rep["violations"][:3]


def test_assembled_upper_123_lower_13(three_branch):
    F = assemble_configuration(three_branch, CollinearConfiguration((1, 2, 3), (1, 3)), SMALL)
    y = SMALL.Z.imag
    # collinear order is (H3, H1, H2); the middle position H1 is used only in the upper half
    assert not np.any(F.active[y < -1e-12] == 0)
    assert np.any(F.active[y > 0] == 0)


def test_min_envelope_fails(three_branch):
    F = envelope_configuration(three_branch, [0, 2], SMALL, "min")
    assert not verify_subharmonic(F)["pass"]


def test_max_and_min_of_zero_and_2x(zero_and_2x):
    assert verify_subharmonic(max_configuration(zero_and_2x, [0, 1], UNIT))["pass"]
    rep = verify_subharmonic(envelope_configuration(zero_and_2x, [0, 1], UNIT, "min"))
    assert rep["violations"]
    assert max(abs(v["x"]) for v in rep["violations"]) < 0.2


def _half_plane(phi, grid=UNIT):
    return RegionMask(grid, (grid.Z * np.exp(-1j * phi)).real > 0)


def test_forward_star_half_planes():
    assert verify_forward_star(_half_plane(0.0), (1, 0))
    assert not verify_forward_star(_half_plane(np.pi), (1, 0))


@pytest.mark.parametrize("quarter", [0, 1, 2, 3])
def test_forward_star_rotation_covariance(quarter):
    phi = quarter * np.pi / 2
    rot = np.exp(1j * phi)
    d = (round(rot.real), round(rot.imag))
    assert verify_forward_star(_half_plane(phi), d)
    assert not verify_forward_star(_half_plane(phi), (-d[0], -d[1]))
    g = np.array([0.3, 1.0, -0.5 + 0.2j]) * np.conj(rot)
    H = tuple_from_constant_branches(list(g))
    F = max_configuration(H, [0, 1, 2], UNIT)
    assert verify_forward_star(F.region(1), d)
    assert not verify_forward_star(F.region(1), (-d[0], -d[1]))


def test_lipschitz_vertical(zero_and_2x):
    est, _ = interface_lipschitz(max_configuration(zero_and_2x, [0, 1], UNIT), 1)
    assert est < 1e-9


def test_lipschitz_diagonal():
    theta = np.pi / 2
    H = tuple_from_constant_branches([1.0, np.exp(-1j * theta)])   # 2x and 2(cos x + sin y)
    F = max_configuration(H, [0, 1], UNIT)
    est, _ = interface_lipschitz(F, 0)
    assert abs(est - 1 / np.tan(theta / 2)) < 1e-6


def test_lipschitz_three_branch(three_branch):
    F = max_configuration(three_branch, [0, 1, 2], SMALL)
    g = 2 * np.conj(three_branch.branches(0.0))
    delta = separation_angle(g, 1)
    est, bound = interface_lipschitz(F, 1, delta)
    assert np.isfinite(est) and est <= bound


def test_upper_envelope_and_continuity(three_branch):
    F = max_configuration(three_branch, [0, 1, 2], SMALL)
    assert np.all(F.V[None] >= F.Hvals - 1e-9)
    G = 2 * np.abs(F.branches)
    assert max_adjacent_jump(F) <= 1.5 * G.max() * SMALL.h
    for cfg in enumerate_collinear_configurations(3):
        A = assemble_configuration(three_branch, cfg, SMALL)
        assert max_adjacent_jump(A) <= 1.5 * G.max() * SMALL.h


def test_argmax_invariance(three_branch):
    F = max_configuration(three_branch, [0, 1, 2], SMALL)
    G = max_configuration(three_branch.with_constants([0.37] * 3), [0, 1, 2], SMALL)
    np.testing.assert_array_equal(F.active, G.active)


def test_field_csv_one_based(tmp_path, zero_and_2x):
    F = max_configuration(zero_and_2x, [0, 1], Grid.square(0, 1, 5))
    F.write_csv(tmp_path / "f.csv")
    rows = (tmp_path / "f.csv").read_text().splitlines()
    assert rows[0] == "x,y,V,active_index"
    assert {r.split(",")[-1] for r in rows[1:]} == {"1", "2"}
