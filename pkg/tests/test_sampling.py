import numpy as np
import pytest

from fgmpinn.network import ConfigError
from fgmpinn.sampling import NodeSet, plate_with_hole, uniform_1d, uniform_grid_2d


def test_uniform_1d_midpoints_and_weights():
    ns = uniform_1d(50)
    assert len(ns) == 50 and ns.measure == pytest.approx(1.0)
    assert ns.x[0, 0] == pytest.approx(0.01)
    # midpoint rule integrates linear functions exactly
    assert ns.integrate(3 * ns.x[:, 0] + 1) == pytest.approx(2.5)
    assert ns.boundaries["right"].x[0, 0] == 1.0


def test_grid_2d_measure_and_edges():
    ns = uniform_grid_2d(30, 90, 1.0)
    assert len(ns) == 2700 and ns.measure == pytest.approx(3.0)
    assert ns.boundaries["top"].w.sum() == pytest.approx(1.0)
    assert ns.boundaries["left"].w.sum() == pytest.approx(3.0)
    np.testing.assert_array_equal(ns.boundaries["top"].n[0], [0.0, 1.0])


@pytest.mark.parametrize("side,res", [(1.0, 45), (0.5, 30), (1.0, 10)])
def test_plate_with_hole_area_and_boundary_lengths(side, res):
    a = 0.1
    ns = plate_with_hole(a, side, res)
    exact = side**2 - np.pi * a * a / 4
    assert ns.measure == pytest.approx(exact, rel=2e-3 if res == 10 else 2e-4)
    assert ns.boundaries["right"].w.sum() == pytest.approx(side)
    assert ns.boundaries["top"].w.sum() == pytest.approx(side)
    assert ns.boundaries["hole"].w.sum() == pytest.approx(np.pi * a / 2)
    r = np.hypot(*ns.x.T)
    assert r.min() > a and ns.x.max() < side
    assert np.all(ns.w > 0)


def test_plate_nodes_are_finer_at_hole():
    ns = plate_with_hole(0.1, 1.0, 30)
    r = np.hypot(*ns.x.T)
    assert ns.w[r < 0.15].mean() < 0.05 * ns.w[r > 0.8].mean()


def test_outer_strip_is_refined():
    # the unsampled strip along the loaded edge shrinks with each halving
    def gap(refine):
        ns = plate_with_hole(0.1, 1.0, 45, refine)
        right = ns.boundaries["right"].x
        d = np.hypot(*(ns.x[None, :, :] - right[:, None, :]).transpose(2, 0, 1)).min(axis=1)
        return d.max()
    coarse, fine = gap(0), gap(3)
    assert coarse > 0.03 and fine < coarse / 6
    assert len(plate_with_hole(0.1, 1.0, 6, 2).x) == 2 * 6 * 8


def test_hole_normals_point_into_the_hole():
    g = plate_with_hole(0.1, 1.0, 8).boundaries["hole"]
    np.testing.assert_allclose(np.sum(g.n * g.x, axis=1), -0.1, rtol=1e-12)


def test_csv_round_trip(tmp_path):
    ns = plate_with_hole(0.1, 1.0, 6)
    path = tmp_path / "nodes.csv"
    ns.to_csv(path)
    back = NodeSet.from_csv(path)
    np.testing.assert_array_equal(back.x, ns.x)
    np.testing.assert_array_equal(back.w, ns.w)
    assert set(back.boundaries) == set(ns.boundaries)
    np.testing.assert_array_equal(back.boundaries["hole"].n, ns.boundaries["hole"].n)


def test_invalid_geometry():
    with pytest.raises(ConfigError):
        plate_with_hole(1.0, 1.0, 10)
    with pytest.raises(ConfigError):
        uniform_1d(1)
    with pytest.raises(ConfigError):
        uniform_grid_2d(1, 5)
