import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softpack.errors import BodyNotThreefold, DegenerateQuadruple, InvalidConfig, LambdaOutOfRange, NotAPacking, ZeroAreaCell
from softpack.gauge2d import dodecagon, euclidean_surrogate, gauge_norm, hexagon, rotation, square
from softpack.soft2d import (
    Lattice2D,
    SoftParams,
    apex_monotonicity_check,
    arc_map_check,
    base_monotonicity_check,
    cell_soft_density,
    direction_scan,
    disk_triangle_lattice_density,
    lattice_soft_density,
    linear_map_arc_check,
    optimal_lattice_search,
    saturation_threshold,
    soft_ratio,
    triangle_lattice,
    window_soft_density,
)
from softpack.tess2d import RefinedCell, random_saturated_config, tessellate

E = euclidean_surrogate()
TRI = Lattice2D([[2.0, 0.0], [1.0, np.sqrt(3.0)]])


def grid_density(lattice, body, lam, n=400):
    # oracle: midpoint grid over the fundamental parallelogram
    b = lattice.reduced()
    s = (np.arange(n) + 0.5) / n
    st_ = np.stack(np.meshgrid(s, s), -1).reshape(-1, 2)
    x = st_ @ b
    pts = lattice.points((1 + lam) * body.outer_radius + 2 * np.abs(b).sum())
    covered = np.zeros(len(x), bool)
    for p in pts:
        covered |= gauge_norm(body, x - p) <= 1 + lam
    return covered.mean()


class TestLattice2D:
    def test_dependent_basis(self):
        with pytest.raises(InvalidConfig):
            Lattice2D([[1, 2], [2, 4]])

    def test_reduction_preserves_lattice(self):
        L = Lattice2D([[2.0, 0.0], [7.0, np.sqrt(3.0)]])
        r = L.reduced()
        assert abs(np.linalg.det(r)) == pytest.approx(L.det)
        assert np.allclose(sorted(np.linalg.norm(r, axis=1)), [2.0, 2.0])

    def test_min_gauge(self):
        assert TRI.min_gauge(E) == pytest.approx(2.0, abs=1e-3)
        assert Lattice2D([[2, 0], [0, 2]]).min_gauge(square()) == pytest.approx(2.0)
        assert Lattice2D([[2, 0], [2, 2]]).min_gauge(square()) == pytest.approx(2.0)

    def test_points(self):
        p = TRI.points(2.0 + 1e-9)
        assert len(p) == 7


class TestDensity:
    def test_zero_lambda_euclid(self):
        # 96-gon area over triangle-lattice cell
        lat = triangle_lattice(E, 0.0)
        assert lattice_soft_density(lat, E, 0.0) == pytest.approx(E.area / lat.det, rel=1e-12)
        assert lattice_soft_density(lat, E, 0.0) == pytest.approx(np.pi / np.sqrt(12), abs=2e-3)

    def test_euclid_examples(self):
        lat = triangle_lattice(E, 0.0)
        assert lattice_soft_density(lat, E, 0.1) == pytest.approx(0.991459, abs=2e-3)
        assert lattice_soft_density(lat, E, 2 / np.sqrt(3) - 1) == pytest.approx(1.0, abs=1e-3)

    def test_circle_formula(self):
        assert disk_triangle_lattice_density(0.0) == pytest.approx(np.pi / np.sqrt(12), rel=1e-15)
        assert disk_triangle_lattice_density(0.2) == 1.0
        lat = triangle_lattice(E, 0.0)
        for lam in (0.02, 0.05, 0.1, 0.15):
            assert lattice_soft_density(lat, E, lam) == pytest.approx(disk_triangle_lattice_density(lam), abs=2e-3)

    def test_frozen_values(self):
        lat = triangle_lattice(E, 0.0)
        assert lattice_soft_density(lat, E, 0.1) == pytest.approx(0.990378802, abs=1e-8)
        assert disk_triangle_lattice_density(0.1) == pytest.approx(0.990517407620, abs=1e-11)

    @pytest.mark.parametrize("body", [E, hexagon(), square()], ids=["euclid", "hex", "sq"])
    def test_grid_oracle(self, body):
        lat = Lattice2D([[2.0, 0.0], [0.7, 2.4]])
        lam = 0.12
        assert lattice_soft_density(lat, body, lam) == pytest.approx(grid_density(lat, body, lam), abs=5e-3)

    def test_hexagon_tiles(self):
        h = hexagon()
        assert lattice_soft_density(triangle_lattice(h, np.pi / 6), h, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_not_a_packing(self):
        with pytest.raises(NotAPacking):
            lattice_soft_density(Lattice2D([[1.5, 0], [0, 3]]), E, 0.1)

    def test_negative_lambda(self):
        with pytest.raises(LambdaOutOfRange):
            lattice_soft_density(TRI, E, -0.1)
        with pytest.raises(LambdaOutOfRange):
            SoftParams(-1.0)

    def test_soft_params_warns_when_saturated(self):
        with pytest.warns(UserWarning):
            SoftParams(0.2, E)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            SoftParams(0.1, E)

    def test_saturation_threshold(self):
        assert saturation_threshold(E) == pytest.approx(2 / np.sqrt(3) - 1, abs=2e-3)
        assert saturation_threshold(hexagon()) == pytest.approx(0.0, abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(l1=st.floats(0, 0.2), l2=st.floats(0, 0.2))
    def test_monotone_in_lambda(self, l1, l2):
        lo, hi = sorted((l1, l2))
        a = lattice_soft_density(TRI, E, lo)
        b = lattice_soft_density(TRI, E, hi)
        assert 0 <= a <= b + 1e-12 <= 1 + 1e-12

    def test_soft_ratio_zero_area(self):
        with pytest.raises(ZeroAreaCell):
            soft_ratio([(0, 0), (1, 0), (2, 0)], [(0, 0)], E, 0.1)

    def test_cell_soft_density_zero_area(self):
        cell = RefinedCell(np.zeros(2), np.array([2.0, 0]), np.array([1.0, 0]), np.array([1.0, 0]), 0, 1, 0, None)
        with pytest.raises(ZeroAreaCell):
            cell_soft_density(cell, E, 0.1)


class TestOptimalSearch:
    def test_requires_threefold(self):
        with pytest.raises(BodyNotThreefold):
            optimal_lattice_search(square(), 0.1, direction_samples=12)

    def test_hexagon_is_one(self):
        res = optimal_lattice_search(hexagon(), 0.05, direction_samples=120)
        assert res.density == pytest.approx(1.0, abs=1e-12)

    def test_euclid_directions_agree(self):
        _, dens = direction_scan(E, 0.1, samples=24)
        assert np.ptp(dens) < 2e-3

    def test_rotation_period(self):
        body = dodecagon()
        a = lattice_soft_density(triangle_lattice(body, 0.3), body, 0.05)
        b = lattice_soft_density(triangle_lattice(body, 0.3 + 2 * np.pi / 3), body, 0.05)
        assert a == pytest.approx(b, abs=1e-12)

    def test_dodecagon_beats_perturbed_lattices(self):
        body = dodecagon()
        lam = 0.05
        rng = np.random.default_rng(9)
        comps = []
        base = triangle_lattice(body, 0.0).basis
        for _ in range(100):
            B = base @ (np.eye(2) + rng.normal(scale=0.15, size=(2, 2)))
            L = Lattice2D(B)
            comps.append(Lattice2D(L.basis * 2.0 / L.min_gauge(body)))
        res = optimal_lattice_search(body, lam, direction_samples=180, competitors=comps)
        assert res.density == pytest.approx(0.96737, abs=1e-4)
        assert res.density >= res.sampled_max
        assert max(res.competitor_densities) <= res.density + 1e-9


class TestSweeps:
    @pytest.mark.parametrize("body", [E, dodecagon(), hexagon()], ids=["euclid", "12", "hex"])
    def test_apex(self, body):
        rep = apex_monotonicity_check(body, 0.1, trials=60, seed=1)
        assert rep.ok and rep.trials > 30

    @pytest.mark.parametrize("body", [E, dodecagon()], ids=["euclid", "12"])
    def test_base(self, body):
        rep = base_monotonicity_check(body, 0.1, trials=40, seed=1)
        assert rep.ok and rep.trials > 20

    def test_apex_explicit_pair(self):
        a, b = np.zeros(2), np.array([2.0, 0.0])
        far, near = np.array([1.0, 1.5]), np.array([1.0, 0.6])
        rep = apex_monotonicity_check(E, 0.1, apex_pairs=[(a, b, far, near)])
        assert rep.trials == 1 and rep.ok and rep.max_excess < 0
        bad = apex_monotonicity_check(E, 0.1, apex_pairs=[(a, b, near, far)])
        assert not bad.ok

    def test_base_equal_lengths_is_equality(self):
        rep = base_monotonicity_check(E, 0.1, pairs=[(2.0, (1.0, 0.0), 3.0, 3.0)])
        assert rep.ok and rep.equalities == 1

    def test_arc_identity(self):
        x, y = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        outer, inner = arc_map_check(square(), x, x, y, y)
        assert outer == pytest.approx(1.0) and inner <= 1.0 + 1e-12

    def test_arc_sweep(self):
        rep = linear_map_arc_check(E, trials=60, seed=2)
        assert rep.ok and rep.trials > 30

    def test_degenerate_quadruple(self):
        with pytest.raises(DegenerateQuadruple):
            arc_map_check(E, (1, 0), (0, 1), (-1, 0), (0, -1))

    def test_report_dict(self):
        rep = linear_map_arc_check(E, trials=5, seed=0)
        d = rep.as_dict()
        assert set(d) == {"trials", "violations", "equalities", "max_excess", "skipped"}


class TestWindow:
    def test_window_density_below_lattice(self):
        body = dodecagon()
        cfg = random_saturated_config(body, (0, 0, 16, 16), np.random.default_rng(3))
        tess = tessellate(cfg, max_circumradius=2)
        d, n = window_soft_density(cfg, 0.05, tess)
        assert n > 0 and 0 < d < 0.96737

    def test_lattice_window_matches_lattice_density(self):
        from softpack.tess2d import lattice_config

        lat = triangle_lattice(E, 0.0)
        cfg = lattice_config(E, lat.basis, (-9, -9, 9, 9))
        d, n = window_soft_density(cfg, 0.1)
        assert n > 10
        assert d == pytest.approx(lattice_soft_density(lat, E, 0.1), abs=1e-9)

    def test_rotated_lattice_invariance(self):
        # rotating the body and lattice together by 120 degrees leaves the density unchanged
        body = dodecagon()
        lat = triangle_lattice(body, 0.2)
        R = rotation(2 * np.pi / 3)
        lat2 = Lattice2D(lat.basis @ R.T)
        assert lattice_soft_density(lat2, body, 0.05) == pytest.approx(lattice_soft_density(lat, body, 0.05), abs=1e-12)
