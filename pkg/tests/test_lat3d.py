import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial import ConvexHull

from softpack.errors import InvalidConfig, LambdaOutOfRange, NotAPacking
from softpack.lat3d import (
    BCC_COVERING,
    LAMBDA_MAX,
    Lattice3D,
    bcc,
    covering_radius,
    cubic,
    dv_cell,
    fcc,
    lattice_points,
    lll_reduce,
    load_lattice,
    minimal_vectors,
    polyhedron_from_halfspaces,
    require_packing,
    soft_density_upper_bound,
)

well_conditioned = arrays(float, (3, 3), elements=st.floats(-2, 2)).filter(
    lambda m: abs(np.linalg.det(m)) > 0.3 and np.linalg.cond(m) < 20
)


def brute_points(lattice, radius, k=6):
    # oracle: plain coefficient box enumeration
    c = np.array(list(itertools.product(range(-k, k + 1), repeat=3)))
    p = c @ lattice.generators
    return p[np.linalg.norm(p, axis=1) <= radius]


class TestLattice:
    def test_singular(self):
        with pytest.raises(InvalidConfig):
            Lattice3D(np.ones((3, 3)))

    @pytest.mark.parametrize("factory,count", [(fcc, 12), (bcc, 8), (cubic, 6)])
    def test_minimal_vectors(self, factory, count):
        L = factory()
        mv = minimal_vectors(L)
        assert len(mv) == count
        assert np.allclose(np.linalg.norm(mv, axis=1), 2.0, atol=1e-12)
        assert L.is_packing()

    def test_determinants(self):
        assert fcc().det == pytest.approx(4 * np.sqrt(2), rel=1e-14)
        assert cubic().det == pytest.approx(8.0)
        assert bcc().det == pytest.approx(32 / (3 * np.sqrt(3)), rel=1e-14)

    def test_lattice_points_match_brute(self):
        L = fcc()
        a = lattice_points(L, 4.5)
        b = brute_points(L, 4.5)
        assert len(a) == len(b)
        key = lambda p: np.round(p, 9).tolist()
        assert sorted(map(key, a)) == sorted(map(key, b))

    @settings(max_examples=30, deadline=None)
    @given(ops=st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(-3, 3)), max_size=8))
    def test_lll_unimodular_invariance(self, ops):
        m = np.eye(3)
        for i, j, k in ops:
            if i != j:
                m[i] += k * m[j]
        # a unimodular change of basis gives the same reduced lattice
        L = fcc()
        rows = m @ L.generators
        r = lll_reduce(rows)
        assert abs(np.linalg.det(r)) == pytest.approx(L.det, rel=1e-9)
        coeffs = r @ np.linalg.inv(L.generators)
        assert np.allclose(coeffs, np.round(coeffs), atol=1e-8)
        assert np.linalg.norm(r, axis=1).min() == pytest.approx(2.0, rel=1e-9)

    def test_load(self, tmp_path):
        assert np.allclose(load_lattice("fcc").basis, fcc().basis)
        p = tmp_path / "l.json"
        p.write_text(json.dumps({"basis": (2 * np.eye(3)).tolist()}))
        assert load_lattice(str(p)).det == pytest.approx(8.0)
        with pytest.raises(InvalidConfig):
            load_lattice({"nothing": 1})

    def test_require_packing(self):
        with pytest.raises(NotAPacking):
            require_packing(Lattice3D(1.5 * np.eye(3)))
        assert require_packing(fcc()) == pytest.approx(2.0)


class TestCells:
    def test_fcc(self):
        V = dv_cell(fcc())
        assert len(V.faces) == 12
        assert len(V.vertices) == 14 and V.n_edges == 24
        assert V.volume == pytest.approx(4 * np.sqrt(2), abs=1e-9)
        assert np.allclose(V.face_areas(), np.sqrt(2), atol=1e-9)
        assert V.volume == pytest.approx(4 * V.face_areas()[0], abs=1e-9)
        assert np.allclose(V.offsets, 1.0)
        assert all(len(f) == 4 for f in V.faces)

    def test_bcc(self):
        V = dv_cell(bcc())
        assert len(V.faces) == 14
        assert sorted(len(f) for f in V.faces) == [4] * 6 + [6] * 8
        assert V.volume == pytest.approx(bcc().det, rel=1e-12)

    def test_cubic(self):
        V = dv_cell(cubic())
        assert len(V.faces) == 6 and V.volume == pytest.approx(8.0)

    def test_fcc_face_transitive(self):
        # every face is carried to every other by a cubic symmetry fixing the cell
        V = dv_cell(fcc())
        signs = list(itertools.product([1, -1], repeat=3))
        perms = list(itertools.permutations(range(3)))
        sym = [np.diag(s)[:, p] for s in signs for p in perms]
        n = V.normals
        for k in range(len(n)):
            images = {tuple(np.round(n[0] @ g.T, 9)) for g in sym}
            assert tuple(np.round(n[k], 9)) in images
        for g in sym:
            moved = np.round(V.vertices @ g.T, 9)
            assert sorted(map(tuple, moved)) == sorted(map(tuple, np.round(V.vertices, 9)))

    def test_covering_radii(self):
        assert covering_radius(bcc()) == pytest.approx(np.sqrt(5 / 3), abs=1e-9)
        assert covering_radius(fcc()) == pytest.approx(np.sqrt(2), abs=1e-9)
        assert covering_radius(cubic()) == pytest.approx(np.sqrt(3), abs=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(m=well_conditioned)
    def test_volume_equals_det(self, m):
        L = Lattice3D(m)
        V = dv_cell(L)
        assert V.volume == pytest.approx(L.det, rel=1e-9)
        assert V.euler_characteristic == 2
        # the cell is centrally symmetric
        assert np.allclose(sorted(map(tuple, np.round(-V.vertices, 7))), sorted(map(tuple, np.round(V.vertices, 7))))
        assert ConvexHull(V.vertices).volume == pytest.approx(V.volume, rel=1e-9)

    def test_cube_from_halfspaces(self):
        A = np.vstack([np.eye(3), -np.eye(3)])
        P = polyhedron_from_halfspaces(A, np.ones(6))
        assert P.volume == pytest.approx(8.0) and len(P.faces) == 6
        assert polyhedron_from_halfspaces(A, np.r_[np.ones(3), -np.ones(3) * 1.5]) is None

    def test_off(self):
        off = dv_cell(fcc()).to_off()
        lines = off.strip().splitlines()
        assert lines[0] == "OFF" and lines[1] == "14 12 24"
        assert len(lines) == 2 + 14 + 12


class TestBound:
    def test_direct_value(self):
        s = np.sqrt(5 / 3)
        lam = 0.25
        direct = 1 - ((s - 1 - lam) / (11 * s + 3 - lam)) ** 3
        assert soft_density_upper_bound(lam) == pytest.approx(direct, abs=1e-15)
        assert soft_density_upper_bound(lam) == pytest.approx(0.999999986, abs=1e-9)

    def test_monotone_and_below_one(self):
        lam = np.linspace(0, LAMBDA_MAX, 1000, endpoint=False)
        b = soft_density_upper_bound(lam)
        assert np.all(np.diff(b) > 0) and np.all(b < 1)

    def test_domain(self):
        for bad in (-0.01, LAMBDA_MAX, 1.0, np.nan):
            with pytest.raises(LambdaOutOfRange):
                soft_density_upper_bound(bad)

    def test_constants(self):
        assert BCC_COVERING == pytest.approx(1.2909944, abs=1e-7)
