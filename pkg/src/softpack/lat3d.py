"""Three-dimensional lattices and their Dirichlet-Voronoi cells."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .errors import InvalidConfig, LambdaOutOfRange, NotAPacking, NumericalDegeneracy

__all__ = [
    "Lattice3D",
    "Polyhedron3D",
    "fcc",
    "bcc",
    "cubic",
    "load_lattice",
    "lll_reduce",
    "lattice_points",
    "minimal_vectors",
    "polyhedron_from_halfspaces",
    "dv_cell",
    "covering_radius",
    "soft_density_upper_bound",
    "BCC_COVERING",
    "LAMBDA_MAX",
]

BCC_COVERING = np.sqrt(5.0 / 3.0)
LAMBDA_MAX = BCC_COVERING - 1.0


@dataclass(frozen=True, eq=False)
class Lattice3D:
    """Lattice generated by the columns of ``basis``."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float).reshape(3, 3)
        if abs(np.linalg.det(b)) <= 1e-12 * max(1.0, np.abs(b).max()) ** 3:
            raise InvalidConfig("lattice basis is singular", "basis")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def generators(self):
        return self.basis.T

    @property
    def det(self):
        return abs(float(np.linalg.det(self.basis)))

    def transformed(self, A):
        return Lattice3D(np.asarray(A, float) @ self.basis)

    def reduced(self):
        return lll_reduce(self.generators)

    @property
    def min_vector_length(self):
        return float(np.linalg.norm(minimal_vectors(self)[0]))

    def is_packing(self, tol=1e-9):
        return self.min_vector_length >= 2.0 - tol


def fcc():
    """Face-centred cubic lattice with minimum distance 2."""
    return Lattice3D(np.sqrt(2.0) * np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]], float).T)


def bcc():
    """Body-centred cubic lattice with minimum distance 2."""
    a = 4.0 / np.sqrt(3.0)
    return Lattice3D(a * np.array([[1, 0, 0], [0, 1, 0], [0.5, 0.5, 0.5]]).T)


def cubic():
    return Lattice3D(2.0 * np.eye(3))


PRESETS = {"fcc": fcc, "bcc": bcc, "cubic": cubic}


def load_lattice(source):
    """Preset name, JSON file path, JSON string or dict with a ``basis`` (columns)."""
    if isinstance(source, Lattice3D):
        return source
    if isinstance(source, str):
        if source.lower() in PRESETS:
            return PRESETS[source.lower()]()
        p = Path(source)
        text = p.read_text() if p.exists() else source
        try:
            source = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"cannot read lattice {source!r}: {exc}", "lattice") from exc
    if isinstance(source, dict):
        if "preset" in source:
            return load_lattice(source["preset"])
        if "basis" not in source:
            raise InvalidConfig("lattice needs a 'basis'", "lattice")
        return Lattice3D(np.array(source["basis"], float))
    raise InvalidConfig(f"unsupported lattice source {type(source).__name__}", "lattice")


def lll_reduce(rows, delta=0.99):
    """LLL-reduce the rows of ``rows``."""
    b = np.array(rows, dtype=float)
    n = len(b)

    def gso(b):
        bs = np.zeros_like(b)
        mu = np.zeros((n, n))
        for i in range(n):
            bs[i] = b[i]
            for j in range(i):
                mu[i, j] = b[i] @ bs[j] / (bs[j] @ bs[j])
                bs[i] = bs[i] - mu[i, j] * bs[j]
        return bs, mu

    bs, mu = gso(b)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                b[k] -= q * b[j]
                bs, mu = gso(b)
        if bs[k] @ bs[k] >= (delta - mu[k, k - 1] ** 2) * (bs[k - 1] @ bs[k - 1]):
            k += 1
        else:
            b[[k, k - 1]] = b[[k - 1, k]]
            bs, mu = gso(b)
            k = max(k - 1, 1)
    return b


def lattice_points(lattice, radius, reduced=None):
    """All lattice vectors of Euclidean length at most ``radius``."""
    r = lattice.reduced() if reduced is None else reduced
    inv = np.linalg.inv(r)
    # coefficient k_i = <p, column i of inv>, so |k_i| <= radius * |column i|
    kmax = np.floor(radius * np.linalg.norm(inv, axis=0) + 1e-9).astype(int)
    axes = [np.arange(-k, k + 1) for k in kmax]
    k = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    p = k @ r
    return p[np.linalg.norm(p, axis=1) <= radius * (1 + 1e-12)]


def minimal_vectors(lattice, rtol=1e-9):
    r = lattice.reduced()
    m = np.linalg.norm(r, axis=1).min()
    p = lattice_points(lattice, m * (1 + 10 * rtol), r)
    n = np.linalg.norm(p, axis=1)
    p, n = p[n > 0], n[n > 0]
    shortest = n.min()
    out = p[n <= shortest * (1 + rtol)]
    return out[np.lexsort(out.T[::-1])]


@dataclass(frozen=True, eq=False)
class Polyhedron3D:
    """Convex polytope with merged planar faces.

    ``faces`` are vertex index arrays ordered counterclockwise seen from
    outside; ``normals`` are outward unit normals and ``offsets`` the
    support distances. ``triangles`` is an outward-oriented fan triangulation
    of the faces used for integrals, ``tri_face`` the face of each triangle.
    """

    vertices: np.ndarray
    faces: tuple
    normals: np.ndarray
    offsets: np.ndarray
    triangles: np.ndarray
    tri_face: np.ndarray

    @property
    def n_edges(self):
        e = set()
        for f in self.faces:
            for i in range(len(f)):
                a, b = int(f[i]), int(f[(i + 1) % len(f)])
                e.add((min(a, b), max(a, b)))
        return len(e)

    @property
    def euler_characteristic(self):
        return len(self.vertices) - self.n_edges + len(self.faces)

    def face_points(self, k):
        return self.vertices[self.faces[k]]

    def face_areas(self):
        out = []
        for k, f in enumerate(self.faces):
            p = self.vertices[f]
            c = np.cross(p - p[0], np.roll(p, -1, axis=0) - p[0]).sum(axis=0)
            out.append(0.5 * float(c @ self.normals[k]))
        return np.array(out)

    @property
    def volume(self):
        return float(np.sum(self.offsets * self.face_areas()) / 3.0)

    @property
    def circumradius(self):
        return float(np.linalg.norm(self.vertices, axis=1).max())

    @property
    def inradius(self):
        return float(self.offsets.min())

    def to_off(self):
        lines = ["OFF", f"{len(self.vertices)} {len(self.faces)} {self.n_edges}"]
        lines += [" ".join(f"{x:.12g}" for x in v) for v in self.vertices]
        lines += [" ".join(str(int(i)) for i in [len(f), *f]) for f in self.faces]
        return "\n".join(lines) + "\n"


def _interior_point(A, b):
    # Chebyshev center of {x : A x <= b}
    norms = np.linalg.norm(A, axis=1)
    res = linprog(np.r_[np.zeros(A.shape[1]), -1.0], A_ub=np.column_stack([A, norms]), b_ub=b,
                  bounds=[(None, None)] * A.shape[1] + [(None, None)], method="highs")
    if res.status != 0:
        return None, 0.0
    return res.x[:-1], float(res.x[-1])


def polyhedron_from_halfspaces(A, b, interior=None, tol=1e-9):
    """Bounded polytope ``{x : A x <= b}``; None if it has empty interior."""
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    if interior is None:
        interior, rad = _interior_point(A, b)
        if interior is None or rad <= tol * max(1.0, float(np.abs(b).max())):
            return None
    hs = HalfspaceIntersection(np.column_stack([A, -b]), np.asarray(interior, float))
    pts = hs.intersections
    diam = float(np.ptp(pts, axis=0).max())
    eps = tol * max(1.0, diam)
    # collapse vertices that qhull reports several times at degenerate corners
    keep = []
    for p in pts[np.lexsort(pts.T[::-1])]:
        if not keep or np.min(np.linalg.norm(np.array(keep) - p, axis=1)) > eps:
            keep.append(p)
    verts = np.array(keep)
    hull = ConvexHull(verts)
    verts = verts[hull.vertices]
    hull = ConvexHull(verts)
    tri = hull.simplices.copy()
    eq = hull.equations
    # orient each triangle outward
    for k, t in enumerate(tri):
        p = verts[t]
        if np.cross(p[1] - p[0], p[2] - p[0]) @ eq[k, :3] < 0:
            tri[k] = t[[0, 2, 1]]
    groups = []
    for k in range(len(eq)):
        for g in groups:
            if np.allclose(eq[g[0]], eq[k], atol=eps):
                g.append(k)
                break
        else:
            groups.append([k])
    faces, normals, offsets = [], [], []
    for g in groups:
        n = eq[g[0], :3]
        idx = np.unique(tri[g].ravel())
        p = verts[idx]
        c = p.mean(axis=0)
        e1 = p[0] - c
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        ang = np.arctan2((p - c) @ e2, (p - c) @ e1)
        faces.append(idx[np.argsort(ang)])
        normals.append(n)
        offsets.append(-eq[g[0], 3])
    # fans over merged faces; near-duplicate vertices make qhull slivers whose own normals are unreliable
    fan = [(f[0], f[i], f[i + 1], k) for k, f in enumerate(faces) for i in range(1, len(f) - 1)]
    fan = np.array(fan, dtype=int).reshape(-1, 4)
    poly = Polyhedron3D(verts, tuple(faces), np.array(normals), np.array(offsets), fan[:, :3], fan[:, 3])
    if poly.euler_characteristic != 2:
        raise NumericalDegeneracy(f"face identification gave Euler characteristic {poly.euler_characteristic}")
    return poly


def _covering_bound(reduced):
    return 0.5 * float(np.sqrt(np.sum(reduced * reduced)))


def dv_cell(lattice, tol=1e-9):
    """Dirichlet-Voronoi cell of the origin."""
    r = lattice.reduced()
    v = lattice_points(lattice, 2.0 * _covering_bound(r), r)
    v = v[np.linalg.norm(v, axis=1) > 0]
    poly = polyhedron_from_halfspaces(v, 0.5 * np.einsum("ij,ij->i", v, v), np.zeros(3), tol)
    vol = poly.volume
    if abs(vol - lattice.det) > 1e-9 * lattice.det:
        raise NumericalDegeneracy(f"cell volume {vol:.15g} differs from determinant {lattice.det:.15g}")
    return poly


def covering_radius(lattice):
    """Largest distance from a point of space to the lattice."""
    return dv_cell(lattice).circumradius


def soft_density_upper_bound(lam):
    """Upper bound on the soft density of any packing of unit balls in space.

    Valid for ``0 <= lam < sqrt(5/3) - 1``; the value at 0 is the limit from
    the right.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(~np.isfinite(lam)) or np.any(lam < 0) or np.any(lam >= LAMBDA_MAX):
        raise LambdaOutOfRange(f"lambda must lie in [0, {LAMBDA_MAX:.9f})")
    q = (BCC_COVERING - 1.0 - lam) / (11.0 * BCC_COVERING + 3.0 - lam)
    out = 1.0 - q ** 3
    return float(out) if out.ndim == 0 else out


def require_packing(lattice, tol=1e-9):
    m = lattice.min_vector_length
    if m < 2.0 - tol:
        raise NotAPacking(f"shortest lattice vector {m:.12g} < 2")
    return m
