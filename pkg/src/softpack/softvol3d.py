"""Soft densities of lattice ball packings in space.

Volumes of ``P ∩ rB`` are computed exactly by coning every boundary
triangle of ``P`` from the ball center; along a ray through a face point at
distance ``s`` only the part within ``min(s, r)`` counts, which leaves a one
dimensional radial integral with a closed form. A scrambled Sobol estimate
is provided as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.stats import qmc

from .errors import CoincidentCenters, DegenerateDeformation, InvalidConfig, LambdaOutOfRange, NotAPacking
from .lat3d import dv_cell, fcc, minimal_vectors, polyhedron_from_halfspaces

__all__ = [
    "polygon_disk_area",
    "ball_polytope_volume",
    "ball_polytope_volume_mc",
    "soft_density_3d",
    "fcc_cap_volume",
    "BallCluster",
    "WallSet",
    "csikos_walls",
    "csikos_derivative",
    "pair_speeds",
    "union_volume",
    "face_walls",
    "fcc_deformation",
    "local_max_experiment",
]


def _edge_terms(p1, p2):
    """Perpendicular distance and angular limits of the edges ``p1 -> p2`` seen from the origin."""
    e = p2 - p1
    ln = np.linalg.norm(e, axis=-1)
    t = e / ln[..., None]
    cr = p1[..., 0] * p2[..., 1] - p1[..., 1] * p2[..., 0]
    d = np.abs(cr) / ln
    s1 = np.einsum("...i,...i->...", p1, t)
    s2 = np.einsum("...i,...i->...", p2, t)
    return np.sign(cr), d, np.arctan2(s1, d), np.arctan2(s2, d)


def polygon_disk_area(poly, radius, center=(0.0, 0.0)):
    """Exact area of a simple polygon intersected with a disk."""
    p = np.asarray(poly, float) - np.asarray(center, float)
    if len(p) < 3 or radius <= 0:
        return 0.0
    q = np.roll(p, -1, axis=0)
    sg, d, a1, a2 = _edge_terms(p, q)
    r2 = radius * radius
    with np.errstate(invalid="ignore", divide="ignore"):
        pstar = np.where(d < radius, np.arccos(np.minimum(d / radius, 1.0)), 0.0)

    def F(psi):
        a = np.abs(psi)
        inner = 0.5 * d * d * np.tan(np.minimum(a, pstar))
        outer = 0.5 * r2 * (a - np.minimum(a, pstar))
        return np.sign(psi) * (inner + outer)

    ok = d > 0
    return float(np.sum((sg * (F(a2) - F(a1)))[ok]))


def _face_contributions(tri, r, normals=None):
    """Signed cone volumes of the triangles ``tri`` (k, 3, 3) clipped to ``rB``.

    ``normals`` are the outward unit normals of the supporting planes; by
    default they come from the triangles themselves.
    """
    p0, p1, p2 = tri[:, 0], tri[:, 1], tri[:, 2]
    if normals is None:
        n = np.cross(p1 - p0, p2 - p0)
        n /= np.linalg.norm(n, axis=1)[:, None]
    else:
        n = np.asarray(normals, float)
    h = np.einsum("ic,ivc->i", n, tri) / 3.0
    foot = h[:, None] * n
    e1 = p0 - foot
    ln = np.linalg.norm(e1, axis=1)
    bad = ln < 1e-14
    e1[bad] = (p1 - foot)[bad]
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(n, e1)
    q = np.stack([np.stack([np.einsum("ij,ij->i", v - foot, e1), np.einsum("ij,ij->i", v - foot, e2)], axis=-1)
                  for v in (p0, p1, p2)], axis=1)
    a2 = np.maximum(r * r - h * h, 0.0)
    a = np.sqrt(a2)
    L = np.maximum(r, np.abs(h))
    r3 = r ** 3
    total = np.zeros(len(tri))
    for i in range(3):
        u, v = q[:, i], q[:, (i + 1) % 3]
        sg, d, s1, s2 = _edge_terms(u, v)
        with np.errstate(invalid="ignore", divide="ignore"):
            pstar = np.where(d < a, np.arccos(np.minimum(d / np.where(a > 0, a, 1.0), 1.0)), 0.0)
            habs = np.abs(h)
            rho = np.sqrt(h * h + d * d)

            def outer(x):
                # antiderivative of a^2/6 + r^3/(3L) - r^3/(3 sqrt(h^2 + d^2 sec^2))
                small = habs < 1e-12 * np.maximum(rho, 1e-300)
                asin = np.where(small, np.sin(x) / np.where(rho > 0, rho, 1.0),
                                np.arcsin(np.clip(habs * np.sin(x) / np.where(rho > 0, rho, 1.0), -1, 1))
                                / np.where(small, 1.0, habs))
                return (a2 / 6 + r3 / (3 * L)) * x - r3 / 3 * asin

            def F(psi):
                x = np.abs(psi)
                m = np.minimum(x, pstar)
                val = d * d * np.tan(m) / 6 + outer(x) - outer(m)
                return np.sign(psi) * val

            term = sg * (F(s2) - F(s1))
        total += np.where(d > 1e-300, term, 0.0)
    return h * total


def ball_polytope_volume(poly, r, center=(0.0, 0.0, 0.0)):
    """Exact volume of ``poly ∩ (center + r B)``. The center may lie outside ``poly``."""
    if r <= 0:
        return 0.0
    c = np.asarray(center, float)
    tri = poly.vertices[poly.triangles] - c
    return float(np.sum(_face_contributions(tri, float(r), poly.normals[poly.tri_face])))


def ball_polytope_volume_mc(poly, r, samples=2 ** 20, seed=0, center=(0.0, 0.0, 0.0), block=2 ** 20):
    """Scrambled Sobol estimate of ``vol(poly ∩ (center + r B))``."""
    c = np.asarray(center, float)
    lo = np.maximum(poly.vertices.min(axis=0), c - r)
    hi = np.minimum(poly.vertices.max(axis=0), c + r)
    if np.any(hi <= lo):
        return 0.0
    A, b = _symmetric_half(poly.normals, poly.offsets)
    absolute = len(A) < len(poly.normals)
    # work relative to the ball center, one row per coordinate
    shift = (lo - c).astype(np.float32)[:, None]
    span = (hi - lo).astype(np.float32)[:, None]
    # the halved test |A p| <= b needs polytope coordinates p = x + c
    Ac = (A @ c).astype(np.float32)[:, None]
    bf = b.astype(np.float32)[:, None]
    Af = A.astype(np.float32)
    r2 = np.float32(r * r)
    eng = qmc.Sobol(3, scramble=True, seed=seed)
    hits = 0
    done = 0
    while done < samples:
        m = min(block, samples - done)
        x = np.ascontiguousarray(eng.random(m).T, dtype=np.float32)
        x *= span
        x += shift
        rr = x[0] * x[0]
        rr += x[1] * x[1]
        rr += x[2] * x[2]
        rr -= r2
        s = Af @ x
        s += Ac
        if absolute:
            np.abs(s, out=s)
        s -= bf
        worst = s.max(axis=0)
        np.maximum(worst, rr, out=worst)
        hits += int(np.count_nonzero(worst <= 0))
        done += m
    return float(np.prod(hi - lo) * hits / samples)


def _symmetric_half(A, b):
    # for a centrally symmetric polytope keep one normal of each opposite pair
    keep, used = [], set()
    for i in range(len(A)):
        if i in used:
            continue
        j = [k for k in range(len(A)) if k not in used and k != i and np.allclose(A[k], -A[i], atol=1e-12)
             and abs(b[k] - b[i]) <= 1e-12 * max(1.0, abs(b[i]))]
        if not j:
            return A, b
        used.update((i, j[0]))
        keep.append(i)
    return A[keep], b[keep]


def fcc_cap_volume(lam):
    """Closed form of ``vol(V ∩ (1+lam)B)`` for the FCC cell, valid while the caps stay inside the faces."""
    r = 1.0 + lam
    if r <= 1.0:
        return 4.0 / 3.0 * np.pi * r ** 3
    if r * r > 4.0 / 3.0:
        raise ValueError("cap formula needs (1+lam)^2 <= 4/3")
    cap = np.pi * (r - 1.0) ** 2 * (3 * r - (r - 1.0)) / 3.0
    return 4.0 / 3.0 * np.pi * r ** 3 - 12.0 * cap


def soft_density_3d(lattice, lam, check_packing=True, tol=1e-9):
    """Fraction of space covered by the radius ``1+lam`` balls around the lattice points."""
    if not np.isfinite(lam) or lam < 0:
        raise LambdaOutOfRange(f"soft parameter must be nonnegative, got {lam}")
    if check_packing:
        m = float(np.linalg.norm(minimal_vectors(lattice)[0]))
        if m < 2.0 - tol:
            raise NotAPacking(f"shortest lattice vector {m:.12g} < 2")
    cell = dv_cell(lattice)
    return min(1.0, ball_polytope_volume(cell, 1.0 + lam) / cell.volume)


def face_walls(cell, r):
    """Area of each face of ``cell`` inside the ball ``rB``."""
    out = np.zeros(len(cell.faces))
    for k, f in enumerate(cell.faces):
        h = cell.offsets[k]
        if abs(h) >= r:
            continue
        out[k] = _planar_disk(cell.vertices[f], cell.normals[k], h, np.sqrt(r * r - h * h), np.zeros(3))
    return out


def _planar_disk(pts, n, h, rad, center):
    # area of the planar polygon pts (normal n) within the disk of radius rad around the foot of center
    foot = center + (h - n @ center) * n
    e1 = pts[0] - foot
    if np.linalg.norm(e1) < 1e-14:
        e1 = pts[1] - foot
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    q = np.column_stack([(pts - foot) @ e1, (pts - foot) @ e2])
    return polygon_disk_area(q, rad)


@dataclass(frozen=True, eq=False)
class BallCluster:
    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        c = np.array(self.centers, float).reshape(-1, 3)
        r = np.broadcast_to(np.array(self.radii, float), (len(c),)).copy()
        if np.any(r <= 0):
            raise InvalidConfig("radii must be positive", "radii")
        for i, j in combinations(range(len(c)), 2):
            if np.linalg.norm(c[i] - c[j]) <= 1e-12 * max(1.0, float(np.abs(c).max())):
                raise CoincidentCenters(f"centers {i} and {j} coincide")
        c.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)

    def __len__(self):
        return len(self.centers)

    def moved(self, centers):
        return BallCluster(centers, self.radii)

    def power_halfspaces(self, i):
        """Rows ``(A, b)`` with ``C_i = {p : A p <= b}``."""
        x, r = self.centers, self.radii
        j = np.array([k for k in range(len(x)) if k != i], dtype=int)
        A = 2.0 * (x[j] - x[i])
        b = np.einsum("ij,ij->i", x[j], x[j]) - x[i] @ x[i] - r[j] ** 2 + r[i] ** 2
        return A, b, j


@dataclass
class WallSet:
    areas: dict = field(default_factory=dict)
    cell_faces: dict = field(default_factory=dict)

    def area(self, i, j):
        return self.areas.get((min(i, j), max(i, j)), 0.0)

    def matrix(self, n):
        w = np.zeros((n, n))
        for (i, j), a in self.areas.items():
            w[i, j] = w[j, i] = a
        return w


def _clip(poly, a, b):
    # Sutherland-Hodgman clip of a convex polygon by {q : a.q <= b}
    if len(poly) == 0:
        return poly
    out = []
    s = poly @ a - b
    for k in range(len(poly)):
        p, q = poly[k], poly[(k + 1) % len(poly)]
        sp, sq = s[k], s[(k + 1) % len(poly)]
        if sp <= 0:
            out.append(p)
        if sp * sq < 0:
            out.append(p + (q - p) * (sp / (sp - sq)))
    return np.array(out).reshape(-1, 2)


def csikos_walls(cluster):
    """Areas of the walls between every pair of balls.

    The wall of ``i, j`` lies on their radical plane, inside both balls and
    inside every other power inequality.
    """
    x, r = cluster.centers, cluster.radii
    ws = WallSet()
    n = len(x)
    for i, j in combinations(range(n), 2):
        dvec = x[j] - x[i]
        dist = np.linalg.norm(dvec)
        if dist >= r[i] + r[j] or dist <= abs(r[i] - r[j]):
            ws.areas[(i, j)] = 0.0
            continue
        nrm = dvec / dist
        # signed distance of the radical plane from x_i along nrm
        s = (dist * dist + r[i] ** 2 - r[j] ** 2) / (2 * dist)
        rad = np.sqrt(max(r[i] ** 2 - s * s, 0.0))
        foot = x[i] + s * nrm
        e1 = np.cross(nrm, [1.0, 0.0, 0.0])
        if np.linalg.norm(e1) < 0.5:
            e1 = np.cross(nrm, [0.0, 1.0, 0.0])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(nrm, e1)
        poly = rad * 1.01 * np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], float)
        A, b, idx = cluster.power_halfspaces(i)
        for row, rhs, k in zip(A, b, idx):
            if k == j:
                continue
            # p = foot + u e1 + v e2
            a2 = np.array([row @ e1, row @ e2])
            poly = _clip(poly, a2, rhs - row @ foot)
            if len(poly) < 3:
                break
        ws.areas[(i, j)] = polygon_disk_area(poly, rad) if len(poly) >= 3 else 0.0
    return ws


def pair_speeds(centers, velocities):
    """Derivatives of the pairwise distances for straight-line motion."""
    x = np.asarray(centers, float)
    v = np.asarray(velocities, float)
    n = len(x)
    out = np.zeros((n, n))
    for i, j in combinations(range(n), 2):
        d = x[i] - x[j]
        out[i, j] = out[j, i] = d @ (v[i] - v[j]) / np.linalg.norm(d)
    return out


def csikos_derivative(cluster, speeds, walls=None):
    """Derivative of the union volume from pairwise distance speeds and wall areas.

    ``speeds`` is an (n, n) array or a mapping ``(i, j) -> speed``.
    """
    walls = csikos_walls(cluster) if walls is None else walls
    n = len(cluster)
    if isinstance(speeds, dict):
        sp = np.zeros((n, n))
        for (i, j), s in speeds.items():
            sp[i, j] = sp[j, i] = s
    else:
        sp = np.asarray(speeds, float)
    return float(sum(sp[i, j] * walls.area(i, j) for i, j in combinations(range(n), 2)))


def union_volume(cluster):
    """Exact volume of the union of the balls, summed over power cells."""
    x, r = cluster.centers, cluster.radii
    total = 0.0
    for i in range(len(x)):
        A, b, _ = cluster.power_halfspaces(i)
        box_A = np.vstack([np.eye(3), -np.eye(3)])
        box_b = np.r_[x[i] + 1.01 * r[i], -(x[i] - 1.01 * r[i])]
        cell = polyhedron_from_halfspaces(np.vstack([A, box_A]), np.r_[b, box_b])
        if cell is None:
            continue
        total += ball_polytope_volume(cell, r[i], x[i])
    return total


def fcc_deformation(rng, mode="constrained", vectors=None):
    """Random unit-norm deformation direction ``S`` for the FCC lattice.

    ``constrained`` draws the speeds of the six minimal-vector pairs from
    [0, 1), not all zero, and solves for the symmetric part; a random skew
    part is added. ``free`` draws all nine entries at random.
    """
    x = minimal_vectors(fcc()) if vectors is None else vectors
    pairs = x[[k for k in range(len(x)) if any(np.allclose(x[k], -x[m]) and m > k for m in range(len(x)))]]
    if mode == "free":
        S = rng.standard_normal((3, 3))
    else:
        q = rng.random(len(pairs))
        while not np.any(q > 0):
            q = rng.random(len(pairs))
        # <x, S x> = 2 q for each pair, S symmetric (6 unknowns)
        iu = np.triu_indices(3)
        M = np.array([[p[a] * p[b] * (1 if a == b else 2) for a, b in zip(*iu)] for p in pairs])
        s = np.linalg.solve(M, 2.0 * q)
        S = np.zeros((3, 3))
        S[iu] = s
        S = S + np.triu(S, 1).T
        K = rng.standard_normal((3, 3))
        S = S + 0.5 * (K - K.T) * rng.random()
    return S / np.linalg.norm(S)


def _speeds(S, x):
    return np.einsum("ij,jk,ik->i", x, S, x) / np.linalg.norm(x, axis=1)


def local_max_experiment(lam, trials=200, t_values=(1e-3, 1e-2), seed=0, fd_step=1e-5, mode="constrained",
                         max_resample=100):
    """Deform FCC along random directions and compare soft densities.

    Each trial records the speeds of the twelve neighbours, the analytic
    derivative of the soft density from face and wall areas, a central
    finite difference, and the densities at ``t_values``.
    """
    if not 0 < lam < np.sqrt(2.0) - 1:
        raise LambdaOutOfRange("need 0 < lambda < sqrt(2) - 1")
    base = fcc()
    x = minimal_vectors(base)
    cell = dv_cell(base)
    r = 1.0 + lam
    # faces of the FCC cell correspond one to one with the minimal vectors
    F = cell.face_areas()
    W = face_walls(cell, r)
    face_of = [int(np.argmax(cell.normals @ (v / np.linalg.norm(v)))) for v in x]
    F, W = F[face_of], W[face_of]
    N0 = ball_polytope_volume(cell, r)
    D0 = cell.volume
    rho0 = N0 / D0

    def rho(t, S):
        lat = base.transformed(np.eye(3) + t * S)
        return soft_density_3d(lat, lam, check_packing=False)

    rows = []
    for rng in [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]:
        for _ in range(max_resample):
            S = fcc_deformation(rng, mode, x)
            d = _speeds(S, x)
            if np.any(np.abs(d) > 1e-12):
                break
        else:
            raise DegenerateDeformation("all neighbour speeds vanish")
        dN = 0.5 * float(d @ W)
        dD = 0.5 * float(d @ F)
        analytic = (dN * D0 - N0 * dD) / D0 ** 2
        fd = (rho(fd_step, S) - rho(-fd_step, S)) / (2 * fd_step)
        dens = []
        packing = []
        for t in t_values:
            lat = base.transformed(np.eye(3) + t * S)
            packing.append(bool(lat.min_vector_length >= 2.0 - 1e-12))
            dens.append(rho(t, S))
        rel = abs(analytic - fd) / max(abs(fd), 1e-300)
        nonneg = bool(np.all(d >= -1e-12))
        row = {
            "S": S.tolist(),
            "speeds": d.tolist(),
            "trace": float(np.trace(S)),
            "analytic": analytic,
            "fd": fd,
            "fd_rel_err": rel,
            "rho0": rho0,
            "t": list(t_values),
            "rho_t": dens,
            "packing": packing,
            "nonneg_speeds": nonneg,
        }
        checks = [rel <= 1e-3]
        if nonneg:
            checks += [analytic < 0, all(v < rho0 for v in dens), all(packing)]
        row["pass"] = bool(all(checks))
        rows.append(row)
    return {
        "lambda": lam,
        "trials": trials,
        "mode": mode,
        "rho_fcc": rho0,
        "face_area": float(F[0]),
        "wall_area": float(W[0]),
        "violations": sum(1 for row in rows if not row["pass"]),
        "rows": rows,
    }
