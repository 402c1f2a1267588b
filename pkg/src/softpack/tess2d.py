"""Voronoi, Delaunay and Molnár decompositions of a packing in a normed plane.

Centers are indexed by their position in ``PackingConfig2D.centers``. The
Delaunay construction is brute force over center triples (with an optional
circumradius cutoff); it is meant for desk-scale configurations of at most a
few hundred centers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import shapely
from shapely.geometry import Polygon, box

from . import config
from .errors import DegeneratePosition, InvalidConfig, WindowTooSmall
from .gauge2d import (
    ConvexBody2D,
    Homothet2D,
    circumdisk,
    gauge_norm,
    polygon_area,
    rotation,
)

__all__ = [
    "PackingConfig2D",
    "DelaunayCell",
    "MolnarCell",
    "RefinedCell",
    "Tessellation2D",
    "delaunay",
    "separating_sides",
    "molnar_decomposition",
    "refined_molnar",
    "tessellate",
    "voronoi_cell",
    "equilateral_reference",
    "bridge_contacts",
    "tiling_areas",
    "random_saturated_config",
    "lattice_config",
    "load_config",
    "tessellation_json",
    "tessellation_svg",
]

EROSION_MARGIN = 4.0


@dataclass(frozen=True, eq=False)
class PackingConfig2D:
    centers: np.ndarray
    body: ConvexBody2D
    window: tuple
    tol: float = config.TOL

    def __post_init__(self):
        c = np.array(self.centers, dtype=float).reshape(-1, 2)
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)
        w = tuple(float(x) for x in self.window)
        if len(w) != 4 or w[2] <= w[0] or w[3] <= w[1]:
            raise InvalidConfig("window must be [xmin, ymin, xmax, ymax]", "window")
        object.__setattr__(self, "window", w)
        if len(c) > 1:
            d = self.gauge_distances()
            iu = np.triu_indices(len(c), 1)
            worst = d[iu].min()
            if worst < 2.0 - config.scaled_tol(self.diameter, self.tol):
                raise InvalidConfig(f"two centers at gauge distance {worst:.6g} < 2", "packing-condition")

    @property
    def diameter(self):
        x0, y0, x1, y1 = self.window
        return float(np.hypot(x1 - x0, y1 - y0))

    def gauge_distances(self):
        c = self.centers
        return gauge_norm(self.body, c[:, None, :] - c[None, :, :])

    def eroded_window(self, margin=EROSION_MARGIN):
        x0, y0, x1, y1 = self.window
        return (x0 + margin, y0 + margin, x1 - margin, y1 - margin)

    def nearest_gauge_distance(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = np.empty(len(pts))
        for s in range(0, len(pts), 4096):
            blk = pts[s:s + 4096]
            out[s:s + 4096] = gauge_norm(self.body, blk[:, None, :] - self.centers[None, :, :]).min(axis=1)
        return out

    def is_saturated(self, spacing=0.1, region=None):
        """Grid check that every sample point is within gauge distance 2 of a center."""
        x0, y0, x1, y1 = region or self.window
        xs = np.arange(x0, x1 + spacing / 2, spacing)
        ys = np.arange(y0, y1 + spacing / 2, spacing)
        g = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
        return bool(np.all(self.nearest_gauge_distance(g) < 2.0))


@dataclass(frozen=True, eq=False)
class DelaunayCell:
    vertices: tuple  # center indices, counterclockwise
    points: np.ndarray
    circumdisk: Homothet2D

    @property
    def area(self):
        return polygon_area(self.points)

    @property
    def center(self):
        return np.asarray(self.circumdisk.center)

    def edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]


@dataclass(frozen=True, eq=False)
class MolnarCell:
    """Delaunay cell with separating sides replaced by bridges.

    ``boundary`` holds ``(kind, index)`` tags: ``("center", i)`` for a point
    of the packing, ``("apex", f)`` for the circumcenter of Delaunay cell f.
    """

    cell: int
    boundary: tuple
    points: np.ndarray

    @property
    def area(self):
        return polygon_area(self.points)


@dataclass(frozen=True, eq=False)
class RefinedCell:
    """Region ``cl(conv{a,b,c} minus conv{a,b,c'})``.

    ``c`` is the circumcenter of Delaunay cell ``cell``; ``cprime`` is either
    the circumcenter of the neighbouring cell ``cprime_cell`` whose bridge
    cuts into this one, or the midpoint of ``[a, b]`` (``cprime_cell`` None).
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    cprime: np.ndarray
    a_index: int
    b_index: int
    cell: int
    cprime_cell: int | None = None

    @property
    def polygon(self):
        if self.cprime_cell is None:
            return np.array([self.a, self.b, self.c])
        return np.array([self.a, self.cprime, self.b, self.c])

    @property
    def area(self):
        return polygon_area(self.polygon)

    def check(self, body, tol=1e-7):
        """Return the list of violated cell invariants (empty if valid)."""
        bad = []
        ga = float(gauge_norm(body, self.a - self.c))
        gb = float(gauge_norm(body, self.b - self.c))
        if abs(ga - gb) > tol:
            bad.append("equal-legs")
        if not ga < 2 + tol:
            bad.append("circumradius-below-2")
        if float(gauge_norm(body, self.a - self.b)) < 2 - tol:
            bad.append("base-at-least-2")
        gpa = float(gauge_norm(body, self.a - self.cprime))
        gpb = float(gauge_norm(body, self.b - self.cprime))
        if abs(gpa - gpb) > tol:
            bad.append("equal-inner-legs")
        if body.threefold:
            _, r_ref = equilateral_reference(body, self.b - self.a)
            if ga < r_ref - tol:
                bad.append("circumradius-at-least-reference")
        return bad


@dataclass(eq=False)
class Tessellation2D:
    config: PackingConfig2D
    delaunay: list
    separating: dict
    molnar: list
    refined: list
    bridges: list
    violations: list = field(default_factory=list)

    @property
    def eroded_window(self):
        return self.config.eroded_window()


def _ccw_order(points):
    c = points.mean(axis=0)
    ang = np.arctan2(points[:, 1] - c[1], points[:, 0] - c[0])
    return np.argsort(ang, kind="stable")


def delaunay(cfg, max_circumradius=None, tol=None):
    """Delaunay cells of the packing centers in the gauge of ``cfg.body``.

    Parameters
    ----------
    cfg : PackingConfig2D
    max_circumradius : float, optional
        Skip triples whose circumdisk is larger. For saturated packings every
        cell meeting the saturated region has circumradius below 2, so 2 is
        a safe cutoff there; None examines every triple.
    """
    body, pts = cfg.body, cfg.centers
    n = len(pts)
    x0, y0, x1, y1 = cfg.window
    inside = (pts[:, 0] > x0) & (pts[:, 0] < x1) & (pts[:, 1] > y0) & (pts[:, 1] < y1)
    if inside.sum() < 3:
        raise WindowTooSmall(f"only {int(inside.sum())} centers inside the window")
    tol_abs = config.scaled_tol(cfg.diameter, tol)
    dist = cfg.gauge_distances()
    limit = np.inf if max_circumradius is None else 2.0 * max_circumradius + tol_abs
    nbrs = [np.flatnonzero((dist[i] <= limit) & (np.arange(n) > i)) for i in range(n)]

    found = {}
    for i in range(n):
        for j, k in combinations(nbrs[i], 2):
            if dist[j, k] > limit:
                continue
            tri = pts[[i, j, k]]
            if abs(polygon_area(tri)) <= tol_abs:
                continue
            try:
                disk = circumdisk(body, tri, tol)
            except DegeneratePosition:
                continue
            r = disk.radius
            if max_circumradius is not None and r > max_circumradius + tol_abs:
                continue
            g = gauge_norm(body, pts - np.asarray(disk.center))
            if np.any(g < r - tol_abs):
                continue
            on = np.flatnonzero(np.abs(g - r) <= tol_abs)
            key = frozenset(on.tolist())
            if key in found:
                continue
            cell_pts = pts[on]
            order = _ccw_order(cell_pts)
            on, cell_pts = on[order], cell_pts[order]
            if len(on) > 3 and not _is_convex(cell_pts, tol_abs):
                raise DegeneratePosition(f"co-circular centers {sorted(key)} do not form a convex cell")
            found[key] = DelaunayCell(tuple(int(v) for v in on), cell_pts, disk)
    cells = sorted(found.values(), key=lambda c: c.vertices)
    return cells


def _is_convex(p, tol):
    e = np.roll(p, -1, axis=0) - p
    cr = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    return bool(np.all(cr > -tol))


def _side_offsets(points, o):
    # cross(e, o - p) for each edge; negative means o is strictly outside that edge
    e = np.roll(points, -1, axis=0) - points
    w = o - points
    return e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0]


def separating_sides(cell, tol=None):
    """Sides of a Delaunay cell that separate it from its circumcenter.

    Empty when the circumcenter lies in the closed cell.
    """
    scale = float(np.ptp(cell.points, axis=0).max())
    t = config.scaled_tol(scale, tol) * scale
    off = _side_offsets(cell.points, cell.center)
    edges = cell.edges()
    return [edges[i] for i in np.flatnonzero(off < -t)]


def _pick_separating(cell, sides):
    # the side crossed by the segment from the cell centroid to the circumcenter
    g = cell.points.mean(axis=0)
    o = cell.center
    pos = {v: p for v, p in zip(cell.vertices, cell.points)}
    for a, b in sides:
        if _segments_cross(g, o, pos[a], pos[b]):
            return (a, b)
    return sides[0]


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 <= 0 and d3 * d4 <= 0


def _separating_map(cells, violations, tol=None):
    sep = {}
    for f, cell in enumerate(cells):
        sides = separating_sides(cell, tol)
        if len(sides) > 1:
            violations.append(("separating-side-uniqueness", f, sides))
            sep[f] = _pick_separating(cell, sides)
        else:
            sep[f] = sides[0] if sides else None
    return sep


def _edge_owner(cells):
    own = {}
    for f, cell in enumerate(cells):
        for a, b in cell.edges():
            own[(a, b)] = f
    return own


def molnar_decomposition(cfg, cells=None, tol=None, **kw):
    """Cells of the decomposition obtained by replacing separating sides with bridges."""
    return tessellate(cfg, cells=cells, tol=tol, **kw).molnar


def refined_molnar(cfg, cells=None, tol=None, **kw):
    """Molnár cells coned from their Delaunay circumcenter, one piece per kept side."""
    return tessellate(cfg, cells=cells, tol=tol, **kw).refined


def tessellate(cfg, cells=None, tol=None, max_circumradius=None):
    """Delaunay, Molnár and refined Molnár decompositions in one pass."""
    if cells is None:
        cells = delaunay(cfg, max_circumradius=max_circumradius, tol=tol)
    pts = cfg.centers
    violations = []
    sep = _separating_map(cells, violations, tol)
    owner = _edge_owner(cells)
    centers = [c.center for c in cells]

    molnar, refined, bridges = [], [], []
    for f, cell in enumerate(cells):
        tags = []
        for a, b in cell.edges():
            tags.append(("center", a))
            if sep[f] == (a, b):
                tags.append(("apex", f))
                continue
            g = owner.get((b, a))
            cprime_cell = None
            if g is not None and sep[g] == (b, a):
                if sep[f] is not None and sep[f] == (a, b):
                    violations.append(("mutual-separating-side", f, g))
                tags.append(("apex", g))
                cprime_cell = g
            cp = centers[g] if cprime_cell is not None else 0.5 * (pts[a] + pts[b])
            rc = RefinedCell(pts[a], pts[b], centers[f], cp, a, b, f, cprime_cell)
            if abs(rc.area) > config.scaled_tol(cfg.diameter, tol) ** 2:
                refined.append(rc)
        mp = np.array([pts[i] if kind == "center" else centers[i] for kind, i in tags])
        molnar.append(MolnarCell(f, tuple(tags), mp))
        if sep[f] is not None:
            a, b = sep[f]
            bridges.append((f, a, b, pts[a], centers[f], pts[b]))
    return Tessellation2D(cfg, cells, sep, molnar, refined, bridges, violations)


def tiling_areas(tess, margin=EROSION_MARGIN):
    """Areas of each decomposition clipped to the eroded window."""
    win = box(*tess.config.eroded_window(margin))
    out = {"window": win.area}
    for name, polys in (
        ("delaunay", [c.points for c in tess.delaunay]),
        ("molnar", [c.points for c in tess.molnar]),
        ("refined", [c.polygon for c in tess.refined]),
    ):
        geoms = [Polygon(p) for p in polys]
        clipped = shapely.intersection(np.array(geoms, dtype=object), win)
        out[name] = float(np.sum(shapely.area(clipped)))
    return out


def _segment_list(tess):
    segs = {}
    for mc in tess.molnar:
        p = mc.points
        for i in range(len(p)):
            s = (tuple(p[i]), tuple(p[(i + 1) % len(p)]))
            key = tuple(sorted(s))
            segs[key] = np.array(key)
    return np.array(list(segs.values())) if segs else np.zeros((0, 2, 2))


def bridge_contacts(tess, tol=1e-9):
    """Bridge components meeting another edge anywhere but a shared endpoint.

    Returns a list of offending ``(bridge_segment, other_segment)`` pairs.
    """
    segs = _segment_list(tess)
    comps = []
    for _, _, _, pa, o, pb in tess.bridges:
        comps.append(np.array([pa, o]))
        comps.append(np.array([o, pb]))
    bad = []
    scale = max(1.0, tess.config.diameter)
    eps = tol * scale
    for s in comps:
        for t in _contacts(s, segs, eps):
            bad.append((s, t))
    return bad


def _contacts(s, segs, eps):
    if len(segs) == 0:
        return []
    p1, p2 = s
    q1, q2 = segs[:, 0], segs[:, 1]

    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    same = (np.linalg.norm(q1 - p1, axis=1) < eps) & (np.linalg.norm(q2 - p2, axis=1) < eps)
    same |= (np.linalg.norm(q1 - p2, axis=1) < eps) & (np.linalg.norm(q2 - p1, axis=1) < eps)
    ls = np.linalg.norm(p2 - p1)
    lq = np.linalg.norm(q2 - q1, axis=1)
    d1 = orient(q1, q2, p1) / lq
    d2 = orient(q1, q2, p2) / lq
    d3 = orient(p1, p2, q1) / ls
    d4 = orient(p1, p2, q2) / ls
    proper = (d1 * d2 < -eps * eps) & (d3 * d4 < -eps * eps) & (np.minimum(np.abs(d1), np.abs(d2)) > eps) & (
        np.minimum(np.abs(d3), np.abs(d4)) > eps)

    def interior_hit(pt, a, b, dist):
        ab = b - a
        t = np.einsum("ij,ij->i", pt - a, ab) / np.einsum("ij,ij->i", ab, ab)
        far_ends = (np.linalg.norm(pt - a, axis=1) > eps) & (np.linalg.norm(pt - b, axis=1) > eps)
        return (np.abs(dist) <= eps) & (t > 0) & (t < 1) & far_ends

    p1b = np.broadcast_to(p1, q1.shape)
    p2b = np.broadcast_to(p2, q1.shape)
    touch = interior_hit(p1b, q1, q2, d1) | interior_hit(p2b, q1, q2, d2)
    touch |= interior_hit(q1, p1b, p2b, d3) | interior_hit(q2, p1b, p2b, d4)
    hit = (proper | touch) & ~same
    return [segs[i] for i in np.flatnonzero(hit)]


def equilateral_reference(body, direction):
    """Euclidean-regular triangle with gauge side lengths 2, one side along ``direction``.

    Returns the triangle (first vertex at the origin) and its gauge
    circumradius.
    """
    body.require_threefold()
    d = np.asarray(direction, dtype=float)
    u = d / np.hypot(*d)
    e = 2.0 / float(gauge_norm(body, u))
    tri = np.array([[0.0, 0.0], e * u, e * (rotation(np.pi / 3) @ u)])
    disk = circumdisk(body, tri)
    return tri, disk.radius


def _radial_lines(body, c, others, bounds, theta):
    """Distance from ``c`` to the Voronoi boundary along ``theta`` and the active line."""
    u = np.array([np.cos(theta), np.sin(theta)])
    fac = body.facets
    proj = fac @ u
    j = int(np.argmax(proj))
    gu = proj[j]
    den = gu - proj
    num = -(others - c) @ fac.T
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(den > 1e-13 * gu, num / np.where(den > 1e-13 * gu, den, 1.0),
                     np.where(num >= 0, np.inf, -np.inf))
    kbest = np.argmax(t, axis=1) if len(others) else np.zeros(0, int)
    tn = t[np.arange(len(others)), kbest] if len(others) else np.zeros(0)
    x0, y0, x1, y1 = bounds
    tb, side = np.inf, None
    for s, (comp, lim) in enumerate(((0, x1), (1, y1), (0, x0), (1, y0))):
        if u[comp] != 0:
            tt = (lim - c[comp]) / u[comp]
            if 0 < tt < tb:
                tb, side = tt, s
    if len(tn) and tn.min() < tb:
        i = int(np.argmin(tn))
        k = int(kbest[i])
        a = fac[j] - fac[k]
        b = c @ fac[j] - others[i] @ fac[k]
        return float(tn[i]), ("nbr", i, j, k), a, b
    comp, lim = [(0, x1), (1, y1), (0, x0), (1, y0)][side]
    a = np.zeros(2)
    a[comp] = 1.0
    return float(tb), ("box", side), a, lim


def voronoi_cell(cfg, center_index, bounds=None, samples_per_cone=8, max_depth=48):
    """Gauge Voronoi cell of one center, clipped to ``bounds`` (default the window).

    The cell is starlike about its center, so it is traced by its radial
    function. Between samples whose supporting lines differ the corner is
    found by intersecting the two lines, or by bisection when a third piece
    lies in between. Every returned vertex lies on the cell boundary.
    """
    body = cfg.body
    c = cfg.centers[center_index]
    others = np.delete(cfg.centers, center_index, axis=0)
    bounds = bounds or cfg.window
    vang = np.sort(np.mod(np.arctan2(body.vertices[:, 1], body.vertices[:, 0]), 2 * np.pi))
    vang = np.append(vang, vang[0] + 2 * np.pi)

    def sample(theta):
        t, _, a, b = _radial_lines(body, c, others, bounds, theta)
        s = np.hypot(*a)
        return theta, c + t * np.array([np.cos(theta), np.sin(theta)]), a / s, b / s

    def same_line(s1, s2):
        return np.allclose(s1[2], s2[2], atol=1e-12) and abs(s1[3] - s2[3]) <= 1e-12 * max(1.0, abs(s1[3]))

    out = []

    def refine(s1, s2, depth):
        if same_line(s1, s2):
            return
        m = np.array([s1[2], s2[2]])
        if abs(np.linalg.det(m)) > 1e-12:
            x = np.linalg.solve(m, [s1[3], s2[3]])
            th = s1[0] + np.mod(np.arctan2(x[1] - c[1], x[0] - c[0]) - s1[0], 2 * np.pi)
            if s1[0] <= th <= s2[0]:
                sx = sample(th)
                if np.linalg.norm(sx[1] - x) <= 1e-10 * max(1.0, np.linalg.norm(x - c)):
                    out.append(sx[:2])
                    return
        if depth >= max_depth:
            return
        sm = sample(0.5 * (s1[0] + s2[0]))
        out.append(sm[:2])
        refine(s1, sm, depth + 1)
        refine(sm, s2, depth + 1)

    for lo, hi in zip(vang[:-1], vang[1:]):
        ss = [sample(th) for th in np.linspace(lo, hi, samples_per_cone + 2)]
        for s1, s2 in zip(ss[:-1], ss[1:]):
            out.append(s1[:2])
            refine(s1, s2, 0)
    out.sort(key=lambda z: z[0])
    return _drop_collinear(np.array([p for _, p in out]))


def _drop_collinear(p, tol=1e-11):
    scale = max(1.0, float(np.abs(p).max()))
    eps = tol * scale

    def between(a, b, c):
        # b within eps of the line through a and c
        ac = c - a
        n = np.hypot(*ac)
        if n <= eps:
            return True
        return abs(ac[0] * (b[1] - a[1]) - ac[1] * (b[0] - a[0])) / n <= eps

    st = []
    for x in p:
        if st and np.hypot(*(x - st[-1])) <= eps:
            continue
        while len(st) >= 2 and between(st[-2], st[-1], x):
            st.pop()
        st.append(x)
    # close the ring
    changed = True
    while changed and len(st) > 3:
        changed = False
        if np.hypot(*(st[0] - st[-1])) <= eps or between(st[-2], st[-1], st[0]):
            st.pop()
            changed = True
        elif between(st[-1], st[0], st[1]):
            st.pop(0)
            changed = True
    return np.array(st)


def lattice_config(body, basis, window, origin=(0.0, 0.0)):
    """All lattice points inside ``window`` as a packing configuration."""
    basis = np.asarray(basis, dtype=float)
    x0, y0, x1, y1 = window
    corners = np.array([[x0, y0], [x1, y0], [x0, y1], [x1, y1]]) - np.asarray(origin)
    coef = np.linalg.solve(basis.T, corners.T).T
    lo = np.floor(coef.min(axis=0)) - 1
    hi = np.ceil(coef.max(axis=0)) + 1
    ii, jj = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    pts = np.column_stack([ii.ravel(), jj.ravel()]) @ basis + np.asarray(origin)
    m = (pts[:, 0] >= x0) & (pts[:, 0] <= x1) & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
    return PackingConfig2D(pts[m], body, window)


def random_saturated_config(body, window, rng, grid=0.05, max_points=100000):
    """Random sequential addition of centers until the window is saturated.

    Candidates are drawn uniformly; once rejections dominate, the remaining
    holes are located on a grid and filled in random order, and finally any
    empty circumdisk of radius at least 2 centred in the window contributes
    its center.
    """
    x0, y0, x1, y1 = window
    lo, hi = np.array([x0, y0]), np.array([x1, y1])
    pts = np.zeros((0, 2))
    misses = 0
    while misses < 400 and len(pts) < max_points:
        p = lo + rng.random(2) * (hi - lo)
        if len(pts) == 0 or gauge_norm(body, pts - p).min() >= 2.0:
            pts = np.vstack([pts, p])
            misses = 0
        else:
            misses += 1
    xs = np.arange(x0, x1 + grid / 2, grid)
    ys = np.arange(y0, y1 + grid / 2, grid)
    g = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
    g = g[rng.permutation(len(g))]
    free = _nearest(body, g, pts) >= 2.0
    for idx in np.flatnonzero(free):
        p = g[idx]
        if gauge_norm(body, pts - p).min() >= 2.0:
            pts = np.vstack([pts, p])
    # exact pass: empty circumdisks with radius >= 2 are uncovered holes
    for _ in range(50):
        cfg = PackingConfig2D(pts, body, window)
        holes = []
        for cell in delaunay(cfg, max_circumradius=3.0):
            o = cell.center
            if cell.circumdisk.radius >= 2.0 and np.all(o >= lo) and np.all(o <= hi):
                holes.append(o)
        added = False
        for o in holes:
            if gauge_norm(body, pts - o).min() >= 2.0:
                pts = np.vstack([pts, o])
                added = True
        if not added:
            break
    return PackingConfig2D(pts, body, window)


def _nearest(body, q, pts):
    out = np.empty(len(q))
    for s in range(0, len(q), 2048):
        blk = q[s:s + 2048]
        out[s:s + 2048] = gauge_norm(body, blk[:, None, :] - pts[None, :, :]).min(axis=1)
    return out


def load_config(source):
    """Packing configuration from a JSON file, JSON string or dict."""
    import json
    from pathlib import Path

    from .gauge2d import load_body

    if isinstance(source, (str, Path)):
        p = Path(source)
        text = p.read_text() if p.exists() else str(source)
        try:
            source = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"cannot read configuration: {exc}", "config") from exc
    try:
        body = load_body(source.get("body", "euclid96"))
        return PackingConfig2D(np.array(source["centers"], float), body, tuple(source["window"]))
    except KeyError as exc:
        raise InvalidConfig(f"configuration is missing {exc}", "config") from exc


def _r(x):
    return [round(float(v), 12) for v in x]


def tessellation_json(tess):
    """Plain-data description of all three decompositions."""
    return {
        "window": list(tess.config.window),
        "eroded_window": list(tess.config.eroded_window()),
        "centers": [_r(c) for c in tess.config.centers],
        "delaunay": [
            {
                "vertices": list(c.vertices),
                "circumcenter": _r(c.center),
                "circumradius": round(float(c.circumdisk.radius), 12),
                "separating_side": list(tess.separating[f]) if tess.separating[f] else None,
            }
            for f, c in enumerate(tess.delaunay)
        ],
        "molnar": [
            {"cell": m.cell, "boundary": [{"kind": k, "index": int(i)} for k, i in m.boundary]}
            for m in tess.molnar
        ],
        "refined": [
            {
                "a": r.a_index,
                "b": r.b_index,
                "cell": r.cell,
                "cprime_cell": r.cprime_cell,
                "polygon": [_r(p) for p in r.polygon],
            }
            for r in tess.refined
        ],
        "violations": [[str(v[0]), int(v[1])] for v in tess.violations],
    }


def tessellation_svg(tess, scale=20.0, show_disks=True):
    """SVG drawing: cell edges solid, circumdisks dotted, separating sides and bridges dashed."""
    x0, y0, x1, y1 = tess.config.window
    w, h = (x1 - x0) * scale, (y1 - y0) * scale

    def tr(p):
        return f"{(p[0] - x0) * scale:.3f},{(y1 - p[1]) * scale:.3f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" height="{h:.1f}" viewBox="0 0 {w:.1f} {h:.1f}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    ex = tess.config.eroded_window()
    out.append(f'<polygon points="{tr((ex[0], ex[1]))} {tr((ex[2], ex[1]))} {tr((ex[2], ex[3]))} {tr((ex[0], ex[3]))}" '
               'fill="#f4f4f4" stroke="none"/>')
    for m in tess.molnar:
        pts = " ".join(tr(p) for p in m.points)
        out.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1"/>')
    if show_disks:
        body = tess.config.body
        for c in tess.delaunay:
            pts = " ".join(tr(p) for p in body.homothet(c.center, c.circumdisk.radius))
            out.append(f'<polygon points="{pts}" fill="none" stroke="#3366cc" stroke-width="0.6" '
                       'stroke-dasharray="1,3"/>')
    for f, a, b, pa, o, pb in tess.bridges:
        out.append(f'<line x1="{tr(pa).split(",")[0]}" y1="{tr(pa).split(",")[1]}" '
                   f'x2="{tr(pb).split(",")[0]}" y2="{tr(pb).split(",")[1]}" stroke="#cc3333" '
                   'stroke-width="1" stroke-dasharray="3,3"/>')
        out.append(f'<polyline points="{tr(pa)} {tr(o)} {tr(pb)}" fill="none" stroke="#cc3333" '
                   'stroke-width="1.5" stroke-dasharray="8,4"/>')
    for p in tess.config.centers:
        x, y = tr(p).split(",")
        out.append(f'<circle cx="{x}" cy="{y}" r="2" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
