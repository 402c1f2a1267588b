"""Gauge geometry of a centrally symmetric convex polygon.

The polygon ``M`` is stored by its vertices; its facets give the
representation ``M = {x : <x, u_k> <= 1}`` used everywhere else, so that the
gauge (Minkowski functional) is simply ``max_k <x, u_k>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, linprog

from . import config
from .errors import BodyNotThreefold, DegeneratePosition, InvalidBody

__all__ = [
    "ConvexBody2D",
    "Homothet2D",
    "regular_polygon",
    "euclidean_surrogate",
    "hexagon",
    "square",
    "dodecagon",
    "gauge_norm",
    "smallest_enclosing_homothet",
    "circumdisk",
    "bisector_point",
    "polygon_area",
    "rotation",
    "load_body",
    "body_to_json",
]


def rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def polygon_area(pts):
    """Signed shoelace area (positive for counterclockwise order)."""
    p = np.asarray(pts, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _match_sets(a, b, tol):
    # every point of a has a partner in b (and sizes agree)
    if len(a) != len(b):
        return False
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    return bool(np.all(d.min(axis=1) <= tol))


@dataclass(frozen=True, eq=False)
class ConvexBody2D:
    """Centrally symmetric convex polygon serving as the unit disk of a norm.

    Parameters
    ----------
    vertices : (n, 2) array_like
        Counterclockwise, strictly convex, origin in the interior, and equal
        to its own negation as a set.
    threefold : bool
        Assert invariance under rotation by 120 degrees.
    """

    vertices: np.ndarray
    threefold: bool = False
    facets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 4:
            raise InvalidBody("need at least 4 planar vertices", "vertex-list")
        scale = float(np.abs(v).max())
        tol = config.scaled_tol(scale) * 10
        if polygon_area(v) <= 0:
            raise InvalidBody("vertices must be counterclockwise", "counterclockwise")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(cross <= tol * scale):
            raise InvalidBody("three consecutive vertices are collinear or reflex", "strict-convexity")
        normals = np.column_stack([e[:, 1], -e[:, 0]])
        normals /= np.linalg.norm(normals, axis=1)[:, None]
        h = np.einsum("ij,ij->i", normals, v)
        if np.any(h <= tol):
            raise InvalidBody("origin is not interior", "origin-interior")
        if len(v) % 2 or not _match_sets(v, -v, tol):
            raise InvalidBody("vertex set is not symmetric about the origin", "central-symmetry")
        if self.threefold:
            rv = v @ rotation(2 * np.pi / 3).T
            if len(v) % 6 or not _match_sets(v, rv, tol):
                raise InvalidBody("vertex set is not invariant under 120 degree rotation", "threefold-symmetry")
        v.setflags(write=False)
        u = normals / h[:, None]
        u.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "facets", u)

    @property
    def area(self):
        return polygon_area(self.vertices)

    @property
    def outer_radius(self):
        """Largest Euclidean norm of a point of the body."""
        return float(np.linalg.norm(self.vertices, axis=1).max())

    @property
    def inner_radius(self):
        return float(1.0 / np.linalg.norm(self.facets, axis=1).max())

    def homothet(self, center, radius):
        return np.asarray(center, dtype=float) + radius * self.vertices

    def require_threefold(self):
        if not self.threefold:
            raise BodyNotThreefold("operation needs a body with threefold rotational symmetry")


@dataclass(frozen=True)
class Homothet2D:
    """The set ``center + radius * M``."""

    center: tuple
    radius: float

    def polygon(self, body):
        return body.homothet(self.center, self.radius)


def regular_polygon(n, radius=1.0, phase=0.0, threefold=None):
    """Regular ``n``-gon (``n`` even) with vertices at Euclidean distance ``radius``."""
    if n % 2:
        raise InvalidBody("a centrally symmetric polygon has an even vertex count", "central-symmetry")
    t = phase + 2 * np.pi * np.arange(n) / n
    v = radius * np.column_stack([np.cos(t), np.sin(t)])
    if threefold is None:
        threefold = n % 6 == 0
    return ConvexBody2D(v, threefold=threefold)


def euclidean_surrogate(n=None):
    return regular_polygon(n or config.EUCLID_SURROGATE_SIDES)


def hexagon():
    return regular_polygon(6)


def dodecagon():
    return regular_polygon(12)


def square():
    return ConvexBody2D([[1, -1], [1, 1], [-1, 1], [-1, -1]])


def gauge_norm(body, x):
    """Minkowski functional of ``body``; vectorised over leading axes of ``x``."""
    x = np.asarray(x, dtype=float)
    val = x @ body.facets.T
    g = val.max(axis=-1)
    return np.maximum(g, 0.0) if g.ndim else max(float(g), 0.0)


def _lp_center(body, pts, r_bounds=(0, None), x_bounds=(None, None), objective=(0.0, 0.0, 1.0)):
    # variables (ox, oy, r);  <p_i - o, u_k> <= r  ->  -<o,u_k> - r <= -<p_i,u_k>
    u = body.facets
    m = len(u)
    a_ub = np.zeros((len(pts) * m, 3))
    a_ub[:, :2] = -np.tile(u, (len(pts), 1))
    a_ub[:, 2] = -1.0
    b_ub = -(pts @ u.T).ravel()
    bounds = [x_bounds, (None, None), r_bounds]
    # default feasibility tolerance (1e-7) is far coarser than the geometry needs
    res = linprog(np.asarray(objective), A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise DegeneratePosition(f"homothet LP failed: {res.message}")
    return res.x


def smallest_enclosing_homothet(body, points, tol=None):
    """Smallest homothet ``c + rM`` containing every point.

    Solved as a three-variable linear program over the facet constraints.
    When the optimal center is not unique (flat pieces of a polygonal
    boundary) the lexicographically smallest center is returned.
    """
    pts = np.unique(np.atleast_2d(np.asarray(points, dtype=float)), axis=0)
    if len(pts) == 1:
        return Homothet2D((float(pts[0, 0]), float(pts[0, 1])), 0.0)
    if len(pts) == 2:
        # the midpoint is optimal for any norm (triangle inequality); used as
        # the canonical center even when other optimal centers exist
        c = 0.5 * (pts[0] + pts[1])
        return Homothet2D((float(c[0]), float(c[1])), 0.5 * float(gauge_norm(body, pts[1] - pts[0])))
    scale = float(np.ptp(pts, axis=0).max()) + 1.0
    first = _lp_center(body, pts)
    r_opt = float(first[2])
    fix = (r_opt * (1 - 1e-12) - 1e-10 * scale, r_opt * (1 + 1e-12) + 1e-10 * scale)
    try:
        cx = float(_lp_center(body, pts, r_bounds=fix, objective=(1.0, 0.0, 0.0))[0])
        sol = _lp_center(body, pts, r_bounds=fix, x_bounds=(None, cx + 1e-10 * scale), objective=(0.0, 1.0, 0.0))
    except DegeneratePosition:
        sol = first
    c = sol[:2]
    r = float(gauge_norm(body, pts - c).max())
    return Homothet2D((float(c[0]), float(c[1])), r)


def bisector_point(body, p, q, offset):
    """Point of the gauge bisector of ``p, q`` on the line parallel to ``[p, q]``.

    The line is at signed Euclidean distance ``offset`` from ``[p, q]`` (to
    the left of ``q - p``). Bisectors of strictly convex gauges meet every
    such line exactly once.
    """
    p, q = np.asarray(p, float), np.asarray(q, float)
    e = q - p
    ln = float(np.hypot(*e))
    e = e / ln
    n = np.array([-e[1], e[0]])
    base = 0.5 * (p + q) + offset * n

    def phi(t):
        x = base + t * e
        return gauge_norm(body, p - x) - gauge_norm(body, q - x)

    span = 4.0 * (abs(offset) + ln) * body.outer_radius / body.inner_radius + 1.0
    lo, hi = -span, span
    flo, fhi = phi(lo), phi(hi)
    if flo > 0 or fhi < 0:
        raise DegeneratePosition("bisector does not cross the requested line")
    if flo == 0:
        return base + lo * e
    if fhi == 0:
        return base + hi * e
    t = brentq(phi, lo, hi, xtol=1e-15 * span, rtol=1e-15, maxiter=400)
    return base + t * e


def _euclid_circumcenter(p):
    a, b, c = p
    d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if d == 0:
        return None
    sa, sb, sc = a @ a, b @ b, c @ c
    ux = (sa * (b[1] - c[1]) + sb * (c[1] - a[1]) + sc * (a[1] - b[1])) / d
    uy = (sa * (c[0] - b[0]) + sb * (a[0] - c[0]) + sc * (b[0] - a[0])) / d
    return np.array([ux, uy])


def _circumdisk_newton(body, pts, o, tol, maxiter=60):
    u = body.facets
    prev = None
    for _ in range(maxiter):
        k = np.argmax((pts - o) @ u.T, axis=1)
        a = np.column_stack([u[k], np.ones(3)])
        b = np.einsum("ij,ij->i", u[k], pts)
        try:
            sol = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            return None
        o = sol[:2]
        key = tuple(k)
        if key == prev:
            break
        prev = key
    else:
        return None
    g = gauge_norm(body, pts - o)
    if np.ptp(g) > tol:
        return None
    return o, float(g.mean())


def _boundary_point(body, t):
    v = body.vertices
    m = len(v)
    j = np.floor(t).astype(int) % m
    f = (t - np.floor(t))[..., None]
    return v[j] + f * (v[(j + 1) % m] - v[j])


def _chord(body, x, d):
    # largest s >= 0 with x + s*d in M, for boundary points x
    ud = body.facets @ d
    slack = np.clip(1.0 - x @ body.facets.T, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(ud > 0, slack / np.where(ud > 0, ud, 1.0), np.inf)
    return s.min(axis=-1)


def _circumdisk_inscribed(body, pts, tol, samples_per_edge=6):
    # Slide the image of p1 along the boundary of M; the images of p2, p3 are
    # then fixed by the chords in directions p2 - p1 and p3 - p1, and the
    # circumdisk corresponds to equal chord parameters.
    d2, d3 = pts[1] - pts[0], pts[2] - pts[0]
    m = len(body.vertices)

    def f(t):
        x = _boundary_point(body, np.atleast_1d(t))
        return _chord(body, x, d2) - _chord(body, x, d3)

    t = np.arange(m * samples_per_edge + 1) / samples_per_edge
    x = _boundary_point(body, t)
    s2, s3 = _chord(body, x, d2), _chord(body, x, d3)
    ok = (s2 > 1e-12) & (s3 > 1e-12)
    fv = s2 - s3
    found = []
    for i in range(len(t) - 1):
        if not (ok[i] or ok[i + 1]):
            continue
        if fv[i] == 0 and ok[i]:
            ts = t[i]
        elif fv[i] * fv[i + 1] < 0:
            ts = brentq(lambda z: f(z)[0], t[i], t[i + 1], xtol=1e-15, rtol=1e-15, maxiter=200)
        else:
            continue
        x1 = _boundary_point(body, np.array([ts]))[0]
        s = float(_chord(body, x1[None], d2)[0])
        if s <= 1e-12:
            continue
        r = 1.0 / s
        o = pts[0] - r * x1
        polished = _circumdisk_newton(body, pts, o, tol, maxiter=4)
        if polished is not None:
            o, r = polished
        g = gauge_norm(body, pts - o)
        if np.ptp(g) <= 100 * tol:
            found.append((o, float(g.mean())))
    if not found:
        raise DegeneratePosition("no circumdisk found for the three centers")
    found.sort(key=lambda c: (c[1], c[0][0], c[0][1]))
    return found[0]


def circumdisk(body, points, tol=None):
    """Homothet of ``body`` with the three given points on its boundary.

    A Newton iteration on the active facets converges in a few steps for
    most inputs. When the active facets cycle, the triangle is inscribed in
    the boundary of ``M`` directly by a bracketing search over the position
    of one vertex.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape != (3, 2):
        raise ValueError("circumdisk needs exactly three points")
    scale = float(np.ptp(pts, axis=0).max())
    tol_abs = config.scaled_tol(scale, tol)
    area = polygon_area(pts)
    if abs(area) <= tol_abs * scale:
        raise DegeneratePosition("collinear centers have no circumdisk")
    o0 = _euclid_circumcenter(pts)
    res = _circumdisk_newton(body, pts, o0, tol_abs)
    if res is None:
        res = _circumdisk_inscribed(body, pts, tol_abs)
    o, r = res
    return Homothet2D((float(o[0]), float(o[1])), r)


def load_body(source):
    """Body from a JSON file path, a JSON string/dict, or a preset name."""
    presets = {
        "euclid96": euclidean_surrogate,
        "euclid": euclidean_surrogate,
        "hexagon": hexagon,
        "hex": hexagon,
        "dodecagon": dodecagon,
        "12gon": dodecagon,
        "square": square,
    }
    if isinstance(source, ConvexBody2D):
        return source
    if isinstance(source, str) and source in presets:
        return presets[source]()
    if isinstance(source, (str, Path)) and Path(source).exists():
        data = json.loads(Path(source).read_text())
    elif isinstance(source, str):
        try:
            data = json.loads(source)
        except json.JSONDecodeError:
            raise InvalidBody(f"unknown body preset or file: {source}", "body-file") from None
    else:
        data = source
    if isinstance(data, str):
        return load_body(data)
    if "preset" in data:
        return presets[data["preset"]]()
    if "vertices" not in data:
        raise InvalidBody("body JSON needs a 'vertices' list", "body-file")
    return ConvexBody2D(data["vertices"], threefold=bool(data.get("threefold", False)))


def body_to_json(body):
    return {"vertices": body.vertices.tolist(), "threefold": bool(body.threefold)}
