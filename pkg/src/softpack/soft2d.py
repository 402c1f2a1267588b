"""Soft densities of packings in a normed plane.

All areas come from exact polygon booleans (shapely); curved bodies enter
only through their polygonal surrogates.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import shapely
from scipy.optimize import minimize_scalar
from shapely.geometry import LineString, Polygon

from . import config
from .errors import (
    DegeneratePosition,
    DegenerateQuadruple,
    InvalidConfig,
    LambdaOutOfRange,
    NotAPacking,
    ZeroAreaCell,
)
from .gauge2d import ConvexBody2D, bisector_point, gauge_norm
from .tess2d import equilateral_reference, tessellate

__all__ = [
    "SoftParams",
    "Lattice2D",
    "LatticeSearchResult",
    "SweepReport",
    "soft_ratio",
    "cell_soft_density",
    "lattice_soft_density",
    "triangle_lattice",
    "saturation_threshold",
    "optimal_lattice_search",
    "direction_scan",
    "apex_monotonicity_check",
    "base_monotonicity_check",
    "arc_map_check",
    "linear_map_arc_check",
    "window_soft_density",
    "disk_triangle_lattice_density",
]


def saturation_threshold(body, samples=120):
    """Smallest λ at which some regular-triangle lattice is covered by its soft bodies."""
    body.require_threefold()
    th = np.linspace(0.0, 2 * np.pi / 3, samples, endpoint=False)
    return min(equilateral_reference(body, (np.cos(t), np.sin(t)))[1] for t in th) - 1.0


@dataclass(frozen=True)
class SoftParams:
    lam: float
    body: ConvexBody2D | None = None

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise LambdaOutOfRange(f"soft parameter must be nonnegative, got {self.lam}")
        if self.body is not None and self.body.threefold:
            thr = saturation_threshold(self.body)
            if self.lam >= thr:
                warnings.warn(f"lambda={self.lam:.6g} >= {thr:.6g}: the density is 1", stacklevel=2)


@dataclass(frozen=True, eq=False)
class Lattice2D:
    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float).reshape(2, 2)
        if abs(np.linalg.det(b)) <= 1e-12 * max(1.0, np.abs(b).max()) ** 2:
            raise InvalidConfig("lattice basis vectors are linearly dependent", "basis")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def det(self):
        return abs(float(np.linalg.det(self.basis)))

    def reduced(self):
        """Lagrange-Gauss reduced basis (Euclidean)."""
        u, v = self.basis[0].copy(), self.basis[1].copy()
        if u @ u > v @ v:
            u, v = v, u
        while True:
            m = round((u @ v) / (u @ u))
            v = v - m * u
            if v @ v >= u @ u:
                return np.array([u, v])
            u, v = v, u

    def points(self, radius):
        """Lattice points of Euclidean norm at most ``radius``."""
        b = self.reduced()
        inv = np.linalg.inv(b)
        k = np.ceil(np.linalg.norm(inv, axis=0) * radius).astype(int) + 1
        i, j = np.meshgrid(np.arange(-k[0], k[0] + 1), np.arange(-k[1], k[1] + 1), indexing="ij")
        p = np.column_stack([i.ravel(), j.ravel()]) @ b
        return p[np.linalg.norm(p, axis=1) <= radius]

    def min_gauge(self, body):
        b = self.reduced()
        # any vector of gauge <= g(b0) has Euclidean length <= g(b0) / min gauge on the unit circle
        g0 = float(gauge_norm(body, b[0]))
        p = self.points(g0 * body.outer_radius + 1e-9)
        p = p[np.linalg.norm(p, axis=1) > 0]
        return float(gauge_norm(body, p).min())


def soft_ratio(region, centers, body, lam):
    """Fraction of ``region`` covered by the soft bodies ``c + (1+lam) M``."""
    poly = Polygon(region)
    area = poly.area
    if area <= 0:
        raise ZeroAreaCell(f"region has area {area:.3g}")
    disks = [Polygon(body.homothet(c, 1.0 + lam)) for c in centers]
    cov = shapely.intersection(shapely.union_all(disks), poly).area
    return min(1.0, max(0.0, cov / area))


def cell_soft_density(cell, body, lam):
    """Covered fraction of a refined cell by the soft bodies at its two centers."""
    if lam < 0:
        raise LambdaOutOfRange(f"soft parameter must be nonnegative, got {lam}")
    poly = cell.polygon
    if abs(Polygon(poly).area) <= config.TOL * max(1.0, float(np.ptp(poly, axis=0).max())) ** 2:
        raise ZeroAreaCell("refined cell has zero area")
    return soft_ratio(poly, [cell.a, cell.b], body, lam)


def lattice_soft_density(lattice, body, lam, tol=None):
    """Density of the union of soft bodies placed at the lattice points."""
    if lam < 0:
        raise LambdaOutOfRange(f"soft parameter must be nonnegative, got {lam}")
    tol = config.TOL if tol is None else tol
    mg = lattice.min_gauge(body)
    if mg < 2.0 - tol:
        raise NotAPacking(f"shortest lattice vector has gauge length {mg:.9g} < 2")
    b = lattice.reduced()
    cell = Polygon([(0, 0), tuple(b[0]), tuple(b[0] + b[1]), tuple(b[1])])
    reach = (1.0 + lam) * body.outer_radius + np.linalg.norm(b[0] + b[1]) + np.linalg.norm(b[0] - b[1])
    pts = lattice.points(reach)
    disks = [Polygon(body.homothet(p, 1.0 + lam)) for p in pts]
    disks = [d for d in disks if d.intersects(cell)]
    cov = shapely.intersection(shapely.union_all(disks), cell).area
    return min(1.0, cov / cell.area)


def triangle_lattice(body, theta):
    """Lattice generated by the regular gauge triangle of side 2 along ``theta``."""
    u = np.array([np.cos(theta), np.sin(theta)])
    tri, _ = equilateral_reference(body, u)
    return Lattice2D(np.array([tri[1], tri[2]]))


def disk_triangle_lattice_density(lam):
    """Soft density of the unit-disk triangular lattice (edge 2) for the Euclidean norm."""
    r = 1.0 + lam
    if r >= 2.0 / np.sqrt(3.0):
        return 1.0
    covered = 0.5 * np.pi * r * r
    if r > 1.0:
        lens = 2 * r * r * np.arccos(1.0 / r) - 2 * np.sqrt(r * r - 1.0)
        covered -= 1.5 * lens
    return covered / np.sqrt(3.0)


class LatticeSearchResult(NamedTuple):
    lattice: Lattice2D
    density: float
    theta: float
    sampled_max: float
    competitor_densities: tuple = ()


def direction_scan(body, lam, samples=720, threads=1):
    """Densities of the regular-triangle lattices over ``samples`` directions in [0, 120°)."""
    body.require_threefold()
    th = np.linspace(0.0, 2 * np.pi / 3, samples, endpoint=False)

    def f(t):
        return lattice_soft_density(triangle_lattice(body, t), body, lam)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            dens = list(ex.map(f, th))
    else:
        dens = [f(t) for t in th]
    return th, np.array(dens)


def optimal_lattice_search(body, lam, direction_samples=720, competitors=(), threads=1):
    """Best regular-triangle lattice over sampled edge directions, then golden-section refined.

    ``competitors`` are extra lattices whose densities are reported alongside
    for comparison.
    """
    th, dens = direction_scan(body, lam, direction_samples, threads)
    i = int(np.argmax(dens))
    best_t, best_d = float(th[i]), float(dens[i])
    h = th[1] - th[0] if len(th) > 1 else 2 * np.pi / 3
    if 0.0 < best_d < 1.0:
        def neg(t):
            return -lattice_soft_density(triangle_lattice(body, t), body, lam)

        res = minimize_scalar(neg, bracket=(best_t - h, best_t, best_t + h), method="golden",
                              options={"xtol": 1e-10})
        if -res.fun > best_d:
            best_t, best_d = float(np.mod(res.x, 2 * np.pi / 3)), float(-res.fun)
    lat = triangle_lattice(body, best_t)
    comp = tuple(lattice_soft_density(c, body, lam) for c in competitors)
    return LatticeSearchResult(lat, best_d, best_t, float(dens[i]), comp)


@dataclass
class SweepReport:
    trials: int = 0
    violations: list = field(default_factory=list)
    equalities: int = 0
    max_excess: float = -np.inf
    skipped: int = 0

    @property
    def ok(self):
        return not self.violations

    def as_dict(self):
        return {
            "trials": self.trials,
            "violations": len(self.violations),
            "equalities": self.equalities,
            "max_excess": float(self.max_excess),
            "skipped": self.skipped,
        }


def _rho(tri, a, b, body, lam):
    return soft_ratio(tri, [a, b], body, lam)


def _uncovered(tri, a, b, body, lam):
    poly = Polygon(tri)
    disks = shapely.union_all([Polygon(body.homothet(p, 1.0 + lam)) for p in (a, b)])
    return poly.difference(disks).area / poly.area


def _trial_rngs(seed, trials):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def apex_monotonicity_check(body, lam, trials=1000, seed=0, tol=1e-9, apex_pairs=None):
    """Moving the apex of an isosceles gauge triangle away from its base never raises the covered fraction.

    Random trials use a base of gauge length in [2, 3], and two apex points
    on the bisector with legs in (L/2, 2.5]. Cases with ``rho(T) = rho(T')``
    must have ``T`` covered by the two soft bodies.
    ``apex_pairs`` may supply explicit ``(a, b, c_far, c_near)`` tuples.
    """
    rep = SweepReport()
    cases = list(apex_pairs) if apex_pairs is not None else None
    if cases is None:
        cases = []
        for rng in _trial_rngs(seed, trials):
            phi = rng.uniform(0, 2 * np.pi)
            u = np.array([np.cos(phi), np.sin(phi)])
            base = rng.uniform(2.0, 3.0)
            a = np.zeros(2)
            b = base / float(gauge_norm(body, u)) * u
            eu = float(np.hypot(*b))
            offs = np.sort(rng.uniform(0.02, 2.5, size=2) * eu)
            try:
                c_near = bisector_point(body, a, b, offs[0])
                c_far = bisector_point(body, a, b, offs[1])
            except DegeneratePosition:
                rep.skipped += 1
                continue
            # flat pieces of a polygonal bisector can leave both apexes at one distance
            if gauge_norm(body, c_far - a) <= gauge_norm(body, c_near - a) + 1e-9:
                rep.skipped += 1
                continue
            cases.append((a, b, c_far, c_near))
    for a, b, c, cp in cases:
        a, b, c, cp = (np.asarray(x, float) for x in (a, b, c, cp))
        rep.trials += 1
        r_far = _rho([a, b, c], a, b, body, lam)
        r_near = _rho([a, b, cp], a, b, body, lam)
        excess = r_far - r_near
        rep.max_excess = max(rep.max_excess, excess)
        if excess > tol:
            rep.violations.append({"a": a, "b": b, "c": c, "cprime": cp, "excess": excess})
        elif abs(excess) <= tol:
            rep.equalities += 1
            if _uncovered([a, b, c], a, b, body, lam) > 1e-7:
                rep.violations.append({"a": a, "b": b, "c": c, "cprime": cp, "excess": excess,
                                       "reason": "equality without covering"})
    return rep


def _chord(body, tau, direction, offset):
    """Chord of ``tau * bd M`` parallel to ``direction`` at signed offset along its left normal."""
    w = np.asarray(direction, float)
    w = w / np.hypot(*w)
    n = np.array([-w[1], w[0]])
    span = 4 * tau * body.outer_radius
    line = LineString([offset * n - span * w, offset * n + span * w])
    seg = Polygon(body.homothet((0, 0), tau)).intersection(line)
    if seg.is_empty or seg.length <= 0:
        return None
    p = np.array(seg.coords)
    s = (p - offset * n) @ w
    return p[np.argmin(s)], p[np.argmax(s)]


def base_monotonicity_check(body, lam, trials=1000, seed=0, tol=1e-9, pairs=None):
    """Shortening the base of an isosceles gauge triangle with fixed apex and legs never lowers the covered fraction.

    Random trials fix the apex at the origin and leg length tau in
    (1+lam, 2.5], and take two chords of ``tau * bd M`` parallel to a random
    direction with gauge lengths in [2, 2 tau]. Equality must happen only
    for coinciding bases. ``pairs`` may supply ``(tau, direction, long_len, short_len)``.
    """
    rep = SweepReport()
    cases = []
    if pairs is not None:
        cases = list(pairs)
    else:
        for rng in _trial_rngs(seed, trials):
            tau = rng.uniform(1.0 + lam + 1e-3, max(2.5, 1.0 + lam + 0.5))
            phi = rng.uniform(0, 2 * np.pi)
            ls = np.sort(rng.uniform(2.0, 2.0 * tau, size=2))[::-1]
            cases.append((tau, (np.cos(phi), np.sin(phi)), ls[0], ls[1]))
    for tau, w, L, Lp in cases:
        ends = [_chord_of_length(body, tau, w, length) for length in (L, Lp)]
        if any(e is None for e in ends):
            rep.skipped += 1
            continue
        (a, b), (ap, bp) = ends
        rep.trials += 1
        o = np.zeros(2)
        r = _rho([a, b, o], a, b, body, lam)
        rp = _rho([ap, bp, o], ap, bp, body, lam)
        excess = r - rp
        rep.max_excess = max(rep.max_excess, excess)
        same = np.allclose(a, ap, atol=1e-9) and np.allclose(b, bp, atol=1e-9)
        if excess > tol or (abs(excess) <= tol and not same and abs(L - Lp) > 1e-6):
            rep.violations.append({"tau": tau, "direction": w, "lengths": (L, Lp), "excess": excess})
        elif abs(excess) <= tol:
            rep.equalities += 1
    return rep


def _chord_of_length(body, tau, w, length):
    # chord length decreases in the offset, so bisect on the offset
    w = np.asarray(w, float) / np.hypot(*w)
    gw = float(gauge_norm(body, w))
    n = np.array([-w[1], w[0]])
    hi = tau / float(gauge_norm(body, n))

    def glen(s):
        ch = _chord(body, tau, w, s)
        return 0.0 if ch is None else float(gauge_norm(body, ch[1] - ch[0]))

    if glen(0.0) < length - 1e-12:
        return None
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if glen(mid) >= length:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    ch = _chord(body, tau, w, lo)
    if ch is None or gw <= 0:
        return None
    return ch


def _boundary_dir(body, angle):
    u = np.array([np.cos(angle), np.sin(angle)])
    return u / float(gauge_norm(body, u))


def _arc_samples(body, t0, t1, n):
    # boundary points at polar angles in [t0, t1], including body vertices
    vang = np.mod(np.arctan2(body.vertices[:, 1], body.vertices[:, 0]) - t0, 2 * np.pi) + t0
    th = np.concatenate([np.linspace(t0, t1, n), vang[(vang > t0) & (vang < t1)]])
    th.sort()
    return np.array([_boundary_dir(body, t) for t in th]), th


def arc_map_check(body, x, xp, yp, y, samples=200, tol=1e-9):
    """Check one quadruple: the map sending x, y to x', y' pushes arc(x, y) outside int M
    and pulls the two adjacent arcs inside.

    Returns ``(outer_min, inner_max)``: the minimum gauge over the image of
    arc(x, y) and the maximum gauge over the images of the open arcs
    (y, -x) and (-y, x).
    """
    pts = [np.asarray(p, float) for p in (x, xp, yp, y)]
    for i in range(4):
        for j in range(i + 1, 4):
            s = pts[i] + pts[j]
            if np.hypot(*s) <= 1e-9 and np.hypot(*(pts[i] - pts[j])) > 1e-9:
                raise DegenerateQuadruple("two of the points are antipodal")
    x, xp, yp, y = pts
    A = np.column_stack([xp, yp]) @ np.linalg.inv(np.column_stack([x, y]))
    tx = np.arctan2(x[1], x[0])
    ty = tx + np.mod(np.arctan2(y[1], y[0]) - tx, 2 * np.pi)
    arc, _ = _arc_samples(body, tx, ty, samples)
    outer = float(gauge_norm(body, arc @ A.T).min())
    inner = -np.inf
    for t0, t1 in ((ty, tx + np.pi), (ty + np.pi, tx + 2 * np.pi)):
        arc, th = _arc_samples(body, t0, t1, samples)
        keep = (th > t0 + 1e-9) & (th < t1 - 1e-9)
        if keep.any():
            inner = max(inner, float(gauge_norm(body, arc[keep] @ A.T).max()))
    return outer, inner


def linear_map_arc_check(body, trials=500, seed=0, tol=1e-9, samples=200):
    """Random sweep of ``arc_map_check`` over counterclockwise quadruples on bd M."""
    rep = SweepReport()
    for rng in _trial_rngs(seed, trials):
        tx = rng.uniform(0, 2 * np.pi)
        span = rng.uniform(0.1, np.pi - 0.1)
        inner_t = np.sort(rng.uniform(0, span, size=2))
        # keep the inner arc strictly shorter
        if rng.random() < 0.25:
            inner_t[0] = 0.0
        if inner_t[1] - inner_t[0] < 1e-3 or (inner_t[0] == 0 and inner_t[1] >= span):
            rep.skipped += 1
            continue
        x = _boundary_dir(body, tx)
        xp = _boundary_dir(body, tx + inner_t[0])
        yp = _boundary_dir(body, tx + inner_t[1])
        y = _boundary_dir(body, tx + span)
        rep.trials += 1
        outer, inner = arc_map_check(body, x, xp, yp, y, samples, tol)
        excess = max(1.0 - outer, inner - 1.0)
        rep.max_excess = max(rep.max_excess, excess)
        if outer < 1.0 - tol or inner >= 1.0 + tol:
            rep.violations.append({"x": x, "xp": xp, "yp": yp, "y": y, "outer": outer, "inner": inner})
    return rep


def window_soft_density(cfg, lam, tess=None, margin=4.0):
    """Area-weighted mean of the refined-cell densities over cells inside the eroded window.

    Returns ``(density, cells_counted)``.
    """
    if tess is None:
        tess = tessellate(cfg, max_circumradius=2.0)
    x0, y0, x1, y1 = cfg.eroded_window(margin)
    num = den = 0.0
    count = 0
    for rc in tess.refined:
        p = rc.polygon
        if p[:, 0].min() < x0 or p[:, 0].max() > x1 or p[:, 1].min() < y0 or p[:, 1].max() > y1:
            continue
        area = abs(rc.area)
        num += cell_soft_density(rc, cfg.body, lam) * area
        den += area
        count += 1
    if count == 0:
        return float("nan"), 0
    return num / den, count
