"""Planar convex bodies described through their support functions.

Bodies live inside the closed unit disk and contain the origin in their
interior.  Everything here is two-dimensional; ``dim`` is carried on the
bodies so callers can check it.

Rotated frame: for a unit vector ``u`` the frame ``(y1, y2)`` has
``y1 = x.u`` and ``y2 = x.u_perp`` with ``u_perp = (-u2, u1)``.  Probe
windows and chords are expressed in this frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvexBody",
    "Disk",
    "Ellipse",
    "Polygon",
    "Direction",
    "SlabSpec",
    "SupportProfile",
    "unit_vector",
    "perp",
    "direction_grid",
    "support_function",
    "contains",
    "halfplane_intersection",
    "hausdorff_distance",
    "lp_support_metric",
    "polygon_area",
    "clip_halfplane",
]

UNIT_TOL = 1e-12
_VALIDATION_GRID = 3600

# unit 2-vectors are plain float arrays, checked by ``unit_vector``
Direction = np.ndarray


def unit_vector(u) -> np.ndarray:
    """Return ``u`` as a float array after checking it has unit length."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != 2:
        raise ValueError(f"expected a 2-vector, got shape {u.shape}")
    if np.any(np.abs(np.linalg.norm(u, axis=-1) - 1.0) > UNIT_TOL):
        raise ValueError("direction must have unit Euclidean norm")
    return u


def perp(u):
    u = np.asarray(u, dtype=float)
    return np.stack([-u[..., 1], u[..., 0]], axis=-1)


def direction_grid(n: int) -> np.ndarray:
    """``n`` equispaced unit vectors, angles ``2 pi k / n`` for k = 0..n-1."""
    if int(n) != n or n < 3:
        raise ValueError(f"direction grid needs n >= 3, got {n}")
    theta = 2.0 * np.pi * np.arange(int(n)) / int(n)
    return np.column_stack([np.cos(theta), np.sin(theta)])


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def clip_halfplane(vertices, normal, offset, tol=1e-12) -> np.ndarray:
    """Clip a convex polygon to ``{x : x.normal <= offset}``.

    One Sutherland-Hodgman pass.  Points within ``tol`` of the line count
    as inside, so coincident edges are kept.
    """
    v = np.asarray(vertices, dtype=float)
    if len(v) == 0:
        return v.reshape(0, 2)
    normal = np.asarray(normal, dtype=float)
    s = v @ normal - offset
    inside = s <= tol
    if inside.all():
        return v
    if not inside.any():
        return np.empty((0, 2))
    out = []
    nxt = np.roll(np.arange(len(v)), -1)
    for i, j in zip(range(len(v)), nxt):
        if inside[i]:
            out.append(v[i])
        if inside[i] != inside[j]:
            t = s[i] / (s[i] - s[j])
            out.append(v[i] + t * (v[j] - v[i]))
    out = np.array(out)
    return _dedupe(out)


def _dedupe(v, tol=1e-12):
    if len(v) < 2:
        return v
    keep = np.linalg.norm(v - np.roll(v, 1, axis=0), axis=1) > tol
    if not keep.any():
        return v[:1]
    return v[keep]


class ConvexBody:
    """Base class.  Subclasses provide the exact support function."""

    dim = 2

    def support(self, u):
        raise NotImplementedError

    def contains(self, x):
        raise NotImplementedError

    def chord(self, u, y1):
        """Cross-section of the body on the line ``x.u = y1``.

        Returns ``(lo, hi)``, the extent of ``x.u_perp`` along that line,
        with NaN where the line misses the body.
        """
        raise NotImplementedError

    def cap_area(self, u, r) -> float:
        """Area of the part of the body with ``x.u >= r``."""
        raise NotImplementedError

    def distance_to_boundary(self, x):
        """Distance from interior points ``x`` to the boundary (0 outside)."""
        raise NotImplementedError

    def boundary_points(self, n=360) -> np.ndarray:
        raise NotImplementedError

    def kinks(self, u) -> np.ndarray:
        """``y1`` values where the chord length is not smooth."""
        return np.empty(0)

    @property
    def is_empty(self) -> bool:
        return False

    def _validate(self):
        dirs = direction_grid(_VALIDATION_GRID)
        h = self.support(dirs)
        if h.max() > 1.0 + UNIT_TOL:
            raise ValueError(f"body is not contained in the unit disk (max |x| = {h.max():.6g})")
        if h.min() <= 0.0:
            raise ValueError("origin must lie strictly inside the body")


@dataclass(frozen=True, eq=False)
class Disk(ConvexBody):
    radius: float
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")
        self._validate()

    @property
    def _c(self):
        return np.asarray(self.center)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return u @ self._c + self.radius

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x - self._c, axis=-1) <= self.radius + UNIT_TOL

    def chord(self, u, y1):
        u = np.asarray(u, dtype=float)
        c1, c2 = self._c @ u, self._c @ perp(u)
        d2 = self.radius**2 - (np.asarray(y1, dtype=float) - c1) ** 2
        half = np.sqrt(np.where(d2 >= 0, d2, np.nan))
        return c2 - half, c2 + half

    def cap_area(self, u, r):
        return _disk_cap(self.radius, r - self._c @ np.asarray(u, dtype=float))

    def distance_to_boundary(self, x):
        d = self.radius - np.linalg.norm(np.asarray(x, dtype=float) - self._c, axis=-1)
        return np.maximum(d, 0.0)

    def boundary_points(self, n=360):
        return self._c + self.radius * direction_grid(n)


def _disk_cap(rho, d):
    """Area of the segment ``{z in disk(rho) : z.e >= d}``."""
    if d >= rho:
        return 0.0
    if d <= -rho:
        return float(np.pi * rho**2)
    return float(rho**2 * np.arccos(d / rho) - d * np.sqrt(rho**2 - d**2))


@dataclass(frozen=True, eq=False)
class Ellipse(ConvexBody):
    """Ellipse with semi-axes ``a`` (along ``angle``) and ``b``."""

    a: float
    b: float
    center: tuple = (0.0, 0.0)
    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not (self.a > 0 and self.b > 0):
            raise ValueError("ellipse semi-axes must be positive")
        self._validate()

    @property
    def _c(self):
        return np.asarray(self.center)

    @property
    def _rot(self):
        c, s = np.cos(self.angle), np.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    def _local(self, x):
        return (np.asarray(x, dtype=float) - self._c) @ self._rot

    def _h0(self, u):
        w = np.asarray(u, dtype=float) @ self._rot
        return np.sqrt((self.a * w[..., 0]) ** 2 + (self.b * w[..., 1]) ** 2)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return u @ self._c + self._h0(u)

    def contains(self, x):
        p = self._local(x)
        return (p[..., 0] / self.a) ** 2 + (p[..., 1] / self.b) ** 2 <= 1.0 + UNIT_TOL

    def chord(self, u, y1):
        u = np.asarray(u, dtype=float)
        y1 = np.asarray(y1, dtype=float)
        ax2 = np.array([self.a**2, self.b**2])
        d = perp(u) @ self._rot
        p0 = (y1[..., None] * u - self._c) @ self._rot
        qa = np.sum(d**2 / ax2)
        qb = np.sum(p0 * d / ax2, axis=-1)
        qc = np.sum(p0**2 / ax2, axis=-1) - 1.0
        disc = qb**2 - qa * qc
        root = np.sqrt(np.where(disc >= 0, disc, np.nan))
        return (-qb - root) / qa, (-qb + root) / qa

    def cap_area(self, u, r):
        u = np.asarray(u, dtype=float)
        h0 = self._h0(u)
        return self.a * self.b * _disk_cap(1.0, (r - self._c @ u) / h0)

    def distance_to_boundary(self, x):
        p = np.abs(self._local(x))
        inside = (p[..., 0] / self.a) ** 2 + (p[..., 1] / self.b) ** 2 <= 1.0
        d = _ellipse_interior_distance(self.a, self.b, p[..., 0], p[..., 1])
        return np.where(inside, d, 0.0)

    def boundary_points(self, n=360):
        t = 2.0 * np.pi * np.arange(n) / n
        local = np.column_stack([self.a * np.cos(t), self.b * np.sin(t)])
        return self._c + local @ self._rot.T


def _ellipse_interior_distance(a, b, p, q, iters=200):
    """Distance from first-quadrant interior points (p, q) to the ellipse.

    The nearest boundary point is ``(a^2 p / (a^2 + t), b^2 q / (b^2 + t))``
    for the root ``t`` in ``(-min(a, b)^2, 0]`` of the constraint, found by
    bisection.  Points on the major axis beyond the evolute are handled in
    closed form.
    """
    if np.size(p) == 1:
        # scalar calls come from adaptive quadrature; skip numpy overhead
        return np.array([_ellipse_distance_scalar(a, b, float(np.ravel(p)[0]), float(np.ravel(q)[0]))])
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    swap = a < b
    if swap:
        a, b = b, a
        p, q = q, p
    a2, b2 = a * a, b * b
    lo = np.full(p.shape, -b2)
    hi = np.zeros(p.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            f = (a * p / (a2 + mid)) ** 2 + (b * q / (b2 + mid)) ** 2 - 1.0
            lo = np.where(f > 0, mid, lo)
            hi = np.where(f > 0, hi, mid)
            if np.all(hi - lo <= 4 * np.finfo(float).eps * b2):
                break
    t = 0.5 * (lo + hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        x0 = a2 * p / (a2 + t)
        x1 = b2 * q / (b2 + t)
    d = np.hypot(x0 - p, x1 - q)
    # major-axis points inside the evolute: nearest point leaves the axis
    axis = (q == 0) & (p < (a2 - b2) / a)
    if axis.any():
        ex = a2 * p[axis] / (a2 - b2)
        ey = b * np.sqrt(np.clip(1.0 - (ex / a) ** 2, 0.0, None))
        d[axis] = np.hypot(ex - p[axis], ey)
    d = np.where(np.isfinite(d), d, np.minimum(b - q, a - p))
    return d.reshape(np.shape(d))


def _ellipse_distance_scalar(a, b, p, q):
    if a < b:
        a, b, p, q = b, a, q, p
    a2, b2 = a * a, b * b
    if q == 0.0 and p < (a2 - b2) / a:
        ex = a2 * p / (a2 - b2)
        return math.hypot(ex - p, b * math.sqrt(max(1.0 - (ex / a) ** 2, 0.0)))
    lo, hi = -b2, 0.0
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        f = (a * p / (a2 + mid)) ** 2 + (b * q / (b2 + mid)) ** 2 - 1.0
        if f > 0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    try:
        d = math.hypot(a2 * p / (a2 + t) - p, b2 * q / (b2 + t) - q)
    except ZeroDivisionError:
        d = math.inf
    return d if math.isfinite(d) else min(b - q, a - p)


class Polygon(ConvexBody):
    """Convex polygon with counterclockwise vertices.

    ``validate=False`` skips the body checks; half-plane intersections use
    it because estimated sets can be empty, degenerate, or poke outside
    the unit disk.
    """

    def __init__(self, vertices, validate=True):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        self.vertices = v
        self.vertices.setflags(write=False)
        if validate:
            if len(v) < 3:
                raise ValueError("polygon needs at least 3 vertices")
            e = np.roll(v, -1, axis=0) - v
            cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
            if np.any(cross <= 1e-12):
                raise ValueError(
                    "polygon vertices must be in convex position, counterclockwise, "
                    "with no three collinear"
                )
            self._validate()

    def __repr__(self):
        return f"Polygon({len(self.vertices)} vertices, area={self.area:.6g})"

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)

    @property
    def degenerate(self) -> bool:
        return self.is_empty or len(self.vertices) < 3 or self.area <= 1e-14

    def support(self, u):
        if self.is_empty:
            raise ValueError("support function of an empty polygon is undefined")
        u = np.asarray(u, dtype=float)
        return np.max(u @ self.vertices.T, axis=-1)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_empty:
            return np.zeros(x.shape[:-1], dtype=bool)
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        rel = x[..., None, :] - v
        cross = e[:, 0] * rel[..., 1] - e[:, 1] * rel[..., 0]
        return np.all(cross >= -UNIT_TOL, axis=-1)

    def rotated(self, u):
        """Vertices in the ``(x.u, x.u_perp)`` frame."""
        u = np.asarray(u, dtype=float)
        return np.column_stack([self.vertices @ u, self.vertices @ perp(u)])

    def chord(self, u, y1):
        y1 = np.asarray(y1, dtype=float)
        w = self.rotated(u)
        a, b = w, np.roll(w, -1, axis=0)
        t = y1[..., None]
        span = b[:, 0] - a[:, 0]
        lo_e = np.minimum(a[:, 0], b[:, 0])
        hi_e = np.maximum(a[:, 0], b[:, 0])
        hit = (t >= lo_e - UNIT_TOL) & (t <= hi_e + UNIT_TOL)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(span != 0, (t - a[:, 0]) / span, 0.0)
        frac = np.clip(frac, 0.0, 1.0)
        y2a = a[:, 1] + frac * (b[:, 1] - a[:, 1])
        # an edge lying on the line contributes both endpoints
        flat = span == 0
        y2b = np.where(flat, b[:, 1], y2a)
        lo = np.where(hit, np.minimum(y2a, y2b), np.inf).min(axis=-1)
        hi = np.where(hit, np.maximum(y2a, y2b), -np.inf).max(axis=-1)
        miss = ~np.isfinite(lo)
        return np.where(miss, np.nan, lo), np.where(miss, np.nan, hi)

    def cap_area(self, u, r):
        u = np.asarray(u, dtype=float)
        return abs(polygon_area(clip_halfplane(self.vertices, -u, -r)))

    def distance_to_boundary(self, x):
        x = np.asarray(x, dtype=float)
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        n = np.column_stack([e[:, 1], -e[:, 0]]) / np.linalg.norm(e, axis=1)[:, None]
        # outward normals; signed distance inside is offset - x.n
        off = np.sum(n * v, axis=1)
        d = np.min(off - x @ n.T, axis=-1)
        return np.maximum(d, 0.0)

    def kinks(self, u):
        return np.sort(self.vertices @ np.asarray(u, dtype=float))

    def boundary_points(self, n=None):
        return self.vertices.copy()


def support_function(body: ConvexBody, u):
    """Exact support value ``h(u) = max{x.u : x in body}``."""
    return body.support(unit_vector(u))


def contains(body: ConvexBody, x):
    return body.contains(x)


@dataclass(frozen=True, eq=False)
class SlabSpec:
    """The boundary slab ``{x in G : h(u) - depth <= x.u <= h(u)}``."""

    direction: Direction
    depth: float

    def __post_init__(self):
        object.__setattr__(self, "direction", unit_vector(self.direction))
        if not self.depth > 0:
            raise ValueError(f"slab depth must be positive, got {self.depth}")

    def bounds(self, body: ConvexBody):
        """``(h(u) - depth, h(u))``; the depth may not exceed ``h(u)``."""
        h = float(body.support(self.direction))
        if self.depth > h * (1 + UNIT_TOL):
            raise ValueError(f"slab depth {self.depth} exceeds h(u) = {h:.6g}")
        return h - self.depth, h

    def contains(self, body: ConvexBody, x):
        lo, hi = self.bounds(body)
        y = np.asarray(x, dtype=float) @ self.direction
        return body.contains(x) & (y >= lo - UNIT_TOL) & (y <= hi + UNIT_TOL)

    def area(self, body: ConvexBody) -> float:
        lo, _ = self.bounds(body)
        return float(body.cap_area(self.direction, lo))


@dataclass(frozen=True)
class SupportProfile:
    """Support values sampled on a uniform direction grid.

    ``values`` are distances in unit-disk units.  Estimates always fall
    in [0, 1]; arbitrary finite values are accepted so inconsistent
    profiles can be intersected too.
    """

    directions: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if d.ndim != 2 or d.shape[1] != 2 or len(d) < 3:
            raise ValueError("profile needs at least 3 planar directions")
        if v.shape != (len(d),):
            raise ValueError("one value per direction required")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        unit_vector(d)
        theta = np.unwrap(np.arctan2(d[:, 1], d[:, 0]))
        gaps = np.diff(np.append(theta, theta[0] + 2 * np.pi))
        if np.any(np.abs(gaps - 2 * np.pi / len(d)) > 1e-9):
            raise ValueError("directions must be increasing in angle with spacing 2 pi / N")
        d.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "values", v)

    @classmethod
    def of(cls, body: ConvexBody, n: int) -> "SupportProfile":
        dirs = direction_grid(n)
        return cls(dirs, body.support(dirs))

    def __len__(self):
        return len(self.values)


def halfplane_intersection(profile: SupportProfile) -> Polygon:
    """Polygon ``{x : x.u_k <= value_k for all k}``.

    Clips the square [-2, 2]^2 one half-plane at a time.  Inconsistent
    profiles give an empty polygon rather than an error; check
    ``.is_empty`` and ``.degenerate`` on the result.
    """
    poly = np.array([[-2.0, -2.0], [2.0, -2.0], [2.0, 2.0], [-2.0, 2.0]])
    for u, v in zip(profile.directions, profile.values):
        poly = clip_halfplane(poly, u, v)
        if len(poly) == 0:
            break
    return Polygon(poly, validate=False)


def _profiles(a, b, n):
    for body in (a, b):
        if body.is_empty:
            raise ValueError("metric between empty sets is undefined")
    dirs = direction_grid(n)
    return a.support(dirs), b.support(dirs)


def hausdorff_distance(a: ConvexBody, b: ConvexBody, n: int = 720) -> float:
    """Sup-norm distance of support functions over ``direction_grid(n)``.

    For convex sets this is the Hausdorff distance in the limit of a fine
    grid.
    """
    ha, hb = _profiles(a, b, n)
    return float(np.max(np.abs(ha - hb)))


def lp_support_metric(a: ConvexBody, b: ConvexBody, p: float, n: int = 720) -> float:
    """L_p distance of support functions on the circle, weights 2 pi / n."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    ha, hb = _profiles(a, b, n)
    return float((np.sum(np.abs(ha - hb) ** p) * 2 * np.pi / n) ** (1.0 / p))
