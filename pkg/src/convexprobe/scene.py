"""Intensity functions on convex supports and exact probe oracles.

Probe geometry: because every body sits inside the unit disk, the cube
probe at ``(u, r)`` (faces ``x.u = r`` and ``x.u = r + 2``, lateral half
width 1) meets the body exactly in the cap ``{x in G : x.u >= r}``.  All
oracles integrate in the rotated frame ``y1 = x.u``, ``y2 = x.u_perp``,
where the body's cross-section at ``y1`` is the chord ``[lo, hi]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from ._errors import ConfigurationError, NumericalError
from .geometry import ConvexBody, Disk, Ellipse, Polygon, perp, unit_vector
from .mollifier import MollifierSpec, ProbeLocation

__all__ = [
    "IntensityModel",
    "MassClassParams",
    "eval_intensity",
    "probe_functional_exact",
    "window_functional",
    "fit_alpha",
    "rasterize",
]

PROFILES = ("sharp", "boundary_power")


@dataclass(frozen=True, eq=False)
class IntensityModel:
    """Image ``f`` supported on ``body`` with ``0 <= f <= M``.

    ``sharp``: ``f = level`` on the body.
    ``boundary_power``: ``f(x) = min(M, scale * dist(x, boundary)^gamma)``.
    """

    body: ConvexBody
    profile: str = "sharp"
    level: float = 1.0
    gamma: float = 0.0
    scale: float = 1.0
    M: float = 1.0

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ConfigurationError(f"unknown intensity profile {self.profile!r}")
        if not self.M > 0:
            raise ConfigurationError("bound M must be positive")
        if self.profile == "sharp" and not 0 < self.level <= self.M:
            raise ConfigurationError("sharp level must lie in (0, M]")
        if self.profile == "boundary_power" and (self.gamma < 0 or not self.scale > 0):
            raise ConfigurationError("boundary_power needs gamma >= 0 and scale > 0")

    @classmethod
    def sharp(cls, body, level=1.0, M=None):
        return cls(body, "sharp", level=level, M=level if M is None else M)

    @classmethod
    def boundary_power(cls, body, gamma, scale=1.0, M=1.0):
        return cls(body, "boundary_power", gamma=gamma, scale=scale, M=M)

    @property
    def name(self) -> str:
        b = type(self.body).__name__.lower()
        if self.profile == "sharp":
            return f"{b}/sharp({self.level:g})"
        return f"{b}/boundary_power({self.gamma:g},{self.scale:g})"

    def __call__(self, x):
        return eval_intensity(self, x)

    def nominal_alpha(self, u) -> float:
        """Mass index of the slab at ``u`` for the built-in bodies.

        Smooth, curved boundaries give ``3/2 + gamma``; a polygon gives
        ``1 + gamma`` along a face normal and ``2 + gamma`` at a vertex.
        """
        g = self.gamma if self.profile == "boundary_power" else 0.0
        if isinstance(self.body, Polygon):
            u = unit_vector(u)
            proj = self.body.vertices @ u
            top = np.sum(proj >= proj.max() - 1e-9)
            return (1.0 if top >= 2 else 2.0) + g
        return 1.5 + g


class MassClassParams(NamedTuple):
    alpha: float
    Q: float
    Delta: float = 0.2

    @classmethod
    def checked(cls, alpha, Q, Delta=0.2):
        if alpha < 1:
            raise ConfigurationError("mass index alpha must be >= 1 for convex supports")
        if not (Q > 0 and Delta > 0):
            raise ConfigurationError("Q and Delta must be positive")
        return cls(float(alpha), float(Q), float(Delta))


def eval_intensity(model: IntensityModel, x):
    x = np.asarray(x, dtype=float)
    inside = model.body.contains(x)
    if model.profile == "sharp":
        vals = np.where(inside, model.level, 0.0)
    else:
        d = model.body.distance_to_boundary(x)
        with np.errstate(divide="ignore"):
            vals = np.minimum(model.M, model.scale * d**model.gamma)
        vals = np.where(inside, vals, 0.0)
    return vals if vals.ndim else float(vals)


def _intensity_local(model, u, y1, y2):
    """``f`` at rotated coordinates (scalar y1, vector y2)."""
    pts = np.outer(np.atleast_1d(y2), perp(u)) + y1 * u
    return eval_intensity(model, pts)


def _quad(func, a, b, tol, points=None):
    """scipy quad that turns non-convergence into NumericalError."""
    if b <= a:
        return 0.0
    pts = None
    if points is not None:
        pts = [p for p in points if a < p < b] or None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(func, a, b, epsabs=tol, epsrel=0.0, limit=200, points=pts)
        except integrate.IntegrationWarning as exc:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                _, err = integrate.quad(func, a, b, epsabs=tol, epsrel=0.0, limit=200, points=pts)
            raise NumericalError(f"quadrature did not reach tolerance {tol:g}: {exc}", achieved=err) from None
    return val


def _saturation_depth(model) -> float:
    """Boundary distance beyond which ``f`` sits at the cap ``M``."""
    if model.scale <= 0 or model.gamma == 0:
        return 0.0 if model.scale >= model.M else np.inf
    return float((model.M / model.scale) ** (1.0 / model.gamma))


def _breakpoints(model, u, lo, hi, extra=()):
    pts = list(extra) + list(model.body.kinks(u))
    if model.profile == "boundary_power":
        # chords tangent to the saturated core (exact for disks)
        d0 = _saturation_depth(model)
        if np.isfinite(d0):
            pts += [float(model.body.support(u)) - d0, d0 - float(model.body.support(-np.asarray(u)))]
    return sorted(p for p in pts if lo < p < hi)


def _chord_kinks(model, u, y1, lo, hi):
    """Ridge and saturation crossings of ``f`` along a chord.

    The interior distance of a convex body is concave, so along a chord
    it has one maximum (where it may kink) and reaches the saturation
    depth at most twice.
    """
    v = perp(u)

    def dist(y2):
        return float(np.ravel(model.body.distance_to_boundary(y1 * u + y2 * v))[0])

    res = optimize.minimize_scalar(lambda t: -dist(t), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12 * max(1.0, hi - lo)})
    top, dmax = float(res.x), -float(res.fun)
    pts = [top]
    d0 = _saturation_depth(model)
    if 0 < d0 < dmax:
        pts += [optimize.brentq(lambda t: dist(t) - d0, lo, top, xtol=1e-14),
                optimize.brentq(lambda t: dist(t) - d0, top, hi, xtol=1e-14)]
    return pts


def _inner_mass(model, u, y1, weight=None, tol=1e-10):
    """``int f(y1, y2) w(y2) dy2`` over the chord at ``y1``."""
    lo, hi = model.body.chord(u, y1)
    lo, hi = float(lo), float(hi)
    if not np.isfinite(lo) or hi <= lo:
        return 0.0
    if model.profile == "sharp" and weight is None:
        return model.level * (hi - lo)
    if model.profile == "sharp":
        return model.level * (weight.ramp_antiderivative(hi) - weight.ramp_antiderivative(lo))

    def g(y2):
        v = _intensity_local(model, u, y1, y2)[0]
        return v if weight is None else v * weight.ramp(y2)

    mid = _chord_kinks(model, u, y1, lo, hi)
    if weight is not None:
        d = weight.delta
        mid += [-1 + d, 1 - d]
    return _quad(g, lo, hi, tol, points=mid)


def probe_functional_exact(model: IntensityModel, tau: ProbeLocation, tol=1e-8, method="auto") -> float:
    """Mass of ``f`` inside the cube probe ``E_tau``.

    ``method="auto"`` uses closed forms for sharp profiles (cap areas) and
    nested adaptive quadrature otherwise; ``method="quadrature"`` forces
    the quadrature path, which serves as an independent oracle.
    """
    u = tau.u
    h = float(model.body.support(u))
    r = tau.r
    if r >= h:
        return 0.0
    if model.profile == "sharp" and method == "auto":
        return model.level * float(model.body.cap_area(u, r))
    inner_tol = tol / 10.0
    bps = _breakpoints(model, u, r, h)
    return _quad(lambda y1: _inner_mass(model, u, y1, tol=inner_tol), r, h, tol, points=bps)


def window_functional(model: IntensityModel, tau: ProbeLocation, spec: MollifierSpec, tol=1e-9) -> float:
    """``<f, phi_{tau, delta}>``, the mean of the probe estimator.

    In local cube coordinates the window is ``p(y1 - 1 - r) p(y2)``.
    """
    u = tau.u
    h = float(model.body.support(u))
    r = tau.r
    if r >= h:
        return 0.0
    c = 1.0 + r
    d = spec.delta
    bps = _breakpoints(model, u, r, h, extra=[r + d])

    def outer(y1):
        w = float(spec.ramp(y1 - c))
        if w == 0.0:
            return 0.0
        return w * _inner_mass(model, u, y1, weight=spec, tol=tol / 10.0)

    return _quad(outer, r, h, tol, points=bps)


def fit_alpha(model: IntensityModel, u, eta_grid, tol=1e-10):
    """Least-squares fit of ``log l_f(u, h(u) - eta) = log Q + alpha log eta``.

    Returns ``(alpha_hat, Q_hat)``.
    """
    u = unit_vector(u)
    eta = np.asarray(eta_grid, dtype=float)
    if eta.size < 5:
        raise ValueError("need at least 5 depths to fit the mass index")
    if np.any(eta <= 0):
        raise ValueError("depths must be positive")
    if eta.max() / eta.min() < 10.0 * (1 - 1e-12):
        raise ValueError("depths must span at least one decade")
    h = float(model.body.support(u))
    if eta.max() > h:
        raise ValueError("depths must not exceed the support value")
    mass = np.array([probe_functional_exact(model, ProbeLocation(u, h - e), tol=tol) for e in eta])
    if np.any(mass <= 0):
        raise ValueError(f"direction {u} sees no mass on part of the depth grid")
    slope, intercept = np.polyfit(np.log(eta), np.log(mass), 1)
    return float(slope), float(np.exp(intercept))


def rasterize(model: IntensityModel, grid, supersample: int = 4) -> np.ndarray:
    """Cell averages of ``f`` on ``grid`` using ``supersample^2`` points per cell."""
    pts = grid.points()
    out = np.zeros(grid.shape)
    offs = ((np.arange(supersample) + 0.5) / supersample - 0.5) * grid.dx
    # only cells near the unit disk can be nonzero
    ax = grid.axis()
    keep = np.abs(ax) <= 1.0 + grid.dx
    sub = pts[np.ix_(keep, keep)]
    acc = np.zeros(sub.shape[:2])
    for a in offs:
        for b in offs:
            acc += eval_intensity(model, sub + np.array([a, b]))
    out[np.ix_(keep, keep)] = acc / supersample**2
    return out


def make_body(shape: str, **params) -> ConvexBody:
    """Body from a config block: disk(radius, center), ellipse(a, b, center, angle), polygon(vertices)."""
    shape = shape.lower()
    try:
        if shape == "disk":
            return Disk(**params)
        if shape == "ellipse":
            return Ellipse(**params)
        if shape == "polygon":
            return Polygon(params["vertices"])
        if shape == "square":
            s = float(params["half_side"])
            return Polygon([[-s, -s], [s, -s], [s, s], [-s, s]])
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigurationError(f"invalid {shape} parameters {params}: {exc}") from None
    raise ConfigurationError(f"unknown body shape {shape!r}")
