"""Smooth cube windows and their Fourier transforms.

The one-dimensional cutoff ``p_delta`` equals 1 on ``[-1+delta, 1-delta]``,
vanishes outside ``[-1, 1]`` and climbs on each side through the
normalized cumulative integral of the bump

    gamma(t) = exp(-1 / (t (1 - t))),    0 < t < 1.

Writing ``Gamma`` for that cumulative (``Gamma(0) = 0``, ``Gamma(1) = 1``)
the left ramp is ``p_delta(x) = Gamma((x + 1) / delta)`` and the right ramp
is its mirror image.

Fourier convention: ``q_hat(w) = int q(x) exp(i w x) dx``.  Integrating by
parts and using the symmetry of ``gamma`` about 1/2 gives

    p_hat_delta(lam) = 2 sin(lam (1 - delta/2)) / lam * B(lam delta),

    B(s) = int_0^1 c gamma(t) cos(s (t - 1/2)) dt,   c = 1 / int gamma,

so a single delta-independent table of ``B`` serves every window width.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from ._errors import ConfigurationError
from .geometry import perp, unit_vector

__all__ = [
    "ProbeLocation",
    "MollifierSpec",
    "bump",
    "ramp_p_delta",
    "phi_delta_eval",
    "phi_tau_delta_eval",
    "phi_hat_delta_1d",
    "phi_hat_delta",
    "phi_hat_tau_delta",
    "decay_constant",
]

RAMP_TABLE_SIZE = 4096
_GL_NODES = 16
_SPECTRUM_PAD = 256
_SPECTRUM_SMAX = 4000.0


def bump(t):
    """``exp(-1/(t(1-t)))`` on (0, 1), zero elsewhere."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    safe = np.where(inside, t, 0.5)
    return np.where(inside, np.exp(-1.0 / (safe * (1.0 - safe))), 0.0)


class _RampTable:
    """Cumulative of the normalized bump on [0, 1] and its antiderivative.

    Node values come from 16-point Gauss-Legendre on each cell of the
    half interval, mirrored so that ``Gamma(1 - t) = 1 - Gamma(t)`` holds
    to rounding and ``Gamma(1/2) = 1/2`` exactly.
    """

    def __init__(self, size=RAMP_TABLE_SIZE):
        if size % 2:
            raise ValueError("ramp table size must be even")
        half = size // 2
        t = np.linspace(0.0, 1.0, size + 1)
        xg, wg = np.polynomial.legendre.leggauss(_GL_NODES)
        h = 1.0 / size
        left = t[:half, None] + 0.5 * h * (xg + 1.0)
        cells = 0.5 * h * (bump(left) @ wg)
        cum = np.concatenate([[0.0], np.cumsum(cells)])
        norm = 2.0 * cum[-1]
        gam_half = cum / norm
        gam = np.concatenate([gam_half, 1.0 - gam_half[-2::-1]])
        gam[half] = 0.5
        self.size = size
        self.norm = norm
        self.t = t
        self.values = gam
        self.spline = CubicHermiteSpline(t, gam, bump(t) / norm)
        self.integral = self.spline.antiderivative()

    def cumulative(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return np.clip(self.spline(t), 0.0, 1.0)

    def cumulative_integral(self, t):
        """``int_0^t Gamma``; equals 1/2 at t = 1 by symmetry."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return self.integral(t)


class _BumpSpectrum:
    """Table of ``B(s)`` from a zero-padded FFT of the sampled bump.

    The bump and all its derivatives vanish at 0 and 1, so the trapezoid
    rule on the ramp grid is spectrally accurate; zero padding by
    ``_SPECTRUM_PAD`` refines the frequency spacing to ``2 pi / pad``.
    """

    def __init__(self, table: _RampTable):
        m = table.size
        t = np.arange(m) / m
        samples = np.zeros(m * _SPECTRUM_PAD)
        samples[:m] = bump(t) / table.norm / m
        spec = np.fft.rfft(samples)
        s = 2.0 * np.pi * np.arange(spec.size) / _SPECTRUM_PAD
        keep = s <= _SPECTRUM_SMAX
        vals = (spec[keep] * np.exp(0.5j * s[keep])).real
        self.smax = s[keep][-1]
        self.spline = CubicSpline(s[keep], vals)

    def __call__(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        out = np.zeros_like(s)
        inside = s <= self.smax
        out[inside] = self.spline(s[inside])
        return out


@lru_cache(maxsize=None)
def _ramp_table() -> _RampTable:
    return _RampTable()


@lru_cache(maxsize=None)
def _bump_spectrum() -> _BumpSpectrum:
    return _BumpSpectrum(_ramp_table())


@dataclass(frozen=True)
class ProbeLocation:
    """Cube probe position ``tau = (u, r)`` with ``r`` in [0, 1].

    The probe cube has half-side 1, faces along ``(u, u_perp)``, and is
    centred at ``(1 + r) u``; its face nearest the origin lies on
    ``x.u = r``.
    """

    u: np.ndarray
    r: float

    def __post_init__(self):
        u = unit_vector(np.array(self.u, dtype=float))
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"probe offset r must lie in [0, 1], got {self.r}")
        object.__setattr__(self, "r", float(self.r))

    @property
    def rotation(self) -> np.ndarray:
        """Rotation ``A_u`` with ``A_u e1 = u``."""
        u1, u2 = self.u
        return np.array([[u1, -u2], [u2, u1]])

    @property
    def center(self) -> np.ndarray:
        return (1.0 + self.r) * self.u

    def to_local(self, x):
        """Cube coordinates ``A_u^{-1} (x - center)``; the cube is [-1, 1]^2."""
        return (np.asarray(x, dtype=float) - self.center) @ self.rotation

    def contains(self, x):
        return np.all(np.abs(self.to_local(x)) <= 1.0 + 1e-12, axis=-1)

    def corners(self):
        sq = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
        return sq @ self.rotation.T + self.center


@dataclass(frozen=True)
class MollifierSpec:
    """Window width ``delta`` in (0, 1) plus the shared ramp table."""

    delta: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ConfigurationError(f"window width delta must lie in (0, 1), got {self.delta}")
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def ramp_table(self) -> _RampTable:
        return _ramp_table()

    def ramp(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        edge = self.ramp_table.cumulative((1.0 - ax) / self.delta)
        return np.where(ax <= 1.0 - self.delta, 1.0, np.where(ax < 1.0, edge, 0.0))

    def ramp_antiderivative(self, x):
        """``int_{-1}^x p_delta``; runs from 0 to ``2 - delta``."""
        x = np.asarray(x, dtype=float)
        d = self.delta
        total = 2.0 - d
        neg = -np.abs(x)
        left = np.where(
            neg <= -1.0,
            0.0,
            np.where(
                neg < -1.0 + d,
                d * self.ramp_table.cumulative_integral((neg + 1.0) / d),
                0.5 * d + (neg + 1.0 - d),
            ),
        )
        return np.where(x <= 0, left, total - left)

    def fourier(self, lam):
        lam = np.asarray(lam, dtype=float)
        a = 1.0 - 0.5 * self.delta
        return 2.0 * a * np.sinc(lam * a / np.pi) * _bump_spectrum()(lam * self.delta)

    def window(self, y):
        """Tensor-product window on local cube coordinates ``y[..., :2]``."""
        y = np.asarray(y, dtype=float)
        return self.ramp(y[..., 0]) * self.ramp(y[..., 1])

    def window_fourier(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.fourier(omega[..., 0]) * self.fourier(omega[..., 1])


def ramp_p_delta(spec: MollifierSpec, x):
    return spec.ramp(x)


def phi_delta_eval(spec: MollifierSpec, x):
    """Window ``prod_j p_delta(x_j)``, supported on the cube [-1, 1]^2."""
    return spec.window(x)


def phi_tau_delta_eval(spec: MollifierSpec, tau: ProbeLocation, x):
    """Probe window ``phi_delta(A_u^{-1}(x - (1 + r) u))``, supported on the probe cube."""
    return spec.window(tau.to_local(x))


def phi_hat_delta_1d(spec: MollifierSpec, lam):
    return spec.fourier(lam)


def phi_hat_delta(spec: MollifierSpec, omega):
    return spec.window_fourier(omega)


def phi_hat_tau_delta(spec: MollifierSpec, tau: ProbeLocation, omega):
    """Transform of the probe window: ``exp(i (1+r) u.w) * phi_hat_delta(A_u^{-1} w)``.

    Only the phase depends on ``r``.
    """
    omega = np.asarray(omega, dtype=float)
    a = omega @ tau.u
    b = omega @ perp(tau.u)
    phase = np.exp(1j * (1.0 + tau.r) * a)
    return phase * spec.fourier(a) * spec.fourier(b)


def decay_constant(spec: MollifierSpec, k=4, lam_max=200.0, num=200001) -> float:
    """Empirical ``sup |p_hat_delta(lam)| (1 + |lam|)^k`` over [0, lam_max]."""
    lam = np.linspace(0.0, lam_max, num)
    return float(np.max(np.abs(spec.fourier(lam)) * (1.0 + lam) ** k))
