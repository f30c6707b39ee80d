"""Deconvolving probe estimator of support functions.

For a probe ``tau = (u, r)`` and window width ``delta`` the adjoint weight
``psi`` has transform ``phi_hat_tau / K_hat``, so that
``<Kf, psi> = <f, phi_tau>``.  The probe statistic is
``l_tilde(tau) = int psi dY``; the support estimate in direction ``u`` is
the largest ``r`` on a descending grid whose statistic reaches the
threshold ``theta``.

On the periodic grid ``[-R, R)^2`` the weight is synthesized from the DFT
lattice ``w_k = pi k / R``:

    psi(x_j) = (2R)^-2 sum_k F_k exp(-i w_k . x_j),   F = phi_hat_tau / K_hat,

with the Nyquist row and column dropped.  Substituting into
``sum_j psi(x_j) dY_j`` gives the statistic directly in frequency space,

    l_tilde = (2R)^-2 Re sum_k F_k s_k Yhat_k,    s_k = (-1)^(k1 + k2),

and since only the phase ``exp(i (1 + r) u . w)`` of ``F`` depends on
``r``, a whole r-scan costs two small matrix products per direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import toeplitz

from ._errors import ConfigurationError
from .field import GridSpec, ObservationField, exact_gaussian_probe_draws, simulate_grid_field
from .geometry import Polygon, SupportProfile, direction_grid, halfplane_intersection, perp, unit_vector
from .kernel import BlurKernel, blur_on_grid, validate_assumption1
from .mollifier import MollifierSpec, ProbeLocation, phi_hat_tau_delta
from .scene import IntensityModel, rasterize, window_functional

__all__ = [
    "EstimatorConfig",
    "SupportEstimate",
    "Reconstruction",
    "GridObservation",
    "OracleObservation",
    "delta_star",
    "theta_star",
    "r_grid",
    "psi_spectrum",
    "psi_on_grid",
    "psi_norm",
    "estimate_probe",
    "estimate_support",
    "reconstruct_body",
    "observe",
]

SCAN_CHUNK = 32


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning inputs.  ``eps = 0`` is allowed only with both overrides set."""

    eps: float
    L: float = 1.0
    beta: float = 1.0
    M: float = 1.0
    C3: float = 8.0
    delta_override: Optional[float] = None
    theta_override: Optional[float] = None
    r_grid_n: int = 128

    def __post_init__(self):
        noiseless_ok = self.delta_override is not None and self.theta_override is not None
        if not (0.0 < self.eps < 1.0 or (self.eps == 0.0 and noiseless_ok)):
            raise ConfigurationError(f"eps must lie in (0, 1), got {self.eps}")
        if not (self.L > 0 and self.M > 0 and self.C3 > 0 and self.beta >= 0):
            raise ConfigurationError("need L, M, C3 > 0 and beta >= 0")
        if int(self.r_grid_n) != self.r_grid_n or self.r_grid_n < 64:
            raise ConfigurationError(f"r_grid_n must be an integer >= 64, got {self.r_grid_n}")
        if self.delta_override is not None and not 0.0 < self.delta_override < 1.0:
            raise ConfigurationError("delta_override must lie in (0, 1)")
        if self.theta_override is not None and not self.theta_override > 0:
            raise ConfigurationError("theta_override must be positive")
        object.__setattr__(self, "r_grid_n", int(self.r_grid_n))


def _rule(bracket, beta, what):
    val = bracket ** (1.0 / (beta + 0.5))
    if not val < 1.0:
        raise ConfigurationError(f"{what} = {val:.4g} >= 1: eps not small enough for this (L, M, beta)")
    return float(val)


def delta_star(cfg: EstimatorConfig) -> float:
    """``((eps / (L M)) sqrt(ln(1/eps)))^(1 / (beta + 1/2))`` unless overridden."""
    if cfg.delta_override is not None:
        return float(cfg.delta_override)
    e = cfg.eps
    return _rule(e / (cfg.L * cfg.M) * np.sqrt(np.log(1.0 / e)), cfg.beta, "delta_*")


def theta_star(cfg: EstimatorConfig) -> float:
    """``((eps / L) M^(beta - 1/2) sqrt(C3 ln(1/eps)))^(1 / (beta + 1/2))`` unless overridden."""
    if cfg.theta_override is not None:
        return float(cfg.theta_override)
    e = cfg.eps
    br = e / cfg.L * cfg.M ** (cfg.beta - 0.5) * np.sqrt(cfg.C3 * np.log(1.0 / e))
    return _rule(br, cfg.beta, "theta_*")


def r_grid(cfg: EstimatorConfig) -> np.ndarray:
    """Descending scan offsets ``1 - k / r_grid_n``, k = 0..r_grid_n."""
    n = cfg.r_grid_n
    return 1.0 - np.arange(n + 1) / n


@lru_cache(maxsize=32)
def _check_kernel(kernel: BlurKernel, L: float, beta: float, grid: GridSpec):
    rep = validate_assumption1(kernel, L, beta, grid.lattice())
    if not rep.passed:
        raise ConfigurationError(
            f"kernel {kernel.name} violates |K_hat| >= L (1+|w|^2)^(-beta/2) with "
            f"L={L:g}, beta={beta:g} (min ratio {rep.min_ratio:.3g})"
        )
    return rep


def psi_spectrum(tau: ProbeLocation, delta: float, kernel: BlurKernel, grid: GridSpec) -> np.ndarray:
    """``phi_hat_tau / K_hat`` on the full lattice, Nyquist lines zeroed."""
    _check_kernel(kernel, kernel.L, kernel.beta, grid)
    lat = grid.lattice()
    spec = MollifierSpec(delta)
    F = phi_hat_tau_delta(spec, tau, lat) / kernel.fourier(lat)
    return np.where(grid.band_mask(), F, 0.0)


def psi_on_grid(tau: ProbeLocation, delta: float, kernel: BlurKernel, grid: GridSpec) -> np.ndarray:
    """Adjoint weight ``psi_{tau, delta}`` sampled at the grid cells."""
    F = psi_spectrum(tau, delta, kernel, grid)
    psi = np.fft.fft2(F * grid.alternating()) / (2.0 * grid.extent) ** 2
    scale = np.abs(psi).max()
    if scale > 0 and np.abs(psi.imag).max() > 1e-8 * scale:
        raise ArithmeticError("adjoint weight is not real; spectrum lost its symmetry")
    return psi.real


def _half_weights(grid: GridSpec) -> np.ndarray:
    """Multiplicity of each rfft2 entry in the full band-limited lattice."""
    w = np.where(grid.band_mask(half=True), 2.0, 0.0)
    w[:, 0] = np.where(grid.band_mask()[:, 0], 1.0, 0.0)
    return w


class _DirectionSpectrum:
    """Half-lattice window amplitude ``p_hat(u.w) p_hat(u_perp.w)`` for one ``u``."""

    def __init__(self, u, delta, grid):
        u = unit_vector(u)
        w1 = grid.omega_axis()[:, None]
        w2 = grid.omega_half()[None, :]
        spec = MollifierSpec(delta)
        a = w1 * u[0] + w2 * u[1]
        v = perp(u)
        b = w1 * v[0] + w2 * v[1]
        self.u = u
        self.amp = spec.fourier(a) * spec.fourier(b)
        self.w1 = grid.omega_axis()
        self.w2 = grid.omega_half()

    def phase_sum(self, weights, rho):
        """``Re sum_k weights_k exp(i rho u.w_k)`` for each ``rho``."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        e1 = np.exp(1j * np.outer(self.w1, rho * self.u[0]))
        e2 = np.exp(1j * np.outer(self.w2, rho * self.u[1]))
        return np.einsum("km,km->m", e1, weights @ e2).real


@lru_cache(maxsize=256)
def _direction_spectrum(u: tuple, delta: float, grid: GridSpec) -> _DirectionSpectrum:
    return _DirectionSpectrum(np.array(u), delta, grid)


def _spectrum_for(u, delta, grid):
    u = unit_vector(u)
    if grid.n > 512:
        # too large to keep hundreds of these around
        return _DirectionSpectrum(u, delta, grid)
    return _direction_spectrum((float(u[0]), float(u[1])), float(delta), grid)


def _norm_sq(ds: _DirectionSpectrum, kinv_half, hw, grid):
    return float(np.sum(hw * np.abs(ds.amp * kinv_half) ** 2) / (2.0 * grid.extent) ** 2)


def psi_norm(tau: ProbeLocation, delta: float, kernel: BlurKernel, grid: GridSpec) -> float:
    """``||psi||`` from the lattice Parseval sum ``(2R)^-2 sum |F_k|^2``."""
    _check_kernel(kernel, kernel.L, kernel.beta, grid)
    ds = _spectrum_for(tau.u, delta, grid)
    kinv = 1.0 / kernel.fourier_radial(grid.freq_sq_rfft())
    return float(np.sqrt(_norm_sq(ds, kinv, _half_weights(grid), grid)))


class ScanResult(NamedTuple):
    r: np.ndarray
    values: np.ndarray
    sigma: float
    jitter: float = 0.0


class GridObservation:
    """One observed field plus the blur kernel, ready for probe scans."""

    mode = "grid"

    def __init__(self, obs: ObservationField, kernel: BlurKernel):
        self.field = obs
        self.kernel = kernel
        self.grid = obs.grid
        self.eps = obs.eps
        g = self.grid
        self._kinv = 1.0 / kernel.fourier_radial(g.freq_sq_rfft())
        self._hw = _half_weights(g)
        self._data = (
            self._hw * g.alternating(half=True) * obs.spectrum() * self._kinv / (2.0 * g.extent) ** 2
        )

    def probe(self, tau: ProbeLocation, delta: float) -> float:
        return float(self.scan(tau.u, delta, [tau.r]).values[0])

    def scan(self, u, delta, rs, threshold=None, stream=0) -> ScanResult:
        """Statistic at each offset in ``rs`` (descending), one shared field.

        With ``threshold`` set the scan stops after the first chunk that
        contains a crossing; unscanned entries are NaN.
        """
        rs = np.asarray(rs, dtype=float)
        ds = _spectrum_for(u, delta, self.grid)
        w = ds.amp * self._data
        sigma = self.eps * np.sqrt(_norm_sq(ds, self._kinv, self._hw, self.grid))
        vals = np.full(rs.shape, np.nan)
        step = rs.size if threshold is None else SCAN_CHUNK
        for start in range(0, rs.size, step):
            sl = slice(start, start + step)
            vals[sl] = ds.phase_sum(w, 1.0 + rs[sl])
            if threshold is not None and np.any(vals[sl] >= threshold):
                break
        return ScanResult(rs, vals, sigma)


@lru_cache(maxsize=65536)
def _window_mean(model: IntensityModel, u: tuple, r: float, delta: float) -> float:
    # replications share the mean; only the noise draw changes
    return window_functional(model, ProbeLocation(np.array(u), r), MollifierSpec(delta))


class OracleObservation:
    """Exact Gaussian law of the probe statistics, drawn per direction.

    Means are ``<f, phi_tau>`` from scene quadrature; covariances are
    ``eps^2 <psi_i, psi_j>`` from the lattice, which equals the grid inner
    product.  All offsets of one direction are drawn jointly; separate
    directions use separate seed streams.
    """

    mode = "oracle"

    def __init__(self, model: IntensityModel, kernel: BlurKernel, grid: GridSpec, eps: float, seed):
        if not 0.0 <= eps < 1.0:
            raise ConfigurationError(f"noise level must satisfy 0 <= eps < 1, got {eps}")
        self.model = model
        self.kernel = kernel
        self.grid = grid
        self.eps = float(eps)
        self.seed = seed
        self._kinv = 1.0 / kernel.fourier_radial(grid.freq_sq_rfft())
        self._hw = _half_weights(grid)

    def means(self, u, delta, rs):
        if self.model is None:
            return np.zeros(len(rs))
        u = unit_vector(u)
        key = (float(u[0]), float(u[1]))
        return np.array([_window_mean(self.model, key, float(r), float(delta)) for r in rs])

    def gram(self, u, delta, rs):
        """``<psi_(u, r_i), psi_(u, r_j)>`` over the offsets ``rs``.

        The covariance depends on ``r_i - r_j`` only; on a uniform grid the
        matrix is Toeplitz.
        """
        rs = np.asarray(rs, dtype=float)
        ds = _spectrum_for(u, delta, self.grid)
        w = self._hw * np.abs(ds.amp * self._kinv) ** 2 / (2.0 * self.grid.extent) ** 2
        diffs = rs[0] - rs
        if rs.size > 1 and np.allclose(np.diff(rs), rs[1] - rs[0], rtol=0, atol=1e-12):
            return toeplitz(ds.phase_sum(w, diffs))
        dd = (rs[:, None] - rs[None, :]).ravel()
        return ds.phase_sum(w, dd).reshape(rs.size, rs.size)

    def probe(self, tau: ProbeLocation, delta: float, stream=0) -> float:
        return float(self.scan(tau.u, delta, [tau.r], stream=stream).values[0])

    def scan(self, u, delta, rs, threshold=None, stream=0) -> ScanResult:
        rs = np.asarray(rs, dtype=float)
        G = self.gram(u, delta, rs)
        seed = None if self.seed is None else tuple(np.atleast_1d(self.seed).tolist()) + (int(stream),)
        draw = exact_gaussian_probe_draws(self.means(u, delta, rs), eps=self.eps, seed=seed, gram=G)
        return ScanResult(rs, draw.values, self.eps * float(np.sqrt(G[0, 0])), draw.jitter)


def observe(model: IntensityModel, kernel: BlurKernel, grid: GridSpec, eps: float, seed, mode="grid", blurred=None):
    """Build an observation handle in grid or oracle mode.

    ``blurred`` lets callers reuse a precomputed ``K f`` across noise draws.
    """
    if mode == "oracle":
        return OracleObservation(model, kernel, grid, eps, seed)
    if mode != "grid":
        raise ConfigurationError(f"unknown observation mode {mode!r}")
    if blurred is None:
        blurred = blur_on_grid(kernel, rasterize(model, grid), grid)
    obs = simulate_grid_field(blurred, eps, seed, grid, kernel=kernel.name, scene=model.name)
    return GridObservation(obs, kernel)


def estimate_probe(handle, tau: ProbeLocation, delta: float, kernel: BlurKernel = None, grid: GridSpec = None) -> float:
    """``l_tilde(tau; delta) = int psi dY``.

    ``handle`` is an ``ObservationField`` (weights synthesized and summed
    in space; pass ``kernel``), a ``GridObservation`` or an
    ``OracleObservation``.
    """
    if isinstance(handle, ObservationField):
        if kernel is None:
            raise ValueError("a raw field needs the kernel")
        if grid is not None and grid != handle.grid:
            raise ValueError("field and grid differ")
        psi = psi_on_grid(tau, delta, kernel, handle.grid)
        return float(np.vdot(psi, handle.increments))
    if kernel is not None and kernel != handle.kernel:
        raise ValueError("handle was built with a different kernel")
    return handle.probe(tau, delta)


@dataclass(frozen=True, eq=False)
class SupportEstimate:
    u: np.ndarray
    h_hat: float
    crossed: bool
    sigma: float = float("nan")
    delta: float = float("nan")
    theta: float = float("nan")
    jitter: float = 0.0
    trace: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.crossed and self.h_hat != 0.0:
            raise ValueError("an uncrossed scan must report h_hat = 0")


def _check_config(cfg: EstimatorConfig, handle):
    if cfg.eps != handle.eps:
        raise ConfigurationError(f"config eps {cfg.eps} differs from observation eps {handle.eps}")
    _check_kernel(handle.kernel, cfg.L, cfg.beta, handle.grid)


def estimate_support(u, cfg: EstimatorConfig, handle, keep_trace=False, stream=0) -> SupportEstimate:
    """First offset on the descending r-grid where the statistic reaches theta."""
    _check_config(cfg, handle)
    u = unit_vector(u)
    delta = delta_star(cfg)
    theta = theta_star(cfg)
    rs = r_grid(cfg)
    res = handle.scan(u, delta, rs, threshold=None if keep_trace else theta, stream=stream)
    hit = np.flatnonzero(res.values >= theta)
    crossed = hit.size > 0
    h_hat = float(rs[hit[0]]) if crossed else 0.0
    trace = np.column_stack([rs, res.values]) if keep_trace else None
    return SupportEstimate(u, h_hat, bool(crossed), res.sigma, delta, theta, res.jitter, trace)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    profile: SupportProfile
    polygon: Polygon
    estimates: tuple
    diagnostics: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return self.polygon.is_empty

    @property
    def degenerate(self) -> bool:
        return self.polygon.degenerate


def reconstruct_body(cfg: EstimatorConfig, n_directions: int, handle) -> Reconstruction:
    """Estimate the support on ``direction_grid(N)`` and intersect half-planes.

    Grid mode probes every direction against the same field.  The
    diagnostics hold the per-direction noise scale ``eps ||psi||`` (and
    its maximum), crossing flags and the tuning values used.
    """
    dirs = direction_grid(n_directions)
    ests = tuple(estimate_support(u, cfg, handle, stream=k) for k, u in enumerate(dirs))
    values = np.array([e.h_hat for e in ests])
    profile = SupportProfile(dirs, values)
    poly = halfplane_intersection(profile)
    sig = np.array([e.sigma for e in ests])
    diag = {
        "sigma_noise": sig,
        "sigma_max": float(sig.max()),
        "crossed": np.array([e.crossed for e in ests]),
        "delta": ests[0].delta,
        "theta": ests[0].theta,
        "r_step": 1.0 / cfg.r_grid_n,
        "jitter_max": max(e.jitter for e in ests),
        "empty": poly.is_empty,
        "degenerate": poly.is_empty or poly.degenerate,
    }
    return Reconstruction(profile, poly, ests, diag)
