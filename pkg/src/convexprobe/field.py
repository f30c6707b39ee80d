"""Discretized observations ``dY = (K f) dx + eps dW`` on a periodic grid.

Two ways to observe probe functionals:

* grid mode draws the whole field, one independent ``N(0, dx^d)`` white
  noise increment per cell, and integrates weights against it;
* oracle mode draws a finite set of functionals directly from their
  exact joint Gaussian law (means plus Gram matrix of the weights).

Both are deterministic given the seed.  Seeds may be an int or a tuple of
ints such as ``(master_seed, sweep_index, replication)``; they key a
Philox counter-based stream through ``numpy.random.SeedSequence``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._errors import ConfigurationError

__all__ = [
    "GridSpec",
    "ObservationField",
    "GaussianDraws",
    "rng_for",
    "simulate_grid_field",
    "integrate_against",
    "gram_matrix",
    "exact_gaussian_probe_draws",
]


def rng_for(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        ss = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class GridSpec:
    """Periodic square grid on ``[-R, R)^2`` with ``n`` cells per axis.

    Cell ``i`` sits at ``x_i = -R + i dx``.  The DFT lattice has spacing
    ``pi / R``; its Nyquist lines are left out of every window spectrum so
    that all synthesized weights are exactly real.
    """

    extent: float = 4.0
    n: int = 512

    def __post_init__(self):
        if self.extent < 2.0 + np.sqrt(2.0):
            raise ConfigurationError(
                f"grid extent {self.extent} too small: every probe cube needs extent >= 2 + sqrt(2)"
            )
        n = int(self.n)
        if n != self.n or n < 128 or n & (n - 1):
            raise ConfigurationError(f"grid size must be a power of two >= 128, got {self.n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def dim(self) -> int:
        return 2

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def dx(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def cell_area(self) -> float:
        return self.dx**2

    def axis(self) -> np.ndarray:
        return -self.extent + self.dx * np.arange(self.n)

    def points(self) -> np.ndarray:
        """Cell coordinates, shape ``(n, n, 2)``, first index along x1."""
        a = self.axis()
        x1, x2 = np.meshgrid(a, a, indexing="ij")
        return np.stack([x1, x2], axis=-1)

    def omega_axis(self) -> np.ndarray:
        """Angular frequencies in FFT order (Nyquist entry negative)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, self.dx)

    def omega_half(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, self.dx)

    def freq_sq_rfft(self) -> np.ndarray:
        w1 = self.omega_axis()[:, None]
        w2 = self.omega_half()[None, :]
        return w1**2 + w2**2

    def lattice(self) -> np.ndarray:
        """Full frequency lattice, shape ``(n, n, 2)``."""
        w = self.omega_axis()
        w1, w2 = np.meshgrid(w, w, indexing="ij")
        return np.stack([w1, w2], axis=-1)

    def alternating(self, half=False) -> np.ndarray:
        """``(-1)^(k1 + k2)``: phase of the lattice at the corner ``x = (-R, -R)``."""
        k = np.arange(self.n)
        s1 = 1.0 - 2.0 * (k % 2)
        s2 = s1[: self.n // 2 + 1] if half else s1
        return s1[:, None] * s2[None, :]

    def band_mask(self, half=False) -> np.ndarray:
        """False on the Nyquist row and column."""
        keep = np.ones(self.n, dtype=bool)
        keep[self.n // 2] = False
        keep2 = keep[: self.n // 2 + 1] if half else keep
        return keep[:, None] & keep2[None, :]


@dataclass(frozen=True, eq=False)
class ObservationField:
    """One realization of the cell increments ``dY_i``; read-only."""

    increments: np.ndarray
    grid: GridSpec
    eps: float
    seed: object = None
    kernel: str = ""
    scene: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=float)
        if inc.shape != self.grid.shape:
            raise ValueError("increments do not match the grid")
        inc.setflags(write=False)
        object.__setattr__(self, "increments", inc)

    def spectrum(self) -> np.ndarray:
        """``rfft2`` of the increments, computed once."""
        if "rfft" not in self._cache:
            self._cache["rfft"] = np.fft.rfft2(self.increments)
        return self._cache["rfft"]


def simulate_grid_field(blurred, eps: float, seed, grid: GridSpec, kernel="", scene="") -> ObservationField:
    """Increments ``(K f)(x_i) dx^2 + eps dx Z_i`` with ``Z_i`` iid standard normal.

    ``eps = 0`` gives the noiseless field.
    """
    if not 0.0 <= eps < 1.0:
        raise ConfigurationError(f"noise level must satisfy 0 <= eps < 1, got {eps}")
    kf = np.asarray(getattr(blurred, "values", blurred), dtype=float)
    if kf.shape != grid.shape:
        raise ValueError("blurred field does not match the grid")
    inc = kf * grid.cell_area
    if eps > 0:
        z = rng_for(seed).standard_normal(grid.shape)
        inc = inc + eps * grid.dx * z
    return ObservationField(inc, grid, float(eps), seed, kernel, scene)


def integrate_against(obs: ObservationField, weights) -> float:
    """Riemann-Ito sum ``sum_i w(x_i) dY_i``."""
    w = np.asarray(weights, dtype=float)
    if w.shape != obs.grid.shape:
        raise ValueError(f"weights of shape {w.shape} do not live on grid {obs.grid.shape}")
    return float(np.vdot(w, obs.increments))


def gram_matrix(psi_grids, grid: GridSpec) -> np.ndarray:
    """Grid inner products ``<psi_i, psi_j> = dx^2 sum psi_i psi_j``."""
    p = np.asarray([np.asarray(g, dtype=float).ravel() for g in psi_grids])
    return grid.cell_area * (p @ p.T)


class GaussianDraws(NamedTuple):
    values: np.ndarray
    jitter: float


def _factor(gram):
    """Lower Cholesky factor, adding diagonal jitter when needed."""
    gram = 0.5 * (gram + gram.T)
    m = len(gram)
    try:
        return np.linalg.cholesky(gram), 0.0
    except np.linalg.LinAlgError:
        pass
    base = 1e-12 * np.trace(gram) / m
    jitter = base
    for _ in range(12):
        try:
            return np.linalg.cholesky(gram + jitter * np.eye(m)), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise np.linalg.LinAlgError("Gram matrix could not be regularized")


def exact_gaussian_probe_draws(means, psi_grids=None, eps=0.0, seed=None, *, gram=None, grid=None, size=None):
    """Draw ``means + eps C z`` where ``C C^T`` is the Gram matrix of the weights.

    Pass either ``psi_grids`` (with ``grid``) or a precomputed ``gram``.
    ``size`` adds a leading replication axis.  Returns the draws and the
    diagonal jitter used to factor the Gram matrix (0 when none).
    """
    means = np.asarray(means, dtype=float)
    if gram is None:
        if psi_grids is None or grid is None:
            raise ValueError("need psi_grids and grid, or a Gram matrix")
        gram = gram_matrix(psi_grids, grid)
    gram = np.asarray(gram, dtype=float)
    if gram.shape != (means.size, means.size):
        raise ValueError("Gram matrix size does not match the number of means")
    if eps == 0:
        vals = means.copy() if size is None else np.broadcast_to(means, (size,) + means.shape).copy()
        return GaussianDraws(vals, 0.0)
    chol, jitter = _factor(gram)
    shape = (means.size,) if size is None else (size, means.size)
    z = rng_for(seed).standard_normal(shape)
    return GaussianDraws(means + eps * z @ chol.T, jitter)
