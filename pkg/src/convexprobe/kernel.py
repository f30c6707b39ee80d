"""Blur kernels given by their Fourier transforms.

Only strictly positive radial transforms are offered, so the deconvolving
division never meets a zero:

* ``identity``: ``K_hat = 1``.
* ``sobolev(beta)``: ``K_hat(w) = (1 + |w|^2)^(-beta/2)``, the Bessel
  potential.  Its lower bound ``L (1 + |w|^2)^(-beta/2)`` holds with
  equality for ``L = 1``; ``L`` is the declared constant, and a value
  above 1 fails validation.

The kernels are never materialized in space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize, special

from ._errors import ConfigurationError

__all__ = [
    "BlurKernel",
    "KernelBoundReport",
    "BlurredField",
    "kernel_fourier",
    "validate_assumption1",
    "blur_on_grid",
]

FAMILIES = ("identity", "sobolev")


@dataclass(frozen=True)
class BlurKernel:
    family: str = "identity"
    beta: float = 0.0
    L: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if self.family == "identity":
            if self.beta != 0.0 or self.L != 1.0:
                raise ConfigurationError("identity kernel has beta = 0 and L = 1")
        elif not self.beta > 0:
            raise ConfigurationError("sobolev kernel needs beta > 0")
        elif not self.L > 0:
            raise ConfigurationError("declared constant L must be positive")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def sobolev(cls, beta):
        return cls("sobolev", float(beta), 1.0)

    @property
    def name(self) -> str:
        return "identity" if self.family == "identity" else f"sobolev(beta={self.beta:g})"

    def fourier_radial(self, w2):
        """Transform as a function of ``|w|^2``."""
        w2 = np.asarray(w2, dtype=float)
        if self.family == "identity":
            return np.ones_like(w2)
        return (1.0 + w2) ** (-0.5 * self.beta)

    def fourier(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.fourier_radial(np.sum(omega**2, axis=-1))

    def tail_mass(self, rho: float) -> float:
        """Fraction of the kernel's mass outside the disk of radius ``rho``.

        The 2-D Bessel potential is a Gamma(beta/2) mixture of Gaussians
        with variance ``2t`` per coordinate, whose tail beyond ``rho`` is
        ``exp(-rho^2 / (4t))``.
        """
        if self.family == "identity" or rho <= 0:
            return 0.0 if rho > 0 else 1.0
        k = 0.5 * self.beta

        def f(t):
            return np.exp(-rho**2 / (4 * t) - t + (k - 1) * np.log(t) - special.gammaln(k))

        val, _ = integrate.quad(f, 0, np.inf, limit=200)
        return float(min(val, 1.0))

    def effective_width(self, tail=1e-3) -> float:
        """Radius holding all but ``tail`` of the kernel mass."""
        if self.family == "identity":
            return 0.0
        return float(optimize.brentq(lambda r: self.tail_mass(r) - tail, 1e-6, 200.0))


def kernel_fourier(kernel: BlurKernel, omega):
    return kernel.fourier(omega)


class KernelBoundReport(NamedTuple):
    min_ratio: float
    L: float
    beta: float
    passed: bool


def validate_assumption1(kernel: BlurKernel, L: float, beta: float, omega_grid) -> KernelBoundReport:
    """Check ``|K_hat(w)| >= L (1 + |w|^2)^(-beta/2)`` on the given frequencies.

    ``omega_grid`` is an array of frequency vectors (last axis 2).  The
    report holds ``min |K_hat| (1 + |w|^2)^(beta/2)``; it passes when that
    is at least ``L`` up to a relative 1e-12.
    """
    omega = np.asarray(omega_grid, dtype=float).reshape(-1, 2)
    w2 = np.sum(omega**2, axis=-1)
    ratio = np.abs(kernel.fourier_radial(w2)) * (1.0 + w2) ** (0.5 * beta)
    m = float(ratio.min())
    return KernelBoundReport(m, float(L), float(beta), bool(m >= L * (1.0 - 1e-12)))


class BlurredField(NamedTuple):
    values: np.ndarray
    wraparound: bool
    wrap_mass: float


def blur_on_grid(kernel: BlurKernel, f_grid, grid, support_radius=1.0, wrap_tol=1e-3) -> BlurredField:
    """Periodic convolution ``K * f`` on the grid via the DFT.

    ``wraparound`` flags when more than ``wrap_tol`` of the kernel mass
    reaches from the support of ``f`` (a disk of ``support_radius``) to the
    edge of the periodic domain.  On the torus the estimator stays
    consistent either way; the flag only says the blurred image differs
    from its infinite-plane counterpart near the edges.
    """
    f = np.asarray(f_grid, dtype=float)
    if f.shape != grid.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {grid.shape}")
    if kernel.family == "identity":
        return BlurredField(f.copy(), False, 0.0)
    mult = kernel.fourier_radial(grid.freq_sq_rfft())
    out = np.fft.irfft2(np.fft.rfft2(f) * mult, s=grid.shape)
    wrap = kernel.tail_mass(grid.extent - support_radius)
    return BlurredField(out, wrap > wrap_tol, wrap)
