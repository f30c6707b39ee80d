import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from convexprobe import BlurKernel, GridSpec, blur_on_grid, kernel_fourier, validate_assumption1
from convexprobe._errors import ConfigurationError
from convexprobe.geometry import Disk
from convexprobe.scene import IntensityModel, rasterize


def test_fourier_examples():
    assert kernel_fourier(BlurKernel.identity(), [3.0, -4.0]) == 1.0
    assert kernel_fourier(BlurKernel.sobolev(1), [0.0, 0.0]) == 1.0
    assert kernel_fourier(BlurKernel.sobolev(2), [0.6, 0.8]) == pytest.approx(0.5)


def test_invalid_kernels():
    with pytest.raises(ConfigurationError):
        BlurKernel("boxcar")
    with pytest.raises(ConfigurationError):
        BlurKernel.sobolev(0.0)
    with pytest.raises(ConfigurationError):
        BlurKernel("identity", beta=1.0)


def test_lower_bound_reports():
    lat = GridSpec(4.0, 256).lattice()
    rep = validate_assumption1(BlurKernel.sobolev(1), 1.0, 1.0, lat)
    assert rep.passed and rep.min_ratio == pytest.approx(1.0, abs=1e-12)
    assert validate_assumption1(BlurKernel.identity(), 1.0, 0.0, lat).passed
    bad = validate_assumption1(BlurKernel.sobolev(2), 1.0, 1.0, lat)
    assert not bad.passed and bad.min_ratio < 0.01


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 200), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0.1, 4))
def test_radial(rad, a, b, beta):
    k = BlurKernel.sobolev(beta)
    w1 = rad * np.array([np.cos(a), np.sin(a)])
    w2 = rad * np.array([np.cos(b), np.sin(b)])
    assert k.fourier(w1) == pytest.approx(k.fourier(w2), rel=1e-12)


@pytest.fixture(scope="module")
def disk_grid():
    grid = GridSpec(4.0, 256)
    return grid, rasterize(IntensityModel.sharp(Disk(0.7)), grid)


def test_identity_round_trip(disk_grid):
    grid, f = disk_grid
    out = blur_on_grid(BlurKernel.identity(), f, grid)
    assert np.abs(out.values - f).max() <= 1e-12
    assert not out.wraparound


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 3.0])
def test_dc_preservation(disk_grid, beta):
    grid, f = disk_grid
    out = blur_on_grid(BlurKernel.sobolev(beta), f, grid)
    assert out.values.sum() == pytest.approx(f.sum(), rel=1e-8)


def test_linearity(disk_grid):
    grid, f = disk_grid
    g = np.roll(f, 17, axis=0) * 0.3
    k = BlurKernel.sobolev(1.5)
    lhs = blur_on_grid(k, 2 * f - 3 * g, grid).values
    rhs = 2 * blur_on_grid(k, f, grid).values - 3 * blur_on_grid(k, g, grid).values
    assert np.abs(lhs - rhs).max() <= 1e-10


def test_sobolev2_disk_bounds_and_symmetry(disk_grid):
    grid, f = disk_grid
    b = blur_on_grid(BlurKernel.sobolev(2), f, grid).values
    assert b.min() >= -1e-12 and b.max() <= 1 + 1e-8
    # symmetric under the grid's reflections and the diagonal swap
    flip = np.roll(b[::-1, :], 1, axis=0)
    assert np.abs(b - flip).max() < 1e-12
    assert np.abs(b - b.T).max() < 1e-12


def test_sobolev2_against_space_convolution(disk_grid):
    """In 2-D the beta = 2 Bessel potential is K0(|x|) / (2 pi)."""
    grid, f = disk_grid
    b = blur_on_grid(BlurKernel.sobolev(2), f, grid).values
    ax = grid.axis()

    def conv(x0):
        # polar coordinates around x0, radial extent clipped to the disk
        def inner(t):
            p = x0 * np.cos(t)
            disc = 0.49 - x0**2 + p**2
            if disc <= 0:
                return 0.0
            r_lo, r_hi = max(-p - np.sqrt(disc), 0.0), max(-p + np.sqrt(disc), 0.0)
            # int r K0(r) dr = -r K1(r), with r K1(r) -> 1 at 0
            rk1 = lambda r: 1.0 if r == 0 else r * special.k1(r)  # noqa: E731
            return rk1(r_lo) - rk1(r_hi)

        return integrate.quad(inner, 0, 2 * np.pi, limit=200)[0] / (2 * np.pi)

    for i in [128, 160, 200]:
        x0 = ax[i]
        assert b[i, 128] == pytest.approx(conv(x0), abs=5e-3)


def test_tail_mass_and_wrap_flag(disk_grid):
    grid, f = disk_grid
    k = BlurKernel.sobolev(2)
    # beta = 2 tail beyond rho is rho K1(rho)
    assert k.tail_mass(3.0) == pytest.approx(3.0 * special.k1(3.0), rel=1e-6)
    assert k.effective_width(1e-3) > 3.0
    out = blur_on_grid(k, f, grid)
    assert out.wraparound and out.wrap_mass == pytest.approx(k.tail_mass(3.0))
