import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from convexprobe import BlurKernel, GridSpec, psi_on_grid
from convexprobe._errors import ConfigurationError
from convexprobe.mollifier import (
    MollifierSpec,
    ProbeLocation,
    bump,
    decay_constant,
    phi_delta_eval,
    phi_hat_delta,
    phi_hat_delta_1d,
    phi_hat_tau_delta,
    phi_tau_delta_eval,
    ramp_p_delta,
)

DELTAS = [0.02, 0.05, 0.1, 0.2, 0.5]


def ramp_by_quadrature(x, delta):
    """Independent left ramp: normalized integral of the bump up to (x + 1) / delta."""
    total = integrate.quad(bump, 0, 1, epsabs=1e-15, epsrel=1e-13)[0]
    t = min(max((x + 1) / delta, 0.0), 1.0)
    return integrate.quad(bump, 0, t, epsabs=1e-15, epsrel=1e-13)[0] / total


@pytest.mark.parametrize("delta", DELTAS)
def test_ramp_examples(delta):
    spec = MollifierSpec(delta)
    assert ramp_p_delta(spec, 0.0) == 1.0
    assert ramp_p_delta(spec, 1.0) == 0.0
    assert ramp_p_delta(spec, -1.0) == 0.0
    assert ramp_p_delta(spec, -1 + delta / 2) == pytest.approx(0.5, abs=1e-14)
    assert ramp_p_delta(spec, 1 - delta / 2) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("delta", [0.05, 0.3])
def test_ramp_matches_quadrature(delta):
    spec = MollifierSpec(delta)
    for x in np.linspace(-1.0, -1 + delta, 23):
        assert ramp_p_delta(spec, x) == pytest.approx(ramp_by_quadrature(x, delta), abs=1e-10)
        assert ramp_p_delta(spec, -x) == pytest.approx(ramp_by_quadrature(x, delta), abs=1e-10)


def test_ramp_is_monotone_and_bounded():
    spec = MollifierSpec(0.1)
    x = np.linspace(-1.2, 0, 20001)
    p = spec.ramp(x)
    assert np.all(np.diff(p) >= -1e-15)
    assert p.min() == 0.0 and p.max() == 1.0


def test_rejects_bad_delta():
    for d in [0.0, 1.0, -0.1, 1.5]:
        with pytest.raises(ConfigurationError):
            MollifierSpec(d)


def test_phi_delta_examples():
    spec = MollifierSpec(0.1)
    assert phi_delta_eval(spec, [0.0, 0.0]) == 1.0
    assert phi_delta_eval(spec, [1.0, 0.0]) == 0.0
    assert phi_delta_eval(spec, [-1 + 0.05, 0.0]) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("delta", [0.05, 0.1, 0.2])
def test_fourier_matches_quadrature(delta):
    spec = MollifierSpec(delta)
    for lam in [0.0, 0.7, 3.0, 11.0, 40.0, 150.0]:
        ref = 2 * integrate.quad(lambda x: float(spec.ramp(x)) * np.cos(lam * x), 0, 1,
                                 points=[1 - delta], limit=400, epsabs=1e-14)[0]
        assert phi_hat_delta_1d(spec, lam) == pytest.approx(ref, abs=2e-11)


@pytest.mark.parametrize("delta", DELTAS)
def test_fourier_at_zero(delta):
    spec = MollifierSpec(delta)
    assert phi_hat_delta_1d(spec, 0.0) == pytest.approx(2 - delta, abs=1e-12)
    assert phi_hat_delta(spec, [0.0, 0.0]) == pytest.approx((2 - delta) ** 2, abs=1e-11)


def test_fourier_is_real_and_even():
    spec = MollifierSpec(0.1)
    lam = np.linspace(-300, 300, 1001)
    vals = phi_hat_delta_1d(spec, lam)
    assert np.isrealobj(vals)
    np.testing.assert_allclose(vals, vals[::-1], atol=1e-15)


def test_decay_constant_is_finite():
    c4 = decay_constant(MollifierSpec(0.1), k=4, lam_max=200)
    assert np.isfinite(c4) and c4 > 0
    # a larger window width decays faster
    assert decay_constant(MollifierSpec(0.4), k=4, lam_max=200) < c4


def test_integral_of_window():
    spec = MollifierSpec(0.1)
    one_d = integrate.quad(lambda x: float(spec.ramp(x)), -1, 1, points=[-0.9, 0.9], epsabs=1e-13)[0]
    assert one_d**2 == pytest.approx(1.9**2, abs=1e-9)
    assert spec.ramp_antiderivative(1.0) == pytest.approx(1.9, abs=1e-13)


def test_probe_transform_at_zero_and_phase():
    spec = MollifierSpec(0.1)
    tau = ProbeLocation([1.0, 0.0], 0.4)
    assert phi_hat_tau_delta(spec, tau, [0.0, 0.0]) == pytest.approx(1.9**2)
    rng = np.random.default_rng(0)
    om = rng.normal(scale=20, size=(500, 2))
    u = [np.cos(1.1), np.sin(1.1)]
    a = np.abs(phi_hat_tau_delta(spec, ProbeLocation(u, 0.1), om))
    b = np.abs(phi_hat_tau_delta(spec, ProbeLocation(u, 0.9), om))
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)


def test_probe_transform_matches_space_quadrature():
    spec = MollifierSpec(0.2)
    tau = ProbeLocation([np.cos(0.5), np.sin(0.5)], 0.3)
    om = np.array([1.3, -2.1])

    # tensor Gauss-Legendre on each smooth piece of the local square
    xg, wg = np.polynomial.legendre.leggauss(40)
    edges = [-1, -1 + spec.delta, 1 - spec.delta, 1]
    nodes, weights = [], []
    for a, b in zip(edges, edges[1:]):
        nodes.append(0.5 * (b - a) * xg + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * wg)
    t, w = np.concatenate(nodes), np.concatenate(weights)
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    local = np.stack([t1, t2], axis=-1)
    x = tau.center + local @ tau.rotation.T
    vals = phi_tau_delta_eval(spec, tau, x) * np.exp(1j * x @ om)
    ref = np.einsum("i,j,ij->", w, w, vals)
    assert phi_hat_tau_delta(spec, tau, om) == pytest.approx(ref, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 1), st.sampled_from([0.05, 0.1, 0.2]), st.integers(0, 2**31))
def test_sandwich(angle, r, delta, seed):
    spec = MollifierSpec(delta)
    tau = ProbeLocation([np.cos(angle), np.sin(angle)], r)
    rng = np.random.default_rng(seed)
    local = rng.uniform(-1.3, 1.3, (400, 2))
    x = tau.center + local @ tau.rotation.T
    phi = phi_tau_delta_eval(spec, tau, x)
    inner = np.all(np.abs(local) <= 1 - delta, axis=1)
    outer = np.all(np.abs(local) <= 1, axis=1)
    assert np.all(phi >= inner - 1e-12)
    assert np.all(phi <= outer + 1e-12)


def test_frequency_space_consistency():
    """Riemann sum of the sampled window against the closed-form transform."""
    grid = GridSpec(4.0, 1024)
    spec = MollifierSpec(0.1)
    tau = ProbeLocation([np.cos(np.pi / 6), np.sin(np.pi / 6)], 0.3)
    phi = phi_tau_delta_eval(spec, tau, grid.points())
    # sum_j phi(x_j) exp(i w_k x_j) dx^2 with x_j = -R + j dx
    dft = np.conj(np.fft.fft2(np.conj(phi))) * grid.alternating() * grid.cell_area
    lat = grid.lattice()
    exact = phi_hat_tau_delta(spec, tau, lat)
    k = np.fft.fftfreq(grid.n) * grid.n
    central = (np.abs(k)[:, None] <= grid.n // 8) & (np.abs(k)[None, :] <= grid.n // 8)
    err = np.abs(dft - exact)[central].max() / np.abs(exact).max()
    assert err < 1e-6


def test_inverse_dft_leakage():
    grid = GridSpec(4.0, 2048)
    spec = MollifierSpec(0.1)
    tau = ProbeLocation([np.cos(np.pi / 6), np.sin(np.pi / 6)], 0.3)
    psi = psi_on_grid(tau, 0.1, BlurKernel.identity(), grid)
    pts = grid.points()
    phi = phi_tau_delta_eval(spec, tau, pts)
    outside = ~tau.contains(pts)
    assert np.abs(psi[outside]).max() < 1e-6
    assert np.abs(psi - phi).max() < 1e-6
