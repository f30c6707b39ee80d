import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convexprobe import (
    BlurKernel,
    EstimatorConfig,
    GridSpec,
    IntensityModel,
    OracleObservation,
    blur_on_grid,
    delta_star,
    estimate_probe,
    estimate_support,
    observe,
    psi_norm,
    psi_on_grid,
    reconstruct_body,
    simulate_grid_field,
    theta_star,
)
from convexprobe._errors import ConfigurationError
from convexprobe.estimator import r_grid
from convexprobe.geometry import Disk
from convexprobe.mollifier import MollifierSpec, ProbeLocation, phi_tau_delta_eval
from convexprobe.scene import probe_functional_exact, rasterize, window_functional

GRID = GridSpec(4.0, 512)
SOB1 = BlurKernel.sobolev(1.0)
DISK = IntensityModel.sharp(Disk(0.7))
U30 = np.array([np.cos(np.pi / 6), np.sin(np.pi / 6)])


def test_delta_star_example():
    # ((1e-3) * sqrt(ln 1000))^(2/3) evaluated by hand: 2.62826e-3 ** (2/3)
    assert delta_star(EstimatorConfig(1e-3)) == pytest.approx(0.01905, abs=1e-5)
    assert math.exp(2 / 3 * math.log(1e-3 * math.sqrt(math.log(1e3)))) == pytest.approx(0.01905, abs=1e-5)


def test_beta_zero_squares_bracket():
    cfg = EstimatorConfig(0.01, L=2.0, M=1.5, beta=0.0)
    inner = 0.01 / 3.0 * math.sqrt(math.log(100.0))
    assert delta_star(cfg) == pytest.approx(inner**2, rel=1e-12)


def test_delta_star_decreases_with_eps():
    vals = [delta_star(EstimatorConfig(e)) for e in [0.3, 0.1, 0.03, 1e-2, 1e-3, 1e-5]]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_theta_star_examples():
    assert theta_star(EstimatorConfig(1e-3, C3=1.0)) == pytest.approx(0.01905, abs=1e-5)
    for beta in [0.5, 1.0, 2.0]:
        base = theta_star(EstimatorConfig(1e-3, beta=beta, C3=2.0))
        assert theta_star(EstimatorConfig(1e-3, beta=beta, C3=8.0)) == pytest.approx(
            base * 2 ** (1 / (beta + 0.5)), rel=1e-12
        )
    # M = 1 removes beta from the M factor; only the exponent changes
    t1 = theta_star(EstimatorConfig(1e-3, beta=1.0, C3=1.0))
    t2 = theta_star(EstimatorConfig(1e-3, beta=2.0, C3=1.0))
    assert math.log(t1) * 1.5 == pytest.approx(math.log(t2) * 2.5, rel=1e-12)


@pytest.mark.parametrize("beta", [0.0, 1.0, 3.0])
def test_doubling_L_halves_bracket(beta):
    a = EstimatorConfig(1e-3, L=1.0, beta=beta, M=2.0)
    b = EstimatorConfig(1e-3, L=2.0, beta=beta, M=2.0)
    k = 2 ** (-1 / (beta + 0.5))
    assert delta_star(b) == pytest.approx(delta_star(a) * k, rel=1e-12)
    assert theta_star(b) == pytest.approx(theta_star(a) * k, rel=1e-12)


def test_config_errors():
    with pytest.raises(ConfigurationError):
        delta_star(EstimatorConfig(0.5, L=0.1, beta=0.0))
    with pytest.raises(ConfigurationError):
        theta_star(EstimatorConfig(0.2, C3=500.0))
    for bad in [dict(eps=0.0), dict(eps=1.0), dict(eps=1e-3, r_grid_n=32), dict(eps=1e-3, L=0.0),
                dict(eps=1e-3, delta_override=1.0), dict(eps=0.0, delta_override=0.1)]:
        with pytest.raises(ConfigurationError):
            EstimatorConfig(**bad)
    assert delta_star(EstimatorConfig(0.0, delta_override=0.1, theta_override=0.2)) == 0.1


def test_r_grid_descends():
    rs = r_grid(EstimatorConfig(1e-3, r_grid_n=64))
    assert rs[0] == 1.0 and rs[-1] == 0.0 and rs.size == 65
    assert np.all(np.diff(rs) < 0)


def test_psi_refuses_unvalidated_kernel():
    tau = ProbeLocation(U30, 0.3)
    with pytest.raises(ConfigurationError):
        psi_on_grid(tau, 0.1, BlurKernel("sobolev", beta=1.0, L=2.0), GRID)


def test_psi_real_and_norms():
    tau = ProbeLocation(U30, 0.2)
    psi = psi_on_grid(tau, 0.1, SOB1, GRID)
    assert np.isrealobj(psi)
    space = math.sqrt(np.sum(psi**2) * GRID.cell_area)
    assert space == pytest.approx(psi_norm(tau, 0.1, SOB1, GRID), rel=1e-6)
    other = psi_on_grid(ProbeLocation(U30, 0.8), 0.1, SOB1, GRID)
    ratio = math.sqrt(np.sum(other**2) * GRID.cell_area) / space
    assert abs(ratio - 1) <= 1e-10


def test_identity_norm_sandwich():
    n2 = psi_norm(ProbeLocation(U30, 0.4), 0.1, BlurKernel.identity(), GRID) ** 2
    assert 3.24 <= n2 <= 4.0


def test_adjoint_identity():
    """<K g, psi> on the grid against <g, phi_tau> by quadrature for a smooth g."""
    tau = ProbeLocation(U30, 0.3)
    spec = MollifierSpec(0.1)
    c, s = np.array([0.75, 0.45]), 0.15

    def g(x):
        return np.exp(-np.sum((x - c) ** 2, axis=-1) / (2 * s**2))

    kg = blur_on_grid(SOB1, g(GRID.points()), GRID).values
    lhs = np.sum(kg * psi_on_grid(tau, 0.1, SOB1, GRID)) * GRID.cell_area

    xg, wg = np.polynomial.legendre.leggauss(60)
    edges = [-1, -0.9, 0.9, 1]
    t = np.concatenate([0.5 * (b - a) * xg + 0.5 * (a + b) for a, b in zip(edges, edges[1:])])
    w = np.concatenate([0.5 * (b - a) * wg for a, b in zip(edges, edges[1:])])
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    x = tau.center + np.stack([t1, t2], axis=-1) @ tau.rotation.T
    rhs = np.einsum("i,j,ij->", w, w, phi_tau_delta_eval(spec, tau, x) * g(x))
    assert rhs > 0.01
    assert lhs == pytest.approx(rhs, abs=1e-4)


def test_estimate_probe_noiseless_examples():
    ident = BlurKernel.identity()
    h = OracleObservation(DISK, ident, GRID, 0.0, None)
    assert abs(estimate_probe(h, ProbeLocation(U30, 0.9), 0.05)) <= 1e-6
    unit = IntensityModel.sharp(Disk(1.0))
    h1 = OracleObservation(unit, ident, GRID, 0.0, None)
    delta = 0.05
    val = estimate_probe(h1, ProbeLocation(U30, 0.5), delta)
    assert 0.61418 - (4 - (2 - 2 * delta) ** 2) <= val <= 0.61418 + 1e-8


def test_grid_probe_outside_support_is_small():
    h = observe(DISK, BlurKernel.identity(), GRID, 0.0, None)
    assert abs(estimate_probe(h, ProbeLocation(U30, 0.9), 0.05)) <= 1e-6


def test_oracle_variance_ratio():
    tau = ProbeLocation(U30, 0.4)
    eps, delta = 0.01, 0.1
    vals = np.array([estimate_probe(OracleObservation(DISK, SOB1, GRID, eps, (7, k)), tau, delta) for k in range(2000)])
    ratio = vals.var(ddof=1) / (eps * psi_norm(tau, delta, SOB1, GRID)) ** 2
    assert 0.9 <= ratio <= 1.1
    assert vals.mean() == pytest.approx(window_functional(DISK, tau, MollifierSpec(delta)), abs=4 * vals.std() / 40)


def test_frequency_scan_matches_space_integral():
    blurred = blur_on_grid(SOB1, rasterize(DISK, GRID), GRID)
    field = simulate_grid_field(blurred, 0.01, (3,), GRID)
    handle = observe(DISK, SOB1, GRID, 0.01, (3,), blurred=blurred)
    for r in [0.0, 0.35, 0.8]:
        tau = ProbeLocation(U30, r)
        space = estimate_probe(field, tau, 0.05, kernel=SOB1)
        assert estimate_probe(handle, tau, 0.05) == pytest.approx(space, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("mode", ["grid", "oracle"])
def test_noiseless_support_estimate(mode):
    cfg = EstimatorConfig(0.0, delta_override=0.02, theta_override=1e-4, r_grid_n=512)
    handle = observe(DISK, BlurKernel.identity(), GRID, 0.0, None, mode=mode)
    est = estimate_support(U30, cfg, handle, keep_trace=True)
    assert est.crossed
    assert 0.7 - 0.03 <= est.h_hat <= 0.7
    # the trace agrees with the scene oracle up to the window bias
    r, val = est.trace[300]
    exact = probe_functional_exact(DISK, ProbeLocation(U30, r))
    assert exact - (4 - 1.96**2) - 1e-3 <= val <= exact + 1e-3


def test_zero_scene_never_crosses():
    cfg = EstimatorConfig(0.0, delta_override=0.05, theta_override=1e-4)
    handle = OracleObservation(None, SOB1, GRID, 0.0, None)
    est = estimate_support(U30, cfg, handle)
    assert not est.crossed and est.h_hat == 0.0
    rec = reconstruct_body(cfg, 12, handle)
    assert rec.empty or rec.degenerate
    assert rec.diagnostics["degenerate"]
    assert not rec.diagnostics["crossed"].any()


def test_config_must_match_handle():
    handle = observe(DISK, SOB1, GRID, 0.01, (1,), mode="oracle")
    with pytest.raises(ConfigurationError):
        estimate_support(U30, EstimatorConfig(0.02), handle)
    with pytest.raises(ConfigurationError):
        estimate_support(U30, EstimatorConfig(0.01, beta=0.5), handle)


@pytest.fixture(scope="module")
def noisy_grid_handle():
    return observe(DISK, SOB1, GRID, 1e-2, (11,))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0, 2 * np.pi))
def test_higher_threshold_never_raises_estimate(noisy_grid_handle, t1, t2, angle):
    lo, hi = sorted([t1, t2])
    u = [np.cos(angle), np.sin(angle)]
    est = [
        estimate_support(u, EstimatorConfig(1e-2, delta_override=0.05, theta_override=t), noisy_grid_handle)
        for t in (lo, hi)
    ]
    assert est[1].h_hat <= est[0].h_hat


@pytest.mark.parametrize("mode", ["grid", "oracle"])
def test_reconstruction_is_deterministic(mode):
    cfg = EstimatorConfig(3e-3, C3=100.0)
    n = 12 if mode == "oracle" else 36
    a = reconstruct_body(cfg, n, observe(DISK, SOB1, GRID, 3e-3, (5, 0, 1), mode=mode))
    b = reconstruct_body(cfg, n, observe(DISK, SOB1, GRID, 3e-3, (5, 0, 1), mode=mode))
    assert np.array_equal(a.profile.values, b.profile.values)
    assert np.array_equal(a.polygon.vertices, b.polygon.vertices)
    c = reconstruct_body(cfg, n, observe(DISK, SOB1, GRID, 3e-3, (5, 0, 2), mode=mode))
    assert not np.array_equal(a.profile.values, c.profile.values) or mode == "oracle"


def test_default_threshold_rmse_example():
    """Default C3 = 8 at eps = 1e-3 on the n = 512 grid, 200 reps, one direction."""
    cfg = EstimatorConfig(1e-3, C3=8.0)
    blurred = blur_on_grid(SOB1, rasterize(DISK, GRID), GRID)
    u = np.array([1.0, 0.0])
    first = estimate_support(u, cfg, observe(DISK, SOB1, GRID, 1e-3, (2024, 0), blurred=blurred))
    again = estimate_support(u, cfg, observe(DISK, SOB1, GRID, 1e-3, (2024, 0), blurred=blurred))
    assert first.h_hat == again.h_hat
    errs = [
        estimate_support(u, cfg, observe(DISK, SOB1, GRID, 1e-3, (2024, k), blurred=blurred)).h_hat - 0.7
        for k in range(200)
    ]
    rmse = float(np.sqrt(np.mean(np.square(errs))))
    print(f"default-threshold RMSE at eps=1e-3: {rmse:.4f}")
    assert rmse <= 0.08
