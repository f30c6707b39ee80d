"""
Smooth windows and blur kernels
================================

Probes use a smoothed cube indicator: a 1-D ramp that rises from 0 to 1
over a width delta, tensored in two dimensions and placed just outside the
unit disk along a direction u.  Its Fourier transform is known in closed
form up to one tabulated function, which is what the deconvolution needs.
"""

import numpy as np

from convexprobe import BlurKernel, GridSpec, MollifierSpec, ProbeLocation, validate_assumption1
from convexprobe.mollifier import decay_constant, phi_hat_delta_1d, phi_tau_delta_eval

spec = MollifierSpec(0.1)

# the ramp is flat on [-1 + delta, 1 - delta] and vanishes outside [-1, 1]
x = np.array([-1.0, -0.97, -0.95, -0.92, -0.5, 0.0, 0.95, 1.0])
print("ramp:", np.round(spec.ramp(x), 4))

# transform at zero equals the integral, 2 - delta; it decays faster than any power
lam = np.array([0.0, 10.0, 50.0, 200.0])
print("p_hat:", phi_hat_delta_1d(spec, lam))
print("sup |lam|^4 |p_hat| up to 200:", round(decay_constant(spec, k=4, lam_max=200), 2))

# a probe window: unit-half-width square centred at (1 + r) u, rotated with u
tau = ProbeLocation([np.cos(0.4), np.sin(0.4)], 0.3)
pts = tau.center + np.array([[0.0, 0.0], [0.95, 0.0], [1.2, 0.0]]) @ tau.rotation.T
print("window at centre / ramp edge / outside:", np.round(phi_tau_delta_eval(spec, tau, pts), 4))

# blur kernels: identity and Bessel-potential (Sobolev) kernels
grid = GridSpec(4.0, 256)
for kernel, L, beta in [(BlurKernel.identity(), 1.0, 0.0), (BlurKernel.sobolev(1.0), 1.0, 1.0),
                        (BlurKernel.sobolev(2.0), 1.0, 1.0)]:
    rep = validate_assumption1(kernel, L, beta, grid.lattice())
    print(f"{kernel.name:14s} declared (L={L:g}, beta={beta:g}): min ratio {rep.min_ratio:.3g} -> "
          f"{'ok' if rep.passed else 'rejected'}")
