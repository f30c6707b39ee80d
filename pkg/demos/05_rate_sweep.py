"""
A small Monte Carlo rate experiment
===================================

The harness reads an experiment file, calibrates the threshold constant on
pure noise, repeats the estimator over a decreasing sequence of noise
levels and fits the log-log slope of the error.  The same steps are
available from the command line:

    convexprobe calibrate-c3 --config demos/experiment.yaml
    convexprobe rates --config demos/experiment.yaml --out rates_out
"""

from dataclasses import replace
from pathlib import Path

from convexprobe.harness import calibrate_c3, emit_outputs, load_config, run_rate_sweep

cfg = load_config(Path(__file__).with_name("experiment.yaml"))

# smallest C3 that keeps the threshold above the 99.9% null quantile at the smallest eps
cal = calibrate_c3(cfg, eps_values=[cfg.sweep[-1]], draws=2000)
c3 = cal[0].c3_min
print(f"calibrated C3 = {c3:.1f} (null sd {cal[0].sigma:.4f}, 99.9% sup quantile {cal[0].null_quantile:.4f})")
cfg = replace(cfg, estimator=replace(cfg.estimator, C3=c3))

res = run_rate_sweep(cfg, track_sup=True)
for s in res.summary:
    print(f"eps = {s.eps:.0e}   pointwise RMSE {s.rmse_pointwise:.4f}   Hausdorff RMSE {s.rmse_hausdorff:.4f}")
for name, (slope, err) in sorted(res.fits.items()):
    print(f"{name:10s} slope {slope:.3f} +- {err:.3f}")

for path in emit_outputs(res, "rates_out"):
    print("wrote", path)
