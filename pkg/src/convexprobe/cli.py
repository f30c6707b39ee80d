"""Command line entry point: ``convexprobe <subcommand> --config PATH [--seed INT] [--out DIR]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from ._errors import ConfigurationError, NumericalError
from .estimator import estimate_support, observe, reconstruct_body
from .harness import _fmt, calibrate_c3, emit_outputs, load_config, overlay_svg, run_rate_sweep
from .kernel import validate_assumption1
from .mollifier import ProbeLocation
from .scene import probe_functional_exact


def _direction(args, cfg):
    if args.angle is None:
        return cfg.direction_set()[0]
    a = np.deg2rad(args.angle)
    return np.array([np.cos(a), np.sin(a)])


def _write(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) if not isinstance(v, str) else v for v in r])
    print(f"wrote {path}")


def cmd_validate_kernel(args, cfg):
    rep = validate_assumption1(cfg.kernel, cfg.declared_L, cfg.declared_beta, cfg.grid.lattice())
    status = "pass" if rep.passed else "FAIL"
    print(f"{cfg.kernel.name}: declared L={rep.L:g} beta={rep.beta:g} min ratio {rep.min_ratio:.6g} -> {status}")
    if args.out:
        _write(Path(args.out) / "kernel.csv", ("kernel", "L", "beta", "min_ratio", "passed"),
               [(cfg.kernel.name, rep.L, rep.beta, rep.min_ratio, rep.passed)])
    return 0 if rep.passed else 2


def _handle(cfg):
    eps = cfg.estimator.eps
    return observe(cfg.model, cfg.kernel, cfg.grid, eps, (cfg.seed,), mode=cfg.mode)


def cmd_probe(args, cfg):
    u = _direction(args, cfg)
    est = estimate_support(u, cfg.estimator, _handle(cfg), keep_trace=True)
    rows = []
    for r, val in est.trace:
        rows.append((r, val, probe_functional_exact(cfg.model, ProbeLocation(u, r))))
    print(f"delta={est.delta:.6g} theta={est.theta:.6g} sigma={est.sigma:.6g} h_hat={est.h_hat:g}")
    _write(Path(args.out or ".") / "probe.csv", ("r", "l_tilde", "l_exact"), rows)
    return 0


def cmd_estimate(args, cfg):
    u = _direction(args, cfg)
    est = estimate_support(u, cfg.estimator, _handle(cfg))
    h = float(cfg.model.body.support(u))
    print(f"u=({u[0]:.6f}, {u[1]:.6f}) h_true={h:.6g} h_hat={est.h_hat:.6g} crossed={est.crossed}")
    _write(Path(args.out or ".") / "estimate.csv",
           ("u1", "u2", "h_true", "h_hat", "crossed", "sigma_noise", "delta", "theta"),
           [(u[0], u[1], h, est.h_hat, est.crossed, est.sigma, est.delta, est.theta)])
    return 0


def cmd_reconstruct(args, cfg):
    n = max(cfg.directions, 3) if args.directions is None else args.directions
    rec = reconstruct_body(cfg.estimator, n, _handle(cfg))
    out = Path(args.out or ".")
    h = cfg.model.body.support(rec.profile.directions)
    rows = [(k, d[0], d[1], h[k], e.h_hat, e.crossed, e.sigma)
            for k, (d, e) in enumerate(zip(rec.profile.directions, rec.estimates))]
    _write(out / "reconstruction.csv", ("direction", "u1", "u2", "h_true", "h_hat", "crossed", "sigma_noise"), rows)
    unc = rec.profile.directions[~rec.diagnostics["crossed"]]
    (out / "overlay.svg").write_text(overlay_svg(cfg.model.body, rec.polygon, unc))
    flag = " (empty)" if rec.empty else (" (degenerate)" if rec.degenerate else "")
    print(f"{n} directions, max sigma {rec.diagnostics['sigma_max']:.4g}, {len(rec.polygon.vertices)} vertices{flag}")
    return 0


def cmd_rates(args, cfg):
    if not cfg.sweep:
        raise ConfigurationError("rates needs sweep.eps in the configuration")
    res = run_rate_sweep(cfg)
    for p in emit_outputs(res, args.out or "."):
        print(f"wrote {p}")
    for s in res.summary:
        print(f"eps={s.eps:g} rmse={s.rmse_pointwise:.4g} hausdorff={s.rmse_hausdorff:.4g}")
    return 0


def cmd_calibrate_c3(args, cfg):
    cal = calibrate_c3(cfg, draws=args.draws, level=args.level)
    for c in cal:
        print(f"eps={c.eps:g} sigma={c.sigma:.4g} q={c.null_quantile:.4g} C3_min={c.c3_min:.4g}")
    print(f"smallest C3 covering every eps: {max(c.c3_min for c in cal):.4g}")
    _write(Path(args.out or ".") / "calibration.csv", ("eps", "sigma_noise", "null_quantile", "c3_min"), cal)
    return 0


COMMANDS = {
    "validate-kernel": cmd_validate_kernel,
    "probe": cmd_probe,
    "estimate": cmd_estimate,
    "reconstruct": cmd_reconstruct,
    "rates": cmd_rates,
    "calibrate-c3": cmd_calibrate_c3,
}


def build_parser():
    p = argparse.ArgumentParser(prog="convexprobe", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="YAML experiment file")
        sp.add_argument("--seed", type=int, default=None, help="override the master seed")
        sp.add_argument("--out", default=None, help="output directory")
        if name in ("probe", "estimate"):
            sp.add_argument("--angle", type=float, default=None, help="direction in degrees")
        if name == "reconstruct":
            sp.add_argument("--directions", type=int, default=None)
        if name == "calibrate-c3":
            sp.add_argument("--draws", type=int, default=2000)
            sp.add_argument("--level", type=float, default=0.999)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_seed(args.seed)
        return COMMANDS[args.command](args, cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
