"""Monte Carlo experiments: configuration, rate sweeps and output files.

Configuration is a YAML file::

    seed: 20240601
    scene:
      body: {shape: disk, params: {radius: 0.7}}
      intensity: {profile: sharp, level: 1.0}
      bound_M: 1.0
    kernel: {family: sobolev, beta: 1.0, L: 1.0}
    grid: {extent: 4.0, n: 512}
    noise: {eps: 1.0e-3, mode: grid}
    estimator: {C3: 8.0, r_grid_n: 128}
    sweep: {eps: [3.0e-2, 1.0e-2, 3.0e-3, 1.0e-3], reps: 200, directions: 1}

``directions: 1`` probes the single direction (1, 0); three or more use a
uniform direction grid and add a reconstruction per replication.
Replication ``rep`` of sweep entry ``i`` draws its noise from the seed
``(seed, i, rep)``, so results do not depend on evaluation order.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np
import yaml
from scipy import stats

from ._errors import ConfigurationError
from .estimator import (
    EstimatorConfig,
    OracleObservation,
    delta_star,
    estimate_support,
    observe,
    r_grid,
)
from .field import GridSpec, exact_gaussian_probe_draws
from .geometry import SupportProfile, direction_grid, halfplane_intersection, hausdorff_distance
from .kernel import BlurKernel, blur_on_grid
from .mollifier import ProbeLocation
from .scene import IntensityModel, make_body, probe_functional_exact, rasterize

__all__ = [
    "ExperimentConfig",
    "RateRow",
    "SweepResult",
    "load_config",
    "run_rate_sweep",
    "fit_loglog_slope",
    "emit_outputs",
    "calibrate_c3",
    "RATES_COLUMNS",
    "SUMMARY_COLUMNS",
]

RATES_COLUMNS = (
    "eps", "beta", "alpha_true", "direction", "rep", "h_true", "h_hat", "abs_err", "crossed", "sigma_noise",
)
SUMMARY_COLUMNS = ("eps", "rmse_pointwise", "rmse_hausdorff", "n_reps")
HAUSDORFF_GRID = 4096


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    model: IntensityModel
    kernel: BlurKernel
    grid: GridSpec
    estimator: EstimatorConfig
    sweep: tuple = ()
    reps: int = 50
    directions: int = 1
    seed: int = 0
    mode: str = "grid"
    declared_L: float = 1.0
    declared_beta: float = 0.0
    raw: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        eps = tuple(float(e) for e in self.sweep)
        if any(not 0.0 < e < 1.0 for e in eps):
            raise ConfigurationError("sweep eps values must lie in (0, 1)")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigurationError("sweep eps values must be strictly decreasing")
        if eps and self.reps < 50:
            raise ConfigurationError("a rate sweep needs reps >= 50")
        if self.directions < 1 or self.directions == 2:
            raise ConfigurationError("directions must be 1 or at least 3")
        if self.mode not in ("grid", "oracle"):
            raise ConfigurationError(f"unknown observation mode {self.mode!r}")
        object.__setattr__(self, "sweep", eps)

    def with_seed(self, seed):
        return self if seed is None else replace(self, seed=int(seed))

    def estimator_for(self, eps) -> EstimatorConfig:
        return replace(self.estimator, eps=float(eps))

    def direction_set(self) -> np.ndarray:
        if self.directions == 1:
            return np.array([[1.0, 0.0]])
        return direction_grid(self.directions)


def _get(block, key, default=None, required=False):
    if not isinstance(block, dict):
        raise ConfigurationError(f"expected a mapping, got {block!r}")
    if key not in block or block[key] is None:
        if required:
            raise ConfigurationError(f"missing configuration key {key!r}")
        return default
    return block[key]


def config_from_dict(raw: dict) -> ExperimentConfig:
    try:
        scene = _get(raw, "scene", required=True)
        body_blk = _get(scene, "body", required=True)
        body = make_body(_get(body_blk, "shape", required=True), **(_get(body_blk, "params", {}) or {}))
        inten = _get(scene, "intensity", {"profile": "sharp"})
        M = float(_get(scene, "bound_M", 1.0))
        profile = _get(inten, "profile", "sharp")
        if profile == "sharp":
            model = IntensityModel(body, "sharp", level=float(_get(inten, "level", M)), M=M)
        else:
            model = IntensityModel(
                body, profile, gamma=float(_get(inten, "gamma", 0.0)), scale=float(_get(inten, "scale", 1.0)), M=M
            )

        kb = _get(raw, "kernel", {"family": "identity"})
        family = _get(kb, "family", "identity")
        if family == "identity":
            kernel = BlurKernel.identity()
            kbeta = 0.0
        else:
            kbeta = float(_get(kb, "beta", required=True))
            kernel = BlurKernel(family, kbeta, float(_get(kb, "L", 1.0)))
        L = float(_get(kb, "L", 1.0))
        beta = float(_get(kb, "declared_beta", kbeta))

        gb = _get(raw, "grid", {})
        grid = GridSpec(float(_get(gb, "extent", 4.0)), int(_get(gb, "n", 512)))

        nb = _get(raw, "noise", {})
        sb = _get(raw, "sweep", {})
        sweep = tuple(_get(sb, "eps", ()))
        eps = float(_get(nb, "eps", sweep[-1] if sweep else 0.0))
        eb = _get(raw, "estimator", {})
        est = EstimatorConfig(
            eps=eps,
            L=L,
            beta=beta,
            M=M,
            C3=float(_get(eb, "C3", 8.0)),
            delta_override=_get(eb, "delta_override"),
            theta_override=_get(eb, "theta_override"),
            r_grid_n=int(_get(eb, "r_grid_n", 128)),
        )
        return ExperimentConfig(
            model=model,
            kernel=kernel,
            grid=grid,
            estimator=est,
            sweep=sweep,
            reps=int(_get(sb, "reps", 50)),
            directions=int(_get(sb, "directions", 1)),
            seed=int(_get(raw, "seed", 0)),
            mode=_get(nb, "mode", "grid"),
            declared_L=L,
            declared_beta=beta,
            raw=raw,
        )
    except ConfigurationError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigurationError(f"invalid configuration: {exc}") from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {path} is not a mapping")
    return config_from_dict(raw)


class RateRow(NamedTuple):
    eps: float
    beta: float
    alpha_true: float
    direction: int
    rep: int
    h_true: float
    h_hat: float
    abs_err: float
    crossed: bool
    sigma_noise: float


class SummaryRow(NamedTuple):
    eps: float
    rmse_pointwise: float
    rmse_hausdorff: float
    n_reps: int


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    # per (eps, rep): hausdorff error and max pointwise error
    per_rep: list = field(default_factory=list)
    # eps -> sup over the r-grid of |l_tilde - l_f| per rep (direction 0)
    sup_errors: dict = field(default_factory=dict)
    # eps -> (true body, reconstructed polygon, uncrossed directions) of rep 0
    overlays: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)


def _exact_profile(model, u, rs):
    return np.array([probe_functional_exact(model, ProbeLocation(u, r)) for r in rs])


def run_rate_sweep(cfg: ExperimentConfig, track_sup=False, progress=None) -> SweepResult:
    """Replicated estimation over the eps sweep.

    ``track_sup`` also records, for the first direction, the sup over the
    r-grid of ``|l_tilde - l_f|`` (the full trace is scanned for it).
    """
    res = SweepResult()
    dirs = cfg.direction_set()
    body = cfg.model.body
    h_true = body.support(dirs)
    alpha = np.array([cfg.model.nominal_alpha(u) for u in dirs])
    blurred = None
    if cfg.mode == "grid" and cfg.sweep:
        blurred = blur_on_grid(cfg.kernel, rasterize(cfg.model, cfg.grid), cfg.grid)
    exact_trace = None
    for i, eps in enumerate(cfg.sweep):
        ecfg = cfg.estimator_for(eps)
        sq_pt, sq_h, sups = [], [], []
        for rep in range(cfg.reps):
            seed = (cfg.seed, i, rep)
            ests = []
            try:
                handle = observe(cfg.model, cfg.kernel, cfg.grid, eps, seed, mode=cfg.mode, blurred=blurred)
                for k, u in enumerate(dirs):
                    trace = track_sup and k == 0
                    est = estimate_support(u, ecfg, handle, keep_trace=trace, stream=k)
                    ests.append(est)
                    if trace:
                        if exact_trace is None or len(exact_trace) != len(est.trace):
                            exact_trace = _exact_profile(cfg.model, u, est.trace[:, 0])
                        sups.append(float(np.max(np.abs(est.trace[:, 1] - exact_trace))))
            except Exception as exc:
                where = f"eps={eps:g} rep={rep} direction={len(ests)}: "
                exc.args = (where + (str(exc.args[0]) if exc.args else ""),) + tuple(exc.args[1:])
                raise
            hh = np.array([e.h_hat for e in ests])
            err = np.abs(h_true - hh)
            for k, e in enumerate(ests):
                res.rows.append(
                    RateRow(eps, cfg.declared_beta, float(alpha[k]), k, rep, float(h_true[k]), e.h_hat,
                            float(err[k]), e.crossed, e.sigma)
                )
            sq_pt.extend(err**2)
            haus = float("nan")
            if cfg.directions >= 3:
                poly = halfplane_intersection(SupportProfile(dirs, hh))
                haus = hausdorff_distance(poly, body, HAUSDORFF_GRID)
                sq_h.append(haus**2)
                if rep == 0:
                    res.overlays[eps] = (body, poly, dirs[[not e.crossed for e in ests]])
            res.per_rep.append({"eps": eps, "rep": rep, "hausdorff": haus, "max_abs_err": float(err.max())})
            if progress:
                progress(eps, rep)
        res.summary.append(
            SummaryRow(eps, float(np.sqrt(np.mean(sq_pt))),
                       float(np.sqrt(np.mean(sq_h))) if sq_h else float("nan"), cfg.reps)
        )
        if track_sup:
            res.sup_errors[eps] = np.array(sups)
    if len(cfg.sweep) >= 3 and cfg.sweep[0] / cfg.sweep[-1] >= 10.0:
        pts = [(s.eps, s.rmse_pointwise) for s in res.summary]
        res.fits["pointwise"] = fit_loglog_slope(pts)
        if cfg.directions >= 3:
            res.fits["hausdorff"] = fit_loglog_slope([(s.eps, s.rmse_hausdorff) for s in res.summary])
        if track_sup:
            res.fits["sup_risk"] = fit_loglog_slope(
                [(e, float(np.sqrt(np.mean(v**2)))) for e, v in res.sup_errors.items()]
            )
    return res


def fit_loglog_slope(rows):
    """OLS slope of ``log RMSE`` on ``log eps`` and its standard error."""
    pts = np.asarray(rows, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise ValueError("slope fit needs at least 3 points")
    if np.any(pts <= 0):
        raise ValueError("eps and RMSE must be positive for a log-log fit")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    if x.max() - x.min() < np.log(10.0) - 1e-12:
        raise ValueError("eps points must span at least one decade")
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.stderr)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if np.isnan(v) else repr(v)


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    try:
        path.write_text(buf.getvalue(), newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from None


def _svg_path(points) -> str:
    pts = " L ".join(f"{x:.6f} {-y:.6f}" for x, y in points)
    return f'<path d="M {pts} Z"'


def overlay_svg(body, polygon, uncrossed=()) -> str:
    """SVG with the true boundary, the reconstruction and rays along uncrossed directions."""
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.2 -1.2 2.4 2.4" width="480" height="480">',
        _svg_path(body.boundary_points(720)) + ' fill="none" stroke="black" stroke-width="0.006"/>',
    ]
    if not polygon.is_empty and len(polygon.vertices) >= 2:
        parts.append(_svg_path(polygon.vertices) + ' fill="none" stroke="red" stroke-width="0.006"/>')
    for u in uncrossed:
        parts.append(
            f'<line x1="0" y1="0" x2="{u[0]:.6f}" y2="{-u[1]:.6f}" stroke="blue" stroke-width="0.003"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_outputs(results: SweepResult, out_dir) -> list:
    """Write rates.csv, summary.csv, fit.csv and overlay.svg; return the paths written."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from None
    written = []
    rows = sorted(results.rows, key=lambda r: (-r.eps, r.rep, r.direction))
    _write_csv(out / "rates.csv", RATES_COLUMNS, rows)
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, sorted(results.summary, key=lambda s: -s.eps))
    written += [out / "rates.csv", out / "summary.csv"]
    if results.fits:
        fit_rows = [(k, s, e, len(results.summary)) for k, (s, e) in sorted(results.fits.items())]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(("quantity", "slope", "stderr", "n_points"))
        for k, s, e, n in fit_rows:
            w.writerow([k, _fmt(s), _fmt(e), n])
        (out / "fit.csv").write_text(buf.getvalue(), newline="")
        written.append(out / "fit.csv")
    if results.overlays:
        eps = min(results.overlays)
        body, poly, unc = results.overlays[eps]
        (out / "overlay.svg").write_text(overlay_svg(body, poly, unc))
        written.append(out / "overlay.svg")
    return written


class Calibration(NamedTuple):
    eps: float
    sigma: float
    null_quantile: float
    c3_min: float


def calibrate_c3(cfg: ExperimentConfig, eps_values=None, draws=2000, level=0.999, seed=None):
    """Smallest C3 whose threshold clears the null sup-quantile.

    For each eps the statistic is scanned over the r-grid with no image
    (pure noise, exact oracle law); ``q`` is the ``level`` quantile of
    ``max_r l_tilde``.  Solving ``theta_*(C3) = q`` gives

        C3 = (q^(beta + 1/2) L / (eps M^(beta - 1/2)))^2 / ln(1/eps).
    """
    eps_values = cfg.sweep if eps_values is None else tuple(eps_values)
    if not eps_values:
        eps_values = (cfg.estimator.eps,)
    seed = cfg.seed if seed is None else seed
    u = cfg.direction_set()[0]
    out = []
    for i, eps in enumerate(eps_values):
        ecfg = cfg.estimator_for(eps)
        delta = delta_star(ecfg)
        rs = r_grid(ecfg)
        handle = OracleObservation(None, cfg.kernel, cfg.grid, eps, None)
        G = handle.gram(u, delta, rs)
        draw = exact_gaussian_probe_draws(np.zeros(len(rs)), eps=eps, seed=(seed, i), gram=G, size=draws)
        q = float(np.quantile(draw.values.max(axis=1), level))
        b, L, M = ecfg.beta, ecfg.L, ecfg.M
        c3 = (max(q, 0.0) ** (b + 0.5) * L / (eps * M ** (b - 0.5))) ** 2 / np.log(1.0 / eps)
        out.append(Calibration(float(eps), eps * float(np.sqrt(G[0, 0])), q, float(c3)))
    return out
