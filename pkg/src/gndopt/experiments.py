"""Monte-Carlo ensemble runner, verification experiments, and CSV/SVG output.

Determinism contract: trial i draws from stream ``(seed, i)``, consuming its d
initial-point uniforms before any solver draws.  Trials are processed in
fixed-size chunks whose results land in preallocated rows; the final
aggregation is a deterministic fold over the full matrix, so output is
bit-identical for any worker count.  Diverged trajectories abort the whole
experiment (silently dropping them would bias the error statistics).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from gndopt.errors import ParameterError
from gndopt.objectives import Objective
from gndopt.sampling import RngStream, SgOracle
from gndopt.solver import DlGndConfig, GndConfig, _run_dlgnd_batch, _run_gnd_batch
from gndopt.theory import Schedule, gnd_schedule, stopping_time_bound

Array = np.ndarray

_CHUNK = 256  # trials per task; fixed so partitioning never depends on the worker count


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte-Carlo experiment: objective, algorithm, ensemble, and init box."""

    objective: Objective
    algorithm: GndConfig | DlGndConfig
    sg_noise_r: float
    trials: int
    init_low: float | Array
    init_high: float | Array
    seed: int
    threshold: float = 1e-3
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError(f"trials must be at least 1, got {self.trials}")
        if self.sg_noise_r < 0:
            raise ParameterError(f"sg_noise_r must be nonnegative, got {self.sg_noise_r}")
        if not self.threshold > 0:
            raise ParameterError(f"threshold must be positive, got {self.threshold}")
        if self.workers < 1:
            raise ParameterError(f"workers must be at least 1, got {self.workers}")
        d = self.objective.dim
        low = np.broadcast_to(np.asarray(self.init_low, dtype=np.float64), (d,))
        high = np.broadcast_to(np.asarray(self.init_high, dtype=np.float64), (d,))
        if np.any(low > high):
            raise ParameterError("init box must satisfy low <= high per coordinate")

    @property
    def total_iterations(self) -> int:
        alg = self.algorithm
        return alg.T if isinstance(alg, GndConfig) else alg.total_iterations


@dataclass(frozen=True)
class StatsSeries:
    """Per-iteration ensemble statistics: mean squared distance and miss fraction."""

    mse: Array
    ncp: Array
    trials: int
    diverged: int = 0

    def __post_init__(self):
        self.mse.setflags(write=False)
        self.ncp.setflags(write=False)


@dataclass(frozen=True)
class ContractionReport:
    """Per-iteration comparison of the ensemble mean of ||y_t - x*||^2 to its bound."""

    means: Array
    bounds: Array
    margins: Array
    holds: bool
    first_violation: Optional[int]
    schedule: Schedule


@dataclass(frozen=True)
class StoppingTimeReport:
    """Empirical dip probability of X_t = ||y_t - x*||^2 - 100b versus the analytic bound."""

    empirical_p: float
    analytic_bound: float
    B_hat: float
    theta: float
    floor: float
    M: int
    ell: float


def _init_box(cfg: ExperimentConfig) -> tuple[Array, Array]:
    d = cfg.objective.dim
    low = np.broadcast_to(np.asarray(cfg.init_low, dtype=np.float64), (d,)).copy()
    high = np.broadcast_to(np.asarray(cfg.init_high, dtype=np.float64), (d,)).copy()
    return low, high


def run_monte_carlo(cfg: ExperimentConfig, keep_distances: bool = False):
    """Run the configured algorithm over the trial ensemble and aggregate stats.

    Returns a :class:`StatsSeries`; with ``keep_distances=True`` returns
    ``(stats, dist2)`` where ``dist2[i, t]`` is trial i's squared distance to
    the minimizer after t iterations.
    """
    obj = cfg.objective
    oracle = SgOracle(obj, cfg.sg_noise_r)
    low, high = _init_box(cfg)
    span = high - low
    x_star = obj.minimizer
    total = cfg.total_iterations
    dist2 = np.empty((cfg.trials, total + 1))

    def run_chunk(bounds):
        i0, i1 = bounds
        rngs = [RngStream(cfg.seed, i) for i in range(i0, i1)]
        x0 = np.empty((i1 - i0, obj.dim))
        for row, rng in enumerate(rngs):
            x0[row] = low + span * rng.uniforms(obj.dim)
        if isinstance(cfg.algorithm, GndConfig):
            res = _run_gnd_batch(obj, oracle, x0, cfg.algorithm, rngs,
                                 x_star=x_star, trial_base=i0)
            dist2[i0:i1] = res.dist2
        else:
            dist2[i0:i1] = _run_dlgnd_batch(obj, oracle, x0, cfg.algorithm, rngs,
                                            x_star, trial_base=i0)

    chunks = [(i, min(i + _CHUNK, cfg.trials)) for i in range(0, cfg.trials, _CHUNK)]
    if cfg.workers == 1 or len(chunks) == 1:
        for chunk in chunks:
            run_chunk(chunk)
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            list(pool.map(run_chunk, chunks))

    mse = dist2.mean(axis=0)
    thr2 = cfg.threshold * cfg.threshold
    ncp = np.count_nonzero(dist2 > thr2, axis=0) / cfg.trials
    stats = StatsSeries(mse=mse, ncp=ncp, trials=cfg.trials, diverged=0)
    return (stats, dist2) if keep_distances else stats


def _shadow_distance_ensemble(objective: Objective, r: float, x0, T: int,
                              trials: int, seed: int) -> tuple[Array, Schedule]:
    """Squared shadow-iterate distances ||y_t - x*||^2 for a fixed-x0 GND ensemble.

    The run uses the certified schedule with the exact optimum as lower bound,
    so the schedule's b reduces to the oracle term eta*r^2/lam.
    """
    if objective.certificate is None:
        raise ParameterError("a certified objective is required")
    alpha, big_l = objective.certificate
    sched = gnd_schedule(alpha, big_l, r, f_gap=0.0)
    cfg = GndConfig(eta=sched.eta, s=sched.s, f_lb=objective.min_value, T=T, record_y=True)
    x0 = np.asarray(x0, dtype=np.float64).reshape(objective.dim)
    x0_rows = np.tile(x0, (trials, 1))
    rngs = [RngStream(seed, i) for i in range(trials)]
    res = _run_gnd_batch(objective, SgOracle(objective, r), x0_rows, cfg, rngs,
                         record_y=True, trial_base=0)
    diffs = res.ys - objective.minimizer
    ydist2 = np.sum(diffs * diffs, axis=-1)
    return ydist2, sched


def contraction_check(objective: Objective, r: float, trials: int, x0, T: int,
                      seed: int, slack: float = 1.1) -> ContractionReport:
    """Verify the per-iteration contraction of the mean squared shadow distance.

    The empirical mean of ||y_t - x*||^2 over the ensemble must stay below
    ``slack * ((1 - eta*lam/100)^t * ||y0 - x*||^2 + 100*b)`` plus three
    standard errors of the ensemble mean, at every t.
    """
    ydist2, sched = _shadow_distance_ensemble(objective, r, x0, T, trials, seed)
    means = ydist2.mean(axis=0)
    if trials > 1:
        se = ydist2.std(axis=0, ddof=1) / math.sqrt(trials)
    else:
        se = np.zeros_like(means)
    rho = 1.0 - sched.eta_lam / 100.0
    t = np.arange(T + 1)
    bounds = slack * (rho**t * ydist2[0, 0] + 100.0 * sched.b) + 3.0 * se
    margins = bounds - means
    bad = margins < 0.0
    first = int(np.argmax(bad)) if bad.any() else None
    return ContractionReport(means=means, bounds=bounds, margins=margins,
                             holds=not bad.any(), first_violation=first, schedule=sched)


def stopping_time_check(objective: Objective, r: float, ell: float, M: int,
                        trials: int, x0, seed: int) -> StoppingTimeReport:
    """Empirical dip probability of the recentred process versus its analytic bound.

    Runs the certified schedule with f_lb = f*, forms X_t = ||y_t - x*||^2 - 100b
    (a process with contraction factor theta = 1 - eta*lam/100 and floor -100b),
    and reports the fraction of trials with X_t < ell for some t <= M next to
    :func:`gndopt.theory.stopping_time_bound` evaluated at the empirical
    B = E[X_0 * 1{X_0 >= ell}].
    """
    if not r > 0:
        raise ParameterError(f"r must be positive, got {r}")
    if M < 0 or M != int(M):
        raise ParameterError(f"M must be a nonnegative integer, got {M}")
    ydist2, sched = _shadow_distance_ensemble(objective, r, x0, int(M), trials, seed)
    floor = 100.0 * sched.b
    x_process = ydist2 - floor
    theta = 1.0 - sched.eta_lam / 100.0
    empirical = float(np.count_nonzero((x_process < ell).any(axis=1)) / trials)
    x0_vals = x_process[:, 0]
    b_hat = float(np.mean(x0_vals * (x0_vals >= ell)))
    analytic = stopping_time_bound(theta, floor, ell, int(M), b_hat)
    return StoppingTimeReport(empirical_p=empirical, analytic_bound=analytic,
                              B_hat=b_hat, theta=theta, floor=floor, M=int(M), ell=ell)


def _fmt(v: float) -> str:
    """Shortest decimal that round-trips the double; integral values drop the '.0'."""
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def write_csv(series: StatsSeries, path) -> None:
    """Write ``t,mse,ncp`` rows at full double precision."""
    if not str(path):
        raise OSError("empty output path")
    lines = ["t,mse,ncp\n"]
    for t in range(len(series.mse)):
        lines.append(f"{t},{_fmt(series.mse[t])},{_fmt(series.ncp[t])}\n")
    with open(path, "w", newline="") as fh:
        fh.writelines(lines)


_SVG_W, _SVG_H, _SVG_MARGIN = 640, 300, 54.0


def _log_panel(name: str, values: Array, y_offset: float) -> list[str]:
    floor = 1e-16
    clipped = np.maximum(np.asarray(values, dtype=np.float64), floor)
    logs = np.log10(clipped)
    lo = math.floor(float(logs.min()))
    hi = math.ceil(float(logs.max()))
    if hi == lo:
        hi = lo + 1
    n = len(clipped)
    plot_w = _SVG_W - 2 * _SVG_MARGIN
    plot_h = _SVG_H - 2 * _SVG_MARGIN

    def xpix(t):
        return _SVG_MARGIN + plot_w * (t / max(n - 1, 1))

    def ypix(lv):
        return y_offset + _SVG_MARGIN + plot_h * (hi - lv) / (hi - lo)

    out = [
        f'<rect x="{_SVG_MARGIN}" y="{y_offset + _SVG_MARGIN}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="#444"/>',
        f'<text x="{_SVG_MARGIN}" y="{y_offset + _SVG_MARGIN - 10:.2f}" '
        f'font-size="13" fill="#000">{name} (log scale) vs iteration</text>',
    ]
    for dec in range(lo, hi + 1):
        y = ypix(dec)
        out.append(f'<line x1="{_SVG_MARGIN}" y1="{y:.2f}" x2="{_SVG_W - _SVG_MARGIN}" '
                   f'y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="6" y="{y + 4:.2f}" font-size="11" fill="#333">1e{dec}</text>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        t = round(frac * (n - 1))
        x = xpix(t)
        out.append(f'<text x="{x:.2f}" y="{y_offset + _SVG_H - _SVG_MARGIN + 16:.2f}" '
                   f'font-size="11" fill="#333" text-anchor="middle">{t}</text>')
    pts = " ".join(f"{xpix(t):.2f},{ypix(lv):.2f}" for t, lv in enumerate(logs))
    out.append(f'<polyline points="{pts}" fill="none" stroke="#1f6fb2" stroke-width="1.2"/>')
    return out


def write_svg(series: StatsSeries, path) -> None:
    """Render the two statistics as stacked log-y line charts in a standalone SVG."""
    if not str(path):
        raise OSError("empty output path")
    body = []
    body.extend(_log_panel("MSE", series.mse, 0.0))
    body.extend(_log_panel("N-CP", series.ncp, float(_SVG_H)))
    svg = "\n".join(
        [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{2 * _SVG_H}" '
         f'viewBox="0 0 {_SVG_W} {2 * _SVG_H}">',
         '<rect width="100%" height="100%" fill="#ffffff"/>',
         *body,
         "</svg>", ""]
    )
    with open(path, "w", newline="") as fh:
        fh.write(svg)
