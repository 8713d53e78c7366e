"""GND iteration, its double-loop variant, and the GD/SGD baseline.

One GND iteration from the current point x_t:

    x_{t+1/2} = x_t - eta * SG(x_t)
    sigma_t   = sqrt(eta * s * max(f(x_{t+1/2}) - f_lb, 0))
    x_{t+1}   = x_{t+1/2} - sigma_t * xi_t,   xi_t ~ N(0, I_d/d)

The injected noise is subtracted; xi is symmetric, so adding it defines the
same process.  The returned iterate is x_{t*} where t* is the first index
attaining the minimum recorded value over x_0..x_T (half-step values are
recorded for the noise bookkeeping but never enter t*).

Cost per iteration: one gradient evaluation (at x_t) and two value evaluations
(at x_{t+1/2} and x_{t+1}); recording the shadow iterates y_t = x_t - eta*grad f(x_t)
reuses the step gradient and only adds one extra gradient evaluation at x_T.

All runners drive the same batched kernel, so a single trajectory is bitwise
identical to the corresponding row of an ensemble run with the same stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from gndopt.errors import DivergedError, ParameterError
from gndopt.objectives import Objective
from gndopt.sampling import RngStream, SgOracle

Array = np.ndarray

GUARD_LIMIT = 1e12
_RNG_BLOCK = 1024  # iterations of noise pregenerated per refill; any value yields the same streams


@dataclass(frozen=True)
class GndConfig:
    """Hyperparameters of a single GND run."""

    eta: float
    s: float
    f_lb: float
    T: int
    record_y: bool = False

    def __post_init__(self):
        if not self.eta > 0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if self.s < 0:
            raise ParameterError(f"s must be nonnegative, got {self.s}")
        if self.T < 0 or self.T != int(self.T):
            raise ParameterError(f"T must be a nonnegative integer, got {self.T}")


@dataclass(frozen=True)
class DlGndConfig:
    """Hyperparameters of a double-loop GND run.

    Stage one runs GND for T1 iterations with the initial lower bound f_lb0;
    each of the N outer loops then updates the lower bound by the convex
    combination ``f_lb <- (1-gamma)*f_lb + gamma*f(x_min)`` and runs GND for T2
    iterations from the best point found so far.  (eta, s) are inherited
    unchanged by every inner run.
    """

    eta: float
    s: float
    f_lb0: float
    gamma: float
    N: int
    T1: int
    T2: int
    record_y: bool = False

    def __post_init__(self):
        if not self.eta > 0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if self.s < 0:
            raise ParameterError(f"s must be nonnegative, got {self.s}")
        if not (0.0 < self.gamma < 1.0):
            raise ParameterError(f"gamma must lie in (0, 1), got {self.gamma}")
        for name, v in (("N", self.N), ("T1", self.T1), ("T2", self.T2)):
            if v < 1 or v != int(v):
                raise ParameterError(f"{name} must be a positive integer, got {v}")

    @property
    def total_iterations(self) -> int:
        return self.T1 + self.N * self.T2


@dataclass(frozen=True)
class Trajectory:
    """Per-iteration record of one solver run."""

    points: Array       # (T+1, d)
    values: Array       # (T+1,)
    sigmas: Array       # (T,)
    half_values: Array  # (T,) values at the half-steps x_{t+1/2}
    y_points: Optional[Array]  # (T+1, d) shadow iterates, when recorded
    t_star: int

    def best_point(self) -> Array:
        return self.points[self.t_star]

    def best_value(self) -> float:
        return float(self.values[self.t_star])


@dataclass(frozen=True)
class DlGndTrace:
    """Outer-loop record of one double-loop run."""

    lb_history: Array   # (N+1,) lower-bound estimates f_lb^0 .. f_lb^N
    min_points: Array   # (N+1, d) best points after stage one and each outer loop
    min_values: Array   # (N+1,)
    inner_trajectories: Optional[list[Trajectory]]


def sigma_of(eta: float, s: float, f_half: float, f_lb: float):
    """Adaptive noise level sqrt(eta * s * (f_half - f_lb)^+); accepts arrays."""
    if not eta > 0:
        raise ParameterError(f"eta must be positive, got {eta}")
    if np.any(np.asarray(s) < 0):
        raise ParameterError(f"s must be nonnegative, got {s}")
    return np.sqrt(eta * s * np.maximum(np.asarray(f_half) - f_lb, 0.0))


def _check_values(v, t, base):
    bad = ~np.isfinite(v) | (np.abs(v) > GUARD_LIMIT)
    if bad.any():
        row = int(np.argmax(bad))
        raise DivergedError(iteration=t, trial=None if base is None else base + row)


def _check_gradients(g, t, base):
    bad = ~np.all(np.isfinite(g), axis=-1) | (np.sum(g * g, axis=-1) > GUARD_LIMIT**2)
    if bad.any():
        row = int(np.argmax(bad))
        raise DivergedError(iteration=t, trial=None if base is None else base + row)


class _BatchResult:
    __slots__ = ("values", "sigmas", "half_values", "points", "ys", "dist2", "t_star")

    def __init__(self, **kw):
        for name in self.__slots__:
            setattr(self, name, kw.get(name))


def _run_gnd_batch(objective, oracle, x0, cfg, rngs, *, f_lb=None, x_star=None,
                   record_points=False, record_y=False, trial_base=None) -> _BatchResult:
    """Run cfg.T GND iterations on a batch of trajectories, one rng stream per row.

    ``f_lb`` may be a scalar or a per-row vector (used by the double-loop
    ensemble); it defaults to ``cfg.f_lb``.  When ``x_star`` is given, squared
    distances to it are recorded per iteration.  Raises DivergedError as soon
    as any row produces a non-finite value/gradient or exceeds GUARD_LIMIT.
    """
    x = np.array(x0, dtype=np.float64)
    m, d = x.shape
    if len(rngs) != m:
        raise ParameterError(f"need one rng stream per row: {len(rngs)} streams, {m} rows")
    T = int(cfg.T)
    eta = float(cfg.eta)
    s = float(cfg.s)
    f_lb = cfg.f_lb if f_lb is None else f_lb
    r = float(oracle.r)
    draw_omega = r > 0.0
    draw_xi = s > 0.0
    cols = d * (int(draw_omega) + int(draw_xi))
    sqrt_d = math.sqrt(d)

    values = np.empty((m, T + 1))
    sigmas = np.empty((m, T))
    half_values = np.empty((m, T))
    points = np.empty((m, T + 1, d)) if record_points else None
    ys = np.empty((m, T + 1, d)) if record_y else None
    dist2 = np.empty((m, T + 1)) if x_star is not None else None

    v = np.atleast_1d(objective.value(x))
    _check_values(v, 0, trial_base)
    values[:, 0] = v
    if record_points:
        points[:, 0] = x
    if dist2 is not None:
        dist2[:, 0] = np.sum((x - x_star) ** 2, axis=-1)

    block = None
    bpos = 0
    for t in range(T):
        if cols and (block is None or bpos == block.shape[1]):
            span = min(_RNG_BLOCK, T - t)
            block = np.stack([rng.normals((span, cols)) for rng in rngs])
            bpos = 0
        g = objective.gradient(x)
        _check_gradients(g, t, trial_base)
        if record_y:
            ys[:, t] = x - eta * g
        if draw_omega:
            sg = g + r * (block[:, bpos, :d] / sqrt_d)
        else:
            sg = g
        xh = x - eta * sg
        vh = np.atleast_1d(objective.value(xh))
        _check_values(vh, t, trial_base)
        half_values[:, t] = vh
        sig = np.sqrt(eta * s * np.maximum(vh - f_lb, 0.0))
        sigmas[:, t] = sig
        if draw_xi:
            xi = block[:, bpos, (d if draw_omega else 0):]
            x = xh - sig[:, None] * (xi / sqrt_d)
        else:
            x = xh
        if cols:
            bpos += 1
        v = np.atleast_1d(objective.value(x))
        _check_values(v, t + 1, trial_base)
        values[:, t + 1] = v
        if record_points:
            points[:, t + 1] = x
        if dist2 is not None:
            dist2[:, t + 1] = np.sum((x - x_star) ** 2, axis=-1)

    if record_y:
        g = objective.gradient(x)
        _check_gradients(g, T, trial_base)
        ys[:, T] = x - eta * g

    t_star = np.argmin(values, axis=1)  # argmin returns the first minimizing index
    return _BatchResult(values=values, sigmas=sigmas, half_values=half_values,
                        points=points, ys=ys, dist2=dist2, t_star=t_star)


def _as_x0(objective, x0) -> Array:
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    if x0.shape != (objective.dim,):
        raise ParameterError(f"x0 must have shape ({objective.dim},), got {x0.shape}")
    return x0


def gnd_run(objective: Objective, oracle: SgOracle, x0, cfg: GndConfig, rng: RngStream) -> Trajectory:
    """Run GND for cfg.T iterations from x0, recording the full trajectory."""
    x0 = _as_x0(objective, x0)
    res = _run_gnd_batch(objective, oracle, x0[None, :], cfg, [rng],
                         record_points=True, record_y=cfg.record_y)
    return Trajectory(
        points=res.points[0],
        values=res.values[0],
        sigmas=res.sigmas[0],
        half_values=res.half_values[0],
        y_points=res.ys[0] if cfg.record_y else None,
        t_star=int(res.t_star[0]),
    )


def gd_run(objective: Objective, oracle: SgOracle, x0, eta: float, T: int,
           rng: RngStream, record_y: bool = False) -> Trajectory:
    """Plain (stochastic) gradient descent: GND with s = 0, bit for bit."""
    cfg = GndConfig(eta=eta, s=0.0, f_lb=0.0, T=T, record_y=record_y)
    return gnd_run(objective, oracle, x0, cfg, rng)


def dlgnd_run(objective: Objective, oracle: SgOracle, x0, cfg: DlGndConfig,
              rng: RngStream, keep_inner: bool = False) -> DlGndTrace:
    """Run the double-loop scheme, returning the outer-loop trace.

    The rng stream is consumed sequentially across all inner runs, so a
    double-loop run owns exactly one stream like any other trajectory.
    """
    x0 = _as_x0(objective, x0)
    n_outer = cfg.N
    lb = np.empty(n_outer + 1)
    mins = np.empty((n_outer + 1, objective.dim))
    min_vals = np.empty(n_outer + 1)
    inner = [] if keep_inner else None

    f_lb = float(cfg.f_lb0)
    stage = GndConfig(eta=cfg.eta, s=cfg.s, f_lb=f_lb, T=cfg.T1, record_y=cfg.record_y)
    traj = gnd_run(objective, oracle, x0, stage, rng)
    x_min, v_min = traj.best_point(), traj.best_value()
    lb[0], mins[0], min_vals[0] = f_lb, x_min, v_min
    if keep_inner:
        inner.append(traj)

    for nu in range(n_outer):
        f_lb = (1.0 - cfg.gamma) * f_lb + cfg.gamma * v_min
        stage = GndConfig(eta=cfg.eta, s=cfg.s, f_lb=f_lb, T=cfg.T2, record_y=cfg.record_y)
        traj = gnd_run(objective, oracle, x_min, stage, rng)
        x_min, v_min = traj.best_point(), traj.best_value()
        lb[nu + 1], mins[nu + 1], min_vals[nu + 1] = f_lb, x_min, v_min
        if keep_inner:
            inner.append(traj)

    return DlGndTrace(lb_history=lb, min_points=mins, min_values=min_vals,
                      inner_trajectories=inner)


def _run_dlgnd_batch(objective, oracle, x0, cfg, rngs, x_star, trial_base=None) -> Array:
    """Squared distances to x_star along a batch of double-loop runs.

    Column t of the result is the iterate after t gradient steps; outer-loop
    restarts jump to the running best point without consuming an iteration.
    """
    m = x0.shape[0]
    rows = np.arange(m)
    total = cfg.total_iterations
    dist2 = np.empty((m, total + 1))

    stage = GndConfig(eta=cfg.eta, s=cfg.s, f_lb=cfg.f_lb0, T=cfg.T1)
    res = _run_gnd_batch(objective, oracle, x0, stage, rngs, x_star=x_star,
                         record_points=True, trial_base=trial_base)
    dist2[:, : cfg.T1 + 1] = res.dist2
    x_min = res.points[rows, res.t_star]
    v_min = res.values[rows, res.t_star]
    f_lb = np.full(m, float(cfg.f_lb0))

    col = cfg.T1 + 1
    inner = GndConfig(eta=cfg.eta, s=cfg.s, f_lb=0.0, T=cfg.T2)
    for _ in range(cfg.N):
        f_lb = (1.0 - cfg.gamma) * f_lb + cfg.gamma * v_min
        res = _run_gnd_batch(objective, oracle, x_min, inner, rngs, f_lb=f_lb,
                             x_star=x_star, record_points=True, trial_base=trial_base)
        dist2[:, col : col + cfg.T2] = res.dist2[:, 1:]
        x_min = res.points[rows, res.t_star]
        v_min = res.values[rows, res.t_star]
        col += cfg.T2
    return dist2
