"""Epsilon sweeps, invariant drift and time-uniformity studies.

These turn the asymptotic balance statements into numbers: residual norms
for a ladder of eps values with a fitted log-log slope, drift of the three
classical invariants along a trajectory, and the residual norm sampled in
time.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Params, SolverConfig, Trajectory, max_stable_dt, simulate
from .errors import KdVError
from .grid import Grid, l2_norm, make_grid, sobolev_norm
from .laws import LawId, conserved_integrals, law_form, residual
from . import thresholds

logger = logging.getLogger(__name__)

DEFAULT_EPS_LADDER = (0.025, 0.05, 0.1, 0.2)
DEFAULT_SAMPLE_TIMES = (0.0, 5.0, 10.0)
THREADS_ENV = "KDV_BALANCE_THREADS"
_DT_LADDER = (0.005, 0.004, 0.0025, 0.002, 0.00125, 0.001, 0.0005, 0.00025)


def fit_loglog_slope(points) -> tuple[float, float]:
    """Least-squares slope of log y against log x, and its r**2."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points for a slope fit, got {len(pts)}")
    if any(not (x > 0 and y > 0) for x, y in pts):
        raise ValueError("log-log fit requires strictly positive coordinates")
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(r2)


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
        return 1


def pick_dt(grid: Grid, params: Params, times, ceiling: float = 0.005) -> float:
    """Largest ladder step below the stability bound that hits every sample time."""
    bound = min(ceiling, max_stable_dt(grid, params))
    for dt in _DT_LADDER:
        if dt <= bound and all(abs(t / dt - round(t / dt)) < 1e-9 for t in times):
            return dt
    raise ValueError(f"no admissible time step below {bound:.3g} for times {times}")


@dataclass(frozen=True)
class SweepResult:
    law: LawId
    eps_values: tuple[float, ...]
    residual_norms: tuple[float, ...]
    slope: float | None
    r2: float | None
    c_bound: float | None
    mode: str = "analysis"
    sample_times: tuple[float, ...] = (0.0,)
    # norms_by_time[i][j]: norm at eps_values[i], sample_times[j]
    norms_by_time: tuple[tuple[float, ...], ...] = ()
    slopes_by_time: tuple[float | None, ...] = ()
    errors: dict = field(default_factory=dict)
    sobolev: tuple[float, ...] = ()

    @property
    def complete(self) -> bool:
        return not self.errors


def _sweep_one(profile, law, eps, grid, mode, sample_times, scheme):
    params = Params(eps)
    eta0 = profile.build(grid, params)
    if mode == "analysis":
        return (l2_norm(residual(law, eta0, params)),)
    dt = pick_dt(grid, params, sample_times)
    steps = [int(round(t / dt)) for t in sample_times]
    stride = math.gcd(*[s for s in steps if s]) if any(steps) else 1
    cfg = SolverConfig(params, grid, dt=dt, t_end=max(sample_times), scheme=scheme,
                       snapshot_stride=stride)
    traj = simulate(eta0, cfg)
    by_step = {int(round(t / dt)): s for t, s in zip(traj.times, traj.states)}
    return tuple(l2_norm(residual(law, by_step[s], params)) for s in steps)


def epsilon_sweep(profile, law, eps_values=DEFAULT_EPS_LADDER, grid: Grid | None = None,
                  mode: str = "analysis", sample_times=DEFAULT_SAMPLE_TIMES,
                  scheme: str = "ETDRK4") -> SweepResult:
    """Scaled residual norms of ``law`` for a fixed profile over eps.

    In ``analysis`` mode the residual of the initial profile is measured
    directly.  In ``dynamic`` mode the profile is evolved with each eps and
    the residual is sampled at ``sample_times``.  Failures for a single eps
    are recorded in ``errors`` and the remaining values are kept.
    """
    form = law_form(law)
    law = form.law
    grid = grid or make_grid(1024, 100.0)
    eps_values = tuple(float(e) for e in eps_values)
    if any(b <= a for a, b in zip(eps_values, eps_values[1:])):
        raise ValueError("eps values must be strictly increasing")
    if mode not in ("analysis", "dynamic"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    times = (0.0,) if mode == "analysis" else tuple(float(t) for t in sample_times)

    def task(eps):
        try:
            return eps, _sweep_one(profile, form, eps, grid, mode, times, scheme), None
        except (KdVError, ValueError) as exc:
            logger.warning("sweep %s eps=%g failed: %s", law.value, eps, exc)
            return eps, None, str(exc)

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(task, eps_values))
    else:
        outcomes = [task(e) for e in eps_values]
    results = {eps: norms for eps, norms, _ in outcomes if norms is not None}
    errors = {eps: err for eps, _, err in outcomes if err is not None}

    ok_eps = tuple(e for e in eps_values if e in results)
    table = tuple(results[e] for e in ok_eps)
    peak = tuple(max(row) for row in table)

    def fit(ys):
        if law.exact or len(ys) < 3 or min(ys) <= 0:
            return None, None
        return fit_loglog_slope(zip(ok_eps, ys))

    slope, r2 = fit(peak)
    slopes_t = tuple(fit([row[j] for row in table])[0] for j in range(len(times)))
    c_bound = None if law.exact or not peak else max(v / e**2 for e, v in zip(ok_eps, peak))
    sob = tuple(sobolev_norm(profile.build(grid, Params(eps_values[0])), k) for k in range(7))
    return SweepResult(
        law=law, eps_values=ok_eps, residual_norms=peak, slope=slope, r2=r2,
        c_bound=c_bound, mode=mode, sample_times=times, norms_by_time=table,
        slopes_by_time=slopes_t, errors=errors, sobolev=sob,
    )


@dataclass(frozen=True)
class DriftReport:
    times: tuple[float, ...]
    m1: tuple[float, ...]
    m2: tuple[float, ...]
    m3: tuple[float, ...]
    max_rel_drift: tuple[float, float, float]

    def passed(self, tolerance: float = thresholds.DRIFT_TOLERANCE) -> bool:
        return all(d <= tolerance for d in self.max_rel_drift)


def _rel_drift(series) -> float:
    ref = series[0]
    scale = abs(ref) if abs(ref) > thresholds.DRIFT_ZERO_GUARD else 1.0
    return max(abs(v - ref) for v in series) / scale


def invariant_drift(traj: Trajectory) -> DriftReport:
    """Per-snapshot invariants and their largest relative change from t = 0."""
    if len(traj.times) < 2:
        raise ValueError("drift needs at least two snapshots")
    values = [conserved_integrals(s) for s in traj.states]
    m1, m2, m3 = (tuple(v[i] for v in values) for i in range(3))
    drift = (_rel_drift(m1), _rel_drift(m2), _rel_drift(m3))
    return DriftReport(tuple(traj.times), m1, m2, m3, drift)


@dataclass(frozen=True)
class UniformitySeries:
    law: LawId
    times: tuple[float, ...]
    norms: tuple[float, ...]

    @property
    def ratio(self) -> float:
        """max norm over the run divided by the initial norm (1 if both vanish)."""
        first, top = self.norms[0], max(self.norms)
        if first == 0:
            return 1.0 if top == 0 else math.inf
        return top / first

    def growth_rate(self) -> float:
        """Slope of norm(t)/norm(0) from a linear least-squares fit."""
        if self.norms[0] == 0:
            return 0.0
        rel = np.asarray(self.norms) / self.norms[0]
        return float(np.polyfit(self.times, rel, 1)[0])


def time_uniformity(profile, law, params: Params, t_end: float, grid: Grid | None = None,
                    dt: float | None = None, sample_every: float = 1.0,
                    scheme: str = "ETDRK4") -> UniformitySeries:
    """Scaled residual norm sampled along a simulated trajectory."""
    law = LawId.parse(law)
    if law.exact:
        raise ValueError(f"{law.value} is an exact law; nothing to track")
    if not 0 <= t_end <= 100:
        raise ValueError(f"t_end must lie in [0, 100], got {t_end}")
    grid = grid or make_grid(1024, 100.0)
    dt = dt or pick_dt(grid, params, (sample_every, t_end))
    stride = int(round(sample_every / dt))
    eta0 = profile.build(grid, params)
    cfg = SolverConfig(params, grid, dt=dt, t_end=t_end, scheme=scheme, snapshot_stride=stride)
    traj = simulate(eta0, cfg)
    norms = tuple(l2_norm(residual(law, s, params)) for s in traj.states)
    return UniformitySeries(law, tuple(traj.times), norms)
