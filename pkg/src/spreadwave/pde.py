"""Direct simulation of ``u_t = D u_xx + f(u)`` on ``[-X, X]`` with front tracking.

Forward Euler in time, centred second differences in space and zero-flux
ends. The state is checked against the invariant box ``[0, k+]`` after
every step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from . import _kernels
from .errors import DomainError, InvalidInputError, InvarianceAlarm
from .report import CheckResult

BOX_SLACK = 1e-9
BOUNDARY_MARGIN = 20.0


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings. ``dt=None`` picks the largest ``1/n`` under the stability bound."""

    X: float = 200.0
    dx: float = 0.2
    t_end: float = 80.0
    dt: float | None = None
    theta: float = 0.5
    init_halfwidth: float = 5.0
    sample_dt: float = 1.0

    def __post_init__(self):
        if not (self.X > 0 and self.dx > 0 and self.t_end > 0 and self.sample_dt > 0):
            raise InvalidInputError("X, dx, t_end and sample_dt must be positive")
        if not 0 < self.theta < 1:
            raise InvalidInputError("theta must lie in (0, 1)")
        if self.init_halfwidth <= 0 or self.init_halfwidth >= self.X:
            raise InvalidInputError("init_halfwidth must lie in (0, X)")

    def x_grid(self) -> np.ndarray:
        n = int(round(2 * self.X / self.dx))
        if not math.isclose(n * self.dx, 2 * self.X, rel_tol=1e-9):
            raise InvalidInputError("2X must be a multiple of dx")
        return np.linspace(-self.X, self.X, n + 1)

    def time_step(self, d) -> float:
        bound = 0.4 * self.dx**2 / float(np.max(d))
        if self.dt is None:
            # an integer number of steps per sample keeps sample times exact
            n = math.ceil(self.sample_dt / bound)
            return self.sample_dt / n
        if self.dt > bound * (1 + 1e-12):
            raise InvalidInputError(f"dt = {self.dt:.4g} exceeds the stability bound {bound:.4g}")
        return float(self.dt)

    def refined(self) -> "SimConfig":
        return SimConfig(X=self.X, dx=self.dx / 2, t_end=self.t_end,
                         dt=None if self.dt is None else self.dt / 4, theta=self.theta,
                         init_halfwidth=self.init_halfwidth, sample_dt=self.sample_dt)


def default_initial(config: SimConfig, model) -> np.ndarray:
    """``k- * 1{|x| <= halfwidth}`` smoothed by one ``[1/4, 1/2, 1/4]`` pass."""
    x = config.x_grid()
    ind = (np.abs(x) <= config.init_halfwidth).astype(float)
    sm = ind.copy()
    sm[1:-1] = 0.25 * ind[:-2] + 0.5 * ind[1:-1] + 0.25 * ind[2:]
    return model.k_minus[:, None] * sm[None, :]


def _check_box(u, upper, t):
    if not np.all(np.isfinite(u)):
        raise InvarianceAlarm(f"non-finite value at t={t:.6g}", time=t)
    lo = float(np.min(u))
    hi = float(np.max(u - upper[:, None]))
    if lo < -BOX_SLACK or hi > BOX_SLACK:
        raise InvarianceAlarm(
            f"state left [0, k+] at t={t:.6g} (min {lo:.3e}, max excess {hi:.3e})", time=t
        )


def step(u, model, reaction: str, dt: float, dx: float, t: float = 0.0) -> np.ndarray:
    """One explicit step; raises :class:`InvarianceAlarm` outside ``[-1e-9, k+ + 1e-9]``."""
    if dt > 0.4 * dx * dx / float(np.max(model.d)) * (1 + 1e-12):
        raise InvalidInputError("dt violates the stability bound 0.4 dx^2 / max d")
    fun = model.reaction(reaction)
    new = _kernels.euler_step(u, fun(u), model.d, dt, dx)
    _check_box(new, model.k_plus, t + dt)
    return new


def front_positions(x, u1, level):
    """Leftmost and rightmost crossing of ``u1 = level``, linearly interpolated; NaN if none."""
    above = np.nonzero(u1 >= level)[0]
    if above.size == 0:
        return math.nan, math.nan
    i, j = int(above[0]), int(above[-1])
    if i > 0:
        a, b = u1[i - 1], u1[i]
        left = x[i - 1] + (level - a) / (b - a) * (x[i] - x[i - 1])
    else:
        left = x[0]
    if j < x.size - 1:
        a, b = u1[j], u1[j + 1]
        right = x[j] + (a - level) / (a - b) * (x[j + 1] - x[j])
    else:
        right = x[-1]
    return float(left), float(right)


def fit_speed(times, front):
    """Least-squares slope with its standard error."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(front, dtype=float)
    ok = np.isfinite(y)
    t, y = t[ok], y[ok]
    if t.size < 3:
        return math.nan, math.nan
    A = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    s2 = float(resid @ resid) / (t.size - 2)
    se = math.sqrt(s2 / float(np.sum((t - t.mean()) ** 2)))
    return float(coef[0]), se


@dataclass(frozen=True)
class FrontTrace:
    times: np.ndarray
    front_left: np.ndarray
    front_right: np.ndarray
    fitted_speed: float
    speed_stderr: float
    plateau: np.ndarray
    plateau_series: np.ndarray

    def monotone_after(self, t0: float, tol: float = 1e-9) -> bool:
        sel = self.times >= t0
        return bool(np.all(np.diff(self.front_right[sel]) >= -tol))


@dataclass(frozen=True)
class SimResult:
    x: np.ndarray
    trace: FrontTrace
    final: np.ndarray
    samples: np.ndarray
    reaction: str
    dt: float
    info: dict = field(default_factory=dict)


def run(config: SimConfig, model, reaction: str = "f", u0=None, fit: bool = True) -> SimResult:
    """Integrate to ``t_end``, sampling fronts every ``sample_dt``.

    The speed is the slope of the right front over ``[t_end/2, t_end]``; the
    fit is refused if that front comes within 20 units of the boundary.
    """
    x = config.x_grid()
    u = default_initial(config, model) if u0 is None else np.array(u0, dtype=float)
    if u.shape != (model.N, x.size):
        raise InvalidInputError(f"initial data must have shape {(model.N, x.size)}")
    _check_box(u, model.k_plus, 0.0)
    dt = config.time_step(model.d)
    per_sample = int(round(config.sample_dt / dt))
    n_samples = int(round(config.t_end / config.sample_dt))
    fun = model.reaction(reaction)
    level = config.theta * float(model.k[0])

    times = np.arange(n_samples + 1) * config.sample_dt
    samples = np.empty((n_samples + 1, model.N, x.size))
    fl = np.empty(n_samples + 1)
    fr = np.empty(n_samples + 1)
    samples[0] = u
    fl[0], fr[0] = front_positions(x, u[0], level)
    t = 0.0
    for s in range(1, n_samples + 1):
        for _ in range(per_sample):
            u = _kernels.euler_step(u, fun(u), model.d, dt, config.dx)
            t += dt
            _check_box(u, model.k_plus, t)
        samples[s] = u
        fl[s], fr[s] = front_positions(x, u[0], level)

    speed = se = math.nan
    plateau = np.full(model.N, math.nan)
    series = np.full((n_samples + 1, model.N), math.nan)
    if fit:
        win = times >= config.t_end / 2
        edge = config.X - BOUNDARY_MARGIN
        if np.any(~np.isfinite(fr[win])) or np.any(fr[win] > edge) or np.any(fl[win] < -edge):
            raise DomainError(
                f"front within {BOUNDARY_MARGIN:g} of the boundary during the fit window; enlarge X"
            )
        speed, se = fit_speed(times[win], fr[win])
        for s in range(n_samples + 1):
            series[s] = _plateau(x, samples[s], speed * times[s] / 4.0)
        plateau = series[-1]
    trace = FrontTrace(times=times, front_left=fl, front_right=fr, fitted_speed=speed,
                       speed_stderr=se, plateau=plateau, plateau_series=series)
    return SimResult(x=x, trace=trace, final=u, samples=samples, reaction=reaction, dt=dt)


def _plateau(x, u, radius):
    sel = np.abs(x) <= max(radius, 0.0)
    if not np.any(sel):
        sel = np.abs(x) == np.min(np.abs(x))
    return u[:, sel].mean(axis=1)


@dataclass(frozen=True)
class SandwichReport:
    max_violation: float
    speeds: tuple
    runs: tuple

    @property
    def passed(self) -> bool:
        return self.max_violation < 1e-6

    def result(self) -> CheckResult:
        return CheckResult("comparison_sandwich", self.passed, 1e-6 - self.max_violation,
                           "max over samples of u- - u and u - u+")

    @property
    def speeds_ordered(self) -> bool:
        a, b, c = self.speeds
        return a <= b + 1e-9 and b <= c + 1e-9


def sandwich_check(config: SimConfig, model, u0=None) -> SandwichReport:
    """Run ``f-``, ``f`` and ``f+`` from the same data and compare at every sample time."""
    runs = tuple(run(config, model, r, u0=u0) for r in ("f-", "f", "f+"))
    lo, mid, hi = (r.samples for r in runs)
    viol = float(max(np.max(lo - mid), np.max(mid - hi)))
    return SandwichReport(max_violation=viol, speeds=tuple(r.trace.fitted_speed for r in runs), runs=runs)


@dataclass(frozen=True)
class ProbeVerdict:
    c_test: float
    verdict: str  # "pass", "fail" or "vacuous"
    value: float
    threshold: float
    side: str  # "ahead" (decay beyond the ray) or "behind" (occupation inside it)

    def result(self, name: str) -> CheckResult:
        if self.verdict == "vacuous":
            return CheckResult(name, False, math.nan, f"c_test={self.c_test:.6g} vacuous: ray leaves the domain")
        margin = self.threshold - self.value if self.side == "ahead" else self.value - self.threshold
        return CheckResult(name, self.verdict == "pass", margin, f"c_test={self.c_test:.6g}")


def spreading_probe(config: SimConfig, model, c_test: float, c_star: float,
                    result: SimResult | None = None) -> ProbeVerdict:
    """Ray test at ``t_end``.

    Above ``c_star``: ``max u`` over ``|x| >= c_test t`` must be below
    ``1e-3 min k``. Below: ``min u_1`` over ``|x| <= c_test t`` must exceed
    ``0.5 k1-``. A ray that leaves the domain is reported as vacuous.
    """
    if not c_test > 0:
        raise InvalidInputError("c_test must be positive")
    res = run(config, model) if result is None else result
    x, u, t = res.x, res.final, config.t_end
    r = c_test * t
    if c_test > c_star:
        if r >= config.X:
            return ProbeVerdict(c_test, "vacuous", math.nan, math.nan, "ahead")
        sel = np.abs(x) >= r
        val = float(np.max(u[:, sel]))
        thr = 1e-3 * float(np.min(model.k))
        return ProbeVerdict(c_test, "pass" if val < thr else "fail", val, thr, "ahead")
    sel = np.abs(x) <= r
    val = float(np.min(u[0, sel]))
    thr = 0.5 * float(model.k_minus[0])
    return ProbeVerdict(c_test, "pass" if val > thr else "fail", val, thr, "behind")


def write_trace_csv(path, trace: FrontTrace) -> None:
    N = trace.plateau_series.shape[1]
    header = ",".join(["t", "front_left", "front_right"] + [f"plateau_u{i + 1}" for i in range(N)])
    data = np.column_stack([trace.times, trace.front_left, trace.front_right, trace.plateau_series])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")
