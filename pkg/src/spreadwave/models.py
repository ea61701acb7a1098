"""Reaction models: scalar Fisher-KPP and the ungulate-grass system.

The ungulate-grass system is written in shifted variables ``w1 = u1``,
``w2 = u2 - 1`` so that the invasion starts from the origin:

    f1(w) = w1 * (r1 - alpha - delta*w1 + r1*w2)
    f2(w) = r2 * (1 + w2) * (h(w1) - w2)

with a unimodal grass-benefit function ``h`` (Ricker ``w*exp(-w)`` by
default). It is cooperative only while ``h`` is increasing, so the bounding
cooperative systems replace ``h`` by the monotone envelopes ``h_plus`` and
``h_minus`` built in :func:`build_h_pm`.

Every reaction takes an array of shape ``(N, ...)`` and returns the same
shape, so one callable serves point checks, grids and PDE states.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import HypothesisViolation, InvalidInputError
from .report import CheckResult

Reaction = Callable[[np.ndarray], np.ndarray]

_REACTION_ALIASES = {
    "f": "f",
    "f-": "f-",
    "minus": "f-",
    "f_minus": "f-",
    "f+": "f+",
    "plus": "f+",
    "f_plus": "f+",
}


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelSpec:
    """Reaction-diffusion model ``u_t = D u_xx + f(u)`` with cooperative bounds ``f-, f+``.

    ``k``, ``k_minus`` and ``k_plus`` are the positive equilibria of ``f``,
    ``f-`` and ``f+``. ``variants`` holds extra named reactions (for the
    ungulate model, ``"h0"`` is ``f`` with ``h`` replaced by zero).
    """

    name: str
    d: np.ndarray
    f: Reaction
    J0: np.ndarray
    k: np.ndarray
    k_minus: np.ndarray
    k_plus: np.ndarray
    f_minus: Reaction
    f_plus: Reaction
    cooperative: bool = False
    params: Mapping[str, float] = field(default_factory=dict)
    variants: Mapping[str, Reaction] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("d", "J0", "k", "k_minus", "k_plus"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = self.d.shape[0]
        if self.d.ndim != 1 or n < 1:
            raise InvalidInputError("d must be a non-empty vector")
        if np.any(self.d <= 0):
            raise InvalidInputError("diffusion coefficients must be positive")
        if self.J0.shape != (n, n):
            raise InvalidInputError(f"J0 must be {n}x{n}")
        off = self.J0 - np.diag(np.diag(self.J0))
        if np.any(off < 0):
            raise InvalidInputError("J0 must have nonnegative off-diagonal entries")
        for name in ("k", "k_minus", "k_plus"):
            if getattr(self, name).shape != (n,):
                raise InvalidInputError(f"{name} must have length {n}")

    @property
    def N(self) -> int:
        return int(self.d.shape[0])

    def reaction(self, which: str = "f") -> Reaction:
        if which == "zero":
            return _zero_reaction
        key = _REACTION_ALIASES.get(which)
        if key is None:
            if which in self.variants:
                return self.variants[which]
            raise InvalidInputError(f"unknown reaction {which!r}")
        return {"f": self.f, "f-": self.f_minus, "f+": self.f_plus}[key]

    def equilibrium(self, which: str = "f") -> np.ndarray:
        key = _REACTION_ALIASES.get(which)
        if key is None:
            raise InvalidInputError(f"no equilibrium recorded for {which!r}")
        return {"f": self.k, "f-": self.k_minus, "f+": self.k_plus}[key]


def _zero_reaction(u):
    return np.zeros_like(np.asarray(u, dtype=float))


# ---------------------------------------------------------------- Fisher


def fisher(d: float = 1.0, r: float = 1.0) -> ModelSpec:
    """Fisher-KPP ``u_t = d u_xx + r u (1 - u)``; cooperative, so ``f- = f = f+``."""
    if d <= 0 or r <= 0:
        raise InvalidInputError("fisher: d and r must be positive")

    def f(u):
        u = np.asarray(u, dtype=float)
        return r * u * (1.0 - u)

    one = np.ones(1)
    return ModelSpec(
        name="fisher",
        d=[d],
        f=f,
        J0=[[r]],
        k=one,
        k_minus=one,
        k_plus=one,
        f_minus=f,
        f_plus=f,
        cooperative=True,
        params={"d": float(d), "r": float(r)},
    )


# ---------------------------------------------------------------- ungulate


def ricker(w):
    w = np.asarray(w, dtype=float)
    return w * np.exp(-w)


@dataclass(frozen=True)
class UngulateParams:
    d1: float
    d2: float
    alpha: float
    delta: float
    r1: float
    r2: float
    h: Callable = ricker
    h_m: float = 1.0
    h_prime0: float | None = None

    def __post_init__(self):
        problems = []
        for name in ("d1", "d2", "alpha", "delta", "r1", "r2"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive")
        if self.alpha >= self.r1:
            problems.append("alpha must be smaller than r1 (otherwise the ungulates cannot invade)")
        if not self.h_m > 0:
            problems.append("h_m must be positive")
        if problems:
            raise InvalidInputError("; ".join(problems))

    @property
    def hp0(self) -> float:
        """h'(0): analytic for Ricker, central difference otherwise."""
        if self.h_prime0 is not None:
            return float(self.h_prime0)
        if self.h is ricker:
            return 1.0
        eps = 1e-6
        return float((self.h(eps) - self.h(-eps)) / (2 * eps))

    @property
    def delta_threshold(self) -> float:
        return self.r1 * self.r2 * self.hp0 / (self.r1 + self.r2 - self.alpha)


def _bisect(g, lo, hi, tol=1e-13, max_iter=400):
    glo = g(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            break
        gm = g(mid)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _equilibrium_w1(p: UngulateParams, hv: Callable) -> float:
    def g(w):
        return p.delta * w - (p.r1 - p.alpha) - p.r1 * float(hv(w))

    lo, hi = 1e-12, 4.0
    if g(lo) >= 0:
        raise InvalidInputError("equilibrium equation has no sign change near 0")
    while g(hi) <= 0:
        hi *= 2.0
        if hi > 1e12:
            raise InvalidInputError("no positive equilibrium found (bracket exceeded 1e12)")
    return _bisect(g, lo, hi)


def build_h_pm(p: UngulateParams):
    """Monotone envelopes of ``h``.

    ``h_plus`` freezes ``h`` at its maximum beyond ``h_m``. ``h_minus``
    follows ``h`` up to ``h_0`` and then stays at ``h(k1_plus)``, where
    ``h_0 <= h_m`` solves ``h(h_0) = h(k1_plus)`` on the increasing branch.
    Returns ``(h_plus, h_minus, h_0)``.
    """
    h, hm = p.h, p.h_m
    h_top = float(h(hm))

    def h_plus(w):
        w = np.asarray(w, dtype=float)
        return np.where(w <= hm, h(np.minimum(w, hm)), h_top)

    k1p = _equilibrium_w1(p, h_plus)
    level = float(h(k1p))
    if level > h_top * (1 + 1e-12):
        raise HypothesisViolation("h(k1+) exceeds max h; h is not unimodal with peak at h_m")
    if level >= h_top:
        h0 = hm
    else:
        h0 = _bisect(lambda w: float(h(w)) - level, 0.0, hm)

    def h_minus(w):
        w = np.asarray(w, dtype=float)
        return np.where(w <= h0, h(np.minimum(w, h0)), level)

    return h_plus, h_minus, h0


def solve_equilibrium(p: UngulateParams, which: str = "h"):
    """Positive equilibrium ``(k1, k2)`` of the system built on ``h``, ``h+``, ``h-`` or ``0``."""
    if which == "h":
        hv = p.h
    elif which in ("h+", "h-"):
        h_plus, h_minus, _ = build_h_pm(p)
        hv = h_plus if which == "h+" else h_minus
    elif which in ("0", "zero"):
        return np.array([(p.r1 - p.alpha) / p.delta, 0.0])
    else:
        raise InvalidInputError(f"unknown h variant {which!r}")
    k1 = _equilibrium_w1(p, hv)
    return np.array([k1, float(hv(k1))])


def _ungulate_reaction(p: UngulateParams, hv: Callable) -> Reaction:
    a = p.r1 - p.alpha

    def f(w):
        w = np.asarray(w, dtype=float)
        w1, w2 = w[0], w[1]
        f1 = w1 * (a - p.delta * w1 + p.r1 * w2)
        f2 = p.r2 * (1.0 + w2) * (hv(w1) - w2)
        return np.stack([f1, f2])

    return f


def ungulate(p: UngulateParams) -> ModelSpec:
    """Ungulate-grass model in shifted variables with its ``h+``/``h-`` bounding systems.

    Raises when ``k1 <= h_m``: that regime is cooperative on ``[0, k]`` and
    is not handled by the sandwich construction here.
    """
    h_plus, h_minus, h0 = build_h_pm(p)
    k = solve_equilibrium(p, "h")
    if not k[0] > p.h_m:
        raise HypothesisViolation(
            f"k1 = {k[0]:.6g} does not exceed h_m = {p.h_m:.6g}; this regime is not supported"
        )
    k1p = _equilibrium_w1(p, h_plus)
    k1m = _equilibrium_w1(p, h_minus)
    k_plus = np.array([k1p, float(h_plus(k1p))])
    k_minus = np.array([k1m, float(h_minus(k1m))])
    J0 = np.array([[p.r1 - p.alpha, 0.0], [p.r2 * p.hp0, -p.r2]])
    params = {
        "d1": p.d1, "d2": p.d2, "alpha": p.alpha, "delta": p.delta,
        "r1": p.r1, "r2": p.r2, "h_m": p.h_m, "h_0": h0,
    }
    return ModelSpec(
        name="ungulate",
        d=[p.d1, p.d2],
        f=_ungulate_reaction(p, p.h),
        J0=J0,
        k=k,
        k_minus=k_minus,
        k_plus=k_plus,
        f_minus=_ungulate_reaction(p, h_minus),
        f_plus=_ungulate_reaction(p, h_plus),
        cooperative=False,
        params=params,
        variants={
            "h0": _ungulate_reaction(p, lambda w: np.zeros_like(np.asarray(w, dtype=float))),
            "h_plus": h_plus,
            "h_minus": h_minus,
        },
    )


# ---------------------------------------------------------------- checks


def fd_jacobian(fun: Reaction, pts: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian at each column of ``pts`` (shape ``(N, P)``) -> ``(N, N, P)``."""
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[0]
    jac = np.empty((n, n) + pts.shape[1:])
    for j in range(n):
        e = np.zeros((n,) + (1,) * (pts.ndim - 1))
        e[j] = eps
        jac[:, j] = (fun(pts + e) - fun(pts - e)) / (2 * eps)
    return jac


def box_samples(upper, n: int = 32) -> np.ndarray:
    """Sample points of the box ``[0, upper]`` as columns, vertices always included.

    Tensor grid with ``n`` points per axis for ``N <= 2``; for larger ``N`` a
    fixed-seed uniform cloud of ``n**2`` points.
    """
    upper = np.asarray(upper, dtype=float)
    N = upper.shape[0]
    if N <= 2:
        axes = [np.linspace(0.0, u, n) for u in upper]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh])
    else:
        rng = np.random.default_rng(0)
        pts = rng.random((N, n * n)) * upper[:, None]
    verts = np.array(np.meshgrid(*[[0.0, u] for u in upper], indexing="ij")).reshape(N, -1)
    return np.concatenate([pts, verts], axis=1)


def check_H1(model: ModelSpec, n: int = 32) -> list[CheckResult]:
    """Sampled checks of equilibria, the ordering ``f- <= f <= f+``, cooperativity and shared ``J0``."""
    out = []
    N = model.N
    zero = np.zeros(N)
    worst = max(
        float(np.max(np.abs(model.f(zero)))),
        float(np.max(np.abs(model.f(model.k)))),
        float(np.max(np.abs(model.f_minus(zero)))),
        float(np.max(np.abs(model.f_minus(model.k_minus)))),
        float(np.max(np.abs(model.f_plus(zero)))),
        float(np.max(np.abs(model.f_plus(model.k_plus)))),
    )
    out.append(CheckResult("H1.equilibria", worst < 1e-12, 1e-12 - worst, "max |f(eq)|"))

    order_ok = bool(np.all(model.k_minus > 0) and np.all(model.k_minus <= model.k)
                    and np.all(model.k <= model.k_plus))
    gap = float(min(np.min(model.k_minus), np.min(model.k - model.k_minus),
                    np.min(model.k_plus - model.k)))
    out.append(CheckResult("H1.equilibrium_order", order_ok, gap, "0 << k- <= k <= k+"))

    pts = box_samples(model.k_plus, n)
    fm, f0, fp = model.f_minus(pts), model.f(pts), model.f_plus(pts)
    viol = float(max(np.max(fm - f0), np.max(f0 - fp)))
    out.append(CheckResult("H1.sandwich_f", viol <= 1e-12, -viol, "f- <= f <= f+ on [0,k+]"))

    worst_off = np.inf
    for fun, kk in ((model.f_minus, model.k_minus), (model.f_plus, model.k_plus)):
        jac = fd_jacobian(fun, box_samples(kk, n))
        for i in range(N):
            for j in range(N):
                if i != j:
                    worst_off = min(worst_off, float(np.min(jac[i, j])))
    if N == 1:
        worst_off = 0.0
    out.append(CheckResult("H1.cooperative_bounds", worst_off >= -1e-10, worst_off + 1e-10,
                           "min off-diagonal dfj/dui of f+-"))

    z = np.zeros((N, 1))
    jdiff = 0.0
    for fun in (model.f, model.f_minus, model.f_plus):
        jdiff = max(jdiff, float(np.max(np.abs(fd_jacobian(fun, z)[:, :, 0] - model.J0))))
    out.append(CheckResult("H1.same_linearization", jdiff < 1e-10, 1e-10 - jdiff,
                           "max |Df(0) - J0| over f, f-, f+"))
    return out


def default_h_grid(p: UngulateParams | None = None, n: int = 10_000) -> np.ndarray:
    top = 50.0
    if p is not None:
        top = max(50.0, 5.0 * float(solve_equilibrium(p, "h+")[0]))
    return np.linspace(0.0, top, n)


def check_H4(h: Callable, grid: np.ndarray, h_prime0: float | None = None) -> list[CheckResult]:
    """Sampled checks on the benefit function ``h``.

    (i) ``h(0) = 0``, ``h'(0) > 0``, positive, single interior peak, decays;
    (ii) ``h(w)/w`` strictly decreasing; (iii) ``h^2 + 4h - 4h'(0)w <= 0``.
    """
    grid = np.asarray(grid, dtype=float)
    hv = np.asarray(h(grid), dtype=float)
    if h_prime0 is None:
        eps = 1e-6
        h_prime0 = float((h(eps) - h(-eps)) / (2 * eps))
    pos = grid > 0
    res = []

    h_at0 = abs(float(h(0.0)))
    res.append(CheckResult("H4.h0_zero", h_at0 <= 1e-14, 1e-14 - h_at0))
    res.append(CheckResult("H4.slope_at_0", h_prime0 > 0, h_prime0))
    hmin = float(np.min(hv[pos]))
    res.append(CheckResult("H4.positive", hmin > 0, hmin))

    dh = np.diff(hv)
    signs = np.sign(dh[dh != 0])
    changes = int(np.count_nonzero(np.diff(signs)))
    unimodal = changes == 1 and signs[0] > 0 and signs[-1] < 0
    res.append(CheckResult("H4.unimodal", unimodal, 1.0 - abs(changes - 1),
                           f"{changes} monotonicity change(s)"))
    tail_ratio = float(hv[-1] / np.max(hv))
    res.append(CheckResult("H4.decays", tail_ratio < 1e-3, 1e-3 - tail_ratio, "h(w_max)/max h"))

    ratio = hv[pos] / grid[pos]
    step = float(np.max(np.diff(ratio))) if ratio.size > 1 else -1.0
    res.append(CheckResult("H4.ratio_decreasing", step < 0, -step, "max increment of h(w)/w"))

    q = hv[pos] ** 2 + 4 * hv[pos] - 4 * h_prime0 * grid[pos]
    worst = float(np.max(q))
    res.append(CheckResult("H4.quadratic_bound", worst <= 1e-12, -worst,
                           "max of h^2 + 4h - 4h'(0)w"))
    return res


def check_5_36(p: UngulateParams, lambdas=None, thetas=None) -> list[CheckResult]:
    """Threshold ``delta >= r1 r2 h'(0)/(r1 + r2 - alpha)`` plus sampled spot checks.

    Along ``w2 = (h'(0)/sigma) w1`` with ``sigma = 1 + (r1 - alpha +
    (d1 - d2) lam^2)/r2`` it samples ``delta w1 >= r1 w2`` and
    ``h'(0) w1 + w2^2 >= h+(w1)(1 + w2)``.
    """
    if not p.alpha < p.r1 + p.r2:
        raise InvalidInputError("alpha must be below r1 + r2")
    if lambdas is None:
        lambdas = np.concatenate([[1e-3, 1e-2], np.linspace(0.05, 10.0, 200)])
    h_plus, _, _ = build_h_pm(p)
    if thetas is None:
        k1p = _equilibrium_w1(p, h_plus)
        thetas = np.geomspace(1e-4, k1p, 200)
    thr = p.delta_threshold
    hp0 = p.hp0
    res = [CheckResult("5.36.threshold", p.delta >= thr * (1 - 1e-14), p.delta - thr,
                       f"delta={p.delta:.6g} threshold={thr:.6g}")]
    lam = np.asarray(lambdas, dtype=float)[:, None]
    th = np.asarray(thetas, dtype=float)[None, :]
    sigma = 1.0 + (p.r1 - p.alpha + (p.d1 - p.d2) * lam**2) / p.r2
    w1 = th + 0 * lam
    w2 = hp0 / sigma * th
    m40 = (p.delta * w1 - p.r1 * w2) / w1
    m41 = hp0 * w1 + w2**2 - h_plus(w1) * (1 + w2)
    worst40 = float(np.min(m40))
    worst41 = float(np.min(m41))
    res.append(CheckResult("5.36.ray_inequality_1", worst40 >= -1e-12, worst40,
                           "min (delta w1 - r1 w2)/w1"))
    res.append(CheckResult("5.36.ray_inequality_2", worst41 >= -1e-12, worst41,
                           "min h'(0)w1 + w2^2 - h+(w1)(1+w2)"))
    return res
