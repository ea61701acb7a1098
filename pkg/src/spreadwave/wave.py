"""Traveling-wave profiles from the integral operator T and monotone iteration.

For a wave ``u(x + c t)`` with profile ``u(xi)`` the operator is

    T_i[u](xi) = 1/(d_i (l1 + l2)) * ( int_{-inf}^{xi} exp(-l1 (xi - s)) H_i(u(s)) ds
                                      + int_{xi}^{inf} exp( l2 (xi - s)) H_i(u(s)) ds )

with ``H_i(u) = beta u_i + f_i(u)`` and ``l1, l2`` the positive decay rates
solving ``d l^2 -/+ c l - beta = 0``. On a grid the two integrals are computed
exactly for the piecewise-linear interpolant of ``H``, which turns each of
them into a first-order recurrence (see :mod:`spreadwave._kernels`).

Beyond ``[-L, L]`` the nodal values of ``H`` are extended geometrically on
the left (``H_0 exp(r (s + L))``; ``r = 0`` is the constant extension) and
by a constant on the right. The iteration drivers use ``r = Lambda_h``, the
grid-consistent decay rate from :func:`discrete_decay`, so that the
discrete exponential ``nu_h exp(Lambda_h xi)`` is an exact fixed point of the
discrete linear operator.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math
import warnings

import numpy as np
from scipy.optimize import linprog

from . import _kernels
from .errors import (
    ConfigurationError,
    InternalConsistencyError,
    InvalidInputError,
    ResolutionError,
)
from .models import box_samples, fd_jacobian
from .report import CheckResult
from .spectral import M_vector, phi, principal_eig
from .speed import choose_gamma, left_root, minimize_phi

H_MAX = 0.5  # grid rule: h * max(lambda2) <= H_MAX
H_LIMIT = 1.0  # hard resolution limit in apply_T
MONO_ULP = 64.0


class NegativeHWarning(RuntimeWarning):
    """``beta u + f(u)`` went negative: beta does not dominate the reaction there."""


# ---------------------------------------------------------------- constants


def decay_rates(d, c: float, beta: float):
    """Positive roots ``(lambda1, lambda2)`` of ``d l^2 + c l - beta`` and ``d l^2 - c l - beta``.

    Equivalently ``lambda1 = (-c + sqrt(c^2 + 4 beta d))/(2d)`` and
    ``lambda2 = (c + sqrt(c^2 + 4 beta d))/(2d)``; ``-lambda1`` and
    ``lambda2`` are the two roots of ``d l^2 - c l - beta``.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0) or not beta > 0:
        raise InvalidInputError("decay_rates needs d > 0 and beta > 0")
    s = np.sqrt(c * c + 4.0 * beta * d)
    # lambda1 = 2 beta / (c + s) avoids cancellation when c^2 >> beta d
    lam1 = 2.0 * beta / (c + s) if c >= 0 else (-c + s) / (2.0 * d)
    lam2 = (c + s) / (2.0 * d) if c >= 0 else 2.0 * beta / (s - c)
    return lam1, lam2


def jacobian_bound(model, n: int = 32) -> float:
    """Sampled ``max |d f_i / d u_j|`` over ``f``, ``f-`` and ``f+`` on ``[0, k+]``."""
    pts = box_samples(model.k_plus, n)
    bound = 0.0
    for fun in (model.f, model.f_minus, model.f_plus):
        bound = max(bound, float(np.max(np.abs(fd_jacobian(fun, pts)))))
    return bound


def choose_beta(model, c: float, Lambda_c: float | None = None, bound: float | None = None) -> float:
    """Start from twice the Jacobian bound and double until ``lambda1 > 2 Lambda_c`` and a gamma exists."""
    if Lambda_c is None:
        Lambda_c = left_root(model, c)
    if bound is None:
        bound = jacobian_bound(model)
    beta = 2.0 * max(bound, 1e-12)
    while beta <= 1e12:
        lam1, lam2 = decay_rates(model.d, c, beta)
        if np.all(lam2 > lam1) and np.all(lam1 > 2.0 * Lambda_c):
            try:
                choose_gamma(model, c, beta, Lambda_c)
                return beta
            except ConfigurationError:
                pass
        beta *= 2.0
    raise ConfigurationError(f"no beta <= 1e12 satisfies lambda1 > 2 Lambda_c at c={c:.6g}")


@dataclass(frozen=True)
class WaveParams:
    c: float
    beta: float
    lambda1: np.ndarray
    lambda2: np.ndarray
    Lambda_c: float
    gamma: float
    nu_Lambda_c: np.ndarray
    nu_gamma_Lambda_c: np.ndarray
    q: float | None = None
    c_star: float | None = None

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "nu_Lambda_c", "nu_gamma_Lambda_c"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def with_beta(self, beta: float, d) -> "WaveParams":
        """Same parameters with ``beta`` (and the decay rates) replaced; gamma is kept."""
        lam1, lam2 = decay_rates(d, self.c, beta)
        return replace(self, beta=float(beta), lambda1=lam1, lambda2=lam2)

    def with_q(self, q: float) -> "WaveParams":
        return replace(self, q=float(q))


def build_params(model, c: float, beta: float | None = None, c_star=None, lambda_star=None) -> WaveParams:
    """All constants of the wave construction at speed ``c``."""
    if c_star is None or lambda_star is None:
        c_star, lambda_star = minimize_phi(model)
    Lc = left_root(model, c, c_star, lambda_star)
    if beta is None:
        beta = choose_beta(model, c, Lc)
    gamma, sp_g = choose_gamma(model, c, beta, Lc)
    lam1, lam2 = decay_rates(model.d, c, beta)
    return WaveParams(
        c=float(c), beta=float(beta), lambda1=lam1, lambda2=lam2, Lambda_c=Lc, gamma=gamma,
        nu_Lambda_c=phi(model, Lc).nu, nu_gamma_Lambda_c=sp_g.nu, c_star=c_star,
    )


# ---------------------------------------------------------------- grid and operator


@dataclass(frozen=True)
class WaveGrid:
    xi: np.ndarray
    h: float
    L: float

    @property
    def M(self) -> int:
        return int(self.xi.size)


def make_grid(params: WaveParams, L: float | None = None, h: float | None = None, refine: int = 0) -> WaveGrid:
    """Uniform grid on ``[-L, L]``; defaults ``L = 40/Lambda_c`` and ``h <= 0.5/max lambda2``.

    ``refine`` halves the step that many times on a nested grid.
    """
    if L is None:
        L = 40.0 / params.Lambda_c
    h_rule = H_MAX / float(np.max(params.lambda2))
    h0 = h_rule if h is None else float(h)
    if h0 * float(np.max(params.lambda2)) > H_MAX * (1 + 1e-12):
        raise ResolutionError(
            f"h = {h0:.4g} too coarse: h * max(lambda2) = {h0 * np.max(params.lambda2):.4g} > {H_MAX}"
        )
    m0 = int(math.ceil(2.0 * L / h0)) + 1
    m = (m0 - 1) * 2**refine + 1
    xi = np.linspace(-L, L, m)
    return WaveGrid(xi=xi, h=float(xi[1] - xi[0]), L=float(L))


def kernel_weights(lam, h: float):
    """``(E, w_near, w_far)`` for one segment of ``int exp(-lam tau) H(tau) dtau`` with linear ``H``."""
    lam = np.asarray(lam, dtype=float)
    x = lam * h
    E = np.exp(-x)
    one_minus_E = -np.expm1(-x)
    far = (one_minus_E - x * E) / (lam * lam * h)
    near = one_minus_E / lam - far
    return E, near, far


def left_tail_factor(lam1, h: float, r: float = 0.0):
    """Sum of the left recurrence for a geometric tail ``H_0 exp(r (s - xi_0))``; ``1/lam1`` at ``r = 0``."""
    E, a, b = kernel_weights(lam1, h)
    g = math.exp(-r * h)
    return (a + b * g) / (1.0 - E * g)


def right_tail_factor(lam2, h: float, r: float = 0.0):
    """Right-sweep sum for an exponential ``exp(r s)``, used only for the grid-consistent decay rate."""
    E, a, b = kernel_weights(lam2, h)
    g = math.exp(r * h)
    return (a + b * g) / (1.0 - E * g)


class Operator:
    """Discrete ``T`` for one model, parameter set, grid and reaction."""

    def __init__(self, model, params: WaveParams, grid: WaveGrid, reaction: str = "f", left_decay: float = 0.0):
        lam2max = float(np.max(params.lambda2))
        if grid.h * lam2max > H_LIMIT:
            raise ResolutionError(f"grid too coarse: h * max(lambda2) = {grid.h * lam2max:.4g} > {H_LIMIT}")
        self.model = model
        self.params = params
        self.grid = grid
        self.reaction_name = reaction
        self.fun = model.reaction(reaction)
        self.left_decay = float(left_decay)
        h = grid.h
        self.E1, self.a1, self.b1 = kernel_weights(params.lambda1, h)
        self.E2, self.a2, self.b2 = kernel_weights(params.lambda2, h)
        self.SL = left_tail_factor(params.lambda1, h, self.left_decay)
        self.pref = 1.0 / (model.d * (params.lambda1 + params.lambda2))

    def H(self, u: np.ndarray) -> np.ndarray:
        return self.params.beta * u + self.fun(u)

    def integrate(self, Hv: np.ndarray) -> np.ndarray:
        """Apply the kernel (including prefactor and tails) to nodal values ``Hv``."""
        IL = _kernels.exp_sweep(Hv, self.E1, self.a1, self.b1, Hv[:, 0] * self.SL)
        Hr = Hv[:, ::-1]
        IR = _kernels.exp_sweep(Hr, self.E2, self.a2, self.b2, Hr[:, 0] / self.params.lambda2)[:, ::-1]
        return (IL + IR) * self.pref[:, None]

    def __call__(self, u: np.ndarray) -> np.ndarray:
        Hv = self.H(u)
        if np.min(Hv) < -1e-12 * self.params.beta * max(1.0, float(np.max(np.abs(u)))):
            warnings.warn("beta*u + f(u) < 0 somewhere; beta is too small", NegativeHWarning, stacklevel=2)
        return self.integrate(Hv)

    def quadrature_bound(self, u: np.ndarray) -> np.ndarray:
        """Local bound on the error against the exact integral of ``H(u)``.

        The linear interpolant misses ``H`` by at most ``h^2/8 max|H''|`` per
        segment; ``|second difference|/8`` taken over neighbouring nodes
        stands in for it, and the kernel spreads that bound to each node.
        """
        Hv = self.H(u)
        d2 = np.zeros_like(Hv)
        d2[:, 1:-1] = np.abs(Hv[:, 2:] - 2.0 * Hv[:, 1:-1] + Hv[:, :-2])
        loc = d2.copy()
        loc[:, 1:] = np.maximum(loc[:, 1:], d2[:, :-1])
        loc[:, :-1] = np.maximum(loc[:, :-1], d2[:, 1:])
        return self.integrate(loc / 8.0)


def apply_T(u, params: WaveParams, model, reaction: str = "f", grid: WaveGrid | None = None,
            xi=None, left_decay: float = 0.0) -> np.ndarray:
    """``T[u]`` on a uniform grid (given as ``grid`` or as node array ``xi``)."""
    if grid is None:
        if xi is None:
            raise InvalidInputError("apply_T needs a grid or xi")
        xi = np.asarray(xi, dtype=float)
        grid = WaveGrid(xi=xi, h=float(xi[1] - xi[0]), L=float(xi[-1]))
    u = np.atleast_2d(np.asarray(u, dtype=float))
    return Operator(model, params, grid, reaction, left_decay)(u)


def discrete_decay(params: WaveParams, model, h: float):
    """Grid-consistent ``(Lambda_h, nu_h)``: ``nu_h exp(Lambda_h xi)`` is fixed by the discrete linear ``T``.

    Solves ``rho(diag(g(r)) (beta I + J0)) = 1`` where ``g_i(r)`` is the
    kernel sum of ``exp(r s)`` on an unbounded grid of step ``h``. As
    ``h -> 0`` this tends to ``(Lambda_c, nu_Lambda_c)``.
    """
    B = params.beta * np.eye(model.N) + model.J0

    def G(r):
        g = (left_tail_factor(params.lambda1, h, r) + right_tail_factor(params.lambda2, h, r)) / (
            model.d * (params.lambda1 + params.lambda2)
        )
        return g[:, None] * B

    def rho(r):
        return principal_eig(G(r))[0] - 1.0

    lo, hi = 0.5 * params.Lambda_c, params.gamma * params.Lambda_c
    if not (rho(lo) > 0 > rho(hi)):
        raise InternalConsistencyError("discrete decay rate is not bracketed; refine the grid")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if rho(mid) > 0:
            lo = mid
        else:
            hi = mid
    Lh = 0.5 * (lo + hi)
    return Lh, principal_eig(G(Lh))[1]


# ---------------------------------------------------------------- upper / lower solutions


def upper_solution(params: WaveParams, model, xi, k=None, Lambda=None, nu=None) -> np.ndarray:
    """``min(k_i, nu_i exp(Lambda xi))`` (defaults: ``k`` of ``f``, ``Lambda_c``, ``nu_Lambda_c``)."""
    k = model.k if k is None else np.asarray(k, dtype=float)
    Lambda = params.Lambda_c if Lambda is None else Lambda
    nu = params.nu_Lambda_c if nu is None else np.asarray(nu, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return np.minimum(k[:, None], nu[:, None] * np.exp(Lambda * xi)[None, :])


def upper_kink(params: WaveParams, model, k=None) -> np.ndarray:
    k = model.k if k is None else np.asarray(k, dtype=float)
    return np.log(k / params.nu_Lambda_c) / params.Lambda_c


def lower_solution(params: WaveParams, model, xi, q: float | None = None,
                   Lambda: float | None = None, nu=None, nu_gamma=None) -> np.ndarray:
    """``max(0, nu exp(Lambda xi) - q nu_g exp(gamma Lambda xi))`` (defaults: ``Lambda_c`` and its vectors)."""
    q = params.q if q is None else q
    if q is None:
        raise InvalidInputError("lower_solution needs q")
    xi = np.asarray(xi, dtype=float)
    L1 = params.Lambda_c if Lambda is None else Lambda
    nu = params.nu_Lambda_c if nu is None else np.asarray(nu, dtype=float)
    nu_g = params.nu_gamma_Lambda_c if nu_gamma is None else np.asarray(nu_gamma, dtype=float)
    a = nu[:, None] * np.exp(L1 * xi)[None, :]
    b = q * nu_g[:, None] * np.exp(params.gamma * L1 * xi)[None, :]
    return np.maximum(0.0, a - b)


def lower_support_end(params: WaveParams, q: float) -> np.ndarray:
    """``xi_i*`` beyond which the lower solution vanishes."""
    ratio = q * params.nu_gamma_Lambda_c / params.nu_Lambda_c
    return np.log(ratio) / ((1.0 - params.gamma) * params.Lambda_c)


def _default_upper_reaction(model) -> str:
    return "f" if model.cooperative else "f+"


def _default_lower_reaction(model) -> str:
    return "f" if model.cooperative else "f-"


@dataclass(frozen=True)
class SolutionCheck:
    """``max_violation`` is the raw worst excess; ``margin`` is measured against the local tolerance."""

    passed: bool
    max_violation: float
    margin: float
    q: float | None = None

    def result(self, name: str) -> CheckResult:
        detail = f"raw max excess {self.max_violation:.3e}"
        if self.q is not None:
            detail = f"q={self.q:.6g}, " + detail
        return CheckResult(name, self.passed, self.margin, detail)


def verify_upper(params: WaveParams, model, reaction: str | None = None, grid: WaveGrid | None = None) -> SolutionCheck:
    """``T[phi+] <= phi+ + tol`` on the grid, ``k`` taken from the chosen reaction's equilibrium."""
    reaction = _default_upper_reaction(model) if reaction is None else reaction
    grid = make_grid(params) if grid is None else grid
    k = model.equilibrium(reaction)
    up = upper_solution(params, model, grid.xi, k=k)
    op = Operator(model, params, grid, reaction, left_decay=params.Lambda_c)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NegativeHWarning)
        Tu = op(up)
    tol = 1e-8 + op.quadrature_bound(up)
    viol = float(np.max(Tu - up - tol))
    return SolutionCheck(passed=viol <= 0.0, max_violation=float(np.max(Tu - up)), margin=-viol)


def find_q_and_verify_lower(params: WaveParams, model, reaction: str | None = None,
                            grid: WaveGrid | None = None, q0: float = 2.0, q_max: float = 2.0**40,
                            discrete: bool = False) -> SolutionCheck:
    """Smallest ``q = 2^n`` with ``T[phi-] >= phi- - tol`` and ``phi- < phi+`` on the grid.

    With ``discrete=True`` both profiles are built on the grid-consistent
    decay ``(Lambda_h, nu_h)`` instead of ``(Lambda_c, nu_Lambda_c)``.
    On exhaustion the best ``q`` (smallest violation) is returned with
    ``passed=False``.
    """
    reaction = _default_lower_reaction(model) if reaction is None else reaction
    grid = make_grid(params) if grid is None else grid
    k = model.equilibrium(reaction)
    shape = _lower_shape(params, model, grid, discrete)
    up = upper_solution(params, model, grid.xi, k=k, Lambda=shape["Lambda"], nu=shape["nu"])
    op = Operator(model, params, grid, reaction, left_decay=shape["Lambda"])
    q = q0
    best = (np.inf, q0)
    while q <= q_max:
        lo = lower_solution(params, model, grid.xi, q, **shape)
        Tl = op(lo)
        tol = 1e-8 + op.quadrature_bound(lo)
        viol = float(np.max(lo - Tl - tol))
        ordered = bool(np.all(lo < up))
        if viol <= 0.0 and ordered:
            return SolutionCheck(True, float(np.max(lo - Tl)), margin=-viol, q=q)
        score = viol if ordered else max(viol, float(np.max(lo - up)))
        if score < best[0]:
            best = (score, q)
        q *= 2.0
    return SolutionCheck(False, best[0], margin=-best[0], q=best[1])


def _lower_shape(params, model, grid, discrete):
    if not discrete:
        return {"Lambda": params.Lambda_c, "nu": params.nu_Lambda_c, "nu_gamma": params.nu_gamma_Lambda_c}
    Lh, nu_h = discrete_decay(params, model, grid.h)
    return {"Lambda": Lh, "nu": nu_h, "nu_gamma": phi(model, params.gamma * Lh).nu}


# ---------------------------------------------------------------- iterations


@dataclass(frozen=True)
class WaveProfile:
    xi: np.ndarray
    values: np.ndarray
    c: float
    residual: float
    converged: bool
    iterations: int
    reaction: str
    params: WaveParams
    grid: WaveGrid
    Lambda_h: float
    nu_h: np.ndarray
    max_increase: float = 0.0
    max_sandwich_violation: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def N(self) -> int:
        return int(self.values.shape[0])

    def plateau(self) -> np.ndarray:
        return self.values[:, -1].copy()


def _seed(model, params, grid, k, Lh, nu_h):
    return upper_solution(params, model, grid.xi, k=k, Lambda=Lh, nu=nu_h)


def cooperative_wave(model, c: float, reaction: str = "f", params: WaveParams | None = None,
                     grid: WaveGrid | None = None, refine: int = 0, L: float | None = None,
                     tol: float = 1e-8, max_iter: int = 10_000, check_lower: bool = True) -> WaveProfile:
    """Monotone iteration ``u^{n+1} = T[u^n]`` from the upper solution.

    Each iterate must not exceed its predecessor (up to ``64 ulp * max k``)
    and must stay above the lower solution; either failure raises
    :class:`InternalConsistencyError`. Non-convergence returns the last
    iterate with ``converged=False``.
    """
    params = build_params(model, c) if params is None else params
    grid = make_grid(params, L=L, refine=refine) if grid is None else grid
    k = model.equilibrium(reaction)
    Lh, nu_h = discrete_decay(params, model, grid.h)
    op = Operator(model, params, grid, reaction, left_decay=Lh)
    u = _seed(model, params, grid, k, Lh, nu_h)

    lower = lower_tol = None
    q = None
    if check_lower:
        lc = find_q_and_verify_lower(params, model, reaction, grid, discrete=True)
        if lc.passed:
            q = lc.q
            lower = lower_solution(params, model, grid.xi, q, **_lower_shape(params, model, grid, True))
            lower_tol = 1e-8 + op.quadrature_bound(lower)

    mono_tol = MONO_ULP * np.finfo(float).eps * float(np.max(k))
    max_inc = -np.inf
    step = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        un = op(u)
        inc = float(np.max(un - u))
        max_inc = max(max_inc, inc)
        if inc > mono_tol:
            raise InternalConsistencyError(
                f"iterate {it} increased by {inc:.3e} (> {mono_tol:.1e}); T is not monotone here"
            )
        if lower is not None and np.any(un < lower - lower_tol):
            gap = float(np.max(lower - lower_tol - un))
            raise InternalConsistencyError(f"iterate {it} dropped below the lower solution by {gap:.3e}")
        step = float(np.max(np.abs(un - u)))
        u = un
        if step < tol:
            break
    residual = float(np.max(np.abs(op(u) - u)))
    return WaveProfile(
        xi=grid.xi, values=u, c=float(c), residual=residual, converged=step < tol,
        iterations=it, reaction=reaction, params=params.with_q(q) if q else params, grid=grid,
        Lambda_h=Lh, nu_h=nu_h, max_increase=max_inc,
        info={"k": k.copy(), "step": step},
    )


def sandwich_wave(model, c: float, params: WaveParams | None = None, refine: int = 0,
                  L: float | None = None, omega: float = 0.5, tol: float = 1e-6,
                  max_iter: int = 20_000, lower: WaveProfile | None = None) -> WaveProfile:
    """Damped, projected Picard iteration for the non-cooperative ``f``.

    ``u <- clip((1 - omega) u + omega T[u], u-, phi~+)`` started from
    ``phi~+ = min(k+, nu_h exp(Lambda_h xi))``, with ``u-`` the ``f-`` wave.
    Convergence is judged by the residual ``|T[u] - u|``, never assumed.
    """
    params = build_params(model, c) if params is None else params
    if lower is None:
        lower = cooperative_wave(model, c, "f-", params=params, refine=refine, L=L)
    grid = lower.grid
    Lh, nu_h = lower.Lambda_h, lower.nu_h
    u_lo = lower.values
    u_hi = _seed(model, params, grid, model.k_plus, Lh, nu_h)
    op = Operator(model, params, grid, "f", left_decay=Lh)

    u = u_hi.copy()
    worst_out = 0.0
    clipped_last = 0
    res = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        Tu = op(u)
        res = float(np.max(np.abs(Tu - u)))
        if res < tol:
            break
        v = (1.0 - omega) * u + omega * Tu
        clipped_last = int(np.count_nonzero((v < u_lo) | (v > u_hi)))
        u = np.clip(v, u_lo, u_hi)
        worst_out = max(worst_out, float(np.max(u_lo - u)), float(np.max(u - u_hi)))
    return WaveProfile(
        xi=grid.xi, values=u, c=float(c), residual=res, converged=res < tol,
        iterations=it, reaction="f", params=params, grid=grid, Lambda_h=Lh, nu_h=nu_h,
        max_sandwich_violation=worst_out,
        info={"lower": u_lo, "upper": u_hi, "clipped_last": clipped_last,
              "lower_residual": lower.residual},
    )


# ---------------------------------------------------------------- appendix oracles


def identity_6_45(params: WaveParams, model, beta_offset: float = 0.0) -> float:
    """``max_i |M_i(Lc)/(d_i(l1+l2)) (1/(l1+Lc) + 1/(l2-Lc)) - nu_i|``.

    ``beta_offset`` perturbs beta inside ``M`` only (a sensitivity probe).
    """
    Lc = params.Lambda_c
    M = M_vector(model, Lc, params.beta + beta_offset)
    l1, l2 = params.lambda1, params.lambda2
    lhs = M / (model.d * (l1 + l2)) * (1.0 / (l1 + Lc) + 1.0 / (l2 - Lc))
    return float(np.max(np.abs(lhs - params.nu_Lambda_c)))


def inequality_6_47_terms(params: WaveParams, model) -> np.ndarray:
    """Per-component value of the four-term expression."""
    Lc, g = params.Lambda_c, params.gamma
    l1, l2 = params.lambda1, params.lambda2
    sp1, spg = phi(model, Lc), phi(model, g * Lc)
    M1 = M_vector(model, Lc, params.beta, sp1)
    Mg = M_vector(model, g * Lc, params.beta, spg)
    return (M1 / ((l1 + Lc) * sp1.nu) + M1 / ((l2 - Lc) * sp1.nu)
            - Mg / ((l1 + g * Lc) * spg.nu) - Mg / ((l2 - g * Lc) * spg.nu))


def inequality_6_47(params: WaveParams, model) -> float:
    return float(np.min(inequality_6_47_terms(params, model)))


def inequality_6_47_closed(params: WaveParams, model) -> np.ndarray:
    """Same expression reduced to ``sqrt(c^2 + 4 beta d)(1 - M(gL)/((beta + c gL - d gL^2) nu_g))``."""
    gL = params.gamma * params.Lambda_c
    spg = phi(model, gL)
    Mg = M_vector(model, gL, params.beta, spg)
    c, b, d = params.c, params.beta, model.d
    return np.sqrt(c * c + 4 * b * d) * (1.0 - Mg / ((b + c * gL - d * gL**2) * spg.nu))


def quadratic_lower_bound_coeffs(model, n: int = 24, slack: float = 1.1, floor: float = 1e-9) -> np.ndarray:
    """Nonnegative ``b_ij`` with ``f_i(u) >= (J0 u)_i - sum_j b_ij u_j^2`` on sampled ``[0, k]``.

    Each row is the linear program ``min sum_j b_ij`` subject to the sampled
    bound; the result is lifted to at least ``floor`` and scaled by ``slack``.
    """
    pts = box_samples(model.k, n)
    fv = model.f(pts)
    lin = model.J0 @ pts
    sq = pts**2
    N = model.N
    b = np.zeros((N, N))
    for i in range(N):
        gap = lin[i] - fv[i]
        res = linprog(np.ones(N), A_ub=-sq.T, b_ub=-gap, bounds=[(0, None)] * N, method="highs")
        if not res.success:
            raise ConfigurationError(f"quadratic bound fit failed for component {i + 1}: {res.message}")
        b[i] = res.x
    return slack * np.maximum(b, floor)


def verify_quadratic_bound(model, b, n_points: int = 10_000, seed: int = 0) -> float:
    """Minimum of ``f_i(u) - (J0 u)_i + sum_j b_ij u_j^2`` over uniform random ``u`` in ``[0, k]``."""
    rng = np.random.default_rng(seed)
    pts = rng.random((model.N, n_points)) * model.k[:, None]
    margin = model.f(pts) - model.J0 @ pts + np.asarray(b) @ (pts**2)
    return float(np.min(margin))


# ---------------------------------------------------------------- diagnostics


def ode_residual(profile: WaveProfile, model) -> float:
    """Sup norm of ``D u'' - c u' + f(u)`` with centred differences at interior nodes."""
    u, h = profile.values, profile.h
    fun = model.reaction(profile.reaction)
    upp = (u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) / (h * h)
    up = (u[:, 2:] - u[:, :-2]) / (2.0 * h)
    r = model.d[:, None] * upp - profile.c * up + fun(u)[:, 1:-1]
    return float(np.max(np.abs(r)))


def tail_slope(profile: WaveProfile, component: int = 0) -> float:
    """Least-squares slope of ``log u_i`` over the left quarter ``[-L, -L/2]`` of the grid."""
    xi = profile.xi
    sel = xi <= xi[0] / 2.0
    y = profile.values[component, sel]
    if np.any(y <= 0):
        raise InvalidInputError("profile is not positive on the left quarter")
    return float(np.polyfit(xi[sel], np.log(y), 1)[0])


def tail_ratio_error(profile: WaveProfile) -> float:
    """``max_i |u_i exp(-Lambda_h xi) / nu_h,i - 1|`` over ``[-L, -L/2]``."""
    xi = profile.xi
    sel = xi <= xi[0] / 2.0
    r = profile.values[:, sel] * np.exp(-profile.Lambda_h * xi[sel])[None, :] / profile.nu_h[:, None]
    return float(np.max(np.abs(r - 1.0)))


def is_nondecreasing(values: np.ndarray, tol: float = 0.0) -> bool:
    return bool(np.all(np.diff(values, axis=1) >= -tol))


def write_profile_csv(path, xi, values, label: str = "xi") -> None:
    """CSV with header ``label,u1,...,uN`` and 17 significant digits."""
    values = np.atleast_2d(values)
    header = ",".join([label] + [f"u{i + 1}" for i in range(values.shape[0])])
    data = np.column_stack([np.asarray(xi, dtype=float), values.T])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def read_profile_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:].T
