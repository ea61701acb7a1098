"""Minimal speed c*, the left root Lambda_c of Phi = c, gamma selection and (H3) sampling."""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ConfigurationError, HypothesisViolation, InvalidInputError, OutOfRangeError
from .report import CheckResult
from .spectral import M_vector, SpectralPoint, phi, psi_prime

INV_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_log(fun, a: float, b: float, rtol: float = 1e-10, max_iter: int = 500):
    """Golden-section minimisation of ``fun(exp(t))`` for ``t`` in ``[log a, log b]``."""
    lo, hi = math.log(a), math.log(b)
    x1 = hi - INV_GOLD * (hi - lo)
    x2 = lo + INV_GOLD * (hi - lo)
    f1, f2 = fun(math.exp(x1)), fun(math.exp(x2))
    for _ in range(max_iter):
        if hi - lo <= rtol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_GOLD * (hi - lo)
            f1 = fun(math.exp(x1))
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_GOLD * (hi - lo)
            f2 = fun(math.exp(x2))
    return math.exp(lo), math.exp(hi), math.exp(0.5 * (lo + hi))


def _stationarity(model, lam: float) -> float:
    """``lam Psi'(lam) - Psi(lam)``, the numerator of ``Phi'``; it vanishes at the minimiser."""
    return lam * psi_prime(model, lam) - phi(model, lam).psi


def minimize_phi(model, lo: float = 1e-4, hi: float = 1e4):
    """Return ``(c_star, lambda_star)``.

    A coarse log-grid scan locates the minimum (the bracket is widened by
    factors of 100 while the minimum sits on an end), golden section narrows
    it, and bisection on the stationarity condition ``lam Psi' = Psi`` pins
    ``lambda_star`` below the ``sqrt(eps)`` floor of a pure value search.
    """
    f = lambda lam: phi(model, lam).phi  # noqa: E731
    while True:
        grid = np.geomspace(lo, hi, 81)
        vals = np.array([f(x) for x in grid])
        i = int(np.argmin(vals))
        if 0 < i < grid.size - 1:
            break
        if i == 0:
            lo /= 100.0
        else:
            hi *= 100.0
        if lo < 1e-12 or hi > 1e12:
            raise HypothesisViolation(
                "Phi has no interior minimum in [1e-12, 1e12]; the bracket could not be closed"
            )
    a, b = float(grid[i - 1]), float(grid[i + 1])
    ga, gb, lam = _golden_log(f, a, b)

    try:
        sa, sb = _stationarity(model, a), _stationarity(model, b)
    except Exception:  # left eigenvector trouble; keep the golden-section answer
        sa = sb = 0.0
    if sa < 0 < sb:
        for _ in range(200):
            mid = 0.5 * (a + b)
            if b - a <= 4e-16 * mid:
                break
            if _stationarity(model, mid) < 0:
                a = mid
            else:
                b = mid
        cand = 0.5 * (a + b)
        # the polished point must not be worse than the value search
        if f(cand) <= f(lam) * (1 + 1e-14):
            lam = cand
    return f(lam), lam


def left_root(model, c: float, c_star: float | None = None, lambda_star: float | None = None) -> float:
    """Smaller positive root ``Lambda_c`` of ``Phi(lam) = c``; requires ``c > c_star``."""
    if c_star is None or lambda_star is None:
        c_star, lambda_star = minimize_phi(model)
    c = float(c)
    if not c > c_star * (1.0 + 1e-12):
        raise OutOfRangeError(
            f"c = {c:.10g} is not above the minimal speed c* = {c_star:.10g}; "
            "no traveling wave exists below c*",
            c_star=c_star,
        )
    f = lambda lam: phi(model, lam).phi  # noqa: E731
    lo = 0.5 * lambda_star
    for _ in range(2000):
        if f(lo) > c:
            break
        lo *= 0.5
    else:  # pragma: no cover - Phi -> inf as lam -> 0 under (H2)
        raise HypothesisViolation("Phi does not exceed c near lambda = 0")
    hi = lambda_star
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:  # the bracket is down to adjacent floats
            break
        if f(mid) > c:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    err = abs(f(root) - c)
    if err >= 1e-10 * c:
        raise HypothesisViolation(f"left root residual {err:.3e} exceeds 1e-10*c")
    return root


def gamma_candidates():
    return [round(1.99 - 0.01 * k, 2) for k in range(99)]


def choose_gamma(model, c: float, beta: float, Lambda_c: float | None = None):
    """Largest ``gamma`` on the 0.01 grid in ``(1, 2)`` with ``Phi(gamma Lambda_c) < c`` and ``M(gamma Lambda_c) > 0``.

    Returns ``(gamma, SpectralPoint at gamma*Lambda_c)``.
    """
    if Lambda_c is None:
        Lambda_c = left_root(model, c)
    for g in gamma_candidates():
        sp = phi(model, g * Lambda_c)
        if sp.phi < c and np.all(M_vector(model, g * Lambda_c, beta, sp) > 0):
            return g, sp
    raise ConfigurationError(
        f"no gamma in (1, 2) satisfies the lower-solution conditions at c={c:.6g}, "
        f"beta={beta:.6g}; increase beta"
    )


def check_H3(model, alpha_samples=None, lambda_samples=None, tol: float = 1e-12) -> list[CheckResult]:
    """Sample ``f(+-)(v) <= a J0 nu_lam`` with ``v = min(k(+-), a nu_lam)``."""
    if alpha_samples is None:
        alpha_samples = np.geomspace(1e-3, 10.0, 40)
    if lambda_samples is None:
        lambda_samples = np.geomspace(0.05, 10.0, 40)
    alphas = np.asarray(alpha_samples, dtype=float)
    lams = np.asarray(lambda_samples, dtype=float)
    if np.any(alphas <= 0) or np.any(lams <= 0):
        raise InvalidInputError("alpha and lambda samples must be positive")
    out = []
    for label, fun, kk in (("f-", model.f_minus, model.k_minus), ("f+", model.f_plus, model.k_plus)):
        worst = -np.inf
        witness = None
        for lam in lams:
            nu = phi(model, lam).nu
            v = np.minimum(kk[:, None], alphas[None, :] * nu[:, None])
            lhs = fun(v)
            rhs = alphas[None, :] * (model.J0 @ nu)[:, None]
            viol = lhs - rhs
            idx = np.unravel_index(int(np.argmax(viol)), viol.shape)
            if viol[idx] > worst:
                worst = float(viol[idx])
                witness = (float(alphas[idx[1]]), float(lam), int(idx[0]) + 1)
        a, lam, comp = witness
        out.append(CheckResult(
            f"H3.{label}", worst <= tol, tol - worst,
            f"max violation at alpha={a:.4g} lambda={lam:.4g} component {comp}",
        ))
    return out


def h3_witness_component(results: list[CheckResult]) -> list[int]:
    """Component indices named by failing H3 entries (1-based)."""
    comps = []
    for r in results:
        if not r.passed:
            comps.append(int(r.detail.rsplit(" ", 1)[-1]))
    return comps


@dataclass(frozen=True)
class SpeedBlock:
    c: float
    Lambda_c: float
    gamma: float
    nu_Lambda_c: np.ndarray
    nu_gamma_Lambda_c: np.ndarray
    beta: float
    lambda1: np.ndarray
    lambda2: np.ndarray
    q: float | None = None


@dataclass(frozen=True)
class SpeedReport:
    c_star: float
    lambda_star: float
    blocks: tuple = field(default_factory=tuple)

    def block(self, c: float) -> SpeedBlock:
        for b in self.blocks:
            if b.c == c:
                return b
        raise KeyError(c)


def speed_report(model, cs=(), with_q: bool = True) -> SpeedReport:
    """``c*``, ``lambda*`` and, for each requested ``c``, the full set of wave constants."""
    from .wave import build_params, find_q_and_verify_lower  # wave depends on this module

    c_star, lam_star = minimize_phi(model)
    blocks = []
    for c in cs:
        params = build_params(model, c, c_star=c_star, lambda_star=lam_star)
        q = None
        if with_q:
            q = find_q_and_verify_lower(params, model).q
        blocks.append(SpeedBlock(
            c=float(c), Lambda_c=params.Lambda_c, gamma=params.gamma,
            nu_Lambda_c=params.nu_Lambda_c, nu_gamma_Lambda_c=params.nu_gamma_Lambda_c,
            beta=params.beta, lambda1=params.lambda1, lambda2=params.lambda2, q=q,
        ))
    return SpeedReport(c_star=c_star, lambda_star=lam_star, blocks=tuple(blocks))
