"""Principal eigenpair of the linearisation and the speed functional Phi.

For a quasi-positive ``A`` (nonnegative off-diagonal) the principal
eigenvalue is ``Psi(A) = rho(A + alpha*I) - alpha`` for any shift that makes
``A + alpha*I`` entrywise nonnegative. We use power iteration on the
shifted matrix followed by a few steps of inverse iteration just above the
Perron root, which keeps every solve an M-matrix solve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import HypothesisViolation, InvalidInputError, SpectralGapError
from .report import CheckResult

TOL_POS = 1e-10
MAX_ITER = 10_000
RTOL = 1e-14


@dataclass(frozen=True)
class SpectralPoint:
    """``(lam, Psi(A_lam), nu_lam, Phi(lam))`` with ``nu`` max-normalised."""

    lam: float
    psi: float
    nu: np.ndarray
    phi: float

    def __post_init__(self):
        nu = np.array(self.nu, dtype=float)
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)


def _check_quasi_positive(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise InvalidInputError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    off = A - np.diag(np.diag(A))
    if np.any(off < 0):
        raise InvalidInputError("matrix is not quasi-positive (negative off-diagonal entry)")
    return A


def build_A_lambda(D, J0, lam: float) -> np.ndarray:
    """``diag(d_i lam^2) + J0``."""
    D = np.asarray(D, dtype=float)
    if not lam > 0:
        raise InvalidInputError(f"lambda must be positive, got {lam!r}")
    if D.ndim != 1 or np.any(D <= 0):
        raise InvalidInputError("diffusion coefficients must be positive")
    J0 = _check_quasi_positive(J0)
    if J0.shape[0] != D.shape[0]:
        raise InvalidInputError("D and J0 dimensions differ")
    return J0 + np.diag(D * lam * lam)


def default_shift(A: np.ndarray) -> float:
    """Smallest shift of the form ``1 + max(0, -min A_ii)``; nonnegativity only needs the diagonal lifted."""
    return 1.0 + max(0.0, -float(np.min(np.diag(A))))


def _perron(A: np.ndarray, shift: float | None = None, polish: int = 10):
    """Raw eigenpair estimate without the positivity check. Returns ``(psi, v, residual)``."""
    n = A.shape[0]
    if n == 1:
        return float(A[0, 0]), np.ones(1), 0.0
    alpha = default_shift(A) if shift is None else float(shift)
    B = A + alpha * np.eye(n)
    if np.any(B < 0):
        raise InvalidInputError("shift too small: A + alpha*I has a negative entry")
    v, lam, _ = _kernels.power_iterate(B, np.ones(n), MAX_ITER, RTOL)
    v = np.asarray(v, dtype=float)
    psi = lam - alpha

    pos = v > 1e-300
    if polish and np.all(pos):
        # Collatz-Wielandt: max (Bv)_i / v_i bounds rho(B) from above.
        cw = float(np.max((B @ v) / v)) - alpha
        sigma = cw + 1e-8 * (1.0 + abs(cw))
        M = sigma * np.eye(n) - A
        for _ in range(polish):
            try:
                x = np.linalg.solve(M, v)
            except np.linalg.LinAlgError:
                break
            m = float(np.max(np.abs(x)))
            if not np.isfinite(m) or m == 0.0:
                break
            x = x / m
            change = float(np.max(np.abs(x - v)))
            v = x
            if change <= 4 * np.finfo(float).eps:
                break
    v = v / float(np.max(np.abs(v)))
    j = int(np.argmax(v))
    psi = float((A @ v)[j])
    resid = float(np.max(np.abs(A @ v - psi * v)))
    return psi, v, resid


def principal_eig(A, shift: float | None = None):
    """Principal eigenvalue ``psi`` and strictly positive eigenvector ``nu`` (max component 1).

    Raises :class:`SpectralGapError` when the iteration does not settle to
    ``|A nu - psi nu| <= 1e-12 (1 + |psi|)`` or the limit vector has a
    component below ``1e-10``; the last iterate is attached.
    """
    A = _check_quasi_positive(A)
    psi, v, resid = _perron(A, shift)
    if resid > 1e-12 * (1.0 + abs(psi)):
        raise SpectralGapError(
            f"power iteration did not converge (residual {resid:.3e})", iterate=v, psi=psi
        )
    if float(np.min(v)) <= TOL_POS:
        raise SpectralGapError(
            f"principal eigenvector is not strictly positive (min component {np.min(v):.3e})",
            iterate=v,
            psi=psi,
        )
    return psi, v


def phi(model, lam: float) -> SpectralPoint:
    """Speed functional ``Phi(lam) = Psi(A_lam)/lam`` with the eigen data behind it."""
    A = build_A_lambda(model.d, model.J0, lam)
    psi, nu = principal_eig(A)
    if not psi > 0:
        raise HypothesisViolation(f"principal eigenvalue {psi:.6g} <= 0 at lambda={lam:.6g}")
    return SpectralPoint(lam=float(lam), psi=psi, nu=nu, phi=psi / lam)


def phi_value(model, lam: float) -> float:
    return phi(model, lam).phi


def psi_prime(model, lam: float) -> float:
    """``dPsi/dlam = w^T diag(2 d lam) v / (w^T v)`` from left and right Perron vectors."""
    A = build_A_lambda(model.d, model.J0, lam)
    _, v = principal_eig(A)
    if model.N == 1:
        return 2.0 * model.d[0] * lam
    _, w, _ = _perron(A.T)
    w = np.maximum(w, 0.0)
    return float(w @ (2.0 * model.d * lam * v) / (w @ v))


def M_vector(model, lam: float, beta: float, point: SpectralPoint | None = None) -> np.ndarray:
    """``M_i(lam) = (beta - d_i lam^2 + Phi(lam) lam) nu_i``."""
    sp = phi(model, lam) if point is None else point
    return (beta - model.d * lam**2 + sp.phi * lam) * sp.nu


def M_vector_literal(model, lam: float, beta: float, point: SpectralPoint | None = None) -> np.ndarray:
    """Same quantity as :func:`M_vector`, as ``beta nu - lam^2 D nu + A_lam nu``."""
    sp = phi(model, lam) if point is None else point
    A = build_A_lambda(model.d, model.J0, lam)
    return beta * sp.nu - lam**2 * model.d * sp.nu + A @ sp.nu


def dominance_gap(A) -> float:
    """Principal eigenvalue minus the largest real part among the remaining eigenvalues."""
    ev = np.linalg.eigvals(np.asarray(A, dtype=float))
    if ev.size == 1:
        return np.inf
    re = np.sort(ev.real)[::-1]
    return float(re[0] - re[1])


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    c = float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
    return float(np.arccos(min(1.0, max(-1.0, c))))


def _nu_or_none(model, lam):
    try:
        return principal_eig(build_A_lambda(model.d, model.J0, lam))[1]
    except SpectralGapError:
        return None


def _max_refined_angle(model, a, b, va, vb, max_angle, depth=0):
    """Angle between eigenvectors at ``a`` and ``b``, bisecting the interval while it exceeds ``max_angle``."""
    ang = _angle(va, vb)
    if ang < max_angle or depth >= 20:
        return ang
    m = 0.5 * (a + b)
    vm = _nu_or_none(model, m)
    if vm is None:
        return np.inf
    return max(
        _max_refined_angle(model, a, m, va, vm, max_angle, depth + 1),
        _max_refined_angle(model, m, b, vm, vb, max_angle, depth + 1),
    )


def check_H2(model, lambda_grid=None, max_angle: float = 1e-2) -> list[CheckResult]:
    """Positive eigenvector, strict dominance and continuity of ``nu_lam`` along a grid.

    Continuity is judged on adjacent grid points; an interval whose angle
    exceeds ``max_angle`` is bisected (up to 20 levels) so that a smooth but
    fast-turning eigenvector is not mistaken for a jump.
    """
    if lambda_grid is None:
        lambda_grid = np.arange(1, 100) * 0.1
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise InvalidInputError("lambda grid must be non-empty and positive")

    min_pos = np.inf
    min_gap = np.inf
    worst_pos_lam = worst_gap_lam = float(grid[0])
    nus = []
    for lam in grid:
        A = build_A_lambda(model.d, model.J0, lam)
        psi, v, resid = _perron(A)
        mn = float(np.min(v)) if resid <= 1e-12 * (1 + abs(psi)) else -np.inf
        if mn < min_pos:
            min_pos, worst_pos_lam = mn, float(lam)
        gap = dominance_gap(A) if model.N <= 4 else np.inf
        if mn <= TOL_POS:
            # the dominant eigenvalue has no positive eigenvector
            gap = -abs(gap) if np.isfinite(gap) else -1.0
        if gap < min_gap:
            min_gap, worst_gap_lam = gap, float(lam)
        nus.append(v if mn > TOL_POS else None)

    worst_angle = 0.0
    for a, b, va, vb in zip(grid[:-1], grid[1:], nus[:-1], nus[1:]):
        if va is None or vb is None:
            worst_angle = np.inf
            break
        worst_angle = max(worst_angle, _max_refined_angle(model, a, b, va, vb, max_angle))

    return [
        CheckResult("H2.positive_eigenvector", min_pos > TOL_POS, min_pos - TOL_POS,
                    f"min nu component, worst lambda={worst_pos_lam:.6g}"),
        CheckResult("H2.dominance", min_gap > 1e-10, min_gap - 1e-10,
                    f"principal eigenvalue gap, worst lambda={worst_gap_lam:.6g}"),
        CheckResult("H2.continuity", worst_angle < max_angle, max_angle - worst_angle,
                    "max angle between neighbouring eigenvectors"),
    ]
