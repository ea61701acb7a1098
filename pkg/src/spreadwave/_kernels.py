"""Hot inner loops, with a numba path and a pure numpy/scipy path.

The numba versions are used when numba imports cleanly and the environment
variable ``SPREADWAVE_NO_NUMBA`` is unset (or ``0``). Both paths implement
the same arithmetic; results agree to rounding.

Kernels
-------
power_iterate(B, v, max_iter, rtol)
    Power iteration on an entrywise nonnegative matrix with max-norm
    normalisation. Stops once both the eigenvalue estimate and the vector
    change by at most ``rtol``. Returns ``(v, lam, n_iter)``.
exp_sweep(H, E, w_near, w_far, init)
    First-order recurrence ``y[:, k] = E*y[:, k-1] + w_near*H[:, k] +
    w_far*H[:, k-1]`` with ``y[:, 0] = init``, one row per component.
euler_step(u, fu, d, dt, dx)
    One forward-Euler step of ``u_t = d u_xx + f`` with zero-flux ends.
"""
from __future__ import annotations

from contextlib import contextmanager
import os

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "power_iterate",
    "exp_sweep",
    "euler_step",
    "numpy_kernels",
    "numba_kernels",
    "use_backend",
]


def _np_power_iterate(B, v, max_iter, rtol):
    lam_old = 0.0
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = B @ v
        lam = float(np.max(np.abs(w)))
        if lam == 0.0:
            return v, 0.0, it
        w = w / lam
        dv = float(np.max(np.abs(w - v)))
        v = w
        if abs(lam - lam_old) <= rtol * abs(lam) and dv <= rtol:
            return v, lam, it
        lam_old = lam
    return v, lam, max_iter


def _np_exp_sweep(H, E, w_near, w_far, init):
    n, m = H.shape
    out = np.empty((n, m))
    out[:, 0] = init
    for i in range(n):
        x = w_near[i] * H[i, 1:] + w_far[i] * H[i, :-1]
        y, _ = lfilter([1.0], [1.0, -E[i]], x, zi=[E[i] * init[i]])
        out[i, 1:] = y
    return out


def _np_euler_step(u, fu, d, dt, dx):
    lap = np.empty_like(u)
    lap[:, 1:-1] = u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]
    lap[:, 0] = 2.0 * (u[:, 1] - u[:, 0])
    lap[:, -1] = 2.0 * (u[:, -2] - u[:, -1])
    return u + dt * (d[:, None] * lap / (dx * dx) + fu)


numpy_kernels = {
    "power_iterate": _np_power_iterate,
    "exp_sweep": _np_exp_sweep,
    "euler_step": _np_euler_step,
}

numba_kernels: dict = {}

try:
    from numba import njit

    @njit(cache=True)
    def _nb_power_iterate(B, v, max_iter, rtol):
        n = v.shape[0]
        v = v.copy()
        w = np.empty(n)
        lam_old = 0.0
        lam = 0.0
        for it in range(1, max_iter + 1):
            lam = 0.0
            for i in range(n):
                s = 0.0
                for j in range(n):
                    s += B[i, j] * v[j]
                w[i] = s
                if abs(s) > lam:
                    lam = abs(s)
            if lam == 0.0:
                return v, 0.0, it
            dv = 0.0
            for i in range(n):
                x = w[i] / lam
                if abs(x - v[i]) > dv:
                    dv = abs(x - v[i])
                v[i] = x
            if abs(lam - lam_old) <= rtol * abs(lam) and dv <= rtol:
                return v, lam, it
            lam_old = lam
        return v, lam, max_iter

    @njit(cache=True)
    def _nb_exp_sweep(H, E, w_near, w_far, init):
        n, m = H.shape
        out = np.empty((n, m))
        for i in range(n):
            e = E[i]
            a = w_near[i]
            b = w_far[i]
            y = init[i]
            out[i, 0] = y
            for k in range(1, m):
                y = e * y + (a * H[i, k] + b * H[i, k - 1])
                out[i, k] = y
        return out

    @njit(cache=True)
    def _nb_euler_step(u, fu, d, dt, dx):
        n, m = u.shape
        out = np.empty((n, m))
        inv = 1.0 / (dx * dx)
        for i in range(n):
            di = d[i] * inv
            out[i, 0] = u[i, 0] + dt * (di * 2.0 * (u[i, 1] - u[i, 0]) + fu[i, 0])
            for k in range(1, m - 1):
                lap = u[i, k + 1] - 2.0 * u[i, k] + u[i, k - 1]
                out[i, k] = u[i, k] + dt * (di * lap + fu[i, k])
            out[i, m - 1] = u[i, m - 1] + dt * (
                di * 2.0 * (u[i, m - 2] - u[i, m - 1]) + fu[i, m - 1]
            )
        return out

    numba_kernels = {
        "power_iterate": _nb_power_iterate,
        "exp_sweep": _nb_exp_sweep,
        "euler_step": _nb_euler_step,
    }
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False


def _wanted_numba() -> bool:
    flag = os.environ.get("SPREADWAVE_NO_NUMBA", "").strip().lower()
    return NUMBA_AVAILABLE and flag in ("", "0", "false", "no")


BACKEND = "numba" if _wanted_numba() else "numpy"
_active = numba_kernels if BACKEND == "numba" else numpy_kernels


@contextmanager
def use_backend(name: str):
    """Temporarily route the public kernels through ``"numba"`` or ``"numpy"``."""
    global _active, BACKEND
    table = {"numba": numba_kernels, "numpy": numpy_kernels}.get(name)
    if not table:
        raise ValueError(f"backend {name!r} is not available")
    saved = _active, BACKEND
    _active, BACKEND = table, name
    try:
        yield
    finally:
        _active, BACKEND = saved


def power_iterate(B, v, max_iter=10_000, rtol=1e-14):
    B = np.ascontiguousarray(B, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    return _active["power_iterate"](B, v, int(max_iter), float(rtol))


def exp_sweep(H, E, w_near, w_far, init):
    return _active["exp_sweep"](
        np.ascontiguousarray(H, dtype=np.float64),
        np.ascontiguousarray(E, dtype=np.float64),
        np.ascontiguousarray(w_near, dtype=np.float64),
        np.ascontiguousarray(w_far, dtype=np.float64),
        np.ascontiguousarray(init, dtype=np.float64),
    )


def euler_step(u, fu, d, dt, dx):
    return _active["euler_step"](
        np.ascontiguousarray(u, dtype=np.float64),
        np.ascontiguousarray(fu, dtype=np.float64),
        np.ascontiguousarray(d, dtype=np.float64),
        float(dt),
        float(dx),
    )
