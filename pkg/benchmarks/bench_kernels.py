"""Time the numba and numpy kernel backends, per kernel and end to end.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from spreadwave import _kernels as K
from spreadwave import models, pde, wave
from spreadwave.speed import minimize_phi


def best_of(fn, repeat):
    fn()  # compile / warm caches
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    B = rng.random((4, 4)) + 0.05
    H = rng.random((2, 4000))
    E, near, far = np.array([0.95, 0.9]), np.array([0.03, 0.05]), np.array([0.02, 0.04])
    u = rng.random((2, 2001))
    fu = rng.standard_normal((2, 2001))
    d = np.array([1.0, 0.5])
    ung = models.ungulate(models.UngulateParams(d1=1.0, d2=0.5, alpha=1.0, delta=1.0, r1=2.0, r2=1.0))
    fis = models.fisher()
    params = wave.build_params(fis, 2.5)
    sim = pde.SimConfig(X=200.0, t_end=20.0)
    return {
        "power_iterate 4x4": lambda: K.power_iterate(B, np.ones(4)),
        "exp_sweep 2x4000": lambda: K.exp_sweep(H, E, near, far, H[:, 0]),
        "euler_step 2x2001 x100": lambda: [K.euler_step(u, fu, d, 0.01, 0.2) for _ in range(100)],
        "minimize_phi ungulate": lambda: minimize_phi(ung),
        "cooperative_wave fisher": lambda: wave.cooperative_wave(fis, 2.5, params=params),
        "pde.run fisher t_end=20": lambda: pde.run(sim, fis, fit=False),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if K.NUMBA_AVAILABLE else [])
    print(f"{'case':<28}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, fn in cases().items():
        row = []
        for b in backends:
            with K.use_backend(b):
                row.append(best_of(fn, args.repeat))
        line = f"{name:<28}" + "".join(f"{t * 1e3:>10.3f}ms" for t in row)
        if len(row) == 2:
            line += f"{row[0] / row[1]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
