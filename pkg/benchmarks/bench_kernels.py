"""Timing comparison of the numpy and numba kernel twins.

Both implementations of every hot kernel stay importable regardless of the
GKDVLAB_NUMBA flag, so the comparison runs in one process.  With --steps the
script additionally times a short soliton integration end to end under each
backend, re-executing itself in a subprocess with the flag toggled.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat 7] [--steps 2000]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from gkdvlab import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def compare(label, fn_numpy, fn_numba, repeat):
    fn_numba()  # jit warmup outside the clock
    t_np = best_of(fn_numpy, repeat)
    t_nb = best_of(fn_numba, repeat)
    print(f"{label:42s} numpy {t_np * 1e3:9.3f} ms   numba {t_nb * 1e3:9.3f} ms   "
          f"speedup {t_np / t_nb:6.2f}x")


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    print(f"numba available: {_kernels.HAS_NUMBA}, active backend: {_kernels.BACKEND}")
    print()

    for n in (1024, 4096, 16384):
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        for p in (1, 2):
            compare(
                f"coupled_powers  n={n:<6d} p={p}",
                lambda u=u, v=v, p=p: _kernels.coupled_powers_numpy(u, v, p),
                lambda u=u, v=v, p=p: _kernels.coupled_powers_numba(u, v, p),
                repeat,
            )

    for m, n in ((64, 64), (256, 256), (1024, 512)):
        zeta = np.linspace(-20.0, 20.0, n)
        eta = np.linspace(-50.0, 50.0, m)
        compare(
            f"bourgain_weight m={m:<5d} n={n}",
            lambda z=zeta, e=eta: _kernels.bourgain_weight_numpy(z, e, 0.25, 2.0, 0.55),
            lambda z=zeta, e=eta: _kernels.bourgain_weight_numba(z, e, 0.25, 2.0, 0.55),
            repeat,
        )

    rhos = np.linspace(0.0, 2.0, 41)
    zetas = np.linspace(-100.0, 100.0, 201)
    z1s = np.linspace(-100.0, 100.0, 41)
    z2s = np.linspace(-100.0, 100.0, 41)
    compare(
        "triangle_split  201x41x41 grid, 41 rhos",
        lambda: _kernels.triangle_split_failures_numpy(rhos, zetas, z1s, z2s),
        lambda: _kernels.triangle_split_failures_numba(rhos, zetas, z1s, z2s),
        repeat,
    )


def bench_steps(steps):
    # separate processes: the backend is bound at import time
    code = (
        "import time, numpy as np\n"
        "from gkdvlab.spectral import Field, SpectralGrid\n"
        "from gkdvlab.evolution import CoupledState, SolverConfig, simulate\n"
        "from gkdvlab._kernels import BACKEND\n"
        "g = SpectralGrid(20.0 * np.pi, 1024)\n"
        "w = Field(g, np.sqrt(2.0) / np.cosh(g.x))\n"
        "st = CoupledState(0.0, w, w)\n"
        f"cfg = SolverConfig(p=1, dt=1e-3, t_end={steps} * 1e-3, record_stride={steps})\n"
        "simulate(st, cfg)  # warmup\n"
        "t0 = time.perf_counter()\n"
        "simulate(st, cfg)\n"
        f"print(f'{{BACKEND}}: {steps} if_rk4 steps at N=1024 in '\n"
        "      f'{time.perf_counter() - t0:.2f} s')\n"
    )
    print()
    for flag in ("1", "0"):
        env = dict(os.environ, GKDVLAB_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        print(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7, help="timing repetitions")
    ap.add_argument("--steps", type=int, default=0,
                    help="also time an end-to-end run of this many steps per backend")
    args = ap.parse_args()
    bench_kernels(args.repeat)
    if args.steps:
        bench_steps(args.steps)


if __name__ == "__main__":
    main()
