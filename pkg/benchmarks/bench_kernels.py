"""Compare the compiled and pure-Python stepping kernels.

    python benchmarks/bench_kernels.py [--t-end 200] [--h 0.0078125] [--repeat 3]
"""
import argparse
import time

import numpy as np

from harvest_dde import dde_core
from harvest_dde.dde_core import IntegrationConfig, integrate
from harvest_dde.model import Constant, Cosine, History, ModelParams, SeasonalPulse


def scenario():
    params = ModelParams(
        gamma=2.0,
        r=Cosine(2.0, 0.5, 2.0, 0.25),
        eta=Constant(1.0),
        lam=SeasonalPulse(0.5, 0.25, 0.25),
        K=Cosine(1.0, 0.25, 2.0, 0.75),
        theta=Constant(0.25),
        T=1.0,
    )
    return params, History(Constant(0.8), 0.8)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t-end", type=float, default=200.0)
    ap.add_argument("--h", type=float, default=1 / 128)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    params, hist = scenario()
    cfg = IntegrationConfig(h=args.h, t_end=args.t_end)
    steps = int(round(args.t_end / args.h))
    print(f"{steps} RK4 steps, h={args.h:g}, t_end={args.t_end:g}")

    t_py, tr_py = best_of(lambda: integrate(params, hist, cfg, backend="python"), args.repeat)
    print(f"  python  {t_py * 1e3:9.2f} ms  ({t_py / steps * 1e6:.2f} us/step)")
    if dde_core._march_hill_ext is None:
        print("  cython  not built")
        return
    t_cy, tr_cy = best_of(lambda: integrate(params, hist, cfg, backend="cython"), args.repeat)
    print(f"  cython  {t_cy * 1e3:9.2f} ms  ({t_cy / steps * 1e6:.2f} us/step)")
    print(f"  speedup {t_py / t_cy:.1f}x, max |N_py - N_cy| = {np.max(np.abs(tr_py.N - tr_cy.N)):.3e}")


if __name__ == "__main__":
    main()
