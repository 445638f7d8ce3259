"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--trajectories N] [--steps K] [--repeat R]

Reports the best wall time of R repeats for each backend plus the speedup,
and checks that both backends produced the same numbers.
"""
import argparse
import time

import numpy as np

from thermaldrag import _backend
from thermaldrag.fokker_planck import MomentumGrid, evolve, gaussian_state
from thermaldrag.langevin import SimConfig, run_ensemble


def best_of(fn, repeat):
    times, result = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trajectories", type=int, default=100_000)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--grid", type=int, default=4001)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    names = ["python"] + (["compiled"] if _backend.NAME == "compiled" else [])
    if len(names) == 1:
        print("compiled kernels not built; timing the numpy fallback only")

    cfg = SimConfig(gamma=1.0, diffusion=1.0, dt=0.01, n_steps=args.steps,
                    n_trajectories=args.trajectories, stepper="exact", seed=1)
    grid = MomentumGrid.symmetric(12.0, args.grid)
    start = gaussian_state(grid, 1.0, 0.5)

    cases = {
        f"ensemble {args.trajectories} x {args.steps} steps":
            lambda b: run_ensemble(cfg, backend=b).final_momenta,
        f"fokker-planck {args.grid} points, 2000 steps":
            lambda b: evolve(start, 1.0, 1.0, 10.0, dt=0.005, backend=b).values,
    }
    print(f"{'case':<42}{'backend':>10}{'seconds':>10}{'speedup':>9}")
    for label, fn in cases.items():
        timings, outputs = {}, {}
        for b in names:
            timings[b], outputs[b] = best_of(lambda: fn(b), args.repeat)
        for b in names:
            speed = timings["python"] / timings[b]
            print(f"{label:<42}{b:>10}{timings[b]:>10.3f}{speed:>8.2f}x")
        if len(names) == 2:
            diff = np.max(np.abs(outputs["python"] - outputs["compiled"]))
            print(f"{'':<42}{'max |diff|':>10}{diff:>10.1e}")


if __name__ == "__main__":
    main()
