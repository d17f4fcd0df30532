"""Compare the compiled and pure-Python RK4 kernels on the actuator model.

    python benchmarks/bench_rk4.py [--steps N] [--repeat R]

Both backends integrate the same sine-driven run (voltage mode, and current
mode with LuGre friction) and must agree to 1e-12 before timings are shown.
"""

import argparse
import math
import time

import numpy as np

from magrest import _core
from magrest.config import table1_config
from magrest.dynamics import ActuatorODE, Drive, LuGreParams, LumpedElectromech, Sine, simulate


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    cfg = table1_config()
    p = LumpedElectromech.from_config(cfg)
    cases = {
        "voltage": (ActuatorODE(p), Drive(Sine(0.2, 2 * math.pi * 140))),
        "current+lugre": (ActuatorODE(p, LuGreParams.from_config(cfg), "current"),
                          Drive(Sine(1e-3, 10.0))),
    }
    backends = _core.backends()
    print(f"default backend: {_core.BACKEND}; available: {', '.join(sorted(backends))}")
    dt = 1e-6
    for name, (model, drive) in cases.items():
        x0 = [math.pi / 2, 0.0, 0.0]
        results = {}
        for b in sorted(backends):
            elapsed, traj = best_time(
                lambda b=b: simulate(model, x0, drive, dt=dt, t_end=args.steps * dt, backend=b),
                args.repeat)
            results[b] = (elapsed, traj.x)
            print(f"{name:14s} {b:7s} {args.steps} steps: {elapsed * 1e3:9.2f} ms "
                  f"({elapsed / args.steps * 1e9:8.1f} ns/step)")
        if len(results) == 2:
            diff = np.max(np.abs(results["cython"][1] - results["python"][1]))
            scale = np.max(np.abs(results["python"][1]))
            assert diff <= 1e-12 * scale, f"backends disagree by {diff:.3e}"
            print(f"{name:14s} speed-up {results['python'][0] / results['cython'][0]:.1f}x, "
                  f"max difference {diff:.1e}")


if __name__ == "__main__":
    main()
