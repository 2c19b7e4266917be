"""
Benchmark: numba-compiled kernels vs the pure numpy/Python path.

Kernel timings call the jitted dispatcher and its ``py_func`` side by side in one
process. The end-to-end timing runs a short closed loop in two subprocesses, one
with TLA_RCAC_DISABLE_JIT=1, because the flag is read at import time.

    python benchmarks/bench_kernels.py [--repeat N] [--t-final SECONDS]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from tla_rcac import _jit
from tla_rcac.airframe import MissileParams, airframe_rhs
from tla_rcac.integrate import integrate_interval
from tla_rcac.linearize import missile_linear_kernel
from tla_rcac import _loop_kernel as lk

Y = np.array([2.5, 0.7, 0.75, 0.1, 3500.0, 0.0, 0.01, 0.2])
P = MissileParams().to_array()


def best_of(fn, repeat, inner):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def kernel_cases():
    out = np.empty(8)
    y_loop = np.zeros(lk.N_LOOP_STATE)
    y_loop[:8] = Y
    p_loop = np.zeros(lk.N_LOOP_PARAMS)
    p_loop[:P.size] = P

    def rhs(f):
        return lambda: f(Y, 3800.0, 0.02, P, out)

    def lin(f):
        return lambda: f(Y, 3800.0, 0.02, P)

    def interval(f):
        # one 5 ms controller interval of the closed-loop ODE
        return lambda: integrate_interval(f, y_loop, 0.0, 0.005, params=p_loop)

    return [("airframe_rhs", airframe_rhs, rhs, 2000),
            ("missile_linear_kernel", missile_linear_kernel, lin, 200),
            ("closed-loop interval (DP45)", lk.loop_rhs, interval, 50)]


PROBE = """
import time
from tla_rcac.rcac import RcacConfig
from tla_rcac.simcore import ControllerStack, LoopConfig, Plant, run_closed_loop

def run(tf):
    t0 = time.perf_counter()
    run_closed_loop(Plant(), ControllerStack(rcac={rcac}), lambda t, y: 98.0,
                    LoopConfig(t_final=tf))
    return time.perf_counter() - t0

warm = run(0.01)  # includes compiling the kernels that cannot be cached
print(warm, run({tf}))
"""


def end_to_end(t_final, disable, adaptive):
    """(warm-up seconds, timed-run seconds) in a fresh interpreter."""
    env = dict(os.environ)
    env.pop("TLA_RCAC_DISABLE_JIT", None)
    if disable:
        env["TLA_RCAC_DISABLE_JIT"] = "1"
    res = subprocess.run([sys.executable, "-c", PROBE.format(tf=t_final, rcac="RcacConfig()" if adaptive else "None")], env=env,
                         capture_output=True, text=True, check=True)
    warm, run = (float(v) for v in res.stdout.split())
    return warm, run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--t-final", type=float, default=1.0)
    args = ap.parse_args(argv)

    if not _jit.JIT_ENABLED:
        print("numba disabled in this process; unset TLA_RCAC_DISABLE_JIT to compare")
        return 1

    print(f"{'kernel':32s} {'numba':>12s} {'python':>12s} {'speedup':>9s}")
    for name, fn, make, inner in kernel_cases():
        make(fn)()  # compile
        t_jit = best_of(make(fn), args.repeat, inner)
        t_py = best_of(make(_jit.python_impl(fn)), args.repeat, max(1, inner // 10))
        print(f"{name:32s} {t_jit * 1e6:10.2f}us {t_py * 1e6:10.2f}us {t_py / t_jit:8.1f}x")

    for adaptive, tag in ((False, "F-TLA"), (True, "A-TLA")):
        w_jit, t_jit = end_to_end(args.t_final, False, adaptive)
        w_py, t_py = end_to_end(args.t_final, True, adaptive)
        label = f"{tag} closed loop, {args.t_final:g} s"
        print(f"{label:32s} {t_jit:11.3f}s {t_py:11.3f}s {t_py / t_jit:8.1f}x")
        print(f"{'  first call (incl. compile)':32s} {w_jit:11.3f}s {w_py:11.3f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
