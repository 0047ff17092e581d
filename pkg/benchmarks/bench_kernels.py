"""Wall time of the compiled and numpy step kernels on the same runs.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import importlib.util
import time

import numpy as np

from fracwave.wavesolver import RunConfig, simulate

CASES = {
    "global nx=201 t=20": RunConfig(u0_profile="sine:0.1:2", u1_profile="sine:0.3:1", t_end=20.0),
    "global nx=801 t=5": RunConfig(nx=801, u0_profile="sine:0.1:2", u1_profile="sine:0.3:1", t_end=5.0),
    "blowup L=8 nx=801": RunConfig(L=8.0, nx=801, p=5.0, u0_profile="plateau:2:20", t_end=10.0),
}


def best_of(cfg, backend, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        raw, _, _ = simulate(cfg, backend=backend)
        times.append(time.perf_counter() - t0)
    return min(times), raw


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if importlib.util.find_spec("fracwave._ckernels") is None:
        raise SystemExit("compiled kernel not built; run pip install -e . --no-build-isolation")
    print(f"{'case':22s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s} {'max rel diff':>13s}")
    for name, cfg in CASES.items():
        tp, rp = best_of(cfg, "python", args.repeat)
        tc, rc = best_of(cfg, "cython", args.repeat)
        diff = float(np.max(np.abs(rp.rec - rc.rec) / np.maximum(np.abs(rp.rec), 1.0)))
        print(f"{name:22s} {tp:10.3f} {tc:10.3f} {tp / tc:8.1f} {diff:13.1e}")


if __name__ == "__main__":
    main()
