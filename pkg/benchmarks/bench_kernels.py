"""Timing of the hot kernels: numba-compiled vs pure-Python fallback.

Runs its workloads in the current mode, then re-runs itself in a subprocess
with FLOWLDP_NO_NUMBA=1 and prints a combined table.  Usage:

    python3 benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def build_model():
    from flowldp.shift import validate_system
    from flowldp.suspension import normalize_model
    from flowldp.transfer import CylinderPotential

    sys_ = validate_system(3, [[1, 1, 1], [1, 1, 0], [1, 0, 1]], 0)
    edges = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0), (2, 2)]
    rng = np.random.default_rng(7)
    for _ in range(12):
        tau_v = rng.uniform(0.8, 2.6, 7)
        gh_v = rng.uniform(0.4, 2.4, 7)
        f_v = rng.uniform(-0.25, 0.25, 7)

    def pot(vals):
        return CylinderPotential(sys_, 1, {e: float(v) for e, v in zip(edges, vals)})

    return normalize_model(sys_, pot(f_v), pot(tau_v), pot(gh_v))


def run_workloads():
    from flowldp import _kernels
    from flowldp.suspension import (exact_gamma_transform, exact_interval_measure,
                                    simulate_deviation_values)

    model = build_model()
    a = 1.5026563688365357
    results = {"mode": "numba" if _kernels.USING_NUMBA else "python"}

    # warm-up triggers jit compilation; excluded from timings
    exact_gamma_transform(model, 0.3 + 0.2j, a, 10.0)
    exact_interval_measure(model, a, 0.05, 10.0)
    simulate_deviation_values(model.chain, a, 10.0, 1000, 0)

    t0 = time.perf_counter()
    for _ in range(3):
        exact_gamma_transform(model, 0.3 + 0.2j, a, 19.0)
    results["gamma_transform_T19"] = (time.perf_counter() - t0) / 3

    t0 = time.perf_counter()
    for _ in range(3):
        exact_interval_measure(model, a, 0.05, 19.0)
    results["interval_measure_T19"] = (time.perf_counter() - t0) / 3

    t0 = time.perf_counter()
    simulate_deviation_values(model.chain, a, 30.0, 500_000, 1)
    results["simulate_500k_T30"] = time.perf_counter() - t0
    return results


def main():
    mine = run_workloads()
    if os.environ.get("FLOWLDP_NO_NUMBA"):
        print(json.dumps(mine))
        return
    env = dict(os.environ, FLOWLDP_NO_NUMBA="1")
    out = subprocess.run([sys.executable, os.path.abspath(__file__)], env=env,
                         capture_output=True, text=True, check=True)
    other = json.loads(out.stdout.strip().splitlines()[-1])
    keys = [k for k in mine if k != "mode"]
    print(f"{'workload':28s} {'numba (s)':>12s} {'python (s)':>12s} {'speedup':>9s}")
    for k in keys:
        print(f"{k:28s} {mine[k]:12.4f} {other[k]:12.4f} {other[k] / mine[k]:8.1f}x")


if __name__ == "__main__":
    main()
