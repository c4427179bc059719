"""Timing comparison of the compiled and pure-numpy kernel backends.

Run twice, once per backend:

    python benchmarks/bench_kernels.py
    BRIDGEBOUND_NO_NUMBA=1 python benchmarks/bench_kernels.py

Each kernel is timed on workloads shaped like a real posterior pass
(n units x L mediator draws). Within one backend results are bitwise
reproducible; across backends the compensated sums may differ by a few
ulps because the fold order differs, so this script asserts agreement
against the numpy reference to near machine precision.
"""

import math

import time

import numpy as np

from bridgebound import _kernels
from bridgebound._kernels import (_comp_sum_np, _gamma_sup_logratio_np,
                                  _normal_logpdf_np, _outcome_mean_sum_np)

N_UNITS = 2000
L = 50
REPS = 5


def timeit(fn, *args):
    fn(*args)  # warm-up triggers compilation on the numba path
    best = np.inf
    for _ in range(REPS):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    rng = np.random.default_rng(7)
    npts = N_UNITS * L
    m = rng.standard_normal(npts)
    l0 = rng.standard_normal(npts)
    l1 = rng.standard_normal(npts)
    beta = rng.standard_normal(8)
    x = rng.standard_normal(npts)
    w = rng.standard_normal(400)

    print(f"backend: {_kernels.backend_name()}  ({npts} points, best of {REPS})")
    rows = []

    t, got = timeit(_kernels.comp_sum, x)
    ref = _comp_sum_np(x)
    assert math.isclose(got, ref, rel_tol=1e-12, abs_tol=1e-12), (got, ref)
    rows.append(("comp_sum", t))

    t, got = timeit(_kernels.normal_logpdf, m, l0, np.float64(1.3))
    ref = _normal_logpdf_np(m, l0, np.float64(1.3))
    assert np.array_equal(got, ref)
    rows.append(("normal_logpdf", t))

    t, got = timeit(_kernels.outcome_mean_sum, m, l0, l1, np.float64(1.0), beta)
    ref = _outcome_mean_sum_np(m, l0, l1, np.float64(1.0), beta)
    assert math.isclose(got, ref, rel_tol=1e-12, abs_tol=1e-12), (got, ref)
    rows.append(("outcome_mean_sum", t))

    w_sorted = np.sort(w)
    mu_c = rng.standard_normal(npts)
    mu_r = rng.standard_normal(npts)
    args = (mu_c, np.float64(0.9), mu_r, np.float64(1.1), w_sorted)
    t, got = timeit(_kernels.gamma_sup_logratio, *args)
    ref = _gamma_sup_logratio_np(*args)
    assert np.array_equal(got, ref)
    brute = _kernels.gamma_sup_logratio_brute(*args)
    assert np.array_equal(got, brute)
    rows.append(("gamma_sup_logratio", t))

    for name, t in rows:
        print(f"  {name:<22s} {t * 1e3:9.3f} ms")


if __name__ == "__main__":
    main()
