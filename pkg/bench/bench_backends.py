#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-NumPy/Python twins.

Times the radial shooting integrator (sequential scalar loop) and the fused
2D flow kernels on representative sizes, with warmup so JIT compilation is
not charged to the numba path.  Run from the repo root:

    python3 bench/bench_backends.py

The runtime backend is selected by ROTC_NUMBA (default on); this script
always times both implementations directly.
"""

import time

import numpy as np

from rotcollapse import _kernels as K
from rotcollapse._accel import NUMBA_ENABLED, compile_kernel


def timeit(fn, *args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    if not NUMBA_ENABLED:
        print("note: numba disabled or unavailable; compiling anyway for "
              "comparison")
    pairs = {
        "shoot_classify": (K._shoot_classify_loop,
                           compile_kernel(K._shoot_classify_loop)),
        "explicit_terms_rot": (K._explicit_terms_rot_numpy,
                               compile_kernel(K._explicit_terms_rot_loop)),
        "observables_rot": (K._observables_rot_numpy,
                            compile_kernel(K._observables_rot_loop)),
        "spectral_step": (K._spectral_step_numpy,
                          compile_kernel(K._spectral_step_loop)),
    }

    print(f"{'kernel':<24} {'size':>12} {'numpy/py':>12} {'numba':>12} "
          f"{'speedup':>8}")
    print("-" * 72)

    # shooting: one near-critical trajectory, full range
    s, h, n_steps = 2.2062, 1e-4, 200000
    for fn in pairs["shoot_classify"]:
        fn(s, h, 1000)  # warmup / JIT
    t_py = timeit(pairs["shoot_classify"][0], s, h, n_steps, repeat=1)
    t_nb = timeit(pairs["shoot_classify"][1], s, h, n_steps)
    print(f"{'shoot_classify':<24} {'200k steps':>12} {t_py * 1e3:>10.1f}ms "
          f"{t_nb * 1e3:>10.1f}ms {t_py / t_nb:>8.1f}")

    rng = np.random.default_rng(0)
    for n in (256, 512):
        phi = (rng.standard_normal((n, n))
               + 1j * rng.standard_normal((n, n))).astype(np.complex128)
        dpx = phi * (0.3 + 0.1j)
        dpy = phi * (0.1 - 0.2j)
        x = np.linspace(-8, 8, n)
        k2 = rng.random((n, n))
        out = np.empty_like(phi)

        for label, args in (
            ("explicit_terms_rot", (phi, dpx, dpy, x, x, 1.0, 2.0, 5.0, out)),
            ("observables_rot", (phi, dpx, dpy, x, x)),
            ("spectral_step", (phi, dpx, k2, 0.01, -3.0, out)),
        ):
            np_fn, nb_fn = pairs[label]
            np_fn(*args)
            nb_fn(*args)  # warmup / JIT
            t_np = timeit(np_fn, *args)
            t_nb = timeit(nb_fn, *args)
            print(f"{label:<24} {f'{n}x{n}':>12} {t_np * 1e6:>10.0f}us "
                  f"{t_nb * 1e6:>10.0f}us {t_np / t_nb:>8.1f}")


if __name__ == "__main__":
    main()
