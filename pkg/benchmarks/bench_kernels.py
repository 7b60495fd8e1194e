"""Benchmark the numba-compiled kernels against their pure-numpy fallbacks.

Runs each kernel on representative inputs and reports per-call wall time for
both implementations plus the speedup.  Results are cross-checked for
agreement before timing.

Usage:
    python3 benchmarks/bench_kernels.py [--n-servers N] [--repeat R]
"""

import argparse
import time

import numpy as np

from nfvrel import kernels


def _random_masks(rng, n_s, n_rvnf):
    full = (1 << n_s) - 1
    cvnf = rng.integers(1, full + 1, size=n_rvnf, dtype=np.int64)
    rvnf = rng.integers(1, full + 1, size=n_rvnf, dtype=np.int64)
    adj = rng.integers(0, full + 1, size=n_s, dtype=np.int64)
    # symmetrize adjacency and force self-links so instances look realistic
    for s in range(n_s):
        adj[s] |= 1 << s
        for t in range(n_s):
            if (adj[s] >> t) & 1:
                adj[t] |= 1 << s
    return cvnf, rvnf, adj


def _time(fn, args, repeat):
    fn(*args)  # warm-up (and jit compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-servers", type=int, default=14)
    parser.add_argument("--n-rvnf", type=int, default=4)
    parser.add_argument("--mc-samples", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if not kernels.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    n_s, n_r = args.n_servers, args.n_rvnf
    p = rng.uniform(0.05, 0.3, size=n_s)
    cvnf, rvnf, adj = _random_masks(rng, n_s, n_r)
    f_samples = rng.integers(0, 1 << n_s, size=args.mc_samples, dtype=np.int64)

    # block-search inputs at a sweep-sized instance (4 servers)
    sb_ns, sb_bits = 4, 16
    delta = rng.integers(0, 3, size=(sb_bits, 1 << sb_ns)).astype(np.int64)
    colidx = rng.integers(0, sb_ns, size=sb_bits).astype(np.int64)
    cap = np.full(sb_ns, 3, dtype=np.int64)
    weights = rng.dirichlet(np.ones(1 << sb_ns))

    cases = [
        (f"exact_sum       (2^{n_s} states)",
         kernels.exact_sum_nb, kernels.exact_sum_py,
         (n_s, p, cvnf, rvnf, adj)),
        (f"surrogate_sum   (2^{n_s} states)",
         kernels.surrogate_sum_nb, kernels.surrogate_sum_py,
         (n_s, p, cvnf, rvnf, adj, n_r)),
        (f"mc_count        ({args.mc_samples} samples)",
         kernels.mc_count_nb, kernels.mc_count_py,
         (f_samples, n_s, cvnf, rvnf, adj)),
        (f"search_block    ({sb_bits} bits, 2^{sb_ns} states)",
         kernels.search_block_nb, kernels.search_block_py,
         (delta, colidx, cap.copy(), weights, n_r, -1e18, 0)),
    ]

    print(f"{'kernel':<42} {'numba':>12} {'numpy':>12} {'speedup':>9}")
    for name, fn_nb, fn_py, fn_args in cases:
        out_nb = fn_nb(*fn_args)
        out_py = fn_py(*fn_args)
        if isinstance(out_nb, tuple):
            assert out_nb[0] == out_py[0] and abs(out_nb[1] - out_py[1]) < 1e-9
        else:
            assert abs(float(out_nb) - float(out_py)) < 1e-9
        t_nb = _time(fn_nb, fn_args, args.repeat)
        t_py = _time(fn_py, fn_args, args.repeat)
        print(f"{name:<42} {t_nb * 1e3:>10.3f}ms {t_py * 1e3:>10.3f}ms "
              f"{t_py / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
