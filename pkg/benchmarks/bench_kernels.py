"""Time the numba kernels against the pure-numpy fallback on the same inputs.

    python3 benchmarks/bench_kernels.py [--n 18] [--walks 20000] [--repeat 3]

Each kernel is first run once per backend (numba compiles there, excluded
from timing) and outputs are compared before timing starts.
"""

import argparse
import time

import numpy as np

from hybridsat._kernels import numba_backend, numpy_backend
from hybridsat.cnf import default_clause_count, generate_planted
from hybridsat.markov import default_r_choice
from hybridsat.rng import walk_block


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def cases(n, walks, seed):
    f, x_star = generate_planted(n, default_clause_count(n), seed)
    m = 3 * n
    X0, W = walk_block(seed, "bench", 0, walks, n, m)
    tape = W[0].astype(np.int64)
    free = np.zeros(m, dtype=np.bool_)
    free[m // 2 :] = True
    S0 = np.arange(1 << n, dtype=np.int64)
    r = default_r_choice(f, x_star)
    nxt = numba_backend().transition_table(f.var, f.neg, n)
    return {
        "first_violated_batch": lambda k: k.first_violated_batch(f.var, f.neg, X0),
        "count_models": lambda k: k.count_models(f.var, f.neg, n, 0),
        "walk_batch": lambda k: k.walk_batch(f.var, f.neg, X0, W),
        "walk_batch_shared": lambda k: k.walk_batch_shared(f.var, f.neg, X0, W[0]),
        "transition_table": lambda k: k.transition_table(f.var, f.neg, n),
        "table_walk_shared": lambda k: k.table_walk_shared(nxt, S0, tape),
        "suffix_counts": lambda k: k.suffix_counts(nxt, tape, free),
        "coupled_batch": lambda k: k.coupled_batch(f.var, f.neg, r, x_star, X0, W),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=18)
    ap.add_argument("--walks", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    nb, npy = numba_backend(), numpy_backend()
    print(f"n={args.n} walks={args.walks} m={3 * args.n} repeat={args.repeat} seed={args.seed}")
    print(f"{'kernel':<22}{'numba s':>12}{'numpy s':>12}{'speedup':>10}  match")
    for name, run in cases(args.n, args.walks, args.seed).items():
        ok = _same(run(nb), run(npy))
        t_nb = _best(lambda: run(nb), args.repeat)
        t_np = _best(lambda: run(npy), args.repeat)
        print(f"{name:<22}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}  {'yes' if ok else 'NO'}")


if __name__ == "__main__":
    main()
