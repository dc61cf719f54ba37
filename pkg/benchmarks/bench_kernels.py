"""Compiled vs pure-Python kernels: walk simulation and one gradient batch.

    python3 benchmarks/bench_kernels.py [--nodes 2000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from rwembed.graph import generate_directed_sbm, generate_sbm
from rwembed.kernels import AUTOCOV_PIECEWISE, PMI_SIGMOID, available_backends, get_backend
from rwembed.process import pagerank_process, simulate, standard_process
from rwembed.sample_embed import RHO_EPS


def _best(fn, repeats):
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=2000)
    ap.add_argument("--walks-per-node", type=int, default=5)
    ap.add_argument("--walk-length", type=int, default=80)
    ap.add_argument("--dim", type=int, default=128)
    ap.add_argument("--pairs", type=int, default=50_000)
    ap.add_argument("--negatives", type=int, default=5)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)

    half = args.nodes // 2
    g = generate_sbm([half, args.nodes - half], 10 / half, 1 / half, seed=0)
    dg = generate_directed_sbm([half, args.nodes - half], 10 / half, 1 / half, seed=0)
    starts = np.repeat(np.arange(g.n), args.walks_per_node)
    rng = np.random.default_rng(0)
    U = rng.uniform(-0.5, 0.5, (g.n, args.dim)) / args.dim
    V = rng.uniform(-0.5, 0.5, (g.n, args.dim)) / args.dim
    src = rng.integers(0, g.n, args.pairs)
    dst = rng.integers(0, g.n, args.pairs)
    negs = rng.integers(0, g.n, (args.pairs, args.negatives))
    pi = standard_process(g).pi

    cases = {
        "walks/standard": lambda b, p=standard_process(g): simulate(p, starts, args.walk_length, 0, backend=b),
        "walks/pagerank": lambda b, p=pagerank_process(dg): simulate(p, starts, args.walk_length, 0, backend=b),
    }
    for name, variant in (("grad/pmi", PMI_SIGMOID), ("grad/autocov", AUTOCOV_PIECEWISE)):
        def grad(b, variant=variant):
            gU, gV = np.zeros_like(U), np.zeros_like(V)
            get_backend(b).batch_grad(U, V, src, dst, negs, pi, variant, args.negatives, RHO_EPS, gU, gV)
        cases[name] = grad

    backends = available_backends()
    print(f"n={g.n} m={g.m} walks={len(starts)}x{args.walk_length} pairs={args.pairs}x(1+{args.negatives}) d={args.dim}")
    print(f"{'kernel':16s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases.items():
        t = {b: _best(lambda: fn(b), args.repeats) for b in backends}
        row = f"{name:16s}" + "".join(f"{t[b]:11.4f}s" for b in backends)
        if "cython" in t:
            row += f"{t['python'] / t['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
