"""Compare the compiled sweep kernel with the numpy fallback.

    python3 benchmarks/bench_sqa.py [--reads 100] [--repeat 3]

Both kernels anneal the same reads of a random problem on the default
1x2 Chimera critic graph; the script checks that the spins agree bit for
bit and prints wall-clock time per call and the speed-up.
"""

import argparse
import time

import numpy as np

from ferl.sqa import AnnealParams, anneal_keys
from ferl.sqa import backend
from ferl.sqa.rng import read_keys
from ferl.topology import IsingProblem, build_chimera, default_visible_mapping


def random_problem(rows, cols, seed):
    rng = np.random.default_rng(seed)
    topo = build_chimera(rows, cols)
    mapping = default_visible_mapping(topo, 1, 1)
    mask = mapping.mask(topo.qubit_count)
    problem = IsingProblem(topo, mapping, rng.uniform(-1, 1, topo.n_edges),
                           np.where(mask, rng.uniform(-1, 1, mask.shape), 0.0))
    return problem.clamp(rng.uniform(-1, 1, 2))


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reads", type=int, default=100)
    ap.add_argument("--sweeps", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--rows", type=int, default=1)
    ap.add_argument("--cols", type=int, default=2)
    args = ap.parse_args()

    problem = random_problem(args.rows, args.cols, 0)
    params = AnnealParams(n_sweeps=args.sweeps, num_reads=args.reads)
    keys = read_keys(7, args.reads)
    sites = problem.n_hidden * params.n_replicas
    print(f"graph {args.rows}x{args.cols} chimera: {sites} sites, {args.sweeps} sweeps, {args.reads} reads")

    t_py, s_py = best_of(lambda: anneal_keys(problem, params, keys, kernel=backend.fallback_anneal_reads), args.repeat)
    print(f"numpy fallback : {t_py * 1e3:9.1f} ms")
    if backend.compiled_anneal_reads is None:
        print("compiled kernel: not built (FERL_PURE_PYTHON set or extension missing)")
        return
    t_c, s_c = best_of(lambda: anneal_keys(problem, params, keys, kernel=backend.compiled_anneal_reads), args.repeat)
    flips = sites * args.sweeps * args.reads
    print(f"cython kernel  : {t_c * 1e3:9.1f} ms  ({flips / t_c / 1e6:.1f} M proposals/s)")
    print(f"speed-up       : {t_py / t_c:9.1f}x")
    print(f"bit-identical  : {bool(np.array_equal(s_py, s_c))}")


if __name__ == "__main__":
    main()
