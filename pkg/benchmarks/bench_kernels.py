"""Benchmark the numba and numpy kernel backends against each other.

Builds a synthetic CSR batch shaped like real hashed-text data (a few
dozen non-zeros per row) and times one training epoch and one forward
pass per backend. The first numba call is excluded from timing via a
warm-up run (JIT compilation).

Usage:
    python3 benchmarks/bench_kernels.py [--rows 20000] [--dim 262144] [--repeat 5]
"""

import argparse
import time

import numpy as np

from annodis.kernels import implementations


def make_batch(rows, dim, classes, nnz_per_row, seed):
    rng = np.random.default_rng(seed)
    indptr = np.arange(0, (rows + 1) * nnz_per_row, nnz_per_row, dtype=np.int64)
    indices = rng.integers(0, dim, size=rows * nnz_per_row, dtype=np.int64)
    data = rng.uniform(0.01, 1.0, size=rows * nnz_per_row)
    raw = rng.uniform(0.1, 1.0, size=(rows, classes))
    targets = raw / raw.sum(axis=1, keepdims=True)
    order = np.arange(rows, dtype=np.int64)
    rng.shuffle(order)
    return indptr, indices, data, targets, order


def bench_once(impl, indptr, indices, data, targets, order, dim, classes, batch_size):
    W = np.zeros((classes, dim))
    b = np.zeros(classes)
    t0 = time.perf_counter()
    loss = impl["sgd_epoch"](W, b, indptr, indices, data, targets, order, batch_size, 0.1, 1e-4)
    t_epoch = time.perf_counter() - t0
    t0 = time.perf_counter()
    impl["forward_probs"](W, b, indptr, indices, data)
    t_forward = time.perf_counter() - t0
    return t_epoch, t_forward, loss


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=20000)
    ap.add_argument("--dim", type=int, default=1 << 18)
    ap.add_argument("--classes", type=int, default=3)
    ap.add_argument("--nnz", type=int, default=40, help="non-zeros per row")
    ap.add_argument("--batch-size", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    batch = make_batch(args.rows, args.dim, args.classes, args.nnz, args.seed)
    impls = implementations()
    print(f"rows={args.rows} dim={args.dim} classes={args.classes} "
          f"nnz/row={args.nnz} batch_size={args.batch_size} repeat={args.repeat}")
    print(f"{'backend':<8} {'epoch (ms)':>12} {'forward (ms)':>14} {'loss':>12}")

    results = {}
    for name, impl in sorted(impls.items()):
        # warm-up (triggers JIT compilation for numba)
        bench_once(impl, *batch, args.dim, args.classes, args.batch_size)
        epochs, forwards, loss = [], [], None
        for _ in range(args.repeat):
            t_epoch, t_forward, loss = bench_once(
                impl, *batch, args.dim, args.classes, args.batch_size
            )
            epochs.append(t_epoch)
            forwards.append(t_forward)
        results[name] = (min(epochs), min(forwards))
        print(f"{name:<8} {min(epochs) * 1e3:>12.1f} {min(forwards) * 1e3:>14.1f} {loss:>12.6f}")

    if len(results) == 2:
        speedup = results["numpy"][0] / results["numba"][0]
        print(f"\nnumba epoch speedup over numpy: {speedup:.1f}x")


if __name__ == "__main__":
    main()
