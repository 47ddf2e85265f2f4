#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times one full inference + learning cycle on a mid-size batch with each
backend and prints a comparison table. Run from the repo root:

    python3 benchmarks/bench_backends.py [--batch 256] [--repeats 3]
"""

import argparse
import time

import numpy as np

from pcnet import (InferenceSettings, LearnSettings, ModelConfig, init_latents,
                   init_weights, kernels, one_hot, run_inference, run_learning)


def cycle(config, stack, inputs, targets, t_infer, t_learn, eta_i, eta_l):
    latents = init_latents(config, inputs.shape[0], seed=7)
    settled, _, _ = run_inference(
        stack, inputs, latents, targets,
        InferenceSettings(t_infer=t_infer, eta_infer=eta_i))
    run_learning(stack, inputs, settled, targets,
                 LearnSettings(t_learn=t_learn, eta_learn=eta_l))
    return settled


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=256)
    ap.add_argument("--dims", type=int, nargs="+", default=[3072, 512, 128, 10])
    ap.add_argument("--t-infer", type=int, default=20)
    ap.add_argument("--t-learn", type=int, default=20)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    config = ModelConfig(dims=tuple(args.dims), output_dim=10)
    stack = init_weights(config, seed=0)
    rng = np.random.default_rng(1)
    inputs = rng.uniform(0, 1, size=(args.batch, args.dims[0]))
    targets = one_hot(rng.integers(0, 10, size=args.batch), 10)

    results = {}
    for backend in ("numpy", "numba"):
        try:
            kernels.use_backend(backend)
        except ImportError:
            print(f"{backend}: unavailable, skipped")
            continue
        kernels.warmup()
        cycle(config, stack, inputs, targets, 2, 2, 0.05, 0.005)  # warm caches
        best = float("inf")
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            cycle(config, stack, inputs, targets, args.t_infer, args.t_learn,
                  0.05, 0.005)
            best = min(best, time.perf_counter() - t0)
        results[backend] = best
        print(f"{backend:>6}: {best:.3f} s "
              f"(B={args.batch}, dims={args.dims}, "
              f"T_infer={args.t_infer}, T_learn={args.t_learn})")

    if len(results) == 2:
        speedup = results["numpy"] / results["numba"]
        print(f"numba speedup over numpy: {speedup:.2f}x")


if __name__ == "__main__":
    main()
