"""Multiplication counts and wall time of the banded state update against a dense A x + B u."""
import argparse
import time
from dataclasses import dataclass

import numpy as np

from tinband import advance, bidiag_from_eigenvalues, initial_state, predicted_counts, run


@dataclass
class BenchConfig:
    sizes: tuple = (10, 30, 100, 300, 1000)
    steps: int = 2000
    seed: int = 0


def bench(cfg: BenchConfig):
    rng = np.random.default_rng(cfg.seed)
    print(f"{'n':>6} {'measured':>9} {'budget':>7} {'dense':>8} {'banded s':>9} {'dense s':>9}")
    for n in cfg.sizes:
        rep = bidiag_from_eigenvalues(rng.uniform(-0.95, 0.95, n))
        s = advance(initial_state(rep), [1.0])
        pair = rep.to_pair()
        u = rng.standard_normal(cfg.steps)

        t0 = time.perf_counter()
        run(rep, u)
        t_band = time.perf_counter() - t0

        t0 = time.perf_counter()
        z = np.zeros(n)
        for ut in u:
            z = pair.A @ z + pair.B[:, 0] * ut
        t_dense = time.perf_counter() - t0

        budget = predicted_counts(n, 1, True)["perAdvance"]
        print(f"{n:>6} {s.mul_count:>9} {budget:>7} {n * n + n:>8} {t_band:>9.4f} {t_dense:>9.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=BenchConfig.steps)
    ap.add_argument("--seed", type=int, default=BenchConfig.seed)
    args = ap.parse_args()
    bench(BenchConfig(steps=args.steps, seed=args.seed))
