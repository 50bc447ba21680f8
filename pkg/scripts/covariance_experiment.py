"""State covariance of a white-noise-driven TIN filter versus record length."""
import argparse
from dataclasses import dataclass

import numpy as np

from tinband import bidiag_from_eigenvalues, run


@dataclass
class CovConfig:
    n: int = 10
    lengths: tuple = (1_000, 10_000, 100_000)
    seeds: int = 20
    rmax: float = 0.9
    seed: int = 0


def experiment(cfg: CovConfig):
    rng = np.random.default_rng(cfg.seed)
    lam = rng.uniform(0, cfg.rmax, cfg.n) * np.exp(2j * np.pi * rng.random(cfg.n))
    rep = bidiag_from_eigenvalues(lam)
    print(f"{'T':>8} {'median max|cov-I|':>18} {'worst':>8}")
    for T in cfg.lengths:
        errs = []
        for s in range(cfg.seeds):
            Z = run(rep, np.random.default_rng(s).standard_normal(T))
            errs.append(np.abs(Z.T @ Z.conj() / T - np.eye(cfg.n)).max())
        print(f"{T:>8} {np.median(errs):>18.4f} {max(errs):>8.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=CovConfig.n)
    ap.add_argument("--seeds", type=int, default=CovConfig.seeds)
    args = ap.parse_args()
    experiment(CovConfig(n=args.n, seeds=args.seeds))
