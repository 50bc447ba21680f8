"""Regression conditioning with companion-form states versus TIN basis states, same poles."""
import argparse
from dataclasses import dataclass

import numpy as np

from tinband import bidiag_from_eigenvalues, conditioning, rls_init, rls_update, run


@dataclass
class ContrastConfig:
    n: int = 6
    centre: float = 0.9
    spacing: float = 0.01
    multiples: tuple = (20, 100, 1000)
    seed: int = 3


def companion_states(poles, u):
    a = np.poly(poles).real
    n = len(poles)
    A = np.zeros((n, n))
    A[0] = -a[1:]
    A[1:, :-1] = np.eye(n - 1)
    z = np.zeros(n)
    out = np.empty((len(u), n))
    for t, ut in enumerate(u):
        z = A @ z
        z[0] += ut
        out[t] = z
    return out


def cond_of(Z):
    acc = rls_init(Z.shape[1], 1)
    for z in Z:
        rls_update(acc, z, [0.0])
    return conditioning(acc)


def contrast(cfg: ContrastConfig):
    poles = cfg.centre + cfg.spacing * np.arange(cfg.n)
    u = np.random.default_rng(cfg.seed).standard_normal(max(cfg.multiples) * cfg.n)
    rep = bidiag_from_eigenvalues(poles)
    print(f"poles {np.round(poles, 3)}")
    print(f"{'t':>8} {'companion':>12} {'TIN':>8}")
    for m in cfg.multiples:
        uu = u[: m * cfg.n]
        print(f"{m * cfg.n:>8} {cond_of(companion_states(poles, uu)):>12.3g} {cond_of(run(rep, uu)):>8.3g}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=ContrastConfig.n)
    ap.add_argument("--centre", type=float, default=ContrastConfig.centre)
    ap.add_argument("--spacing", type=float, default=ContrastConfig.spacing)
    args = ap.parse_args()
    contrast(ContrastConfig(n=args.n, centre=args.centre, spacing=args.spacing))
