"""Command-line front end: ``tinband <command> ...``.

Exit status: 0 success, 1 I/O or parse error, 2 invalid model, 3 unstable or
uncontrollable input, 4 rank-deficient identification data.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import io as tio
from .bidiag import EigenSpec, bidiag_from_eigenvalues, conditioning_report
from .core import BandFraction, InputPair, default_tol, impulse_response, validate_tin
from .engine import advance, initial_state, output, predicted_counts, run
from .errors import (
    BandwidthViolation,
    DimensionMismatch,
    EigenFailure,
    NoConvergence,
    NotControllable,
    NotInputNormal,
    NotPositiveDefinite,
    NotStable,
    NotTriangular,
    RankDeficient,
    ReorderFailure,
    RepeatedEigenvalue,
    SingularMoment,
    UnstableEigenvalue,
    ZeroPivot,
)
from .reduction import to_tin
from .sysid import identify

EXIT_OK, EXIT_IO, EXIT_MODEL, EXIT_STABILITY, EXIT_RANK = 0, 1, 2, 3, 4

_EXIT_FOR = [
    (SingularMoment, EXIT_RANK),
    ((NotStable, NotControllable, NoConvergence), EXIT_STABILITY),
    (
        (UnstableEigenvalue, NotTriangular, NotInputNormal, ZeroPivot, BandwidthViolation, RankDeficient,
         RepeatedEigenvalue, NotPositiveDefinite, EigenFailure, ReorderFailure),
        EXIT_MODEL,
    ),
    ((OSError, ValueError, KeyError, TypeError, json.JSONDecodeError, DimensionMismatch), EXIT_IO),
]


def _tol(args, n):
    return args.tol if args.tol is not None else default_tol(n)


def _load_model(path) -> BandFraction:
    """A band-fraction file or an eigenvalue spec."""
    obj = tio.read_json(path)
    if isinstance(obj, dict) and "lambdas" in obj:
        return bidiag_from_eigenvalues(tio.eigenspec_from_json(obj))
    return tio.bandfrac_from_json(obj)


def _tin_residual(pair: InputPair) -> float:
    A, B = pair.A, pair.B
    return float(np.max(np.abs(A @ A.conj().T + B @ B.conj().T - np.eye(pair.n))))


def cmd_synth(args) -> int:
    spec = tio.eigenspec_from_json(tio.read_json(args.spec))
    bf = bidiag_from_eigenvalues(spec)
    pair = bf.to_pair()
    validate_tin(pair, _tol(args, spec.n))
    rep = conditioning_report(spec)
    out = tio.bandfrac_to_json(bf)
    out["report"] = {
        "tinResidual": _tin_residual(pair),
        "maxInverseEntry": rep.max_entry,
        "kappa2": rep.kappa2,
        "kappa2Bound": rep.kappa2_bound,
        "ascending": rep.ascending,
    }
    tio.write_text(args.out, tio.dumps(out))
    return EXIT_OK


def _leads(A, B, C, J):
    out, X = [], B
    for _ in range(J):
        out.append(C @ X)
        X = A @ X
    return np.array(out)


def cmd_reduce(args) -> int:
    pair, C = tio.pair_from_json(tio.read_json(args.pair))
    order = args.order
    if order not in ("as-computed", "ascending", "descending"):
        order = [int(k) for k in order.split(",")]
    tin, sim = to_tin(pair, order=order, tol=args.tol)
    Cc = np.eye(pair.n) if C is None else C
    orig = _leads(pair.A, pair.B, Cc, args.leads)
    new = _leads(tin.A, tin.B, Cc @ sim.Tinv, args.leads)
    rel = float(np.max(np.abs(orig - new)) / max(np.max(np.abs(orig)), np.finfo(float).tiny))
    out = {
        "A": tio.matrix_to_json(tin.A),
        "B": tio.matrix_to_json(tin.B),
        "T": tio.matrix_to_json(sim.T),
        "Tinv": tio.matrix_to_json(sim.Tinv),
        "unitary": sim.unitary,
        "report": {"tinResidual": tin.residual, "leads": args.leads, "impulseRelError": rel},
    }
    if C is not None:
        out["C"] = tio.matrix_to_json(Cc @ sim.Tinv)
    tio.write_text(args.out, tio.dumps(out))
    return EXIT_OK


def cmd_filter(args) -> int:
    rep = _load_model(args.model)
    eps = tio.read_series_csv(args.input, "eps")
    Z = run(rep, eps)
    cols = {"z": Z}
    if args.C is not None:
        C = tio.matrix_from_json(tio.read_json(args.C))
        cols["y"] = output(C, Z)
    tio.write_text(args.out, tio.series_to_csv(cols))
    return EXIT_OK


def cmd_impulse(args) -> int:
    rep = _load_model(args.model)
    pair = rep.to_pair()
    leads = impulse_response(pair, args.T).leads
    if args.C is not None:
        C = tio.matrix_from_json(tio.read_json(args.C))
        leads = np.einsum("pn,tnd->tpd", C, leads)
    out = {"T": args.T, "leads": [tio.matrix_to_json(x) for x in leads]}
    tio.write_text(args.out, tio.dumps(out))
    return EXIT_OK


def cmd_identify(args) -> int:
    rep = _load_model(args.model)
    u, y = tio.read_dataset_csv(args.data)
    if u.shape[1] != rep.inputs:
        raise DimensionMismatch(f"dataset has {u.shape[1]} inputs, model takes {rep.inputs}")
    res = identify(rep, u, y, delta=args.delta, leads=args.leads, ridge=args.ridge)
    out = {
        "Chat": tio.matrix_to_json(res.Chat),
        "impulse": [tio.matrix_to_json(x) for x in res.impulse],
        "delta": res.delta,
        "conditioning": res.conditioning,
    }
    tio.write_text(args.out, tio.dumps(out))
    return EXIT_OK


def _bench_rep(n, d, rng) -> BandFraction:
    if d == 1:
        return bidiag_from_eigenvalues(EigenSpec(rng.uniform(-0.9, 0.9, n)))
    from .bandfrac import YMatrix, band_fraction_from_y

    band = rng.standard_normal((n, d + 1))
    band[:, 0] = np.abs(band[:, 0]) + 1.0
    return band_fraction_from_y(YMatrix(band))


def cmd_bench(args) -> int:
    n, d, T = args.n, args.d, args.T
    pred = predicted_counts(n, d, real=True)["perAdvance"]
    rng = np.random.default_rng(args.seed)
    rep = _bench_rep(n, d, rng)
    pair = rep.to_pair()
    U = rng.standard_normal((T, d))
    state = initial_state(rep)
    t0 = time.perf_counter()
    for eps in U:
        state = advance(state, eps)
    banded_s = (time.perf_counter() - t0) / T
    A, B = pair.A, pair.B
    z = np.zeros(n)
    t0 = time.perf_counter()
    for eps in U:
        z = A @ z + B @ eps
    dense_s = (time.perf_counter() - t0) / T
    measured = state.mul_count // T
    out = {
        "n": n,
        "d": d,
        "T": T,
        "seed": args.seed,
        "measuredPerAdvance": measured,
        "predictedPerAdvance": pred,
        "withinBudget": measured <= pred,
        "denseBaselinePerAdvance": n * n + n * d,
        "countRatio": measured / (n * n + n * d),
        "finalStateDiscrepancy": float(np.max(np.abs(state.z - z))),
    }
    if args.timing:
        out["secondsPerAdvance"] = {"banded": banded_s, "dense": dense_s, "ratio": banded_s / dense_s}
    tio.write_text(args.out, tio.dumps(out))
    return EXIT_OK


def cmd_validate(args) -> int:
    obj = tio.read_json(args.model)
    if "A" in obj:
        pair, _ = tio.pair_from_json(obj)
    elif "lambdas" in obj:
        pair = bidiag_from_eigenvalues(tio.eigenspec_from_json(obj)).to_pair()
    else:
        pair = tio.bandfrac_from_json(obj).to_pair()
    tin = validate_tin(pair, _tol(args, pair.n))
    tio.write_text(args.out, tio.dumps({"tin": True, "residual": tin.residual, "tol": tin.tol}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tinband", description="Triangular input normal filters in band-fraction form.")
    p.add_argument("--tol", type=float, default=None, help="validation tolerance (default 1e-12*n or $BANDFRAC_TOL)")
    sub = p.add_subparsers(dest="command", required=True)

    def out_arg(sp):
        sp.add_argument("-o", "--out", default="-", help="output path ('-' for stdout)")

    sp = sub.add_parser("synth", help="band fraction from an eigenvalue spec")
    sp.add_argument("spec")
    out_arg(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("reduce", help="reduce an (A, B[, C]) pair to TIN form")
    sp.add_argument("pair")
    sp.add_argument("--order", default="as-computed",
                    help="as-computed, ascending, descending, or a comma-separated permutation")
    sp.add_argument("--leads", type=int, default=50)
    out_arg(sp)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("filter", help="run the state recursion over an input CSV")
    sp.add_argument("model", help="band-fraction or eigenvalue-spec JSON")
    sp.add_argument("input", help="CSV with columns t,eps_1..eps_d")
    sp.add_argument("--C", default=None, help="output matrix JSON")
    out_arg(sp)
    sp.set_defaults(func=cmd_filter)

    sp = sub.add_parser("impulse", help="first T impulse-response leads")
    sp.add_argument("model")
    sp.add_argument("--T", type=int, default=50)
    sp.add_argument("--C", default=None)
    out_arg(sp)
    sp.set_defaults(func=cmd_impulse)

    sp = sub.add_parser("identify", help="least-squares output map over the state basis")
    sp.add_argument("data", help="CSV with columns t,u_1..u_d,y_1..y_p")
    sp.add_argument("model")
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--ridge", type=float, default=0.0)
    sp.add_argument("--leads", type=int, default=50)
    out_arg(sp)
    sp.set_defaults(func=cmd_identify)

    sp = sub.add_parser("bench", help="multiplication counts and timing against a dense recursion")
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--T", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--timing", action=argparse.BooleanOptionalAction, default=True)
    out_arg(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("validate", help="check the TIN conditions")
    sp.add_argument("model", help="pair, band-fraction or eigenvalue-spec JSON")
    out_arg(sp)
    sp.set_defaults(func=cmd_validate)
    return p


def _check_ranges(args):
    for name in ("T", "n", "d", "leads"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise ValueError(f"--{name} must be >= 1")
    if getattr(args, "command", None) == "bench" and args.d > args.n:
        raise ValueError("--d must not exceed --n")
    if args.tol is not None and not args.tol > 0:
        raise ValueError("--tol must be positive")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _check_ranges(args)
        return args.func(args)
    except Exception as exc:
        for kinds, code in _EXIT_FOR:
            if isinstance(exc, kinds):
                print(f"tinband {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
