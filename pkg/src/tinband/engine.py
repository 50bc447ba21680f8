"""State advance ``M z_{t+1} = N z_t + Bhat eps_t`` with multiplication accounting.

Only multiplications by stored factor entries are counted. The unit diagonal of
M costs nothing, and additions are free. One complex product counts as one
multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter

from .core import BandFraction, as_field
from .errors import DimensionMismatch

__all__ = [
    "FilterState",
    "initial_state",
    "advance",
    "run",
    "run_counted",
    "output",
    "predicted_counts",
    "advance_cost",
]


@dataclass(frozen=True)
class FilterState:
    rep: BandFraction
    z: np.ndarray
    t: int = 0
    mul_count: int = 0


def _bhat_nonzeros(rep: BandFraction):
    """Structural nonzeros of the upper-triangular Bhat as (row, col) index arrays."""
    rows, cols = np.triu_indices(rep.n, 0, rep.inputs)
    return rows, cols


def advance_cost(rep: BandFraction) -> int:
    """Multiplications per advance: stored entries of N, of upper-triangular Bhat,
    and of the strict lower band of M."""
    rows, _ = _bhat_nonzeros(rep)
    return rep.N.stored_entries + rows.size + (rep.M.stored_entries - rep.n)


def predicted_counts(n: int, d: int, real: bool = True) -> dict:
    """Budget of multiplications per advance: 3n for real single-input, else (2d+1)n."""
    if n < 1 or d < 1 or d > n:
        raise ValueError(f"need n >= 1 and 1 <= d <= n, got n={n}, d={d}")
    per = 3 * n if (d == 1 and real) else (2 * d + 1) * n
    return {"perAdvance": per}


def initial_state(rep: BandFraction, z0=None) -> FilterState:
    if z0 is None:
        dtype = np.float64 if rep.real else np.complex128
        z = np.zeros(rep.n, dtype=dtype)
    else:
        z = as_field(z0, ndim=1)
        if z.shape != (rep.n,):
            raise DimensionMismatch(f"state of length {rep.n} expected, got {z.shape}")
    return FilterState(rep, z)


def advance(state: FilterState, eps) -> FilterState:
    """One step: ``r = N z + Bhat eps``, then forward substitution ``M z' = r``."""
    rep = state.rep
    eps = np.atleast_1d(np.asarray(eps))
    if eps.shape != (rep.inputs,):
        raise DimensionMismatch(f"input of length {rep.inputs} expected, got {eps.shape}")
    r, muls = rep.N.matvec(state.z)
    rows, cols = _bhat_nonzeros(rep)
    if rows.size:
        r = r.astype(np.result_type(r, rep.Bhat, eps), copy=False)
        np.add.at(r, rows, rep.Bhat[rows, cols] * eps[cols])
        muls += rows.size
    z, solve_muls = rep.M.solve_unit(r)
    return replace(state, z=z, t=state.t + 1, mul_count=state.mul_count + muls + solve_muls)


def _inputs_matrix(rep: BandFraction, inputs) -> np.ndarray:
    U = as_field(inputs)
    if U.ndim == 1:
        U = U[:, None]
    if U.ndim != 2 or U.shape[1] != rep.inputs:
        raise DimensionMismatch(f"inputs must be T x {rep.inputs}, got {np.shape(inputs)}")
    return U


def run(rep: BandFraction, inputs, z0=None) -> np.ndarray:
    """States after each input row: row t of the result is z after consuming ``inputs[t]``.

    Same recursion as repeated ``advance`` but swept one state coordinate at a
    time over the whole record: given the full trajectories of coordinates
    ``< i``, coordinate i obeys a scalar first-order recursion with pole ``N[i, i]``.
    """
    U = _inputs_matrix(rep, inputs)
    T = U.shape[0]
    n = rep.n
    z0 = initial_state(rep, z0).z
    dtype = np.result_type(z0, U, rep.Bhat, rep.M.dtype, rep.N.dtype)
    Z = np.zeros((T, n), dtype=dtype)
    if T == 0:
        return Z
    drive = U @ np.triu(rep.Bhat).T  # T x n
    Mdiag, Ndiag = rep.M.diagonals, rep.N.diagonals
    for i in range(n):
        g = drive[:, i].astype(dtype, copy=True)
        for k in range(1, min(i, rep.d) + 1):
            j = i - k
            prev = np.concatenate([[z0[j]], Z[:-1, j]])
            g += Ndiag[k][j] * prev
            g -= Mdiag[k][j] * Z[:, j]
        a = Ndiag[0][i]
        Z[:, i] = lfilter([1.0], [1.0, -a], g, zi=[a * z0[i]])[0]
    return Z


def run_counted(rep: BandFraction, inputs, z0=None) -> tuple[np.ndarray, FilterState]:
    """``run`` through explicit ``advance`` calls, returning states and the final FilterState."""
    U = _inputs_matrix(rep, inputs)
    state = initial_state(rep, z0)
    out = np.zeros((U.shape[0], rep.n), dtype=np.result_type(state.z, U, rep.Bhat, rep.M.dtype, rep.N.dtype))
    for t, eps in enumerate(U):
        state = advance(state, eps)
        out[t] = state.z
    return out, state


def output(C, z) -> np.ndarray:
    C = np.atleast_2d(np.asarray(C))
    z = np.asarray(z)
    if C.shape[-1] != z.shape[-1]:
        raise DimensionMismatch(f"C has {C.shape[-1]} columns, state has {z.shape[-1]} entries")
    return z @ C.T if z.ndim == 2 else C @ z
