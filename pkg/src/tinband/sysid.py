"""Identification of the output map over an orthonormal state basis.

The states z_t of a fixed band fraction are the regressors. Exponentially
weighted least squares is carried in square-root form: ``R`` (upper triangular,
``R* R = sum_i delta^(t-i) z_i z_i*``) is updated by Givens rotations, and the
cross moments ``sum_i delta^(t-i) z_i y_i*`` are accumulated alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .bidiag import EigenSpec, bidiag_from_eigenvalues
from .core import BandFraction, InputPair, TinPair, as_field, impulse_response, validate_tin
from .engine import run
from .errors import DimensionMismatch, SingularMoment

__all__ = [
    "RlsAccumulator",
    "IdentificationResult",
    "rls_init",
    "rls_update",
    "rls_solve",
    "conditioning",
    "lms_update",
    "identify",
    "nested_truncate",
]

SINGULAR_RTOL = 1e-10


@dataclass
class RlsAccumulator:
    """Square-root moment accumulator.

    Updated in place by ``rls_update``; the ``delta`` forgetting factor is
    fixed at construction.
    """

    R: np.ndarray
    dvec: np.ndarray
    delta: float = 1.0
    t: int = 0
    ridge: float = field(default=0.0)

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @property
    def p(self) -> int:
        return self.dvec.shape[1]

    def moment(self) -> np.ndarray:
        return self.R.conj().T @ self.R


def rls_init(n: int, p: int, delta: float = 1.0, complex_: bool = False, ridge: float = 0.0) -> RlsAccumulator:
    if not 0 < delta <= 1:
        raise ValueError("forgetting factor must lie in (0, 1]")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    dtype = np.complex128 if complex_ else np.float64
    return RlsAccumulator(np.zeros((n, n), dtype=dtype), np.zeros((n, p), dtype=dtype), float(delta), 0, float(ridge))


def _absorb_row(R, w):
    """Rotate the row ``w`` into upper-triangular ``R`` (in place), keeping diag(R) >= 0."""
    n = R.shape[0]
    for k in range(n):
        b = w[k]
        if b == 0:
            continue
        a = R[k, k].real
        r = np.hypot(a, abs(b))
        c = a / r
        s = np.conj(b) / r
        Rk = R[k, k:].copy()
        wk = w[k:]
        R[k, k:] = c * Rk + s * wk
        w[k:] = -np.conj(s) * Rk + c * wk
        R[k, k] = r
        w[k] = 0


def rls_update(acc: RlsAccumulator, z, y) -> RlsAccumulator:
    """Absorb one sample: ``R <- triu([sqrt(delta) R; z*])``, ``dvec <- delta dvec + z y*``."""
    z = np.asarray(z)
    y = np.atleast_1d(np.asarray(y))
    if z.shape != (acc.n,) or y.shape != (acc.p,):
        raise DimensionMismatch(f"expected z of length {acc.n} and y of length {acc.p}")
    if np.iscomplexobj(z) or np.iscomplexobj(y):
        if not np.iscomplexobj(acc.R):
            acc.R = acc.R.astype(np.complex128)
            acc.dvec = acc.dvec.astype(np.complex128)
    if acc.delta != 1.0:
        acc.R *= np.sqrt(acc.delta)
        acc.dvec *= acc.delta
    _absorb_row(acc.R, np.conj(z).astype(acc.R.dtype))
    acc.dvec += np.outer(z, np.conj(y))
    acc.t += 1
    return acc


def _factor(acc: RlsAccumulator) -> np.ndarray:
    if acc.ridge == 0:
        return acc.R
    R = acc.R.copy()
    root = np.sqrt(acc.ridge)
    for k in range(acc.n):
        w = np.zeros(acc.n, dtype=R.dtype)
        w[k] = root
        _absorb_row(R, w)
    return R


def rls_solve(acc: RlsAccumulator) -> np.ndarray:
    """``Chat`` (p x n) solving ``(R* R) Chat* = dvec`` by two triangular solves."""
    R = _factor(acc)
    diag = np.abs(np.diag(R))
    top = diag.max() if diag.size else 0.0
    k = int(np.argmin(diag))
    if top == 0 or diag[k] <= SINGULAR_RTOL * top:
        raise SingularMoment(float(diag[k]), k)
    w = solve_triangular(R, acc.dvec, trans="C")
    Cstar = solve_triangular(R, w)
    return Cstar.conj().T


def conditioning(acc: RlsAccumulator) -> float:
    """2-norm condition number of the weighted moment matrix ``R* R``."""
    s = np.linalg.svd(_factor(acc), compute_uv=False)
    if s[-1] == 0:
        return float("inf")
    return float((s[0] / s[-1]) ** 2)


def lms_update(C, z, y, step: float) -> np.ndarray:
    """One least-mean-squares step ``C + step (y - C z) z*``."""
    if not step > 0:
        raise ValueError("step must be positive")
    C = np.atleast_2d(np.asarray(C))
    z = np.asarray(z)
    y = np.atleast_1d(np.asarray(y))
    return C + step * np.outer(y - C @ z, np.conj(z))


@dataclass(frozen=True)
class IdentificationResult:
    Chat: np.ndarray
    impulse: np.ndarray
    delta: float
    conditioning: float
    states: np.ndarray = field(repr=False)
    history: list = field(default_factory=list, repr=False)


def _as_rep(model) -> BandFraction:
    if isinstance(model, BandFraction):
        return model
    if isinstance(model, EigenSpec):
        return bidiag_from_eigenvalues(model)
    return bidiag_from_eigenvalues(EigenSpec(model))


def identify(model, u, y, delta: float = 1.0, leads: int = 50, every_step: bool = False,
             ridge: float = 0.0, z0=None) -> IdentificationResult:
    """Fit ``y_t ~ Chat z_t`` where z_t are the basis-filter states driven by ``u``.

    ``model`` is a band fraction or an eigenvalue specification. The impulse
    estimate returned is ``Chat A^(j-1) B`` for j = 1..leads, as a
    (leads, p, inputs) array. With ``every_step`` the estimate is re-solved after
    each sample once the moment matrix is nonsingular, and collected in ``history``.
    """
    rep = _as_rep(model)
    U = as_field(u)
    if U.ndim == 1:
        U = U[:, None]
    Yo = as_field(y)
    if Yo.ndim == 1:
        Yo = Yo[:, None]
    if U.shape[0] < 1:
        raise ValueError("need at least one sample")
    if Yo.shape[0] != U.shape[0]:
        raise DimensionMismatch(f"u has {U.shape[0]} samples, y has {Yo.shape[0]}")
    Z = run(rep, U, z0)
    complex_ = np.iscomplexobj(Z) or np.iscomplexobj(Yo)
    acc = rls_init(rep.n, Yo.shape[1], delta, complex_, ridge)
    history = []
    for zt, yt in zip(Z, Yo):
        rls_update(acc, zt, yt)
        if every_step:
            try:
                history.append(rls_solve(acc))
            except SingularMoment:
                history.append(None)
    Chat = rls_solve(acc)
    pair = rep.to_pair()
    block = impulse_response(pair, leads).leads
    impulse = np.einsum("pn,tnd->tpd", Chat, block)
    return IdentificationResult(Chat, impulse, float(delta), conditioning(acc), Z, history)


def nested_truncate(pair, k: int) -> TinPair:
    """Leading k x k / k x d subpair, revalidated at the parent's tolerance."""
    if isinstance(pair, TinPair):
        tol = pair.tol
        A, B = pair.A, pair.B
    else:
        if not isinstance(pair, InputPair):
            pair = InputPair(*pair)
        A, B = pair.A, pair.B
        tol = None
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}")
    return validate_tin(InputPair(A[:k, :k], B[:k, :]), tol)
