"""Matrix foundations: field handling, banded storage, TIN validation, impulse responses.

Real mode is used whenever every input is real (or complex with identically zero
imaginary parts); outputs computed in real mode are plain float64 arrays, so no
imaginary residue can appear downstream.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotInputNormal, NotTriangular

__all__ = [
    "as_field",
    "is_real",
    "default_tol",
    "LowerBanded",
    "InputPair",
    "TinPair",
    "ImpulseBlock",
    "BandFraction",
    "MinorReport",
    "validate_tin",
    "principal_minor_check",
    "impulse_response",
    "gram_defect",
]

TOL_ENV = "BANDFRAC_TOL"


def as_field(x, *, ndim=None) -> np.ndarray:
    """Convert to float64, or complex128 when some imaginary part is nonzero."""
    a = np.asarray(x)
    if np.iscomplexobj(a):
        if np.all(a.imag == 0):
            a = np.ascontiguousarray(a.real, dtype=np.float64)
        else:
            a = a.astype(np.complex128)
    else:
        a = a.astype(np.float64)
    if ndim is not None and a.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {a.shape}")
    return a


def is_real(*arrays) -> bool:
    return not any(np.iscomplexobj(a) for a in arrays)


def default_tol(n: int) -> float:
    """Default validation tolerance 1e-12*n, overridable through BANDFRAC_TOL."""
    env = os.environ.get(TOL_ENV)
    if env:
        return float(env)
    return 1e-12 * n


def _herm(a):
    return a.conj().T


@dataclass(frozen=True)
class LowerBanded:
    """Lower-triangular matrix with bandwidth ``d``, stored diagonal-major.

    ``diagonals[k]`` holds the k-th subdiagonal (length n-k), entries
    ``(k, 0), (k+1, 1), ...``. Entries outside the band are never stored.
    """

    diagonals: tuple

    def __post_init__(self):
        diags = tuple(as_field(dg, ndim=1) for dg in self.diagonals)
        if not diags:
            raise DimensionMismatch("need at least the main diagonal")
        n = diags[0].shape[0]
        if n < 1:
            raise DimensionMismatch("order must be >= 1")
        if len(diags) > n:
            raise DimensionMismatch(f"bandwidth {len(diags) - 1} exceeds n-1 = {n - 1}")
        for k, dg in enumerate(diags):
            if dg.shape[0] != n - k:
                raise DimensionMismatch(f"diagonal {k} has length {dg.shape[0]}, expected {n - k}")
        if not is_real(*diags):
            diags = tuple(dg.astype(np.complex128) for dg in diags)
        object.__setattr__(self, "diagonals", diags)

    @property
    def n(self) -> int:
        return self.diagonals[0].shape[0]

    @property
    def d(self) -> int:
        return len(self.diagonals) - 1

    @property
    def dtype(self):
        return self.diagonals[0].dtype

    @property
    def real(self) -> bool:
        return self.dtype != np.complex128

    @property
    def unit_diagonal(self) -> bool:
        return bool(np.all(self.diagonals[0] == 1))

    @property
    def stored_entries(self) -> int:
        return sum(dg.shape[0] for dg in self.diagonals)

    @classmethod
    def from_dense(cls, a, d: int) -> "LowerBanded":
        """Extract the band of ``a``; entries outside it are discarded, not checked."""
        a = as_field(a, ndim=2)
        n = a.shape[0]
        if a.shape != (n, n):
            raise DimensionMismatch(f"expected a square matrix, got {a.shape}")
        d = min(int(d), n - 1)
        return cls(tuple(np.diagonal(a, -k).copy() for k in range(d + 1)))

    def to_dense(self) -> np.ndarray:
        n = self.n
        out = np.zeros((n, n), dtype=self.dtype)
        idx = np.arange(n)
        for k, dg in enumerate(self.diagonals):
            out[idx[k:], idx[: n - k]] = dg
        return out

    def matvec(self, x) -> tuple[np.ndarray, int]:
        """Return ``(L @ x, multiplications)``; every stored entry is used once."""
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise DimensionMismatch(f"vector of length {self.n} expected, got {x.shape}")
        diags = self.diagonals
        y = diags[0] * x
        muls = diags[0].shape[0]
        for k in range(1, len(diags)):
            y[k:] += diags[k] * x[:-k]
            muls += diags[k].shape[0]
        return y, muls

    def solve_unit(self, r) -> tuple[np.ndarray, int]:
        """Forward substitution for unit-diagonal ``L``; returns ``(x, multiplications)``.

        The unit main diagonal is assumed, never read, and costs nothing.
        """
        n, d = self.n, self.d
        r = np.asarray(r)
        if r.shape != (n,):
            raise DimensionMismatch(f"vector of length {n} expected, got {r.shape}")
        dtype = np.result_type(self.dtype, r.dtype)
        x = np.array(r, dtype=dtype)
        sub = [dg.tolist() for dg in self.diagonals[1:]]
        xs = x.tolist()
        muls = 0
        for i in range(1, n):
            acc = xs[i]
            for k in range(1, min(i, d) + 1):
                acc -= sub[k - 1][i - k] * xs[i - k]
                muls += 1
            xs[i] = acc
        return np.asarray(xs, dtype=dtype), muls


@dataclass(frozen=True)
class InputPair:
    """State transition ``A`` (n x n) and input matrix ``B`` (n x d)."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = as_field(self.A)
        B = as_field(self.B)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A must be square, got shape {A.shape}")
        if B.ndim == 1:
            B = B[:, None]
        if B.ndim != 2 or B.shape[0] != A.shape[0] or B.shape[1] < 1:
            raise DimensionMismatch(f"B must be {A.shape[0]} x d, got shape {B.shape}")
        if not is_real(A, B):
            A, B = A.astype(np.complex128), B.astype(np.complex128)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.B.shape[1]

    @property
    def real(self) -> bool:
        return is_real(self.A)

    def transform(self, T, Tinv) -> "InputPair":
        return InputPair(T @ self.A @ Tinv, T @ self.B)


@dataclass(frozen=True)
class TinPair:
    """An input pair certified lower triangular and input normal at ``tol``."""

    pair: InputPair
    tol: float
    residual: float = field(default=0.0)

    @property
    def A(self) -> np.ndarray:
        return self.pair.A

    @property
    def B(self) -> np.ndarray:
        return self.pair.B

    @property
    def n(self) -> int:
        return self.pair.n

    @property
    def d(self) -> int:
        return self.pair.d


@dataclass(frozen=True)
class ImpulseBlock:
    """Leads ``A^(j-1) B`` for j = 1..T, stacked as a (T, n, d) array."""

    leads: np.ndarray

    @property
    def T(self) -> int:
        return self.leads.shape[0]

    def as_matrix(self) -> np.ndarray:
        """The truncated impulse-response matrix (B, AB, ..., A^(T-1)B), n x Td."""
        T, n, d = self.leads.shape
        return self.leads.transpose(1, 0, 2).reshape(n, T * d)


@dataclass(frozen=True)
class BandFraction:
    """``A = M^-1 N`` and ``B = M^-1 Bhat`` with M, N lower banded and M unit diagonal."""

    M: LowerBanded
    N: LowerBanded
    Bhat: np.ndarray

    def __post_init__(self):
        Bhat = as_field(self.Bhat)
        if Bhat.ndim == 1:
            Bhat = Bhat[:, None]
        M, N = self.M, self.N
        if M.n != N.n or Bhat.shape[0] != M.n:
            raise DimensionMismatch("M, N and Bhat must share the order n")
        if M.d != N.d:
            raise DimensionMismatch(f"M has bandwidth {M.d}, N has {N.d}")
        if not M.unit_diagonal:
            raise DimensionMismatch("M must have a unit main diagonal")
        if np.any(np.tril(Bhat, -1) != 0):
            raise DimensionMismatch("Bhat must be upper triangular")
        object.__setattr__(self, "Bhat", Bhat)

    @property
    def n(self) -> int:
        return self.M.n

    @property
    def d(self) -> int:
        """Bandwidth of M and N."""
        return self.M.d

    @property
    def inputs(self) -> int:
        return self.Bhat.shape[1]

    @property
    def real(self) -> bool:
        return self.M.real and self.N.real and is_real(self.Bhat)

    def to_pair(self) -> InputPair:
        M = self.M.to_dense()
        A = solve_triangular(M, self.N.to_dense(), lower=True, unit_diagonal=True)
        B = solve_triangular(M, self.Bhat, lower=True, unit_diagonal=True)
        return InputPair(np.tril(A), B)

    def grammian_residual(self) -> float:
        """max |MM* - NN* - Bhat Bhat*|."""
        M, N, Bh = self.M.to_dense(), self.N.to_dense(), self.Bhat
        return float(np.max(np.abs(M @ _herm(M) - N @ _herm(N) - Bh @ _herm(Bh))))


def validate_tin(pair: InputPair, tol: float | None = None) -> TinPair:
    """Certify ``pair`` as triangular input normal.

    ``A`` must be exactly lower triangular and ``max|AA* + BB* - I|`` must not
    exceed ``tol`` (default ``1e-12 * n``).
    """
    if not isinstance(pair, InputPair):
        pair = InputPair(*pair)
    n = pair.n
    if tol is None:
        tol = default_tol(n)
    if tol < 0:
        raise ValueError("tol must be non-negative")
    A, B = pair.A, pair.B
    upper = np.triu(A, 1)
    if np.any(upper != 0):
        idx = np.unravel_index(np.argmax(np.abs(upper)), upper.shape)
        raise NotTriangular(tuple(int(i) for i in idx), A[idx])
    R = A @ _herm(A) + B @ _herm(B) - np.eye(n)
    absR = np.abs(R)
    residual = float(absR.max())
    if not residual <= tol:
        idx = np.unravel_index(np.argmax(absR), absR.shape)
        raise NotInputNormal(tuple(int(i) for i in idx), residual, tol)
    return TinPair(pair, float(tol), residual)


@dataclass(frozen=True)
class MinorReport:
    minors: np.ndarray
    thresholds: np.ndarray
    ok: bool
    first_vanishing: int | None


def principal_minor_check(pair: InputPair, rel: float = 1e-10) -> MinorReport:
    """Leading principal minors of ``(B | A)`` of orders 1..n-1.

    Minors come from pivot-free elimination (running product of pivots). A minor
    is vanishing when its modulus is at most ``rel`` times the product of the row
    norms of the corresponding leading block (the Hadamard bound).
    """
    if not isinstance(pair, InputPair):
        pair = InputPair(*pair)
    n = pair.n
    orig = np.hstack([pair.B, pair.A])
    W = orig.copy()
    minors, thresholds = [], []
    prod = 1.0
    broken = False
    for k in range(1, n):
        if not broken:
            piv = W[k - 1, k - 1]
            prod = prod * piv
            if piv == 0:
                broken = True
            else:
                W[k:, :] -= np.outer(W[k:, k - 1] / piv, W[k - 1, :])
            minor = prod
        else:
            # elimination cannot continue past an exact zero pivot
            minor = np.linalg.det(orig[:k, :k])
        minors.append(minor)
        thresholds.append(rel * float(np.prod(np.linalg.norm(orig[:k, :k], axis=1))))
    minors = np.asarray(minors)
    thresholds = np.asarray(thresholds, dtype=float)
    bad = np.nonzero(np.abs(minors) <= thresholds)[0]
    first = int(bad[0]) + 1 if bad.size else None
    return MinorReport(minors, thresholds, first is None, first)


def impulse_response(pair: InputPair, T: int) -> ImpulseBlock:
    """Leads ``B, AB, ..., A^(T-1)B`` by repeated multiplication."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if not isinstance(pair, InputPair):
        pair = InputPair(*pair)
    A, B = pair.A, pair.B
    leads = np.empty((T, pair.n, pair.d), dtype=np.result_type(A, B))
    leads[0] = B
    for j in range(1, T):
        leads[j] = A @ leads[j - 1]
    return ImpulseBlock(leads)


def gram_defect(block: ImpulseBlock) -> float:
    """``max |sum_j lead_j lead_j* - I|`` over the stored leads."""
    Om = block.as_matrix()
    G = Om @ _herm(Om)
    return float(np.max(np.abs(G - np.eye(G.shape[0]))))
