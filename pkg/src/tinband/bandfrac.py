"""Multi-input band fractions.

A TIN pair with nonvanishing leading minors of ``(B | A)`` factors without
pivoting as ``(B | A) = M^-1 (Bhat | N)`` where ``M`` is unit lower triangular
with bandwidth d and ``Y = (Bhat | N)`` is upper triangular with upper bandwidth
d. Conversely any full-rank such ``Y`` gives a TIN pair through the LQ
factorization ``Y = M Qhat``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .core import BandFraction, InputPair, LowerBanded, TinPair, as_field, is_real, validate_tin
from .errors import BandwidthViolation, DimensionMismatch, RankDeficient, ZeroPivot

__all__ = [
    "YMatrix",
    "YCanonical",
    "lr_band_fraction",
    "tin_from_y",
    "canonicalize_y",
    "band_fraction_from_y",
]

PIVOT_RTOL = 1e-12
BAND_RTOL = 1e-9


def _herm(a):
    return a.conj().T


@dataclass(frozen=True)
class YMatrix:
    """Upper-triangular n x (n+d) matrix with upper bandwidth d, stored by rows.

    ``band[i, k]`` is entry ``(i, i+k)`` for k = 0..d.
    """

    band: np.ndarray

    def __post_init__(self):
        band = as_field(self.band, ndim=2)
        if band.shape[0] < 1 or band.shape[1] < 2:
            raise DimensionMismatch(f"band must be n x (d+1) with d >= 1, got {band.shape}")
        band.setflags(write=False)
        object.__setattr__(self, "band", band)

    @property
    def n(self) -> int:
        return self.band.shape[0]

    @property
    def d(self) -> int:
        return self.band.shape[1] - 1

    @classmethod
    def from_dense(cls, Y, d: int, check: bool = True) -> "YMatrix":
        Y = as_field(Y, ndim=2)
        n = Y.shape[0]
        if Y.shape != (n, n + d):
            raise DimensionMismatch(f"expected shape {(n, n + d)}, got {Y.shape}")
        idx = np.arange(n)
        band = np.stack([Y[idx, idx + k] for k in range(d + 1)], axis=1)
        if check:
            rest = Y.copy()
            for k in range(d + 1):
                rest[idx, idx + k] = 0
            if np.any(rest != 0):
                raise BandwidthViolation("Y", float(np.max(np.abs(rest))))
        return cls(band)

    def to_dense(self) -> np.ndarray:
        n, d = self.n, self.d
        Y = np.zeros((n, n + d), dtype=self.band.dtype)
        idx = np.arange(n)
        for k in range(d + 1):
            Y[idx, idx + k] = self.band[:, k]
        return Y


@dataclass(frozen=True)
class YCanonical:
    """A ``YMatrix`` normalized so that Y[i, i] = 1 for i < n and the last row is
    a unit vector whose first nonzero entry is real and positive."""

    Y: YMatrix

    def __post_init__(self):
        band = self.Y.band
        if np.any(np.abs(band[:-1, 0] - 1) > 1e-12):
            raise ValueError("leading diagonal of Y must be 1 above the last row")
        last = band[-1]
        if abs(np.linalg.norm(last) - 1) > 1e-12:
            raise ValueError("last row of Y must have unit norm")
        nz = np.flatnonzero(last)
        if nz.size and not (last[nz[0]].real > 0 and last[nz[0]].imag == 0):
            raise ValueError("first nonzero of the last row must be real and positive")


def lr_band_fraction(pair, D=None, rtol: float = PIVOT_RTOL) -> BandFraction:
    """Pivot-free LR factorization ``(B | A) = M^-1 (Bhat | N)``.

    ``pair`` must satisfy ``D - A D A* = B B*`` (the TIN condition for the default
    ``D = I``). The factor ``M`` comes out unit lower triangular with bandwidth
    ``d``; entries outside the band larger than ``1e-9`` relative are reported as
    ``BandwidthViolation`` (a failed precondition), smaller ones are dropped.
    """
    if isinstance(pair, TinPair):
        pair = pair.pair
    elif not isinstance(pair, InputPair):
        pair = InputPair(*pair)
    A, B = pair.A, pair.B
    n, d = pair.n, pair.d
    if np.any(np.triu(A, 1) != 0):
        raise DimensionMismatch("A must be lower triangular")
    Dm = np.eye(n) if D is None else np.diag(as_field(D, ndim=1))
    if np.any(np.diag(Dm) <= 0):
        raise ValueError("D must be positive")
    stein = np.max(np.abs(Dm - A @ Dm @ _herm(A) - B @ _herm(B)))
    if stein > 1e-10 * max(1.0, np.max(np.diag(Dm))):
        raise ValueError(f"pair does not satisfy D - A D A* = B B* (residual {stein:.3e})")

    W = np.hstack([B, A]).astype(np.result_type(A, B), copy=True)
    G = np.eye(n, dtype=W.dtype)
    for k in range(n - 1):
        piv = W[k, k]
        if abs(piv) <= rtol * np.linalg.norm(W[k]):
            raise ZeroPivot(k + 1, piv.item())
        l = W[k + 1 :, k] / piv
        W[k + 1 :] -= np.outer(l, W[k])
        W[k + 1 :, k] = 0
        G[k + 1 :] -= np.outer(l, G[k])

    scale = max(1.0, float(np.max(np.abs(G))))
    outside = np.abs(np.tril(G, -d - 1))
    if outside.size and outside.max() > BAND_RTOL * scale:
        raise BandwidthViolation("M", float(outside.max()))
    Bhat = np.triu(W[:, :d])
    N = W[:, d:]
    nscale = max(1.0, float(np.max(np.abs(N))))
    n_out = max(np.max(np.abs(np.tril(N, -d - 1)), initial=0.0), np.max(np.abs(np.triu(N, 1)), initial=0.0))
    if n_out > BAND_RTOL * nscale:
        raise BandwidthViolation("N", float(n_out))
    M = LowerBanded.from_dense(G, d)
    M = LowerBanded((np.ones(n, dtype=M.dtype),) + M.diagonals[1:])
    return BandFraction(M, LowerBanded.from_dense(N, d), Bhat)


def _givens(a, b):
    """``(c, s, r)`` for the column rotation ``[x y] -> [c x + conj(s) y, -s x + c y]``
    that maps the pair ``(a, b)`` to ``(r, 0)``; c is real and non-negative."""
    if b == 0:
        return 1.0, 0.0, a
    if a == 0:
        return 0.0, b / abs(b), abs(b)
    r = np.hypot(abs(a), abs(b))
    pa = a / abs(a)
    return abs(a) / r, np.conj(pa) * b / r, pa * r


def tin_from_y(Y: YMatrix, tol: float | None = None) -> tuple[TinPair, LowerBanded]:
    """TIN pair generated by ``Y`` through the banded LQ factorization ``Y = M Qhat``.

    Column rotations sweep each row right to left, folding its d superdiagonal
    entries into the diagonal; only rows ``i .. i+d`` are touched, so the sweep
    costs O(n d^2) and ``M`` stays inside bandwidth d. ``M`` is normalized to a
    positive diagonal; then ``A = M^-1 N`` and ``B = M^-1 Bhat``.
    """
    if not isinstance(Y, YMatrix):
        Y = YMatrix(Y)
    n, d = Y.n, Y.d
    Yd = Y.to_dense()
    s = np.linalg.svd(Yd, compute_uv=False)
    if s[0] == 0 or s[-1] <= 1e-10 * s[0]:
        raise RankDeficient(f"Y has numerical rank below {n} (sigma_min/sigma_max = {s[-1] / s[0] if s[0] else 0:.3e})")
    W = Yd.copy()
    for i in range(n):
        rows = slice(i, min(n, i + d + 1))
        for j in range(i + d, i, -1):
            b = W[i, j]
            if b == 0:
                continue
            a = W[i, j - 1]
            c, s_, r = _givens(a, b)
            x = W[rows, j - 1].copy()
            y = W[rows, j].copy()
            W[rows, j - 1] = c * x + np.conj(s_) * y
            W[rows, j] = -s_ * x + c * y
            W[i, j - 1] = r
            W[i, j] = 0
    M = np.tril(W[:, :n])
    diag = np.diag(M)
    M = M * (np.conj(diag) / np.abs(diag))[None, :]
    if is_real(Yd):
        M = M.real
    Mb = LowerBanded.from_dense(M, d)
    Md = Mb.to_dense()
    A = np.tril(solve_triangular(Md, Yd[:, d:], lower=True))
    B = solve_triangular(Md, Yd[:, :d], lower=True)
    tin = validate_tin(InputPair(A, B), 1e-11 * n if tol is None else tol)
    return tin, Mb


def canonicalize_y(pair) -> tuple[YCanonical, np.ndarray]:
    """The unique canonical ``Y`` and diagonal unitary ``E`` with ``tin_from_y(Y) = (E A E*, E B)``.

    Starting from the unit-diagonal band fraction, rows are rescaled by a positive
    diagonal and the coordinates rotated by phases so that ``Y[i, i] = 1`` for
    ``i < n`` and the last row has unit norm with a positive first nonzero entry.
    """
    if isinstance(pair, TinPair):
        pair = pair.pair
    elif not isinstance(pair, InputPair):
        pair = InputPair(*pair)
    bf = lr_band_fraction(pair)
    n, d = pair.n, pair.d
    Yt = np.hstack([bf.Bhat, bf.N.to_dense()])
    e = np.ones(n, dtype=Yt.dtype)

    def col_phase(j):
        # columns < d belong to Bhat (no phase); column j >= d is N's column j-d, scaled by conj(e)
        return 1.0 if j < d else np.conj(e[j - d])

    for i in range(n - 1):
        v = Yt[i, i] * col_phase(i)
        e[i] = np.conj(v) / abs(v)
    last = n - 1
    lead = np.flatnonzero(np.abs(Yt[last]) > 0)
    if lead.size:
        j = int(lead[0])
        if j < d or j - d < last:
            v = Yt[last, j] * col_phase(j)
            e[last] = np.conj(v) / abs(v)
        else:
            # the leading entry sits on N's own diagonal: the phase cancels out
            e[last] = 1.0
    E = np.diag(e)
    Yrot = E @ np.hstack([bf.Bhat, bf.N.to_dense() @ _herm(E)])
    scale = np.empty(n)
    scale[:-1] = 1.0 / np.abs(np.diag(Yrot)[:-1])
    scale[-1] = 1.0 / np.linalg.norm(Yrot[-1])
    Yc = scale[:, None] * Yrot
    idx = np.arange(n - 1)
    Yc[idx, idx] = 1.0
    if lead.size and (lead[0] < d or lead[0] - d < last):
        Yc[last, lead[0]] = abs(Yc[last, lead[0]])
    if is_real(Yc):
        E = E.real
    return YCanonical(YMatrix.from_dense(Yc, d, check=False)), E


def band_fraction_from_y(Y: YMatrix) -> BandFraction:
    """The unit-diagonal band fraction of the pair generated by ``Y``."""
    _, Mb = tin_from_y(Y)
    Md = Mb.to_dense()
    dscale = 1.0 / np.diag(Md)
    Yd = Y.to_dense() * dscale[:, None]
    Mu = Md * dscale[:, None]
    d = Y.d
    M = LowerBanded.from_dense(Mu, d)
    M = LowerBanded((np.ones(Y.n, dtype=M.dtype),) + M.diagonals[1:])
    return BandFraction(M, LowerBanded.from_dense(Yd[:, d:], d), np.triu(Yd[:, :d]))
