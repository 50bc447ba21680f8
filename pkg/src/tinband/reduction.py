"""Reduction of stable, controllable input pairs to triangular input normal form.

The route is: controllability Grammian P (Stein equation) -> Cholesky P = L L*
-> input normal pair (L^-1 A L, L^-1 B) -> unitary lower-triangular Schur form
with the requested eigenvalue order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .core import InputPair, TinPair, as_field, is_real, validate_tin
from .errors import (
    EigenFailure,
    NoConvergence,
    NotControllable,
    NotPositiveDefinite,
    NotStable,
    ReorderFailure,
)

__all__ = [
    "SteinSolution",
    "Similarity",
    "spectral_radius",
    "krylov_rank",
    "solve_stein",
    "stein_factor",
    "cholesky_lower",
    "schur_lower",
    "to_tin",
    "tin_from_b",
    "diagonal_phase_equivalence",
]

STABILITY_MARGIN = 1e-8
CONTROLLABILITY_RTOL = 1e-10
MAX_DOUBLINGS = 64


def _herm(a):
    return a.conj().T


@dataclass(frozen=True)
class SteinSolution:
    P: np.ndarray
    residual: float
    iterations: int


@dataclass(frozen=True)
class Similarity:
    """Coordinate change ``(A, B) -> (T A Tinv, T B)``."""

    T: np.ndarray
    Tinv: np.ndarray
    kind: str

    @property
    def unitary(self) -> bool:
        return self.kind == "unitary"


def spectral_radius(A) -> float:
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _check_stable(A):
    r = spectral_radius(A)
    if not r < 1 - STABILITY_MARGIN:
        raise NotStable(r)
    return r


def krylov_rank(A, B, rtol: float = CONTROLLABILITY_RTOL) -> int:
    """Numerical rank of the Krylov matrix ``(B, AB, ..., A^(n-1)B)``.

    Singular values below ``rtol`` times the largest do not count.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if B.ndim == 1:
        B = B[:, None]
    n = A.shape[0]
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    s = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def solve_stein(pair: InputPair) -> SteinSolution:
    """Grammian ``P = sum_j A^j B B* A^j*`` by squaring and doubling.

    ``P <- P + S P S*``, ``S <- S^2`` starting from ``P = B B*``, ``S = A``; the
    iteration stops once the update falls below ``1e-14 * |P|``.
    """
    if not isinstance(pair, InputPair):
        pair = InputPair(*pair)
    A, B = pair.A, pair.B
    _check_stable(A)
    P = B @ _herm(B)
    S = A.copy()
    for k in range(1, MAX_DOUBLINGS + 1):
        upd = S @ P @ _herm(S)
        P = P + upd
        pmax = np.max(np.abs(P))
        if np.max(np.abs(upd)) <= 1e-14 * pmax or pmax == 0:
            break
        S = S @ S
    else:
        raise NoConvergence(f"Stein doubling did not converge in {MAX_DOUBLINGS} steps")
    P = 0.5 * (P + _herm(P))
    residual = float(np.max(np.abs(P - A @ P @ _herm(A) - B @ _herm(B))))
    return SteinSolution(P, residual, k)


def stein_factor(pair: InputPair) -> np.ndarray:
    """Cholesky factor of the Grammian without forming ``P``.

    The same squaring-and-doubling series run on a square root: ``Z <- (Z, S Z)``
    compressed back to an n x n lower-triangular factor by an LQ step, so the
    factor is accurate to roughly ``sqrt(cond(P))`` rather than ``cond(P)``.
    """
    if not isinstance(pair, InputPair):
        pair = InputPair(*pair)
    A, B = pair.A, pair.B
    _check_stable(A)
    n = pair.n
    Z = B.copy()
    S = A.copy()
    for _ in range(MAX_DOUBLINGS):
        W = S @ Z
        _, R = np.linalg.qr(_herm(np.hstack([Z, W])), mode="reduced")
        Z = _herm(R)
        zmax = np.max(np.abs(Z))
        if np.max(np.abs(W)) <= 1e-15 * zmax or zmax == 0:
            break
        S = S @ S
    else:
        raise NoConvergence(f"Stein doubling did not converge in {MAX_DOUBLINGS} steps")
    if Z.shape[1] < n:
        raise NotPositiveDefinite(Z.shape[1], 0.0)
    L = Z[:, :n]
    diag = np.diag(L)
    if np.any(diag == 0):
        raise NotPositiveDefinite(int(np.argmin(np.abs(diag))), 0.0)
    # right-multiplying by a diagonal unitary keeps L L* and makes the diagonal positive
    return np.tril(L * (np.conj(diag) / np.abs(diag))[None, :])


def cholesky_lower(P) -> np.ndarray:
    """Lower-triangular ``L`` with positive diagonal and ``L L* = P``."""
    P = as_field(P, ndim=2)
    n = P.shape[0]
    if P.shape != (n, n):
        raise ValueError(f"P must be square, got {P.shape}")
    L = np.zeros_like(P)
    for j in range(n):
        row = L[j, :j]
        piv = (P[j, j] - np.vdot(row, row)).real
        if not piv > 0:
            raise NotPositiveDefinite(j, float(piv))
        L[j, j] = math.sqrt(piv)
        if j + 1 < n:
            L[j + 1 :, j] = (P[j + 1 :, j] - L[j + 1 :, :j] @ row.conj()) / L[j, j]
    return L


def _resolve_order(w, order) -> np.ndarray:
    n = w.shape[0]
    if isinstance(order, str):
        if order == "as-computed":
            return np.arange(n)
        # moduli equal to ~1e-9 (conjugate pairs) are ordered by angle, so the order
        # does not depend on rounding noise in the eigensolver
        mag = np.round(np.abs(w), 9)
        ang = np.angle(w)
        if order == "ascending":
            return np.lexsort((ang, mag))
        if order == "descending":
            return np.lexsort((ang, -mag))
        raise ReorderFailure(f"unknown ordering {order!r}")
    perm = np.asarray(order, dtype=int)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ReorderFailure(f"{order!r} is not a permutation of range({n})")
    return perm


def schur_lower(A, order="as-computed") -> tuple[np.ndarray, np.ndarray]:
    """Unitary ``Q`` with ``Q A Q*`` lower triangular, diagonal in the requested order.

    ``order`` is ``"as-computed"`` (eigen-solver order), ``"ascending"`` or
    ``"descending"`` in modulus, or an explicit permutation of the computed
    eigenvalues. ``Q*`` is the Q factor of the ordered eigenvector matrix of
    ``A*``, so ``Q A* Q*`` is upper triangular and its conjugate transpose is the
    lower form. Only numerically diagonalizable matrices are supported.
    """
    A = as_field(A, ndim=2)
    n = A.shape[0]
    try:
        w, V = np.linalg.eig(_herm(A))
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    w = np.conj(w)
    perm = _resolve_order(w, order)
    U, R = np.linalg.qr(V[:, perm])
    rdiag = np.abs(np.diag(R))
    if rdiag.min() <= 1e-10 * rdiag.max():
        raise EigenFailure("eigenvector matrix is numerically singular (defective or repeated eigenvalues)")
    if is_real(A) and not np.iscomplexobj(U):
        U = U.real
    Q = _herm(U)
    Atri = Q @ A @ U
    scale = max(np.linalg.norm(A, 2), np.finfo(float).tiny)
    upper = np.abs(np.triu(Atri, 1))
    if n > 1 and upper.max() > 1e-9 * scale:
        raise EigenFailure(f"triangularization residual {upper.max():.3e} too large")
    return Q, np.tril(Atri)


def to_tin(pair: InputPair, order="as-computed", tol: float | None = None) -> tuple[TinPair, Similarity]:
    """Similar TIN pair ``(T A T^-1, T B)`` and the similarity ``T = Q L^-1``."""
    if not isinstance(pair, InputPair):
        pair = InputPair(*pair)
    n = pair.n
    _check_stable(pair.A)
    rank = krylov_rank(pair.A, pair.B)
    if rank < n:
        raise NotControllable(rank, n)
    try:
        L = stein_factor(pair)
    except NotPositiveDefinite as exc:
        raise NotControllable(exc.index, n) from exc
    Ahat = solve_triangular(L, pair.A @ L, lower=True)
    Bhat = solve_triangular(L, pair.B, lower=True)
    Q, Atil = schur_lower(Ahat, order)
    Btil = Q @ Bhat
    Tinv = L @ _herm(Q)
    T = Q @ solve_triangular(L, np.eye(n, dtype=L.dtype), lower=True)
    tin = validate_tin(InputPair(Atil, Btil), 1e-10 * n if tol is None else tol)
    defect = np.max(np.abs(T @ _herm(T) - np.eye(n)))
    kind = "unitary" if defect <= 1e-10 * n else "general"
    return tin, Similarity(T, Tinv, kind)


def tin_from_b(B, phases=None, tol: float | None = None) -> TinPair:
    """``A = cholesky(I - B B*) diag(phases)``; real inputs require phases of +-1."""
    B = as_field(B)
    if B.ndim == 1:
        B = B[:, None]
    n = B.shape[0]
    if phases is None:
        phases = np.ones(n)
    phases = as_field(phases, ndim=1)
    if phases.shape != (n,):
        raise ValueError(f"need {n} phases, got {phases.shape}")
    if not np.allclose(np.abs(phases), 1.0, rtol=0, atol=1e-14):
        raise ValueError("phases must have unit modulus")
    if is_real(B) and np.iscomplexobj(phases):
        raise ValueError("a real B takes a signature matrix (phases +-1)")
    L = cholesky_lower(np.eye(n) - B @ _herm(B))
    return validate_tin(InputPair(L * phases[None, :], B), tol)


def diagonal_phase_equivalence(p1: TinPair, p2: TinPair, tol: float = 1e-8):
    """Diagonal unitary ``E`` with ``E A1 E* = A2`` and ``E B1 = B2``, or None."""
    A1, B1, A2, B2 = p1.A, p1.B, p2.A, p2.B
    if A1.shape != A2.shape or B1.shape != B2.shape:
        return None
    if np.max(np.abs(np.diag(A1) - np.diag(A2))) > tol:
        return None
    n = A1.shape[0]
    e = np.ones(n, dtype=np.complex128)
    for i in range(n):
        # first usable relation fixes the phase: from B directly, else from A against an earlier row
        k = int(np.argmax(np.abs(B1[i])))
        if abs(B1[i, k]) > tol:
            e[i] = B2[i, k] / B1[i, k]
        elif i > 0 and np.max(np.abs(A1[i, :i])) > tol:
            j = int(np.argmax(np.abs(A1[i, :i])))
            e[i] = A2[i, j] / A1[i, j] * e[j]
        if abs(e[i]) == 0:
            return None
        e[i] /= abs(e[i])
    if is_real(A1, B1, A2, B2) and np.all(np.abs(e.imag) <= tol):
        e = np.sign(e.real)
    E = np.diag(e)
    ok_a = np.max(np.abs(E @ A1 @ _herm(E) - A2)) <= tol
    ok_b = np.max(np.abs(E @ B1 - B2)) <= tol
    return E if ok_a and ok_b else None
