"""Single-input band fractions parameterized by their eigenvalues.

For poles ``lam[0..n-1]`` inside the unit disk put ``rho_k = sqrt(1 - |lam_k|^2)``,
``mu_k = rho_{k+1} / rho_k`` and ``gamma_k = conj(lam_k) * mu_k``. Then

    M = bidiag(1, ..., 1 ; gamma_1, ..., gamma_{n-1})
    N = bidiag(lam_1, ..., lam_n ; mu_1, ..., mu_{n-1})

and ``(M^-1 N, rho_1 M^-1 e_1)`` is a triangular input normal pair whose
diagonal is exactly ``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .core import BandFraction, LowerBanded, as_field
from .errors import RepeatedEigenvalue, UnstableEigenvalue

__all__ = [
    "EigenSpec",
    "ConditioningReport",
    "sort_ascending",
    "bidiag_from_eigenvalues",
    "normalized_bidiag",
    "m_inverse_closed_form",
    "eigenvector_matrix",
    "conditioning_report",
    "basis_functions",
]

ORDERS = ("as-given", "ascending")


@dataclass(frozen=True)
class EigenSpec:
    """Ordered poles, all strictly inside the unit disk.

    With ``order="ascending"`` the poles are stably sorted by magnitude at
    construction; ``lambdas`` always holds the effective order.
    """

    lambdas: np.ndarray
    order: str = "as-given"

    def __post_init__(self):
        lam = as_field(np.atleast_1d(self.lambdas), ndim=1)
        if lam.size == 0:
            raise ValueError("at least one eigenvalue is required")
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order!r}")
        if self.order == "ascending":
            lam = lam[np.argsort(np.abs(lam), kind="stable")]
        mag = np.abs(lam)
        bad = np.nonzero(~(mag < 1))[0]
        if bad.size:
            raise UnstableEigenvalue(int(bad[0]), lam[bad[0]].item())
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def n(self) -> int:
        return self.lambdas.shape[0]

    @property
    def real(self) -> bool:
        return self.lambdas.dtype != np.complex128

    @property
    def rho(self) -> np.ndarray:
        return np.sqrt(1.0 - np.abs(self.lambdas) ** 2)

    @property
    def mu(self) -> np.ndarray:
        rho = self.rho
        return rho[1:] / rho[:-1]

    @property
    def gamma(self) -> np.ndarray:
        return np.conj(self.lambdas[:-1]) * self.mu

    @property
    def is_ascending(self) -> bool:
        mag = np.abs(self.lambdas)
        return bool(np.all(mag[1:] >= mag[:-1]))


def _spec(spec) -> EigenSpec:
    return spec if isinstance(spec, EigenSpec) else EigenSpec(spec)


def sort_ascending(spec) -> EigenSpec:
    """Stable sort by modulus; ties keep their input order."""
    return EigenSpec(_spec(spec).lambdas, order="ascending")


def bidiag_from_eigenvalues(spec) -> BandFraction:
    spec = _spec(spec)
    lam = spec.lambdas
    M = LowerBanded((np.ones(spec.n), spec.gamma) if spec.n > 1 else (np.ones(1),))
    N = LowerBanded((lam.copy(), spec.mu) if spec.n > 1 else (lam.copy(),))
    Bhat = np.zeros((spec.n, 1))
    Bhat[0, 0] = spec.rho[0]
    return BandFraction(M, N, Bhat)


def normalized_bidiag(spec) -> tuple[LowerBanded, LowerBanded]:
    """The left-scaled pair ``M0 = D M``, ``N0 = D N`` with ``D = diag(1/rho)``.

    ``M0 = bidiag(c ; conj(s)[:-1])`` and ``N0 = bidiag(s ; c[:-1])`` where
    ``c = 1/rho`` and ``s = lam/rho``.
    """
    spec = _spec(spec)
    c = 1.0 / spec.rho
    s = spec.lambdas / spec.rho
    if spec.n == 1:
        return LowerBanded((c,)), LowerBanded((s,))
    return LowerBanded((c, np.conj(s[:-1]))), LowerBanded((s, c[:-1]))


def m_inverse_closed_form(spec) -> np.ndarray:
    """Dense ``M^-1`` from its product formula.

    ``(M^-1)[i, j] = (-1)^(i-j) * (rho_i / rho_j) * prod_{j <= k < i} conj(lam_k)``
    for ``i > j``; unit diagonal; zero above.
    """
    spec = _spec(spec)
    n = spec.n
    rho = spec.rho
    lamc = np.conj(spec.lambdas)
    out = np.zeros((n, n), dtype=spec.lambdas.dtype)
    for j in range(n):
        out[j, j] = 1.0
        if j + 1 < n:
            # running product conj(lam_j) ... conj(lam_{i-1}) with alternating sign
            prods = np.cumprod(-lamc[j : n - 1])
            out[j + 1 :, j] = prods * (rho[j + 1 :] / rho[j])
    return out


def eigenvector_matrix(spec) -> np.ndarray:
    """Unit lower-triangular ``V`` with ``N V = M V diag(lam)``.

    Column k is the eigenvector for ``lam_k``:

        V[j, k] = rho_j rho_k / (lam_k - lam_j) * prod_{k < i < j} (1 - lam_k conj(lam_i)) / (lam_k - lam_i)
    """
    spec = _spec(spec)
    lam = spec.lambdas
    n = spec.n
    for i in range(n):
        for j in range(i + 1, n):
            if lam[i] == lam[j]:
                raise RepeatedEigenvalue(i, j)
    rho = spec.rho
    lamc = np.conj(lam)
    V = np.zeros((n, n), dtype=lam.dtype)
    for k in range(n):
        V[k, k] = 1.0
        bracket = 1.0
        for j in range(k + 1, n):
            V[j, k] = rho[j] * rho[k] / (lam[k] - lam[j]) * bracket
            bracket *= (1.0 - lam[k] * lamc[j]) / (lam[k] - lam[j])
    return V


@dataclass(frozen=True)
class ConditioningReport:
    max_entry: float
    kappa1: float
    kappa_inf: float
    kappa2: float
    kappa2_bound: float
    ascending: bool

    @property
    def bounded(self) -> bool | None:
        """Whether the ascending-order guarantees hold; None if the order is not ascending."""
        if not self.ascending:
            return None
        return self.max_entry < 1 and self.kappa2 <= self.kappa2_bound


def conditioning_report(spec) -> ConditioningReport:
    spec = _spec(spec)
    n = spec.n
    M = bidiag_from_eigenvalues(spec).M.to_dense()
    Minv = m_inverse_closed_form(spec)
    strict = np.abs(np.tril(Minv, -1))
    max_entry = float(strict.max()) if n > 1 else 0.0
    k1 = np.linalg.norm(M, 1) * np.linalg.norm(Minv, 1)
    kinf = np.linalg.norm(M, np.inf) * np.linalg.norm(Minv, np.inf)
    sv = np.linalg.svd(M, compute_uv=False)
    return ConditioningReport(
        max_entry=max_entry,
        kappa1=float(k1),
        kappa_inf=float(kinf),
        kappa2=float(sv[0] / sv[-1]),
        kappa2_bound=2.0 * n,
        ascending=spec.is_ascending,
    )


def basis_functions(spec, T: int, alpha: int = 0) -> np.ndarray:
    """First ``T`` leads of the orthonormal basis functions, one row per function.

    Row k is generated from row k-1 by the coupled first-order recursion

        z_k(t+1) - lam_k z_k(t) = mu_{k-1} z_{k-1}(t) - gamma_{k-1} z_{k-1}(t+1)

    seeded with a unit impulse ``z_0(t) = [t == -alpha]`` (and ``mu_0 = rho_1``,
    ``gamma_0 = 0``). The returned columns are times ``1-alpha .. T-alpha``, i.e.
    the leads that follow the impulse, so the matrix does not depend on alpha.
    """
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1")
    if T < 1:
        raise ValueError("T must be >= 1")
    spec = _spec(spec)
    lam = spec.lambdas
    mu = np.concatenate([[spec.rho[0]], spec.mu])
    gamma = np.concatenate([[0.0], spec.gamma])
    prev = np.zeros(T + 1, dtype=lam.dtype)
    prev[0] = 1.0
    out = np.empty((spec.n, T), dtype=lam.dtype)
    for k in range(spec.n):
        cur = lfilter([-gamma[k], mu[k]], [1.0, -lam[k]], prev)
        out[k] = cur[1:]
        prev = cur
    return out

