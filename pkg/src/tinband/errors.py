"""Exception hierarchy shared by all modules."""


class TinError(Exception):
    """Base class for every error raised by the library."""


class DimensionMismatch(TinError, ValueError):
    pass


class NotTriangular(TinError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"A has nonzero strict-upper entry {value!r} at {index}")


class NotInputNormal(TinError):
    def __init__(self, index, residual, tol):
        self.index = index
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"|AA* + BB* - I| = {residual:.3e} at {index} exceeds tol {tol:.3e}"
        )


class UnstableEigenvalue(TinError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"eigenvalue {value!r} at position {index} has |lambda| >= 1")


class RepeatedEigenvalue(TinError):
    def __init__(self, i, j):
        self.pair = (i, j)
        super().__init__(f"eigenvalues {i} and {j} coincide")


class NotStable(TinError):
    def __init__(self, radius):
        self.radius = radius
        super().__init__(f"spectral radius estimate {radius:.12g} is not < 1")


class NotControllable(TinError):
    def __init__(self, rank, n):
        self.rank = rank
        self.n = n
        super().__init__(f"Krylov space has numerical rank {rank} < {n}")


class NoConvergence(TinError):
    pass


class NotPositiveDefinite(TinError):
    def __init__(self, index, pivot):
        self.index = index
        self.pivot = pivot
        super().__init__(f"nonpositive pivot {pivot!r} at index {index}")


class EigenFailure(TinError):
    pass


class ReorderFailure(TinError):
    pass


class ZeroPivot(TinError):
    def __init__(self, k, pivot):
        self.k = k
        self.pivot = pivot
        super().__init__(f"leading principal minor of order {k} vanishes (pivot {pivot!r})")


class BandwidthViolation(TinError):
    def __init__(self, which, excess):
        self.which = which
        self.excess = excess
        super().__init__(f"{which} has entries of size {excess:.3e} outside the band")


class RankDeficient(TinError):
    pass


class SingularMoment(TinError):
    def __init__(self, pivot, index):
        self.pivot = pivot
        self.index = index
        super().__init__(
            f"moment matrix is numerically singular: pivot {pivot:.3e} at index {index}"
        )
