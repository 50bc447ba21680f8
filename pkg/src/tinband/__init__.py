"""Triangular input normal state-space filters in band-fraction form."""

from .bandfrac import YCanonical, YMatrix, band_fraction_from_y, canonicalize_y, lr_band_fraction, tin_from_y
from .bidiag import (
    ConditioningReport,
    EigenSpec,
    basis_functions,
    bidiag_from_eigenvalues,
    conditioning_report,
    eigenvector_matrix,
    m_inverse_closed_form,
    normalized_bidiag,
    sort_ascending,
)
from .core import (
    BandFraction,
    ImpulseBlock,
    InputPair,
    LowerBanded,
    MinorReport,
    TinPair,
    gram_defect,
    impulse_response,
    principal_minor_check,
    validate_tin,
)
from .engine import FilterState, advance, initial_state, output, predicted_counts, run, run_counted
from .errors import *  # noqa: F401,F403
from .reduction import (
    Similarity,
    SteinSolution,
    cholesky_lower,
    diagonal_phase_equivalence,
    krylov_rank,
    schur_lower,
    solve_stein,
    spectral_radius,
    stein_factor,
    tin_from_b,
    to_tin,
)
from .sysid import (
    IdentificationResult,
    RlsAccumulator,
    conditioning,
    identify,
    lms_update,
    nested_truncate,
    rls_init,
    rls_solve,
    rls_update,
)

__version__ = "0.1.0"
