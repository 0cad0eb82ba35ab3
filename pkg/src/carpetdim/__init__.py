"""Shrinking-target dimensions on Bedford-McMullen carpets."""
from .carpet import (
    CarpetSpec,
    DimBreakdown,
    DimParams,
    EntropyProfile,
    ProbVector,
    bernoulli_dimension,
    carpet_from_counts,
    dim_functions,
    distinguished_measures,
    entropy,
    full_torus,
    h_from_bernoulli,
    load_carpet,
    mcmullen_dimension,
    row_entropy,
    validate_carpet,
)
from .errors import (
    CarpetError,
    CertificationFailure,
    ConvergenceFailure,
    DomainError,
    LengthMismatch,
    MalformedCarpet,
    ResourceLimit,
    ScheduleTooShort,
    TargetTooShort,
    WordTooShort,
)
from .frontier import frontier_point, lift, phi, psi
from .optimizer import (
    OptResult,
    ThetaPoint,
    brute_force,
    closed_form_torus,
    large_alpha_threshold,
    large_alpha_value,
    maximize,
    objective,
    sweep,
)
from .symdyn import (
    ApproxSquare,
    PiecewiseBernoulliSchedule,
    SymbolicWord,
    approx_square,
    count_entropy_bounded,
    count_rowentropy_above,
    cover_count,
    heuristic_schedule,
    local_dimension_curve,
    log_measure_square,
    project,
    sample_word,
    scale_table,
    word_entropy,
)

__version__ = "0.1.0"
