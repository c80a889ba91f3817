"""Bit credibility and dispersion of finite-bit encodings of probabilistic data."""

from .dist import (
    LogFactorialTable,
    OutcomeDistribution,
    TrialCounts,
    binomial_pmf,
    binomial_sum,
    multinomial_enumerate,
    trinomial_pmf,
)
from .encode import (
    BitBudget,
    EncodingKind,
    ProbabilityCurve,
    encode_limit,
    encode_value,
    info_content,
    prob_bits_correct,
    prob_curve,
)
from .errors import DomainError, SizeError
from .repvec import (
    DispersionReport,
    PhaseVector,
    RepVector,
    VectorKind,
    asymptotic_dispersion,
    build_vector,
    dispersion_component,
    dispersion_total,
    endpoint_prob,
    expectation_eta,
)
from .unitary import (
    EmbeddedRotation,
    Rotation2Params,
    Unitary2,
    UnitaryK,
    apply,
    compose,
    conservation_check,
    dispersion_transformed,
    embed,
    rotation2,
)

__version__ = "0.1.0"
