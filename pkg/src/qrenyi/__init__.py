"""Quantum Renyi divergences and numerical checks of their alpha -> 0 limit."""

from qrenyi.channels import (
    KrausChannel,
    PinchingMap,
    RandomSpec,
    apply_channel,
    apply_pinching,
    pinching_from,
    random_channel,
    random_density,
    rank_one_pinching,
)
from qrenyi.divergences import (
    DivergenceValue,
    HypothesisTest,
    SupportRelation,
    alpha_relative_renyi,
    d0,
    d_max,
    d_min,
    hypothesis_testing,
    relative_entropy,
    sandwiched_renyi,
    support_relation,
)
from qrenyi.errors import InvalidAlpha, NumericalFailure, QrenyiError, SupportMismatch
from qrenyi.linalg import (
    DensityOperator,
    HermitianOperator,
    Projector,
    PsdOperator,
    Spectrum,
    eig_hermitian,
    loewner_leq,
    matrix_power_psd,
    support_projector,
    trace_norm,
)

__version__ = "0.1.0"
