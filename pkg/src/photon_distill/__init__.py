"""Heralded single-photon distillation with passive linear optics."""
from .conditional import (
    ConditionalDistribution,
    DetectionPattern,
    InputEnsemble,
    OccupationVector,
    evaluate,
    evaluate_all,
    improvement_verdict,
    unnormalized_coefficient,
    weight,
)
from .permanent import compute_S, naive_permanent, permanent
from .unitary import (
    EpsilonSchemeSpec,
    GivensParameterization,
    Unitary,
    dft,
    epsilon_scheme,
    from_entries,
    haar_random,
    realize,
)

__version__ = "0.1.0"
