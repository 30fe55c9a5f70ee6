"""Seeded simulation of concrete harnesses, pathwise transforms and exact oracles."""

from .processes import (
    PROCESSES,
    BinomialBridge,
    DirichletBridge,
    Gamma,
    GammaRandomScale,
    MixLaw,
    PathEnsemble,
    Poisson,
    ProcessDescriptor,
    Wiener,
    WienerDrift,
    WienerShift,
    descriptor_from_json,
    sample_ensemble,
)
from .transforms import (
    AffineTransform,
    BinomialTransform,
    BridgeTransform,
    DirichletTransform,
    FutureTransform,
    PastTransform,
    StandardizingTransform,
    Transformed,
    binomial_prediction,
    dirichlet_prediction,
    source_grid,
    standardize,
    transform_from_json,
    transform_paths,
)
