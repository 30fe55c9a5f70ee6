"""Quadratic harnesses: parameter calculus, simulation and moment checks."""

from .conditioning import (
    bridge_invariant,
    bridge_params,
    condition_on_future,
    condition_on_past,
    glue_classify,
    meixner_bridge,
    solve_T1I,
)
from .harness import (
    affine_transform_spec,
    cond_cov_factor,
    cov_psd_check,
    eval_F,
    eval_K,
    harness_to_qh,
    normalize_gamma,
    population_identities,
    qh_inverse_representation,
    scale_transform,
    time_inversion,
)
from .params import AffineMap, CovMatrix, DeltaPair, HarnessSpec, MeanLine, QHParams, VarianceForm

__version__ = "0.1.0"
