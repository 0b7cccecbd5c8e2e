"""Numerical verification of Hyers-Ulam stability for the generalized
additive-quadratic functional equation on ternary Banach algebras."""

from .algebra import AlgebraInstance, check_algebra_axioms, tnorm, tproduct
from .fixedpoint import (
    ControlFunction,
    ConvergenceCertificate,
    ExtractedMapping,
    HalvingOperator,
    contraction_constant_estimate,
    diaz_margolis_iterate,
    direct_method_point,
    generalized_distance,
    stability_bound,
)
from .funceq import (
    Combination,
    Constant,
    Cubic,
    DefectReport,
    EvenQuartic,
    FunctionHandle,
    Linear,
    PowerPerturbation,
    Quadratic,
    hom_residual,
    homder_residual,
    j_mapping_defect,
    residual,
    residual_sup,
    verify_specialization,
)
from .sampling import ExplicitGrid, SampleGrid
from .stability import (
    ExperimentSpec,
    StabilityReport,
    Tolerances,
    corollary_bound,
    make_perturbed_mapping,
    run_theorem_2_5,
    run_theorem_2_6,
)

__version__ = "0.1.0"
