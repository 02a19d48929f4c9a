"""uqgeom: geometric shape fitting on uncertain and indecisive point sets.

Computes complete output distributions (quantizations) of shape-fitting
measures over uncertain inputs, by three routes:

* a randomized sampling engine with an everywhere-epsilon guarantee,
* a deterministic exact engine for LP-type measures on indecisive points,
* a discretization pipeline turning continuous distributions into
  indecisive approximations the exact engine can consume.

Shape-inclusion-probability (SIP) fields, alpha-kernel coresets, raster and
isoline export, and a CLI round out the toolkit.
"""

from .exact import (
    BasisRecord,
    ConservationError,
    ExactDistribution,
    ResourceCapError,
    basis_support_probability,
    brute_force_distribution,
    deterministic_sip,
    distributions_match,
    enumerate_potential_bases,
    exact_distribution,
)
from .discretize import (
    LatticeSample,
    RangeFamily,
    Wedge,
    discretize_for_measure,
    lattice_eps_sample,
    range_membership,
    wedge_decompose_seb2,
)
from .harness import (
    CylinderConfig,
    ExperimentConfig,
    FitResult,
    cylinder_uncertain_set,
    fit_sample_constant,
    run_deviation_experiment,
)
from .isolines import extract_isolines, isolines_svg
from .measures import (
    AxiomReport,
    Basis,
    BasisMember,
    MeasureId,
    NotLPTypeError,
    check_lp_axioms,
    combinatorial_dimension,
    evaluate,
    find_basis,
    full_violation_test,
    tolerance,
)
from .model import (
    ContinuousUncertainSet,
    GaussianPoint,
    IndecisivePoint,
    IndecisivePointSet,
    PointMassPoint,
    Support,
    UniformDiskPoint,
    ValidationError,
    canonical_jitter,
    load_point_set,
    sample_support,
    save_point_set,
    support_probability,
)
from .montecarlo import (
    EdaKernel,
    SampleBudget,
    alpha_kernel,
    build_eda_kernel,
    build_kvariate_quantization,
    build_quantization,
    build_random_sip,
    query_eda_kernel,
    trial_rng,
    verify_alpha_kernel,
)
from .quantize import (
    EpsAlphaQuantization,
    Quantization1D,
    QuantizationKD,
    eval_cdf,
    eval_dominance,
    max_deviation,
    quantization_to_csv,
    simplify,
)
from .sip import DiskShape, Raster, RectShape, SipField, rasterize_sip, read_pgm, write_pgm

__version__ = "0.1.0"
