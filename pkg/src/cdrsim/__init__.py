"""2-D convection-diffusion-reaction solver and dataset tooling.

Second-order finite differences in space, an embedded 2(3) Runge-Kutta
pair with proportional step-size control in time, zero-Neumann boundary
closure, a mesh-convergence harness, and a reproducible pipeline that
turns random initial conditions and coefficient draws into
surrogate-training datasets.
"""

from .coefficients import (
    CONDITIONING_BOX,
    CoefficientFields,
    Conditioning,
    ReactionParams,
    SpdViolationError,
    eval_coefficients,
    reaction,
    reference_coefficients,
    sample_conditioning,
)
from .convergence import (
    StudyReport,
    eoc,
    grid_norms,
    mesh_sequence,
    restrict_fine_to_coarse,
    run_study,
)
from .dataset import (
    DatasetFile,
    DatasetFormatError,
    PipelineConfig,
    SamplePair,
    coarse_grain,
    gen_test_set,
    gen_training_set,
    regenerate_record,
    solve_sample,
)
from .discretize import (
    RhsWorkspace,
    apply_boundary_closure,
    fd_apply,
    rhs_interior,
)
from .grid import GridSpec, ScalarField, constant_field, field_from_function, make_grid
from .initial import (
    HillParams,
    InitialCondition,
    hill_bump,
    hill_profile,
    load_hill_csv,
    reference_ic,
    render_ic,
    sample_ic,
)
from .integrate import (
    RunStats,
    SolverBlowupError,
    StepperConfig,
    StepResult,
    integrate_to,
    propose_dt,
    rkf23_step,
)
from .rng import RNG_ALGORITHM, SplitMix64, derive_seed

__version__ = "0.1.0"

__all__ = [
    "CONDITIONING_BOX",
    "CoefficientFields",
    "Conditioning",
    "DatasetFile",
    "DatasetFormatError",
    "GridSpec",
    "HillParams",
    "InitialCondition",
    "PipelineConfig",
    "ReactionParams",
    "RhsWorkspace",
    "RNG_ALGORITHM",
    "RunStats",
    "SamplePair",
    "ScalarField",
    "SolverBlowupError",
    "SpdViolationError",
    "SplitMix64",
    "StepResult",
    "StepperConfig",
    "StudyReport",
    "apply_boundary_closure",
    "coarse_grain",
    "constant_field",
    "derive_seed",
    "eoc",
    "eval_coefficients",
    "fd_apply",
    "field_from_function",
    "gen_test_set",
    "gen_training_set",
    "grid_norms",
    "hill_bump",
    "hill_profile",
    "integrate_to",
    "load_hill_csv",
    "make_grid",
    "mesh_sequence",
    "propose_dt",
    "reaction",
    "reference_coefficients",
    "reference_ic",
    "regenerate_record",
    "render_ic",
    "restrict_fine_to_coarse",
    "rhs_interior",
    "rkf23_step",
    "run_study",
    "sample_conditioning",
    "sample_ic",
    "solve_sample",
]
