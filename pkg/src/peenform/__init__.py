"""Thermoelastic Kirchhoff-plate model of shot peen forming.

Forward prediction of bending from intensity maps, calibration of the
moment-intensity slope from uniformly peened coupons, regularized inverse
design of peening recipes, and Monte Carlo uncertainty quantification.
"""

from .assembly import (
    assemble_constraints,
    assemble_moment_map,
    assemble_stiffness,
    forward_solve,
)
from .calibration import (
    CalibrationModel,
    CalibrationRecord,
    fit_slope,
    intensity_to_moment,
    linear_temperature_slope,
    midplane_from_measurement,
    moment_from_max_displacement,
    record_from_measurement,
)
from .inverse import (
    DisplacementConstraint,
    assemble_regularization,
    assemble_response_map,
    recover_intensity,
    solve_inverse,
)
from .model import (
    DisplacementField,
    IntensityMap,
    MaskRect,
    MomentField,
    PlateSpec,
    Recipe,
    TensorBasis,
    analytic_uniform_solution,
    basis_function,
    eval_displacement,
    eval_displacement_grid,
    eval_moment,
    eval_moment_grid,
    moment_resultants,
    project_moment,
)
from .uq import (
    AnovaResult,
    McSummary,
    UncertaintySpec,
    anova_two_way_no_replication,
    run_monte_carlo,
    run_trial,
)

__version__ = "0.1.0"

__all__ = [
    "AnovaResult",
    "CalibrationModel",
    "CalibrationRecord",
    "DisplacementConstraint",
    "DisplacementField",
    "IntensityMap",
    "MaskRect",
    "McSummary",
    "MomentField",
    "PlateSpec",
    "Recipe",
    "TensorBasis",
    "UncertaintySpec",
    "analytic_uniform_solution",
    "anova_two_way_no_replication",
    "assemble_constraints",
    "assemble_moment_map",
    "assemble_regularization",
    "assemble_response_map",
    "assemble_stiffness",
    "basis_function",
    "eval_displacement",
    "eval_displacement_grid",
    "eval_moment",
    "eval_moment_grid",
    "fit_slope",
    "forward_solve",
    "intensity_to_moment",
    "linear_temperature_slope",
    "midplane_from_measurement",
    "moment_from_max_displacement",
    "moment_resultants",
    "project_moment",
    "record_from_measurement",
    "recover_intensity",
    "run_monte_carlo",
    "run_trial",
    "solve_inverse",
]
