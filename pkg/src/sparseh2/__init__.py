"""Heritability estimation in sparse high-dimensional linear mixed models.

The main entry points are :func:`run` (one estimate with a bootstrap
interval), :func:`decide` (choose between estimation with and without
variable selection) and :func:`calibrate_threshold`.
"""

from .bootstrap import BootstrapResult, bootstrap_ci
from .calibrate import CalibrationResult, Decision, ThresholdSweep, calibrate_threshold, decide, overlap_count
from .data import FixedEffects, GenotypeMatrix, Phenotype, StandardizedMatrix, TraitParams, standardize
from .diagnostics import RecoveryReport, recovery_metrics
from .errors import (
    AllColumnsConstant,
    DegenerateDesign,
    DegenerateLikelihood,
    DimensionMismatch,
    EmptySelection,
    EmptyTrueSupport,
    NonConvergence,
    NumericalError,
    SparseH2Error,
    ValidationError,
)
from .formats import DecisionReport, RunReport
from .lasso import LassoFit, LassoPath, lasso_path, lasso_solve
from .mle import HeritabilityFit, KinshipEigen, Mode, fit_heritability, kinship_eigen, profile_loglik
from .pipeline import PipelineConfig, RunResult, run
from .projection import Projector, build_projector, project
from .screening import ScreenResult, sis_screen
from .simulate import SimConfig, SimOutput, simulate
from .stability import SelectionResult, StabilityConfig, selection_frequencies, stability_select

__version__ = "0.1.0"

__all__ = [
    "AllColumnsConstant",
    "BootstrapResult",
    "CalibrationResult",
    "Decision",
    "DecisionReport",
    "DegenerateDesign",
    "DegenerateLikelihood",
    "DimensionMismatch",
    "EmptySelection",
    "EmptyTrueSupport",
    "FixedEffects",
    "GenotypeMatrix",
    "HeritabilityFit",
    "KinshipEigen",
    "LassoFit",
    "LassoPath",
    "Mode",
    "NonConvergence",
    "NumericalError",
    "Phenotype",
    "PipelineConfig",
    "Projector",
    "RecoveryReport",
    "RunReport",
    "RunResult",
    "ScreenResult",
    "SelectionResult",
    "SimConfig",
    "SimOutput",
    "SparseH2Error",
    "StabilityConfig",
    "StandardizedMatrix",
    "ThresholdSweep",
    "TraitParams",
    "ValidationError",
    "bootstrap_ci",
    "build_projector",
    "calibrate_threshold",
    "decide",
    "fit_heritability",
    "kinship_eigen",
    "lasso_path",
    "lasso_solve",
    "overlap_count",
    "profile_loglik",
    "project",
    "recovery_metrics",
    "run",
    "selection_frequencies",
    "simulate",
    "sis_screen",
    "stability_select",
    "standardize",
]
