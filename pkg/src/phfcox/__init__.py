"""Topological tumor-shape features for survival analysis.

Signed distance transform, cubical persistent homology, persistence
surfaces, functional PCA and an L1-penalized Cox model with frontal-lobe
interactions, plus the tuning, evaluation and simulation drivers.
"""

from ._backend import BACKEND
from .cox import (CoxFit, DegenerateSurvivalError, DesignMatrix, build_design, cv_lambda,
                  fit_path, fit_penalized_cox, functional_coefficients, lambda_max, risk_score)
from .cubical import (PersistenceDiagram, build_filtration, compute_persistence, persistence_of,
                      quadrant_summary, regularize_infinite)
from .fpca import FpcaModel, fit_fpca, project_scores, reconstruct, select_rank
from .imaging import (LabelVolume, SignedDistanceVolume, load_label_volume, save_label_volume,
                      sedt2, sedt3)
from .simulate import SimConfig, run_simulation
from .surface import PersistenceSurface, SurfaceGrid, pooled_grid_bounds, rasterize_surface
from .survstats import kaplan_meier, log_rank_test, median_risk_split
from .tuning import Dataset, Subject, TuningConfig, evaluate_sigmas, sigma_grid_search

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CoxFit",
    "Dataset",
    "DegenerateSurvivalError",
    "DesignMatrix",
    "FpcaModel",
    "LabelVolume",
    "PersistenceDiagram",
    "PersistenceSurface",
    "SignedDistanceVolume",
    "SimConfig",
    "Subject",
    "SurfaceGrid",
    "TuningConfig",
    "build_design",
    "build_filtration",
    "compute_persistence",
    "cv_lambda",
    "evaluate_sigmas",
    "fit_fpca",
    "fit_path",
    "fit_penalized_cox",
    "functional_coefficients",
    "kaplan_meier",
    "lambda_max",
    "load_label_volume",
    "log_rank_test",
    "median_risk_split",
    "persistence_of",
    "pooled_grid_bounds",
    "project_scores",
    "quadrant_summary",
    "rasterize_surface",
    "reconstruct",
    "regularize_infinite",
    "risk_score",
    "run_simulation",
    "save_label_volume",
    "sedt2",
    "sedt3",
    "select_rank",
    "sigma_grid_search",
]
