"""Smoothing-parameter grid search with LOOCV risk estimation.

For every candidate (sigma_0, sigma_1, sigma_2): rasterize persistence
surfaces, fit FPCA, profile lambda by cross-validated deviance, estimate
held-out risks by leave-one-out refits, split at the median risk, and score
the split with a log-rank test. The candidate with the smallest p wins.
"""

from __future__ import annotations

import itertools
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cox, fpca, survstats
from ._rng import subseed
from .cubical import PersistenceDiagram
from .surface import SurfaceGrid, pooled_grid_bounds, rasterize_surface

logger = logging.getLogger(__name__)

DEFAULT_SIGMAS = tuple(round(0.3 * k, 1) for k in range(1, 11))


@dataclass
class TuningConfig:
    sigma_grid: tuple[float, ...] = DEFAULT_SIGMAS
    sigma_mode: str = "full"   # "full": product over dims; "shared": one sigma for all dims
    threshold: float = 0.90
    n_folds: int = 10
    n_lambda: int = 50
    lambda_ratio: float = 1e-2
    resolution: tuple[int, int] = (50, 50)
    pad: float = 3.0
    interactions: bool = True
    topology: bool = True
    seed: int = 0
    workers: int = 1
    standardize: bool = True      # penalize unit-variance FPC scores
    loocv_lambda: str = "frozen"  # "frozen": reuse the full-data lambda; "refit": re-profile per fold

    def __post_init__(self):
        if any(s <= 0 for s in self.sigma_grid):
            raise ValueError("all sigma values must be positive")
        if not 0 < self.threshold < 1:
            raise ValueError("threshold C must lie in (0, 1)")
        if self.sigma_mode not in ("full", "shared"):
            raise ValueError("sigma_mode must be 'full' or 'shared'")
        if self.loocv_lambda not in ("frozen", "refit"):
            raise ValueError("loocv_lambda must be 'frozen' or 'refit'")


@dataclass
class Subject:
    subject_id: str
    diagrams: dict[int, PersistenceDiagram]   # regularized, keyed by homology dim
    time: float
    event: int
    frontal: int = 0
    clinical: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class Dataset:
    subjects: list[Subject]
    dims: tuple[int, ...] = (0, 1, 2)
    clinical_names: tuple[str, ...] = ()

    def __len__(self):
        return len(self.subjects)

    @property
    def time(self):
        return np.array([s.time for s in self.subjects], dtype=np.float64)

    @property
    def event(self):
        return np.array([s.event for s in self.subjects], dtype=np.int64)

    @property
    def frontal(self):
        return np.array([s.frontal for s in self.subjects], dtype=np.float64)

    @property
    def clinical(self):
        if not self.clinical_names:
            return None
        return np.vstack([np.asarray(s.clinical, dtype=np.float64) for s in self.subjects])

    @property
    def ids(self):
        return [s.subject_id for s in self.subjects]


@dataclass
class Features:
    models: dict[int, fpca.FpcaModel]
    scores: dict[int, np.ndarray]   # rows follow the dataset order


class _SurfaceCache:
    """Surfaces keyed by (dim, sigma, grid); LOO grids mostly repeat."""

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self._store: dict = {}

    def get(self, dim, sigma, grid: SurfaceGrid):
        key = (dim, sigma, grid)
        if key not in self._store:
            self._store[key] = [rasterize_surface(s.diagrams[dim], grid, sigma)
                                for s in self.dataset.subjects]
        return self._store[key]


def featurize(dataset: Dataset, sigmas: dict[int, float], train, config: TuningConfig,
              cache: _SurfaceCache | None = None) -> Features:
    """FPCA fitted on ``train`` rows; scores for every subject."""
    cache = cache or _SurfaceCache(dataset)
    train = np.asarray(train)
    models, scores = {}, {}
    for dim in dataset.dims:
        sigma = sigmas[dim]
        pool = [dataset.subjects[i].diagrams[dim] for i in train]
        if not any(len(d) for d in pool):
            continue
        grid = pooled_grid_bounds(pool, sigma, config.resolution, config.pad)
        surfaces = cache.get(dim, sigma, grid)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            model = fpca.fit_fpca([surfaces[i] for i in train], config.threshold)
        if model.rank == 0:
            continue
        models[dim] = model
        scores[dim] = fpca.project_many(surfaces, model)
    return Features(models, scores)


def design_for(dataset: Dataset, features: Features | None, config: TuningConfig) -> cox.DesignMatrix:
    scores = features.scores if (features is not None and config.topology) else {}
    return cox.build_design(scores, dataset.frontal, dataset.clinical, dataset.clinical_names,
                            dataset.ids, interactions=config.interactions)


def profile_lambda(design: cox.DesignMatrix, dataset: Dataset, config: TuningConfig, seed=None):
    if not design.penalized.any():
        return None
    seed = subseed(config.seed, "folds") if seed is None else seed
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return cox.cv_lambda(design, dataset.time, dataset.event, config.n_folds, seed,
                             config.n_lambda, config.lambda_ratio,
                             standardize=config.standardize)


def loocv_risks(dataset: Dataset, sigmas: dict[int, float], lam: float, config: TuningConfig,
                cache: _SurfaceCache | None = None) -> np.ndarray:
    """Held-out linear predictor of each subject from a refit on the others.

    FPCA grids and bases are rebuilt from the n-1 training subjects. Lambda
    stays at ``lam`` unless ``config.loocv_lambda == "refit"``, in which case
    it is re-profiled on each training set. Failed folds yield NaN with a
    warning.
    """
    n = len(dataset)
    if n < 3:
        raise ValueError("LOOCV needs at least three subjects")
    cache = cache or _SurfaceCache(dataset)
    time, event = dataset.time, dataset.event
    risks = np.full(n, np.nan)
    idx = np.arange(n)
    for i in range(n):
        train = idx[idx != i]
        try:
            feats = featurize(dataset, sigmas, train, config, cache) if config.topology else None
            design = design_for(dataset, feats, config)
            sub = cox.DesignMatrix(design.X[train], design.names, design.roles,
                                   [design.subject_ids[j] for j in train], design.terms)
            lam_i = lam
            if config.loocv_lambda == "refit" and sub.penalized.any():
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    lam_i = cox.cv_lambda(sub, time[train], event[train], config.n_folds,
                                          subseed(config.seed, "folds", i), config.n_lambda,
                                          config.lambda_ratio,
                                          standardize=config.standardize).lambda_best
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                fit = cox.fit_penalized_cox(sub, time[train], event[train], lam_i,
                                            standardize=config.standardize)
            risks[i] = cox.risk_score(fit, design.X[i])
        except (ValueError, np.linalg.LinAlgError) as exc:
            warnings.warn(f"LOOCV fold {dataset.subjects[i].subject_id} failed: {exc}",
                          RuntimeWarning, stacklevel=2)
    return risks


@dataclass
class GridRecord:
    sigmas: tuple[float, ...]
    lam: float | None
    p_value: float
    statistic: float
    ranks: dict[int, int]
    degenerate: bool = False       # the grid point failed outright
    split_degenerate: bool = False  # all held-out risks tied

    def to_dict(self):
        return {"sigmas": list(self.sigmas), "lambda": self.lam, "p_value": self.p_value,
                "statistic": self.statistic, "ranks": {str(k): v for k, v in self.ranks.items()},
                "degenerate": self.degenerate, "split_degenerate": self.split_degenerate}


@dataclass
class Evaluation:
    record: GridRecord
    features: Features | None
    design: cox.DesignMatrix
    fit: cox.CoxFit
    risks: np.ndarray
    split: survstats.RiskSplit
    logrank: survstats.LogRankResult
    cv: cox.CvResult | None


def evaluate_sigmas(dataset: Dataset, sigmas: dict[int, float], config: TuningConfig,
                    cache: _SurfaceCache | None = None) -> Evaluation:
    """Full pipeline at one smoothing setting."""
    cache = cache or _SurfaceCache(dataset)
    n = len(dataset)
    feats = featurize(dataset, sigmas, np.arange(n), config, cache) if config.topology else None
    design = design_for(dataset, feats, config)
    cv = profile_lambda(design, dataset, config)
    lam = cv.lambda_best if cv is not None else 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fit = cox.fit_penalized_cox(design, dataset.time, dataset.event, lam,
                                    standardize=config.standardize)
    risks = loocv_risks(dataset, sigmas, lam, config, cache)
    ok = np.isfinite(risks)
    split, lr = survstats.split_log_rank(risks[ok], dataset.time[ok], dataset.event[ok])
    ranks = {d: m.rank for d, m in feats.models.items()} if feats else {}
    rec = GridRecord(tuple(float(sigmas[d]) for d in dataset.dims), float(lam),
                     float(lr.p_value), float(lr.statistic), ranks, False, bool(split.degenerate))
    return Evaluation(rec, feats, design, fit, risks, split, lr, cv)


def sigma_candidates(dims, config: TuningConfig):
    grid = sorted(float(s) for s in config.sigma_grid)
    if config.sigma_mode == "shared" or not config.topology:
        return [tuple(s for _ in dims) for s in grid]
    return list(itertools.product(grid, repeat=len(dims)))


@dataclass
class TuningResult:
    selected: tuple[float, ...]
    records: list[GridRecord]
    best: Evaluation

    def to_dict(self):
        return {"selected_sigmas": list(self.selected),
                "records": [r.to_dict() for r in self.records]}


def _evaluate(dataset, sig, config, cache=None):
    try:
        return evaluate_sigmas(dataset, dict(zip(dataset.dims, sig)), config, cache)
    except (ValueError, np.linalg.LinAlgError) as exc:
        logger.warning("grid point %s failed: %s", sig, exc)
        return None


def _eval_record(args):
    dataset, sig, config = args
    ev = _evaluate(dataset, sig, config)
    if ev is None:
        return GridRecord(tuple(sig), None, float("nan"), float("nan"), {}, True)
    return ev.record


def sigma_grid_search(dataset: Dataset, config: TuningConfig) -> TuningResult:
    if int(dataset.event.sum()) < 2:
        raise ValueError("need at least two events for tuning")
    candidates = sigma_candidates(dataset.dims, config)
    evaluations: dict[int, Evaluation] = {}
    if config.workers > 1 and len(candidates) > 1:
        jobs = [(dataset, sig, config) for sig in candidates]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_eval_record, jobs))
    else:
        cache = _SurfaceCache(dataset)
        records = []
        for i, sig in enumerate(candidates):
            ev = _evaluate(dataset, sig, config, cache)
            if ev is None:
                records.append(GridRecord(tuple(sig), None, float("nan"), float("nan"), {}, True))
            else:
                records.append(ev.record)
                evaluations[i] = ev

    best_i = None
    for i, r in enumerate(records):
        if r.degenerate or not np.isfinite(r.p_value):
            continue
        # candidates are in ascending lexicographic order, so ties keep the smaller sigmas
        if best_i is None or r.p_value < records[best_i].p_value:
            best_i = i
    if best_i is None:
        raise ValueError("every sigma grid point was degenerate")
    selected = records[best_i].sigmas
    best = evaluations.get(best_i) or evaluate_sigmas(dataset, dict(zip(dataset.dims, selected)), config)
    return TuningResult(selected, records, best)
