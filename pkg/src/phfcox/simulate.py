"""Synthetic two-group tumor study with a planted group-by-location hazard.

Point clouds are drawn in abstract units (``UNIT_PX`` pixels per unit) and
smoothed on the pixel grid with Gaussian bandwidths given in pixels. The
density scale of each component (``*_SCALE``) was calibrated once so that
both groups have mean tumor areas near 2000 px, then frozen.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage, optimize

from . import cox, survstats
from ._rng import substream
from .cubical import persistence_of, regularize_infinite
from .imaging import sedt2
from .surface import SurfaceGrid
from .tuning import Dataset, Subject, TuningConfig, evaluate_sigmas

logger = logging.getLogger(__name__)

UNIT_PX = 10.0

# group A: main body and surrounding debris
A_MAIN_POINTS, A_MAIN_SD, A_MAIN_BW, A_MAIN_THRESHOLD = 30, 1.25, 7.0, 0.0025
A_DEBRIS_POINTS, A_DEBRIS_SD, A_DEBRIS_BW, A_DEBRIS_THRESHOLD = 10, 5.0, 2.0, 0.02
# group B: six aligned clusters and scattered fragments
B_CLUSTERS, B_MAIN_POINTS, B_MAIN_SD, B_BW = 6, 2000, 0.4, 2.0
B_FRAG_POINTS, B_FRAG_SD, B_THRESHOLD = 500, 4.8, 1.0
B_SPACING, B_JITTER_PX = 1.8, 1.0

# calibrated density scales (see module docstring)
A_MAIN_SCALE = 13.0
A_DEBRIS_SCALE = 8.0
B_MAIN_SCALE = 5300.0
B_FRAG_SCALE = 11500.0

LOG_HR = {("B", 1): 0.8, ("B", 0): 0.4, ("A", 1): -0.2, ("A", 0): 0.0}


class EmptyMaskError(RuntimeError):
    pass


@dataclass
class SimConfig:
    size: int = 200
    n: int = 140
    group_b_fraction: float = 0.5
    frontal_fraction: float = 0.30
    censoring: float = 0.15
    baseline_rate: float = 1 / 3000
    n_datasets: int = 300
    sigma: float = 2.0
    threshold: float = 0.90
    n_folds: int = 10
    seed: int = 0
    signal: bool = True
    workers: int = 1
    common_grid: tuple = (-40.0, 10.0, -40.0, 40.0, 100, 160)
    max_retries: int = 10

    def __post_init__(self):
        for name in ("group_b_fraction", "frontal_fraction", "censoring"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.size < 50:
            raise ValueError("image size must be at least 50")


@dataclass
class SimSubject:
    image: np.ndarray
    group: str
    frontal: int
    time: float
    event: int


def _kde_mask(points_px, size, bandwidth, scale, threshold):
    """Threshold a Gaussian KDE of pixel-space points evaluated on the grid."""
    edges = np.arange(size + 1) - 0.5
    counts, _, _ = np.histogram2d(points_px[:, 0], points_px[:, 1], bins=(edges, edges))
    density = ndimage.gaussian_filter(counts, bandwidth, mode="constant", truncate=4.0)
    # gaussian_filter preserves mass, so this is a probability density per px^2
    density /= len(points_px)
    return scale * density >= threshold


def _center(size):
    return (size - 1) / 2.0


def generate_group_a(rng: np.random.Generator, size: int = 200, max_retries: int = 10,
                     main_threshold: float = A_MAIN_THRESHOLD,
                     debris_threshold: float = A_DEBRIS_THRESHOLD) -> np.ndarray:
    """Large central mass plus a few satellite lesions."""
    c = _center(size)
    for _ in range(max_retries):
        main = rng.normal(0.0, A_MAIN_SD, size=(A_MAIN_POINTS, 2)) * UNIT_PX + c
        debris = rng.normal(0.0, A_DEBRIS_SD, size=(A_DEBRIS_POINTS, 2)) * UNIT_PX + c
        mask = _kde_mask(main, size, A_MAIN_BW, A_MAIN_SCALE, main_threshold)
        mask |= _kde_mask(debris, size, A_DEBRIS_BW, A_DEBRIS_SCALE, debris_threshold)
        if mask.any() and not mask.all():
            return mask
    raise EmptyMaskError("group A generator produced an empty mask")


def _b_means(rng, size):
    c = _center(size)
    angle = rng.uniform(0.0, math.pi)
    direction = np.array([math.cos(angle), math.sin(angle)])
    offsets = (np.arange(B_CLUSTERS) - (B_CLUSTERS - 1) / 2.0) * B_SPACING * UNIT_PX
    means = c + offsets[:, None] * direction[None, :]
    return means + rng.normal(0.0, B_JITTER_PX, size=means.shape)


def generate_group_b(rng: np.random.Generator, size: int = 200, max_retries: int = 10,
                     threshold: float = B_THRESHOLD) -> np.ndarray:
    """Six small clusters along a line plus scattered fragments."""
    for _ in range(max_retries):
        means = _b_means(rng, size)
        main = np.vstack([rng.normal(0.0, B_MAIN_SD, size=(B_MAIN_POINTS, 2)) * UNIT_PX + m
                          for m in means])
        frag = np.vstack([rng.normal(0.0, B_FRAG_SD, size=(B_FRAG_POINTS, 2)) * UNIT_PX + m
                          for m in means])
        mask = _kde_mask(main, size, B_BW, B_MAIN_SCALE, threshold)
        mask |= _kde_mask(frag, size, B_BW, B_FRAG_SCALE, threshold)
        if mask.any() and not mask.all():
            return mask
    raise EmptyMaskError("group B generator produced an empty mask")


def stratum_mix(config: SimConfig) -> dict[tuple[str, int], float]:
    pb, pf = config.group_b_fraction, config.frontal_fraction
    return {("B", 1): pb * pf, ("B", 0): pb * (1 - pf),
            ("A", 1): (1 - pb) * pf, ("A", 0): (1 - pb) * (1 - pf)}


def linear_predictor(group: str, frontal: int, signal: bool = True) -> float:
    return LOG_HR[(group, int(frontal))] if signal else 0.0


def censoring_rate(config: SimConfig) -> float:
    """Exponential censoring rate giving the target marginal censoring probability.

    With event rate h and censoring rate c, P(C < T) = c / (c + h); the
    target is matched in expectation over the group-by-location mix.
    """
    mix = stratum_mix(config)
    rates = {k: config.baseline_rate * math.exp(linear_predictor(*k, config.signal)) for k in mix}

    def excess(c):
        return sum(w * c / (c + rates[k]) for k, w in mix.items()) - config.censoring

    hi = config.baseline_rate
    while excess(hi) < 0:
        hi *= 2
    return float(optimize.brentq(excess, 0.0, hi, xtol=1e-15, rtol=1e-14))


def simulate_survival(group: str, frontal: int, config: SimConfig, rng, c_rate=None):
    """One (time, event) draw by inverse transform of the exponential PH model."""
    c_rate = censoring_rate(config) if c_rate is None else c_rate
    lp = linear_predictor(group, frontal, config.signal)
    t = -math.log(rng.uniform()) / (config.baseline_rate * math.exp(lp))
    c = rng.exponential(1.0 / c_rate)
    return (t, 1) if t <= c else (c, 0)


def simulate_survival_many(groups, frontal, config: SimConfig, rng, c_rate=None):
    c_rate = censoring_rate(config) if c_rate is None else c_rate
    lp = np.array([linear_predictor(g, f, config.signal) for g, f in zip(groups, frontal)])
    u = rng.uniform(size=lp.size)
    t = -np.log(u) / (config.baseline_rate * np.exp(lp))
    c = rng.exponential(1.0 / c_rate, size=lp.size)
    event = (t <= c).astype(np.int64)
    return np.where(event == 1, t, c), event


def assign_groups(config: SimConfig, rng):
    """Exact group sizes and per-group frontal counts, randomly placed."""
    n_b = int(round(config.n * config.group_b_fraction))
    groups = np.array(["A"] * (config.n - n_b) + ["B"] * n_b)
    frontal = np.zeros(config.n, dtype=np.int64)
    for g in ("A", "B"):
        idx = np.flatnonzero(groups == g)
        k = int(round(idx.size * config.frontal_fraction))
        frontal[rng.choice(idx, size=k, replace=False)] = 1
    perm = rng.permutation(config.n)
    return groups[perm], frontal[perm]


def generate_dataset(config: SimConfig, index: int):
    rng = substream(config.seed, "simulation", index)
    groups, frontal = assign_groups(config, rng)
    images = []
    for g in groups:
        gen = generate_group_a if g == "A" else generate_group_b
        images.append(gen(rng, config.size, config.max_retries))
    times, events = simulate_survival_many(groups, frontal, config, rng)
    return [SimSubject(img, str(g), int(f), float(t), int(e))
            for img, g, f, t, e in zip(images, groups, frontal, times, events)]


def subjects_to_dataset(subjects: list[SimSubject], index: int = 0) -> Dataset:
    out = []
    for i, s in enumerate(subjects):
        dgms = persistence_of(sedt2(s.image))
        out.append(Subject(f"d{index}_s{i}", {0: regularize_infinite(dgms[0]),
                                               1: regularize_infinite(dgms[1])},
                           s.time, s.event, s.frontal))
    return Dataset(out, dims=(0, 1))


def _resample(values, grid: SurfaceGrid, target: SurfaceGrid):
    from scipy.interpolate import RegularGridInterpolator

    f = RegularGridInterpolator((grid.x_centers, grid.y_centers), values,
                                bounds_error=False, fill_value=0.0)
    X, Y = np.meshgrid(target.x_centers, target.y_centers, indexing="ij")
    return f(np.column_stack([X.ravel(), Y.ravel()])).reshape(target.shape)


@dataclass
class DatasetResult:
    index: int
    ok: bool
    p_value: float = float("nan")
    lam: float = float("nan")
    ranks: dict = field(default_factory=dict)
    censored: float = float("nan")
    group_mean_risk: dict = field(default_factory=dict)
    coef_surfaces: dict = field(default_factory=dict)  # (dim, kind) -> common-grid array
    subjects: list = field(default_factory=list)
    error: str = ""


def run_dataset(config: SimConfig, index: int) -> DatasetResult:
    try:
        subjects = generate_dataset(config, index)
        data = subjects_to_dataset(subjects, index)
        tcfg = TuningConfig(sigma_grid=(config.sigma,), sigma_mode="shared",
                            threshold=config.threshold, n_folds=config.n_folds,
                            seed=config.seed * 100003 + index)
        ev = evaluate_sigmas(data, {0: config.sigma, 1: config.sigma}, tcfg)
    except (ValueError, EmptyMaskError, np.linalg.LinAlgError) as exc:
        logger.warning("dataset %d failed: %s", index, exc)
        return DatasetResult(index, False, error=str(exc))

    common = SurfaceGrid(*config.common_grid)
    coefs = cox.functional_coefficients(ev.fit, ev.features.models)
    surfaces = {}
    for dim in (0, 1):
        for kind in ("main", "interaction"):
            if dim in coefs:
                surfaces[(dim, kind)] = _resample(coefs[dim][kind], ev.features.models[dim].grid,
                                                  common)
            else:
                surfaces[(dim, kind)] = np.zeros(common.shape)

    risks = ev.risks
    high = np.zeros(len(subjects), dtype=bool)
    high[ev.split.high] = True
    group_means = {}
    for g in ("A", "B"):
        for f in (0, 1):
            sel = np.array([(s.group == g and s.frontal == f) for s in subjects]) & np.isfinite(risks)
            group_means[f"{g}{'-frontal' if f else '-nonfrontal'}"] = (
                float(np.mean(risks[sel])) if sel.any() else float("nan"))
    rows = [{"dataset": index, "subject": i, "group": s.group, "frontal": s.frontal,
             "area": int(s.image.sum()), "time": s.time, "event": s.event,
             "loocv_risk": float(risks[i]), "risk_group": "high" if high[i] else "low"}
            for i, s in enumerate(subjects)]
    return DatasetResult(index, True, ev.record.p_value, ev.record.lam or 0.0, ev.record.ranks,
                         float(1 - np.mean([s.event for s in subjects])), group_means,
                         surfaces, rows)


@dataclass
class SimulationReport:
    config: SimConfig
    results: list[DatasetResult]
    common_grid: SurfaceGrid

    @property
    def ok(self):
        return [r for r in self.results if r.ok]

    def average_surface(self, dim: int, kind: str = "main") -> np.ndarray:
        ok = self.ok
        if not ok:
            return np.zeros(self.common_grid.shape)
        return np.mean([r.coef_surfaces[(dim, kind)] for r in ok], axis=0)

    def fraction_significant(self, alpha: float = 0.05) -> float:
        ok = self.ok
        return float(np.mean([r.p_value < alpha for r in ok])) if ok else float("nan")

    def fraction_ordered(self) -> float:
        """Share of datasets with mean risk B-frontal > B-nonfrontal > A-nonfrontal."""
        ok = self.ok
        if not ok:
            return float("nan")
        hits = [r.group_mean_risk["B-frontal"] > r.group_mean_risk["B-nonfrontal"]
                > r.group_mean_risk["A-nonfrontal"] for r in ok]
        return float(np.mean(hits))

    def summary(self) -> dict:
        return {
            "config": {k: (list(v) if isinstance(v, tuple) else v)
                       for k, v in asdict(self.config).items()},
            "n_datasets": len(self.results),
            "n_ok": len(self.ok),
            "fraction_p_below_0.05": self.fraction_significant(),
            "fraction_risk_ordered": self.fraction_ordered(),
            "failures": [{"dataset": r.index, "error": r.error} for r in self.results if not r.ok],
            "datasets": [{"dataset": r.index, "p_value": r.p_value, "lambda": r.lam,
                          "ranks": {str(k): v for k, v in r.ranks.items()},
                          "censored_fraction": r.censored,
                          "group_mean_risk": r.group_mean_risk} for r in self.ok],
            "common_grid": self.common_grid.to_dict(),
        }

    def write(self, out_dir) -> None:
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "simulation_report.json").write_text(
            json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        with open(out / "simulation_subjects.csv", "w", newline="") as fh:
            fields = ["dataset", "subject", "group", "frontal", "area", "time", "event",
                      "loocv_risk", "risk_group"]
            w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            for r in self.ok:
                for row in r.subjects:
                    w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        g = self.common_grid
        with open(out / "average_coefficients.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["dim", "kind", "birth", "death", "value"])
            for dim in (0, 1):
                for kind in ("main", "interaction"):
                    avg = self.average_surface(dim, kind)
                    for i, x in enumerate(g.x_centers):
                        for j, y in enumerate(g.y_centers):
                            w.writerow([dim, kind, repr(float(x)), repr(float(y)),
                                        repr(float(avg[i, j]))])


def _run_one(args):
    config, index = args
    return run_dataset(config, index)


def run_simulation(config: SimConfig, progress=None) -> SimulationReport:
    jobs = [(config, i) for i in range(config.n_datasets)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_run_one(job))
            if progress:
                progress(results[-1])
    return SimulationReport(config, results, SurfaceGrid(*config.common_grid))
