"""Functional PCA of persistence surfaces on a shared grid.

Integrals use the midpoint rule (cell area as quadrature weight). The
covariance operator is diagonalized through the n x n Gram matrix of the
centered, weight-scaled surfaces, so the grid x grid covariance is never
formed. Covariances use the 1/n normalization throughout.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .surface import PersistenceSurface, SurfaceGrid

logger = logging.getLogger(__name__)

# eigenvalues below this fraction of the largest are numerical noise
_REL_EIG_TOL = 1e-12


@dataclass
class FpcaModel:
    dim: int
    grid: SurfaceGrid
    mean: np.ndarray
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray  # (K, n_x, n_y); all retained numerical components
    rank: int
    threshold: float
    sigma: float | None = None

    @property
    def basis(self) -> np.ndarray:
        return self.eigenfunctions[: self.rank]

    def proportion_explained(self) -> np.ndarray:
        total = self.eigenvalues.sum()
        if total <= 0:
            return np.zeros_like(self.eigenvalues)
        return np.cumsum(self.eigenvalues) / total

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "grid": self.grid.to_dict(),
            "sigma": self.sigma,
            "threshold": self.threshold,
            "rank": self.rank,
            "eigenvalues": self.eigenvalues.tolist(),
            "mean": self.mean.ravel().tolist(),
            "eigenfunctions": self.basis.reshape(self.rank, -1).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FpcaModel":
        grid = SurfaceGrid.from_dict(d["grid"])
        rank = int(d["rank"])
        phi = np.asarray(d["eigenfunctions"], dtype=np.float64).reshape(rank, *grid.shape)
        return cls(int(d["dim"]), grid, np.asarray(d["mean"]).reshape(grid.shape),
                   np.asarray(d["eigenvalues"], dtype=np.float64), phi, rank,
                   float(d["threshold"]), d.get("sigma"))


def select_rank(eigenvalues, threshold: float) -> int:
    """Smallest r with cumulative proportion of variance strictly above ``threshold``."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    total = lam.sum()
    if total <= 0:
        return 0
    pv = np.cumsum(lam) / total
    above = np.flatnonzero(pv > threshold)
    return int(above[0]) + 1 if above.size else int(lam.size)


def _as_matrix(surfaces):
    grid = surfaces[0].grid
    for s in surfaces[1:]:
        if s.grid != grid:
            raise ValueError("all surfaces must share one grid")
    return grid, np.stack([s.values.ravel() for s in surfaces])


def fit_fpca(surfaces: list[PersistenceSurface], threshold: float = 0.9) -> FpcaModel:
    if len(surfaces) < 2:
        raise ValueError("FPCA needs at least two surfaces")
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    grid, X = _as_matrix(surfaces)
    n = X.shape[0]
    mean = X.mean(axis=0)
    A = (X - mean) * np.sqrt(grid.cell_area)
    gram = A @ A.T / n
    lam, U = np.linalg.eigh(gram)
    lam, U = lam[::-1], U[:, ::-1]
    lam = np.clip(lam, 0.0, None)

    keep = lam > _REL_EIG_TOL * lam[0] if lam[0] > 0 else np.zeros_like(lam, dtype=bool)
    lam, U = lam[keep], U[:, keep]
    if lam.size == 0:
        warnings.warn("surfaces are identical; FPCA has rank 0", RuntimeWarning, stacklevel=2)
        return FpcaModel(surfaces[0].dim, grid, mean.reshape(grid.shape), np.zeros(0),
                         np.zeros((0, *grid.shape)), 0, threshold, surfaces[0].sigma)

    # operator eigenvector v = A^T u / sqrt(n lam); eigenfunction = v / sqrt(area)
    V = (A.T @ U) / np.sqrt(n * lam)
    phi = (V / np.sqrt(grid.cell_area)).T
    flip = np.sign(phi[np.arange(phi.shape[0]), np.abs(phi).argmax(axis=1)])
    phi *= flip[:, None]

    rank = select_rank(lam, threshold)
    return FpcaModel(
        dim=surfaces[0].dim,
        grid=grid,
        mean=mean.reshape(grid.shape),
        eigenvalues=lam,
        eigenfunctions=phi.reshape(-1, *grid.shape),
        rank=rank,
        threshold=threshold,
        sigma=surfaces[0].sigma,
    )


def project_scores(surface: PersistenceSurface, model: FpcaModel, rank: int | None = None) -> np.ndarray:
    """FPC scores of one surface: quadrature of (X - mean) * phi_k."""
    return project_many([surface], model, rank)[0]


def project_many(surfaces, model: FpcaModel, rank: int | None = None) -> np.ndarray:
    r = model.rank if rank is None else rank
    for s in surfaces:
        if s.grid != model.grid:
            raise ValueError("surface grid does not match the FPCA grid")
    if not surfaces:
        return np.zeros((0, r))
    X = np.stack([s.values.ravel() for s in surfaces]) - model.mean.ravel()
    phi = model.eigenfunctions[:r].reshape(r, -1)
    return X @ phi.T * model.grid.cell_area


def reconstruct(scores, model: FpcaModel) -> PersistenceSurface:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size > model.eigenfunctions.shape[0]:
        raise ValueError("score vector length does not match the model")
    if scores.size != model.rank and scores.size != model.eigenfunctions.shape[0]:
        raise ValueError(f"expected {model.rank} scores, got {scores.size}")
    values = model.mean + np.tensordot(scores, model.eigenfunctions[: scores.size], axes=1)
    return PersistenceSurface(model.grid, values, model.dim, model.sigma or 0.0)
