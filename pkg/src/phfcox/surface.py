"""Persistence surfaces: Gaussian-smoothed, MDW-weighted diagram densities."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .cubical import PersistenceDiagram


@dataclass(frozen=True)
class SurfaceGrid:
    """Regular grid over the (birth, death) plane, evaluated at cell centers."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n_x: int = 50
    n_y: int = 50

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("grid bounds must satisfy min < max")
        if self.n_x < 2 or self.n_y < 2:
            raise ValueError("grid resolution must be at least 2x2")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.n_y

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def x_centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_x) + 0.5) * self.dx

    @property
    def y_centers(self) -> np.ndarray:
        return self.y_min + (np.arange(self.n_y) + 0.5) * self.dy

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x, self.n_y)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "y_min": self.y_min,
                "y_max": self.y_max, "n_x": self.n_x, "n_y": self.n_y}

    @classmethod
    def from_dict(cls, d: dict) -> "SurfaceGrid":
        return cls(float(d["x_min"]), float(d["x_max"]), float(d["y_min"]),
                   float(d["y_max"]), int(d["n_x"]), int(d["n_y"]))


@dataclass
class PersistenceSurface:
    grid: SurfaceGrid
    values: np.ndarray
    dim: int
    sigma: float


def mdw_weight(b, d):
    """Maximum distance weight ``max(|b|, |d|, d - b)``."""
    b = np.asarray(b, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    w = np.maximum(np.maximum(np.abs(b), np.abs(d)), d - b)
    return float(w) if w.ndim == 0 else w


def pooled_grid_bounds(diagrams, sigma: float, resolution=(50, 50), pad: float = 3.0,
                       refine: bool = True) -> SurfaceGrid:
    """Grid covering every pooled pair, padded by ``pad * sigma`` on each side.

    With ``refine`` the resolution is raised until a cell edge is at most
    ``sigma / 2``.
    """
    pts = [d.pairs for d in diagrams if len(d)]
    if not pts:
        raise ValueError("all diagrams in the pool are empty")
    pts = np.vstack(pts)
    if not np.all(np.isfinite(pts)):
        raise ValueError("diagrams must be regularized (no infinite deaths)")
    m = pad * sigma
    x_lo, x_hi = pts[:, 0].min() - m, pts[:, 0].max() + m
    y_lo, y_hi = pts[:, 1].min() - m, pts[:, 1].max() + m
    # a pool of one point with pad 0 would give an empty box
    if x_hi <= x_lo:
        x_lo, x_hi = x_lo - 0.5 * sigma, x_hi + 0.5 * sigma
    if y_hi <= y_lo:
        y_lo, y_hi = y_lo - 0.5 * sigma, y_hi + 0.5 * sigma
    n_x, n_y = resolution
    if refine:
        n_x = max(n_x, math.ceil((x_hi - x_lo) / (sigma / 2)))
        n_y = max(n_y, math.ceil((y_hi - y_lo) / (sigma / 2)))
    return SurfaceGrid(float(x_lo), float(x_hi), float(y_lo), float(y_hi), int(n_x), int(n_y))


def rasterize_surface(d: PersistenceDiagram, grid: SurfaceGrid, sigma: float) -> PersistenceSurface:
    """Evaluate ``sum_(b,d) exp(-((x-b)^2 + (y-d)^2) / sigma^2) * w(b,d)`` at cell centers."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    values = np.zeros(grid.shape)
    if len(d):
        b, dd = d.births, d.deaths
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(dd))):
            raise ValueError("diagram must be regularized before rasterizing")
        w = mdw_weight(b, dd)
        # the kernel factorizes, so the sum is a (n_x, k) @ (k, n_y) product
        gx = np.exp(-((grid.x_centers[:, None] - b[None, :]) ** 2) / sigma**2)
        gy = np.exp(-((grid.y_centers[:, None] - dd[None, :]) ** 2) / sigma**2)
        values = (gx * w[None, :]) @ gy.T
    return PersistenceSurface(grid, values, d.dim, float(sigma))


def write_surfaces_csv(path, surfaces_by_subject) -> None:
    """Long-format dump: subject_id, dim, x, y, value."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject_id", "dim", "x", "y", "value"])
        for sid, surfaces in surfaces_by_subject.items():
            for s in surfaces:
                xc, yc = s.grid.x_centers, s.grid.y_centers
                for i in range(s.grid.n_x):
                    for j in range(s.grid.n_y):
                        w.writerow([sid, s.dim, repr(float(xc[i])), repr(float(yc[j])),
                                    repr(float(s.values[i, j]))])
