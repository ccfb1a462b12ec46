"""Filtered cubical complexes and their persistence diagrams.

The complex lives on a doubled grid: a cell at doubled coordinates
``(X, Y, Z)`` spans the voxels whose coordinates differ from ``X//2`` etc.
along the odd axes, so its dimension is the number of odd coordinates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .imaging import SignedDistanceVolume

HOMOLOGY_DIMS = (0, 1, 2)


@dataclass(frozen=True)
class FilteredCubicalComplex:
    """Cell values on a doubled grid (``inf`` = never enters the filtration).

    ``offset`` is the voxel position of the grid origin when the complex was
    cropped to the finite region of the input.
    """

    values: np.ndarray
    construction: str = "V"
    offset: tuple[int, int, int] = (0, 0, 0)

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.values.shape)

    def cell_dims(self) -> np.ndarray:
        X, Y, Z = np.indices(self.shape)
        return (X & 1) + (Y & 1) + (Z & 1)

    def cells(self, dim: int, finite_only: bool = True) -> np.ndarray:
        """Flat (x-fastest) ids of cells of dimension ``dim``."""
        mask = self.cell_dims() == dim
        if finite_only:
            mask &= np.isfinite(self.values)
        return np.flatnonzero(mask.ravel(order="F"))

    def n_cells(self, dim: int, finite_only: bool = True) -> int:
        return int(self.cells(dim, finite_only).size)

    def value(self, cell: int) -> float:
        return float(self.values.ravel(order="F")[cell])

    def boundary(self, cell: int) -> list[int]:
        NX, NY, NZ = self.shape
        coords = (cell % NX, (cell // NX) % NY, cell // (NX * NY))
        strides = (1, NX, NX * NY)
        faces = []
        for a in range(3):
            if coords[a] & 1:
                faces += [cell - strides[a], cell + strides[a]]
        return sorted(faces)

    def filtration_order(self) -> np.ndarray:
        """Finite cell ids sorted by (value, dimension, id)."""
        flat = self.values.ravel(order="F")
        ids = np.flatnonzero(np.isfinite(flat))
        dims = self.cell_dims().ravel(order="F")[ids]
        return ids[np.lexsort((ids, dims, flat[ids]))]


@dataclass
class PersistenceDiagram:
    """Multiset of (birth, death) pairs in one homology dimension."""

    dim: int
    pairs: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.float64).reshape(-1, 2)

    def __len__(self):
        return self.pairs.shape[0]

    @property
    def births(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.pairs[:, 1]

    def sorted_pairs(self) -> list[tuple[float, float]]:
        return sorted(map(tuple, self.pairs.tolist()))


def build_filtration(sdv: SignedDistanceVolume | np.ndarray, construction: str = "V",
                     crop: bool = True) -> FilteredCubicalComplex:
    """Filtered cubical complex of a 2D or 3D value grid.

    ``construction="V"`` puts voxel values on vertices and gives every higher
    cell the max of its vertices. ``"T"`` puts voxel values on top-dimensional
    cells and gives every lower cell the min of its cofaces.
    """
    values = sdv.values if isinstance(sdv, SignedDistanceVolume) else np.asarray(sdv)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 2:
        values = values[:, :, np.newaxis]
    if values.ndim != 3:
        raise ValueError("expected a 2D or 3D grid")
    offset = (0, 0, 0)
    if crop:
        finite = np.isfinite(values)
        if finite.any() and not finite.all():
            lo = [int(np.flatnonzero(finite.any(axis=tuple(b for b in range(3) if b != a)))[0])
                  for a in range(3)]
            hi = [int(np.flatnonzero(finite.any(axis=tuple(b for b in range(3) if b != a)))[-1]) + 1
                  for a in range(3)]
            values = values[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
            offset = tuple(lo)

    if construction == "V":
        cells = _vertex_construction(values)
    elif construction == "T":
        cells = _top_construction(values)
    else:
        raise ValueError(f"unknown construction {construction!r}")
    return FilteredCubicalComplex(cells, construction, offset)


def _vertex_construction(v: np.ndarray) -> np.ndarray:
    nx, ny, nz = v.shape
    g = np.full((2 * nx - 1, 2 * ny - 1, 2 * nz - 1), np.inf)
    g[::2, ::2, ::2] = v
    # max over vertices composes axis by axis
    g[1::2, ::2, ::2] = np.maximum(g[0:-1:2, ::2, ::2], g[2::2, ::2, ::2])
    g[:, 1::2, ::2] = np.maximum(g[:, 0:-1:2, ::2], g[:, 2::2, ::2])
    g[:, :, 1::2] = np.maximum(g[:, :, 0:-1:2], g[:, :, 2::2])
    return g


def _top_construction(v: np.ndarray) -> np.ndarray:
    # singleton axes stay flat so a 2D image gives a 2D complex
    active = [n > 1 for n in v.shape]
    shape = [2 * n + 1 if a else 1 for n, a in zip(v.shape, active)]
    g = np.full(shape, np.inf)
    sl = tuple(slice(1, None, 2) if a else slice(None) for a in active)
    g[sl] = v
    for axis in range(3):
        if not active[axis]:
            continue
        g = np.moveaxis(g, axis, 0)
        even = g[0::2].copy()
        odd = g[1::2]
        even[:-1] = np.minimum(even[:-1], odd)
        even[1:] = np.minimum(even[1:], odd)
        g[0::2] = even
        g = np.moveaxis(g, 0, axis)
    return g


def compute_persistence(cx: FilteredCubicalComplex) -> list[PersistenceDiagram]:
    """Sublevel persistence over Z/2 in dimensions 0, 1, 2.

    Zero-persistence pairs are dropped; essential classes have death ``inf``.
    """
    order = cx.filtration_order().astype(np.intp)
    flat = np.ascontiguousarray(cx.values.ravel(order="F"))
    dims, births, deaths = _backend.reduce_cubical(flat, cx.shape, order)
    out = []
    for d in HOMOLOGY_DIMS:
        sel = dims == d
        pairs = np.column_stack([births[sel], deaths[sel]])
        # canonical ordering so downstream output is reproducible
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))] if len(pairs) else pairs
        out.append(PersistenceDiagram(d, pairs))
    return out


def persistence_of(sdv, construction: str = "V") -> list[PersistenceDiagram]:
    return compute_persistence(build_filtration(sdv, construction))


def regularize_infinite(d: PersistenceDiagram) -> PersistenceDiagram:
    """Replace every essential pair (b, inf) by (b, b)."""
    pairs = d.pairs.copy()
    inf = np.isinf(pairs[:, 1])
    pairs[inf, 1] = pairs[inf, 0]
    return PersistenceDiagram(d.dim, pairs)


def quadrant_summary(d: PersistenceDiagram) -> dict[str, int]:
    """Count pairs by the signs of (birth, death).

    A zero coordinate takes the sign of the other one; (0, 0) counts as III.
    """
    counts = {"I": 0, "II": 0, "III": 0, "IV": 0}
    for b, dd in d.pairs.tolist():
        sb = b > 0 or (b == 0 and dd > 0)
        sd = dd > 0 or (dd == 0 and b > 0)
        if sb and sd:
            counts["I"] += 1
        elif sd:
            counts["II"] += 1
        elif sb:
            counts["IV"] += 1
        else:
            counts["III"] += 1
    return counts


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) and x > 0 else repr(float(x))


def write_diagrams_csv(path, diagrams_by_subject) -> None:
    """``diagrams_by_subject`` maps subject id to a list of diagrams."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject_id", "dim", "birth", "death"])
        for sid, diagrams in diagrams_by_subject.items():
            for d in diagrams:
                for b, dd in d.pairs.tolist():
                    w.writerow([sid, d.dim, _fmt(b), _fmt(dd)])


def read_diagrams_csv(path, dims=HOMOLOGY_DIMS) -> dict[str, list[PersistenceDiagram]]:
    rows: dict[str, dict[int, list]] = {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            sid = rec["subject_id"]
            per = rows.setdefault(sid, {d: [] for d in dims})
            per.setdefault(int(rec["dim"]), []).append((float(rec["birth"]), float(rec["death"])))
    return {sid: [PersistenceDiagram(d, per.get(d, [])) for d in dims] for sid, per in rows.items()}


def write_diagram_file(path, sid, diagrams):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    write_diagrams_csv(path, {sid: diagrams})
