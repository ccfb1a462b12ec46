"""Label volumes and signed Euclidean distance transforms.

A label volume holds one of three classes per voxel. ``sedt3`` turns it into
a signed distance field (active tumor negative, non-active tumor positive,
background ``+inf``); ``sedt2`` does the binary 2D version used for the
synthetic study.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend


class Label(enum.IntEnum):
    NON_TUMOR = 0
    NON_AT = 1
    AT = 2


_CLASS_NAMES = {
    "NonTumor": Label.NON_TUMOR,
    "NonAT": Label.NON_AT,
    "AT": Label.AT,
}

# BraTS codes: 1 = NCR/NET, 2 = ED, 4 = enhancing (active) tumor
DEFAULT_LABEL_MAP = {0: "NonTumor", 1: "NonAT", 2: "NonAT", 4: "AT"}


class VolumeFormatError(ValueError):
    """Malformed or inconsistent label-volume file."""


class EmptyTumorError(ValueError):
    """No AT or non-AT voxel present."""


@dataclass(frozen=True)
class LabelVolume:
    """Three-class voxel grid indexed ``labels[x, y, z]``."""

    labels: np.ndarray
    spacing: float = 1.0
    subject_id: str = ""
    frontal: bool = False

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.uint8)
        if labels.ndim != 3:
            raise ValueError(f"label volume must be 3D, got shape {labels.shape}")
        if labels.size and labels.max() > Label.AT:
            raise ValueError("labels must be in {0, 1, 2}")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "labels", labels)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.labels.shape)

    def has_tumor(self) -> bool:
        return bool(np.any(self.labels != Label.NON_TUMOR))


@dataclass(frozen=True)
class SignedDistanceVolume:
    """Signed distances on a grid; ``+inf`` marks voxels outside the filtration."""

    values: np.ndarray
    spacing: float = 1.0
    provenance: str = "SEDT3"
    subject_id: str = ""

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(int(n) for n in self.values.shape)

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)


def load_label_volume(path) -> LabelVolume:
    """Read an LV1 volume: JSON header plus raw uint8 payload.

    ``path`` may point at the header (``*.json``) or the payload; the payload
    defaults to the header's ``payload`` entry, else the same stem with
    ``.raw``.
    """
    path = Path(path)
    header_path = path if path.suffix == ".json" else path.with_suffix(".json")
    if not header_path.exists():
        raise FileNotFoundError(header_path)
    try:
        header = json.loads(header_path.read_text())
    except json.JSONDecodeError as exc:
        raise VolumeFormatError(f"{header_path}: invalid JSON header ({exc})") from exc
    if not isinstance(header, dict) or header.get("magic") != "LV1":
        raise VolumeFormatError(f"{header_path}: missing LV1 magic")
    dims = header.get("dims")
    if (
        not isinstance(dims, list)
        or len(dims) != 3
        or not all(isinstance(n, int) and n > 0 for n in dims)
    ):
        raise VolumeFormatError(f"{header_path}: dims must be three positive integers")
    payload_path = header_path.parent / header.get("payload", header_path.stem + ".raw")
    if not payload_path.exists():
        raise FileNotFoundError(payload_path)
    raw = np.frombuffer(payload_path.read_bytes(), dtype=np.uint8)
    expected = dims[0] * dims[1] * dims[2]
    if raw.size != expected:
        raise VolumeFormatError(
            f"{payload_path}: payload has {raw.size} voxels, dims imply {expected}"
        )

    label_map = header.get("label_map") or DEFAULT_LABEL_MAP
    lut = np.full(256, 255, dtype=np.uint8)
    for code, name in label_map.items():
        if name not in _CLASS_NAMES:
            raise VolumeFormatError(f"unknown class name {name!r} in label_map")
        lut[int(code)] = _CLASS_NAMES[name]
    labels = lut[raw]
    if np.any(labels == 255):
        bad = sorted(set(raw[labels == 255].tolist()))
        raise VolumeFormatError(f"{payload_path}: unknown label codes {bad}")

    vol = LabelVolume(
        labels=labels.reshape(dims, order="F"),
        spacing=float(header.get("spacing", 1.0)),
        subject_id=str(header.get("subject_id", header_path.stem)),
        frontal=bool(header.get("frontal", False)),
    )
    if not vol.has_tumor():
        raise EmptyTumorError(f"{header_path}: empty tumor (all voxels NonTumor)")
    return vol


def save_label_volume(vol: LabelVolume, path, label_map=None) -> Path:
    """Write ``vol`` as LV1; returns the header path."""
    path = Path(path)
    header_path = path.with_suffix(".json")
    payload_path = path.with_suffix(".raw")
    if label_map is None:
        label_map = {0: "NonTumor", 1: "NonAT", 2: "AT"}
        codes = vol.labels
    else:
        inverse = {}
        for code, name in label_map.items():
            inverse.setdefault(_CLASS_NAMES[name], int(code))
        lut = np.zeros(3, dtype=np.uint8)
        for cls, code in inverse.items():
            lut[cls] = code
        codes = lut[vol.labels]
    header = {
        "magic": "LV1",
        "dims": list(vol.dims),
        "spacing": vol.spacing,
        "label_map": {str(k): v for k, v in label_map.items()},
        "subject_id": vol.subject_id,
        "frontal": int(vol.frontal),
        "payload": payload_path.name,
    }
    header_path.write_text(json.dumps(header, indent=2) + "\n")
    payload_path.write_bytes(np.asarray(codes, dtype=np.uint8).ravel(order="F").tobytes())
    return header_path


def sedt3(vol: LabelVolume) -> SignedDistanceVolume:
    """Three-class signed EDT.

    Each tumor voxel gets the distance to the nearest voxel carrying another
    label (background included), negative for AT and positive for non-AT.
    Background voxels are ``+inf``.
    """
    if not vol.has_tumor():
        raise EmptyTumorError("empty tumor")
    labels = vol.labels
    out = np.full(labels.shape, np.inf)
    for cls, sign in ((Label.AT, -1.0), (Label.NON_AT, 1.0)):
        inside = labels == cls
        if not inside.any():
            continue
        sq = _backend.sq_edt(~inside)
        out[inside] = sign * np.sqrt(sq[inside]) * vol.spacing
    return SignedDistanceVolume(out, vol.spacing, "SEDT3", vol.subject_id)


def sedt2(image, spacing: float = 1.0, subject_id: str = "") -> SignedDistanceVolume:
    """Binary signed EDT: tumor pixels negative, background positive."""
    tumor = np.asarray(image, dtype=bool)
    if tumor.ndim != 2:
        raise ValueError("sedt2 expects a 2D image")
    if tumor.all() or not tumor.any():
        raise ValueError("image needs at least one tumor and one non-tumor pixel")
    to_background = np.sqrt(_backend.sq_edt(~tumor))
    to_tumor = np.sqrt(_backend.sq_edt(tumor))
    values = np.where(tumor, -to_background, to_tumor) * spacing
    return SignedDistanceVolume(values, spacing, "SEDT2", subject_id)


def _encode(x: float):
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def save_signed_distance(sdv: SignedDistanceVolume, path) -> Path:
    """JSON dump of a signed distance field; ``+inf`` is written as ``"inf"``.

    Values are listed x-fastest (Fortran order), matching the LV1 payload.
    """
    path = Path(path)
    doc = {
        "format": "SDV1",
        "subject_id": sdv.subject_id,
        "provenance": sdv.provenance,
        "spacing": sdv.spacing,
        "dims": list(sdv.dims),
        "values": [_encode(v) for v in sdv.values.ravel(order="F").tolist()],
    }
    path.write_text(json.dumps(doc) + "\n")
    return path


def load_signed_distance(path) -> SignedDistanceVolume:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "SDV1":
        raise VolumeFormatError(f"{path}: not an SDV1 file")
    dims = tuple(int(n) for n in doc["dims"])
    values = np.array([float(v) for v in doc["values"]], dtype=np.float64)
    if values.size != int(np.prod(dims)):
        raise VolumeFormatError(f"{path}: {values.size} values, dims imply {int(np.prod(dims))}")
    return SignedDistanceVolume(values.reshape(dims, order="F"), float(doc["spacing"]),
                                doc.get("provenance", "SEDT3"), str(doc.get("subject_id", "")))
