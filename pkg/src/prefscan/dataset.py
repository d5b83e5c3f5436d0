"""Grid-registered dataset container: structure image plus per-pixel payload.

On disk a dataset is a directory holding ``dataset.json`` plus raw
little-endian float32 row-major arrays referenced by the header:

    {"name": ..., "height": H, "width": W,
     "payload": "spectral" | "vector3",
     "arrays": [{"id": "structure", "file": "structure.f32",
                 "shape": [H, W], "dtype": "f32le"}, ...],
     "voltage_waveform": [...]}          # spectral only

The same header-plus-raw-arrays convention is reused for exported maps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DataError, FormatError, InputError
from .network import PatchTensor


class PayloadKind(Enum):
    SPECTRAL = "spectral"
    VECTOR3 = "vector3"


@dataclass
class Dataset:
    name: str
    structure: np.ndarray
    payload_kind: PayloadKind
    spectral: np.ndarray | None = None        # (H, W, V) response values
    voltage: np.ndarray | None = None         # (V,) shared waveform
    vectors: np.ndarray | None = None         # (H, W, 3)
    units: str = "a.u."
    provenance: str = ""

    def __post_init__(self):
        self.structure = np.asarray(self.structure, dtype=np.float64)
        if self.structure.ndim != 2:
            raise DataError("structure grid must be 2-D")
        bad = np.argwhere(~np.isfinite(self.structure))
        if bad.size:
            raise DataError(
                f"structure grid has a non-finite value at pixel "
                f"({bad[0][0]}, {bad[0][1]})")
        h, w = self.structure.shape
        if self.payload_kind is PayloadKind.SPECTRAL:
            if self.spectral is None or self.voltage is None:
                raise DataError("spectral dataset needs response and voltage arrays")
            self.spectral = np.asarray(self.spectral, dtype=np.float64)
            self.voltage = np.asarray(self.voltage, dtype=np.float64)
            if self.spectral.shape[:2] != (h, w):
                raise DataError(
                    f"payload grid {self.spectral.shape[:2]} does not match "
                    f"structure grid {(h, w)}")
            if self.voltage.size != self.spectral.shape[2]:
                raise DataError("voltage waveform length does not match payload")
            if self.voltage.size < 4:
                raise DataError("hysteresis loops need at least 4 points")
            if not np.all(np.isfinite(self.voltage)):
                raise DataError("voltage waveform has non-finite entries")
        else:
            if self.vectors is None:
                raise DataError("vector3 dataset needs a vectors array")
            self.vectors = np.asarray(self.vectors, dtype=np.float64)
            if self.vectors.shape != (h, w, 3):
                raise DataError(
                    f"vector payload shape {self.vectors.shape} does not match "
                    f"structure grid {(h, w)}")
            bad = np.argwhere(~np.isfinite(self.vectors).all(axis=2))
            if bad.size:
                raise DataError(
                    f"vector payload has a non-finite value at pixel "
                    f"({bad[0][0]}, {bad[0][1]})")

    @property
    def shape(self):
        return self.structure.shape

    @property
    def n_candidates(self) -> int:
        return self.structure.size

    def pixel_of(self, candidate_id: int):
        h, w = self.structure.shape
        if not 0 <= candidate_id < h * w:
            raise InputError(f"candidate id {candidate_id} outside grid")
        return divmod(int(candidate_id), w)

    def id_of(self, row: int, col: int) -> int:
        return int(row) * self.structure.shape[1] + int(col)

    def loop_at(self, candidate_id: int) -> np.ndarray:
        """(V, 2) voltage/response pairs at a pixel (spectral datasets)."""
        if self.payload_kind is not PayloadKind.SPECTRAL:
            raise InputError("dataset has no spectral payload")
        r, c = self.pixel_of(candidate_id)
        return np.column_stack([self.voltage, self.spectral[r, c]])


def _read_array(root: Path, entry: dict) -> np.ndarray:
    if entry.get("dtype", "f32le") != "f32le":
        raise FormatError(f"array {entry['id']!r}: unsupported dtype {entry['dtype']!r}")
    shape = tuple(int(s) for s in entry["shape"])
    path = root / entry["file"]
    if not path.is_file():
        raise FormatError(f"array {entry['id']!r}: missing file {entry['file']}")
    raw = path.read_bytes()
    expected = int(np.prod(shape)) * 4
    if len(raw) != expected:
        raise FormatError(
            f"array {entry['id']!r}: file {entry['file']} holds {len(raw)} bytes, "
            f"header implies {expected}")
    return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)


def load_dataset(path) -> Dataset:
    """Load and validate a dataset directory (or a dataset.json path)."""
    p = Path(path)
    header_path = p if p.name.endswith(".json") else p / "dataset.json"
    if not header_path.is_file():
        raise FormatError(f"no dataset.json found under {path}")
    root = header_path.parent
    try:
        header = json.loads(header_path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"dataset.json is not valid JSON: {e}")
    try:
        kind = PayloadKind(header["payload"])
        h, w = int(header["height"]), int(header["width"])
        arrays = {e["id"]: _read_array(root, e) for e in header["arrays"]}
    except KeyError as e:
        raise FormatError(f"dataset.json is missing field {e}")
    if "structure" not in arrays:
        raise FormatError("dataset.json declares no 'structure' array")
    if arrays["structure"].shape != (h, w):
        raise FormatError(
            f"array 'structure': shape {arrays['structure'].shape} does not "
            f"match header grid {(h, w)}")
    if kind is PayloadKind.SPECTRAL:
        if "response" not in arrays:
            raise FormatError("spectral dataset.json declares no 'response' array")
        ds = Dataset(name=header.get("name", root.name),
                     structure=arrays["structure"], payload_kind=kind,
                     spectral=arrays["response"],
                     voltage=np.asarray(header.get("voltage_waveform", []),
                                        dtype=np.float64),
                     units=header.get("units", "a.u."),
                     provenance=header.get("provenance", ""))
    else:
        if "vectors" not in arrays:
            raise FormatError("vector3 dataset.json declares no 'vectors' array")
        ds = Dataset(name=header.get("name", root.name),
                     structure=arrays["structure"], payload_kind=kind,
                     vectors=arrays["vectors"],
                     units=header.get("units", "a.u."),
                     provenance=header.get("provenance", ""))
    return ds


def save_dataset(ds: Dataset, path) -> None:
    """Write a dataset directory in the container format."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    h, w = ds.structure.shape
    arrays = [("structure", "structure.f32", ds.structure)]
    header = {"name": ds.name, "height": h, "width": w,
              "payload": ds.payload_kind.value, "units": ds.units,
              "provenance": ds.provenance}
    if ds.payload_kind is PayloadKind.SPECTRAL:
        arrays.append(("response", "response.f32", ds.spectral))
        header["voltage_waveform"] = [float(v) for v in ds.voltage]
    else:
        arrays.append(("vectors", "vectors.f32", ds.vectors))
    header["arrays"] = []
    for aid, fname, arr in arrays:
        (root / fname).write_bytes(
            np.ascontiguousarray(arr, dtype="<f4").tobytes())
        header["arrays"].append({"id": aid, "file": fname,
                                 "shape": list(arr.shape), "dtype": "f32le"})
    (root / "dataset.json").write_text(
        json.dumps(header, sort_keys=True, indent=1) + "\n")


def write_map_container(out_dir, name: str, arrays: dict) -> None:
    """Export 2-D maps using the same header-plus-f32 convention."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    shape = None
    for aid in sorted(arrays):
        arr = np.asarray(arrays[aid], dtype=np.float64)
        shape = arr.shape
        fname = f"{aid}.f32"
        (root / fname).write_bytes(
            np.ascontiguousarray(arr, dtype="<f4").tobytes())
        entries.append({"id": aid, "file": fname, "shape": list(arr.shape),
                        "dtype": "f32le"})
    header = {"name": name, "height": int(shape[0]), "width": int(shape[1]),
              "arrays": entries}
    (root / f"{name}.json").write_text(
        json.dumps(header, sort_keys=True, indent=1) + "\n")


# ---------------------------------------------------------------------------
# Patches


def grid_range(grid: np.ndarray):
    """Dataset-global min/max used for patch normalization."""
    g = np.asarray(grid, dtype=np.float64)
    return float(g.min()), float(g.max())


def _normalize(values: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
    if vmax - vmin <= 0:
        return np.full_like(values, 0.5)
    return np.clip((values - vmin) / (vmax - vmin), 0.0, 1.0)


def extract_patch(grid: np.ndarray, center, window: int,
                  vmin=None, vmax=None) -> PatchTensor:
    """window x window crop at center, mirror-padded and min-max normalized.

    Normalization uses the dataset-global range (pass vmin/vmax when the
    grid being cropped is a sub-view): a constant grid maps to all 0.5.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if window % 2 == 0 or window < 1:
        raise ConfigurationError(f"patch window must be odd and >= 1, got {window}")
    half = window // 2
    h, w = grid.shape
    r, c = int(center[0]), int(center[1])
    if not (0 <= r < h and 0 <= c < w):
        raise InputError(f"patch center {center} outside grid {grid.shape}")
    if half > h - 1 or half > w - 1:
        raise ConfigurationError(
            f"window {window} too large for grid {grid.shape} with mirror padding")
    if vmin is None or vmax is None:
        vmin, vmax = grid_range(grid)
    padded = np.pad(grid, half, mode="reflect")
    crop = padded[r:r + window, c:c + window]
    return PatchTensor(_normalize(crop, vmin, vmax), center=(r, c))


def all_patch_inputs(grid: np.ndarray, window: int) -> np.ndarray:
    """Flattened normalized patches for every grid pixel, row-major.

    Returns (H*W, window*window); row i is the patch centered at
    candidate id i.  Matches extract_patch exactly.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if window % 2 == 0 or window < 1:
        raise ConfigurationError(f"patch window must be odd and >= 1, got {window}")
    half = window // 2
    h, w = grid.shape
    if half > h - 1 or half > w - 1:
        raise ConfigurationError(
            f"window {window} too large for grid {grid.shape} with mirror padding")
    vmin, vmax = grid_range(grid)
    padded = np.pad(_normalize(grid, vmin, vmax), half, mode="reflect")
    view = np.lib.stride_tricks.sliding_window_view(padded, (window, window))
    return view.reshape(h * w, window * window).copy()


def normalize_scalars(values: np.ndarray) -> np.ndarray:
    """Min-max rescale to [0, 1]; an all-equal input maps to all 0.5."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise InputError("cannot normalize an empty array")
    vmin, vmax = float(v.min()), float(v.max())
    if vmax - vmin <= 0:
        return np.full_like(v, 0.5)
    return (v - vmin) / (vmax - vmin)
