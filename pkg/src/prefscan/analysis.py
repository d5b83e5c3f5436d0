"""Ground-truth analyses computed from dataset payloads.

Three scalar maps serve as synthetic judges and as reference maps for the
exports: hysteresis loop area, the characteristic domain-wall angle (mode
of vector-angle differences over symmetric pairs), and a signed
head-to-head / tail-to-tail wall-character proxy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dataset import Dataset, PayloadKind
from .errors import ConfigurationError, InputError, InsufficientSupportError


# ---------------------------------------------------------------------------
# Hysteresis loop area


def loop_area(points: np.ndarray) -> float:
    """Absolute shoelace area of the closed (voltage, response) polyline.

    The polygon closes implicitly from the last point back to the first.
    Self-intersecting loops yield the magnitude of the signed sum.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InputError(f"loop must be an (n, 2) array, got {pts.shape}")
    if pts.shape[0] < 4:
        raise InputError(f"loop needs at least 4 points, got {pts.shape[0]}")
    if not np.all(np.isfinite(pts)):
        raise InputError("loop contains non-finite values")
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return float(abs(np.sum(x * yn - xn * y)) / 2.0)


def loop_area_map(ds: Dataset) -> np.ndarray:
    """Per-pixel loop area over a spectral dataset, vectorized shoelace."""
    if ds.payload_kind is not PayloadKind.SPECTRAL:
        raise InputError("loop areas need a spectral dataset")
    x = ds.voltage                       # (V,)
    y = ds.spectral                      # (H, W, V)
    xn = np.roll(x, -1)
    yn = np.roll(y, -1, axis=2)
    return np.abs(np.sum(x * yn - xn * y, axis=2)) / 2.0


# ---------------------------------------------------------------------------
# Characteristic domain-wall angle


@dataclass
class AngleConfig:
    radius: int = 5
    bin_width: float = 5.0

    def __post_init__(self):
        if self.radius < 1:
            raise ConfigurationError(f"radius must be >= 1, got {self.radius}")
        if not (0 < self.bin_width <= 180):
            raise ConfigurationError(
                f"bin width must lie in (0, 180], got {self.bin_width}")

    @property
    def n_bins(self) -> int:
        return int(np.ceil(180.0 / self.bin_width))

    def to_dict(self) -> dict:
        return {"radius": self.radius, "bin_width": self.bin_width}


def _half_plane_offsets(radius: int):
    """Disk offsets deduplicated to one half-plane (o and -o collapse)."""
    offs = []
    for dr in range(-radius, radius + 1):
        for dc in range(-radius, radius + 1):
            if dr * dr + dc * dc > radius * radius or (dr == 0 and dc == 0):
                continue
            if dr > 0 or (dr == 0 and dc > 0):
                offs.append((dr, dc))
    return offs


def _pair_angles_deg(v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Angles in degrees between rows of v1 and v2; zero-norm rows -> NaN."""
    n1 = np.linalg.norm(v1, axis=-1)
    n2 = np.linalg.norm(v2, axis=-1)
    dot = np.sum(v1 * v2, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosang = np.where((n1 > 0) & (n2 > 0), dot / (n1 * n2), np.nan)
    return np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))


def characteristic_angle(vectors: np.ndarray, point, cfg: AngleConfig) -> float:
    """Most-common vector-angle difference around a point.

    For every in-bounds offset o with |o| <= radius (half-plane
    deduplicated), the angle between the vectors at point+o and point-o
    lands in a histogram of ``bin_width`` degrees; the center of the
    fullest bin wins, ties broken toward the smaller angle.
    """
    field = np.asarray(vectors, dtype=np.float64)
    h, w = field.shape[:2]
    r, c = int(point[0]), int(point[1])
    if not (0 <= r < h and 0 <= c < w):
        raise InputError(f"point {point} outside grid {(h, w)}")
    angles = []
    for dr, dc in _half_plane_offsets(cfg.radius):
        r1, c1 = r + dr, c + dc
        r2, c2 = r - dr, c - dc
        if not (0 <= r1 < h and 0 <= c1 < w and 0 <= r2 < h and 0 <= c2 < w):
            continue
        ang = _pair_angles_deg(field[r1, c1], field[r2, c2])
        if np.isfinite(ang):
            angles.append(float(ang))
    if not angles:
        raise InsufficientSupportError(
            f"no valid symmetric pair within radius {cfg.radius} of ({r}, {c})")
    counts = np.zeros(cfg.n_bins, dtype=np.intp)
    idx = np.minimum((np.asarray(angles) // cfg.bin_width).astype(np.intp),
                     cfg.n_bins - 1)
    np.add.at(counts, idx, 1)
    best = int(np.argmax(counts))        # first max = smaller angle
    return (best + 0.5) * cfg.bin_width


def characteristic_angle_map(vectors: np.ndarray, cfg: AngleConfig):
    """(angle map, pair-support map) over the whole grid.

    Pixels with no valid symmetric pair get NaN angle and support 0.
    """
    field = np.asarray(vectors, dtype=np.float64)
    h, w = field.shape[:2]
    counts = np.zeros((h, w, cfg.n_bins), dtype=np.intp)
    for dr, dc in _half_plane_offsets(cfg.radius):
        # valid centers where both point+o and point-o stay in bounds
        r0, r1 = abs(dr), h - abs(dr)
        c0, c1 = abs(dc), w - abs(dc)
        if r0 >= r1 or c0 >= c1:
            continue
        plus = field[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
        minus = field[r0 - dr:r1 - dr, c0 - dc:c1 - dc]
        ang = _pair_angles_deg(plus, minus)
        valid = np.isfinite(ang)
        idx = np.minimum((np.where(valid, ang, 0.0) // cfg.bin_width)
                         .astype(np.intp), cfg.n_bins - 1)
        sub = counts[r0:r1, c0:c1]
        rows, cols = np.nonzero(valid)
        np.add.at(sub, (rows, cols, idx[rows, cols]), 1)
    support = counts.sum(axis=2)
    best = counts.argmax(axis=2)
    angles = (best + 0.5) * cfg.bin_width
    angles = np.where(support > 0, angles, np.nan)
    return angles, support


# ---------------------------------------------------------------------------
# Wall charge character


class WallCharacter(NamedTuple):
    value: float          # +1 tail-to-tail (diverging), -1 head-to-head
    wall_detected: bool


def _wrap_angle(a: np.ndarray) -> np.ndarray:
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def wall_charge_character(vectors: np.ndarray, point, radius: int,
                          grad_threshold: float = 1e-6) -> WallCharacter:
    """Signed head-to-head / tail-to-tail proxy at a point.

    The local wall normal comes from wrapped finite differences of the
    in-plane polarization angle averaged over the disk; the sign is the
    normal projection of (mean in-plane P on the far side) minus (near
    side), normalized so clean antiparallel walls hit exactly +/-1.
    Diverging polarization (tail-to-tail) is positive.  Returns 0 with
    wall_detected=False when the angle gradient is below threshold.
    """
    field = np.asarray(vectors, dtype=np.float64)
    h, w = field.shape[:2]
    r, c = int(point[0]), int(point[1])
    if not (0 <= r < h and 0 <= c < w):
        raise InputError(f"point {point} outside grid {(h, w)}")
    if radius < 1:
        raise ConfigurationError(f"radius must be >= 1, got {radius}")

    r0, r1 = max(0, r - radius), min(h, r + radius + 1)
    c0, c1 = max(0, c - radius), min(w, c + radius + 1)
    local = field[r0:r1, c0:c1]
    psi = np.arctan2(local[:, :, 1], local[:, :, 0])
    grad_r = _wrap_angle(np.diff(psi, axis=0))
    grad_c = _wrap_angle(np.diff(psi, axis=1))
    rr, cc = np.meshgrid(np.arange(r0, r1), np.arange(c0, c1), indexing="ij")
    disk = (rr - r) ** 2 + (cc - c) ** 2 <= radius * radius
    gr = grad_r[disk[:-1, :]]
    gc = grad_c[disk[:, :-1]]
    # Wall normal in the polarization (x, y) frame: columns map to +x and
    # rows to +y, so the spatial angle gradient is (d/dcol, d/drow).
    g = np.array([gc.mean() if gc.size else 0.0,
                  gr.mean() if gr.size else 0.0])
    gnorm = float(np.linalg.norm(g))
    if gnorm < grad_threshold:
        return WallCharacter(0.0, False)
    normal = g / gnorm

    t = (cc - c) * normal[0] + (rr - r) * normal[1]
    inplane = local[:, :, :2]
    far = disk & (t > 1e-9)
    near = disk & (t < -1e-9)
    if not far.any() or not near.any():
        return WallCharacter(0.0, False)
    p_far = inplane[far].mean(axis=0)
    p_near = inplane[near].mean(axis=0)
    scale = float(np.linalg.norm(p_far) + np.linalg.norm(p_near))
    if scale <= 0:
        return WallCharacter(0.0, False)
    value = float((p_far - p_near) @ normal) / scale
    return WallCharacter(float(np.clip(value, -1.0, 1.0)), True)


def wall_charge_map(vectors: np.ndarray, radius: int,
                    grad_threshold: float = 1e-6) -> np.ndarray:
    """Per-pixel wall-character values; flagged no-wall pixels are 0."""
    field = np.asarray(vectors, dtype=np.float64)
    h, w = field.shape[:2]
    out = np.zeros((h, w))
    for r in range(h):
        for c in range(w):
            out[r, c] = wall_charge_character(field, (r, c), radius,
                                              grad_threshold).value
    return out


def analysis_map(ds: Dataset, kind: str, angle_cfg: AngleConfig = None,
                 radius: int = 5) -> np.ndarray:
    """Named ground-truth map: loop_area, char_angle, or wall_charge."""
    if kind == "loop_area":
        return loop_area_map(ds)
    if kind == "char_angle":
        if ds.payload_kind is not PayloadKind.VECTOR3:
            raise InputError("characteristic angles need a vector3 dataset")
        angles, _ = characteristic_angle_map(
            ds.vectors, angle_cfg or AngleConfig(radius=radius))
        return np.nan_to_num(angles, nan=0.0)
    if kind == "wall_charge":
        if ds.payload_kind is not PayloadKind.VECTOR3:
            raise InputError("wall character needs a vector3 dataset")
        return wall_charge_map(ds.vectors, radius)
    raise ConfigurationError(f"unknown analysis map {kind!r}")
