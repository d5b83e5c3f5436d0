"""Synthetic datasets with known ground truth for benchmarks and demos.

Stripe fields mimic the a-domain / c-domain contrast of a spectroscopy
grid: per-pixel hysteresis loops are synthesized so that their shoelace
area equals a designed target map exactly.  Band vector fields provide
domain walls with controlled characteristic angles.
"""

from __future__ import annotations

import numpy as np

from .analysis import loop_area
from .dataset import Dataset, PayloadKind


def stripe_pattern(h: int, w: int, period: float = 12.0,
                   angle: float = 0.3) -> np.ndarray:
    """Smooth diagonal stripes in [0.05, 1.0]."""
    rr, cc = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    phase = 2.0 * np.pi * (cc * np.cos(angle) + rr * np.sin(angle)) / period
    return 0.525 + 0.475 * np.sin(phase)


def noisy_floor_pattern(h: int, w: int, period: int = 12, stripe_width: int = 5,
                        floor_noise: float = 0.12, seed: int = 0) -> np.ndarray:
    """Sharp high-value stripes over a noise-dominated low floor.

    The floor mimics regions whose measurements are unreliable: their
    values are pure pixel noise, so forced choices there are arbitrary
    while a tie-aware judge calls them equal.
    """
    rng = np.random.default_rng(seed)
    _, cc = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    on_stripe = (cc % period) < stripe_width
    field = rng.uniform(0.0, floor_noise, size=(h, w))
    field[on_stripe] = rng.uniform(0.85, 1.0, size=int(on_stripe.sum()))
    return field


def _unit_loop(n_points: int):
    """A smooth hysteresis cycle with unit area: (voltage, response)."""
    half = n_points // 2
    up = np.linspace(-1.0, 1.0, half, endpoint=False)
    down = np.linspace(1.0, -1.0, n_points - half, endpoint=False)
    v = np.concatenate([up, down])
    branch = np.concatenate([np.zeros(half), np.ones(n_points - half)])
    r = np.tanh(3.0 * (v + np.where(branch > 0, 0.5, -0.5)))
    area = loop_area(np.column_stack([v, r]))
    return v, r / area


def loops_for_areas(areas: np.ndarray, n_points: int = 16):
    """Per-pixel loops whose shoelace area equals the target map exactly.

    Returns (voltage (V,), response (H, W, V)).  Scaling the response
    scales the enclosed area linearly, so targets are hit to roundoff.
    """
    v, r_unit = _unit_loop(n_points)
    areas = np.asarray(areas, dtype=np.float64)
    return v, areas[..., None] * r_unit[None, None, :]


def make_stripe_dataset(h: int = 32, w: int = 32, smooth: bool = True,
                        seed: int = 0, n_loop_points: int = 16,
                        name: str = "synthetic-stripes") -> Dataset:
    """Spectral stripe dataset: structure image == loop-area ground truth."""
    pattern = (stripe_pattern(h, w) if smooth
               else noisy_floor_pattern(h, w, seed=seed))
    voltage, response = loops_for_areas(pattern, n_loop_points)
    return Dataset(name=name, structure=pattern,
                   payload_kind=PayloadKind.SPECTRAL,
                   spectral=response, voltage=voltage,
                   provenance="synthetic")


def _inplane(angle_deg: float) -> np.ndarray:
    a = np.radians(angle_deg)
    return np.array([np.cos(a), np.sin(a), 0.0])


def make_band_vector_dataset(h: int = 32, w: int = 32,
                             band_angles=(0.0, 71.0, 251.0, 0.0),
                             name: str = "synthetic-bands") -> Dataset:
    """Vertical bands of uniform in-plane polarization directions.

    With the default angles the three walls have characteristic angles of
    71, 180, and 109 degrees.  The structure image is the normalized
    in-plane direction angle, which gives patches enough contrast to tell
    the wall types apart.
    """
    band_angles = list(band_angles)
    band_w = w // len(band_angles)
    vectors = np.zeros((h, w, 3))
    structure = np.zeros((h, w))
    for k, ang in enumerate(band_angles):
        c0 = k * band_w
        c1 = (k + 1) * band_w if k < len(band_angles) - 1 else w
        vectors[:, c0:c1] = _inplane(ang)
        structure[:, c0:c1] = (ang % 360.0) / 360.0
    return Dataset(name=name, structure=structure,
                   payload_kind=PayloadKind.VECTOR3, vectors=vectors,
                   provenance="synthetic")


def band_wall_columns(w: int, n_bands: int):
    """Wall positions of make_band_vector_dataset: [(left_col, right_col)]."""
    band_w = w // n_bands
    return [(k * band_w - 1, k * band_w) for k in range(1, n_bands)]


def band_wall_angles(band_angles):
    """Characteristic angle at each wall, folded into [0, 180]."""
    out = []
    for a, b in zip(band_angles, band_angles[1:]):
        d = abs(a - b) % 360.0
        out.append(360.0 - d if d > 180.0 else d)
    return out


def make_half_plane_vector_dataset(h: int = 32, w: int = 32,
                                   mutual_angle: float = 180.0,
                                   name: str = "synthetic-wall") -> Dataset:
    """Two half-plane domains with a vertical wall at w // 2."""
    return make_band_vector_dataset(
        h, w, band_angles=(0.0, mutual_angle), name=name)
