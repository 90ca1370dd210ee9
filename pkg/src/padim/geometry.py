"""19-cell wrap-around hexagonal layout, user test grid and coupling averages.

Cells are pointy-top hexagons of circumradius ``d_max`` centred on a
triangular lattice with spacing ``sqrt(3) * d_max``.  The 19-cell cluster
(centre + two rings) is repeated on a torus whose six translation vectors
have length ``sqrt(19)`` lattice spacings.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import InvalidRadiusError

PATHLOSS_LOG10_GAIN = -3.53
PATHLOSS_EXPONENT = 3.76
NUM_CELLS = 19
DEFAULT_GRID_SIZE = 15000
DEFAULT_SEED = 1

# lattice translation of the 19-cell cluster, in (a1, a2) coordinates
_WRAP_GENERATOR = (3, 2)


@dataclass(frozen=True)
class CellLayout:
    cell_centers: np.ndarray  # (19, 2), metres; row 0 is the origin
    d_max: float
    d_min: float
    wrap_translations: np.ndarray  # (6, 2), metres

    @property
    def spacing(self) -> float:
        return math.sqrt(3.0) * self.d_max

    @property
    def num_cells(self) -> int:
        return len(self.cell_centers)


@dataclass(frozen=True)
class TestGrid:
    points: np.ndarray  # (count, 2), metres, relative to the serving site
    __test__ = False  # not a pytest class

    @property
    def count(self) -> int:
        return len(self.points)

    def distances(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])


@dataclass(frozen=True)
class CouplingStats:
    """Grid averages entering the SINR coefficient.

    ``lambda_cc`` is the mean inverse serving gain; ``interference_sum`` is
    the per-cell transmit power times the mean sum of interferer-to-serving
    gain ratios (watts).
    """

    lambda_cc: float
    interference_sum: float

    def scaled(self, per_cell_power_ratio: float) -> "CouplingStats":
        return CouplingStats(self.lambda_cc, self.interference_sum * per_cell_power_ratio)


def _axial_to_xy(q, r, spacing):
    return np.array([spacing * (q + 0.5 * r), spacing * (math.sqrt(3.0) / 2.0) * r])


def _rotate60(q, r):
    return -r, q + r


def build_layout(d_max: float, d_min: float) -> CellLayout:
    if not (0 < d_min < d_max) or not math.isfinite(d_max):
        raise InvalidRadiusError(f"need 0 < d_min < d_max, got d_min={d_min}, d_max={d_max}")
    spacing = math.sqrt(3.0) * d_max
    axial = [(0, 0)]
    axial += [
        (q, r)
        for ring in (1, 2)
        for q in range(-ring, ring + 1)
        for r in range(-ring, ring + 1)
        if max(abs(q), abs(r), abs(q + r)) == ring
    ]
    centers = np.array([_axial_to_xy(q, r, spacing) for q, r in axial])

    gens = [_WRAP_GENERATOR]
    for _ in range(5):
        gens.append(_rotate60(*gens[-1]))
    translations = np.array([_axial_to_xy(q, r, spacing) for q, r in gens])
    return CellLayout(centers, float(d_max), float(d_min), translations)


def _in_hexagon(xy: np.ndarray, d_max: float) -> np.ndarray:
    # pointy-top hexagon: edge normals at 0, 60 and 120 degrees
    inradius = math.sqrt(3.0) / 2.0 * d_max
    x, y = xy[:, 0], xy[:, 1]
    inside = np.abs(x) <= inradius
    for ang in (math.pi / 3.0, 2.0 * math.pi / 3.0):
        inside &= np.abs(x * math.cos(ang) + y * math.sin(ang)) <= inradius
    return inside


def sample_grid(layout: CellLayout, count: int = DEFAULT_GRID_SIZE, seed: int = DEFAULT_SEED) -> TestGrid:
    """Uniform test points over the central hexagon with the inner disc removed.

    Points come from a scrambled Sobol sequence over the hexagon's bounding
    box, keeping the first ``count`` that fall inside the hexagon and at least
    ``d_min`` from the site.  The same seed always yields the same grid.
    """
    if count < 1:
        raise ValueError(f"grid size must be >= 1, got {count}")
    d_max, d_min = layout.d_max, layout.d_min
    half_w = math.sqrt(3.0) / 2.0 * d_max
    lo = np.array([-half_w, -d_max])
    hi = np.array([half_w, d_max])

    sampler = qmc.Sobol(d=2, scramble=True, seed=seed)
    kept = []
    n_kept = 0
    while n_kept < count:
        # acceptance is ~0.75 for the hexagon in its box
        m = max(int(math.ceil(math.log2((count - n_kept) / 0.7 + 16))), 4)
        pts = qmc.scale(sampler.random_base2(m), lo, hi)
        d = np.hypot(pts[:, 0], pts[:, 1])
        ok = _in_hexagon(pts, d_max) & (d >= d_min)
        kept.append(pts[ok])
        n_kept += int(ok.sum())
    return TestGrid(np.concatenate(kept)[:count])


def pathloss(distance, log10_gain: float = PATHLOSS_LOG10_GAIN, exponent: float = PATHLOSS_EXPONENT):
    """Average channel gain ``10**log10_gain / distance**exponent``."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0) or np.any(~np.isfinite(d)):
        raise ValueError("pathloss distance must be positive and finite")
    g = 10.0**log10_gain * d ** (-exponent)
    return float(g) if np.ndim(g) == 0 else g


def _image_set(layout: CellLayout) -> np.ndarray:
    return np.vstack([np.zeros((1, 2)), layout.wrap_translations])


def _wrap_vector(v: np.ndarray, images: np.ndarray) -> np.ndarray:
    # reduce a lattice vector to its minimum image around the origin
    for _ in range(8):
        cand = v + images
        best = cand[np.argmin(np.hypot(cand[:, 0], cand[:, 1]))]
        if np.allclose(best, v):
            break
        v = best
    return v


def interferer_offsets(layout: CellLayout, serving: int = 0) -> np.ndarray:
    """Positions of the 18 interfering sites relative to ``serving``, wrapped."""
    images = _image_set(layout)
    origin = layout.cell_centers[serving]
    return np.array(
        [
            _wrap_vector(c - origin, images)
            for i, c in enumerate(layout.cell_centers)
            if i != serving
        ]
    )


def point_gains(
    layout: CellLayout,
    grid: TestGrid,
    serving: int = 0,
    include_interferers: bool = True,
    log10_gain: float = PATHLOSS_LOG10_GAIN,
    exponent: float = PATHLOSS_EXPONENT,
):
    """Per-point serving gain and summed interferer-to-serving gain ratio."""
    pts = grid.points
    serving_gain = pathloss(grid.distances(), log10_gain, exponent)
    ratio_sum = np.zeros(len(pts))
    if include_interferers:
        images = _image_set(layout)
        for off in interferer_offsets(layout, serving):
            # minimum-image distance from each point to this interferer
            cand = off[None, :, None] + images.T[None, :, :]  # (1, 2, 7)
            diff = pts[:, :, None] - cand
            dist = np.min(np.hypot(diff[:, 0, :], diff[:, 1, :]), axis=1)
            ratio_sum += (dist / grid.distances()) ** (-exponent)
    return serving_gain, ratio_sum


def coupling_stats(
    layout: CellLayout,
    grid: TestGrid,
    per_cell_power: float,
    serving: int = 0,
    include_interferers: bool = True,
    log10_gain: float = PATHLOSS_LOG10_GAIN,
    exponent: float = PATHLOSS_EXPONENT,
) -> CouplingStats:
    serving_gain, ratio_sum = point_gains(
        layout, grid, serving, include_interferers, log10_gain, exponent
    )
    lambda_cc = float(np.mean(1.0 / serving_gain))
    interference = float(per_cell_power * np.mean(ratio_sum))
    return CouplingStats(lambda_cc, interference)


def write_grid_csv(path, layout: CellLayout, grid: TestGrid, serving: int = 0, **pathloss_kw) -> None:
    serving_gain, ratio_sum = point_gains(layout, grid, serving, **pathloss_kw)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_m", "y_m", "serving_gain", "interference_ratio_sum"])
        for (x, y), g, r in zip(grid.points, serving_gain, ratio_sum):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(g)), repr(float(r))])
