"""Sparse parallel-beam projection operator built by exact ray tracing.

The image is an n-by-n grid of unit square cells centered at the origin.
A ray at angle ``theta`` (degrees) and detector offset ``t`` is the line
``{t * (cos, sin) + s * (-sin, cos)}``; its matrix entry for a cell is the
Euclidean length of the ray segment inside that cell (Siddon traversal).
Rays that miss the grid produce all-zero rows, which are kept so that row
indices always follow the ``ray * q + angle`` layout of the sinogram vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

_CROSSING_TOL = 1e-12


@dataclass(eq=False)
class Geometry:
    """Parallel-beam acquisition geometry.

    ``p`` rays per angle are spread evenly over ``detector_span`` (measured
    in pixel units, endpoints included, centered on the image), at ``q``
    equally spaced angles ``180 * k / q`` for k = 0..q-1.  The default span
    ``n * sqrt(2)`` covers the full image diagonal at every angle.
    """

    n: int
    p: int
    q: int
    detector_span: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"image side must be positive, got {self.n}")
        if self.p < 1 or self.q < 1:
            raise ValueError(f"need at least one ray and one angle, got p={self.p}, q={self.q}")
        if self.detector_span is None:
            self.detector_span = float(self.n) * np.sqrt(2.0)
        self.detector_span = float(self.detector_span)
        if self.detector_span < self.n:
            raise ValueError(
                f"detector span {self.detector_span} does not cover the image side {self.n}"
            )

    @property
    def angles(self) -> np.ndarray:
        """Acquisition angles in degrees, strictly increasing in [0, 180)."""
        return 180.0 * np.arange(self.q) / self.q

    @property
    def offsets(self) -> np.ndarray:
        """Detector offsets of the p rays; a single ray sits at offset 0."""
        if self.p == 1:
            return np.zeros(1)
        return (np.arange(self.p) - (self.p - 1) / 2.0) * (self.detector_span / (self.p - 1))

    def key(self) -> tuple:
        return (self.n, self.p, self.q, self.detector_span)


@dataclass(eq=False)
class Sinogram:
    """p-by-q projection array; column k holds the projections at angle k.

    ``values`` is the row-major raveling of that array, so entry ``r * q + k``
    is ray r at angle k, matching the projector's row layout.
    """

    p: int
    q: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"invalid sinogram shape p={self.p}, q={self.q}")
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size != self.p * self.q:
            raise ValueError(
                f"values must be a flat vector of length {self.p * self.q}, "
                f"got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sinogram values must be finite")

    @classmethod
    def from_grid(cls, grid: np.ndarray) -> "Sinogram":
        grid = np.asarray(grid, dtype=np.float64)
        if grid.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {grid.shape}")
        return cls(grid.shape[0], grid.shape[1], grid.ravel())

    @property
    def grid(self) -> np.ndarray:
        return self.values.reshape(self.p, self.q)


@dataclass(eq=False)
class ProjectionOperator:
    """Immutable sparse projection matrix with its geometry attached."""

    matrix: sp.csr_matrix = field(repr=False)
    geometry: Geometry

    def __post_init__(self):
        g = self.geometry
        if self.matrix.shape != (g.p * g.q, g.n * g.n):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match geometry "
                f"({g.p * g.q} rows, {g.n * g.n} columns)"
            )
        self._transpose = None
        self._row_norms_sq = None

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def transpose_matrix(self) -> sp.csr_matrix:
        if self._transpose is None:
            self._transpose = self.matrix.T.tocsr()
        return self._transpose

    @property
    def row_norms_sq(self) -> np.ndarray:
        if self._row_norms_sq is None:
            self._row_norms_sq = np.asarray(
                self.matrix.multiply(self.matrix).sum(axis=1)
            ).ravel()
        return self._row_norms_sq


def _ray_cells(n: int, cos_t: float, sin_t: float, t: float):
    """Cells crossed by one ray and the intersection lengths.

    Returns (rows, cols, lengths) arrays, possibly empty for a miss.
    """
    h = n / 2.0
    # Entry/exit parameters of the ray within the bounding box (slab method).
    # x(s) = t*cos - s*sin, y(s) = t*sin + s*cos.
    lo, hi = -np.inf, np.inf
    if abs(sin_t) > _CROSSING_TOL:
        s_a = (t * cos_t - h) / sin_t
        s_b = (t * cos_t + h) / sin_t
        lo = max(lo, min(s_a, s_b))
        hi = min(hi, max(s_a, s_b))
    elif abs(t * cos_t) > h:
        return _EMPTY
    if abs(cos_t) > _CROSSING_TOL:
        s_a = (-h - t * sin_t) / cos_t
        s_b = (h - t * sin_t) / cos_t
        lo = max(lo, min(s_a, s_b))
        hi = min(hi, max(s_a, s_b))
    elif abs(t * sin_t) > h:
        return _EMPTY
    if not np.isfinite(lo) or not np.isfinite(hi) or hi - lo <= _CROSSING_TOL:
        return _EMPTY

    grid_lines = np.arange(n + 1) - h
    crossings = [np.array([lo, hi])]
    if abs(sin_t) > _CROSSING_TOL:
        crossings.append((t * cos_t - grid_lines) / sin_t)
    if abs(cos_t) > _CROSSING_TOL:
        crossings.append((grid_lines - t * sin_t) / cos_t)
    s = np.concatenate(crossings)
    s = np.sort(s[(s >= lo) & (s <= hi)])
    lengths = np.diff(s)
    keep = lengths > _CROSSING_TOL
    if not np.any(keep):
        return _EMPTY
    mids = 0.5 * (s[:-1] + s[1:])[keep]
    lengths = lengths[keep]
    px = t * cos_t - mids * sin_t
    py = t * sin_t + mids * cos_t
    cols = np.floor(px + h).astype(np.int64)
    rows = np.floor(h - py).astype(np.int64)
    ok = (cols >= 0) & (cols < n) & (rows >= 0) & (rows < n)
    return rows[ok], cols[ok], lengths[ok]


_EMPTY = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), np.empty(0))


def build_projector(geometry: Geometry) -> ProjectionOperator:
    """Trace every (ray, angle) pair and assemble the CSR matrix.

    Row ``r * q + k`` corresponds to ray r at angle index k; column
    ``i * n + j`` to the pixel in image row i, column j.
    """
    n, p, q = geometry.n, geometry.p, geometry.q
    theta = np.deg2rad(geometry.angles)
    offsets = geometry.offsets
    row_idx: list[np.ndarray] = []
    col_idx: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for k in range(q):
        c, s = float(np.cos(theta[k])), float(np.sin(theta[k]))
        for r in range(p):
            rows, cols, lengths = _ray_cells(n, c, s, float(offsets[r]))
            if lengths.size == 0:
                continue
            row_idx.append(np.full(lengths.size, r * q + k, dtype=np.int64))
            col_idx.append(rows * n + cols)
            vals.append(lengths)
    if vals:
        data = np.concatenate(vals)
        coords = (np.concatenate(row_idx), np.concatenate(col_idx))
    else:
        data = np.empty(0)
        coords = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    matrix = sp.coo_matrix((data, coords), shape=(p * q, n * n)).tocsr()
    return ProjectionOperator(matrix, geometry)


def forward_project(A: ProjectionOperator, x) -> Sinogram:
    """Apply the operator to an image: b = A x."""
    pixels = x.pixels if hasattr(x, "pixels") else np.asarray(x, dtype=np.float64)
    if pixels.size != A.cols:
        raise ValueError(f"image has {pixels.size} pixels but operator expects {A.cols}")
    g = A.geometry
    return Sinogram(g.p, g.q, A.matrix @ pixels)


def back_project(A: ProjectionOperator, s) -> "Image":
    """Apply the transpose: x = A^T b (unfiltered backprojection)."""
    from gtvtomo.phantoms import Image

    values = s.values if hasattr(s, "values") else np.asarray(s, dtype=np.float64)
    if values.size != A.rows:
        raise ValueError(f"sinogram has {values.size} entries but operator expects {A.rows}")
    return Image(A.geometry.n, A.transpose_matrix @ values)
