"""File formats: raw float64 images/sinograms, PGM previews, CSV exports.

Raw formats carry a one-line ASCII header (``IMG n`` or ``SINO p q``)
followed by little-endian float64 payload, and round-trip exactly.  PGM is
lossy (scaled to the integer range) and intended only for viewing.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from gtvtomo.phantoms import Image
from gtvtomo.projector import Sinogram


def write_image_raw(img: Image, path) -> None:
    with open(path, "wb") as fh:
        fh.write(f"IMG {img.n}\n".encode("ascii"))
        fh.write(img.pixels.astype("<f8").tobytes())


def read_image_raw(path) -> Image:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if len(header) != 2 or header[0] != "IMG":
            raise ValueError(f"not an IMG file: {path}")
        n = int(header[1])
        data = np.frombuffer(fh.read(), dtype="<f8")
    return Image(n, data.copy())


def write_sinogram_raw(s: Sinogram, path) -> None:
    with open(path, "wb") as fh:
        fh.write(f"SINO {s.p} {s.q}\n".encode("ascii"))
        fh.write(s.values.astype("<f8").tobytes())


def read_sinogram_raw(path) -> Sinogram:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if len(header) != 3 or header[0] != "SINO":
            raise ValueError(f"not a SINO file: {path}")
        p, q = int(header[1]), int(header[2])
        data = np.frombuffer(fh.read(), dtype="<f8")
    return Sinogram(p, q, data.copy())


def write_image_pgm(img: Image, path, bits: int = 16) -> None:
    """Scaled preview; 16-bit PGM stores big-endian samples per the format."""
    if bits not in (8, 16):
        raise ValueError(f"PGM depth must be 8 or 16 bits, got {bits}")
    maxval = (1 << bits) - 1
    grid = img.grid
    lo, hi = grid.min(), grid.max()
    scaled = np.zeros_like(grid) if hi <= lo else (grid - lo) / (hi - lo) * maxval
    quantized = np.rint(scaled).astype(">u2" if bits == 16 else np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.n} {img.n}\n{maxval}\n".encode("ascii"))
        fh.write(quantized.tobytes())


def write_sinogram_csv(s: Sinogram, path) -> None:
    """One row per detector bin, one column per angle."""
    with open(path, "w", newline="") as fh:
        for row in s.grid:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_curve_csv(values, path, header: tuple[str, str] = ("iteration", "error")) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, v in enumerate(np.asarray(values, dtype=np.float64)):
            w.writerow([i, repr(float(v))])


def read_curve_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([float(r[1]) for r in rows[1:]])


def write_profile_csv(values, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("column", "value"))
        for i, v in enumerate(np.asarray(values, dtype=np.float64)):
            w.writerow([i, repr(float(v))])


def read_profile_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([float(r[1]) for r in rows[1:]])


def write_graph_edges_csv(g, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("i", "j", "weight"))
        for i, j, wt in zip(g.edge_i, g.edge_j, g.weights):
            w.writerow([int(i), int(j), repr(float(wt))])


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
