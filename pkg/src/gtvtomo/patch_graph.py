"""Nonlocal patch similarity graph over sinogram pixels.

Each sinogram pixel becomes a node whose feature vector is the vectorized
l-by-l patch around it (replicate padding at the border).  Nodes are linked
to their K nearest neighbors in patch space (exact search, ties broken by
lower node index) and the directed edge set is symmetrized by union.  Edge
weights are Gaussian in the patch distance, ``exp(-d^2 / sigma^2)``, with
``sigma`` defaulting to the mean distance over all directed K-NN pairs.

Edge signals are plain arrays with one entry per stored undirected edge
(i, j), i < j.  The graph gradient of a node signal z is
``sqrt(W_ij) * (z_j - z_i)`` per edge, so its l1 norm counts each unordered
pair once; conventions that sum over ordered pairs double this value, which
simply rescales any regularization weight multiplying it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

_KNN_CHUNK = 256
_POWER_TOL = 1e-8
_POWER_MAX_ITERS = 10_000


@dataclass(frozen=True)
class PatchConfig:
    """Patch extraction and graph construction parameters."""

    patch_side: int = 3
    k: int = 10
    sigma_rule: float | str = "average"

    def __post_init__(self):
        if self.patch_side < 1 or self.patch_side % 2 == 0:
            raise ValueError(f"patch side must be odd and positive, got {self.patch_side}")
        if self.k < 1:
            raise ValueError(f"neighbor count must be >= 1, got {self.k}")
        if isinstance(self.sigma_rule, str):
            if self.sigma_rule != "average":
                raise ValueError(f"sigma_rule must be 'average' or a number, got {self.sigma_rule!r}")
        elif not (np.isfinite(self.sigma_rule) and self.sigma_rule > 0):
            raise ValueError(f"fixed sigma must be positive and finite, got {self.sigma_rule}")


@dataclass(eq=False)
class PatchGraph:
    """Undirected weighted graph with cached derived quantities.

    Edges are stored once with ``edge_i < edge_j``, sorted lexicographically.
    ``degree[i]`` is the sum of incident edge weights and ``tau`` caches the
    spectral norm of the gradient operator once computed.
    """

    node_count: int
    edge_i: np.ndarray = field(repr=False)
    edge_j: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    sigma: float = 1.0
    tau: float | None = None

    def __post_init__(self):
        self.edge_i = np.ascontiguousarray(self.edge_i, dtype=np.int64)
        self.edge_j = np.ascontiguousarray(self.edge_j, dtype=np.int64)
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if not (self.edge_i.shape == self.edge_j.shape == self.weights.shape):
            raise ValueError("edge arrays must have identical shapes")
        if self.edge_i.size and not np.all(self.edge_i < self.edge_j):
            raise ValueError("edges must be stored with i < j")
        if self.edge_i.size and (self.edge_i.min() < 0 or self.edge_j.max() >= self.node_count):
            raise ValueError("edge endpoints out of range")
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise ValueError("edge weights must be finite and nonnegative")
        self.sqrt_weights = np.sqrt(self.weights)
        self.degree = np.bincount(self.edge_i, self.weights, self.node_count) + np.bincount(
            self.edge_j, self.weights, self.node_count
        )

    @property
    def edge_count(self) -> int:
        return self.edge_i.size

    def weight(self, i: int, j: int) -> float:
        """Weight of the undirected edge (i, j); 0.0 if absent."""
        a, b = (i, j) if i < j else (j, i)
        key = a * self.node_count + b
        keys = self.edge_i * self.node_count + self.edge_j
        pos = np.searchsorted(keys, key)
        if pos < keys.size and keys[pos] == key:
            return float(self.weights[pos])
        return 0.0


def graph_from_edges(node_count: int, edges) -> PatchGraph:
    """Build a graph from an iterable of (i, j, weight) triples.

    Intended for tests and tiny hand-built instances; endpoints are
    normalized to i < j and duplicate pairs are rejected.
    """
    triples = [(min(i, j), max(i, j), w) for i, j, w in edges]
    if any(i == j for i, j, _ in triples):
        raise ValueError("self loops are not allowed")
    if len({(i, j) for i, j, _ in triples}) != len(triples):
        raise ValueError("duplicate edges")
    triples.sort()
    ei = np.array([t[0] for t in triples], dtype=np.int64)
    ej = np.array([t[1] for t in triples], dtype=np.int64)
    w = np.array([t[2] for t in triples], dtype=np.float64)
    return PatchGraph(node_count, ei, ej, w)


def extract_patches(s, cfg: PatchConfig) -> np.ndarray:
    """Vectorized l-by-l patches around every pixel of a p-by-q sinogram.

    Returns a (p*q, l*l) array; patch i is centered at pixel i in row-major
    order, with replicate padding past the border.
    """
    grid = s.grid if hasattr(s, "grid") else np.asarray(s, dtype=np.float64)
    p, q = grid.shape
    l = cfg.patch_side
    if l > 2 * min(p, q) - 1:
        raise ValueError(f"patch side {l} too large for a {p}x{q} sinogram")
    half = l // 2
    padded = np.pad(grid, half, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (l, l))
    return windows.reshape(p * q, l * l).copy()


def _knn_select(dist_row: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest entries, ties resolved to lower index."""
    kth = np.partition(dist_row, k - 1)[k - 1]
    cand = np.flatnonzero(dist_row <= kth)
    order = np.argsort(dist_row[cand], kind="stable")
    return cand[order[:k]]


def build_graph(patches: np.ndarray, cfg: PatchConfig) -> PatchGraph:
    """Exact symmetrized K-NN graph over patch vectors.

    Parameters
    ----------
    patches : (N, d) array
        One feature vector per node.
    cfg : PatchConfig
        ``cfg.k`` neighbors per node; ``cfg.sigma_rule`` either "average"
        (mean distance over the N*k directed neighbor pairs) or a fixed
        positive bandwidth.

    Returns
    -------
    PatchGraph
        Union-symmetrized graph with Gaussian weights
        ``exp(-d^2 / sigma^2)``.  When every K-NN distance is zero the
        bandwidth falls back to 1.0 so identical patches keep weight 1.
    """
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim != 2:
        raise ValueError(f"patches must be a 2-D array, got shape {patches.shape}")
    n = patches.shape[0]
    k = cfg.k
    if n < k + 1:
        raise ValueError(f"need at least {k + 1} patches for k={k}, got {n}")

    neighbor_idx = np.empty((n, k), dtype=np.int64)
    neighbor_dist = np.empty((n, k))
    for start in range(0, n, _KNN_CHUNK):
        stop = min(start + _KNN_CHUNK, n)
        d = cdist(patches[start:stop], patches)
        d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        for local in range(stop - start):
            sel = _knn_select(d[local], k)
            neighbor_idx[start + local] = sel
            neighbor_dist[start + local] = d[local, sel]

    if isinstance(cfg.sigma_rule, str):
        sigma = float(neighbor_dist.mean())
        if sigma == 0.0:
            sigma = 1.0
    else:
        sigma = float(cfg.sigma_rule)

    src = np.repeat(np.arange(n, dtype=np.int64), k)
    dst = neighbor_idx.ravel()
    pairs = np.stack([np.minimum(src, dst), np.maximum(src, dst)], axis=1)
    pairs = np.unique(pairs, axis=0)
    diff = patches[pairs[:, 0]] - patches[pairs[:, 1]]
    d2 = np.einsum("ij,ij->i", diff, diff)
    weights = np.exp(-d2 / (sigma * sigma))
    return PatchGraph(n, pairs[:, 0], pairs[:, 1], weights, sigma=sigma)


def graph_gradient(g: PatchGraph, z: np.ndarray) -> np.ndarray:
    """Edge-wise weighted differences ``sqrt(W_ij) * (z_j - z_i)``."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (g.node_count,):
        raise ValueError(f"signal must have length {g.node_count}, got shape {z.shape}")
    return g.sqrt_weights * (z[g.edge_j] - z[g.edge_i])


def graph_divergence(g: PatchGraph, u: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`graph_gradient`: scatters ``sqrt(W) u`` back to nodes."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (g.edge_count,):
        raise ValueError(f"edge signal must have length {g.edge_count}, got shape {u.shape}")
    su = g.sqrt_weights * u
    return np.bincount(g.edge_j, su, g.node_count) - np.bincount(g.edge_i, su, g.node_count)


def spectral_norm(g: PatchGraph) -> float:
    """Largest singular value of the gradient operator, by power iteration.

    Runs Rayleigh-quotient power iteration on the node-space operator
    ``divergence(gradient(.))`` until the eigenvalue estimate changes by
    less than 1e-8 relative (at most 10000 iterations), then caches the
    result on ``g.tau``.
    """
    if g.tau is not None:
        return g.tau
    if g.edge_count == 0:
        raise ValueError("spectral norm needs at least one edge")
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(g.node_count)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    lam = 0.0
    for _ in range(_POWER_MAX_ITERS):
        w = graph_divergence(g, graph_gradient(g, v))
        lam = float(v @ w)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0 or lam <= 0.0:
            # v landed in the null space; restart from a fresh direction.
            v = rng.standard_normal(g.node_count)
            v /= np.linalg.norm(v)
            lam_prev = 0.0
            continue
        v = w / norm_w
        if abs(lam - lam_prev) <= _POWER_TOL * lam:
            break
        lam_prev = lam
    g.tau = float(np.sqrt(lam))
    return g.tau
