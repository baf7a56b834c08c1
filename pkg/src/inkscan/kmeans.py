"""Lloyd's K-means over per-pixel spectra.

Assignment uses the BLAS-friendly expansion ``|x|^2 - 2 x.c + |c|^2`` and
falls back to exact squared differences for any pixel whose two nearest
centroids are too close for the expansion's rounding error to be ruled out.
Labels therefore always equal the argmin of the exact squared distance, with
ties resolved to the lowest centroid index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from inkscan.errors import DimensionMismatch, InsufficientDistinctPixels
from inkscan.hypercube_io import HyperCube
from inkscan.svgplot import line_chart

INIT_STRATEGIES = ("uniform_spread", "kmeanspp")
CHUNK = 16384
# relative gap below which the expanded distances are re-checked exactly
_REFINE_RTOL = 1e-9


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    max_iterations: int = 500
    seed: int = 0
    init_strategy: str = "kmeanspp"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ValueError(f"init_strategy must be one of {INIT_STRATEGIES}")


@dataclass(frozen=True)
class ClusterModel:
    k: int
    centroids: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    iterations_run: int
    sse: float
    converged: bool
    sse_history: tuple = field(default=(), repr=False)

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.k)

    def to_json(self) -> str:
        doc = {
            "k": self.k,
            "centroids": [[float(v) for v in c] for c in self.centroids],
            "iterations_run": self.iterations_run,
            "sse": float(self.sse),
            "converged": self.converged,
            "cluster_sizes": [int(n) for n in self.counts()],
            "sse_history": [float(v) for v in self.sse_history],
        }
        return json.dumps(doc, indent=1) + "\n"


def _as_pixels(data) -> np.ndarray:
    if isinstance(data, HyperCube):
        return data.pixels()
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch("pixels must be a 2-D (n, bands) array")
    return arr


def init_centroids(data, config: KMeansConfig) -> np.ndarray:
    """Initial centroids for ``config.init_strategy``.

    ``uniform_spread`` places centroid ``i`` at ``min + i * (max - min) / (k - 1)``
    per band (the midpoint when ``k == 1``). ``kmeanspp`` draws D^2-weighted
    seeds from ``numpy.random.default_rng(config.seed)``.
    """
    X = _as_pixels(data)
    k = config.k
    if config.init_strategy == "uniform_spread":
        lo = X.min(axis=0)
        hi = X.max(axis=0)
        if k == 1:
            return ((lo + hi) / 2.0)[None, :]
        steps = np.arange(k, dtype=np.float64)[:, None]
        return lo[None, :] + steps * (hi - lo)[None, :] / (k - 1)

    rng = np.random.default_rng(config.seed)
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    nearest = _sqdist_to(X, centroids[0])
    for j in range(1, k):
        total = nearest.sum()
        if not total > 0:
            raise InsufficientDistinctPixels(f"only {j} distinct pixel spectra for k={k}")
        idx = int(rng.choice(n, p=nearest / total))
        centroids[j] = X[idx]
        np.minimum(nearest, _sqdist_to(X, centroids[j]), out=nearest)
    return centroids


def _sqdist_to(X: np.ndarray, c: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    for s in range(0, X.shape[0], CHUNK):
        diff = X[s:s + CHUNK] - c
        out[s:s + CHUNK] = np.einsum("ij,ij->i", diff, diff)
    return out


def _exact_dists(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d = np.empty((X.shape[0], centroids.shape[0]))
    for j, c in enumerate(centroids):
        diff = X - c
        d[:, j] = np.einsum("ij,ij->i", diff, diff)
    return d


def assign(pixels, centroids) -> np.ndarray:
    """Nearest-centroid label per pixel (squared Euclidean, lowest index on ties)."""
    X = _as_pixels(pixels)
    C = np.asarray(centroids, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] < 1:
        raise DimensionMismatch("centroids must be a non-empty (k, bands) array")
    if C.shape[1] != X.shape[1]:
        raise DimensionMismatch(f"pixels have {X.shape[1]} bands, centroids {C.shape[1]}")
    labels = np.empty(X.shape[0], dtype=np.int64)
    c2 = np.einsum("ij,ij->i", C, C)
    c2max = float(c2.max())
    for s in range(0, X.shape[0], CHUNK):
        Xc = X[s:s + CHUNK]
        x2 = np.einsum("ij,ij->i", Xc, Xc)
        d = x2[:, None] - 2.0 * (Xc @ C.T) + c2[None, :]
        lab = np.argmin(d, axis=1)
        if C.shape[0] > 1:
            part = np.partition(d, 1, axis=1)
            gap = part[:, 1] - part[:, 0]
            shaky = np.flatnonzero(gap <= _REFINE_RTOL * (x2 + c2max) + 1e-300)
            if shaky.size:
                lab[shaky] = np.argmin(_exact_dists(Xc[shaky], C), axis=1)
        labels[s:s + CHUNK] = lab
    return labels


def _cluster_sums(X: np.ndarray, labels: np.ndarray, k: int) -> tuple:
    sums = np.zeros((k, X.shape[1]))
    counts = np.zeros(k, dtype=np.int64)
    # per-chunk partial sums, merged in chunk order
    for s in range(0, X.shape[0], CHUNK):
        Xc = X[s:s + CHUNK]
        lc = labels[s:s + CHUNK]
        for j in np.unique(lc):
            sel = lc == j
            sums[j] += Xc[sel].sum(axis=0)
            counts[j] += int(sel.sum())
    return sums, counts


def update(pixels, labels, k: int) -> np.ndarray:
    """Mean of each cluster's pixels.

    An empty cluster takes the spectrum of the pixel farthest from its own
    (freshly updated) centroid; that pixel is then excluded from serving a
    later empty cluster in the same step.
    """
    X = _as_pixels(pixels)
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.shape[0] != X.shape[0]:
        raise DimensionMismatch("one label per pixel required")
    sums, counts = _cluster_sums(X, labels, k)
    centroids = np.zeros_like(sums)
    filled = counts > 0
    centroids[filled] = sums[filled] / counts[filled, None]
    empty = np.flatnonzero(~filled)
    if empty.size:
        dist = np.empty(X.shape[0])
        for s in range(0, X.shape[0], CHUNK):
            diff = X[s:s + CHUNK] - centroids[labels[s:s + CHUNK]]
            dist[s:s + CHUNK] = np.einsum("ij,ij->i", diff, diff)
        for j in empty:
            far = int(np.argmax(dist))
            centroids[j] = X[far]
            dist[far] = -np.inf
    return centroids


def sum_squared_error(pixels, labels, centroids) -> float:
    X = _as_pixels(pixels)
    C = np.asarray(centroids, dtype=np.float64)
    labels = np.asarray(labels).ravel()
    total = 0.0
    for s in range(0, X.shape[0], CHUNK):
        diff = X[s:s + CHUNK] - C[labels[s:s + CHUNK]]
        total += float(np.einsum("ij,ij->", diff, diff))
    return total


RoundCallback = Callable[[int, np.ndarray, np.ndarray], None]


def kmeans_pixels(X, config: KMeansConfig, on_round: Optional[RoundCallback] = None) -> tuple:
    """Run Lloyd iterations on an ``(n, bands)`` array.

    ``on_round(iteration, labels, centroids)`` is called after every
    assignment pass with the centroids that pass used.

    Returns:
        ``(labels, centroids, iterations_run, converged, sse_history)``
    """
    X = _as_pixels(X)
    if X.shape[0] == 0:
        raise ValueError("no pixels to cluster")
    centroids = init_centroids(X, config)
    labels = None
    history: List[float] = []
    converged = False
    iterations = 0
    for it in range(1, config.max_iterations + 1):
        new = assign(X, centroids)
        iterations = it
        history.append(sum_squared_error(X, new, centroids))
        if on_round is not None:
            on_round(it, new.copy(), centroids.copy())
        changed = X.shape[0] if labels is None else int(np.count_nonzero(new != labels))
        labels = new
        if changed == 0:
            converged = True
            break
        centroids = update(X, labels, config.k)
    return labels, centroids, iterations, converged, history


def run_kmeans(cube: HyperCube, config: KMeansConfig,
               on_round: Optional[RoundCallback] = None) -> ClusterModel:
    labels, centroids, iterations, converged, history = kmeans_pixels(cube.pixels(), config, on_round)
    sse = sum_squared_error(cube.pixels(), labels, centroids)
    labels = labels.reshape(cube.rows, cube.cols)
    labels.flags.writeable = False
    centroids.flags.writeable = False
    return ClusterModel(
        k=config.k,
        centroids=centroids,
        labels=labels,
        iterations_run=iterations,
        sse=sse,
        converged=converged,
        sse_history=tuple(history),
    )


def centroid_plot(model: ClusterModel, wavelengths_nm, title: str = "Spectral classes") -> str:
    series = [(f"class {j}", c) for j, c in enumerate(model.centroids)]
    return line_chart(wavelengths_nm, series, title)
