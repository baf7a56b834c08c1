"""Cropping, thresholding, ink masks, line segmentation and background suppression."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from inkscan.errors import (
    DegenerateImage,
    DimensionMismatch,
    NoLinesFound,
    RectOutOfBounds,
)
from inkscan.hypercube_io import GrayImage, HyperCube, band

DEFAULT_THRESHOLD_BAND = 30
DEFAULT_MIN_GAP_ROWS = 3
DEFAULT_MIN_LINE_ROWS = 5


@dataclass(frozen=True)
class Rect:
    top: int
    left: int
    height: int
    width: int

    def __post_init__(self):
        if self.top < 0 or self.left < 0:
            raise RectOutOfBounds(f"negative origin in {self}")
        if self.height < 1 or self.width < 1:
            raise RectOutOfBounds(f"empty rectangle {self}")

    @classmethod
    def full(cls, cube: HyperCube) -> "Rect":
        return cls(0, 0, cube.rows, cube.cols)


@dataclass(frozen=True)
class BinaryMask:
    ink: np.ndarray = field(repr=False)

    def __post_init__(self):
        ink = np.asarray(self.ink, dtype=bool)
        if ink.ndim != 2 or 0 in ink.shape:
            raise ValueError(f"mask must be a non-empty 2-D array, got shape {ink.shape}")
        if ink.flags.writeable or ink is not self.ink:
            ink = ink.copy()
            ink.flags.writeable = False
        object.__setattr__(self, "ink", ink)

    @property
    def rows(self) -> int:
        return self.ink.shape[0]

    @property
    def cols(self) -> int:
        return self.ink.shape[1]

    @property
    def ink_count(self) -> int:
        return int(self.ink.sum())


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    degenerate: bool = False

    @property
    def nbins(self) -> int:
        return len(self.counts)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def to_csv(self) -> str:
        rows = ["bin_low,bin_high,count"]
        for lo, hi, n in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
            rows.append(f"{float(lo)!r},{float(hi)!r},{int(n)}")
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class LineRegion:
    line_id: int
    row_start: int
    row_end: int

    def __post_init__(self):
        if self.line_id < 1:
            raise ValueError("line_id is 1-based")
        if not 0 <= self.row_start < self.row_end:
            raise ValueError(f"invalid row range [{self.row_start}, {self.row_end})")

    @property
    def height(self) -> int:
        return self.row_end - self.row_start


def crop(cube: HyperCube, rect: Rect) -> HyperCube:
    if rect.top + rect.height > cube.rows or rect.left + rect.width > cube.cols:
        raise RectOutOfBounds(f"{rect} exceeds cube extent {cube.rows}x{cube.cols}")
    view = cube.data[rect.top:rect.top + rect.height, rect.left:rect.left + rect.width, :]
    # cube data is read-only, so the slice can be shared without copying
    return HyperCube(view, cube.wavelengths_nm)


def histogram(image: GrayImage, nbins: int = 256) -> Histogram:
    """Equal-width histogram spanning the image's value range.

    Bin ``i`` holds values in ``[edges[i], edges[i+1])``; the maximum lands in
    the last bin. A constant image yields a single flagged bin.
    """
    if nbins < 1:
        raise ValueError("nbins must be >= 1")
    v = image.values.ravel()
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        return Histogram(np.array([lo, hi]), np.array([v.size], dtype=np.int64), degenerate=True)
    edges = np.linspace(lo, hi, nbins + 1)
    idx = np.searchsorted(edges, v, side="right") - 1
    np.clip(idx, 0, nbins - 1, out=idx)
    counts = np.bincount(idx, minlength=nbins).astype(np.int64)
    return Histogram(edges, counts)


def otsu_from_histogram(hist: Histogram) -> float:
    """Bin edge maximizing between-class variance; lowest edge wins ties.

    Candidate ``i`` (1 <= i < nbins) splits bins ``[0, i)`` from ``[i, nbins)``
    at ``edges[i]``, with bin centers standing in for pixel values.
    """
    counts = hist.counts.astype(np.float64)
    mass = counts * hist.centers
    total = counts.sum()
    # class 0 = bins [0, i), class 1 = bins [i, nbins), for i = 1 .. nbins-1
    w0 = np.cumsum(counts)[:-1]
    s0 = np.cumsum(mass)[:-1]
    w1 = np.cumsum(counts[::-1])[::-1][1:]
    s1 = np.cumsum(mass[::-1])[::-1][1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (w0 / total) * (w1 / total) * (s0 / w0 - s1 / w1) ** 2
    between = np.where((w0 > 0) & (w1 > 0), between, -1.0)
    best = int(np.argmax(between))
    return float(hist.bin_edges[best + 1])


def otsu_threshold(image: GrayImage, nbins: int = 256) -> float:
    """Automatic binarization threshold by Otsu's criterion."""
    hist = histogram(image, nbins)
    if hist.degenerate:
        raise DegenerateImage("image is constant; no threshold separates it")
    if nbins < 2:
        raise ValueError("Otsu needs at least 2 bins")
    return otsu_from_histogram(hist)


def binarize(image: GrayImage, threshold: float, ink_is_dark: bool = True) -> BinaryMask:
    # a pixel exactly at the threshold is background in both polarities
    if ink_is_dark:
        return BinaryMask(image.values < threshold)
    return BinaryMask(image.values > threshold)


def row_profile(mask: BinaryMask) -> np.ndarray:
    """Ink pixel count per row."""
    return mask.ink.sum(axis=1)


def _runs(flags: np.ndarray) -> list:
    padded = np.concatenate(([False], flags, [False]))
    change = np.flatnonzero(padded[1:] != padded[:-1])
    return [(int(a), int(b)) for a, b in zip(change[::2], change[1::2])]


def segment_lines(mask: BinaryMask, min_gap_rows: int = DEFAULT_MIN_GAP_ROWS,
                  min_line_rows: int = DEFAULT_MIN_LINE_ROWS) -> List[LineRegion]:
    """Split a page mask into text-line row bands via its horizontal projection.

    Runs of inked rows separated by fewer than ``min_gap_rows`` blank rows are
    merged; merged runs shorter than ``min_line_rows`` are dropped.
    """
    if min_gap_rows < 1 or min_line_rows < 1:
        raise ValueError("min_gap_rows and min_line_rows must be >= 1")
    runs = _runs(row_profile(mask) > 0)
    if not runs:
        raise NoLinesFound("mask contains no ink")
    merged = [list(runs[0])]
    for start, end in runs[1:]:
        if start - merged[-1][1] < min_gap_rows:
            merged[-1][1] = end
        else:
            merged.append([start, end])
    kept = [(s, e) for s, e in merged if e - s >= min_line_rows]
    if not kept:
        raise NoLinesFound(f"no ink run is at least {min_line_rows} rows tall")
    return [LineRegion(i + 1, s, e) for i, (s, e) in enumerate(kept)]


def regions_from_ranges(ranges) -> List[LineRegion]:
    """Build numbered regions from explicit ``[row_start, row_end)`` pairs."""
    ordered = sorted((int(a), int(b)) for a, b in ranges)
    out = [LineRegion(i + 1, a, b) for i, (a, b) in enumerate(ordered)]
    for prev, cur in zip(out, out[1:]):
        if cur.row_start < prev.row_end:
            raise ValueError(f"line regions overlap: {prev} and {cur}")
    return out


def suppress_background(cube: HyperCube, mask: BinaryMask, fill: float = 1.0) -> HyperCube:
    """Overwrite every band of every background pixel with ``fill``."""
    if (mask.rows, mask.cols) != (cube.rows, cube.cols):
        raise DimensionMismatch(
            f"mask {mask.rows}x{mask.cols} does not match cube {cube.rows}x{cube.cols}"
        )
    if not np.isfinite(fill):
        raise ValueError("fill must be finite")
    out = np.array(cube.data, dtype=np.float64)
    out[~mask.ink] = fill
    out.flags.writeable = False
    return HyperCube(out, cube.wavelengths_nm)


def ink_mask(cube: HyperCube, band_index: int = DEFAULT_THRESHOLD_BAND,
             threshold: Optional[float] = None, ink_is_dark: bool = True,
             nbins: int = 256) -> tuple:
    """Threshold one band; returns ``(mask, threshold, histogram)``."""
    img = band(cube, band_index)
    hist = histogram(img, nbins)
    if threshold is None:
        threshold = otsu_threshold(img, nbins)
    return binarize(img, threshold, ink_is_dark), float(threshold), hist
