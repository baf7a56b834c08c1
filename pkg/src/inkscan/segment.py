"""Color-segmented output image and the line-to-cluster table."""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from inkscan.errors import DimensionMismatch, EmptyRegion, PaletteTooSmall
from inkscan.kmeans import ClusterModel
from inkscan.preprocess import BinaryMask, LineRegion

# Label 0 first. None of these is black or white, so the background can be
# rendered in either without colliding with an ink class.
DEFAULT_PALETTE = (
    (230, 25, 75),    # red
    (60, 180, 75),    # green
    (0, 130, 200),    # blue
    (245, 130, 48),   # orange
    (145, 30, 180),   # purple
    (70, 240, 240),   # cyan
    (240, 50, 230),   # magenta
    (210, 245, 60),   # lime
    (128, 128, 0),    # olive
    (0, 0, 128),      # navy
)

WHITE = (255, 255, 255)
BLACK = (0, 0, 0)


@dataclass(frozen=True)
class SegmentedImage:
    rgb: np.ndarray = field(repr=False)  # (rows, cols, 3) uint8

    @property
    def rows(self) -> int:
        return self.rgb.shape[0]

    @property
    def cols(self) -> int:
        return self.rgb.shape[1]


@dataclass(frozen=True)
class LineClusterEntry:
    line_id: int
    cluster: int
    purity: float
    ink_pixels: int


@dataclass(frozen=True)
class LineClusterTable:
    entries: tuple

    def groups(self) -> List[tuple]:
        """``(cluster, [line ids])`` in order of each cluster's first line."""
        order: dict = {}
        for e in self.entries:
            order.setdefault(e.cluster, []).append(e.line_id)
        return list(order.items())

    def to_csv(self) -> str:
        rows = ["line_id,cluster,purity,ink_pixels"]
        rows += [f"{e.line_id},{e.cluster},{e.purity!r},{e.ink_pixels}" for e in self.entries]
        return "\n".join(rows) + "\n"

    def to_text(self) -> str:
        """Plain-text table: one row per cluster listing its text lines."""
        body = [
            (str(i), f"C-{i}", ",".join(str(x) for x in lines), str(label))
            for i, (label, lines) in enumerate(self.groups(), start=1)
        ]
        head = ("Sr. No.", "Cluster No.", "Text Line No.", "K-means label")
        widths = [max(len(r[c]) for r in [head] + body) for c in range(4)]
        rule = "+" + "+".join("-" * (w + 2) for w in widths) + "+"

        def fmt(r):
            return "|" + "|".join(f" {v.center(w)} " for v, w in zip(r, widths)) + "|"

        out = [rule, fmt(head), rule]
        for r in body:
            out += [fmt(r), rule]
        return "\n".join(out) + "\n"


def check_palette(palette: Sequence, k: int) -> np.ndarray:
    pal = np.asarray(palette, dtype=np.int64)
    if pal.ndim != 2 or pal.shape[1] != 3:
        raise ValueError("palette entries must be RGB triples")
    if pal.shape[0] < k:
        raise PaletteTooSmall(f"palette has {pal.shape[0]} colors for k={k}")
    if ((pal < 0) | (pal > 255)).any():
        raise ValueError("palette values must lie in 0..255")
    if len({tuple(c) for c in pal[:k]}) != k:
        raise ValueError("palette colors must be pairwise distinct")
    return pal.astype(np.uint8)


def background_cluster(model: ClusterModel, mask: BinaryMask) -> Optional[int]:
    """Label held by most background pixels, or None if the mask is all ink."""
    bg = model.labels[~mask.ink]
    if bg.size == 0:
        return None
    return int(np.argmax(np.bincount(bg, minlength=model.k)))


def colorize(model: ClusterModel, palette: Optional[Sequence] = None,
             background: Optional[int] = None, background_rgb: Sequence[int] = WHITE,
             merge_into_background: Iterable[int] = ()) -> SegmentedImage:
    """Paint each pixel with its cluster's palette color.

    If ``background`` is given, that cluster (and any listed in
    ``merge_into_background``) is painted ``background_rgb`` instead.
    """
    pal = check_palette(DEFAULT_PALETTE if palette is None else palette, model.k)[: model.k].copy()
    if background is not None:
        for label in {background, *merge_into_background}:
            pal[label] = background_rgb
    rgb = pal[model.labels]
    rgb.flags.writeable = False
    return SegmentedImage(rgb)


def line_cluster_table(model: ClusterModel, regions: Sequence[LineRegion],
                       mask: BinaryMask) -> LineClusterTable:
    """Dominant cluster of each line's ink pixels, with its share (purity)."""
    if model.labels.shape != mask.ink.shape:
        raise DimensionMismatch("label map and mask dimensions differ")
    entries = []
    for r in regions:
        if r.row_end > mask.rows:
            raise DimensionMismatch(f"{r} extends past row {mask.rows}")
        rows = slice(r.row_start, r.row_end)
        labels = model.labels[rows][mask.ink[rows]]
        if labels.size == 0:
            raise EmptyRegion(f"line {r.line_id} has no ink pixels")
        counts = np.bincount(labels, minlength=model.k)
        dominant = int(np.argmax(counts))
        entries.append(LineClusterEntry(r.line_id, dominant, float(counts[dominant] / labels.size),
                                        int(labels.size)))
    return LineClusterTable(tuple(entries))


# ---------------------------------------------------------------------------
# PNG

def _chunk(kind: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(kind + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + kind + payload + struct.pack(">I", crc)


def encode_png(pixels: np.ndarray) -> bytes:
    """8-bit PNG from a ``(rows, cols)`` gray or ``(rows, cols, 3)`` RGB array."""
    arr = np.asarray(pixels)
    if arr.dtype != np.uint8:
        raise ValueError("PNG pixels must be uint8")
    if arr.ndim == 2:
        color_type, channels = 0, 1
    elif arr.ndim == 3 and arr.shape[2] == 3:
        color_type, channels = 2, 3
    else:
        raise ValueError(f"unsupported pixel array shape {arr.shape}")
    rows, cols = arr.shape[:2]
    scanlines = np.zeros((rows, 1 + cols * channels), dtype=np.uint8)  # filter byte 0
    scanlines[:, 1:] = arr.reshape(rows, cols * channels)
    ihdr = struct.pack(">IIBBBBB", cols, rows, 8, color_type, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(scanlines.tobytes(), 9))
        + _chunk(b"IEND", b"")
    )


def write_png(image: SegmentedImage) -> bytes:
    return encode_png(np.asarray(image.rgb, dtype=np.uint8))


def mask_png(mask: BinaryMask) -> bytes:
    """Ink black (0), background white (255)."""
    return encode_png(np.where(mask.ink, 0, 255).astype(np.uint8))


def gray_png(values: np.ndarray) -> bytes:
    """Min-max stretch a real image to 0..255."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        scaled = np.round((v - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.zeros_like(v)
    return encode_png(scaled.astype(np.uint8))
