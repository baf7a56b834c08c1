"""Synthetic handwritten hyperspectral pages with known ink ground truth.

Each ink is modelled as paper reflectance with one Gaussian absorption dip.
Text lines are drawn as seeded random-walk strokes, optionally with a thin
printed rule line under each line of text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from inkscan.errors import LayoutOverflow
from inkscan.hypercube_io import HyperCube
from inkscan.preprocess import LineRegion

BACKGROUND = -1
RULE_LINE = -2


@dataclass(frozen=True)
class InkParams:
    center_nm: float
    width_nm: float
    depth: float

    def __post_init__(self):
        if self.width_nm <= 0:
            raise ValueError("width_nm must be positive")
        if not 0 <= self.depth <= 1:
            raise ValueError("depth must lie in [0, 1]")


# Broad dips centred across the orange-red range, so every ink is dark in
# the green band used for thresholding while their spectral shapes differ.
DEFAULT_INKS = (
    InkParams(580.0, 60.0, 0.75),
    InkParams(620.0, 80.0, 0.70),
    InkParams(660.0, 100.0, 0.80),
    InkParams(600.0, 120.0, 0.60),
    InkParams(700.0, 140.0, 0.85),
)

DEFAULT_LINE_TO_INK = (0, 0, 1, 1, 2, 2, 3, 3, 3, 3, 4, 4)


@dataclass(frozen=True)
class SynthSpec:
    rows: int = 512
    cols: int = 650
    bands: int = 149
    wavelength_range_nm: Tuple[float, float] = (478.0, 901.0)
    n_lines: int = 12
    line_to_ink: Tuple[int, ...] = DEFAULT_LINE_TO_INK
    ink_params: Tuple[InkParams, ...] = DEFAULT_INKS
    paper_reflectance: float = 0.9
    rule_reflectance: float = 0.5
    noise_sigma: float = 0.01
    rule_lines: bool = True
    seed: int = 0

    def __post_init__(self):
        if min(self.rows, self.cols, self.bands, self.n_lines) < 1:
            raise ValueError("rows, cols, bands and n_lines must be positive")
        if len(self.line_to_ink) != self.n_lines:
            raise ValueError(f"line_to_ink has {len(self.line_to_ink)} entries for {self.n_lines} lines")
        if any(not 0 <= i < len(self.ink_params) for i in self.line_to_ink):
            raise ValueError("line_to_ink refers to an undefined ink")
        if any(not 0 < p.depth <= 1 for p in self.ink_params):
            raise ValueError("ink depth must lie in (0, 1]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not 0 <= self.paper_reflectance <= 1:
            raise ValueError("paper_reflectance must lie in [0, 1]")

    def wavelengths(self) -> np.ndarray:
        lo, hi = self.wavelength_range_nm
        return np.linspace(lo, hi, self.bands)


@dataclass(frozen=True)
class GroundTruth:
    ink_label: np.ndarray = field(repr=False)  # -1 background, -2 rule line, else ink index
    line_regions: Tuple[LineRegion, ...]
    line_to_ink: Tuple[int, ...]

    def to_json(self) -> str:
        doc = {
            "line_to_ink": list(self.line_to_ink),
            "line_regions": [[r.row_start, r.row_end] for r in self.line_regions],
        }
        return json.dumps(doc, indent=1) + "\n"


def ink_spectrum(params: InkParams, wavelengths_nm: Sequence[float],
                 paper_reflectance: float = 0.9) -> np.ndarray:
    wl = np.asarray(wavelengths_nm, dtype=np.float64)
    dip = params.depth * np.exp(-((wl - params.center_nm) ** 2) / (2.0 * params.width_nm ** 2))
    return np.clip(paper_reflectance * (1.0 - dip), 0.0, 1.0)


@dataclass(frozen=True)
class _Layout:
    text_rows: List[Tuple[int, int]]
    rule_rows: List[int]
    left: int
    right: int


def _layout(spec: SynthSpec) -> _Layout:
    margin = max(1, spec.rows // 32)
    pitch = (spec.rows - 2 * margin) // spec.n_lines
    # text band, >= 4 blank rows, rule line, then spacing to the next band
    text_h = int(round(pitch * 0.55))
    pad = max(1, int(round(pitch * 0.15)))
    if text_h < 6 or pad + text_h + 5 >= pitch:
        raise LayoutOverflow(f"{spec.n_lines} lines do not fit in {spec.rows} rows")
    text_rows, rule_rows = [], []
    for i in range(spec.n_lines):
        top = margin + i * pitch + pad
        text_rows.append((top, top + text_h))
        rule_rows.append(top + text_h + 4)
    mx = max(1, spec.cols // 16)
    if spec.cols - 2 * mx < 8:
        raise LayoutOverflow(f"{spec.cols} columns are too narrow for text")
    return _Layout(text_rows, rule_rows, mx, spec.cols - mx)


def _draw_line(rng: np.random.Generator, out: np.ndarray, top: int, bottom: int,
               left: int, right: int, value: int) -> None:
    """Random-walk pen strokes, grouped into words, inside one text band."""
    width = right - left
    n_words = 9
    gap = max(1, width // 60)
    word_w = max(2, (width - gap * (n_words - 1)) // n_words)
    h = bottom - top
    for w in range(n_words):
        x0 = left + w * (word_w + gap)
        x1 = min(right, x0 + word_w)
        x, y = float(x0), float(rng.uniform(top, bottom - 2))
        while x < x1 - 1:
            x += rng.uniform(0.0, 0.7)
            y += rng.normal(0.0, 0.25 * h / 4)
            if y < top:
                y = 2 * top - y
            if y > bottom - 2:
                y = 2 * (bottom - 2) - y
            y = min(max(y, top), bottom - 2)
            r, c = int(y), int(x)
            out[r:r + 2, c:min(c + 2, x1)] = value


def generate(spec: SynthSpec = SynthSpec()) -> Tuple[HyperCube, GroundTruth]:
    layout = _layout(spec)
    rng = np.random.default_rng(spec.seed)
    wl = spec.wavelengths()

    label = np.full((spec.rows, spec.cols), BACKGROUND, dtype=np.int64)
    if spec.rule_lines:
        for r in layout.rule_rows:
            label[r, :] = RULE_LINE
    regions = []
    for i, ((top, bottom), ink) in enumerate(zip(layout.text_rows, spec.line_to_ink)):
        _draw_line(rng, label, top, bottom, layout.left, layout.right, ink)
        inked = np.flatnonzero((label[top:bottom] >= 0).any(axis=1))
        regions.append(LineRegion(i + 1, top + int(inked[0]), top + int(inked[-1]) + 1))

    data = np.empty((spec.rows, spec.cols, spec.bands))
    data[...] = spec.paper_reflectance
    data[label == RULE_LINE] = spec.rule_reflectance
    for idx, params in enumerate(spec.ink_params):
        sel = label == idx
        if sel.any():
            data[sel] = ink_spectrum(params, wl, spec.paper_reflectance)
    if spec.noise_sigma > 0:
        noise_rng = np.random.default_rng([spec.seed, 1])
        step = 32
        for r in range(0, spec.rows, step):
            block = data[r:r + step]
            block += noise_rng.normal(0.0, spec.noise_sigma, size=block.shape)
            np.clip(block, 0.0, 1.0, out=block)
    data.flags.writeable = False
    label.flags.writeable = False
    gt = GroundTruth(label, tuple(regions), tuple(spec.line_to_ink))
    return HyperCube(data, wl), gt
