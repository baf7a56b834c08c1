"""Mean spectral response of the ink pixels in each text line."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence

import numpy as np

from inkscan.errors import DimensionMismatch, EmptyRegion, LengthMismatch, UnknownLineId
from inkscan.hypercube_io import HyperCube
from inkscan.preprocess import BinaryMask, LineRegion
from inkscan.svgplot import line_chart


@dataclass(frozen=True)
class SpectralSignature:
    line_id: int
    mean_reflectance: np.ndarray = field(repr=False)
    pixel_count: int


def mean_signature(cube: HyperCube, mask: BinaryMask, region: LineRegion) -> SpectralSignature:
    """Average spectrum of the masked pixels inside ``region``'s rows.

    Pixels are gathered in row-major order and summed in float64, so results
    are reproducible bit for bit. The mean is clamped into the per-band range
    of the contributing pixels to absorb the last-ulp rounding of the division.
    """
    if (mask.rows, mask.cols) != (cube.rows, cube.cols):
        raise DimensionMismatch("mask and cube spatial dimensions differ")
    if region.row_end > cube.rows:
        raise DimensionMismatch(f"{region} extends past row {cube.rows}")
    rows = slice(region.row_start, region.row_end)
    pix = cube.data[rows][mask.ink[rows]]
    n = pix.shape[0]
    if n == 0:
        raise EmptyRegion(f"line {region.line_id} has no ink pixels")
    by_band = np.ascontiguousarray(pix.T)
    mean = by_band.sum(axis=1) / n
    mean = np.clip(mean, by_band.min(axis=1), by_band.max(axis=1))
    mean.flags.writeable = False
    return SpectralSignature(region.line_id, mean, int(n))


def line_signatures(cube: HyperCube, mask: BinaryMask,
                    regions: Iterable[LineRegion]) -> List[SpectralSignature]:
    return [mean_signature(cube, mask, r) for r in regions]


def export_signatures(signatures: Sequence[SpectralSignature],
                      wavelengths_nm: Sequence[float]) -> str:
    """CSV with one row per band and one column per line.

    Values are written with ``repr`` so they parse back to the same floats.
    """
    wl = list(wavelengths_nm)
    for s in signatures:
        if len(s.mean_reflectance) != len(wl):
            raise LengthMismatch(
                f"line {s.line_id} has {len(s.mean_reflectance)} bands, expected {len(wl)}"
            )
    header = ",".join(["wavelength_nm"] + [f"line_{s.line_id}" for s in signatures])
    if not signatures:
        return header + "\n"
    rows = [header]
    for b, w in enumerate(wl):
        rows.append(",".join([repr(float(w))] + [repr(float(s.mean_reflectance[b])) for s in signatures]))
    return "\n".join(rows) + "\n"


def render_signature_plot(signatures: Sequence[SpectralSignature], wavelengths_nm: Sequence[float],
                          selection: Sequence[int], title: str = "Mean spectral responses") -> str:
    if not selection:
        raise ValueError("selection must name at least one line")
    by_id = {s.line_id: s for s in signatures}
    missing = [i for i in selection if i not in by_id]
    if missing:
        raise UnknownLineId(f"no signature for line(s) {missing}")
    series = [(f"line {i}", by_id[i].mean_reflectance) for i in selection]
    return line_chart(wavelengths_nm, series, title)
