"""ENVI header/raw parsing, cube containers and single-band access.

Cubes are held in memory as ``(rows, cols, bands)`` float64 arrays in C order,
i.e. band-interleaved-by-pixel, so each pixel's spectrum is contiguous.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from inkscan.errors import (
    BandOutOfRange,
    InputError,
    MissingKey,
    NonFiniteValue,
    TruncatedData,
    UnsupportedDataType,
    UnsupportedFeature,
    WavelengthCountMismatch,
)

# ENVI "data type" code -> numpy base type
ENVI_DTYPES = {
    1: np.uint8,
    2: np.int16,
    4: np.float32,
    12: np.uint16,
}

INTERLEAVES = ("bsq", "bil", "bip")
BYTE_ORDERS = ("little", "big")

_REQUIRED = ("samples", "lines", "bands", "interleave", "data type")


@dataclass(frozen=True)
class EnviHeader:
    samples: int
    lines: int
    bands: int
    interleave: str
    data_type_code: int
    byte_order: str = "little"
    header_offset: int = 0
    wavelengths_nm: Optional[tuple] = None

    def __post_init__(self):
        for name in ("samples", "lines", "bands"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.interleave not in INTERLEAVES:
            raise InputError(f"unknown interleave {self.interleave!r}")
        if self.data_type_code not in ENVI_DTYPES:
            raise UnsupportedDataType(f"ENVI data type {self.data_type_code} is not supported")
        if self.byte_order not in BYTE_ORDERS:
            raise InputError(f"unknown byte order {self.byte_order!r}")
        if self.header_offset < 0:
            raise InputError("header offset must be non-negative")
        if self.wavelengths_nm is not None and len(self.wavelengths_nm) != self.bands:
            raise WavelengthCountMismatch(
                f"{len(self.wavelengths_nm)} wavelengths listed for {self.bands} bands"
            )

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(ENVI_DTYPES[self.data_type_code]).newbyteorder(
            "<" if self.byte_order == "little" else ">"
        )

    @property
    def payload_bytes(self) -> int:
        return self.samples * self.lines * self.bands * self.dtype.itemsize


class HyperCube:
    """Immutable reflectance cube.

    Args:
        data: array of shape ``(rows, cols, bands)``. Copied to float64 and
            frozen unless it already is a read-only float64 array.
        wavelengths_nm: one value per band; band indices when omitted.
    """

    __slots__ = ("data", "wavelengths_nm")

    def __init__(self, data, wavelengths_nm: Optional[Sequence[float]] = None):
        arr = np.asarray(data)
        if arr.ndim != 3 or 0 in arr.shape:
            raise ValueError(f"cube data must be a non-empty 3-D array, got shape {arr.shape}")
        if arr.dtype != np.float64 or arr.flags.writeable:
            arr = np.array(arr, dtype=np.float64)
            arr.flags.writeable = False
        if not np.isfinite(arr).all():
            raise NonFiniteValue("cube contains NaN or Inf")
        if wavelengths_nm is None:
            wl = np.arange(arr.shape[2], dtype=np.float64)
        else:
            wl = np.array(wavelengths_nm, dtype=np.float64)
            if wl.shape != (arr.shape[2],):
                raise WavelengthCountMismatch(
                    f"{wl.size} wavelengths for {arr.shape[2]} bands"
                )
        wl.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "wavelengths_nm", wl)

    def __setattr__(self, name, value):
        raise AttributeError("HyperCube is immutable")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def bands(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def pixels(self) -> np.ndarray:
        """Read-only ``(rows*cols, bands)`` view, row-major over pixels."""
        return self.data.reshape(-1, self.bands)

    def __eq__(self, other):
        if not isinstance(other, HyperCube):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.data, other.data)
            and np.array_equal(self.wavelengths_nm, other.wavelengths_nm)
        )

    def __repr__(self):
        return f"HyperCube({self.rows}x{self.cols}x{self.bands})"


@dataclass(frozen=True)
class GrayImage:
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or 0 in v.shape:
            raise ValueError(f"gray image must be a non-empty 2-D array, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise NonFiniteValue("gray image contains NaN or Inf")
        object.__setattr__(self, "values", v)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


# ---------------------------------------------------------------------------
# header text

_LIST_RE = re.compile(r"\{([^}]*)\}", re.S)


def _header_entries(text: str) -> dict:
    entries = {}
    lines = text.splitlines()
    i = 1
    while i < len(lines):
        line = lines[i]
        i += 1
        if not line.strip() or line.lstrip().startswith(";") or "=" not in line:
            continue
        key, _, value = line.partition("=")
        value = value.strip()
        if value.startswith("{"):
            while "}" not in value and i < len(lines):
                value += "\n" + lines[i]
                i += 1
            if "}" not in value:
                raise InputError(f"unterminated brace list for key {key.strip()!r}")
        entries[" ".join(key.lower().split())] = value
    return entries


def _brace_list(value: str) -> list:
    m = _LIST_RE.search(value)
    if m is None:
        raise InputError(f"expected a brace-enclosed list, got {value!r}")
    return [tok.strip() for tok in m.group(1).split(",") if tok.strip()]


def _int(entries: dict, key: str) -> int:
    try:
        return int(entries[key])
    except ValueError:
        raise InputError(f"header value for {key!r} is not an integer: {entries[key]!r}") from None


def parse_envi_header(text: str) -> EnviHeader:
    """Parse ENVI ``.hdr`` text into an :class:`EnviHeader`.

    Keys are case-insensitive and unknown keys are ignored. A ``bbl`` list
    that marks any band bad and non-zero frame offsets are rejected, since
    the loader does not model them.
    """
    if not text.lstrip().startswith("ENVI"):
        raise InputError("header does not begin with 'ENVI'")
    entries = _header_entries(text.lstrip())
    for key in _REQUIRED:
        if key not in entries:
            raise MissingKey(f"header is missing required key {key!r}")

    interleave = entries["interleave"].strip().lower()
    if interleave not in INTERLEAVES:
        raise InputError(f"unknown interleave {entries['interleave']!r}")

    byte_order = "little"
    if "byte order" in entries:
        code = _int(entries, "byte order")
        if code not in (0, 1):
            raise InputError(f"byte order must be 0 or 1, got {code}")
        byte_order = BYTE_ORDERS[code]

    if "bbl" in entries and any(float(v) == 0 for v in _brace_list(entries["bbl"])):
        raise UnsupportedFeature("bad-band lists are not supported")
    for key in ("major frame offsets", "minor frame offsets"):
        if key in entries and any(int(v) != 0 for v in _brace_list(entries[key])):
            raise UnsupportedFeature(f"{key!r} is not supported")

    wavelengths = None
    if "wavelength" in entries:
        try:
            wavelengths = tuple(float(v) for v in _brace_list(entries["wavelength"]))
        except ValueError as exc:
            raise InputError(f"bad wavelength entry: {exc}") from None

    return EnviHeader(
        samples=_int(entries, "samples"),
        lines=_int(entries, "lines"),
        bands=_int(entries, "bands"),
        interleave=interleave,
        data_type_code=_int(entries, "data type"),
        byte_order=byte_order,
        header_offset=_int(entries, "header offset") if "header offset" in entries else 0,
        wavelengths_nm=wavelengths,
    )


# ---------------------------------------------------------------------------
# raw payload

# axis order of the on-disk array for each interleave, expressed over
# (rows, cols, bands)
_DISK_AXES = {
    "bsq": (2, 0, 1),  # bands, rows, cols
    "bil": (0, 2, 1),  # rows, bands, cols
    "bip": (0, 1, 2),  # rows, cols, bands
}


def load_cube(header: EnviHeader, raw: bytes) -> HyperCube:
    """Deinterleave a raw payload into a :class:`HyperCube`.

    Integer samples are converted to float verbatim, without rescaling.
    """
    need = header.header_offset + header.payload_bytes
    if len(raw) < need:
        raise TruncatedData(f"raw data has {len(raw)} bytes, header requires {need}")
    flat = np.frombuffer(raw, dtype=header.dtype, count=header.samples * header.lines * header.bands,
                         offset=header.header_offset)
    dims = {0: header.lines, 1: header.samples, 2: header.bands}
    axes = _DISK_AXES[header.interleave]
    disk = flat.reshape([dims[a] for a in axes])
    data = np.ascontiguousarray(np.transpose(disk, np.argsort(axes)), dtype=np.float64)
    if header.data_type_code == 4 and not np.isfinite(data).all():
        raise NonFiniteValue("float32 payload contains NaN or Inf")
    data.flags.writeable = False
    return HyperCube(data, header.wavelengths_nm)


def format_envi_header(header: EnviHeader) -> str:
    out = [
        "ENVI",
        "description = {inkscan cube}",
        f"samples = {header.samples}",
        f"lines = {header.lines}",
        f"bands = {header.bands}",
        f"header offset = {header.header_offset}",
        "file type = ENVI Standard",
        f"data type = {header.data_type_code}",
        f"interleave = {header.interleave}",
        f"byte order = {BYTE_ORDERS.index(header.byte_order)}",
    ]
    if header.wavelengths_nm is not None:
        out.append("wavelength units = Nanometers")
        out.append("wavelength = {" + ", ".join(repr(float(w)) for w in header.wavelengths_nm) + "}")
    return "\n".join(out) + "\n"


def write_cube(cube: HyperCube, interleave: str = "bsq", byte_order: str = "little") -> tuple:
    """Serialize ``cube`` as float32 ENVI.

    Returns:
        ``(header_text, raw_bytes)``; the payload starts at offset 0.
    """
    interleave = interleave.lower()
    if interleave not in INTERLEAVES:
        raise ValueError(f"unknown interleave {interleave!r}")
    header = EnviHeader(
        samples=cube.cols,
        lines=cube.rows,
        bands=cube.bands,
        interleave=interleave,
        data_type_code=4,
        byte_order=byte_order,
        header_offset=0,
        wavelengths_nm=tuple(float(w) for w in cube.wavelengths_nm),
    )
    disk = np.transpose(cube.data, _DISK_AXES[interleave])
    raw = np.ascontiguousarray(disk, dtype=header.dtype).tobytes()
    return format_envi_header(header), raw


def band(cube: HyperCube, index: int) -> GrayImage:
    if not 0 <= index < cube.bands:
        raise BandOutOfRange(f"band {index} outside 0..{cube.bands - 1}")
    return GrayImage(cube.data[:, :, index])


# ---------------------------------------------------------------------------
# files

PathLike = Union[str, Path]

_RAW_SUFFIXES = (".raw", ".img", ".dat", ".bil", ".bsq", ".bip", "")


def find_raw_file(header_path: PathLike) -> Path:
    hdr = Path(header_path)
    for suffix in _RAW_SUFFIXES:
        cand = hdr.with_suffix(suffix)
        if cand != hdr and cand.is_file():
            return cand
    raise InputError(f"no raw data file found next to {hdr}")


def read_envi(header_path: PathLike, raw_path: Optional[PathLike] = None) -> HyperCube:
    header_path = Path(header_path)
    try:
        text = header_path.read_text(encoding="latin-1")
    except OSError as exc:
        raise InputError(f"cannot read header {header_path}: {exc}") from None
    header = parse_envi_header(text)
    raw_path = Path(raw_path) if raw_path is not None else find_raw_file(header_path)
    try:
        raw = raw_path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read raw data {raw_path}: {exc}") from None
    return load_cube(header, raw)


def read_envi_header(header_path: PathLike) -> EnviHeader:
    try:
        return parse_envi_header(Path(header_path).read_text(encoding="latin-1"))
    except OSError as exc:
        raise InputError(f"cannot read header {header_path}: {exc}") from None


def write_envi(cube: HyperCube, header_path: PathLike, interleave: str = "bsq",
               byte_order: str = "little") -> tuple:
    """Write ``<stem>.hdr`` and ``<stem>.raw``; returns both paths."""
    header_path = Path(header_path).with_suffix(".hdr")
    text, raw = write_cube(cube, interleave, byte_order)
    raw_path = header_path.with_suffix(".raw")
    header_path.write_text(text, encoding="latin-1")
    raw_path.write_bytes(raw)
    return header_path, raw_path
