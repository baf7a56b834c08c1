"""Binary label-map files.

Layout: 8-byte magic (NUL padded), rows and cols as little-endian uint32,
then one byte per pixel in row-major order.
"""

from __future__ import annotations

import struct

import numpy as np

from inkscan.errors import InputError

CLUSTER_MAGIC = b"INKLBL\0\0"
TRUTH_MAGIC = b"INKGT\0\0\0"
HEADER_SIZE = 16


def encode_label_map(labels: np.ndarray, magic: bytes = CLUSTER_MAGIC) -> bytes:
    """Pack a 2-D label array.

    Cluster maps are stored as uint8; ground-truth maps (which use -1/-2 for
    background and rule lines) as int8.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError("label map must be 2-D")
    dtype = np.int8 if magic == TRUTH_MAGIC else np.uint8
    info = np.iinfo(dtype)
    if labels.size and (labels.min() < info.min or labels.max() > info.max):
        raise ValueError(f"labels outside {dtype.__name__} range")
    rows, cols = labels.shape
    return magic + struct.pack("<II", rows, cols) + labels.astype(dtype).tobytes()


def decode_label_map(blob: bytes, magic: bytes = CLUSTER_MAGIC) -> np.ndarray:
    if len(blob) < HEADER_SIZE or blob[:8] != magic:
        raise InputError("not a label map with the expected magic")
    rows, cols = struct.unpack("<II", blob[8:16])
    if len(blob) != HEADER_SIZE + rows * cols:
        raise InputError(f"label map payload is {len(blob) - HEADER_SIZE} bytes, expected {rows * cols}")
    dtype = np.int8 if magic == TRUTH_MAGIC else np.uint8
    return np.frombuffer(blob, dtype=dtype, offset=HEADER_SIZE).reshape(rows, cols).astype(np.int64)
