"""inkscan: ink mismatch detection in hyperspectral document images."""

from inkscan.hypercube_io import EnviHeader, GrayImage, HyperCube, band, load_cube, parse_envi_header, write_cube
from inkscan.kmeans import ClusterModel, KMeansConfig, run_kmeans
from inkscan.preprocess import BinaryMask, LineRegion, Rect

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "ClusterModel",
    "EnviHeader",
    "GrayImage",
    "HyperCube",
    "KMeansConfig",
    "LineRegion",
    "Rect",
    "band",
    "load_cube",
    "parse_envi_header",
    "run_kmeans",
    "write_cube",
]
