"""Staged end-to-end run: crop, threshold, lines, signatures, clustering, segmentation.

Each stage writes its artifacts before the next begins, and the manifest is
rewritten after every stage, so a failed run leaves the completed prefix on
disk together with a record of where it stopped.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from inkscan import kmeans, preprocess, segment, signatures
from inkscan.errors import InkscanError, InputError
from inkscan.hypercube_io import HyperCube, band, write_envi
from inkscan.labelmap import decode_label_map, encode_label_map

log = logging.getLogger(__name__)

STAGES = (
    "crop", "band", "histogram", "mask", "lines", "signatures",
    "suppress", "cluster", "centroids", "segment", "table",
)

_INIT_ALIASES = {"uniform": "uniform_spread", "uniform_spread": "uniform_spread", "kmeanspp": "kmeanspp"}


@dataclass(frozen=True)
class PipelineConfig:
    crop: Optional[Tuple[int, int, int, int]] = None  # top, left, height, width
    threshold_band: int = preprocess.DEFAULT_THRESHOLD_BAND
    threshold: Optional[float] = None
    ink_is_dark: bool = True
    fill: float = 1.0
    nbins: int = 256
    line_regions: Optional[Tuple[Tuple[int, int], ...]] = None
    min_gap_rows: int = preprocess.DEFAULT_MIN_GAP_ROWS
    min_line_rows: int = preprocess.DEFAULT_MIN_LINE_ROWS
    signature_groups: Tuple[Tuple[int, ...], ...] = ()
    k: int = 7
    max_iterations: int = 500
    seed: int = 0
    init: str = "kmeanspp"
    palette: Optional[Tuple[Tuple[int, int, int], ...]] = None
    merge_clusters: Tuple[int, ...] = ()
    interleave: str = "bsq"

    def __post_init__(self):
        if self.k < 2:
            raise InputError("pipeline mode needs k >= 2 (one cluster absorbs the background)")
        if self.init not in _INIT_ALIASES:
            raise InputError(f"unknown init strategy {self.init!r}")

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(doc)
        if "crop" in kw and kw["crop"] is not None:
            c = kw["crop"]
            kw["crop"] = (int(c["top"]), int(c["left"]), int(c["height"]), int(c["width"])) \
                if isinstance(c, dict) else tuple(int(v) for v in c)
        if kw.get("line_regions") is not None:
            kw["line_regions"] = tuple((int(a), int(b)) for a, b in kw["line_regions"])
        if "signature_groups" in kw:
            kw["signature_groups"] = tuple(tuple(int(i) for i in g) for g in kw["signature_groups"])
        if kw.get("palette") is not None:
            kw["palette"] = tuple(tuple(int(v) for v in c) for c in kw["palette"])
        if "merge_clusters" in kw:
            kw["merge_clusters"] = tuple(int(v) for v in kw["merge_clusters"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise InputError(f"bad config: {exc}") from None

    def with_overrides(self, **overrides) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def kmeans_config(self) -> kmeans.KMeansConfig:
        return kmeans.KMeansConfig(k=self.k, max_iterations=self.max_iterations, seed=self.seed,
                                   init_strategy=_INIT_ALIASES[self.init])

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))


class StageFailure(InkscanError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineResult:
    config: PipelineConfig
    cropped: Optional[HyperCube] = None
    histogram: Optional[preprocess.Histogram] = None
    threshold: Optional[float] = None
    mask: Optional[preprocess.BinaryMask] = None
    regions: List[preprocess.LineRegion] = field(default_factory=list)
    signatures: List[signatures.SpectralSignature] = field(default_factory=list)
    suppressed: Optional[HyperCube] = None
    model: Optional[kmeans.ClusterModel] = None
    background_label: Optional[int] = None
    image: Optional[segment.SegmentedImage] = None
    table: Optional[segment.LineClusterTable] = None
    stages: List[dict] = field(default_factory=list)


def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


class _Writer:
    def __init__(self, out_dir: Optional[Path]):
        self.out_dir = out_dir
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
        self.pending: List[str] = []

    def text(self, name: str, content: str) -> None:
        if self.out_dir is not None:
            (self.out_dir / name).write_text(content, encoding="utf-8")
        self.pending.append(name)

    def binary(self, name: str, content: bytes) -> None:
        if self.out_dir is not None:
            (self.out_dir / name).write_bytes(content)
        self.pending.append(name)

    def cube(self, stem: str, cube: HyperCube, interleave: str) -> None:
        if self.out_dir is not None:
            write_envi(cube, self.out_dir / f"{stem}.hdr", interleave)
        self.pending += [f"{stem}.hdr", f"{stem}.raw"]

    def take(self) -> List[str]:
        names, self.pending = self.pending, []
        return names

    def discard(self) -> None:
        """Remove whatever the current (failed) stage already wrote."""
        for name in self.take():
            if self.out_dir is not None:
                (self.out_dir / name).unlink(missing_ok=True)


def write_manifest(out_dir: Optional[Path], source: str, config: PipelineConfig,
                   stages: Sequence[dict], extra: Optional[dict] = None) -> None:
    if out_dir is None:
        return
    doc = {
        "source": source,
        "seed": config.seed,
        "parameters": config.to_dict(),
        "stages": list(stages),
        "artifacts": [a for s in stages if s["status"] == "ok" for a in s["artifacts"]],
    }
    if extra:
        doc.update(extra)
    (out_dir / "manifest.json").write_text(_json(doc), encoding="utf-8")


def load_cluster_model(model_json: Path, labels_bin: Path) -> kmeans.ClusterModel:
    doc = json.loads(Path(model_json).read_text())
    labels = decode_label_map(Path(labels_bin).read_bytes())
    return kmeans.ClusterModel(
        k=int(doc["k"]),
        centroids=np.asarray(doc["centroids"], dtype=np.float64),
        labels=labels,
        iterations_run=int(doc["iterations_run"]),
        sse=float(doc["sse"]),
        converged=bool(doc["converged"]),
        sse_history=tuple(doc.get("sse_history", ())),
    )


def run_pipeline(cube: HyperCube, config: PipelineConfig, out_dir: Optional[Path] = None,
                 until: str = "table", source: str = "",
                 preset_model: Optional[kmeans.ClusterModel] = None) -> PipelineResult:
    """Run stages up to and including ``until``.

    With ``out_dir`` None nothing is written and the intermediates are only
    returned. Raises :class:`StageFailure` naming the first stage that failed.
    """
    if until not in STAGES:
        raise ValueError(f"unknown stage {until!r}")
    out = Path(out_dir) if out_dir is not None else None
    w = _Writer(out)
    res = PipelineResult(config)
    extra: dict = {}
    wl = cube.wavelengths_nm

    def crop_stage():
        rect = preprocess.Rect(*config.crop) if config.crop else preprocess.Rect.full(cube)
        res.cropped = preprocess.crop(cube, rect)
        w.cube("cropped", res.cropped, config.interleave)

    def band_stage():
        img = band(res.cropped, config.threshold_band)
        w.binary(f"band_{config.threshold_band:03d}.png", segment.gray_png(img.values))

    def histogram_stage():
        res.histogram = preprocess.histogram(band(res.cropped, config.threshold_band), config.nbins)
        w.text("histogram.csv", res.histogram.to_csv())

    def mask_stage():
        img = band(res.cropped, config.threshold_band)
        res.threshold = (float(config.threshold) if config.threshold is not None
                         else preprocess.otsu_threshold(img, config.nbins))
        res.mask = preprocess.binarize(img, res.threshold, config.ink_is_dark)
        extra["threshold"] = res.threshold
        extra["ink_pixels"] = res.mask.ink_count
        w.binary("mask.png", segment.mask_png(res.mask))

    def lines_stage():
        if config.line_regions:
            res.regions = preprocess.regions_from_ranges(config.line_regions)
        else:
            res.regions = preprocess.segment_lines(res.mask, config.min_gap_rows, config.min_line_rows)
        doc = [{"line_id": r.line_id, "row_start": r.row_start, "row_end": r.row_end} for r in res.regions]
        w.text("line_regions.json", _json(doc))

    def signatures_stage():
        res.signatures = signatures.line_signatures(res.cropped, res.mask, res.regions)
        w.text("signatures.csv", signatures.export_signatures(res.signatures, wl))
        ids = [s.line_id for s in res.signatures]
        w.text("signatures_all.svg", signatures.render_signature_plot(res.signatures, wl, ids))
        for g, group in enumerate(config.signature_groups, start=1):
            title = "Mean spectral responses, lines " + ", ".join(map(str, group))
            w.text(f"signatures_group_{g}.svg",
                   signatures.render_signature_plot(res.signatures, wl, group, title))

    def suppress_stage():
        res.suppressed = preprocess.suppress_background(res.cropped, res.mask, config.fill)
        w.cube("suppressed", res.suppressed, config.interleave)

    def cluster_stage():
        if preset_model is not None:
            if preset_model.labels.shape != (res.cropped.rows, res.cropped.cols):
                raise InputError("preset label map does not match the cropped cube")
            res.model = preset_model
        else:
            res.model = kmeans.run_kmeans(res.suppressed, config.kmeans_config())
        extra["iterations_run"] = res.model.iterations_run
        extra["converged"] = res.model.converged
        log.info("k-means: %d iterations, converged=%s", res.model.iterations_run, res.model.converged)
        w.text("cluster_model.json", res.model.to_json())
        w.binary("labels.bin", encode_label_map(res.model.labels))

    def centroids_stage():
        w.text("centroids.svg", kmeans.centroid_plot(res.model, wl))

    def segment_stage():
        res.background_label = segment.background_cluster(res.model, res.mask)
        bg_rgb = segment.WHITE if config.fill >= 0.5 else segment.BLACK
        res.image = segment.colorize(res.model, config.palette, res.background_label, bg_rgb,
                                     config.merge_clusters)
        extra["background_cluster"] = res.background_label
        w.binary("segmented.png", segment.write_png(res.image))

    def table_stage():
        res.table = segment.line_cluster_table(res.model, res.regions, res.mask)
        w.text("line_clusters.csv", res.table.to_csv())
        w.text("line_clusters.txt", res.table.to_text())

    runners = {
        "crop": crop_stage, "band": band_stage, "histogram": histogram_stage, "mask": mask_stage,
        "lines": lines_stage, "signatures": signatures_stage, "suppress": suppress_stage,
        "cluster": cluster_stage, "centroids": centroids_stage, "segment": segment_stage,
        "table": table_stage,
    }
    for name in STAGES[: STAGES.index(until) + 1]:
        try:
            runners[name]()
        except Exception as exc:
            res.stages.append({"name": name, "status": "failed", "error": str(exc), "artifacts": []})
            w.discard()
            write_manifest(out, source, config, res.stages, extra)
            raise StageFailure(name, exc) from exc
        res.stages.append({"name": name, "status": "ok", "artifacts": w.take()})
        write_manifest(out, source, config, res.stages, extra)
    return res
