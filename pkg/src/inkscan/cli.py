"""``inkscan`` command-line interface.

Exit codes: 0 success, 2 input/parse error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from inkscan import synth
from inkscan.errors import InkscanError, InputError
from inkscan.hypercube_io import ENVI_DTYPES, find_raw_file, read_envi, read_envi_header, write_envi
from inkscan.labelmap import TRUTH_MAGIC, encode_label_map
from inkscan.pipeline import PipelineConfig, StageFailure, load_cluster_model, run_pipeline, write_manifest

EXIT_OK, EXIT_INPUT, EXIT_STAGE = 0, 2, 3

_LAST_STAGE = {
    "crop": "crop",
    "threshold": "mask",
    "signatures": "signatures",
    "cluster": "centroids",
    "segment": "table",
    "pipeline": "table",
}


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _crop(text: str):
    vals = _int_list(text)
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("--crop takes TOP,LEFT,HEIGHT,WIDTH")
    return tuple(vals)


def _global_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="JSON pipeline config; flags override it")
    p.add_argument("--out", type=Path, default=Path("inkscan_out"), help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _stage_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("cube", type=Path, help="ENVI header (.hdr) of the input cube")
    p.add_argument("--crop", type=_crop, metavar="T,L,H,W")
    p.add_argument("--band", type=int, dest="threshold_band", help="band used for thresholding")
    p.add_argument("--threshold", type=float, help="manual threshold (skips Otsu)")
    p.add_argument("--ink-light", action="store_true", help="ink is brighter than paper")
    p.add_argument("--fill", type=float, help="background fill value (1 white, 0 black)")
    p.add_argument("--min-gap-rows", type=int)
    p.add_argument("--min-line-rows", type=int)
    p.add_argument("--group", type=_int_list, action="append", metavar="IDS",
                   help="comma-separated line ids plotted together (repeatable)")
    p.add_argument("--k", type=int)
    p.add_argument("--max-iter", type=int, dest="max_iterations")
    p.add_argument("--init", choices=["uniform", "kmeanspp"])
    p.add_argument("--merge-cluster", type=int, action="append", metavar="ID",
                   help="render this cluster as background (repeatable)")
    p.add_argument("--interleave", choices=["bsq", "bil", "bip"], help="interleave of written cubes")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inkscan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    g = _global_options()
    s = _stage_options()

    info = sub.add_parser("info", parents=[g], help="describe an ENVI cube")
    info.add_argument("cube", type=Path)

    helps = {
        "crop": "write the cropped cube",
        "threshold": "band image, histogram and ink mask",
        "signatures": "per-line mean spectra (CSV and SVG)",
        "cluster": "background-suppressed K-means",
        "segment": "color-segmented image and line/cluster table",
        "pipeline": "run every stage",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, parents=[g, s], help=text)
        if name == "segment":
            sp.add_argument("--model-dir", type=Path,
                            help="reuse cluster_model.json and labels.bin from a previous run")

    sy = sub.add_parser("synth", parents=[g], help="generate a synthetic document cube")
    sy.add_argument("--rows", type=int, default=512)
    sy.add_argument("--cols", type=int, default=650)
    sy.add_argument("--bands", type=int, default=149)
    sy.add_argument("--lines", type=int, default=None, help="number of text lines")
    sy.add_argument("--line-to-ink", type=_int_list, help="ink index per line")
    sy.add_argument("--noise", type=float, default=0.01)
    sy.add_argument("--no-rule-lines", action="store_true")
    sy.add_argument("--interleave", choices=["bsq", "bil", "bip"], default="bsq")
    return parser


def _load_config(args) -> PipelineConfig:
    doc = {}
    if args.config is not None:
        try:
            doc = json.loads(args.config.read_text())
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
    config = PipelineConfig.from_dict(doc)
    return config.with_overrides(
        crop=args.crop,
        threshold_band=args.threshold_band,
        threshold=args.threshold,
        ink_is_dark=False if args.ink_light else None,
        fill=args.fill,
        min_gap_rows=args.min_gap_rows,
        min_line_rows=args.min_line_rows,
        signature_groups=tuple(tuple(g) for g in args.group) if args.group else None,
        k=args.k,
        max_iterations=args.max_iterations,
        seed=args.seed,
        init=args.init,
        merge_clusters=tuple(args.merge_cluster) if args.merge_cluster else None,
        interleave=args.interleave,
    )


def cmd_info(path: Path) -> str:
    header = read_envi_header(path)
    raw = find_raw_file(path)
    if raw.stat().st_size < header.header_offset + header.payload_bytes:
        raise InputError(f"{raw} is shorter than the header requires")
    dims = f"{header.lines} x {header.samples} x {header.bands}"
    if header.wavelengths_nm:
        span = f"{min(header.wavelengths_nm):.1f}–{max(header.wavelengths_nm):.1f} nm"
    else:
        span = f"bands 0–{header.bands - 1} (no wavelengths)"
    dtype = ENVI_DTYPES[header.data_type_code].__name__
    return (f"{dims}, {span}\n"
            f"data type: {dtype} (code {header.data_type_code}), interleave: {header.interleave}, "
            f"byte order: {header.byte_order}\n")


def cmd_stage(args) -> int:
    config = _load_config(args)
    try:
        cube = read_envi(args.cube)
    except InputError as exc:
        args.out.mkdir(parents=True, exist_ok=True)
        stage = {"name": "load", "status": "failed", "error": str(exc), "artifacts": []}
        write_manifest(args.out, str(args.cube), config, [stage])
        raise
    preset = None
    if getattr(args, "model_dir", None) is not None:
        preset = load_cluster_model(args.model_dir / "cluster_model.json", args.model_dir / "labels.bin")
    result = run_pipeline(cube, config, args.out, until=_LAST_STAGE[args.command],
                          source=str(args.cube), preset_model=preset)
    if result.table is not None:
        sys.stdout.write(result.table.to_text())
    if result.model is not None:
        print(f"k-means: {result.model.iterations_run} iterations, converged={result.model.converged}")
    print(f"artifacts written to {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    kw = dict(rows=args.rows, cols=args.cols, bands=args.bands, noise_sigma=args.noise,
              rule_lines=not args.no_rule_lines, seed=args.seed or 0)
    if args.line_to_ink is not None:
        kw["line_to_ink"] = tuple(args.line_to_ink)
        kw["n_lines"] = len(args.line_to_ink)
    if args.lines is not None:
        kw["n_lines"] = args.lines
        if args.line_to_ink is None:
            n_inks = len(synth.DEFAULT_INKS)
            kw["line_to_ink"] = tuple((i * n_inks) // args.lines for i in range(args.lines))
    try:
        spec = synth.SynthSpec(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    cube, truth = synth.generate(spec)
    args.out.mkdir(parents=True, exist_ok=True)
    write_envi(cube, args.out / "synth.hdr", args.interleave)
    (args.out / "ground_truth.json").write_text(truth.to_json())
    (args.out / "ground_truth.bin").write_bytes(encode_label_map(truth.ink_label, TRUTH_MAGIC))
    print(f"wrote {args.out / 'synth.hdr'} ({cube.rows} x {cube.cols} x {cube.bands})")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "info":
            sys.stdout.write(cmd_info(args.cube))
            return EXIT_OK
        if args.command == "synth":
            return cmd_synth(args)
        return cmd_stage(args)
    except StageFailure as exc:
        print(f"inkscan: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (InputError, OSError) as exc:
        print(f"inkscan: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InkscanError as exc:
        print(f"inkscan: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
