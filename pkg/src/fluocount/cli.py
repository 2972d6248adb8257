"""Batch command-line surface: detect, eval, synth, calibrate.

Every threshold constant is overridable by a long flag; a plain key=value
config file supplies defaults. Reports embed the fully resolved
configuration so a run is reproducible from its own output.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

import numpy as np

from . import baseline, detect, evaluate, io, synth, threshold
from .core import DimensionError, crop_roi

CONFIG_KEYS = ("mu_v", "h_ut", "h_lt", "s_lt", "s_ut", "n_p", "roi", "smooth_radius", "iou_min", "mode")


class CliError(Exception):
    pass


def _parse_config_file(path) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read config {path}: {e}") from e
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{ln}: expected key=value")
        key, val = line.split("=", 1)
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise CliError(f"{path}:{ln}: unknown key '{key}'")
        values[key] = val.strip()
    return values


def _roi_dims(value: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)(?:x(\d+))?", value.strip())
    if not m:
        raise CliError(f"bad ROI '{value}', expected SIZE or WIDTHxHEIGHT")
    w = int(m.group(1))
    h = int(m.group(2)) if m.group(2) else w
    return w, h


def _add_pipeline_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--mu-v", type=int, help="brightness (value channel) floor")
    p.add_argument("--h-ut", type=int, help="upper hue threshold")
    p.add_argument("--h-lt", type=int, help="lower hue threshold")
    p.add_argument("--s-lt", type=int, help="lower saturation threshold")
    p.add_argument("--s-ut", type=int, help="upper saturation threshold")
    p.add_argument("--n-p", type=int, help="minimum blob area in pixels")
    p.add_argument("--roi", help="ROI as SIZE or WIDTHxHEIGHT (default 720)")
    p.add_argument("--smooth-radius", type=int, help="box smoothing radius (default 1)")


def _resolve_pipeline(args) -> detect.PipelineConfig:
    values = _parse_config_file(args.config) if args.config else {}

    def pick(flag, key, default, cast=int):
        v = getattr(args, flag, None)
        if v is not None:
            return v
        if key in values:
            try:
                return cast(values[key])
            except ValueError as e:
                raise CliError(f"config key {key}: {e}") from e
        return default

    roi_raw = args.roi if getattr(args, "roi", None) else values.get("roi", "720")
    roi_w, roi_h = _roi_dims(str(roi_raw))
    try:
        cfg = detect.PipelineConfig(
            thresholds=threshold.ThresholdConfig(
                value_floor=pick("mu_v", "mu_v", 40),
                hue_upper=pick("h_ut", "h_ut", 220),
                hue_lower=pick("h_lt", "h_lt", 25),
                sat_lower=pick("s_lt", "s_lt", 90),
                sat_upper=pick("s_ut", "s_ut", 255),
            ),
            roi_width=roi_w,
            roi_height=roi_h,
            smooth_radius=pick("smooth_radius", "smooth_radius", detect.DEFAULT_SMOOTH_RADIUS),
            min_blob_px=pick("n_p", "n_p", detect.DEFAULT_MIN_BLOB_PX),
        )
    except ValueError as e:
        raise CliError(str(e)) from e
    return cfg


def _annotate(roi_pixels: np.ndarray, detections, running_count: int) -> np.ndarray:
    from PIL import Image, ImageDraw

    img = Image.fromarray(roi_pixels, mode="RGB")
    draw = ImageDraw.Draw(img)
    for d in detections:
        draw.rectangle([d.x, d.y, d.x + d.width - 1, d.y + d.height - 1], outline=(0, 255, 0))
    draw.text((4, 4), str(running_count), fill=(0, 255, 0))
    return np.asarray(img)


def cmd_detect(args) -> int:
    cfg = _resolve_pipeline(args)
    mode = args.mode or (_parse_config_file(args.config).get("mode") if args.config else None) or "main"
    if mode not in ("main", "baseline"):
        raise CliError(f"unknown mode '{mode}'")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        if mode == "main":
            report = detect.run_video(io.load_frames(args.input_dir), cfg)
        else:
            otsu = baseline.video_max_threshold(io.load_frames(args.input_dir), cfg)
            report = baseline.binarize_pass(io.load_frames(args.input_dir), otsu.video_max, cfg)
    except (io.FormatError, DimensionError, ValueError) as e:
        raise CliError(str(e)) from e
    report.config["mode"] = mode

    io.write_report_text(out_dir / "report.txt", report)
    io.write_report_json(out_dir / "report.json", report)

    if args.annotate:
        ann_dir = out_dir / "annotated"
        ann_dir.mkdir(exist_ok=True)
        running = 0
        prev = 0
        for frame, fr in zip(io.load_frames(args.input_dir), report.frames):
            running = detect.update_counter(prev, fr.blob_count, running)
            prev = fr.blob_count
            roi = crop_roi(frame, cfg.roi_width, cfg.roi_height)
            io.write_ppm(ann_dir / (io.FRAME_PATTERN % frame.index), _annotate(roi.pixels, fr.detections, running))

    print(f"frames={len(report.frames)} global_count={report.global_count} mode={mode}")
    print(f"report written to {out_dir / 'report.txt'} and {out_dir / 'report.json'}")
    return 0


def cmd_eval(args) -> int:
    try:
        report = io.read_report_json(args.report)
        gts = io.read_ground_truth(args.gt)
    except io.FormatError as e:
        raise CliError(str(e)) from e
    if not gts:
        raise CliError(f"ground truth file {args.gt} contains no boxes")
    iou_min = args.iou_min if args.iou_min is not None else 0.5
    try:
        curve = evaluate.pr_curve(report, gts, iou_min)
    except ValueError as e:
        raise CliError(str(e)) from e
    out = Path(args.out) if args.out else Path(args.report).with_name("pr.txt")
    io.write_pr_file(out, curve)
    f1, thr, p, r = evaluate.best_f1(curve)
    print(f"auc={curve.auc:.6f} best_f1={f1:.6f} at threshold={thr:.4f} precision={p:.6f} recall={r:.6f}")
    print(f"PR table written to {out}")
    return 0


def cmd_synth(args) -> int:
    if args.spec:
        try:
            spec = synth.SceneSpec.from_json(Path(args.spec).read_text())
        except (OSError, ValueError, TypeError, KeyError) as e:
            raise CliError(f"bad scene spec: {e}") from e
        if args.frames is not None or args.seed is not None:
            raise CliError("--frames/--seed conflict with an explicit --spec file")
    else:
        spec = synth.grid_spec(
            frame_count=args.frames if args.frames is not None else 120,
            seed=args.seed if args.seed is not None else 7,
            clutter=not args.no_clutter,
        )
    try:
        spec.validate()
        io.write_benchmark(args.out_dir, spec)
    except ValueError as e:
        raise CliError(str(e)) from e
    print(f"benchmark written to {args.out_dir} ({spec.frame_count} frames, {len(spec.insects)} insects)")
    return 0


_NUM = re.compile(r"(\d+)")


def _index_of(path: Path):
    m = _NUM.findall(path.stem)
    return m[-1] if m else path.stem


def cmd_calibrate(args) -> int:
    image_dir = Path(args.image_dir)
    mask_dir = Path(args.mask_dir) if args.mask_dir else image_dir
    images = {_index_of(p): p for p in sorted(image_dir.glob("*.ppm"))}
    masks = {_index_of(p): p for p in sorted(mask_dir.glob("*.pgm"))}
    if not images:
        raise CliError(f"no .ppm calibration images in {image_dir}")
    if set(images) != set(masks):
        raise CliError(f"unpaired calibration files: images {sorted(images)} vs masks {sorted(masks)}")
    try:
        imgs = [io.read_ppm(images[k]) for k in sorted(images)]
        msks = [io.read_pgm(masks[k]) > 0 for k in sorted(masks)]
        floor = threshold.calibrate_value_floor(imgs, msks)
    except (io.FormatError, ValueError) as e:
        raise CliError(str(e)) from e
    print(floor)
    if args.write_config:
        _patch_config(args.write_config, "mu_v", floor)
        print(f"mu_v={floor} written to {args.write_config}")
    return 0


def _patch_config(path, key, value):
    path = Path(path)
    lines = path.read_text().splitlines() if path.exists() else []
    out = []
    found = False
    for line in lines:
        stripped = line.split("#", 1)[0].strip()
        if "=" in stripped and stripped.split("=", 1)[0].strip() == key:
            out.append(f"{key}={value}")
            found = True
        else:
            out.append(line)
    if not found:
        out.append(f"{key}={value}")
    with io._atomic(path) as f:
        f.write(("\n".join(out) + "\n").encode("ascii"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluocount", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run a detection pipeline over a frame directory")
    p.add_argument("input_dir", help="directory with frames/ and manifest.txt")
    p.add_argument("--out", required=True, help="output directory for reports")
    p.add_argument("--mode", choices=("main", "baseline"), help="pipeline to run (default main)")
    p.add_argument("--annotate", action="store_true", help="write annotated ROI frames")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score a report against ground truth")
    p.add_argument("report", help="report.json from a detect run")
    p.add_argument("gt", help="ground truth box file")
    p.add_argument("--iou-min", type=float, help="IoU acceptance threshold (default 0.5)")
    p.add_argument("--out", help="PR table output path (default next to report)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic benchmark directory")
    p.add_argument("out_dir")
    p.add_argument("--spec", help="scene spec JSON file")
    p.add_argument("--frames", type=int, help="frame count for the grid preset")
    p.add_argument("--seed", type=int, help="seed for the grid preset")
    p.add_argument("--no-clutter", action="store_true", help="disable violet clutter specks")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("calibrate", help="estimate the brightness floor from calibration images")
    p.add_argument("image_dir", help="directory of .ppm calibration images")
    p.add_argument("--mask-dir", help="directory of .pgm insect masks (default image_dir)")
    p.add_argument("--write-config", help="config file to patch with the result")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
