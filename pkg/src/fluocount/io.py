"""File formats: PPM frames, manifests, ground-truth boxes and reports.

Frame directories hold binary PPM (P6) files named frame_%06d.ppm next to a
plain key=value manifest.txt. Videos are exploded to frames externally; no
codec support here.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import Frame
from .detect import Detection, FrameResult, VideoReport
from .evaluate import GroundTruthBox

FRAME_PATTERN = "frame_%06d.ppm"


class FormatError(ValueError):
    """A file does not parse as the expected format."""


# ---------------------------------------------------------------- rasters

def write_ppm(path, pixels: np.ndarray):
    arr = np.asarray(pixels, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise FormatError("PPM writer needs an (h, w, 3) raster")
    h, w = arr.shape[:2]
    with _atomic(path) as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(arr.tobytes())


def write_pgm(path, raster: np.ndarray):
    arr = np.asarray(raster)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    arr = arr.astype(np.uint8)
    if arr.ndim != 2:
        raise FormatError("PGM writer needs a single-channel raster")
    h, w = arr.shape
    with _atomic(path) as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(arr.tobytes())


def _read_pnm_header(f, magic: bytes):
    if f.read(2) != magic:
        raise FormatError(f"not a {magic.decode()} file")
    fields = []
    while len(fields) < 3:
        line = f.readline()
        if not line:
            raise FormatError("truncated header")
        text = line.split(b"#", 1)[0]
        fields.extend(int(tok) for tok in text.split())
    w, h, maxval = fields[:3]
    if maxval != 255:
        raise FormatError("only 8-bit rasters supported")
    return w, h


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as f:
        w, h = _read_pnm_header(f, b"P6")
        data = f.read(w * h * 3)
        if len(data) != w * h * 3:
            raise FormatError(f"truncated pixel data in {path}")
        return np.frombuffer(data, dtype=np.uint8).reshape(h, w, 3)


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        w, h = _read_pnm_header(f, b"P5")
        data = f.read(w * h)
        if len(data) != w * h:
            raise FormatError(f"truncated pixel data in {path}")
        return np.frombuffer(data, dtype=np.uint8).reshape(h, w)


# ---------------------------------------------------------------- manifest

def write_manifest(path, width: int, height: int, frame_count: int, fps: float = 24.0):
    lines = [f"width={width}", f"height={height}", f"frames={frame_count}", f"fps={fps}"]
    with _atomic(path) as f:
        f.write(("\n".join(lines) + "\n").encode("ascii"))


def read_manifest(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise FormatError(f"cannot read manifest {path}: {e}") from e
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{ln}: expected key=value")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    for key in ("width", "height", "frames"):
        if key not in out:
            raise FormatError(f"{path}: missing required key '{key}'")
        out[key] = int(out[key])
    out["fps"] = float(out.get("fps", 24.0))
    return out


def load_frames(directory):
    """Yield Frame objects for a frame directory, in index order."""
    directory = Path(directory)
    manifest = read_manifest(directory / "manifest.txt")
    frames_dir = directory / "frames"
    for i in range(manifest["frames"]):
        path = frames_dir / (FRAME_PATTERN % i)
        try:
            pixels = read_ppm(path)
        except (OSError, FormatError) as e:
            raise FormatError(f"frame {i}: {e}") from e
        yield Frame(pixels=pixels, index=i)


# ---------------------------------------------------------------- ground truth

def write_ground_truth(path, boxes):
    lines = ["# frame_index x y width height"]
    for b in boxes:
        lines.append(f"{b.frame_index} {b.x} {b.y} {b.width} {b.height}")
    with _atomic(path) as f:
        f.write(("\n".join(lines) + "\n").encode("ascii"))


def read_ground_truth(path) -> list[GroundTruthBox]:
    boxes = []
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise FormatError(f"cannot read ground truth {path}: {e}") from e
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(f"{path}:{ln}: expected 5 fields, got {len(parts)}")
        try:
            fi, x, y, w, h = (int(p) for p in parts)
            boxes.append(GroundTruthBox(frame_index=fi, x=x, y=y, width=w, height=h))
        except ValueError as e:
            raise FormatError(f"{path}:{ln}: {e}") from e
    return boxes


# ---------------------------------------------------------------- reports

def report_to_json_dict(report: VideoReport) -> dict:
    return {
        "config": report.config,
        "global_count": report.global_count,
        "frames": [
            {
                "index": fr.frame_index,
                "blobs": fr.blob_count,
                "detections": [
                    {
                        "x": d.x,
                        "y": d.y,
                        "width": d.width,
                        "height": d.height,
                        "area_px": d.area_px,
                        "score": d.score,
                    }
                    for d in fr.detections
                ],
            }
            for fr in report.frames
        ],
    }


def write_report_json(path, report: VideoReport):
    with _atomic(path) as f:
        f.write(json.dumps(report_to_json_dict(report), indent=1, sort_keys=True).encode("ascii"))
        f.write(b"\n")


def read_report_json(path) -> VideoReport:
    try:
        d = json.loads(Path(path).read_text())
        frames = []
        for fr in d["frames"]:
            dets = tuple(
                Detection(
                    frame_index=fr["index"],
                    x=dd["x"],
                    y=dd["y"],
                    width=dd["width"],
                    height=dd["height"],
                    area_px=dd["area_px"],
                    score=dd["score"],
                )
                for dd in fr["detections"]
            )
            frames.append(FrameResult(frame_index=fr["index"], blob_count=fr["blobs"], detections=dets))
        return VideoReport(frames=frames, global_count=d["global_count"], config=d.get("config", {}))
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise FormatError(f"bad report file {path}: {e}") from e


def write_report_text(path, report: VideoReport):
    """Line-oriented report: config echo, one frame line per frame, one
    detection line per box. Stable formatting for byte-identical reruns."""
    lines = ["# fluocount report v1"]
    for key in sorted(report.config):
        lines.append(f"config {key}={json.dumps(report.config[key], sort_keys=True)}")
    running = 0
    prev = 0
    for fr in report.frames:
        running += max(0, fr.blob_count - prev)
        prev = fr.blob_count
        lines.append(f"frame {fr.frame_index} blobs={fr.blob_count} global={running}")
        for d in fr.detections:
            lines.append(
                f"det {fr.frame_index} {d.x} {d.y} {d.width} {d.height} {d.area_px} {d.score:.4f}"
            )
    lines.append(f"total {report.global_count}")
    with _atomic(path) as f:
        f.write(("\n".join(lines) + "\n").encode("ascii"))


def write_pr_file(path, curve):
    lines = ["# score_threshold precision recall", f"# auc {curve.auc:.6f}"]
    for thr, p, r in curve.points:
        lines.append(f"{thr:.6f} {p:.6f} {r:.6f}")
    with _atomic(path) as f:
        f.write(("\n".join(lines) + "\n").encode("ascii"))


# ---------------------------------------------------------------- benchmark

def write_benchmark(directory, spec, progress=None):
    """Write a self-contained benchmark: frames, manifest, GT, calibration.

    Frames render lazily, one at a time. `progress` is an optional callback
    taking the frame index.
    """
    from . import synth  # local import to keep io free of the generator dep

    spec.validate()
    directory = Path(directory)
    (directory / "frames").mkdir(parents=True, exist_ok=True)
    gts = []
    for i in range(spec.frame_count):
        pixels = synth.render_frame(spec, i)
        write_ppm(directory / "frames" / (FRAME_PATTERN % i), pixels)
        gts.extend(synth.frame_ground_truth(spec, i))
        if progress:
            progress(i)
    write_manifest(directory / "manifest.txt", spec.width, spec.height, spec.frame_count, spec.fps)
    write_ground_truth(directory / "gt.txt", gts)
    calib_dir = directory / "calibration"
    calib_dir.mkdir(exist_ok=True)
    images, masks = synth.make_calibration_set(spec.seed)
    for k, (img, mask) in enumerate(zip(images, masks)):
        write_ppm(calib_dir / f"calib_{k:02d}.ppm", img)
        write_pgm(calib_dir / f"mask_{k:02d}.pgm", mask)
    with _atomic(directory / "scene.json") as f:
        f.write(spec.to_json().encode("ascii"))
        f.write(b"\n")


# ---------------------------------------------------------------- helpers

class _atomic:
    """Write to a temp file in the target directory, rename on success."""

    def __init__(self, path):
        self.path = Path(path)
        self.tmp = None

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, name = tempfile.mkstemp(dir=self.path.parent, prefix=self.path.name + ".tmp")
        self.tmp = name
        self.file = os.fdopen(fd, "wb")
        return self.file

    def __exit__(self, exc_type, exc, tb):
        self.file.close()
        if exc_type is None:
            os.replace(self.tmp, self.path)
        else:
            os.unlink(self.tmp)
        return False
