"""Synthetic night-footage generator with exact ground truth.

Frames are rendered per index from a deterministic scene description: dark
grass texture, a moving UV beam disc with radial falloff, pink insect
ellipses that are only bright enough to detect inside the beam, and violet
clutter specks that fool a pure-luminance detector but fail the pink RGB
ordering. Rendering is pure per frame, so frames can be produced lazily,
in any order, or in parallel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .evaluate import GroundTruthBox

# insect pixel-size statistics used when randomizing ellipse axes
INSECT_WIDTH_MEAN = 7.8
INSECT_WIDTH_STD = 2.7
INSECT_LENGTH_MEAN = 14.6
INSECT_LENGTH_STD = 5.0

INSECT_COLOR = (255, 0, 128)  # passes all threshold clauses at full beam
CLUTTER_COLOR = (160, 0, 255)  # violet: fails r > b at any brightness

# radial brightness profile of a rendered insect (elliptical radius units)
_CORE_RHO = 0.7
_GLOW_RHO = 1.3
_GLOW_LEVEL = 0.3

CALIBRATION_COUNT = 9
CALIBRATION_SIZE = 64
CALIBRATION_VALUE = 40  # flat insect brightness in the calibration set

# distinct RNG streams derived from the scene seed
_STREAM_FRAME = 0
_STREAM_CALIBRATION = 1
_STREAM_GRID = 2


@dataclass(frozen=True)
class InsectSpec:
    x: float
    y: float
    half_width: float
    half_length: float
    angle_deg: float = 0.0


@dataclass(frozen=True)
class ClutterSpec:
    x: float
    y: float
    radius: float = 3.5
    gain: float = 1.25


@dataclass
class SceneSpec:
    frame_count: int
    width: int = 720
    height: int = 720
    fps: float = 24.0
    beam_start: tuple[float, float] = (360.0, 360.0)
    beam_step: tuple[float, float] = (0.0, 0.0)  # px/frame, linear motion
    beam_radius: float = 400.0
    beam_falloff_exp: float = 2.0
    insects: list[InsectSpec] = field(default_factory=list)
    clutter: list[ClutterSpec] = field(default_factory=list)
    grass_amplitude: int = 16
    seed: int = 0
    gt_min_area: int = 20
    gt_value_floor: int = 40

    def validate(self):
        if self.frame_count <= 0:
            raise ValueError("frame_count must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame size must be positive")
        if self.beam_radius <= 0:
            raise ValueError("beam_radius must be positive")
        if self.grass_amplitude < 0 or self.grass_amplitude > 255:
            raise ValueError("grass_amplitude outside [0, 255]")
        for ins in self.insects:
            if ins.half_width <= 0 or ins.half_length <= 0:
                raise ValueError("insect axes must be positive")
        for c in self.clutter:
            if c.radius <= 0 or c.gain <= 0:
                raise ValueError("clutter radius and gain must be positive")

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SceneSpec":
        d = json.loads(text)
        d["insects"] = [InsectSpec(**i) for i in d.get("insects", [])]
        d["clutter"] = [ClutterSpec(**c) for c in d.get("clutter", [])]
        d["beam_start"] = tuple(d["beam_start"])
        d["beam_step"] = tuple(d["beam_step"])
        spec = cls(**d)
        spec.validate()
        return spec


def beam_center(spec: SceneSpec, frame_index: int) -> tuple[float, float]:
    return (
        spec.beam_start[0] + spec.beam_step[0] * frame_index,
        spec.beam_start[1] + spec.beam_step[1] * frame_index,
    )


def _beam_field(spec: SceneSpec, frame_index: int) -> np.ndarray:
    """Per-pixel beam intensity in [0, 1] (cosine-power radial falloff)."""
    cx, cy = beam_center(spec, frame_index)
    ys = np.arange(spec.height, dtype=np.float64)[:, None]
    xs = np.arange(spec.width, dtype=np.float64)[None, :]
    d = np.hypot(xs - cx, ys - cy)
    t = np.minimum(d / spec.beam_radius, 1.0)
    return np.cos(0.5 * math.pi * t) ** spec.beam_falloff_exp


def _beam_at(spec: SceneSpec, frame_index: int, x: float, y: float) -> float:
    """Beam intensity at a single point."""
    cx, cy = beam_center(spec, frame_index)
    t = min(math.hypot(x - cx, y - cy) / spec.beam_radius, 1.0)
    return math.cos(0.5 * math.pi * t) ** spec.beam_falloff_exp


def _insect_brightness(spec: SceneSpec, insect: InsectSpec, frame_index: int):
    """Local bbox slices plus the per-pixel brightness factor f*g in [0, 1].

    The beam factor f is sampled once at the insect center (insects span a
    few pixels, so the beam is locally flat); this keeps the lit core a
    single flat plateau with exactly one regional maximum. g is 1 in the
    elliptical core, fading linearly through a glow rim that extends past
    the nominal boundary so nearby insects merge under thresholding alone.
    """
    extent = _GLOW_RHO * max(insect.half_width, insect.half_length) + 2.0
    y0 = max(0, int(math.floor(insect.y - extent)))
    y1 = min(spec.height, int(math.ceil(insect.y + extent)) + 1)
    x0 = max(0, int(math.floor(insect.x - extent)))
    x1 = min(spec.width, int(math.ceil(insect.x + extent)) + 1)
    if y0 >= y1 or x0 >= x1:
        return None
    ys = np.arange(y0, y1, dtype=np.float64)[:, None] - insect.y
    xs = np.arange(x0, x1, dtype=np.float64)[None, :] - insect.x
    th = math.radians(insect.angle_deg)
    u = xs * math.cos(th) + ys * math.sin(th)
    w = -xs * math.sin(th) + ys * math.cos(th)
    rho = np.hypot(u / insect.half_width, w / insect.half_length)
    g = np.clip(1.0 - (rho - _CORE_RHO) * (1.0 - _GLOW_LEVEL) / (_GLOW_RHO - _CORE_RHO), 0.0, 1.0)
    g[rho > _GLOW_RHO] = 0.0
    f = _beam_at(spec, frame_index, insect.x, insect.y)
    val = np.clip(f * g, 0.0, 1.0)
    return (slice(y0, y1), slice(x0, x1)), val


def _round8(x) -> np.ndarray:
    return np.floor(x + 0.5).astype(np.uint8)


def render_frame(spec: SceneSpec, frame_index: int) -> np.ndarray:
    """Render one frame as an (h, w, 3) uint8 raster. Pure and deterministic."""
    beam = _beam_field(spec, frame_index)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((spec.seed, _STREAM_FRAME, frame_index))))
    # grass: green-dominant dim texture, brighter inside the beam but kept
    # below the default brightness floor so it never seeds the watershed
    g0 = rng.integers(0, spec.grass_amplitude + 1, size=(spec.height, spec.width)).astype(np.float64)
    lit = 1.0 + 1.2 * beam
    img = np.zeros((spec.height, spec.width, 3), dtype=np.uint8)
    img[..., 0] = _round8(np.minimum(g0 * 0.4 * lit, 255.0))
    img[..., 1] = _round8(np.minimum(g0 * lit, 255.0))
    img[..., 2] = _round8(np.minimum(g0 * 0.3 * lit, 255.0))

    for c in spec.clutter:
        rad = int(math.ceil(c.radius)) + 1
        y0 = max(0, int(c.y) - rad)
        y1 = min(spec.height, int(c.y) + rad + 1)
        x0 = max(0, int(c.x) - rad)
        x1 = min(spec.width, int(c.x) + rad + 1)
        if y0 >= y1 or x0 >= x1:
            continue
        ys = np.arange(y0, y1, dtype=np.float64)[:, None] - c.y
        xs = np.arange(x0, x1, dtype=np.float64)[None, :] - c.x
        inside = np.hypot(xs, ys) <= c.radius
        a = np.minimum(beam[y0:y1, x0:x1] * c.gain, 1.0)
        paint = inside & (a * CLUTTER_COLOR[2] >= 0.5)
        for ch, base in enumerate(CLUTTER_COLOR):
            plane = img[y0:y1, x0:x1, ch]
            plane[paint] = _round8(a * base)[paint]

    for ins in spec.insects:
        hit = _insect_brightness(spec, ins, frame_index)
        if hit is None:
            continue
        (sy, sx), val = hit
        paint = val * INSECT_COLOR[0] >= 0.5
        for ch, base in enumerate(INSECT_COLOR):
            plane = img[sy, sx, ch]
            plane[paint] = _round8(val * base)[paint]
    return img


def _visible_pixels(spec: SceneSpec, insect: InsectSpec, frame_index: int):
    hit = _insect_brightness(spec, insect, frame_index)
    if hit is None:
        return None
    (sy, sx), val = hit
    v = np.floor(val * INSECT_COLOR[0] + 0.5)
    vis = v > spec.gt_value_floor
    return (sy, sx), vis


def frame_ground_truth(spec: SceneSpec, frame_index: int) -> list[GroundTruthBox]:
    """Boxes of insects whose in-beam rendered area reaches gt_min_area."""
    return [box for _, box in _frame_gt_with_ids(spec, frame_index)]


def _frame_gt_with_ids(spec: SceneSpec, frame_index: int):
    out = []
    for idx, ins in enumerate(spec.insects):
        got = _visible_pixels(spec, ins, frame_index)
        if got is None:
            continue
        (sy, sx), vis = got
        area = int(vis.sum())
        if area < spec.gt_min_area:
            continue
        ys, xs = np.nonzero(vis)
        x0 = int(xs.min()) + sx.start
        y0 = int(ys.min()) + sy.start
        box = GroundTruthBox(
            frame_index=frame_index,
            x=x0,
            y=y0,
            width=int(xs.max() - xs.min()) + 1,
            height=int(ys.max() - ys.min()) + 1,
        )
        out.append((idx, box))
    return out


def visible_insect_ids(spec: SceneSpec, frame_index: int) -> set[int]:
    return {idx for idx, _ in _frame_gt_with_ids(spec, frame_index)}


def make_calibration_set(seed: int = 0):
    """Nine single-insect-on-black images plus their insect masks.

    Every insect pixel has the same flat brightness, so the calibrated value
    floor is independent of which calibration images are used.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, _STREAM_CALIBRATION))))
    level = CALIBRATION_VALUE
    color = (level, 0, int(np.floor(INSECT_COLOR[2] / 255.0 * level + 0.5)))
    images = []
    masks = []
    for _ in range(CALIBRATION_COUNT):
        a = max(1.5, rng.normal(INSECT_WIDTH_MEAN, INSECT_WIDTH_STD) / 2.0)
        b = max(2.5, rng.normal(INSECT_LENGTH_MEAN, INSECT_LENGTH_STD) / 2.0)
        angle = rng.uniform(0.0, 180.0)
        cx = CALIBRATION_SIZE / 2.0 + rng.uniform(-4, 4)
        cy = CALIBRATION_SIZE / 2.0 + rng.uniform(-4, 4)
        ys = np.arange(CALIBRATION_SIZE, dtype=np.float64)[:, None] - cy
        xs = np.arange(CALIBRATION_SIZE, dtype=np.float64)[None, :] - cx
        th = math.radians(angle)
        u = xs * math.cos(th) + ys * math.sin(th)
        w = -xs * math.sin(th) + ys * math.cos(th)
        inside = np.hypot(u / a, w / b) <= 1.0
        img = np.zeros((CALIBRATION_SIZE, CALIBRATION_SIZE, 3), dtype=np.uint8)
        for ch in range(3):
            img[..., ch][inside] = color[ch]
        images.append(img)
        masks.append(inside)
    return images, masks


def random_insects(rng, count: int, x_range, y_range,
                   min_half_width: float = 1.0, min_half_length: float = 1.5) -> list[InsectSpec]:
    """Insects with axes drawn from the size statistics, clamped positive."""
    out = []
    for _ in range(count):
        out.append(
            InsectSpec(
                x=float(rng.uniform(*x_range)),
                y=float(rng.uniform(*y_range)),
                half_width=float(max(min_half_width, rng.normal(INSECT_WIDTH_MEAN, INSECT_WIDTH_STD) / 2.0)),
                half_length=float(max(min_half_length, rng.normal(INSECT_LENGTH_MEAN, INSECT_LENGTH_STD) / 2.0)),
                angle_deg=float(rng.uniform(0.0, 180.0)),
            )
        )
    return out


def grid_spec(frame_count: int = 500, seed: int = 7, clutter: bool = True,
              clutter_count: int = 10) -> SceneSpec:
    """The 36-insect benchmark: a 6x6 grid swept top-to-bottom by the beam.

    Geometry keeps every grid row's beam-entry window clear of every exit
    window, so each insect contributes exactly one rise to the global counter.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, _STREAM_GRID))))
    spacing = 76.0
    insects = []
    for row in range(6):
        for col in range(6):
            x = 360.0 + (col - 2.5) * spacing + rng.uniform(-3, 3)
            y = 360.0 + (row - 2.5) * spacing + rng.uniform(-3, 3)
            insects.append(
                InsectSpec(
                    x=x,
                    y=y,
                    # floors keep even the smallest draw comfortably above the
                    # blob size filter so per-insect visibility is unimodal
                    half_width=float(np.clip(rng.normal(INSECT_WIDTH_MEAN, INSECT_WIDTH_STD) / 2.0, 3.0, 6.5)),
                    half_length=float(np.clip(rng.normal(INSECT_LENGTH_MEAN, INSECT_LENGTH_STD) / 2.0, 5.5, 11.0)),
                    angle_deg=float(rng.uniform(0.0, 180.0)),
                )
            )
    specks = []
    if clutter:
        while len(specks) < clutter_count:
            x = float(rng.uniform(60, 660))
            y = float(rng.uniform(60, 660))
            if min((x - i.x) ** 2 + (y - i.y) ** 2 for i in insects) < 40.0**2:
                continue
            specks.append(
                ClutterSpec(x=x, y=y, radius=float(rng.uniform(3.0, 4.5)), gain=float(rng.uniform(1.1, 1.4)))
            )
    travel = 960.0
    return SceneSpec(
        frame_count=frame_count,
        width=720,
        height=720,
        beam_start=(360.0, -120.0),
        beam_step=(0.0, travel / frame_count),
        beam_radius=400.0,
        beam_falloff_exp=2.0,
        insects=insects,
        clutter=specks,
        seed=seed,
    )


def render_video(spec: SceneSpec):
    """Materialize (frames, ground truth boxes, calibration set) for a spec.

    For long videos prefer render_frame/frame_ground_truth per index; this
    holds every frame in memory.
    """
    spec.validate()
    frames = [render_frame(spec, i) for i in range(spec.frame_count)]
    gts = [box for i in range(spec.frame_count) for box in frame_ground_truth(spec, i)]
    calibration = make_calibration_set(spec.seed)
    return frames, gts, calibration
