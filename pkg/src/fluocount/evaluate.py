"""Detection scoring: IoU matching, precision-recall curves and their area."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detect import VideoReport


@dataclass(frozen=True)
class GroundTruthBox:
    frame_index: int
    x: int
    y: int
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("ground truth boxes need positive width and height")

    @property
    def box(self) -> tuple[int, int, int, int]:
        return (self.x, self.y, self.width, self.height)


@dataclass(frozen=True)
class MatchResult:
    tp: int
    fp: int
    fn: int
    pairs: tuple[tuple[int, int], ...]  # (detection index, gt index)


@dataclass
class PRCurve:
    points: list[tuple[float, float, float]]  # (score threshold, precision, recall)
    auc: float


def iou(a, b) -> float:
    """Intersection over union of two (x, y, w, h) boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    if aw <= 0 or ah <= 0 or bw <= 0 or bh <= 0:
        raise ValueError("boxes must have positive area")
    ix = max(0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union


def match_frame(detections, gts, iou_min: float = 0.5) -> MatchResult:
    """Greedy one-to-one matching by descending IoU.

    A (detection, gt) pair is accepted when its IoU >= iou_min and neither
    member is already matched. Unmatched detections count as false positives,
    unmatched ground truths as false negatives.
    """
    if not 0 < iou_min <= 1:
        raise ValueError("iou_min must be in (0, 1]")
    candidates = []
    for di, det in enumerate(detections):
        box = det.box if hasattr(det, "box") else det
        for gi, gt in enumerate(gts):
            gbox = gt.box if hasattr(gt, "box") else gt
            v = iou(box, gbox)
            if v >= iou_min:
                candidates.append((-v, di, gi))
    candidates.sort()
    used_d = set()
    used_g = set()
    pairs = []
    for _, di, gi in candidates:
        if di in used_d or gi in used_g:
            continue
        used_d.add(di)
        used_g.add(gi)
        pairs.append((di, gi))
    tp = len(pairs)
    return MatchResult(tp=tp, fp=len(detections) - tp, fn=len(gts) - tp, pairs=tuple(pairs))


def auc_pr(points) -> float:
    """Area under a PR point set: monotone precision envelope, rectangle rule.

    Points are (threshold, precision, recall) or (precision, recall) tuples;
    integration runs over recall from 0 with each precision replaced by the
    best precision at equal-or-higher recall.
    """
    if not points:
        raise ValueError("need at least one PR point")
    prs = []
    for p in points:
        if len(p) == 3:
            _, prec, rec = p
        else:
            prec, rec = p
        prs.append((rec, prec))
    prs.sort()
    # envelope: max precision at equal-or-higher recall
    env = [0.0] * len(prs)
    best = 0.0
    for i in range(len(prs) - 1, -1, -1):
        best = max(best, prs[i][1])
        env[i] = best
    area = 0.0
    prev_r = 0.0
    for (rec, _), prec_env in zip(prs, env):
        area += (rec - prev_r) * prec_env
        prev_r = rec
    return area


class _FrameMatcher:
    """One frame's matching state across the threshold sweep.

    IoU candidate pairs are computed once; at each threshold the greedy
    matcher simply skips detections that fell below it. Because filtering
    preserves detection order, the greedy result is identical to running
    match_frame on the kept sublist.
    """

    def __init__(self, dets, gts, iou_min):
        self.scores = np.array([d.score for d in dets], dtype=np.float64)
        self.sorted_scores = np.sort(self.scores)
        self.n_gts = len(gts)
        self.candidates = []
        if dets and gts:
            d = np.array([det.box for det in dets], dtype=np.int64)
            g = np.array([gt.box if hasattr(gt, "box") else gt for gt in gts], dtype=np.int64)
            x1 = np.maximum(d[:, None, 0], g[None, :, 0])
            y1 = np.maximum(d[:, None, 1], g[None, :, 1])
            x2 = np.minimum(d[:, None, 0] + d[:, None, 2], g[None, :, 0] + g[None, :, 2])
            y2 = np.minimum(d[:, None, 1] + d[:, None, 3], g[None, :, 1] + g[None, :, 3])
            inter = np.maximum(0, x2 - x1) * np.maximum(0, y2 - y1)
            union = (d[:, None, 2] * d[:, None, 3] + g[None, :, 2] * g[None, :, 3] - inter)
            ious = inter / union
            for di, gi in zip(*np.nonzero(ious >= iou_min)):
                self.candidates.append((-ious[di, gi], int(di), int(gi)))
            self.candidates.sort()

    def stats(self, thr) -> tuple[int, int, int]:
        kept = len(self.scores) - int(np.searchsorted(self.sorted_scores, thr, side="left"))
        used_d = set()
        used_g = set()
        tp = 0
        for _, di, gi in self.candidates:
            if self.scores[di] < thr or di in used_d or gi in used_g:
                continue
            used_d.add(di)
            used_g.add(gi)
            tp += 1
        return tp, kept - tp, self.n_gts - tp


def pr_curve(report: VideoReport, gts, iou_min: float = 0.5) -> PRCurve:
    """Sweep the detection score threshold and aggregate matches per frame.

    Precision is 1.0 by convention when no detection survives a threshold.
    Raising the threshold only changes frames that lose a detection, so only
    those frames are re-matched between sweep points.
    """
    if not 0 < iou_min <= 1:
        raise ValueError("iou_min must be in (0, 1]")
    gts = list(gts)
    if not gts:
        raise ValueError("ground truth is empty")
    dets = report.all_detections()
    gts_by_frame = {}
    for g in gts:
        gts_by_frame.setdefault(g.frame_index, []).append(g)
    dets_by_frame = {}
    score_frames = {}
    for d in dets:
        dets_by_frame.setdefault(d.frame_index, []).append(d)
        score_frames.setdefault(d.score, set()).add(d.frame_index)
    scores = sorted(score_frames)
    thresholds = [(scores[0] - 1.0) if scores else 0.0] + scores

    tp = fp = fn = 0
    matchers = {}
    per_frame = {}
    for fi in set(dets_by_frame) | set(gts_by_frame):
        matcher = _FrameMatcher(dets_by_frame.get(fi, []), gts_by_frame.get(fi, []), iou_min)
        matchers[fi] = matcher
        stats = matcher.stats(thresholds[0])
        per_frame[fi] = stats
        tp += stats[0]
        fp += stats[1]
        fn += stats[2]

    points = []
    prev = thresholds[0]
    for thr in thresholds:
        # detections with score == prev drop out when moving up to thr
        if thr != prev:
            for fi in score_frames.get(prev, ()):
                stats = matchers[fi].stats(thr)
                old = per_frame[fi]
                tp += stats[0] - old[0]
                fp += stats[1] - old[1]
                fn += stats[2] - old[2]
                per_frame[fi] = stats
        precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
        recall = tp / (tp + fn)
        points.append((float(thr), precision, recall))
        prev = thr
    return PRCurve(points=points, auc=auc_pr(points))


def best_f1(curve: PRCurve) -> tuple[float, float, float, float]:
    """(f1, threshold, precision, recall) of the best operating point."""
    best = (-1.0, 0.0, 0.0, 0.0)
    for thr, p, r in curve.points:
        f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
        if f1 > best[0]:
            best = (f1, thr, p, r)
    return best
