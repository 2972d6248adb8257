"""Splitting merged insect groups: smoothing, regional maxima, watershed.

The peak image labels catchment basins grown from regional maxima of the
smoothed brightness channel; masking it with the detection mask keeps only
the basins inside thresholded blobs, so touching insects separate along
watershed ridges.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from scipy import ndimage
from skimage.morphology import local_maxima

from .core import DimensionError

_EIGHT = np.ones((3, 3), dtype=int)


def box_smooth(raster, radius: int) -> np.ndarray:
    """Box filter with coordinate-clamped borders; radius 0 is identity.

    Window sums are computed exactly (integer-safe cumulative sums), so the
    result is the true window mean, not a separable approximation.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    a = np.asarray(raster, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError("expected a single-channel raster")
    if radius == 0:
        return a.copy()
    span = 2 * radius + 1
    out = a
    for axis in (0, 1):
        pad = [(0, 0), (0, 0)]
        pad[axis] = (radius + 1, radius)
        p = np.pad(out, pad, mode="edge")
        if axis == 0:
            p[0, :] = 0.0
            c = np.cumsum(p, axis=0)
            out = c[span:, :] - c[:-span, :]
        else:
            p[:, 0] = 0.0
            c = np.cumsum(p, axis=1)
            out = c[:, span:] - c[:, :-span]
    return out / float(span * span)


def regional_maxima(raster, floor: float = 0.0) -> np.ndarray:
    """Seed components: 8-connected plateaus above all outside neighbors.

    Returns an int32 label raster (0 = background). Plateaus must be strictly
    greater than every 8-neighbor outside the plateau and have intensity >
    floor; a plateau covering the whole raster yields no seed. Labels are
    numbered by descending plateau intensity, ties by row-major position of
    the plateau's first pixel.
    """
    a = np.asarray(raster, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise DimensionError("expected a nonempty single-channel raster")
    peaks = local_maxima(a, connectivity=2, allow_borders=True)
    peaks &= a > floor
    lab, n = ndimage.label(peaks, structure=_EIGHT)
    if n == 0:
        return lab.astype(np.int32)
    # deterministic seed ids: brightest plateau first, then row-major
    flat = lab.ravel()
    uniq, first_idx = np.unique(flat, return_index=True)
    order = [
        (-a.ravel()[fi], int(fi), int(k))
        for k, fi in zip(uniq, first_idx)
        if k != 0
    ]
    order.sort()
    remap = np.zeros(n + 1, dtype=np.int32)
    for new_id, (_, _, k) in enumerate(order, start=1):
        remap[k] = new_id
    return remap[lab]


@njit(cache=True, fastmath=False)
def _flood(values, seeds, targets):  # pragma: no cover - exercised via watershed_peaks
    h, w = values.shape
    n = h * w
    vals = values.ravel()
    state = seeds.ravel().astype(np.int32).copy()
    tgt = targets.ravel()
    # stop once every target pixel is resolved; labels never change after
    # assignment, so the early exit leaves target pixels identical to a
    # full flood
    remaining = 0
    for idx in range(n):
        if tgt[idx] != 0 and state[idx] == 0:
            remaining += 1
    # binary max-heap: highest value first, row-major index breaks ties
    heap_v = np.empty(n + 8, np.float64)
    heap_i = np.empty(n + 8, np.int64)
    size = 0
    inq = np.zeros(n, np.uint8)

    def _push(hv, hi, sz, v, i):
        c = sz
        while c > 0:
            p = (c - 1) >> 1
            pv = hv[p]
            pi = hi[p]
            if v > pv or (v == pv and i < pi):
                hv[c] = pv
                hi[c] = pi
                c = p
            else:
                break
        hv[c] = v
        hi[c] = i
        return sz + 1

    # frontier: unlabeled 4-neighbors of seed pixels
    for idx in range(n):
        if state[idx] > 0:
            y = idx // w
            x = idx - y * w
            if y > 0 and state[idx - w] == 0 and inq[idx - w] == 0:
                inq[idx - w] = 1
                size = _push(heap_v, heap_i, size, vals[idx - w], idx - w)
            if y + 1 < h and state[idx + w] == 0 and inq[idx + w] == 0:
                inq[idx + w] = 1
                size = _push(heap_v, heap_i, size, vals[idx + w], idx + w)
            if x > 0 and state[idx - 1] == 0 and inq[idx - 1] == 0:
                inq[idx - 1] = 1
                size = _push(heap_v, heap_i, size, vals[idx - 1], idx - 1)
            if x + 1 < w and state[idx + 1] == 0 and inq[idx + 1] == 0:
                inq[idx + 1] = 1
                size = _push(heap_v, heap_i, size, vals[idx + 1], idx + 1)

    while size > 0 and remaining > 0:
        idx = heap_i[0]
        # pop: move last element down from the root
        size -= 1
        mv = heap_v[size]
        mi = heap_i[size]
        p = 0
        while True:
            l = 2 * p + 1
            if l >= size:
                break
            r = l + 1
            bv = heap_v[l]
            bi = heap_i[l]
            best = l
            if r < size:
                rv = heap_v[r]
                ri = heap_i[r]
                if rv > bv or (rv == bv and ri < bi):
                    bv = rv
                    bi = ri
                    best = r
            if bv > mv or (bv == mv and bi < mi):
                heap_v[p] = bv
                heap_i[p] = bi
                p = best
            else:
                break
        heap_v[p] = mv
        heap_i[p] = mi

        if state[idx] != 0:
            continue
        y = idx // w
        x = idx - y * w
        lab = 0
        ridge = False
        for k in range(4):
            if k == 0:
                ok = y > 0
                nidx = idx - w
            elif k == 1:
                ok = y + 1 < h
                nidx = idx + w
            elif k == 2:
                ok = x > 0
                nidx = idx - 1
            else:
                ok = x + 1 < w
                nidx = idx + 1
            if ok:
                s = state[nidx]
                if s > 0:
                    if lab == 0:
                        lab = s
                    elif s != lab:
                        ridge = True
        if ridge or lab == 0:
            state[idx] = -1
            if tgt[idx] != 0:
                remaining -= 1
        else:
            state[idx] = lab
            if tgt[idx] != 0:
                remaining -= 1
            for k in range(4):
                if k == 0:
                    ok = y > 0
                    nidx = idx - w
                elif k == 1:
                    ok = y + 1 < h
                    nidx = idx + w
                elif k == 2:
                    ok = x > 0
                    nidx = idx - 1
                else:
                    ok = x + 1 < w
                    nidx = idx + 1
                if ok and state[nidx] == 0 and inq[nidx] == 0:
                    inq[nidx] = 1
                    size = _push(heap_v, heap_i, size, vals[nidx], nidx)

    out = np.empty(n, np.int32)
    for idx in range(n):
        out[idx] = state[idx] if state[idx] > 0 else 0
    return out.reshape(h, w)


def watershed_peaks(raster, seeds, targets=None) -> np.ndarray:
    """Marker watershed: basins flood from seeds by descending intensity.

    seeds is an int32 label raster (e.g. from regional_maxima). Flooding is
    4-connected, ordered by descending raster value with row-major tie-break;
    pixels reached by two basins at once become ridge pixels (label 0). With
    no seeds the result is all zero.

    When targets (a boolean raster) is given, flooding stops once every
    target pixel has been assigned; target pixels carry exactly the labels a
    full flood would give, while remaining pixels may stay 0. Use this when
    the result is to be masked to the target region anyway.
    """
    a = np.asarray(raster, dtype=np.float64)
    s = np.asarray(seeds)
    if a.shape != s.shape:
        raise DimensionError(f"seed raster {s.shape} does not match raster {a.shape}")
    if not s.any():
        return np.zeros(a.shape, dtype=np.int32)
    if targets is None:
        t = np.ones(a.shape, dtype=np.uint8)
    else:
        t = np.asarray(targets)
        if t.shape != a.shape:
            raise DimensionError(
                f"target raster {t.shape} does not match raster {a.shape}"
            )
        t = t.astype(bool).astype(np.uint8)
    return _flood(
        np.ascontiguousarray(a),
        np.ascontiguousarray(s.astype(np.int32)),
        np.ascontiguousarray(t),
    )


def apply_mask(peaks, mask) -> np.ndarray:
    """Keep basin labels only where the detection mask is foreground."""
    p = np.asarray(peaks)
    m = np.asarray(mask, dtype=bool)
    if p.shape != m.shape:
        raise DimensionError(f"mask shape {m.shape} does not match peaks {p.shape}")
    return np.where(m, p, 0).astype(np.int32)
