"""Smoothing, regional maxima and watershed, checked against brute-force
oracles on small rasters."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fluocount.core import DimensionError
from fluocount.segment import apply_mask, box_smooth, regional_maxima, watershed_peaks


def box_smooth_oracle(a, radius):
    """Direct nested-loop window mean with coordinate clamping."""
    h, w = a.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            total = 0.0
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    yy = min(max(y + dy, 0), h - 1)
                    xx = min(max(x + dx, 0), w - 1)
                    total += a[yy, xx]
            out[y, x] = total / (2 * radius + 1) ** 2
    return out


def regional_maxima_oracle(a, floor):
    """Flood each 8-connected equal-value plateau, then check that every
    neighbor outside the plateau is strictly smaller."""
    h, w = a.shape
    seen = np.zeros((h, w), dtype=bool)
    plateaus = []
    for y in range(h):
        for x in range(w):
            if seen[y, x]:
                continue
            stack = [(y, x)]
            seen[y, x] = True
            plateau = []
            val = a[y, x]
            is_max = True
            while stack:
                cy, cx = stack.pop()
                plateau.append((cy, cx))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = cy + dy, cx + dx
                        if not (0 <= ny < h and 0 <= nx < w) or (dy, dx) == (0, 0):
                            continue
                        if a[ny, nx] == val:
                            if not seen[ny, nx]:
                                seen[ny, nx] = True
                                stack.append((ny, nx))
                        elif a[ny, nx] > val:
                            is_max = False
            if is_max and val > floor and len(plateau) < h * w:
                plateaus.append(set(plateau))
    return plateaus


class TestBoxSmooth:
    def test_radius_zero_is_identity(self):
        a = np.arange(12, dtype=np.float64).reshape(3, 4)
        assert (box_smooth(a, 0) == a).all()

    def test_uniform_unchanged(self):
        a = np.full((5, 7), 3.25)
        assert np.allclose(box_smooth(a, 2), a)

    def test_center_spike(self):
        a = np.zeros((3, 3))
        a[1, 1] = 90
        out = box_smooth(a, 1)
        assert out[1, 1] == 10.0  # 90 / 9 exactly

    def test_negative_radius_errors(self):
        with pytest.raises(ValueError):
            box_smooth(np.zeros((3, 3)), -1)

    def test_rejects_non_2d(self):
        with pytest.raises(DimensionError):
            box_smooth(np.zeros((3, 3, 3)), 1)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 3))
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force(self, seed, radius):
        rng = np.random.Generator(np.random.PCG64(seed))
        a = rng.integers(0, 256, size=(rng.integers(1, 10), rng.integers(1, 10))).astype(np.float64)
        assert np.allclose(box_smooth(a, radius), box_smooth_oracle(a, radius), atol=1e-9)


class TestRegionalMaxima:
    def test_single_bright_pixel(self):
        a = np.zeros((5, 5))
        a[2, 3] = 10
        lab = regional_maxima(a, floor=0)
        assert lab[2, 3] == 1 and (lab > 0).sum() == 1

    def test_two_separated_peaks(self):
        a = np.zeros((5, 9))
        a[2, 1] = 10
        a[2, 7] = 8
        lab = regional_maxima(a, floor=0)
        assert lab[2, 1] == 1 and lab[2, 7] == 2  # brighter peak labeled first
        assert (lab > 0).sum() == 2

    def test_ramp_has_single_seed_at_top(self):
        a = np.tile(np.arange(6, dtype=np.float64), (4, 1))
        lab = regional_maxima(a, floor=0)
        assert (lab[:, -1] == 1).all() and (lab[:, :-1] == 0).all()

    def test_constant_raster_has_no_seed(self):
        # a plateau covering the whole raster is not a maximum
        assert (regional_maxima(np.full((4, 4), 5.0), floor=0) == 0).all()

    def test_floor_suppresses_dim_peaks(self):
        a = np.zeros((5, 9))
        a[2, 1] = 10
        a[2, 7] = 3
        lab = regional_maxima(a, floor=5)
        assert lab[2, 1] == 1 and lab[2, 7] == 0

    def test_empty_raster_errors(self):
        with pytest.raises(DimensionError):
            regional_maxima(np.zeros((0, 3)))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=150, deadline=None)
    def test_matches_brute_force(self, seed):
        rng = np.random.Generator(np.random.PCG64(seed))
        a = rng.integers(0, 6, size=(rng.integers(2, 9), rng.integers(2, 9))).astype(np.float64)
        floor = float(rng.integers(0, 4))
        lab = regional_maxima(a, floor=floor)
        got = [set(zip(*np.nonzero(lab == k))) for k in range(1, lab.max() + 1)]
        expected = regional_maxima_oracle(a, floor)
        assert sorted(map(sorted, got)) == sorted(map(sorted, expected))


def dumbbell():
    """Two 5x5 bright bulbs joined by a dimmer 1-px neck, 11x5."""
    a = np.zeros((5, 11))
    a[:, 0:5] = 200
    a[:, 6:11] = 180
    a[2, 5] = 120
    return a


class TestWatershed:
    def test_one_seed_floods_whole_disc(self):
        a = np.zeros((7, 7))
        a[2:5, 2:5] = 50
        seeds = regional_maxima(a, floor=0)
        peaks = watershed_peaks(a, seeds)
        # everything reachable floods into the single basin
        assert set(np.unique(peaks)) <= {0, 1}
        assert (peaks[2:5, 2:5] == 1).all()

    def test_zero_seeds_all_zero(self):
        a = np.random.default_rng(0).random((6, 6))
        assert (watershed_peaks(a, np.zeros((6, 6), dtype=np.int32)) == 0).all()

    def test_dumbbell_splits_at_neck(self):
        a = dumbbell()
        seeds = regional_maxima(a, floor=0)
        assert seeds.max() == 2
        peaks = watershed_peaks(a, seeds)
        left = peaks[:, 0:5]
        right = peaks[:, 6:11]
        assert (left == left[0, 0]).all() and left[0, 0] > 0
        assert (right == right[0, 0]).all() and right[0, 0] > 0
        assert left[0, 0] != right[0, 0]

    def test_basins_are_4_connected_to_their_seed(self):
        rng = np.random.default_rng(5)
        a = rng.integers(0, 20, size=(12, 12)).astype(np.float64)
        seeds = regional_maxima(a, floor=0)
        peaks = watershed_peaks(a, seeds)
        for k in range(1, seeds.max() + 1):
            region = peaks == k
            if not region.any():
                continue
            # flood-fill 4-connected from the seed pixels, must cover region
            from scipy import ndimage

            four = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
            comps, n = ndimage.label(region, structure=four)
            seed_comps = set(np.unique(comps[(seeds == k) & region]))
            assert set(np.unique(comps[region])) <= seed_comps

    def test_adding_seed_never_decreases_labels(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            a = rng.integers(0, 12, size=(8, 8)).astype(np.float64)
            seeds = regional_maxima(a, floor=0)
            if seeds.max() < 1:
                continue
            mask = a > 3
            full = apply_mask(watershed_peaks(a, seeds), mask)
            # drop the last seed
            fewer = np.where(seeds == seeds.max(), 0, seeds)
            if not fewer.any():
                continue
            part = apply_mask(watershed_peaks(a, fewer), mask)
            assert len(np.unique(part[part > 0])) <= len(np.unique(full[full > 0]))

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        a = rng.integers(0, 30, size=(20, 20)).astype(np.float64)
        seeds = regional_maxima(a, floor=0)
        p1 = watershed_peaks(a, seeds)
        p2 = watershed_peaks(a, seeds)
        assert (p1 == p2).all()

    def test_shape_mismatch_errors(self):
        with pytest.raises(DimensionError):
            watershed_peaks(np.zeros((3, 3)), np.zeros((4, 4), dtype=np.int32))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_targets_subset_identical_to_full_flood(self, seed):
        rng = np.random.Generator(np.random.PCG64(seed))
        a = rng.integers(0, 15, size=(10, 10)).astype(np.float64)
        seeds = regional_maxima(a, floor=0)
        mask = a > rng.integers(2, 8)
        full = watershed_peaks(a, seeds)
        early = watershed_peaks(a, seeds, targets=mask)
        assert (early[mask] == full[mask]).all()


class TestApplyMask:
    def test_identity_mask(self):
        peaks = np.arange(9, dtype=np.int32).reshape(3, 3)
        assert (apply_mask(peaks, np.ones((3, 3), dtype=bool)) == peaks).all()

    def test_all_false_mask(self):
        peaks = np.ones((3, 3), dtype=np.int32)
        assert (apply_mask(peaks, np.zeros((3, 3), dtype=bool)) == 0).all()

    def test_dumbbell_left_bulb_only(self):
        a = dumbbell()
        peaks = watershed_peaks(a, regional_maxima(a, floor=0))
        mask = np.zeros(a.shape, dtype=bool)
        mask[:, 0:5] = True
        out = apply_mask(peaks, mask)
        labels = set(np.unique(out)) - {0}
        assert labels == {int(peaks[0, 0])}

    def test_shape_mismatch_errors(self):
        with pytest.raises(DimensionError):
            apply_mask(np.zeros((3, 3), dtype=np.int32), np.zeros((2, 2), dtype=bool))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=200, deadline=None)
    def test_subset_law(self, seed):
        # nonzero pixels of the segmented mask lie inside the detection mask
        rng = np.random.Generator(np.random.PCG64(seed))
        peaks = rng.integers(0, 5, size=(6, 6)).astype(np.int32)
        mask = rng.random((6, 6)) > 0.5
        out = apply_mask(peaks, mask)
        assert (mask[out > 0]).all()
