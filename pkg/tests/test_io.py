"""File formats: raster round trips, manifests, ground truth, reports."""

import os

import numpy as np
import pytest

from fluocount.detect import Detection, FrameResult, VideoReport
from fluocount.evaluate import GroundTruthBox, PRCurve
from fluocount.io import (
    FormatError,
    load_frames,
    read_ground_truth,
    read_manifest,
    read_pgm,
    read_ppm,
    read_report_json,
    write_benchmark,
    write_ground_truth,
    write_manifest,
    write_pgm,
    write_ppm,
    write_pr_file,
    write_report_json,
    write_report_text,
)
from fluocount.synth import SceneSpec, InsectSpec


class TestRasterFiles:
    def test_ppm_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        img = rng.integers(0, 256, size=(7, 9, 3), dtype=np.uint8)
        write_ppm(tmp_path / "a.ppm", img)
        assert (read_ppm(tmp_path / "a.ppm") == img).all()

    def test_pgm_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        g = rng.integers(0, 256, size=(5, 6), dtype=np.uint8)
        write_pgm(tmp_path / "a.pgm", g)
        assert (read_pgm(tmp_path / "a.pgm") == g).all()

    def test_pgm_bool_mask(self, tmp_path):
        mask = np.array([[True, False], [False, True]])
        write_pgm(tmp_path / "m.pgm", mask)
        assert ((read_pgm(tmp_path / "m.pgm") > 0) == mask).all()

    def test_wrong_magic_errors(self, tmp_path):
        (tmp_path / "bad.ppm").write_bytes(b"P5\n2 2\n255\n" + bytes(4))
        with pytest.raises(FormatError):
            read_ppm(tmp_path / "bad.ppm")

    def test_truncated_data_errors(self, tmp_path):
        (tmp_path / "short.ppm").write_bytes(b"P6\n4 4\n255\n" + bytes(10))
        with pytest.raises(FormatError):
            read_ppm(tmp_path / "short.ppm")

    def test_header_comments_allowed(self, tmp_path):
        (tmp_path / "c.pgm").write_bytes(b"P5\n# comment\n2 2\n255\n" + bytes(4))
        assert read_pgm(tmp_path / "c.pgm").shape == (2, 2)


class TestManifest:
    def test_round_trip(self, tmp_path):
        write_manifest(tmp_path / "manifest.txt", 720, 480, 100, fps=30.0)
        m = read_manifest(tmp_path / "manifest.txt")
        assert (m["width"], m["height"], m["frames"], m["fps"]) == (720, 480, 100, 30.0)

    def test_missing_key_errors(self, tmp_path):
        (tmp_path / "manifest.txt").write_text("width=10\nheight=10\n")
        with pytest.raises(FormatError):
            read_manifest(tmp_path / "manifest.txt")

    def test_malformed_line_reports_number(self, tmp_path):
        (tmp_path / "manifest.txt").write_text("width=10\nbogus line\n")
        with pytest.raises(FormatError, match=":2:"):
            read_manifest(tmp_path / "manifest.txt")


class TestGroundTruthFile:
    def test_round_trip(self, tmp_path):
        boxes = [
            GroundTruthBox(frame_index=0, x=1, y=2, width=3, height=4),
            GroundTruthBox(frame_index=5, x=10, y=20, width=30, height=40),
        ]
        write_ground_truth(tmp_path / "gt.txt", boxes)
        assert read_ground_truth(tmp_path / "gt.txt") == boxes

    def test_comments_and_blanks_skipped(self, tmp_path):
        (tmp_path / "gt.txt").write_text("# header\n\n0 1 2 3 4  # trailing\n")
        assert len(read_ground_truth(tmp_path / "gt.txt")) == 1

    def test_malformed_line_reports_number(self, tmp_path):
        (tmp_path / "gt.txt").write_text("0 1 2 3 4\n0 1 2\n")
        with pytest.raises(FormatError, match=":2:"):
            read_ground_truth(tmp_path / "gt.txt")

    def test_non_integer_field_reports_number(self, tmp_path):
        (tmp_path / "gt.txt").write_text("0 1 2 x 4\n")
        with pytest.raises(FormatError, match=":1:"):
            read_ground_truth(tmp_path / "gt.txt")


def sample_report():
    d = Detection(frame_index=0, x=1, y=2, width=3, height=4, area_px=10, score=123.4567)
    frames = [
        FrameResult(frame_index=0, blob_count=1, detections=(d,)),
        FrameResult(frame_index=1, blob_count=0, detections=()),
    ]
    return VideoReport(frames=frames, global_count=1, config={"min_blob_px": 20})


class TestReports:
    def test_json_round_trip(self, tmp_path):
        report = sample_report()
        write_report_json(tmp_path / "r.json", report)
        back = read_report_json(tmp_path / "r.json")
        assert back.global_count == report.global_count
        assert back.frames == report.frames

    def test_bad_json_errors(self, tmp_path):
        (tmp_path / "r.json").write_text("{not json")
        with pytest.raises(FormatError):
            read_report_json(tmp_path / "r.json")

    def test_text_report_stable(self, tmp_path):
        report = sample_report()
        write_report_text(tmp_path / "a.txt", report)
        write_report_text(tmp_path / "b.txt", report)
        a = (tmp_path / "a.txt").read_bytes()
        assert a == (tmp_path / "b.txt").read_bytes()
        text = a.decode()
        assert "frame 0 blobs=1 global=1" in text
        assert "det 0 1 2 3 4 10 123.4567" in text
        assert text.rstrip().endswith("total 1")

    def test_pr_file(self, tmp_path):
        curve = PRCurve(points=[(1.0, 1.0, 0.5), (2.0, 0.5, 1.0)], auc=0.75)
        write_pr_file(tmp_path / "pr.txt", curve)
        lines = (tmp_path / "pr.txt").read_text().splitlines()
        assert lines[1] == "# auc 0.750000"
        assert lines[2].split() == ["1.000000", "1.000000", "0.500000"]


class TestAtomicity:
    def test_no_partial_file_on_failure(self, tmp_path):
        target = tmp_path / "out.ppm"
        with pytest.raises(FormatError):
            write_ppm(target, np.zeros((4, 4), dtype=np.uint8))  # wrong shape
        assert not target.exists()
        assert not any(p.name.startswith("out.ppm.tmp") for p in tmp_path.iterdir())

    def test_overwrite_is_atomic_replace(self, tmp_path):
        img1 = np.zeros((2, 2, 3), dtype=np.uint8)
        img2 = np.full((2, 2, 3), 9, dtype=np.uint8)
        write_ppm(tmp_path / "f.ppm", img1)
        write_ppm(tmp_path / "f.ppm", img2)
        assert (read_ppm(tmp_path / "f.ppm") == img2).all()


class TestBenchmarkDirectory:
    def test_write_and_load(self, tmp_path):
        spec = SceneSpec(
            frame_count=3,
            width=80,
            height=80,
            beam_start=(40.0, 40.0),
            beam_radius=200.0,
            insects=[InsectSpec(x=40, y=40, half_width=4, half_length=8)],
            seed=2,
        )
        write_benchmark(tmp_path / "bench", spec)
        assert (tmp_path / "bench" / "manifest.txt").exists()
        assert (tmp_path / "bench" / "gt.txt").exists()
        assert (tmp_path / "bench" / "scene.json").exists()
        assert len(list((tmp_path / "bench" / "calibration").glob("*.ppm"))) == 9
        frames = list(load_frames(tmp_path / "bench"))
        assert len(frames) == 3
        assert frames[0].pixels.shape == (80, 80, 3)
        assert frames[2].index == 2

    def test_missing_frame_reports_index(self, tmp_path):
        spec = SceneSpec(frame_count=2, width=40, height=40, seed=3)
        write_benchmark(tmp_path / "bench", spec)
        os.unlink(tmp_path / "bench" / "frames" / "frame_000001.ppm")
        with pytest.raises(FormatError, match="frame 1"):
            list(load_frames(tmp_path / "bench"))
