import numpy as np
import pytest

import spectrafuse as sf


def test_homography_estimate_and_apply():
    truth = np.array([[1.02, 0.01, 4.0], [-0.02, 0.98, -2.5], [1e-5, -2e-5, 1.0]])
    src = np.array([[0.0, 0.0], [600.0, 0.0], [0.0, 500.0], [600.0, 500.0], [300.0, 250.0]])
    h_truth = sf.Homography(truth)
    dst = np.array([h_truth.apply(x, y) for x, y in src])
    estimated = sf.estimate_homography(src, dst)
    assert np.allclose(estimated.matrix, truth, atol=1e-8)
    x, y = estimated.apply(10.0, 20.0)
    xt, yt = h_truth.apply(10.0, 20.0)
    assert abs(x - xt) < 1e-6 and abs(y - yt) < 1e-6


def test_identity_warp_copies_bytes():
    rng = np.random.default_rng(3)
    source = rng.integers(0, 256, size=(32, 40), dtype=np.uint8)
    warped, mask = sf.warp_to_target(sf.Homography(), source, 40, 32)
    assert np.array_equal(warped, source)
    assert np.all(mask == 255)


def test_fuse_midpoint():
    rgb = np.zeros((8, 8, 3), dtype=np.uint8)
    lwir3 = np.full((8, 8, 3), 255, dtype=np.uint8)
    mask = np.full((8, 8), 255, dtype=np.uint8)
    fused = sf.fuse_pixels(rgb, lwir3, mask, alpha=0.5)
    assert np.all(fused == 128)
    assert np.array_equal(sf.fuse_pixels(rgb, lwir3, mask, alpha=0.0), rgb)
    assert np.array_equal(sf.fuse_pixels(rgb, lwir3, mask, alpha=1.0), lwir3)


def test_fuse_rejects_bad_mask():
    rgb = np.zeros((4, 4, 3), dtype=np.uint8)
    lwir3 = np.zeros((4, 4, 3), dtype=np.uint8)
    mask = np.full((4, 4), 7, dtype=np.uint8)
    with pytest.raises(ValueError, match="neither 0 nor 255"):
        sf.fuse_pixels(rgb, lwir3, mask)


def test_oracle_hot_blob():
    frame = np.full((24, 24), 100, dtype=np.uint8)
    frame[5:9, 6:10] = 250
    detections = sf.oracle_detect(frame, 0, "hot_blob")
    assert len(detections) == 1
    assert detections[0].box == (6.0, 5.0, 10.0, 9.0)
    assert detections[0].frame_index == 0


def test_image_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    image = rng.integers(0, 256, size=(16, 20, 3), dtype=np.uint8)
    path = tmp_path / "frame.ppm"
    sf.write_image(path, image)
    assert np.array_equal(sf.read_image(path), image)


def test_match_and_evaluate():
    detections = [
        sf.Detection(0, (10.0, 10.0, 20.0, 20.0), 0.9),
        sf.Detection(0, (50.0, 50.0, 60.0, 60.0), 0.4),
    ]
    labels = [sf.GroundTruthLabel(0, (11.0, 11.0, 21.0, 21.0))]
    result = sf.match_frame(detections, labels)
    assert (result.tp, result.fp, result.fn) == (1, 1, 0)
    rows = sf.evaluate_scenario("smoke", detections, labels, [0.5], 0.5)
    assert rows[0].dr == 1.0 and rows[0].far == 0.0


def test_pair_streams(tmp_path):
    def manifest(path, spectrum, source, rate_hz, count):
        lines = [f"spectrum={spectrum} source={source}"]
        for i in range(count):
            ts = round(i * 1e9 / rate_hz)
            lines.append(f"{i} {ts} frame_{i:06d}.pgm")
        path.write_text("\n".join(lines) + "\n")

    lwir = tmp_path / "lwir.manifest"
    rgb = tmp_path / "rgb.manifest"
    manifest(lwir, "LWIR", "camL", 60.0, 60)
    manifest(rgb, "RGB", "camR", 35.0, 35)
    pairs = sf.pair_streams(lwir, rgb)
    assert len(pairs) == 30
    assert max(p.skew_ns for p in pairs) <= 14300000


def test_labels_round_trip(tmp_path):
    labels = [sf.GroundTruthLabel(2, (1.0, 2.0, 3.0, 4.0), 1)]
    path = tmp_path / "labels.txt"
    sf.write_labels(path, labels)
    loaded = sf.read_labels(path)
    assert len(loaded) == 1
    assert loaded[0].frame_index == 2
    assert loaded[0].box == (1.0, 2.0, 3.0, 4.0)
    assert loaded[0].class_id == 1


def test_parse_error_names_line(tmp_path):
    path = tmp_path / "dets.txt"
    path.write_text("0 1 1 5 5 0.5\n")
    with pytest.raises(ValueError, match="dets.txt:1"):
        sf.read_detections(path)
