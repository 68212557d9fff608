import json
import math

import numpy as np
import pytest

import stereogen


def square_scene():
    return {
        "version": 1,
        "width": 160,
        "height": 120,
        "fx": 500,
        "fy": 500,
        "background": {"depth": 4, "color": [40, 90, 200]},
        "rectangles": [
            {"x0": 60, "y0": 40, "x1": 100, "y1": 80, "depth": 1, "color": [230, 60, 30]}
        ],
    }


def test_camera_round_trip():
    k = [500.0, 500.0, 320.0, 240.0]
    p = stereogen.backproject(100, 50, 1.5, k, 640, 480)
    assert p == pytest.approx([1.5 * (100 - 320) / 500, 1.5 * (50 - 240) / 500, 1.5])
    u, v, z = stereogen.project(p, k, 640, 480)
    assert (u, v, z) == pytest.approx((100, 50, 1.5))


def test_view_transform_is_rigid():
    m = stereogen.view_transform(0.3, 0.1)
    r = m[:3, :3]
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-12)


def test_errors_carry_their_class():
    with pytest.raises(stereogen.StereogenError) as info:
        stereogen.backproject(0, 0, -1.0, [1, 1, 0, 0], 2, 2)
    assert info.value.kind == "invalid-depth"


def test_null_rig_identity():
    rng = np.random.default_rng(1)
    rgb = rng.integers(0, 256, size=(20, 30, 3), dtype=np.uint8)
    depth = rng.uniform(0.5, 10, size=(20, 30))
    left, right = stereogen.render_eyes(rgb, depth, baseline=0.0)
    assert np.array_equal(left["image"], rgb)
    assert np.array_equal(right["image"], rgb)
    assert not left["mask"].any()


def test_scene_band_and_fill():
    spec = square_scene()
    rgb, depth = stereogen.render_scene(spec)
    assert rgb.shape == (120, 160, 3)
    assert set(np.unique(depth)) == {1.0, 4.0}

    view = stereogen.render_view(rgb, depth, tx=0.064, intrinsics=[500, 500, 80, 60])
    truth = stereogen.ground_truth_view(spec, tx=0.064)
    assert np.array_equal(view["mask"], truth["dropout"])
    # 24-column band beside the square plus the 8-column border strip.
    assert int((view["mask"][60] == 255).sum()) == 24 + 8

    filled = stereogen.fill(view["image"], view["zbuffer"], view["mask"])
    assert stereogen.psnr(filled, truth["image"]) > stereogen.psnr(view["image"], truth["image"])
    assert stereogen.ssim(filled, truth["image"]) > stereogen.ssim(view["image"], truth["image"])


def test_metrics():
    a = np.zeros((16, 16, 3), np.uint8)
    b = np.full((16, 16, 3), 128, np.uint8)
    assert stereogen.psnr(a, b) == pytest.approx(20 * math.log10(255 / 128), abs=1e-9)
    assert math.isinf(stereogen.psnr(a, a))
    assert stereogen.ssim(b, b) == pytest.approx(1.0, abs=1e-9)


def test_combine_and_dilate():
    white = np.full((4, 4, 3), 255, np.uint8)
    black = np.zeros((4, 4, 3), np.uint8)
    red = stereogen.combine(white, black, "anaglyph")
    assert (red[..., 0] == 255).all() and not red[..., 1:].any()
    assert stereogen.combine(white, black, "sbs").shape == (4, 8, 3)
    mask = np.zeros((5, 5), np.uint8)
    mask[2, 2] = 255
    assert int((stereogen.dilate_mask(mask, 1) == 255).sum()) == 9


def test_cli(tmp_path):
    (tmp_path / "spec.json").write_text(json.dumps(square_scene()))
    code, out, _ = stereogen.cli("scene", "--spec", tmp_path / "spec.json", "--out", tmp_path / "scene")
    assert code == 0
    code, out, _ = stereogen.cli(
        "synth", "--manifest", tmp_path / "scene" / "job.json", "--out", tmp_path / "out"
    )
    assert code == 0
    assert json.loads(out)["frames"] == 1
    code, _, err = stereogen.cli("synth", "--nope")
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error"] == "usage"
