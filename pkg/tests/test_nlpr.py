import math

import numpy as np
import pytest

from nlpr_irls import nlpr
from nlpr_irls.exceptions import DimensionMismatchError
from nlpr_irls.irls import Termination
from nlpr_irls.lpcore import LpParams
from nlpr_irls.nlpr import NlprConfig, PatchConfig


def ramp(n=16):
    return np.add.outer(np.arange(n), np.arange(n)) * 4.0


def test_patch_config_validation():
    for bad in (dict(k=4), dict(k=0), dict(search_radius=0), dict(h=0.0), dict(h=math.inf)):
        with pytest.raises(ValueError):
            PatchConfig(**bad)
    assert PatchConfig(k=5).d == 25
    with pytest.raises(ValueError):
        NlprConfig(init="zeros")


def test_extract_patch_constant_and_interior():
    assert np.array_equal(nlpr.extract_patch(np.full((5, 5), 7.0), 12, 3), np.full(9, 7.0))
    img = np.arange(25.0).reshape(5, 5)
    assert np.array_equal(nlpr.extract_patch(img, (2, 2), 3), [6, 7, 8, 11, 12, 13, 16, 17, 18])
    assert np.array_equal(nlpr.extract_patch(img, 12, 3), nlpr.extract_patch(img, (2, 2), 3))


def test_extract_patch_corner_mirrors_edge():
    img = np.arange(9.0).reshape(3, 3)
    # symmetric extension repeats the border sample
    assert np.array_equal(nlpr.extract_patch(img, (0, 0), 3), [0, 0, 1, 0, 0, 1, 3, 3, 4])
    # rows and columns 0 1 2 | 2 1: the last patch row is image row 1, mirrored
    assert np.array_equal(nlpr.extract_patch(img, (2, 2), 5)[-5:], [3, 4, 5, 5, 4])


def test_all_patches_agree_with_extract(rng):
    img = rng.uniform(0, 255, size=(6, 9))
    allp = nlpr.all_patches(img, 5)
    for r in range(6):
        for c in range(9):
            assert np.array_equal(allp[r, c], nlpr.extract_patch(img, (r, c), 5))


def test_index_errors():
    with pytest.raises(IndexError):
        nlpr.extract_patch(np.zeros((3, 3)), 9, 3)
    with pytest.raises(IndexError):
        nlpr.extract_patch(np.zeros((3, 3)), (3, 0), 3)
    with pytest.raises(ValueError):
        nlpr.as_image(np.zeros(4))
    with pytest.raises(ValueError):
        nlpr.as_image([[np.nan]])


def test_nlm_weight():
    assert nlpr.nlm_weight([1.0, 2.0], [1.0, 2.0], 3.0) == 1.0
    assert nlpr.nlm_weight([0.0, 0.0], [3.0, 4.0], 5.0) == pytest.approx(math.exp(-1.0), rel=1e-15)
    with pytest.raises(DimensionMismatchError):
        nlpr.nlm_weight([0.0], [0.0, 1.0], 1.0)


def test_anchor_set_interior_and_corner():
    img = np.arange(49.0).reshape(7, 7)
    cfg = PatchConfig(k=3, search_radius=1, h=10.0)
    s = nlpr.build_anchor_set(img, (3, 3), cfg)
    assert s.n == 9 and s.d == 9
    assert np.max(s.weights) == 1.0
    assert nlpr.build_anchor_set(img, (0, 0), cfg).n == 4


def test_checkerboard_weights():
    img = (np.indices((6, 6)).sum(axis=0) % 2) * 100.0
    cfg = PatchConfig(k=3, search_radius=1, h=100.0)
    s = nlpr.build_anchor_set(img, (2, 2), cfg)
    same = np.isclose(s.weights, 1.0)
    # diagonal neighbours share the phase, edge neighbours are inverted
    assert same.sum() == 5
    assert np.allclose(s.weights[~same], math.exp(-9.0))


def _nlm_oracle(img, k, radius, h):
    H, W = img.shape
    out = np.empty_like(img)
    for r in range(H):
        for c in range(W):
            pi = nlpr.extract_patch(img, (r, c), k)
            num = den = 0.0
            for rr in range(max(0, r - radius), min(H, r + radius + 1)):
                for cc in range(max(0, c - radius), min(W, c + radius + 1)):
                    w = nlpr.nlm_weight(pi, nlpr.extract_patch(img, (rr, cc), k), h)
                    num += w * img[rr, cc]
                    den += w
            out[r, c] = num / den
    return out


def test_nlm_matches_direct_loop():
    img = nlpr.add_gaussian_noise(ramp(), 10.0, seed=3)
    cfg = PatchConfig(k=3, search_radius=2, h=40.0)
    np.testing.assert_allclose(nlpr.nlm_denoise(img, cfg), _nlm_oracle(img, 3, 2, 40.0), rtol=0, atol=1e-10)


def test_nlpr_p2_equals_nlm():
    img = nlpr.add_gaussian_noise(ramp(), 10.0, seed=4)
    patch = PatchConfig(k=3, search_radius=3, h=50.0)
    out, summary = nlpr.nlpr_denoise(img, NlprConfig(patch=patch, lp=LpParams(2.0, 1e-6)))
    assert np.max(np.abs(out - nlpr.nlm_denoise(img, patch))) <= 1e-10
    assert summary.counts() == {"step_tol": img.size}


def test_constant_image_is_fixed():
    img = np.full((8, 8), 42.0)
    for p in (0.5, 1.0, 2.0):
        cfg = NlprConfig(patch=PatchConfig(k=3, search_radius=2, h=10.0), lp=LpParams(p, 1e-6))
        out, _ = nlpr.nlpr_denoise(img, cfg)
        np.testing.assert_allclose(out, 42.0, atol=1e-9)


def test_output_within_input_range_and_summary(rng):
    img = rng.uniform(0, 255, size=(10, 10))
    cfg = NlprConfig(patch=PatchConfig(k=3, search_radius=2, h=80.0), lp=LpParams(0.5, 1e-4),
                     init="noisy_patch")
    out, summary = nlpr.nlpr_denoise(img, cfg)
    assert out.min() >= img.min() and out.max() <= img.max()
    assert summary.iterations.shape == img.shape
    assert summary.monotone.all()
    assert all(t in (Termination.STEP_TOL, Termination.MAX_ITERS) for t in summary.termination.ravel())
    assert sum(summary.counts().values()) == img.size


def test_worker_count_does_not_change_output(rng):
    img = rng.uniform(0, 255, size=(9, 7))
    cfg = NlprConfig(patch=PatchConfig(k=3, search_radius=2, h=80.0), lp=LpParams(1.0, 1e-6))
    a, _ = nlpr.nlpr_denoise(img, cfg, workers=1)
    b, _ = nlpr.nlpr_denoise(img, cfg, workers=3)
    assert np.array_equal(a, b)


def test_flip_equivariance(rng):
    img = rng.uniform(0, 255, size=(9, 9))
    cfg = NlprConfig(patch=PatchConfig(k=3, search_radius=2, h=80.0), lp=LpParams(1.0, 1e-6),
                     init="noisy_patch")
    out, _ = nlpr.nlpr_denoise(img, cfg)
    # a horizontal flip reverses the column order inside every patch as well
    flipped, _ = nlpr.nlpr_denoise(img[:, ::-1], cfg)
    np.testing.assert_allclose(flipped[:, ::-1], out, atol=1e-6)


def test_noise_statistics():
    clean = np.full((200, 200), 100.0)
    noisy = nlpr.add_gaussian_noise(clean, 20.0, seed=0)
    assert abs(np.mean(noisy - clean)) < 0.5
    assert abs(np.std(noisy - clean) - 20.0) < 0.5
    assert np.array_equal(noisy, nlpr.add_gaussian_noise(clean, 20.0, seed=0))
    assert np.array_equal(nlpr.add_gaussian_noise(clean, 0.0), clean)
    with pytest.raises(ValueError):
        nlpr.add_gaussian_noise(clean, -1.0)


def test_mse_psnr():
    a = np.zeros((4, 4))
    b = np.full((4, 4), 10.0)
    assert nlpr.mse(a, b) == 100.0
    assert nlpr.psnr(a, b) == pytest.approx(28.1308, abs=1e-4)
    assert nlpr.psnr(a, a) == math.inf
    with pytest.raises(DimensionMismatchError):
        nlpr.mse(a, np.zeros((3, 3)))
