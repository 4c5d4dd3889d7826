"""
评价指标测试
向量化实现与逐元素循环实现交叉校验，并覆盖最优值与边界情况
"""

import numpy as np
import pytest

from evaluation import oracles
from evaluation.baselines import nearest_upsample
from evaluation.metrics import (
    PSNR_CAP,
    ergas,
    evaluate,
    psnr,
    psnr_per_band,
    rmse,
    rmse_map,
    sam,
    sam_map,
    ssim,
    ssim_band,
    uiqi,
)
from evaluation.models import METRIC_NAMES
from tensor.core import HyperCube
from tensor.exceptions import ArgumentError
from tests.helpers import random_cube


@pytest.fixture
def noisy_pair(rng):
    reference = random_cube(rng, (16, 16, 8), 0.1, 1.0)
    fused = HyperCube(reference.data + rng.normal(0.0, 0.05, size=reference.dims))
    return reference, fused


def test_vectorised_metrics_match_loops(noisy_pair):
    ref, fus = noisy_pair
    assert rmse(ref, fus) == pytest.approx(oracles.rmse_loop(ref, fus), abs=1e-8)
    assert psnr(ref, fus) == pytest.approx(oracles.psnr_loop(ref, fus), abs=1e-8)
    assert sam(ref, fus) == pytest.approx(oracles.sam_loop(ref, fus), abs=1e-8)
    assert ergas(ref, fus, 4) == pytest.approx(oracles.ergas_loop(ref, fus, 4), abs=1e-8)
    assert ssim(ref, fus) == pytest.approx(oracles.ssim_loop(ref, fus), abs=1e-8)
    assert uiqi(ref, fus) == pytest.approx(oracles.uiqi_loop(ref, fus), abs=1e-8)


def test_sam_map_matches_loop(rng):
    data = rng.uniform(0.0, 1.0, size=(4, 4, 3))
    data[1, 2] = 0.0
    ref = HyperCube(data)
    fus = random_cube(rng, (4, 4, 3))
    angles = sam_map(ref, fus)
    assert angles.shape == (4, 4)
    assert angles[1, 2] == 0.0
    np.testing.assert_allclose(angles, oracles.sam_map_loop(ref, fus), atol=1e-8)


def test_identity_gives_optimal_values(rng):
    ref = random_cube(rng, (12, 12, 5), 0.1, 1.0)
    report = evaluate(ref, ref, 4)
    assert report.rmse == 0.0
    assert report.psnr == PSNR_CAP
    assert report.sam == 0.0
    assert report.ergas == 0.0
    assert report.ssim == pytest.approx(1.0, abs=1e-12)
    assert report.uiqi == pytest.approx(1.0, abs=1e-12)
    assert report.psnr_per_band == [PSNR_CAP] * 5
    assert list(report.summary()) == list(METRIC_NAMES)


def test_orthogonal_spectra_give_right_angle():
    ref = np.zeros((2, 2, 3))
    fus = np.zeros((2, 2, 3))
    ref[..., 0] = 1.0
    fus[..., 1] = 2.0
    assert sam(HyperCube(ref), HyperCube(fus)) == pytest.approx(90.0)


def test_psnr_of_constant_error(rng):
    ref = random_cube(rng, (8, 8, 3), 0.0, 1.0)
    fus = HyperCube(ref.data + 0.01)
    peaks = np.abs(ref.data).max(axis=(0, 1))
    np.testing.assert_allclose(psnr_per_band(ref, fus), 20 * np.log10(peaks / 0.01), rtol=1e-10)


def test_sam_is_scale_invariant(noisy_pair):
    ref, fus = noisy_pair
    assert sam(ref, HyperCube(3.0 * fus.data)) == pytest.approx(sam(ref, fus), abs=1e-10)


def test_all_zero_pixels_give_zero_sam():
    zeros = HyperCube(np.zeros((3, 3, 4)))
    assert sam(zeros, zeros) == 0.0


def test_ergas_skips_zero_mean_band(rng):
    data = rng.uniform(0.5, 1.0, size=(6, 6, 3))
    data[..., 1] = 0.0
    ref = HyperCube(data)
    fus = HyperCube(data + 0.1)
    errors = np.full(2, 0.1)
    means = data[..., [0, 2]].mean(axis=(0, 1))
    expected = 100.0 / 2 * np.sqrt(np.mean((errors / means) ** 2))
    assert ergas(ref, fus, 2) == pytest.approx(expected, rel=1e-9)


def test_ergas_scales_inversely_with_ratio(noisy_pair):
    ref, fus = noisy_pair
    base = ergas(ref, fus, 1)
    for ratio in (2, 4, 8):
        assert ergas(ref, fus, ratio) == pytest.approx(base / ratio, rel=1e-12)


def test_structural_indices_are_symmetric(noisy_pair):
    ref, fus = noisy_pair
    assert uiqi(ref, fus) == pytest.approx(uiqi(fus, ref), abs=1e-12)
    # SSIM 常数取自参考波段峰值，固定峰值时对称
    a, b = ref.data[:, :, 0], fus.data[:, :, 0]
    assert ssim_band(a, b, 1.0) == pytest.approx(ssim_band(b, a, 1.0), abs=1e-12)


def test_rmse_map_shape_and_values(rng):
    ref = random_cube(rng, (5, 4, 3))
    fus = HyperCube(ref.data + 0.2)
    np.testing.assert_allclose(rmse_map(ref, fus), np.full((5, 4), 0.2), atol=1e-12)


def test_dimension_mismatch_rejected(rng):
    with pytest.raises(ArgumentError):
        rmse(random_cube(rng, (4, 4, 3)), random_cube(rng, (4, 4, 2)))
    with pytest.raises(ArgumentError):
        evaluate(random_cube(rng, (4, 4, 3)), random_cube(rng, (4, 2, 3)), 2)


def test_nearest_upsample_blocks(rng):
    x = random_cube(rng, (2, 3, 4))
    up = nearest_upsample(x, 4)
    assert up.dims == (8, 12, 4)
    np.testing.assert_array_equal(up.data[4:8, 8:12, :], np.broadcast_to(x.data[1, 2], (4, 4, 4)))
