"""
退化仿真测试
覆盖高斯抽取矩阵、空间/光谱退化、盒状 SRF 与 LR-MSI 一致性
"""

import math

import numpy as np
import pytest

from degradation.models import NoiseSpec, SpectralResponse
from degradation.scenes import make_toy_scene
from degradation.simulation import (
    add_noise,
    degrade_spatial,
    degrade_spectral,
    gaussian_decimation_matrix,
    landsat8_band_ranges,
    load_srf_csv,
    make_lr_msi,
    make_spatial_degradation,
    simulate_pair,
    srf_from_ranges,
    uniform_band_ranges,
)
from tensor.core import HyperCube, mode_product
from tensor.exceptions import ArgumentError, FormatError
from tests.helpers import random_cube


def test_decimation_small_sigma_ratio_one_is_identity():
    np.testing.assert_array_equal(gaussian_decimation_matrix(5, 1, 0.1), np.eye(5))


def test_decimation_preserves_constants():
    p = gaussian_decimation_matrix(8, 4, 2.0)
    assert p.shape == (2, 8)
    np.testing.assert_allclose(p @ np.full(8, 3.5), np.full(2, 3.5), atol=1e-12)


def test_decimation_matches_kernel_oracle():
    full_dim, ratio, sigma = 16, 4, 2.0
    p = gaussian_decimation_matrix(full_dim, ratio, sigma)
    radius = math.floor(3 * sigma)
    for r in range(full_dim // ratio):
        center = r * ratio + ratio // 2
        row = np.zeros(full_dim)
        for j in range(full_dim):
            if abs(j - center) <= radius:
                row[j] = math.exp(-((j - center) ** 2) / (2 * sigma ** 2))
        row /= row.sum()
        np.testing.assert_allclose(p[r], row, rtol=0, atol=1e-12)


def test_decimation_rejects_indivisible():
    with pytest.raises(ArgumentError):
        gaussian_decimation_matrix(10, 4, 1.0)


def test_degrade_spatial_constant_and_mode_products(rng):
    d = make_spatial_degradation(8, 8, 4)
    constant = HyperCube(np.full((8, 8, 3), 0.7))
    np.testing.assert_allclose(degrade_spatial(constant, d).data, 0.7, atol=1e-12)

    z = random_cube(rng, (8, 8, 3))
    expected = mode_product(mode_product(z, d.p1, 1), d.p2, 2)
    np.testing.assert_allclose(degrade_spatial(z, d).data, expected.data, atol=1e-12)


def test_degrade_spectral_matches_pixel_loop(rng):
    z = random_cube(rng, (3, 2, 8))
    r = srf_from_ranges(uniform_band_ranges(8, 4), 8)
    out = degrade_spectral(z, r).data
    for i in range(3):
        for j in range(2):
            for band, (start, end) in enumerate(r.band_ranges):
                assert out[i, j, band] == pytest.approx(z.data[i, j, start:end + 1].mean(), abs=1e-12)


def test_one_hot_srf_selects_bands(rng):
    z = random_cube(rng, (2, 2, 5))
    r = srf_from_ranges([(1, 1), (3, 3)], 5)
    np.testing.assert_allclose(degrade_spectral(z, r).data, z.data[:, :, [1, 3]], atol=1e-15)


def test_srf_from_ranges_examples():
    assert np.allclose(srf_from_ranges([(0, 4)], 5).p3, np.full((1, 5), 0.2))
    p3 = srf_from_ranges([(0, 9), (10, 19)], 20).p3
    np.testing.assert_allclose(p3[0, :10], 0.1)
    np.testing.assert_allclose(p3[1, 10:], 0.1)
    assert p3[0, 10:].sum() == 0 and p3[1, :10].sum() == 0
    with pytest.raises(ArgumentError):
        srf_from_ranges([(0, 20)], 20)


def test_spectral_response_rejects_bad_rows():
    with pytest.raises(ArgumentError):
        SpectralResponse(p3=np.array([[0.5, 0.2, 0.2]]))
    with pytest.raises(ArgumentError):
        SpectralResponse(p3=np.array([[1.5, -0.5, 0.0]]))


def test_landsat8_ranges_cover_visible_bands():
    ranges = landsat8_band_ranges(61, 400.0, 1000.0)
    assert 1 <= len(ranges) <= 5
    for start, end in ranges:
        assert 0 <= start <= end < 61
    with pytest.raises(ArgumentError):
        landsat8_band_ranges(10, 1000.0, 400.0)


def test_load_srf_csv_normalises_and_reports_line(tmp_path):
    good = tmp_path / "srf.csv"
    good.write_text("# 两个波段\n1,1,0,0\n0,0,2,2\n", encoding="utf-8")
    r = load_srf_csv(str(good), 4)
    np.testing.assert_allclose(r.p3, [[0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5]])

    bad = tmp_path / "bad.csv"
    bad.write_text("1,1,0,0\n1,x,0,0\n", encoding="utf-8")
    with pytest.raises(FormatError) as info:
        load_srf_csv(str(bad), 4)
    assert info.value.line == 2
    assert f"{bad}:2:" in str(info.value)


def test_degradations_commute(rng):
    z = random_cube(rng, (8, 8, 12))
    d = make_spatial_degradation(8, 8, 4)
    r = srf_from_ranges(uniform_band_ranges(12, 4), 12)
    a = degrade_spectral(degrade_spatial(z, d), r).data
    b = degrade_spatial(degrade_spectral(z, r), d).data
    np.testing.assert_allclose(a, b, rtol=1e-6, atol=1e-12)


def test_lr_msi_paths_agree_on_exact_pair(toy_scene):
    d = make_spatial_degradation(32, 32, 4)
    r = srf_from_ranges(uniform_band_ranges(16, 4), 16)
    x, y = simulate_pair(toy_scene, d, r)
    assert x.dims == (8, 8, 16) and y.dims == (32, 32, 4)
    a, b = make_lr_msi(x, y, d, r)
    assert a.dims == b.dims == (8, 8, 4)
    np.testing.assert_allclose(a.data, b.data, rtol=1e-6, atol=1e-10)


def test_noise_is_seeded_and_independent():
    z = HyperCube(np.zeros((4, 4, 6)))
    spec = NoiseSpec(enabled=True, std=0.01, seed=3)
    first, second = add_noise(z, spec), add_noise(z, spec)
    assert first == second
    assert not np.allclose(first.data, 0)
    assert add_noise(z, NoiseSpec()) is z

    d = make_spatial_degradation(4, 4, 2)
    r = srf_from_ranges(uniform_band_ranges(6, 2), 6)
    x, y = simulate_pair(z, d, r, spec)
    assert not np.allclose(x.data, 0) and not np.allclose(y.data, 0)


def test_toy_scene_is_deterministic_and_bounded():
    a, b = make_toy_scene(seed=5), make_toy_scene(seed=5)
    assert a == b
    assert a.dims == (32, 32, 16)
    assert a.data.min() >= 0.1 - 1e-12 and a.data.max() <= 0.9 + 1e-12
    assert make_toy_scene(seed=6) != a
