"""
指标朴素实现
主要功能：按定义逐元素循环计算六项指标，用于交叉校验向量化实现

实现说明：
- 只用于小尺寸测试数据，不做任何向量化
"""

import math

import numpy as np

from evaluation.metrics import PSNR_CAP, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW, UIQI_WINDOW
from tensor.core import HyperCube


def _peak(ref: np.ndarray, b: int) -> float:
    w, h, _ = ref.shape
    peak = max(abs(ref[i, j, b]) for i in range(w) for j in range(h))
    return peak if peak > 0 else 1.0


def _band_rmse(ref: np.ndarray, fus: np.ndarray, b: int) -> float:
    w, h, _ = ref.shape
    total = 0.0
    for i in range(w):
        for j in range(h):
            total += (ref[i, j, b] - fus[i, j, b]) ** 2
    return math.sqrt(total / (w * h))


def rmse_loop(reference: HyperCube, fused: HyperCube) -> float:
    ref, fus = reference.data, fused.data
    total = 0.0
    for value_r, value_f in zip(ref.ravel(), fus.ravel()):
        total += (float(value_r) - float(value_f)) ** 2
    return math.sqrt(total / ref.size)


def psnr_loop(reference: HyperCube, fused: HyperCube) -> float:
    ref, fus = reference.data, fused.data
    values = []
    for b in range(ref.shape[2]):
        err = _band_rmse(ref, fus, b)
        values.append(PSNR_CAP if err == 0 else min(PSNR_CAP, 20.0 * math.log10(_peak(ref, b) / err)))
    return sum(values) / len(values)


def sam_loop(reference: HyperCube, fused: HyperCube) -> float:
    ref, fus = reference.data, fused.data
    w, h, s = ref.shape
    angles = []
    for i in range(w):
        for j in range(h):
            dot = sum(ref[i, j, k] * fus[i, j, k] for k in range(s))
            nr = math.sqrt(sum(ref[i, j, k] ** 2 for k in range(s)))
            nf = math.sqrt(sum(fus[i, j, k] ** 2 for k in range(s)))
            if nr == 0 or nf == 0:
                continue
            cosine = max(-1.0, min(1.0, dot / (nr * nf)))
            angles.append(math.degrees(math.acos(cosine)))
    return sum(angles) / len(angles) if angles else 0.0


def ergas_loop(reference: HyperCube, fused: HyperCube, ratio: int) -> float:
    ref, fus = reference.data, fused.data
    w, h, s = ref.shape
    addends = []
    for b in range(s):
        mean = sum(ref[i, j, b] for i in range(w) for j in range(h)) / (w * h)
        if mean == 0:
            continue
        addends.append((_band_rmse(ref, fus, b) / mean) ** 2)
    if not addends:
        return 0.0
    return 100.0 / ratio * math.sqrt(sum(addends) / len(addends))


def ssim_loop(reference: HyperCube, fused: HyperCube) -> float:
    ref, fus = reference.data, fused.data
    w, h, s = ref.shape
    size = min(SSIM_WINDOW, w, h)
    center = (size - 1) / 2.0
    weights = [[math.exp(-((a - center) ** 2 + (c - center) ** 2) / (2 * SSIM_SIGMA ** 2))
                for c in range(size)] for a in range(size)]
    norm = sum(sum(row) for row in weights)
    weights = [[v / norm for v in row] for row in weights]

    band_values = []
    for b in range(s):
        peak = _peak(ref, b)
        c1, c2 = (SSIM_K1 * peak) ** 2, (SSIM_K2 * peak) ** 2
        local = []
        for u in range(w - size + 1):
            for v in range(h - size + 1):
                mx = my = sxx = syy = sxy = 0.0
                for a in range(size):
                    for c in range(size):
                        g = weights[a][c]
                        x, y = ref[u + a, v + c, b], fus[u + a, v + c, b]
                        mx += g * x
                        my += g * y
                        sxx += g * x * x
                        syy += g * y * y
                        sxy += g * x * y
                vx, vy, cov = sxx - mx * mx, syy - my * my, sxy - mx * my
                local.append((2 * mx * my + c1) * (2 * cov + c2)
                             / ((mx * mx + my * my + c1) * (vx + vy + c2)))
        band_values.append(sum(local) / len(local))
    return sum(band_values) / s


def uiqi_loop(reference: HyperCube, fused: HyperCube) -> float:
    ref, fus = reference.data, fused.data
    w, h, s = ref.shape
    size = min(UIQI_WINDOW, w, h)
    n = size * size
    band_values = []
    for b in range(s):
        local = []
        for u in range(w - size + 1):
            for v in range(h - size + 1):
                xs = [ref[u + a, v + c, b] for a in range(size) for c in range(size)]
                ys = [fus[u + a, v + c, b] for a in range(size) for c in range(size)]
                mx, my = sum(xs) / n, sum(ys) / n
                vx = sum((x - mx) ** 2 for x in xs) / n
                vy = sum((y - my) ** 2 for y in ys) / n
                cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / n
                if vx + vy == 0 and mx * mx + my * my == 0:
                    q = 1.0
                elif vx + vy == 0:
                    q = 2 * mx * my / (mx * mx + my * my)
                elif mx * mx + my * my == 0:
                    q = 2 * cov / (vx + vy)
                else:
                    q = 4 * cov * mx * my / ((vx + vy) * (mx * mx + my * my))
                local.append(q)
        band_values.append(sum(local) / len(local))
    return sum(band_values) / s


def sam_map_loop(reference: HyperCube, fused: HyperCube) -> np.ndarray:
    ref, fus = reference.data, fused.data
    w, h, s = ref.shape
    out = np.zeros((w, h))
    for i in range(w):
        for j in range(h):
            dot = sum(ref[i, j, k] * fus[i, j, k] for k in range(s))
            nr = math.sqrt(sum(ref[i, j, k] ** 2 for k in range(s)))
            nf = math.sqrt(sum(fus[i, j, k] ** 2 for k in range(s)))
            if nr > 0 and nf > 0:
                out[i, j] = math.degrees(math.acos(max(-1.0, min(1.0, dot / (nr * nf)))))
    return out
