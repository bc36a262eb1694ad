"""Minimum-eigenvalue corner detection on the structure tensor.

The tensor is the windowed sum of outer products of central-difference image
gradients; a point is trackable when the smaller eigenvalue clears a threshold
set relative to the frame-wide maximum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frameio import Frame


@dataclass(frozen=True)
class StructureTensor:
    zxx: float
    zxy: float
    zyy: float


@dataclass(frozen=True)
class FeaturePoint:
    x: float
    y: float
    score: float


def spatial_gradients(f: Frame) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradients (Ix, Iy); zero on the one-pixel border."""
    if f.width < 3 or f.height < 3:
        raise ValueError("frame must be at least 3x3")
    img = f.as_float()
    ix = np.zeros_like(img)
    iy = np.zeros_like(img)
    ix[:, 1:-1] = (img[:, 2:] - img[:, :-2]) / 2.0
    iy[1:-1, :] = (img[2:, :] - img[:-2, :]) / 2.0
    return ix, iy


def structure_tensor_at(
    ix: np.ndarray, iy: np.ndarray, x: int, y: int, half_window: int
) -> StructureTensor:
    h = half_window
    if x - h < 0 or y - h < 0 or x + h >= ix.shape[1] or y + h >= ix.shape[0]:
        raise ValueError("tensor window out of bounds")
    wx = ix[y - h : y + h + 1, x - h : x + h + 1]
    wy = iy[y - h : y + h + 1, x - h : x + h + 1]
    return StructureTensor(
        float((wx * wx).sum()), float((wx * wy).sum()), float((wy * wy).sum())
    )


def min_eigenvalue(z: StructureTensor) -> float:
    disc = np.sqrt((z.zxx - z.zyy) ** 2 + 4.0 * z.zxy**2)
    return max(0.0, (z.zxx + z.zyy - disc) / 2.0)


def min_eigenvalue_map(f: Frame, half_window: int = 2) -> np.ndarray:
    """Per-pixel smaller structure-tensor eigenvalue; zero where the window
    does not fit."""
    ix, iy = spatial_gradients(f)
    h = half_window
    zxx = np.zeros_like(ix)
    zxy = np.zeros_like(ix)
    zyy = np.zeros_like(ix)
    ih, iw = ix.shape
    vh, vw = ih - 2 * h, iw - 2 * h
    if vh <= 0 or vw <= 0:
        return np.zeros_like(ix)
    sxx = np.zeros((vh, vw))
    sxy = np.zeros((vh, vw))
    syy = np.zeros((vh, vw))
    for dy in range(2 * h + 1):
        for dx in range(2 * h + 1):
            gx = ix[dy : dy + vh, dx : dx + vw]
            gy = iy[dy : dy + vh, dx : dx + vw]
            sxx += gx * gx
            sxy += gx * gy
            syy += gy * gy
    disc = np.sqrt((sxx - syy) ** 2 + 4.0 * sxy**2)
    zxx[h : h + vh, h : h + vw] = sxx
    zxy[h : h + vh, h : h + vw] = sxy
    zyy[h : h + vh, h : h + vw] = syy
    lam = np.zeros_like(ix)
    lam[h : h + vh, h : h + vw] = np.maximum(0.0, (sxx + syy - disc) / 2.0)
    return lam


def _nms_3x3(lam: np.ndarray) -> np.ndarray:
    """True where lam is >= all 8 neighbors (outside treated as -inf)."""
    padded = np.pad(lam, 1, mode="constant", constant_values=-np.inf)
    keep = np.ones_like(lam, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            keep &= lam >= padded[1 + dy : 1 + dy + lam.shape[0],
                                  1 + dx : 1 + dx + lam.shape[1]]
    return keep


def detect_good_features(
    f: Frame,
    max_n: int,
    quality_rel: float = 0.05,
    min_distance: float = 7.0,
    half_window: int = 2,
) -> list[FeaturePoint]:
    """Strongest corners after relative thresholding, 3x3 non-max suppression
    and greedy minimum-distance selection. Sorted by descending score,
    ties broken by lower y then lower x."""
    lam = min_eigenvalue_map(f, half_window)
    lam_max = lam.max()
    if lam_max <= 0.0 or max_n < 1:
        return []
    threshold = quality_rel * lam_max
    candidates = _nms_3x3(lam) & (lam >= threshold)
    ys, xs = np.nonzero(candidates)
    scores = lam[ys, xs]
    order = np.lexsort((xs, ys, -scores))

    chosen: list[FeaturePoint] = []
    cx = np.empty(max_n)
    cy = np.empty(max_n)
    for i in order:
        x, y, s = float(xs[i]), float(ys[i]), float(scores[i])
        k = len(chosen)
        if k and np.min((cx[:k] - x) ** 2 + (cy[:k] - y) ** 2) < min_distance**2:
            continue
        cx[k], cy[k] = x, y
        chosen.append(FeaturePoint(x, y, s))
        if len(chosen) == max_n:
            break
    return chosen
