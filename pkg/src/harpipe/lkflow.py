"""Pyramidal iterative translational point tracker.

Coarse-to-fine: each pyramid level refines the displacement by solving the
2x2 structure-tensor system against the gradient-weighted intensity
difference, seeding the next finer level with the doubled estimate. Template
gradients come from the first frame only. Points are dropped on singular
tensors, out-of-bounds windows, or a final RMS residual above threshold.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .frameio import Frame
from .goodfeat import FeaturePoint

SMOOTH_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
MIN_COARSEST_SIDE = 16


class TrackStatus(enum.Enum):
    TRACKED = "TRACKED"
    LOST_RESIDUAL = "LOST_RESIDUAL"
    LOST_BOUNDS = "LOST_BOUNDS"
    LOST_SINGULAR = "LOST_SINGULAR"


@dataclass(frozen=True)
class Pyramid:
    levels: tuple[np.ndarray, ...]  # float64, level 0 = full resolution

    @property
    def width(self) -> int:
        return self.levels[0].shape[1]

    @property
    def height(self) -> int:
        return self.levels[0].shape[0]


@dataclass(frozen=True)
class TrackParams:
    half_window: int = 7
    max_iterations: int = 20
    convergence_eps: float = 0.03
    residual_max: float = 12.0
    min_eigen_per_pixel: float = 1e-4  # floor is this times the window area


@dataclass(frozen=True)
class TrackResult:
    new_x: float
    new_y: float
    dx: float
    dy: float
    residual: float
    status: TrackStatus

    @property
    def tracked(self) -> bool:
        return self.status is TrackStatus.TRACKED


def _smooth_separable(img: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 2, mode="edge")
    tmp = np.zeros_like(padded)
    for i, c in enumerate(SMOOTH_KERNEL):
        tmp += c * np.roll(padded, 2 - i, axis=1)
    out = np.zeros_like(padded)
    for i, c in enumerate(SMOOTH_KERNEL):
        out += c * np.roll(tmp, 2 - i, axis=0)
    return out[2:-2, 2:-2]


def build_pyramid(f: Frame | np.ndarray, levels: int) -> Pyramid:
    """Low-pass-and-decimate pyramid; level count silently clamped so the
    coarsest level keeps both sides >= 16 px."""
    img = f.as_float() if isinstance(f, Frame) else np.asarray(f, dtype=np.float64)
    out = [img]
    for _ in range(max(1, levels) - 1):
        prev = out[-1]
        if (prev.shape[0] + 1) // 2 < MIN_COARSEST_SIDE:
            break
        if (prev.shape[1] + 1) // 2 < MIN_COARSEST_SIDE:
            break
        out.append(_smooth_separable(prev)[::2, ::2])
    return Pyramid(tuple(out))


def _sample_window(img: np.ndarray, cx: float, cy: float, hw: int) -> np.ndarray:
    """Bilinear (2hw+1)^2 window around (cx, cy), clamped at the borders."""
    h, w = img.shape
    # unit-spaced sample grid: one shared fractional offset, so an interior
    # window is four shifted slices of a contiguous region
    x0 = int(np.floor(cx - hw))
    y0 = int(np.floor(cy - hw))
    n = 2 * hw + 1
    if 0 <= x0 and x0 + n < w and 0 <= y0 and y0 + n < h:
        fx = cx - hw - x0
        fy = cy - hw - y0
        r = img[y0 : y0 + n + 1, x0 : x0 + n + 1]
        top = r[:-1, :-1] * (1 - fx) + r[:-1, 1:] * fx
        bot = r[1:, :-1] * (1 - fx) + r[1:, 1:] * fx
        return top * (1 - fy) + bot * fy
    xs = np.clip(cx + np.arange(-hw, hw + 1, dtype=np.float64), 0.0, w - 1.0)
    ys = np.clip(cy + np.arange(-hw, hw + 1, dtype=np.float64), 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = (ys - y0)[:, None]
    top = img[np.ix_(y0, x0)] * (1 - fx) + img[np.ix_(y0, x1)] * fx
    bot = img[np.ix_(y1, x0)] * (1 - fx) + img[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bot * fy


def track_point(
    pi: Pyramid, pj: Pyramid, p: FeaturePoint, params: TrackParams = TrackParams()
) -> TrackResult:
    hw = params.half_window
    eigen_floor = params.min_eigen_per_pixel * (2 * hw + 1) ** 2
    w0, h0 = pi.width, pi.height

    def lost(status: TrackStatus) -> TrackResult:
        return TrackResult(p.x, p.y, 0.0, 0.0, np.inf, status)

    if not (hw <= p.x <= w0 - 1 - hw and hw <= p.y <= h0 - 1 - hw):
        return lost(TrackStatus.LOST_BOUNDS)

    n_levels = min(len(pi.levels), len(pj.levels))
    gx = gy = 0.0  # running guess, in the current level's pixels
    dx = dy = 0.0
    for level in reversed(range(n_levels)):
        imgi = pi.levels[level]
        imgj = pj.levels[level]
        lh, lw = imgi.shape
        px = p.x / (1 << level)
        py = p.y / (1 << level)

        # one (2hw+3)^2 window yields the template and both gradient windows
        big = _sample_window(imgi, px, py, hw + 1)
        iw = big[1:-1, 1:-1]
        grad_x = (big[1:-1, 2:] - big[1:-1, :-2]) / 2.0
        grad_y = (big[2:, 1:-1] - big[:-2, 1:-1]) / 2.0
        zxx = float((grad_x * grad_x).sum())
        zxy = float((grad_x * grad_y).sum())
        zyy = float((grad_y * grad_y).sum())
        det = zxx * zyy - zxy * zxy
        lam_min = (zxx + zyy - np.sqrt((zxx - zyy) ** 2 + 4 * zxy**2)) / 2.0
        if lam_min < eigen_floor or det <= 0.0:
            return lost(TrackStatus.LOST_SINGULAR)

        dx = dy = 0.0
        for _ in range(params.max_iterations):
            qx = px + gx + dx
            qy = py + gy + dy
            if not (0.0 <= qx <= lw - 1 and 0.0 <= qy <= lh - 1):
                return lost(TrackStatus.LOST_BOUNDS)
            diff = iw - _sample_window(imgj, qx, qy, hw)
            ex = float((diff * grad_x).sum())
            ey = float((diff * grad_y).sum())
            sx = (zyy * ex - zxy * ey) / det
            sy = (zxx * ey - zxy * ex) / det
            dx += sx
            dy += sy
            if sx * sx + sy * sy < params.convergence_eps**2:
                break
        if level > 0:
            gx = 2.0 * (gx + dx)
            gy = 2.0 * (gy + dy)

    tx = gx + dx
    ty = gy + dy
    nx = p.x + tx
    ny = p.y + ty
    if not (hw <= nx <= w0 - 1 - hw and hw <= ny <= h0 - 1 - hw):
        return lost(TrackStatus.LOST_BOUNDS)
    iw = _sample_window(pi.levels[0], p.x, p.y, hw)
    jw = _sample_window(pj.levels[0], nx, ny, hw)
    residual = float(np.sqrt(np.mean((iw - jw) ** 2)))
    status = (
        TrackStatus.TRACKED
        if residual <= params.residual_max
        else TrackStatus.LOST_RESIDUAL
    )
    return TrackResult(nx, ny, tx, ty, residual, status)


def track_points(
    pi: Pyramid,
    pj: Pyramid,
    points: list[FeaturePoint],
    params: TrackParams = TrackParams(),
) -> list[TrackResult]:
    return [track_point(pi, pj, p, params) for p in points]
