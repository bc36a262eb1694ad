"""End-to-end glue: frames -> windows -> sample vectors -> predictions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import bgmodel, flowdesc, goodfeat, lkflow, mlp
from .config import PipelineConfig
from .frameio import Frame
from .flowdesc import PointDescriptor, SampleVector


def _sample_intensity(img: np.ndarray, x: float, y: float) -> float:
    h, w = img.shape
    x = min(max(x, 0.0), w - 1.0)
    y = min(max(y, 0.0), h - 1.0)
    x0, y0 = int(x), int(y)
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    fx, fy = x - x0, y - y0
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    return float(top * (1 - fy) + bot * fy)


@dataclass
class _Slot:
    x: float
    y: float
    alive: bool = True
    prev_uv: Optional[tuple[float, float]] = None
    prev_intensity: float = 0.0
    descriptors: list = None  # type: ignore[assignment]

    def __post_init__(self):
        self.descriptors = []


def track_params(cfg: PipelineConfig) -> lkflow.TrackParams:
    return lkflow.TrackParams(
        half_window=cfg.track_half_window,
        max_iterations=cfg.track_max_iterations,
        convergence_eps=cfg.track_convergence_eps,
        residual_max=cfg.track_residual_max,
    )


def extract_window_sample(
    frames: Sequence[Frame],
    cfg: PipelineConfig,
    label: Optional[str] = None,
    foreground: Optional[np.ndarray] = None,
) -> SampleVector:
    """One fixed-length sample from one window of frames.

    Features are detected on the first frame, tracked at every flow_step-th
    frame, and each slot's descriptors are averaged. ``foreground``
    optionally gates detection to moving pixels (bool mask of the first
    frame).
    """
    if not frames:
        raise ValueError("empty window")
    steps = (len(frames) - 1) // cfg.flow_step
    n = cfg.feature_size
    if steps < 1:
        return SampleVector(np.zeros(n * flowdesc.DESCRIPTOR_DIM), label=label)

    points = goodfeat.detect_good_features(
        frames[0], max_n=n, quality_rel=cfg.quality_rel,
        min_distance=cfg.min_distance, half_window=cfg.tensor_half_window,
    )
    if foreground is not None:
        points = [
            p for p in points if foreground[int(round(p.y)), int(round(p.x))]
        ]
    params = track_params(cfg)
    slots = [_Slot(p.x, p.y) for p in points]
    for s in slots:
        s.prev_intensity = _sample_intensity(frames[0].as_float(), s.x, s.y)

    pyramids = {}

    def pyramid_at(i: int) -> lkflow.Pyramid:
        if i not in pyramids:
            pyramids[i] = lkflow.build_pyramid(frames[i], cfg.pyramid_levels)
        return pyramids[i]

    h_probe = cfg.jacobian_probe_offset
    for step in range(steps):
        i0 = step * cfg.flow_step
        i1 = i0 + cfg.flow_step
        pi, pj = pyramid_at(i0), pyramid_at(i1)
        img1 = frames[i1].as_float()

        def probe(x: float, y: float) -> Optional[tuple[float, float]]:
            r = lkflow.track_point(pi, pj, goodfeat.FeaturePoint(x, y, 0.0), params)
            if not r.tracked:
                return None
            return flowdesc.flow_velocity(r, cfg.flow_step)

        for slot in slots:
            if not slot.alive:
                continue
            r = lkflow.track_point(
                pi, pj, goodfeat.FeaturePoint(slot.x, slot.y, 0.0), params
            )
            if not r.tracked:
                slot.alive = False
                continue
            uv = flowdesc.flow_velocity(r, cfg.flow_step)
            try:
                jac = flowdesc.flow_jacobian(probe, (slot.x, slot.y), h=h_probe)
                invariants = flowdesc.flow_invariants(jac)
            except ValueError:
                invariants = (0.0, 0.0, 0.0, 0.0)
            cur_intensity = _sample_intensity(img1, r.new_x, r.new_y)
            i_t, u_t, v_t = flowdesc.temporal_derivatives(
                slot.prev_uv, uv, slot.prev_intensity, cur_intensity,
                cfg.flow_step,
            )
            slot.descriptors.append(
                flowdesc.assemble_descriptor(
                    slot.x, slot.y, frames[0].width, frames[0].height,
                    step, steps, i_t, uv, (u_t, v_t), invariants,
                )
            )
            slot.x, slot.y = r.new_x, r.new_y
            slot.prev_uv = uv
            slot.prev_intensity = cur_intensity

    return flowdesc.aggregate_sample(
        [s.descriptors for s in slots], n, steps, label=label
    )


def window_starts(n_frames: int, cfg: PipelineConfig) -> list[int]:
    return list(range(0, n_frames - cfg.window_frames + 1, cfg.stride))


def sequence_samples(
    frames: Sequence[Frame], cfg: PipelineConfig, label: Optional[str] = None
) -> list[tuple[int, SampleVector]]:
    """(window start frame, sample) for each full window in the sequence."""
    frames = list(frames)
    gating_masks = None
    if cfg.foreground_gating:
        model = bgmodel.BackgroundModel(
            frames[0].width, frames[0].height,
            k=cfg.gmm_components, alpha=cfg.gmm_alpha, t=cfg.gmm_threshold,
            match_radius=cfg.gmm_match_radius,
            initial_variance=cfg.gmm_initial_variance,
            variance_floor=cfg.gmm_variance_floor,
        )
        gating_masks = [model.update_and_classify(f).bits for f in frames]
    out = []
    for start in window_starts(len(frames), cfg):
        window = frames[start : start + cfg.window_frames]
        fg = gating_masks[start] if gating_masks is not None else None
        out.append(
            (start, extract_window_sample(window, cfg, label=label, foreground=fg))
        )
    return out


def classify_sequence(
    frames: Sequence[Frame], model: mlp.MlpModel, cfg: PipelineConfig
) -> list[tuple[int, int, np.ndarray]]:
    """(window start, predicted class, scores) per window."""
    frames = list(frames)
    if len(frames) < cfg.window_frames:
        raise ValueError(
            f"sequence has {len(frames)} frames, needs >= {cfg.window_frames}"
        )
    out = []
    for start, sample in sequence_samples(frames, cfg):
        cls, scores = mlp.predict(model, sample.values)
        out.append((start, cls, scores))
    return out


def majority_label(window_predictions: Sequence[tuple[int, int, np.ndarray]]) -> int:
    """Per-sequence label: majority vote, ties to the earliest window whose
    class is among the tied leaders."""
    votes = np.zeros(len(mlp.ACTION_LABELS), dtype=np.int64)
    for _, cls, _ in window_predictions:
        votes[cls] += 1
    best = votes.max()
    leaders = set(np.nonzero(votes == best)[0])
    for _, cls, _ in window_predictions:
        if cls in leaders:
            return cls
    raise ValueError("no window predictions")
