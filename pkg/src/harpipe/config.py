"""Pipeline configuration: flat key=value files with command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass
class PipelineConfig:
    working_resolution: tuple[int, int] = (160, 120)
    frame_rate: float = 25.0
    flow_step: int = 3
    window_frames: int = 25
    window_stride: int = 0  # 0 = non-overlapping (stride = window_frames)
    feature_size: int = 10
    hidden_nodes: int = 200
    seed: int = 0
    epochs: int = 50

    # good-feature detection
    quality_rel: float = 0.05
    min_distance: float = 7.0
    tensor_half_window: int = 2

    # tracker
    pyramid_levels: int = 3
    track_half_window: int = 7
    track_max_iterations: int = 20
    track_convergence_eps: float = 0.03
    track_residual_max: float = 12.0
    jacobian_probe_offset: float = 2.0

    # background model
    gmm_components: int = 3
    gmm_alpha: float = 0.05
    gmm_threshold: float = 0.7
    gmm_match_radius: float = 2.5
    gmm_initial_variance: float = 225.0
    gmm_variance_floor: float = 4.0
    foreground_gating: bool = False

    # classifier activation / RPROP
    activation_a: float = 1.0
    activation_beta: float = 1.0
    rprop_eta_plus: float = 1.2
    rprop_eta_minus: float = 0.5
    rprop_step_init: float = 0.1
    rprop_step_min: float = 1e-6
    rprop_step_max: float = 50.0

    def __post_init__(self):
        if self.flow_step < 1:
            raise ValueError("flow_step must be >= 1")
        if self.window_frames < self.flow_step + 1:
            raise ValueError("window_frames must be >= flow_step + 1")
        if self.feature_size < 1:
            raise ValueError("feature_size must be >= 1")

    @property
    def stride(self) -> int:
        return self.window_stride if self.window_stride > 0 else self.window_frames

    @property
    def steps_per_window(self) -> int:
        return (self.window_frames - 1) // self.flow_step


def _parse_value(name: str, raw: str, ftype):
    raw = raw.strip()
    if ftype is bool:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if ftype is int:
        return int(raw)
    if ftype is float:
        return float(raw)
    if name == "working_resolution":
        try:
            w, h = (int(p) for p in raw.lower().split("x"))
            return (w, h)
        except ValueError:
            raise ValueError(
                f"working_resolution: expected WxH, got {raw!r}"
            ) from None
    raise ValueError(f"cannot parse config key {name!r}")


def apply_settings(cfg: PipelineConfig, settings: dict[str, str]) -> PipelineConfig:
    fields = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    types = {
        f.name: type(getattr(cfg, f.name)) if f.name != "working_resolution" else tuple
        for f in dataclasses.fields(PipelineConfig)
    }
    updates = {}
    for key, raw in settings.items():
        if key not in fields:
            raise ValueError(f"unknown config key {key!r}")
        updates[key] = _parse_value(key, raw, types[key])
    return dataclasses.replace(cfg, **updates)


def load_config(path: str | None, overrides: dict[str, str] | None = None
                ) -> PipelineConfig:
    settings: dict[str, str] = {}
    if path is not None:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (p.strip() for p in line.split("=", 1))
                settings[key] = value
    if overrides:
        settings.update(overrides)
    return apply_settings(PipelineConfig(), settings)
