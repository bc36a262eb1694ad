"""Per-point flow descriptors and fixed-length sample assembly.

Each tracked point contributes 12 components per flow step:
[x, y, t, I_t, u, v, u_t, v_t, Div, Vor, G_ten, S_ten]. A classification
window yields one sample of length 12*N by averaging each point slot's
descriptors over the steps where the point stayed tracked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .lkflow import TrackResult

DESCRIPTOR_DIM = 12


@dataclass(frozen=True)
class PointDescriptor:
    x: float
    y: float
    t: float
    i_t: float
    u: float
    v: float
    u_t: float
    v_t: float
    div: float
    vor: float
    g_ten: float
    s_ten: float

    def to_array(self) -> np.ndarray:
        return np.array([
            self.x, self.y, self.t, self.i_t, self.u, self.v,
            self.u_t, self.v_t, self.div, self.vor, self.g_ten, self.s_ten,
        ])


@dataclass(frozen=True)
class FlowJacobian:
    ux: float
    uy: float
    vx: float
    vy: float


@dataclass(frozen=True)
class SampleVector:
    values: np.ndarray  # length 12*N
    label: Optional[str] = None


def flow_velocity(r: TrackResult, frame_step: int = 3) -> tuple[float, float]:
    if not r.tracked:
        raise ValueError("flow velocity requires a TRACKED result")
    if frame_step < 1:
        raise ValueError("frame_step must be >= 1")
    return r.dx / frame_step, r.dy / frame_step


def temporal_derivatives(
    prev_uv: tuple[float, float] | None,
    cur_uv: tuple[float, float],
    i_prev: float,
    i_cur: float,
    frame_step: int,
) -> tuple[float, float, float]:
    """(I_t, u_t, v_t); the first step of a window has no history so the
    velocity derivatives are zero there."""
    i_t = (i_cur - i_prev) / frame_step
    if prev_uv is None:
        return i_t, 0.0, 0.0
    return (
        i_t,
        (cur_uv[0] - prev_uv[0]) / frame_step,
        (cur_uv[1] - prev_uv[1]) / frame_step,
    )


def flow_jacobian(
    track_fn: Callable[[float, float], Optional[tuple[float, float]]],
    p: tuple[float, float],
    h: float = 2.0,
) -> FlowJacobian:
    """Spatial flow partials by central differences of tracked probe points
    at p +- h along each axis; one-sided when a probe fails."""
    px, py = p
    xp = track_fn(px + h, py)
    xm = track_fn(px - h, py)
    yp = track_fn(px, py + h)
    ym = track_fn(px, py - h)
    if (xp is None and xm is None) or (yp is None and ym is None):
        raise ValueError("flow jacobian: untrackable neighborhood")
    center = None

    def axis_diff(fwd, bwd):
        nonlocal center
        if fwd is not None and bwd is not None:
            return ((fwd[0] - bwd[0]) / (2 * h), (fwd[1] - bwd[1]) / (2 * h))
        if center is None:
            center = track_fn(px, py)
            if center is None:
                raise ValueError("flow jacobian: untrackable neighborhood")
        one = fwd if fwd is not None else bwd
        sign = 1.0 if fwd is not None else -1.0
        return (
            sign * (one[0] - center[0]) / h,
            sign * (one[1] - center[1]) / h,
        )

    ux, vx = axis_diff(xp, xm)
    uy, vy = axis_diff(yp, ym)
    return FlowJacobian(ux=ux, uy=uy, vx=vx, vy=vy)


def flow_invariants(j: FlowJacobian) -> tuple[float, float, float, float]:
    """(Div, Vor, G_ten, S_ten): trace, curl, and the second invariants of
    the full Jacobian and of its symmetric part."""
    div = j.ux + j.vy
    vor = j.vx - j.uy
    # second invariant 0.5*((tr J)^2 - tr(J^2)) = det for 2x2
    g_ten = j.ux * j.vy - j.uy * j.vx
    sxy = 0.5 * (j.uy + j.vx)
    s_ten = j.ux * j.vy - sxy * sxy
    return div, vor, g_ten, s_ten


def assemble_descriptor(
    x: float,
    y: float,
    frame_width: int,
    frame_height: int,
    step_index: int,
    steps_per_window: int,
    i_t: float,
    uv: tuple[float, float],
    ut_vt: tuple[float, float],
    invariants: tuple[float, float, float, float],
) -> PointDescriptor:
    t = 0.0 if steps_per_window <= 1 else step_index / (steps_per_window - 1)
    return PointDescriptor(
        x=x / frame_width,
        y=y / frame_height,
        t=t,
        i_t=i_t,
        u=uv[0],
        v=uv[1],
        u_t=ut_vt[0],
        v_t=ut_vt[1],
        div=invariants[0],
        vor=invariants[1],
        g_ten=invariants[2],
        s_ten=invariants[3],
    )


def aggregate_sample(
    slot_descriptors: Sequence[Sequence[PointDescriptor]],
    n_slots: int,
    steps_per_window: int,
    label: Optional[str] = None,
) -> SampleVector:
    """Mean descriptor per point slot, zero-padded to exactly n_slots slots.

    ``slot_descriptors[k]`` holds the descriptors of detection-rank-k point
    for the steps where it stayed tracked; a slot tracked for half the steps
    or fewer is zeroed.
    """
    if steps_per_window < 1:
        raise ValueError("window must contain at least one flow step")
    values = np.zeros(n_slots * DESCRIPTOR_DIM)
    for k, descs in enumerate(slot_descriptors[:n_slots]):
        if 2 * len(descs) <= steps_per_window:
            continue
        stack = np.stack([d.to_array() for d in descs])
        values[k * DESCRIPTOR_DIM : (k + 1) * DESCRIPTOR_DIM] = stack.mean(axis=0)
    return SampleVector(values=values, label=label)


# ---------------------------------------------------------------------------
# sample file format: header "harfv 1 <N> 12", then one line per sample of
# space-separated reals with an optional trailing "label=<class>"

def write_samples(path: str, samples: Sequence[SampleVector], n: int) -> None:
    with open(path, "w") as fh:
        fh.write(f"harfv 1 {n} {DESCRIPTOR_DIM}\n")
        for s in samples:
            if s.values.size != n * DESCRIPTOR_DIM:
                raise ValueError("sample length does not match header")
            line = " ".join(repr(float(v)) for v in s.values)
            if s.label is not None:
                line += f" label={s.label}"
            fh.write(line + "\n")


def read_samples(path: str) -> tuple[list[SampleVector], int]:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "harfv" or header[1] != "1":
            raise ValueError(f"bad sample file header in {path}")
        n = int(header[2])
        if int(header[3]) != DESCRIPTOR_DIM:
            raise ValueError("unexpected descriptor dimension")
        samples = []
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            label = None
            if parts[-1].startswith("label="):
                label = parts[-1][len("label="):]
                parts = parts[:-1]
            vals = np.array([float(p) for p in parts])
            if vals.size != n * DESCRIPTOR_DIM:
                raise ValueError("sample length does not match header")
            samples.append(SampleVector(values=vals, label=label))
    return samples, n
