"""Frame decoding, grayscale conversion, bilinear resizing and sequence loading."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np


class PnmError(ValueError):
    """Base class for PNM decode failures."""


class MalformedHeaderError(PnmError):
    pass


class TruncatedDataError(PnmError):
    pass


class UnsupportedMaxvalError(PnmError):
    pass


class EmptySequenceError(ValueError):
    pass


@dataclass(frozen=True)
class Frame:
    """One grayscale frame. ``pixels`` is a (height, width) uint8 array."""

    width: int
    height: int
    index: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width):
            raise ValueError("pixel buffer does not match declared dimensions")

    def as_float(self) -> np.ndarray:
        return self.pixels.astype(np.float64)


@dataclass(frozen=True)
class RgbFrame:
    """One color frame. ``pixels`` is a (height, width, 3) uint8 array."""

    width: int
    height: int
    index: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError("pixel buffer does not match declared dimensions")


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def _tokenize_header(data: bytes, n_tokens: int) -> tuple[list[int], int]:
    """Read n_tokens whitespace-separated integers after the magic, skipping
    '#' comments. Returns the values and the offset one whitespace byte past
    the last token (start of binary payload for P5/P6)."""
    tokens: list[int] = []
    i = 2  # past the 2-byte magic
    n = len(data)
    while len(tokens) < n_tokens:
        while i < n and (data[i : i + 1].isspace() or data[i] == ord("#")):
            if data[i] == ord("#"):
                while i < n and data[i] not in (10, 13):
                    i += 1
            else:
                i += 1
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise MalformedHeaderError("header ended before all fields were read")
        tok = data[start:i]
        if not tok.isdigit():
            raise MalformedHeaderError(f"non-numeric header field {tok!r}")
        tokens.append(int(tok))
    if i >= n:
        raise TruncatedDataError("no pixel data after header")
    return tokens, i + 1  # single whitespace separates header from payload


def decode_pnm(data: bytes, index: int = 0) -> Union[Frame, RgbFrame]:
    """Decode P2/P5 (grayscale) or P3/P6 (RGB) PNM bytes, maxval <= 255."""
    if len(data) < 2:
        raise MalformedHeaderError("input too short for a PNM magic")
    magic = data[:2].decode("ascii", errors="replace")
    if magic not in ("P2", "P3", "P5", "P6"):
        raise MalformedHeaderError(f"unsupported magic {magic!r}")
    (width, height, maxval), offset = _tokenize_header(data, 3)
    if width < 1 or height < 1:
        raise MalformedHeaderError("non-positive dimensions")
    if maxval > 255 or maxval < 1:
        raise UnsupportedMaxvalError(f"maxval {maxval} outside [1, 255]")

    channels = 3 if magic in ("P3", "P6") else 1
    count = width * height * channels

    if magic in ("P5", "P6"):
        payload = data[offset : offset + count]
        if len(payload) < count:
            raise TruncatedDataError(
                f"expected {count} pixel bytes, got {len(payload)}"
            )
        values = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
    else:
        fields = data[offset - 1 :].split()
        if len(fields) < count:
            raise TruncatedDataError(
                f"expected {count} ASCII samples, got {len(fields)}"
            )
        try:
            values = np.array([int(f) for f in fields[:count]], dtype=np.int64)
        except ValueError as e:
            raise TruncatedDataError(f"non-numeric pixel sample: {e}") from None
    if values.max(initial=0) > maxval:
        raise TruncatedDataError("pixel sample exceeds declared maxval")

    pixels = values.astype(np.uint8)
    if channels == 1:
        return Frame(width, height, index, pixels.reshape(height, width))
    return RgbFrame(width, height, index, pixels.reshape(height, width, 3))


def encode_pgm(frame: Frame) -> bytes:
    header = f"P5\n{frame.width} {frame.height}\n255\n".encode("ascii")
    return header + frame.pixels.tobytes()


def to_grayscale(f: RgbFrame) -> Frame:
    """Unweighted channel average, rounded half-up."""
    avg = _round_half_up(f.pixels.astype(np.float64).sum(axis=2) / 3.0)
    return Frame(f.width, f.height, f.index, avg.astype(np.uint8))


def resize_bilinear(f: Frame, out_w: int, out_h: int) -> Frame:
    """Bilinear resize with pixel-center alignment; intensities rounded half-up."""
    if out_w < 1 or out_h < 1:
        raise ValueError("output dimensions must be >= 1")
    if (out_w, out_h) == (f.width, f.height):
        return Frame(out_w, out_h, f.index, f.pixels.copy())

    src = f.as_float()
    sx = f.width / out_w
    sy = f.height / out_h
    xs = np.clip((np.arange(out_w) + 0.5) * sx - 0.5, 0.0, f.width - 1.0)
    ys = np.clip((np.arange(out_h) + 0.5) * sy - 0.5, 0.0, f.height - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, f.width - 1)
    y1 = np.minimum(y0 + 1, f.height - 1)
    fx = xs - x0
    fy = ys - y0

    top = src[np.ix_(y0, x0)] * (1 - fx) + src[np.ix_(y0, x1)] * fx
    bot = src[np.ix_(y1, x0)] * (1 - fx) + src[np.ix_(y1, x1)] * fx
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    out = np.clip(_round_half_up(out), 0, 255)
    return Frame(out_w, out_h, f.index, out.astype(np.uint8))


def _normalize(frame: Union[Frame, RgbFrame], working_resolution) -> Frame:
    if isinstance(frame, RgbFrame):
        frame = to_grayscale(frame)
    if working_resolution is not None:
        frame = resize_bilinear(frame, working_resolution[0], working_resolution[1])
    return frame


PNM_EXTENSIONS = (".pgm", ".ppm", ".pnm")


def load_sequence(
    path_spec: str,
    working_resolution: tuple[int, int] | None = (160, 120),
    raw: str | None = None,
) -> Iterator[Frame]:
    """Yield grayscale frames at the working resolution, indices 0, 1, ...

    ``path_spec`` is a directory of PNM files (lexicographic order) or, with
    ``raw='WxH'`` or ``raw='WxH:rgb'``, a raw concatenated 8-bit stream.
    """
    if raw is not None:
        spec = raw.lower()
        is_rgb = spec.endswith(":rgb")
        if is_rgb:
            spec = spec[: -len(":rgb")]
        try:
            w, h = (int(p) for p in spec.split("x"))
        except ValueError:
            raise ValueError(f"bad raw geometry {raw!r}, expected WxH[:rgb]") from None
        frame_bytes = w * h * (3 if is_rgb else 1)
        with open(path_spec, "rb") as fh:
            data = fh.read()
        n_frames = len(data) // frame_bytes
        if n_frames == 0:
            raise EmptySequenceError(f"{path_spec} holds no complete frame")
        for i in range(n_frames):
            buf = np.frombuffer(
                data, dtype=np.uint8, count=frame_bytes, offset=i * frame_bytes
            )
            if is_rgb:
                fr: Union[Frame, RgbFrame] = RgbFrame(w, h, i, buf.reshape(h, w, 3))
            else:
                fr = Frame(w, h, i, buf.reshape(h, w))
            yield _normalize(fr, working_resolution)
        return

    names = sorted(
        n for n in os.listdir(path_spec)
        if n.lower().endswith(PNM_EXTENSIONS)
    )
    if not names:
        raise EmptySequenceError(f"no PNM files in {path_spec}")
    for i, name in enumerate(names):
        with open(os.path.join(path_spec, name), "rb") as fh:
            frame = decode_pnm(fh.read(), index=i)
        yield _normalize(frame, working_resolution)
