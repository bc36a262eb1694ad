"""Per-pixel adaptive Gaussian-mixture background model.

Each pixel keeps K Gaussian components (weight, mean, variance) sorted by
descending fitness w/sqrt(var). A frame update matches each pixel against its
components, adapts the matched one, replaces the weakest when nothing matches,
and labels the pixel background iff its matched component falls inside the
smallest prefix whose cumulative weight reaches the threshold T.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frameio import Frame


@dataclass(frozen=True)
class GaussComponent:
    weight: float
    mean: float
    variance: float


def fitness(c: GaussComponent) -> float:
    """Weight over standard deviation; high fitness marks stable background."""
    return c.weight / np.sqrt(c.variance)


@dataclass(frozen=True)
class ForegroundMask:
    width: int
    height: int
    bits: np.ndarray  # (height, width) bool, True = foreground

    def to_frame(self, index: int = 0) -> Frame:
        return Frame(
            self.width, self.height, index,
            np.where(self.bits, 255, 0).astype(np.uint8),
        )


@dataclass
class BackgroundModel:
    width: int
    height: int
    k: int = 3
    alpha: float = 0.05
    t: float = 0.7
    match_radius: float = 2.5
    initial_variance: float = 225.0
    variance_floor: float = 4.0
    # (k, height*width) component state, fitness-sorted per pixel
    weights: np.ndarray = field(init=False, repr=False)
    means: np.ndarray = field(init=False, repr=False)
    variances: np.ndarray = field(init=False, repr=False)
    _seeded: bool = field(default=False, init=False, repr=False)

    def __post_init__(self):
        n = self.width * self.height
        self.weights = np.zeros((self.k, n))
        self.means = np.zeros((self.k, n))
        self.variances = np.full((self.k, n), self.initial_variance)

    def components_at(self, x: int, y: int) -> list[GaussComponent]:
        i = y * self.width + x
        return [
            GaussComponent(self.weights[k, i], self.means[k, i], self.variances[k, i])
            for k in range(self.k)
        ]

    def update_and_classify(self, f: Frame) -> ForegroundMask:
        if (f.width, f.height) != (self.width, self.height):
            raise ValueError("frame dimensions do not match the model")
        x = f.as_float().reshape(-1)
        n = x.size

        if not self._seeded:
            # first frame seeds the dominant component at the observed value
            self.weights[0] = 1.0
            self.means[:] = x[None, :]
            self._seeded = True
            return ForegroundMask(
                self.width, self.height,
                np.zeros((self.height, self.width), dtype=bool),
            )

        w, mu, var = self.weights, self.means, self.variances
        sigma = np.sqrt(var)
        match = np.abs(x[None, :] - mu) <= self.match_radius * sigma
        # components are fitness-sorted, so the first match is the best one
        matched_any = match.any(axis=0)
        midx = np.argmax(match, axis=0)
        cols = np.arange(n)

        m_cols = cols[matched_any]
        m_rows = midx[matched_any]
        w[:, m_cols] *= 1.0 - self.alpha
        w[m_rows, m_cols] += self.alpha
        rho = self.alpha / w[m_rows, m_cols]
        xm = x[m_cols]
        mu[m_rows, m_cols] = (1.0 - rho) * mu[m_rows, m_cols] + rho * xm
        var[m_rows, m_cols] = (1.0 - rho) * var[m_rows, m_cols] + rho * (
            xm - mu[m_rows, m_cols]
        ) ** 2

        u_cols = cols[~matched_any]
        if u_cols.size:
            # no match: swap the weakest component for a fresh one, renormalize
            w[-1, u_cols] = self.alpha
            mu[-1, u_cols] = x[u_cols]
            var[-1, u_cols] = self.initial_variance
            w[:, u_cols] /= w[:, u_cols].sum(axis=0, keepdims=True)

        np.maximum(var, self.variance_floor, out=var)

        fit = w / np.sqrt(var)
        order = np.argsort(-fit, axis=0, kind="stable")
        self.weights = np.take_along_axis(w, order, axis=0)
        self.means = np.take_along_axis(mu, order, axis=0)
        self.variances = np.take_along_axis(var, order, axis=0)

        # position of the matched component after the re-sort
        pos = np.argmax(order == midx[None, :], axis=0)
        cum = np.cumsum(self.weights, axis=0)
        prefix_len = 1 + np.argmax(cum >= self.t, axis=0)
        background = matched_any & (pos < prefix_len)
        return ForegroundMask(
            self.width, self.height,
            (~background).reshape(self.height, self.width),
        )


def subtract_consecutive(prev: Frame, cur: Frame, threshold: float) -> ForegroundMask:
    """Plain frame differencing: foreground where |cur - prev| > threshold."""
    if (prev.width, prev.height) != (cur.width, cur.height):
        raise ValueError("frame dimensions differ")
    diff = np.abs(cur.as_float() - prev.as_float())
    return ForegroundMask(cur.width, cur.height, diff > threshold)
