import numpy as np
import pytest

from harpipe import mlp, synth
from harpipe.config import PipelineConfig
from harpipe.flowdesc import DESCRIPTOR_DIM
from harpipe.frameio import Frame
from harpipe.pipeline import (
    classify_sequence,
    extract_window_sample,
    majority_label,
    sequence_samples,
    window_starts,
)

from conftest import make_frame


def synth_frames(label, seed=0, count=None):
    rng = np.random.default_rng(seed)
    pixels = synth.generate_sequence(label, rng)
    if count is not None:
        pixels = pixels[:count]
    return [Frame(synth.WIDTH, synth.HEIGHT, i, p) for i, p in enumerate(pixels)]


class TestWindowStarts:
    def test_non_overlapping_default(self):
        assert window_starts(75, PipelineConfig()) == [0, 25, 50]

    def test_short_sequence(self):
        assert window_starts(24, PipelineConfig()) == []

    def test_overlapping_stride(self):
        cfg = PipelineConfig(window_stride=10)
        assert window_starts(50, cfg) == [0, 10, 20]


class TestExtractWindowSample:
    def test_length_on_moving_texture(self):
        frames = synth_frames("walking", count=25)
        cfg = PipelineConfig()
        sample = extract_window_sample(frames, cfg, label="walking")
        assert sample.values.size == 12 * cfg.feature_size
        assert sample.label == "walking"
        assert np.isfinite(sample.values).all()
        assert sample.values.any()

    def test_length_on_blank_frames(self):
        cfg = PipelineConfig(feature_size=7)
        frames = [
            make_frame(np.full((120, 160), 50, dtype=np.uint8), index=i)
            for i in range(25)
        ]
        sample = extract_window_sample(frames, cfg)
        assert sample.values.size == 12 * 7
        assert not sample.values.any()

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError):
            extract_window_sample([], PipelineConfig())

    def test_walking_mean_u_near_speed(self):
        frames = synth_frames("walking", count=25)
        sample = extract_window_sample(frames, PipelineConfig())
        u = sample.values.reshape(-1, DESCRIPTOR_DIM)[:, 4]
        live = u[np.abs(u) > 1e-6]
        assert live.size > 0
        # generator speed is ~1 px/frame with +-20% jitter
        assert 0.6 <= np.abs(live).mean() <= 1.4

    def test_foreground_gating_drops_background_points(self):
        frames = synth_frames("walking", count=25)
        cfg = PipelineConfig()
        none_mask = np.zeros((120, 160), dtype=bool)
        gated = extract_window_sample(frames, cfg, foreground=none_mask)
        assert not gated.values.any()


class TestSequenceSamples:
    def test_sample_per_window(self):
        frames = synth_frames("running", count=75)
        cfg = PipelineConfig()
        samples = sequence_samples(frames, cfg, label="running")
        assert [start for start, _ in samples] == [0, 25, 50]
        for _, s in samples:
            assert s.values.size == 12 * cfg.feature_size
            assert s.label == "running"


class TestClassify:
    def _constant_model(self, cls, n_inputs=120):
        # output layer biased toward one class regardless of input
        biases = np.full(4, -1.0)
        biases[cls] = 1.0
        return mlp.MlpModel([n_inputs, 4], [np.zeros((4, n_inputs))], [biases])

    def test_window_count(self):
        frames = synth_frames("boxing", count=75)
        preds = classify_sequence(frames, self._constant_model(2), PipelineConfig())
        assert [p[0] for p in preds] == [0, 25, 50]
        assert all(p[1] == 2 for p in preds)

    def test_too_short_sequence(self):
        frames = synth_frames("boxing", count=24)
        with pytest.raises(ValueError):
            classify_sequence(frames, self._constant_model(0), PipelineConfig())


class TestMajorityLabel:
    def _preds(self, classes):
        return [(i * 25, c, np.zeros(4)) for i, c in enumerate(classes)]

    def test_majority(self):
        assert majority_label(self._preds([2, 2, 3])) == 2

    def test_tie_goes_to_earliest_window(self):
        assert majority_label(self._preds([3, 1, 3, 1])) == 3
        assert majority_label(self._preds([1, 3, 1, 3])) == 1

    def test_single_window(self):
        assert majority_label(self._preds([0])) == 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            majority_label([])
