import pytest

from harpipe.config import PipelineConfig, apply_settings, load_config


class TestDefaults:
    def test_paper_scale_defaults(self):
        cfg = PipelineConfig()
        assert cfg.working_resolution == (160, 120)
        assert cfg.frame_rate == 25.0
        assert cfg.flow_step == 3
        assert cfg.window_frames == 25
        assert cfg.feature_size == 10
        assert cfg.hidden_nodes == 200

    def test_stride_defaults_to_window_length(self):
        assert PipelineConfig().stride == 25
        assert PipelineConfig(window_stride=5).stride == 5

    def test_steps_per_window(self):
        assert PipelineConfig().steps_per_window == 8
        assert PipelineConfig(window_frames=7, flow_step=3).steps_per_window == 2

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            PipelineConfig(flow_step=0)
        with pytest.raises(ValueError):
            PipelineConfig(window_frames=3, flow_step=3)
        with pytest.raises(ValueError):
            PipelineConfig(feature_size=0)


class TestApplySettings:
    def test_typed_parsing(self):
        cfg = apply_settings(PipelineConfig(), {
            "feature_size": "14",
            "gmm_alpha": "0.1",
            "foreground_gating": "true",
            "working_resolution": "80x60",
        })
        assert cfg.feature_size == 14
        assert cfg.gmm_alpha == 0.1
        assert cfg.foreground_gating is True
        assert cfg.working_resolution == (80, 60)

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config key"):
            apply_settings(PipelineConfig(), {"learning_rate": "0.1"})

    def test_bad_boolean(self):
        with pytest.raises(ValueError):
            apply_settings(PipelineConfig(), {"foreground_gating": "maybe"})

    def test_bad_resolution(self):
        with pytest.raises(ValueError):
            apply_settings(PipelineConfig(), {"working_resolution": "wide"})


class TestLoadConfig:
    def test_file_with_comments_and_overrides(self, tmp_path):
        path = tmp_path / "pipeline.cfg"
        path.write_text(
            "# tuned for the synthetic corpus\n"
            "feature_size = 8\n"
            "epochs = 10   # short run\n"
            "\n"
            "seed = 3\n"
        )
        cfg = load_config(str(path), {"epochs": "20"})
        assert cfg.feature_size == 8
        assert cfg.epochs == 20
        assert cfg.seed == 3

    def test_no_file_gives_defaults(self):
        assert load_config(None) == PipelineConfig()

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("feature_size 8\n")
        with pytest.raises(ValueError, match="key = value"):
            load_config(str(path))
