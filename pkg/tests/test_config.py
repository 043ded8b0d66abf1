import pytest

import config
from config import RunConfig, SmoothingConfig, SynthConfig, TrainConfig, TuneGrid
from utils.errors import ConfigError


def test_module_defaults_are_valid():
    config.validate_all_configs()
    config.default_run_config().validate()


def test_three_sigma_radius():
    assert SmoothingConfig.three_sigma(0.5).radius == 2
    assert SmoothingConfig.three_sigma(2.0).radius == 6
    assert SmoothingConfig.three_sigma(0.1).radius == 1


class TestTuneGrid:
    def test_derived_radii(self):
        grid = TuneGrid(sigmas=(1.0, 4.0), thresholds=(0.5,))
        assert grid.combinations() == [(1.0, 3, 0.5), (4.0, 12, 0.5)]
        assert len(grid) == 2

    def test_explicit_radii_order(self):
        grid = TuneGrid(sigmas=(1.0,), radii=(2, 5), thresholds=(0.1, 0.2))
        assert grid.combinations() == [(1.0, 2, 0.1), (1.0, 2, 0.2), (1.0, 5, 0.1), (1.0, 5, 0.2)]

    def test_invalid(self):
        with pytest.raises(ConfigError):
            TuneGrid(sigmas=(-1.0,)).validate()
        with pytest.raises(ConfigError):
            TuneGrid(radii=()).validate()


class TestTrainConfig:
    @pytest.mark.parametrize(
        "changes",
        [{"epochs": 0}, {"batch_size": 0}, {"learning_rate": 0.0}, {"validation_fraction": 0.5}, {"optimizer": "rmsprop"}],
    )
    def test_invalid(self, changes):
        with pytest.raises(ConfigError):
            TrainConfig(**changes).validate()


class TestRunConfig:
    def test_merged_ignores_none_and_coerces_lists(self):
        run = RunConfig().merged({"w": 7, "sigma": None, "sigmas": [1.0, 2.0]})
        assert run.w == 7
        assert run.sigma is None
        assert run.sigmas == (1.0, 2.0)

    def test_merged_rejects_unknown_keys(self):
        with pytest.raises(ConfigError):
            RunConfig().merged({"window": 7})

    def test_fixed_smoothing(self):
        assert RunConfig().fixed_smoothing() is None
        smoothing, threshold = RunConfig(sigma=2.0, threshold=0.4).fixed_smoothing()
        assert smoothing == SmoothingConfig(sigma=2.0, radius=6)
        assert threshold == 0.4
        smoothing, _ = RunConfig(sigma=2.0, radius=3, threshold=0.4).fixed_smoothing()
        assert smoothing.radius == 3

    @pytest.mark.parametrize(
        "changes",
        [
            {"w": 1},
            {"train_fraction": 1.0},
            {"events": "e.csv", "label_column": "label"},
            {"sigma": 1.0},
            {"radius": 3},
            {"tolerance": 0.0},
            {"activation": "relu"},
            {"epochs": 0},
        ],
    )
    def test_invalid(self, changes):
        with pytest.raises(ConfigError):
            RunConfig(**changes).validate()

    def test_to_dict_is_json_ready(self):
        data = RunConfig(feature_columns=("a", "b")).to_dict()
        assert data["feature_columns"] == ["a", "b"]
        assert data["thresholds"][0] == 0.1


def test_presets():
    assert config.get_preset("fraud")["w"] == 2
    assert config.get_preset("bow-shock")["w"] == 76
    with pytest.raises(ConfigError):
        config.get_preset("unknown")


def test_synth_defaults_match_pulse_width():
    synth = SynthConfig()
    assert synth.event_width == (RunConfig().w - 1) * synth.spacing


@pytest.fixture
def restore_module_settings(monkeypatch):
    for name in ("TRAINING", "OBSERVABILITY", "WORKERS"):
        monkeypatch.setattr(config, name, getattr(config, name))


def test_env_overrides(monkeypatch, restore_module_settings):
    monkeypatch.setenv("EVENTDET_EPOCHS", "12")
    monkeypatch.setenv("EVENTDET_WORKERS", "3")
    monkeypatch.setenv("EVENTDET_LOG_LEVEL", "debug")
    config.load_env_overrides()
    run = config.default_run_config()
    assert run.epochs == 12
    assert run.workers == 3
    assert config.OBSERVABILITY.log_level == "DEBUG"


def test_invalid_env_values_are_ignored(monkeypatch, restore_module_settings):
    monkeypatch.setenv("EVENTDET_EPOCHS", "many")
    monkeypatch.setenv("EVENTDET_WORKERS", "0")
    monkeypatch.delenv("EVENTDET_SEED", raising=False)
    before = config.TRAINING
    config.load_env_overrides()
    assert config.TRAINING == before
    assert config.WORKERS is None or config.WORKERS >= 1
