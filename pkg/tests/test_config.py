import pytest
from pydantic import ValidationError

from slickqsvm.core.config import Settings
from slickqsvm.core.exceptions import (
    ChecksumException,
    CustomException,
    ModelFileException,
    ValidationException,
    VersionMismatchException,
)
from slickqsvm.models.schemas import (
    AnnealConfig,
    BinaryEncoding,
    EnsembleConfig,
    PreprocessConfig,
    SynthConfig,
    parse_config,
)


def test_settings_defaults():
    """Defaults apply when no environment overrides are set"""
    settings = Settings(_env_file=None)
    assert settings.SEED == 0
    assert settings.THREADS == 1
    assert settings.WORKING_SIZE == [256, 256]


def test_settings_environment_override(monkeypatch):
    """SLICKQSVM_SEED and SLICKQSVM_THREADS override the defaults"""
    monkeypatch.setenv("SLICKQSVM_SEED", "42")
    monkeypatch.setenv("SLICKQSVM_THREADS", "4")
    settings = Settings(_env_file=None)
    assert settings.SEED == 42
    assert settings.THREADS == 4


def test_settings_reject_zero_threads(monkeypatch):
    """Thread count must be positive"""
    monkeypatch.setenv("SLICKQSVM_THREADS", "0")
    with pytest.raises(ValidationError):
        Settings(_env_file=None)


def test_preprocess_config_invariants():
    """Even windows, inverted percentiles and non-positive gamma are rejected"""
    with pytest.raises(ValidationException):
        parse_config(PreprocessConfig, {"median_window": 4})
    with pytest.raises(ValidationException):
        parse_config(PreprocessConfig, {"clip_low_pct": 50, "clip_high_pct": 10})
    with pytest.raises(ValidationException):
        parse_config(PreprocessConfig, {"gamma": 0})


def test_unknown_config_keys_rejected():
    """Config blocks forbid unknown keys"""
    with pytest.raises(ValidationException, match="median_windw"):
        parse_config(PreprocessConfig, {"median_windw": 3})


def test_anneal_config_invariants():
    """top_samples <= num_reads and beta_min < beta_max"""
    with pytest.raises(ValidationException):
        parse_config(AnnealConfig, {"num_reads": 10, "top_samples": 20})
    with pytest.raises(ValidationException):
        parse_config(AnnealConfig, {"beta_min": 5.0, "beta_max": 1.0})


def test_binary_encoding_alpha_max():
    """alpha_max is sum of B^k for k < K"""
    assert BinaryEncoding().alpha_max == 3.0
    assert BinaryEncoding(bits_per_alpha=3, base=3).alpha_max == 13.0


def test_ensemble_and_synth_invariants():
    """n_learners >= 1, subset_size >= 2, slick darkness strictly inside (0, 1)"""
    with pytest.raises(ValidationException):
        parse_config(EnsembleConfig, {"n_learners": 0})
    with pytest.raises(ValidationException):
        parse_config(EnsembleConfig, {"subset_size": 1})
    with pytest.raises(ValidationException):
        parse_config(SynthConfig, {"slick_darkness": 1.0})
    with pytest.raises(ValidationException):
        parse_config(SynthConfig, {"n_scenes": 2, "test_scenes": 3})


def test_exception_exit_codes():
    """Each exception family carries its own exit code"""
    assert ValidationException().exit_code == 2
    assert ModelFileException().exit_code == 5
    assert ChecksumException().exit_code == 5
    assert VersionMismatchException(999, 1).exit_code == 5
    assert CustomException("boom", exit_code=9).exit_code == 9
    assert str(ValidationException("bad value")) == "bad value"
