import logging

import pytest

from tamperlens.config import load_settings

VARIABLES = (
    "TAMPERLENS_LOG_LEVEL",
    "TAMPERLENS_PROFILE_PATH",
    "TAMPERLENS_WORKERS",
    "TAMPERLENS_DATASET_URL",
    "TAMPERLENS_HTTP_TIMEOUT",
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    for name in VARIABLES:
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)


def test_defaults(tmp_path):
    settings = load_settings(str(tmp_path / "missing.env"))
    assert settings.log_level == logging.INFO
    assert settings.profile_path == "profile.json"
    assert settings.workers == 1
    assert settings.dataset_url is None
    assert settings.http_timeout == 60.0


def test_env_file_is_read(tmp_path):
    env_file = tmp_path / ".env"
    env_file.write_text(
        "TAMPERLENS_WORKERS=4\n"
        "TAMPERLENS_LOG_LEVEL=debug\n"
        "TAMPERLENS_DATASET_URL=http://example.test/data.zip\n"
    )
    settings = load_settings(str(env_file))
    assert settings.workers == 4
    assert settings.log_level == logging.DEBUG
    assert settings.dataset_url == "http://example.test/data.zip"


@pytest.mark.parametrize(
    "name, value",
    [
        ("TAMPERLENS_WORKERS", "many"),
        ("TAMPERLENS_WORKERS", "0"),
        ("TAMPERLENS_LOG_LEVEL", "chatty"),
        ("TAMPERLENS_HTTP_TIMEOUT", "soon"),
    ],
)
def test_invalid_values_name_the_variable(monkeypatch, tmp_path, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValueError, match=name):
        load_settings(str(tmp_path / "missing.env"))
