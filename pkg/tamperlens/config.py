import logging
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv


@dataclass(frozen=True)
class Settings:
    """Настройки окружения для CLI"""

    log_level: int = logging.INFO
    profile_path: str = "profile.json"
    workers: int = 1
    dataset_url: Optional[str] = None
    http_timeout: float = 60.0


def _parse_int(name: str, raw: str, minimum: int) -> int:
    try:
        value = int(raw)
    except ValueError as e:
        raise ValueError(f"{name} must be an integer: {e}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def load_settings(env_file: Optional[str] = None) -> Settings:
    """
    Читает настройки из переменных окружения (и .env, если он есть).

    Args:
        env_file (str, optional): Путь к .env. По умолчанию ищется в текущей директории.

    Returns:
        Settings: Настройки с подставленными значениями по умолчанию.
    """
    load_dotenv(env_file)

    level_name = os.getenv("TAMPERLENS_LOG_LEVEL", "INFO").upper()
    log_level = logging.getLevelName(level_name)
    if not isinstance(log_level, int):
        raise ValueError(f"TAMPERLENS_LOG_LEVEL has unknown level: {level_name}")

    timeout_raw = os.getenv("TAMPERLENS_HTTP_TIMEOUT", "60")
    try:
        http_timeout = float(timeout_raw)
    except ValueError as e:
        raise ValueError(f"TAMPERLENS_HTTP_TIMEOUT must be a number: {e}")

    return Settings(
        log_level=log_level,
        profile_path=os.getenv("TAMPERLENS_PROFILE_PATH", "profile.json"),
        workers=_parse_int("TAMPERLENS_WORKERS", os.getenv("TAMPERLENS_WORKERS", "1"), 1),
        dataset_url=os.getenv("TAMPERLENS_DATASET_URL") or None,
        http_timeout=http_timeout,
    )
