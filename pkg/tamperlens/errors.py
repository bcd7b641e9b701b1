"""Иерархия исключений tamperlens."""

from typing import Optional


class TamperLensError(Exception):
    """Базовое исключение пакета"""


class InvalidParameterError(TamperLensError, ValueError):
    """Параметр вне допустимого диапазона"""


# Изображения

class ImageFormatError(TamperLensError, ValueError):
    """Ошибка разбора Netpbm"""


class BadMagicError(ImageFormatError):
    pass


class MalformedHeaderError(ImageFormatError):
    pass


class MaxvalError(ImageFormatError):
    pass


class TruncatedRasterError(ImageFormatError):
    pass


class BadDimensionsError(ImageFormatError):
    pass


class ImageTooSmallError(TamperLensError, ValueError):
    pass


class PatchOutOfBoundsError(TamperLensError, ValueError):
    """Окно дескриптора выходит за границы изображения"""


# Гомография

class HomographyError(TamperLensError):
    pass


class TooFewPairsError(HomographyError, ValueError):
    pass


class DegenerateConfigurationError(HomographyError, ValueError):
    pass


class NoConsensusError(HomographyError):
    pass


class UndefinedAngleError(HomographyError, ValueError):
    pass


# Калибровка

class CalibrationError(TamperLensError):
    pass


class TooFewReferencesError(CalibrationError):
    pass


class TooFewFeaturesError(CalibrationError):
    def __init__(self, name: str, count: int, required: int):
        self.name = name
        self.count = count
        self.required = required
        super().__init__(f"reference {name!r} yields {count} features, at least {required} required")


class InconsistentReferencesError(CalibrationError):
    def __init__(self, first: str, second: str):
        self.first = first
        self.second = second
        super().__init__(f"references {first!r} and {second!r} share no good matches; calibration refused")


# Профиль калибровки

class ProfileError(TamperLensError):
    """Некорректный профиль (ошибка конфигурации)"""


class ProfileVersionError(ProfileError):
    pass


class ProfileFormatError(ProfileError):
    pass


class ProfileSchemaError(ProfileError):
    def __init__(self, field: str, reason: Optional[str] = None):
        self.field = field
        message = f"missing field: {field}" if reason is None else f"invalid field {field}: {reason}"
        super().__init__(message)


# Датасет

class DatasetError(TamperLensError):
    pass


class DatasetSchemaError(DatasetError):
    pass


class ImageDecodeError(DatasetError):
    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"cannot decode {path}: {reason}")


class EmptyDatasetError(DatasetError):
    pass


class DownloadError(DatasetError):
    pass
