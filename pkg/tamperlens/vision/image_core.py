"""Представление изображений, кодек Netpbm (P5/P6) и перевод RGB в оттенки серого."""

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from tamperlens.errors import (
    BadDimensionsError,
    BadMagicError,
    ImageDecodeError,
    MalformedHeaderError,
    MaxvalError,
    TruncatedRasterError,
)

_WHITESPACE = b" \t\n\r\v\f"
# ITU-R BT.601
_GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])


def _frozen(pixels: np.ndarray) -> np.ndarray:
    pixels = np.array(pixels, dtype=np.uint8, copy=True, order="C")
    pixels.setflags(write=False)
    return pixels


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-битное одноканальное изображение, массив (height, width)"""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2:
            raise BadDimensionsError(f"gray image must be 2-D, got shape {self.pixels.shape}")
        if self.pixels.shape[0] <= 0 or self.pixels.shape[1] <= 0:
            raise BadDimensionsError(f"non-positive dimensions {self.pixels.shape[1]}x{self.pixels.shape[0]}")
        if self.pixels.dtype != np.uint8 or self.pixels.flags.writeable:
            object.__setattr__(self, "pixels", _frozen(self._checked(self.pixels)))

    @staticmethod
    def _checked(pixels: np.ndarray) -> np.ndarray:
        if pixels.dtype != np.uint8 and (pixels.min() < 0 or pixels.max() > 255):
            raise ValueError("intensities must lie in [0, 255]")
        return pixels

    @classmethod
    def from_bytes(cls, width: int, height: int, data: bytes) -> "GrayImage":
        if width <= 0 or height <= 0:
            raise BadDimensionsError(f"non-positive dimensions {width}x{height}")
        if len(data) != width * height:
            raise ValueError(f"data length {len(data)} != {width}*{height}")
        return cls(np.frombuffer(data, dtype=np.uint8).reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.width, self.height, self.data))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-битное RGB изображение, массив (height, width, 3)"""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise BadDimensionsError(f"rgb image must have shape (h, w, 3), got {self.pixels.shape}")
        if self.pixels.shape[0] <= 0 or self.pixels.shape[1] <= 0:
            raise BadDimensionsError(f"non-positive dimensions {self.pixels.shape[1]}x{self.pixels.shape[0]}")
        if self.pixels.dtype != np.uint8 or self.pixels.flags.writeable:
            object.__setattr__(self, "pixels", _frozen(self.pixels))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.width, self.height, self.data))

    def __repr__(self):
        return f"RgbImage({self.width}x{self.height})"


def _read_header(data: bytes, magic: bytes) -> Tuple[int, int, int]:
    """
    Разбирает заголовок Netpbm.

    Returns:
        tuple: (width, height, offset растра).
    """
    if data[:2] != magic:
        raise BadMagicError(f"bad magic {data[:2]!r}, expected {magic!r}")

    pos = 2
    tokens = []
    while len(tokens) < 3:
        if pos >= len(data):
            raise MalformedHeaderError("header ends before width/height/maxval")
        ch = data[pos:pos + 1]
        if ch == b"#":
            # комментарий до конца строки
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        if ch in _WHITESPACE:
            pos += 1
            continue
        start = pos
        while pos < len(data) and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise MalformedHeaderError(f"expected a decimal number in header, got {token!r}")
        tokens.append(int(token))

    width, height, maxval = tokens
    if width <= 0 or height <= 0:
        raise BadDimensionsError(f"non-positive dimensions {width}x{height}")
    if maxval > 255 or maxval <= 0:
        raise MaxvalError(f"maxval {maxval} not supported, must be in 1..255")

    # ровно один пробельный символ перед растром
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise MalformedHeaderError("missing whitespace after maxval")
    return width, height, pos + 1


def _read_raster(data: bytes, offset: int, count: int) -> np.ndarray:
    available = len(data) - offset
    if available < count:
        raise TruncatedRasterError(f"raster truncated: {available} of {count} bytes")
    return np.frombuffer(data, dtype=np.uint8, count=count, offset=offset)


def decode_pgm(data: bytes) -> GrayImage:
    """Декодирует бинарный PGM (P5)."""
    width, height, offset = _read_header(data, b"P5")
    raster = _read_raster(data, offset, width * height)
    return GrayImage(raster.reshape(height, width))


def decode_ppm(data: bytes) -> RgbImage:
    """Декодирует бинарный PPM (P6)."""
    width, height, offset = _read_header(data, b"P6")
    raster = _read_raster(data, offset, 3 * width * height)
    return RgbImage(raster.reshape(height, width, 3))


def encode_pgm(img: GrayImage) -> bytes:
    """Каноническая запись P5: "P5\\n{w} {h}\\n255\\n" + растр."""
    return f"P5\n{img.width} {img.height}\n255\n".encode("ascii") + img.data


def encode_ppm(img: RgbImage) -> bytes:
    return f"P6\n{img.width} {img.height}\n255\n".encode("ascii") + img.data


def round_half_up(values: np.ndarray) -> np.ndarray:
    """Округление к ближайшему, половины вверх, с обрезкой в [0, 255]."""
    return np.clip(np.floor(np.asarray(values, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


def rgb_to_gray(img: RgbImage) -> GrayImage:
    """gray = round(0.299·R + 0.587·G + 0.114·B)"""
    return GrayImage(round_half_up(img.pixels.astype(np.float64) @ _GRAY_WEIGHTS))


def read_image(path: Union[str, Path]) -> GrayImage:
    """
    Читает изображение с диска в оттенках серого.

    P5/P6 декодируются собственным кодеком, остальные форматы (PNG, JPEG) через Pillow
    с тем же переводом BT.601.

    Args:
        path (str | Path): Путь к файлу.

    Returns:
        GrayImage: Изображение.
    """
    path = Path(path)
    data = path.read_bytes()
    try:
        if data[:2] == b"P5":
            return decode_pgm(data)
        if data[:2] == b"P6":
            return rgb_to_gray(decode_ppm(data))
    except ValueError as e:
        raise ImageDecodeError(str(path), str(e))

    try:
        with Image.open(path) as pil_image:
            rgb = np.asarray(pil_image.convert("RGB"))
    except (UnidentifiedImageError, OSError) as e:
        raise ImageDecodeError(str(path), str(e))
    return rgb_to_gray(RgbImage(rgb))


def write_image(path: Union[str, Path], img: GrayImage) -> None:
    Path(path).write_bytes(encode_pgm(img))
