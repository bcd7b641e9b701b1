import numpy as np
import pytest
from PIL import Image

from tamperlens.errors import (
    BadDimensionsError,
    BadMagicError,
    ImageDecodeError,
    MalformedHeaderError,
    MaxvalError,
    TruncatedRasterError,
)
from tamperlens.vision.image_core import (
    GrayImage,
    RgbImage,
    decode_pgm,
    decode_ppm,
    encode_pgm,
    encode_ppm,
    read_image,
    rgb_to_gray,
    write_image,
)


class TestNetpbm:
    def test_decode_pgm_with_comments(self):
        data = b"P5\n# camera 7\n3 2\n# maxval next\n255\n" + bytes(range(6))
        img = decode_pgm(data)
        assert (img.width, img.height) == (3, 2)
        assert img.pixels.tolist() == [[0, 1, 2], [3, 4, 5]]

    def test_encode_pgm_is_canonical(self):
        img = GrayImage.from_bytes(2, 1, bytes([7, 9]))
        assert encode_pgm(img) == b"P5\n2 1\n255\n\x07\x09"

    def test_pgm_round_trip(self, scene):
        assert decode_pgm(encode_pgm(scene)) == scene

    def test_ppm_round_trip(self, rng):
        rgb = RgbImage(rng.integers(0, 256, size=(4, 5, 3), dtype=np.uint8))
        assert decode_ppm(encode_ppm(rgb)) == rgb

    def test_raster_starting_with_whitespace_byte(self):
        # после maxval ровно один пробельный символ, следующий байт уже растр
        img = decode_pgm(b"P5 1 1 255\n\n")
        assert img.data == b"\n"

    @pytest.mark.parametrize(
        "data, error",
        [
            (b"P6\n1 1\n255\n\x00\x00\x00", BadMagicError),
            (b"P5\n1 1\n65535\n\x00\x00", MaxvalError),
            (b"P5\n2 2\n255\n\x00\x00\x00", TruncatedRasterError),
            (b"P5\n0 2\n255\n", BadDimensionsError),
            (b"P5\n2 x\n255\n\x00\x00", MalformedHeaderError),
            (b"P5\n2 2\n", MalformedHeaderError),
        ],
    )
    def test_decode_errors(self, data, error):
        with pytest.raises(error):
            decode_pgm(data)

    def test_format_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            decode_pgm(b"GIF89a")


class TestGrayImage:
    def test_pixels_are_copied_and_frozen(self):
        source = np.zeros((2, 2), dtype=np.uint8)
        img = GrayImage(source)
        source[0, 0] = 200
        assert img.pixels[0, 0] == 0
        assert not img.pixels.flags.writeable

    def test_from_bytes_checks_length(self):
        with pytest.raises(ValueError):
            GrayImage.from_bytes(2, 2, b"\x00")

    def test_rejects_out_of_range_values(self):
        with pytest.raises(ValueError):
            GrayImage(np.array([[0, 300]]))


class TestGrayConversion:
    @pytest.mark.parametrize(
        "rgb, gray",
        [
            ((255, 0, 0), 76),
            ((0, 255, 0), 150),
            ((0, 0, 255), 29),
            ((255, 255, 255), 255),
            ((0, 0, 0), 0),
        ],
    )
    def test_bt601_weights(self, rgb, gray):
        img = RgbImage(np.array([[rgb]], dtype=np.uint8))
        assert rgb_to_gray(img).pixels[0, 0] == gray


class TestReadImage:
    def test_reads_pgm(self, tmp_path, scene):
        path = tmp_path / "scene.pgm"
        write_image(path, scene)
        assert read_image(path) == scene

    def test_reads_ppm_as_gray(self, tmp_path):
        path = tmp_path / "red.ppm"
        path.write_bytes(encode_ppm(RgbImage(np.array([[[255, 0, 0]]], dtype=np.uint8))))
        assert read_image(path).pixels[0, 0] == 76

    def test_reads_png_through_pillow(self, tmp_path):
        path = tmp_path / "red.png"
        Image.fromarray(np.full((3, 4, 3), (255, 0, 0), dtype=np.uint8)).save(path)
        img = read_image(path)
        assert (img.width, img.height) == (4, 3)
        assert np.all(img.pixels == 76)

    def test_undecodable_file_names_the_path(self, tmp_path):
        path = tmp_path / "broken.jpg"
        path.write_bytes(b"not an image at all")
        with pytest.raises(ImageDecodeError, match="broken.jpg"):
            read_image(path)

    def test_truncated_netpbm_names_the_path(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n\x00")
        with pytest.raises(ImageDecodeError, match="short.pgm"):
            read_image(path)
