import pytest

from tamperlens.cli.dataset import load_dataset
from tamperlens.errors import DatasetSchemaError, ImageDecodeError
from tamperlens.vision.image_core import write_image

from conftest import uniform


def make_layout(root, files):
    for relative in files:
        path = root / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        write_image(path, uniform(4, 4, 10))


def test_labels_from_folders(tmp_path):
    make_layout(tmp_path, ["normal/b.pgm", "normal/a.pgm", "blurred/c.pgm"])
    dataset = load_dataset(tmp_path)
    assert [(p.name, label) for p, label in dataset] == [("c.pgm", "blurred"), ("a.pgm", "normal"), ("b.pgm", "normal")]
    assert dataset.counts() == {"normal": 2, "blurred": 1, "rotated": 0, "obstructed": 0}


def test_unknown_folder(tmp_path):
    make_layout(tmp_path, ["normal/a.pgm", "misc/x.pgm"])
    with pytest.raises(DatasetSchemaError, match="unknown label: misc"):
        load_dataset(tmp_path)


def test_empty_root(tmp_path):
    assert len(load_dataset(tmp_path)) == 0


def test_hidden_entries_are_skipped(tmp_path):
    make_layout(tmp_path, ["rotated/a.pgm"])
    (tmp_path / ".cache").mkdir()
    (tmp_path / "rotated" / ".DS_Store").write_bytes(b"\x00")
    assert len(load_dataset(tmp_path)) == 1


def test_undecodable_file_is_named(tmp_path):
    make_layout(tmp_path, ["obstructed/a.pgm"])
    (tmp_path / "obstructed" / "b.pgm").write_bytes(b"P5\n4 4\n255\n")
    with pytest.raises(ImageDecodeError, match="b.pgm"):
        load_dataset(tmp_path)
