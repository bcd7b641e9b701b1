import json

import pytest

from tamperlens.cli.cli import cli_main
from tamperlens.vision.image_core import read_image, write_image
from tamperlens.vision.tamper_synth import textured_scene


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    for name in ("TAMPERLENS_PROFILE_PATH", "TAMPERLENS_WORKERS", "TAMPERLENS_LOG_LEVEL", "TAMPERLENS_DATASET_URL",
        "TAMPERLENS_HTTP_TIMEOUT"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    assert cli_main(["synth", "corpus", "--out", str(root), "--per-class", "1"]) == 0
    return root


@pytest.fixture(scope="module")
def profile_path(corpus):
    path = corpus / "profile.json"
    assert cli_main(["calibrate", "--refs", str(corpus / "references"), "--out", str(path)]) == 0
    return path


def test_calibrate_prints_thresholds(corpus, tmp_path, capsys):
    out = tmp_path / "p.json"
    assert cli_main(["calibrate", "--refs", str(corpus / "references"), "--out", str(out), "--beta", "0.4"]) == 0
    printed = capsys.readouterr().out
    assert "match_count_min" in printed and "blur_sharpness_min" in printed
    assert json.loads(out.read_text())["calibration"]["beta"] == 0.4


def test_classify_json(corpus, profile_path, capsys):
    images = sorted(str(p) for p in (corpus / "dataset").glob("*/*.pgm"))
    assert cli_main(["classify", "--profile", str(profile_path), "--json", *images]) == 0
    records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert [r["path"] for r in records] == images
    assert set(records[0]) == {
        "path", "label", "best_ref", "good_matches", "sharpness", "std_dev", "rotation_deg", "decision_path",
    }
    covered = next(r for r in records if "/obstructed/" in r["path"])
    assert covered["label"] == "obstructed"
    assert covered["rotation_deg"] is None


def test_classify_text(corpus, profile_path, capsys):
    image = str(corpus / "references" / "ref_3_+0.pgm")
    assert cli_main(["classify", "--profile", str(profile_path), image]) == 0
    assert ": normal" in capsys.readouterr().out


def test_evaluate(corpus, profile_path, capsys):
    assert cli_main(["evaluate", "--profile", str(profile_path), "--dataset", str(corpus / "dataset")]) == 0
    printed = capsys.readouterr().out
    assert "Accuracy" in printed and "Average processing time" in printed


def test_synth_transforms(tmp_path):
    source = tmp_path / "scene.pgm"
    assert cli_main(["synth", "scene", "--out", str(source)]) == 0
    assert read_image(source) == textured_scene()

    covered = tmp_path / "covered.pgm"
    assert cli_main(["synth", "obstruct", "--level", "9", "--coverage", "1.0", "--in", str(source), "--out", str(covered)]) == 0
    assert set(read_image(covered).pixels.ravel().tolist()) == {9}

    for args in (["blur", "--sigma", "2"], ["rotate", "--angle", "90"], ["jitter", "--delta", "-10"]):
        out = tmp_path / f"{args[0]}.pgm"
        assert cli_main(["synth", *args, "--in", str(source), "--out", str(out)]) == 0
        assert out.exists()


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["explode"],
        ["classify"],
        ["synth", "blur", "--in", "a.pgm", "--out", "b.pgm"],
        ["calibrate", "--refs", "refs", "--beta", "-1"],
        ["fetch", "--out", "data"],
    ],
)
def test_usage_errors(argv, tmp_path):
    (tmp_path / "refs").mkdir()
    assert cli_main(argv) == 2


def test_missing_profile_is_io_error(tmp_path, capsys):
    write_image(tmp_path / "x.pgm", textured_scene(64, 64))
    assert cli_main(["classify", "--profile", str(tmp_path / "nope.json"), str(tmp_path / "x.pgm")]) == 3
    assert "nope.json" in capsys.readouterr().err


def test_undecodable_image_is_io_error(profile_path, tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n9 9\n255\n")
    assert cli_main(["classify", "--profile", str(profile_path), str(bad)]) == 3


def test_unknown_dataset_label_is_io_error(profile_path, tmp_path):
    (tmp_path / "data" / "misc").mkdir(parents=True)
    assert cli_main(["evaluate", "--profile", str(profile_path), "--dataset", str(tmp_path / "data")]) == 3
