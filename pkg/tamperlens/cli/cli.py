"""Точка входа командной строки tamperlens."""

import argparse
import asyncio
import logging
import sys
from typing import Optional, Sequence

from tamperlens.cli.dataset_client import DatasetClient
from tamperlens.cli.detector_manager import CalibrationManager, ClassificationManager
from tamperlens.cli.evaluation_manager import EvaluationManager
from tamperlens.config import Settings, load_settings
from tamperlens.errors import InvalidParameterError, TamperLensError
from tamperlens.pipeline.detection_pipeline import CalibrationParams, DetectorConfig
from tamperlens.vision import tamper_synth
from tamperlens.vision.image_core import read_image, write_image

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """argparse без sys.exit: ошибки разбора превращаются в код 2"""

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="tamperlens", description="Rule-based camera tampering detection")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    calibrate = commands.add_parser("calibrate", help="derive thresholds from normal reference frames")
    calibrate.add_argument("--refs", required=True, help="directory with reference images")
    calibrate.add_argument("--out", default=settings.profile_path, help="profile JSON to write")
    calibrate.add_argument("--beta", type=float, default=CalibrationParams.beta)
    calibrate.add_argument("--gamma", type=float, default=CalibrationParams.gamma)
    calibrate.add_argument("--rotation-limit", type=float, default=DetectorConfig.rotation_limit_deg)

    classify = commands.add_parser("classify", help="label frames as normal/blurred/rotated/obstructed")
    classify.add_argument("--profile", default=settings.profile_path)
    classify.add_argument("--json", action="store_true", help="one JSON record per image")
    classify.add_argument("images", nargs="+")

    evaluate = commands.add_parser("evaluate", help="evaluate a profile on a labeled dataset")
    evaluate.add_argument("--profile", default=settings.profile_path)
    evaluate.add_argument("--dataset", required=True)
    evaluate.add_argument("--json", action="store_true")
    evaluate.add_argument("--workers", type=int, default=settings.workers)

    synth = commands.add_parser("synth", help="generate tampered frames")
    kinds = synth.add_subparsers(dest="kind", required=True, parser_class=_ArgumentParser)
    blur = kinds.add_parser("blur")
    blur.add_argument("--sigma", type=float, required=True)
    rotate = kinds.add_parser("rotate")
    rotate.add_argument("--angle", type=float, required=True)
    obstruct = kinds.add_parser("obstruct")
    obstruct.add_argument("--level", type=int, required=True)
    obstruct.add_argument("--coverage", type=float, required=True)
    jitter = kinds.add_parser("jitter")
    jitter.add_argument("--delta", type=int, required=True)
    for sub in (blur, rotate, obstruct, jitter):
        sub.add_argument("--in", dest="input", required=True)
        sub.add_argument("--out", required=True)

    scene = kinds.add_parser("scene", help="standard textured scene")
    scene.add_argument("--out", required=True)
    scene.add_argument("--seed", type=int, default=tamper_synth.SCENE_SEED)
    corpus = kinds.add_parser("corpus", help="references/ plus a balanced labeled dataset/")
    corpus.add_argument("--out", required=True)
    corpus.add_argument("--per-class", type=int, default=40)
    corpus.add_argument("--seed", type=int, default=tamper_synth.SCENE_SEED)

    fetch = commands.add_parser("fetch", help="download and extract a dataset archive")
    fetch.add_argument("--url", default=settings.dataset_url)
    fetch.add_argument("--out", required=True)
    return parser


def _run_calibrate(args) -> int:
    config = DetectorConfig(
        calibration=CalibrationParams(beta=args.beta, gamma=args.gamma),
        rotation_limit_deg=args.rotation_limit,
    )
    success, message = CalibrationManager(config).run(args.refs, args.out)
    if not success:
        print(f"calibrate: {message}", file=sys.stderr)
        return EXIT_IO
    print(message)
    return EXIT_OK


def _run_classify(args) -> int:
    manager = ClassificationManager()
    success, error = manager.load(args.profile)
    if not success:
        print(f"classify: {error}", file=sys.stderr)
        return EXIT_IO

    all_read, results = manager.classify_paths(args.images)
    for path, result in results:
        print(manager.format_result(path, result, args.json))
    if not all_read:
        print("classify: some images could not be read", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _run_evaluate(args) -> int:
    if args.workers < 1:
        raise InvalidParameterError(f"--workers must be >= 1, got {args.workers}")
    success, output = EvaluationManager(workers=args.workers).run(args.profile, args.dataset, args.json)
    if not success:
        print(f"evaluate: {output}", file=sys.stderr)
        return EXIT_IO
    print(output)
    return EXIT_OK


def _run_synth(args) -> int:
    if args.kind == "scene":
        write_image(args.out, tamper_synth.textured_scene(seed=args.seed))
        print(f"Scene written to {args.out}")
        return EXIT_OK
    if args.kind == "corpus":
        n_refs, n_samples = tamper_synth.build_corpus(args.out, per_class=args.per_class, seed=args.seed)
        print(f"Corpus written to {args.out}: {n_refs} references, {n_samples} test frames")
        return EXIT_OK

    img = read_image(args.input)
    if args.kind == "blur":
        result = tamper_synth.gaussian_blur(img, args.sigma)
    elif args.kind == "rotate":
        result = tamper_synth.rotate_image(img, args.angle)
    elif args.kind == "obstruct":
        result = tamper_synth.obstruct(img, args.level, args.coverage)
    else:
        result = tamper_synth.brightness_jitter(img, args.delta)
    write_image(args.out, result)
    return EXIT_OK


def _run_fetch(args, settings: Settings) -> int:
    if not args.url:
        raise _UsageError("fetch: --url is required when TAMPERLENS_DATASET_URL is not set")
    client = DatasetClient(timeout=settings.http_timeout)
    count = asyncio.run(client.fetch_dataset(args.url, args.out))
    print(f"Extracted {count} files into {args.out}")
    return EXIT_OK


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Разбирает аргументы и выполняет подкоманду.

    Returns:
        int: 0 при успехе, 2 при ошибке использования, 3 при ошибке ввода-вывода или схемы.
    """
    try:
        settings = load_settings()
    except ValueError as e:
        print(f"tamperlens: {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )

    try:
        args = build_parser(settings).parse_args(argv)
    except _UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return EXIT_OK if not e.code else EXIT_USAGE

    try:
        if args.command == "calibrate":
            return _run_calibrate(args)
        if args.command == "classify":
            return _run_classify(args)
        if args.command == "evaluate":
            return _run_evaluate(args)
        if args.command == "synth":
            return _run_synth(args)
        return _run_fetch(args, settings)
    except (_UsageError, InvalidParameterError) as e:
        print(f"tamperlens: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TamperLensError, OSError) as e:
        logging.error(f"{args.command} failed: {e}")
        print(f"tamperlens: {e}", file=sys.stderr)
        return EXIT_IO


def main():
    sys.exit(cli_main())
