"""``medaug`` command line.

Exit status: 0 on success, 1 when some records failed, 2 on invalid
arguments or inputs. Logs go to stderr; results go to stdout or ``--json``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import geometric as geo
from . import photometric as photo
from .errors import EmptyEvaluationSet, MedaugError
from .io import list_images, read_gray, read_image, read_mask, write_image, write_mask
from .metrics import binarize_prediction, mean_dice
from .mixup import MODES, generate_mixup_set
from .pipeline import (DEFAULT_ROSTER, ExecutionReport, SegItem, apply_op, dataset_stats,
                       execute_plan, expand_segmentation_set, load_pairs, plan_balancing,
                       scan_dataset, write_mixup_results)
from .rng import DEFAULT_ALPHA, DEFAULT_SEED, derive_stream

log = logging.getLogger("medaug")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2

APPLY_OPS = DEFAULT_ROSTER
_GEOMETRIC_OPS = ("rotate90", "fliph", "scale", "translate", "shear")


class _UsageError(Exception):
    pass


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 bits unsigned, got {value}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=_u64, default=default(DEFAULT_SEED),
                        help=f"master seed (default {DEFAULT_SEED})")
    parser.add_argument("--workers", type=_positive_int, default=default(os.cpu_count() or 1),
                        help="worker threads (default: CPU count)")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", "-q", dest="verbosity", action="store_const", const="quiet",
                           default=default("normal"))
    verbosity.add_argument("--verbose", "-v", dest="verbosity", action="store_const", const="verbose",
                           default=default("normal"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="medaug",
                                     description="Reproducible medical image augmentation.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("apply", parents=[common], help="apply one transform to one file")
    p.add_argument("--op", required=True, choices=APPLY_OPS)
    p.add_argument("--in", dest="input", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--mask", action="store_true",
                   help="treat the input as a binary mask (nearest-neighbour resampling)")
    p.add_argument("--crop", action="store_true", help="with --op scale, centre-crop back to the source size")
    p.add_argument("--factor", type=float, help="scale factor (1.2) or contrast factor (1.5)")
    p.add_argument("--dx", type=int, default=20)
    p.add_argument("--dy", type=int, default=30)
    p.add_argument("--k", type=float, default=0.2, help="horizontal shear coefficient")
    p.add_argument("--fill", type=int, default=0)
    p.add_argument("--delta", type=int, default=40)
    p.add_argument("--sigma", type=float, default=10.0)
    p.add_argument("--mean", type=float, default=0.0)

    p = sub.add_parser("balance", parents=[common], help="augment minority classes up to a target")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--target", type=_positive_int, default=240)
    p.add_argument("--ops", default=",".join(DEFAULT_ROSTER),
                   help="comma-separated op roster, in round-robin order")
    p.add_argument("--force", action="store_true", help="allow a target below the largest class")
    p.add_argument("--scale-factor", type=float, default=1.2)
    p.add_argument("--dx", type=int, default=20)
    p.add_argument("--dy", type=int, default=30)
    p.add_argument("--k", type=float, default=0.2)
    p.add_argument("--fill", type=int, default=0)
    p.add_argument("--delta", type=int, default=40)
    p.add_argument("--contrast", type=float, default=1.5)
    p.add_argument("--sigma", type=float, default=10.0)
    p.add_argument("--mean", type=float, default=0.0)
    p.add_argument("--manifest", type=Path, help="also write the source manifest as JSON")

    p = sub.add_parser("expand-seg", parents=[common], help="add mixup pairs to a segmentation train split")
    p.add_argument("--root", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--count", type=_positive_int, default=100)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--mode", choices=MODES, default="global")

    p = sub.add_parser("mixup", parents=[common], help="mix image/mask pairs from two directories")
    p.add_argument("--images", required=True, type=Path)
    p.add_argument("--masks", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--count", type=_positive_int, default=100)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--mode", choices=MODES, default="global")

    p = sub.add_parser("dice", parents=[common], help="Dice of predicted masks against ground truth")
    p.add_argument("--pred", required=True, type=Path)
    p.add_argument("--truth", required=True, type=Path)
    p.add_argument("--threshold", type=int, default=128)
    p.add_argument("--json", type=Path)

    p = sub.add_parser("stats", parents=[common], help="count items and image sizes")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--task", required=True, choices=("classification", "segmentation"))
    p.add_argument("--json", type=Path)
    return parser


def _configure_logging(verbosity: str) -> None:
    level = {"quiet": logging.WARNING, "normal": logging.INFO, "verbose": logging.DEBUG}[verbosity]
    log.setLevel(level)
    if not any(getattr(h, "_medaug", False) for h in log.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
        handler._medaug = True
        log.addHandler(handler)
    for handler in log.handlers:
        if getattr(handler, "_medaug", False):
            handler.stream = sys.stderr
    log.propagate = False


def _finish(report: ExecutionReport, what: str) -> int:
    log.info("%s: %d written, %d failed", what, report.written, len(report.failures))
    for failure in report.failures:
        log.error("  %s: %s", failure.output, failure.error)
    return report.exit_code


def cmd_apply(args) -> int:
    op = args.op
    stream = derive_stream(args.seed, 0)
    if op == "noise":
        log.info("seed=%d", args.seed)
    if args.mask:
        mask = read_mask(args.input)
        if op not in _GEOMETRIC_OPS:
            write_mask(mask, args.out)  # labels are geometry: photometric ops leave masks alone
            return EXIT_OK
        factor = 1.2 if args.factor is None else args.factor
        out = {
            "rotate90": lambda: geo.rotate90_cw(mask),
            "fliph": lambda: geo.flip_horizontal(mask),
            "scale": lambda: geo.scale_and_crop(mask, factor) if args.crop else geo.scale_mask(mask, factor),
            "translate": lambda: geo.translate(mask, args.dx, args.dy),
            "shear": lambda: geo.shear_mask(mask, args.k),
        }[op]()
        write_mask(out, args.out)
        return EXIT_OK

    image = read_image(args.input)
    if op == "scale":
        factor = 1.2 if args.factor is None else args.factor
        out = geo.scale_and_crop(image, factor) if args.crop else geo.scale(image, factor)
    elif op == "contrast":
        out = photo.adjust_contrast(image, 1.5 if args.factor is None else args.factor)
    else:
        params = {"dx": args.dx, "dy": args.dy, "fill": args.fill, "k": args.k,
                  "delta": args.delta, "mean": args.mean, "sigma": args.sigma}
        out = apply_op(image, op, params, stream)
    write_image(out, args.out)
    return EXIT_OK


def cmd_balance(args) -> int:
    roster = tuple(o.strip() for o in args.ops.split(",") if o.strip())
    manifest = scan_dataset(args.input, "classification")
    if args.manifest:
        manifest.to_json(args.manifest)
    log.info("seed=%d", args.seed)
    log.info("source classes: %s", manifest.class_counts())
    plan = plan_balancing(
        manifest, args.target, args.out, roster, args.seed,
        geo.GeometricParams(args.scale_factor, args.dx, args.dy, args.k, args.fill),
        photo.PhotometricParams(args.delta, args.contrast, args.sigma, args.mean),
        force=args.force)
    log.info("planned %d augmentations (%s)", len(plan), plan.op_counts())
    return _finish(execute_plan(plan, args.workers), "balance")


def cmd_expand_seg(args) -> int:
    manifest = scan_dataset(args.root, "segmentation")
    log.info("seed=%d", args.seed)
    log.info("source splits: %s", manifest.split_counts())
    report = expand_segmentation_set(manifest, args.count, args.out, args.alpha, args.mode,
                                     args.seed, args.workers)
    return _finish(report, "expand-seg")


def _paired_dir(images_dir: Path, masks_dir: Path) -> list:
    images = {p.stem: p for p in list_images(images_dir)}
    masks = {p.stem: p for p in list_images(masks_dir)}
    missing = sorted(set(images) ^ set(masks))
    if missing:
        raise _UsageError(f"unpaired file(s) between {images_dir} and {masks_dir}: {', '.join(missing[:5])}")
    return [SegItem(str(images[s]), str(masks[s]), "train") for s in images]


def cmd_mixup(args) -> int:
    for d in (args.images, args.masks):
        if not d.is_dir():
            raise _UsageError(f"no such directory: {d}")
    items = _paired_dir(args.images, args.masks)
    log.info("seed=%d", args.seed)
    results = generate_mixup_set(load_pairs(items), args.count, args.alpha, args.mode,
                                 args.seed, args.workers)
    report = write_mixup_results(results, args.out / "images", args.out / "masks", args.workers)
    return _finish(report, "mixup")


def cmd_dice(args) -> int:
    for d in (args.pred, args.truth):
        if not d.is_dir():
            raise _UsageError(f"no such directory: {d}")
    preds = {p.name: p for p in list_images(args.pred)}
    truths = {p.name: p for p in list_images(args.truth)}
    names = sorted(set(preds) & set(truths))
    unmatched = sorted(set(preds) ^ set(truths))
    for name in unmatched:
        log.error("no counterpart for %s", name)
    if not names:
        raise EmptyEvaluationSet(f"no matching file names in {args.pred} and {args.truth}")
    pairs = [(binarize_prediction(read_gray(preds[n]), args.threshold), read_mask(truths[n]))
             for n in names]
    report = mean_dice(pairs, names)
    for name, value in report.per_item:
        print(f"{name}\tdice={value:.6f}")
    print(f"mean_dice={report.mean_dice:.6f}")
    if args.json:
        data = report.to_dict()
        data["unmatched"] = unmatched
        args.json.write_text(json.dumps(data, indent=2) + "\n")
    return EXIT_PARTIAL if unmatched else EXIT_OK


def cmd_stats(args) -> int:
    manifest = scan_dataset(args.input, args.task)
    stats = dataset_stats(manifest)
    label = "class" if args.task == "classification" else "split"
    print(f"task\t{stats['task']}")
    print(f"total\t{stats['total']}")
    for key, n in stats["counts"].items():
        print(f"{label}:{key}\t{n}")
    for dims, n in stats["dimensions"].items():
        print(f"dims:{dims}\t{n}")
    if args.json:
        args.json.write_text(json.dumps(stats, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {
    "apply": cmd_apply,
    "balance": cmd_balance,
    "expand-seg": cmd_expand_seg,
    "mixup": cmd_mixup,
    "dice": cmd_dice,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    _configure_logging(args.verbosity)
    try:
        return COMMANDS[args.command](args)
    except (_UsageError, MedaugError, ValueError, FileNotFoundError) as exc:
        print(f"medaug {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"medaug {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


def run() -> None:
    sys.exit(main())
