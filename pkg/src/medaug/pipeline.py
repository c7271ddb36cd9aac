"""Dataset manifests, class-balancing plans and their execution.

Layouts on disk::

    classification:  ROOT/<class>/<image>
    segmentation:    ROOT/{train,test}/{images,masks}/<name>

Outputs are always written to a separate tree; sources are never touched.
Augmented files are named ``{source_stem}__{op}{occurrence}.png`` and
mixup outputs ``mix_{k:04}_{i}_{j}.png``.
"""

from __future__ import annotations

import json
import logging
import os
import re
import shutil
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from PIL import Image

from . import geometric as geo
from . import photometric as photo
from .errors import (DatasetTooSmall, EmptyClass, EmptyRoster, InvalidTarget, MissingDirectory,
                     UnpairedMask)
from .io import list_images, read_image, read_mask, write_image, write_mask
from .mixup import generate_mixup_set
from .raster import ImageBuffer, SamplePair
from .rng import DEFAULT_ALPHA, derive_stream

log = logging.getLogger(__name__)

TASKS = ("classification", "segmentation")
SPLITS = ("train", "test")

DEFAULT_ROSTER = ("rotate90", "fliph", "scale", "translate", "shear",
                  "brightness", "contrast", "noise", "histeq")

_AUG_NAME = re.compile(r"^(?P<stem>.+)__(?P<op>" + "|".join(DEFAULT_ROSTER) + r")(?P<occ>\d+)$")


def _path_key(p) -> bytes:
    return os.fsencode(str(p))


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassItem:
    path: str
    label: str


@dataclass(frozen=True)
class SegItem:
    image: str
    mask: str
    split: str


@dataclass
class DatasetManifest:
    task: str
    items: list
    root: str | None = None

    def class_counts(self) -> dict:
        return dict(sorted(Counter(item.label for item in self.items).items()))

    def split_counts(self) -> dict:
        counts = Counter(item.split for item in self.items)
        return {s: counts.get(s, 0) for s in SPLITS}

    def labels(self) -> list:
        return sorted({item.label for item in self.items})

    def to_dict(self) -> dict:
        return {"task": self.task, "items": [asdict(item) for item in self.items]}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_dict(cls, data: dict) -> DatasetManifest:
        task = data["task"]
        if task not in TASKS:
            raise ValueError(f"unknown task {task!r}")
        item_cls = ClassItem if task == "classification" else SegItem
        return cls(task, [item_cls(**item) for item in data["items"]])

    @classmethod
    def from_json(cls, path) -> DatasetManifest:
        return cls.from_dict(json.loads(Path(path).read_text()))


def scan_dataset(root, task: str) -> DatasetManifest:
    """Walk a dataset tree into a manifest sorted byte-wise by path."""
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}, got {task!r}")
    root = Path(root)
    if not root.is_dir():
        raise MissingDirectory(f"dataset root {root} does not exist")
    if task == "classification":
        return _scan_classification(root)
    return _scan_segmentation(root)


def _scan_classification(root: Path) -> DatasetManifest:
    class_dirs = sorted((d for d in root.iterdir() if d.is_dir() and not d.name.startswith(".")),
                        key=_path_key)
    if not class_dirs:
        raise MissingDirectory(f"{root} has no class subdirectories")
    items = []
    for d in class_dirs:
        files = list_images(d)
        if not files:
            raise EmptyClass(f"class directory {d} holds no images")
        items.extend(ClassItem(str(p), d.name) for p in files)
    items.sort(key=lambda it: _path_key(it.path))
    return DatasetManifest("classification", items, str(root))


def _scan_segmentation(root: Path) -> DatasetManifest:
    items = []
    for split in SPLITS:
        img_dir = root / split / "images"
        mask_dir = root / split / "masks"
        for d in (img_dir, mask_dir):
            if not d.is_dir():
                raise MissingDirectory(f"expected directory {d}")
        images = {p.stem: p for p in list_images(img_dir)}
        masks = {p.stem: p for p in list_images(mask_dir)}
        for orphan in sorted(set(images) ^ set(masks)):
            where = images.get(orphan) or masks.get(orphan)
            raise UnpairedMask(f"{where} has no counterpart in {split}")
        items.extend(SegItem(str(images[s]), str(masks[s]), split) for s in images)
    items.sort(key=lambda it: _path_key(it.image))
    return DatasetManifest("segmentation", items, str(root))


def dataset_stats(manifest: DatasetManifest) -> dict:
    """Per-class or per-split counts plus a histogram of image dimensions."""
    dims = Counter()
    for item in manifest.items:
        path = item.path if manifest.task == "classification" else item.image
        with Image.open(path) as img:
            dims[f"{img.width}x{img.height}"] += 1
    counts = manifest.class_counts() if manifest.task == "classification" else manifest.split_counts()
    return {"task": manifest.task, "total": len(manifest.items), "counts": counts,
            "dimensions": dict(sorted(dims.items()))}


# ---------------------------------------------------------------------------
# transforms by id
# ---------------------------------------------------------------------------

def op_parameters(op: str, g: geo.GeometricParams, p: photo.PhotometricParams) -> dict:
    table = {
        "rotate90": {},
        "fliph": {},
        "scale": {"factor": g.scale_factor},
        "translate": {"dx": g.translate_dx, "dy": g.translate_dy, "fill": g.fill_value},
        "shear": {"k": g.shear_k, "fill": g.fill_value},
        "brightness": {"delta": p.brightness_delta},
        "contrast": {"factor": p.contrast_factor},
        "noise": {"mean": p.noise_mean, "sigma": p.noise_sigma},
        "histeq": {},
    }
    try:
        return table[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}; expected one of {DEFAULT_ROSTER}") from None


_OPS: dict[str, Callable] = {
    "rotate90": lambda img, prm, rng: geo.rotate90_cw(img),
    "fliph": lambda img, prm, rng: geo.flip_horizontal(img),
    "scale": lambda img, prm, rng: geo.scale_and_crop(img, prm["factor"]),
    "translate": lambda img, prm, rng: geo.translate(img, prm["dx"], prm["dy"], prm["fill"]),
    "shear": lambda img, prm, rng: geo.shear_horizontal(img, prm["k"], prm["fill"]),
    "brightness": lambda img, prm, rng: photo.adjust_brightness(img, prm["delta"]),
    "contrast": lambda img, prm, rng: photo.adjust_contrast(img, prm["factor"]),
    "noise": lambda img, prm, rng: photo.add_gaussian_noise(img, rng, prm["mean"], prm["sigma"]),
    "histeq": lambda img, prm, rng: photo.equalize_histogram_luma(img),
}


def apply_op(image: ImageBuffer, op: str, params: dict, stream=None) -> ImageBuffer:
    if op not in _OPS:
        raise ValueError(f"unknown op {op!r}; expected one of {DEFAULT_ROSTER}")
    if op == "noise" and stream is None:
        raise ValueError("the noise op needs a random stream")
    return _OPS[op](image, params, stream)


def parse_augmented_name(name: str) -> tuple[str, str, int] | None:
    """``'img7__shear2.png'`` -> ``('img7', 'shear', 2)``; None for other names."""
    m = _AUG_NAME.match(Path(name).stem)
    if m is None:
        return None
    return m["stem"], m["op"], int(m["occ"])


# ---------------------------------------------------------------------------
# balancing plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AugRecord:
    source: str
    label: str
    op: str
    occurrence: int
    params: dict
    stream_index: int
    output: str


@dataclass
class AugmentationPlan:
    records: list
    copies: list = field(default_factory=list)
    master_seed: int = 42

    def __len__(self):
        return len(self.records)

    def op_counts(self) -> dict:
        return dict(Counter(r.op for r in self.records))


def plan_balancing(manifest: DatasetManifest, target_per_class: int, out_root,
                   op_roster: Sequence[str] = DEFAULT_ROSTER, master_seed: int = 42,
                   geometric: geo.GeometricParams | None = None,
                   photometric: photo.PhotometricParams | None = None,
                   force: bool = False) -> AugmentationPlan:
    """Plan augmentations that top every class up to ``target_per_class``.

    Occurrence ``q`` of original ``i`` (manifest order within its class)
    gets ``op_roster[(i + q) % len(op_roster)]``; records are emitted for
    q = 0, 1, ... over all originals until the deficit is filled. Stream
    indices are the record ordinals across the whole plan.
    """
    if manifest.task != "classification":
        raise ValueError("balancing plans need a classification manifest")
    if not op_roster:
        raise EmptyRoster("op roster is empty")
    for op in op_roster:
        if op not in _OPS:
            raise ValueError(f"unknown op {op!r}; expected one of {DEFAULT_ROSTER}")
    counts = manifest.class_counts()
    if target_per_class < 1:
        raise InvalidTarget(f"target must be >= 1, got {target_per_class}")
    if target_per_class < max(counts.values()) and not force:
        raise InvalidTarget(
            f"target {target_per_class} is below the largest class ({max(counts.values())}); "
            "pass force=True to allow it")
    g = geometric or geo.GeometricParams()
    p = photometric or photo.PhotometricParams()
    out_root = Path(out_root)

    by_class: dict[str, list] = {}
    for item in manifest.items:
        by_class.setdefault(item.label, []).append(item)

    records, copies = [], []
    stream_index = 0
    for label in sorted(by_class):
        originals = by_class[label]
        for item in originals:
            copies.append((item.path, str(out_root / label / Path(item.path).name)))
        deficit = target_per_class - len(originals)
        for n in range(max(deficit, 0)):
            q, i = divmod(n, len(originals))
            op = op_roster[(i + q) % len(op_roster)]
            src = originals[i].path
            out = out_root / label / f"{Path(src).stem}__{op}{q}.png"
            records.append(AugRecord(src, label, op, q, op_parameters(op, g, p),
                                     stream_index, str(out)))
            stream_index += 1

    _check_outputs(manifest, [dst for _, dst in copies] + [r.output for r in records])
    return AugmentationPlan(records, copies, master_seed)


def _source_paths(manifest: DatasetManifest) -> list:
    if manifest.task == "classification":
        return [it.path for it in manifest.items]
    return [p for it in manifest.items for p in (it.image, it.mask)]


def _check_outputs(manifest: DatasetManifest, outputs: list) -> None:
    resolved = [Path(o).resolve() for o in outputs]
    dupes = [p for p, n in Counter(resolved).items() if n > 1]
    if dupes:
        raise ValueError(f"plan writes {dupes[0]} more than once")
    sources = {Path(s).resolve() for s in _source_paths(manifest)}
    clash = sources.intersection(resolved)
    if clash:
        raise ValueError(f"plan would overwrite source file {sorted(clash)[0]}")


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecordOutcome:
    output: str
    ok: bool
    error: str | None = None


@dataclass
class ExecutionReport:
    outcomes: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [o for o in self.outcomes if not o.ok]

    @property
    def written(self) -> int:
        return sum(o.ok for o in self.outcomes)

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0


def _run(tasks: list, workers: int, verbose_every: int = 0) -> list:
    def guarded(task):
        output, fn = task
        try:
            fn()
        except Exception as exc:  # collected per record, never fatal to the batch
            log.error("failed %s: %s", output, exc)
            return RecordOutcome(output, False, f"{type(exc).__name__}: {exc}")
        return RecordOutcome(output, True)

    if workers <= 1:
        results = []
        for n, t in enumerate(tasks, 1):
            results.append(guarded(t))
            if verbose_every and n % verbose_every == 0:
                log.debug("%d/%d done", n, len(tasks))
        return results
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(guarded, tasks))


def _copy(src, dst):
    Path(dst).parent.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(src, dst)


def execute_plan(plan: AugmentationPlan, workers: int = 1) -> ExecutionReport:
    """Copy originals and write every planned augmentation as PNG.

    The noise op draws from ``derive_stream(plan.master_seed, stream_index)``.
    """
    tasks = [(dst, lambda s=src, d=dst: _copy(s, d)) for src, dst in plan.copies]

    def render(rec: AugRecord):
        img = read_image(rec.source)
        stream = derive_stream(plan.master_seed, rec.stream_index)
        write_image(apply_op(img, rec.op, rec.params, stream), rec.output)

    tasks += [(rec.output, lambda r=rec: render(r)) for rec in plan.records]
    return ExecutionReport(_run(tasks, workers, verbose_every=50))


def load_pairs(items: Sequence[SegItem]) -> list:
    return [SamplePair(read_image(it.image), read_mask(it.mask)) for it in items]


def mix_name(k: int, i: int, j: int) -> str:
    return f"mix_{k:04}_{i}_{j}.png"


def write_mixup_results(results, out_images, out_masks, workers: int = 1) -> ExecutionReport:
    out_images, out_masks = Path(out_images), Path(out_masks)
    tasks = []
    for k, res in enumerate(results):
        i, j = res.source_ids
        name = mix_name(k, i, j)

        def save(res=res, name=name):
            write_image(res.image, out_images / name)
            write_mask(res.mask, out_masks / name)

        tasks.append((str(out_images / name), save))
    return ExecutionReport(_run(tasks, workers))


def expand_segmentation_set(manifest: DatasetManifest, count: int, out_root,
                            alpha: float = DEFAULT_ALPHA, mode: str = "global",
                            master_seed: int = 42, workers: int = 1) -> ExecutionReport:
    """Copy the dataset to ``out_root`` and add ``count`` mixup pairs to train."""
    if manifest.task != "segmentation":
        raise ValueError("expand_segmentation_set needs a segmentation manifest")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    train = [it for it in manifest.items if it.split == "train"]
    if len(train) < 2:
        raise DatasetTooSmall(f"train split has {len(train)} pairs; mixup needs at least 2")
    out_root = Path(out_root)

    copies = []
    for it in manifest.items:
        for src, sub in ((it.image, "images"), (it.mask, "masks")):
            copies.append((src, str(out_root / it.split / sub / Path(src).name)))
    new_images = out_root / "train" / "images"
    new_masks = out_root / "train" / "masks"
    results = generate_mixup_set(load_pairs(train), count, alpha, mode, master_seed, workers)
    mixed_paths = []
    for k, res in enumerate(results):
        name = mix_name(k, *res.source_ids)
        mixed_paths += [str(new_images / name), str(new_masks / name)]
    _check_outputs(manifest, [dst for _, dst in copies] + mixed_paths)

    report = ExecutionReport(_run([(dst, lambda s=src, d=dst: _copy(s, d)) for src, dst in copies],
                                  workers))
    report.outcomes += write_mixup_results(results, new_images, new_masks, workers).outcomes
    return report
