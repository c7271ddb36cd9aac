import hashlib
import os
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from medaug import _accel
from medaug.raster import BinaryMask, ImageBuffer, SamplePair

BACKENDS = sorted(_accel.KERNELS)


@pytest.fixture(params=BACKENDS)
def backend(request):
    with _accel.use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20241017)


def random_image(rng, h, w, c=3):
    return ImageBuffer(rng.integers(0, 256, (h, w, c), dtype=np.uint8))


def random_mask(rng, h, w, p=0.4):
    return BinaryMask.from_bool(rng.random((h, w)) < p)


def random_pair(rng, h, w, c=3):
    return SamplePair(random_image(rng, h, w, c), random_mask(rng, h, w))


def write_png(path, arr):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path, format="PNG")


def make_classification_tree(root, counts, size=64, seed=0):
    gen = np.random.default_rng(seed)
    for label, n in counts.items():
        for i in range(n):
            write_png(Path(root) / label / f"{label}_{i:03}.png",
                      gen.integers(0, 256, (size, size, 3), dtype=np.uint8))
    return Path(root)


def make_segmentation_tree(root, n_train, n_test, size=32, seed=0):
    gen = np.random.default_rng(seed)
    for split, n in (("train", n_train), ("test", n_test)):
        for i in range(n):
            name = f"{split}_{i:03}.png"
            write_png(Path(root) / split / "images" / name,
                      gen.integers(0, 256, (size, size, 3), dtype=np.uint8))
            fg = gen.random((size, size)) < 0.3
            write_png(Path(root) / split / "masks" / name, np.where(fg, 255, 0).astype(np.uint8))
    return Path(root)


def tree_digest(root) -> dict:
    root = Path(root)
    out = {}
    for dirpath, _, files in os.walk(root):
        for f in files:
            p = Path(dirpath) / f
            out[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


# acceptance reporting: one PASS/FAIL line per criterion in the terminal summary

_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    ok = call.excinfo is None
    prev = _CRITERIA.get(number, (title, True))
    _CRITERIA[number] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")
