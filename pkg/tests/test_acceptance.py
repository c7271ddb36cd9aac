"""Exit criteria for the package; the terminal summary prints one PASS/FAIL line each.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import time
from collections import Counter
from itertools import product

import numpy as np
import pytest

import oracles
from conftest import make_classification_tree, make_segmentation_tree, random_image, random_pair, tree_digest
from medaug.cli import main
from medaug.geometric import flip_horizontal, rotate90_cw, scale, shear_horizontal, translate
from medaug.metrics import dice
from medaug.mixup import mixup_composite, mixup_global
from medaug.photometric import (add_gaussian_noise, adjust_brightness, equalization_lut,
                                equalize_histogram_luma)
from medaug.pipeline import parse_augmented_name, scan_dataset
from medaug.raster import BinaryMask, ImageBuffer
from medaug.rng import derive_stream

acceptance = pytest.mark.acceptance


@acceptance(1, "balance 30/240 -> 240 per class, 210 augmented, 7 uses per original, < 30 s")
def test_classification_count_fidelity(tmp_path):
    src = make_classification_tree(tmp_path / "skin", {"benign": 30, "malignant": 240}, size=64)
    out = tmp_path / "balanced"
    start = time.perf_counter()
    code = main(["--quiet", "balance", "--input", str(src), "--out", str(out), "--target", "240"])
    elapsed = time.perf_counter() - start
    assert code == 0
    assert scan_dataset(out, "classification").class_counts() == {"benign": 240, "malignant": 240}
    augmented = [parse_augmented_name(p.name) for p in (out / "benign").iterdir()]
    augmented = [a for a in augmented if a is not None]
    assert len(augmented) == 210
    uses = Counter(stem for stem, _, _ in augmented)
    assert len(uses) == 30 and set(uses.values()) == {7}
    assert elapsed < 30, f"balance took {elapsed:.1f}s"


@acceptance(2, "expand-seg 80/20 --count 100 -> 180 train pairs, test untouched, < 30 s")
def test_segmentation_count_fidelity(tmp_path):
    root = make_segmentation_tree(tmp_path / "seg", 80, 20, size=64)
    before = tree_digest(root / "test")
    out = tmp_path / "expanded"
    start = time.perf_counter()
    code = main(["--quiet", "expand-seg", "--root", str(root), "--out", str(out), "--count", "100"])
    elapsed = time.perf_counter() - start
    assert code == 0
    assert scan_dataset(out, "segmentation").split_counts() == {"train": 180, "test": 20}
    assert tree_digest(out / "test") == before
    assert tree_digest(root / "test") == before
    assert elapsed < 30, f"expand-seg took {elapsed:.1f}s"


@acceptance(3, "transform algebra identities over >= 100 random images")
def test_transform_algebra(rng):
    for n in range(120):
        h, w = (int(v) for v in rng.integers(1, 33, 2))
        img = random_image(rng, h, w, 3 if n % 2 else 1)
        assert flip_horizontal(flip_horizontal(img)) == img
        rot = img
        for _ in range(4):
            rot = rotate90_cw(rot)
        assert rot == img
        dx, dy = (int(v) for v in rng.integers(-8, 9, 2))
        back = translate(translate(img, dx, dy, 0), -dx, -dy, 0)
        # the window that never left the canvas; empty when the shift exceeds the image
        rows = slice(max(-dy, 0), max(h - max(dy, 0), 0))
        cols = slice(max(-dx, 0), max(w - max(dx, 0), 0))
        assert np.array_equal(back.pixels[rows, cols], img.pixels[rows, cols])
        assert shear_horizontal(img, 0.0) == img
        assert scale(img, 1.0) == img
        assert adjust_brightness(img, 0) == img
        assert add_gaussian_noise(img, derive_stream(n, 0), 0.0, 0.0) == img


@acceptance(4, "scale and shear match the brute-force inverse-mapping oracle on all sizes <= 8x8")
def test_resampling_oracle(rng):
    factors = [0.5, 0.9, 1.2, 1.75, 2.0]
    shears = [-1.1, -0.2, 0.2, 0.45, 1.0]
    for h, w in product(range(1, 9), range(1, 9)):
        img = random_image(rng, h, w, 3)
        px = img.pixels.tolist()
        for f in factors:
            assert scale(img, f).pixels.tolist() == oracles.scale_bilinear(px, f), (h, w, f)
        for k in shears:
            assert shear_horizontal(img, k, 7).pixels.tolist() == oracles.shear_bilinear(px, k, 7), (h, w, k)


@acceptance(5, "Beta(0.4,0.4) and Gaussian(0,10) moments over 1e5 draws, < 5 s")
def test_sampler_statistics():
    start = time.perf_counter()
    beta = derive_stream(42, 1).betas(100_000, 0.4)
    gauss = derive_stream(42, 2).gaussians(100_000, 0.0, 10.0)
    elapsed = time.perf_counter() - start
    assert abs(beta.mean() - 0.5) <= 0.02
    assert abs(beta.var() - 0.1389) <= 0.01
    assert abs(gauss.mean()) <= 0.2
    assert abs(gauss.std() - 10.0) <= 0.2
    assert elapsed < 5, f"sampling took {elapsed:.2f}s"


@acceptance(6, "mixup endpoints, symmetry, convex bounds and 4x4 oracle for both modes")
def test_mixup_contract(rng):
    for _ in range(50):
        a, b = random_pair(rng, 4, 4), random_pair(rng, 4, 4)
        lam = float(rng.random())
        for mixer in (mixup_global, mixup_composite):
            res = mixer(a, b, lam)
            lo = np.minimum(a.image.pixels, b.image.pixels).astype(int) - 1
            hi = np.maximum(a.image.pixels, b.image.pixels).astype(int) + 1
            assert np.all((res.image.pixels >= lo) & (res.image.pixels <= hi))
        one, zero = mixup_global(a, b, 1.0), mixup_global(a, b, 0.0)
        assert one.image == a.image and one.mask == a.mask
        assert zero.image == b.image and zero.mask == b.mask
        ab, ba = mixup_global(a, b, lam), mixup_global(b, a, 1.0 - lam)
        assert ab.image == ba.image and ab.mask == ba.mask
        args = (a.image.pixels.tolist(), b.image.pixels.tolist(),
                a.mask.pixels.tolist(), b.mask.pixels.tolist(), lam)
        for mixer, oracle in ((mixup_global, oracles.mixup_global),
                              (mixup_composite, oracles.mixup_composite)):
            img, mask, _ = oracle(*args)
            res = mixer(a, b, lam)
            assert res.image.pixels.tolist() == img and res.mask.pixels.tolist() == mask


@acceptance(7, "dice matches the double-loop oracle on 200 16x16 pairs to 1e-12, plus conventions")
def test_dice_oracle(rng):
    for _ in range(200):
        a = BinaryMask.from_bool(rng.random((16, 16)) < rng.random())
        b = BinaryMask.from_bool(rng.random((16, 16)) < rng.random())
        assert abs(dice(a, b) - oracles.dice(a.pixels.tolist(), b.pixels.tolist())) <= 1e-12
        assert dice(a, a) == 1.0
    empty = BinaryMask(np.zeros((16, 16), np.uint8))
    assert dice(empty, empty) == 1.0
    a = BinaryMask.from_bool(np.array([[1, 1, 1, 1, 0, 0]], bool))
    b = BinaryMask.from_bool(np.array([[0, 0, 1, 1, 1, 1]], bool))
    assert dice(a, b) == 0.5


@acceptance(8, "randomized subcommands are byte-identical across reruns and --workers 1 vs 8")
def test_determinism(tmp_path):
    cls = make_classification_tree(tmp_path / "cls", {"a": 6, "b": 20}, size=32, seed=3)
    seg = make_segmentation_tree(tmp_path / "seg", 12, 3, size=32, seed=4)
    one = cls / "a" / "a_000.png"
    commands = {
        "balance": lambda out: ["balance", "--input", str(cls), "--out", str(out), "--target", "20"],
        "expand-seg": lambda out: ["expand-seg", "--root", str(seg), "--out", str(out), "--count", "15"],
        "mixup": lambda out: ["mixup", "--images", str(seg / "train" / "images"),
                              "--masks", str(seg / "train" / "masks"), "--out", str(out),
                              "--count", "15", "--mode", "composite"],
        "apply": lambda out: ["apply", "--op", "noise", "--in", str(one), "--out", str(out / "n.png")],
    }
    for name, build in commands.items():
        digests = []
        for run, workers in enumerate(("1", "1", "8")):
            out = tmp_path / f"{name}_{run}"
            out.mkdir()
            assert main(["--quiet", "--seed", "99", "--workers", workers] + build(out)) == 0
            digests.append(tree_digest(out))
        assert digests[0], name
        assert digests[0] == digests[1] == digests[2], name


@acceptance(9, "equalization LUT: monotone, min -> 0, max -> 255, constant passthrough, worked case")
def test_equalization_lut(rng):
    for _ in range(100):
        lo, hi = sorted(int(v) for v in rng.choice(256, 2, replace=False))
        plane = rng.integers(lo, hi + 1, (24, 24), dtype=np.uint8)
        plane.flat[:2] = lo, hi
        lut = equalization_lut(plane)
        assert np.all(np.diff(lut.astype(int)) >= 0)
        assert lut[lo] == 0 and lut[hi] == 255
    for value in (0, 77, 255):
        const = ImageBuffer(np.full((6, 6, 3), value, np.uint8))
        assert equalize_histogram_luma(const) == const
    worked = ImageBuffer(np.array([[10, 10, 10, 200]], np.uint8))
    assert equalize_histogram_luma(worked).samples.tolist() == [0, 0, 0, 255]
