import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import random_image, random_mask
from medaug import _accel
from medaug.errors import InvalidFactor, TargetTooLarge
from medaug.geometric import (GeometricParams, crop_center, flip_horizontal, rotate90_cw, scale,
                              scale_and_crop, scale_mask, scaled_dims, shear_horizontal,
                              shear_mask, translate)
from medaug.raster import BinaryMask, ImageBuffer


def gray(rows):
    return ImageBuffer(np.array(rows, dtype=np.uint8))


def rows_of(img):
    return img.pixels[:, :, 0].tolist()


class TestRotate:
    def test_2x2(self):
        assert rows_of(rotate90_cw(gray([[1, 2], [3, 4]]))) == [[3, 1], [4, 2]]

    def test_mapping(self, rng):
        img = random_image(rng, 5, 7)
        out = rotate90_cw(img)
        h = img.height
        for r in range(img.height):
            for c in range(img.width):
                assert np.array_equal(out.pixels[c, h - 1 - r], img.pixels[r, c])

    def test_dims_and_group(self, rng):
        img = random_image(rng, 5, 9)
        out = rotate90_cw(img)
        assert (out.width, out.height) == (5, 9)
        for _ in range(3):
            out = rotate90_cw(out)
        assert out == img

    def test_mask(self, rng):
        m = random_mask(rng, 4, 6)
        out = rotate90_cw(m)
        assert isinstance(out, BinaryMask) and (out.width, out.height) == (4, 6)


class TestFlip:
    def test_2x2(self):
        assert rows_of(flip_horizontal(gray([[1, 2], [3, 4]]))) == [[2, 1], [4, 3]]

    def test_involution(self, rng):
        img = random_image(rng, 6, 5)
        assert flip_horizontal(flip_horizontal(img)) == img

    def test_symmetric_fixed_point(self):
        img = gray([[1, 2, 1], [7, 0, 7]])
        assert flip_horizontal(img) == img

    def test_preserves_multiset(self, rng):
        img = random_image(rng, 4, 4)
        assert sorted(flip_horizontal(img).samples) == sorted(img.samples)


class TestTranslate:
    def test_identity(self, rng):
        img = random_image(rng, 5, 5)
        assert translate(img, 0, 0) == img

    def test_3x3_right(self):
        out = translate(gray([[1, 2, 3], [4, 5, 6], [7, 8, 9]]), 1, 0, 0)
        assert rows_of(out) == [[0, 1, 2], [0, 4, 5], [0, 7, 8]]

    def test_down_and_left(self):
        out = translate(gray([[1, 2, 3], [4, 5, 6], [7, 8, 9]]), -1, 1, 9)
        assert rows_of(out) == [[9, 9, 9], [2, 3, 9], [5, 6, 9]]

    @pytest.mark.parametrize("dx, dy", [(5, 0), (0, -4), (-7, 2), (100, 100)])
    def test_fully_out(self, dx, dy, rng):
        out = translate(random_image(rng, 4, 5), dx, dy, 17)
        assert np.all(out.pixels == 17)

    @given(st.integers(-6, 6), st.integers(-6, 6))
    def test_there_and_back_on_interior(self, dx, dy):
        img = random_image(np.random.default_rng(abs(dx) * 13 + abs(dy)), 7, 8)
        back = translate(translate(img, dx, dy, 0), -dx, -dy, 0)
        h, w = 7, 8
        rows = slice(max(-dy, 0), h - max(dy, 0))
        cols = slice(max(-dx, 0), w - max(dx, 0))
        assert np.array_equal(back.pixels[rows, cols], img.pixels[rows, cols])

    def test_mask_fill_is_zero(self):
        m = BinaryMask(np.full((3, 3), 255, np.uint8))
        out = translate(m, 1, 1, fill=255)
        assert out.pixels[0].tolist() == [0, 0, 0]


class TestCrop:
    def test_identity(self, rng):
        img = random_image(rng, 4, 6)
        assert crop_center(img, 6, 4) == img

    def test_offset(self):
        big = ImageBuffer(np.arange(120 * 120, dtype=np.int64).reshape(120, 120).astype(np.uint8))
        out = crop_center(big, 100, 100)
        assert np.array_equal(out.pixels, big.pixels[10:110, 10:110])

    def test_center_pixel(self):
        assert rows_of(crop_center(gray([[1, 2, 3], [4, 5, 6], [7, 8, 9]]), 1, 1)) == [[5]]

    def test_too_large(self, rng):
        with pytest.raises(TargetTooLarge):
            crop_center(random_image(rng, 3, 3), 4, 3)


class TestScale:
    def test_identity(self, rng, backend):
        img = random_image(rng, 9, 11)
        assert scale(img, 1.0) == img

    def test_dims(self):
        assert scaled_dims(100, 100, 1.2) == (120, 120)
        assert scaled_dims(10, 3, 0.01) == (1, 1)
        assert scaled_dims(5, 5, 0.5) == (3, 3)  # 2.5 rounds away from zero

    def test_output_dims(self, rng):
        out = scale(random_image(rng, 100, 100), 1.2)
        assert (out.width, out.height) == (120, 120)

    @pytest.mark.parametrize("factor", [0.3, 0.75, 1.2, 2.0, 3.7])
    def test_constant_image(self, factor, backend):
        img = ImageBuffer(np.full((6, 7, 3), 93, np.uint8))
        assert np.all(scale(img, factor).pixels == 93)

    @pytest.mark.parametrize("factor", [0.0, -1.0, math.inf, math.nan])
    def test_bad_factor(self, factor, rng):
        with pytest.raises(InvalidFactor):
            scale(random_image(rng, 3, 3), factor)
        with pytest.raises(InvalidFactor):
            scale_mask(random_mask(rng, 3, 3), factor)

    def test_upsample_by_two_known_values(self):
        # taps land on quarter positions: 0.75*a + 0.25*b
        out = scale(gray([[0, 100]]), 2.0)
        assert rows_of(out) == [[0, 25, 75, 100], [0, 25, 75, 100]]

    @pytest.mark.parametrize("factor", [0.5, 0.8, 1.2, 1.5, 2.0, 2.3])
    def test_oracle(self, factor, rng, backend):
        for h, w, c in [(8, 8, 3), (5, 7, 1), (1, 6, 3), (3, 1, 1)]:
            img = random_image(rng, h, w, c)
            expected = oracles.scale_bilinear(img.pixels.tolist(), factor)
            assert scale(img, factor).pixels.tolist() == expected

    def test_bilinear_within_neighbour_range(self, rng, backend):
        for _ in range(30):
            h, w = rng.integers(1, 12, 2)
            img = random_image(rng, int(h), int(w), 1)
            factor = float(rng.uniform(0.3, 3.0))
            oh, ow = scaled_dims(int(w), int(h), factor)[::-1]
            raw = _accel.resize_bilinear(img.pixels, oh, ow, factor)[:, :, 0]
            px = img.pixels[:, :, 0].astype(float)
            for r in range(oh):
                sy = (r + 0.5) / factor - 0.5
                ys = [min(max(math.floor(sy) + d, 0), h - 1) for d in (0, 1)]
                for c in range(ow):
                    sx = (c + 0.5) / factor - 0.5
                    xs = [min(max(math.floor(sx) + d, 0), w - 1) for d in (0, 1)]
                    neigh = [px[y, x] for y in ys for x in xs]
                    assert min(neigh) <= raw[r, c] <= max(neigh)

    def test_scale_and_crop_restores_dims(self, rng):
        img = random_image(rng, 64, 64)
        out = scale_and_crop(img, 1.2)
        assert (out.width, out.height) == (64, 64)
        assert out == crop_center(scale(img, 1.2), 64, 64)

    def test_scale_and_crop_shrink_keeps_small_size(self, rng):
        out = scale_and_crop(random_image(rng, 10, 10), 0.5)
        assert (out.width, out.height) == (5, 5)


class TestScaleMask:
    def test_identity(self, rng):
        m = random_mask(rng, 7, 9)
        assert scale_mask(m, 1.0) == m

    def test_all_zero(self):
        m = BinaryMask(np.zeros((10, 10), np.uint8))
        assert not scale_mask(m, 1.7).foreground.any()

    def test_closure(self, rng):
        out = scale_mask(random_mask(rng, 10, 10), 1.2)
        assert (out.width, out.height) == (12, 12)
        assert set(np.unique(out.pixels)) <= {0, 255}

    @pytest.mark.parametrize("factor", [0.4, 1.2, 2.0, 2.5])
    def test_oracle(self, factor, rng):
        m = random_mask(rng, 7, 6)
        assert scale_mask(m, factor).pixels.tolist() == oracles.scale_nearest(m.pixels.tolist(), factor)


class TestShear:
    def test_identity(self, rng, backend):
        img = random_image(rng, 6, 9)
        assert shear_horizontal(img, 0.0) == img

    @pytest.mark.parametrize("k", [-0.7, 0.2, 1.3])
    def test_first_row_unchanged(self, k, rng, backend):
        img = random_image(rng, 6, 9)
        assert np.array_equal(shear_horizontal(img, k, 0).pixels[0], img.pixels[0])

    @pytest.mark.parametrize("k", [-2.0, 0.2, 0.9])
    def test_constant_with_matching_fill(self, k, backend):
        img = ImageBuffer(np.full((5, 8, 3), 61, np.uint8))
        assert shear_horizontal(img, k, 61) == img

    def test_integer_shift_rows(self):
        img = gray([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
        assert rows_of(shear_horizontal(img, 1.0, 0)) == [[1, 2, 3], [0, 4, 5], [0, 0, 7]]

    @pytest.mark.parametrize("k", [-1.3, -0.2, 0.2, 0.37, 1.0, 2.5])
    def test_oracle(self, k, rng, backend):
        for h, w, c in [(8, 8, 3), (4, 7, 1), (1, 1, 3), (8, 2, 1)]:
            img = random_image(rng, h, w, c)
            expected = oracles.shear_bilinear(img.pixels.tolist(), k, 11)
            assert shear_horizontal(img, k, 11).pixels.tolist() == expected

    def test_mask_closure_and_first_row(self, rng):
        m = random_mask(rng, 6, 6)
        out = shear_mask(m, 0.4)
        assert set(np.unique(out.pixels)) <= {0, 255}
        assert np.array_equal(out.pixels[0], m.pixels[0])
        assert shear_mask(m, 0.0) == m


class TestBackendParity:
    @settings(max_examples=60, deadline=None)
    @given(h=st.integers(1, 12), w=st.integers(1, 12), c=st.sampled_from([1, 3]),
           factor=st.floats(0.1, 4.0), k=st.floats(-3.0, 3.0), seed=st.integers(0, 2 ** 32 - 1))
    def test_kernels_bit_identical(self, h, w, c, factor, k, seed):
        if "numba" not in _accel.KERNELS:
            pytest.skip("numba unavailable")
        src = np.random.default_rng(seed).integers(0, 256, (h, w, c), dtype=np.uint8)
        oh, ow = max(1, round(h * factor)), max(1, round(w * factor))
        a = _accel.KERNELS["numpy"]["resize_bilinear"](src, oh, ow, factor)
        b = _accel.KERNELS["numba"]["resize_bilinear"](src, oh, ow, factor)
        assert np.array_equal(a, b)
        a = _accel.KERNELS["numpy"]["shear_bilinear"](src, k, 5.0)
        b = _accel.KERNELS["numba"]["shear_bilinear"](src, k, 5.0)
        assert np.array_equal(a, b)


def test_params_defaults():
    p = GeometricParams()
    assert (p.scale_factor, p.translate_dx, p.translate_dy, p.shear_k, p.fill_value) == (1.2, 20, 30, 0.2, 0)
    with pytest.raises(InvalidFactor):
        GeometricParams(scale_factor=0)
