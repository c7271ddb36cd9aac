"""Hot kernels, each with a numba and a pure numpy/Python implementation.

The numba path is used when numba imports and ``MEDAUG_DISABLE_NUMBA`` is
unset (or ``0``). Both paths perform the same IEEE operations in the same
order, so they agree bit for bit; tests check this directly and
``benchmarks/bench_kernels.py`` compares their speed.

Kernels return float64 intermediates; quantization happens in
:func:`medaug.raster.clamp_round` so it is shared by both paths.
"""

from __future__ import annotations

import contextlib
import math
import os

import numpy as np

try:
    import numba
    from numba import uint64
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_MASK64 = (1 << 64) - 1
_TWO_PI = 2.0 * math.pi
_INV_2_53 = 1.0 / 9007199254740992.0
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _env_disabled() -> bool:
    return os.environ.get("MEDAUG_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


NUMBA_AVAILABLE = numba is not None


# ---------------------------------------------------------------------------
# splitmix64 / xoshiro256** on Python ints (reference + fallback path)
# ---------------------------------------------------------------------------

def splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step; returns (new_state, output)."""
    x = (x + GOLDEN_GAMMA) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


def xoshiro_next(s: list) -> int:
    """Advance a 4-word xoshiro256** state list in place, returning 64 bits."""
    s0, s1, s2, s3 = s
    r = (s1 * 5) & _MASK64
    r = ((((r << 7) | (r >> 57)) & _MASK64) * 9) & _MASK64
    t = (s1 << 17) & _MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
    s[0], s[1], s[2], s[3] = s0, s1, s2, s3
    return r


def py_uniform(s: list) -> float:
    return (xoshiro_next(s) >> 11) * _INV_2_53


def py_gaussian(s: list, mean: float, sigma: float) -> float:
    u1 = py_uniform(s)
    while u1 == 0.0:
        u1 = py_uniform(s)
    u2 = py_uniform(s)
    return mean + sigma * (math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2))


def py_beta(s: list, alpha: float) -> tuple[float, int]:
    """Symmetric Beta(alpha, alpha) by Johnk; returns (value, attempts)."""
    inv = 1.0 / alpha
    attempts = 0
    while True:
        attempts += 1
        x = py_uniform(s) ** inv
        y = py_uniform(s) ** inv
        total = x + y
        if 0.0 < total <= 1.0:
            return x / total, attempts


def _uniforms_py(state: list, n: int) -> np.ndarray:
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = py_uniform(state)
    return out


def _gaussians_py(state: list, n: int, mean: float, sigma: float) -> np.ndarray:
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = py_gaussian(state, mean, sigma)
    return out


def _betas_py(state: list, n: int, alpha: float) -> tuple[np.ndarray, int]:
    out = np.empty(n, dtype=np.float64)
    total = 0
    for i in range(n):
        out[i], attempts = py_beta(state, alpha)
        total += attempts
    return out, total


# ---------------------------------------------------------------------------
# resampling, numpy path
# ---------------------------------------------------------------------------

def _axis_taps(n_out: int, n_in: int, factor: float):
    src = (np.arange(n_out, dtype=np.float64) + 0.5) / factor - 0.5
    lo = np.floor(src)
    frac = src - lo
    lo = lo.astype(np.int64)
    i0 = np.clip(lo, 0, n_in - 1)
    i1 = np.clip(lo + 1, 0, n_in - 1)
    return i0, i1, frac


def _resize_bilinear_np(src: np.ndarray, out_h: int, out_w: int, factor: float) -> np.ndarray:
    h, w, _ = src.shape
    y0, y1, fy = _axis_taps(out_h, h, factor)
    x0, x1, fx = _axis_taps(out_w, w, factor)
    img = src.astype(np.float64)
    rows0 = img[y0]
    rows1 = img[y1]
    gx = (1.0 - fx)[None, :, None]
    fx = fx[None, :, None]
    top = rows0[:, x0] * gx + rows0[:, x1] * fx
    bottom = rows1[:, x0] * gx + rows1[:, x1] * fx
    gy = (1.0 - fy)[:, None, None]
    fy = fy[:, None, None]
    return top * gy + bottom * fy


def _shear_bilinear_np(src: np.ndarray, k: float, fill: float) -> np.ndarray:
    h, w, c = src.shape
    ys = np.arange(h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    sx = xs - k * ys
    # beyond this window both taps are out of bounds anyway; keeps int64 sane
    sx = np.clip(sx, -2.0, w + 1.0)
    lo = np.floor(sx)
    frac = (sx - lo)[:, :, None]
    lo = lo.astype(np.int64)
    hi = lo + 1
    img = src.astype(np.float64)
    rows = np.broadcast_to(np.arange(h)[:, None], lo.shape)

    def tap(idx):
        ok = (idx >= 0) & (idx < w)
        vals = img[rows, np.clip(idx, 0, w - 1)]
        return np.where(ok[:, :, None], vals, fill)

    return tap(lo) * (1.0 - frac) + tap(hi) * frac


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:
    _jit = numba.njit(cache=True, nogil=True)

    @_jit
    def _nb_next(s):
        s0 = s[0]
        s1 = s[1]
        s2 = s[2]
        s3 = s[3]
        r = s1 * uint64(5)
        r = ((r << uint64(7)) | (r >> uint64(57))) * uint64(9)
        t = s1 << uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = (s3 << uint64(45)) | (s3 >> uint64(19))
        s[0] = s0
        s[1] = s1
        s[2] = s2
        s[3] = s3
        return r

    @_jit
    def _nb_uniform(s):
        return float(_nb_next(s) >> uint64(11)) * _INV_2_53

    @_jit
    def _uniforms_nb(s, n):
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            out[i] = _nb_uniform(s)
        return out

    @_jit
    def _gaussians_nb(s, n, mean, sigma):
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            u1 = _nb_uniform(s)
            while u1 == 0.0:
                u1 = _nb_uniform(s)
            u2 = _nb_uniform(s)
            out[i] = mean + sigma * (math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2))
        return out

    @_jit
    def _betas_nb(s, n, alpha):
        out = np.empty(n, dtype=np.float64)
        inv = 1.0 / alpha
        attempts = 0
        for i in range(n):
            while True:
                attempts += 1
                x = _nb_uniform(s) ** inv
                y = _nb_uniform(s) ** inv
                total = x + y
                if total > 0.0 and total <= 1.0:
                    out[i] = x / total
                    break
        return out, attempts

    @_jit
    def _resize_bilinear_nb(src, out_h, out_w, factor):
        h, w, c = src.shape
        out = np.empty((out_h, out_w, c), dtype=np.float64)
        for oy in range(out_h):
            sy = (oy + 0.5) / factor - 0.5
            ly = math.floor(sy)
            fy = sy - ly
            gy = 1.0 - fy
            y0 = min(max(int(ly), 0), h - 1)
            y1 = min(max(int(ly) + 1, 0), h - 1)
            for ox in range(out_w):
                sx = (ox + 0.5) / factor - 0.5
                lx = math.floor(sx)
                fx = sx - lx
                gx = 1.0 - fx
                x0 = min(max(int(lx), 0), w - 1)
                x1 = min(max(int(lx) + 1, 0), w - 1)
                for ch in range(c):
                    top = float(src[y0, x0, ch]) * gx + float(src[y0, x1, ch]) * fx
                    bottom = float(src[y1, x0, ch]) * gx + float(src[y1, x1, ch]) * fx
                    out[oy, ox, ch] = top * gy + bottom * fy
        return out

    @_jit
    def _shear_bilinear_nb(src, k, fill):
        h, w, c = src.shape
        out = np.empty((h, w, c), dtype=np.float64)
        for y in range(h):
            for x in range(w):
                sx = float(x) - k * float(y)
                if sx < -2.0:
                    sx = -2.0
                elif sx > w + 1.0:
                    sx = w + 1.0
                lx = math.floor(sx)
                frac = sx - lx
                x0 = int(lx)
                x1 = x0 + 1
                for ch in range(c):
                    left = fill
                    if x0 >= 0 and x0 < w:
                        left = float(src[y, x0, ch])
                    right = fill
                    if x1 >= 0 and x1 < w:
                        right = float(src[y, x1, ch])
                    out[y, x, ch] = left * (1.0 - frac) + right * frac
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _state_array(state: list) -> np.ndarray:
    return np.array(state, dtype=np.uint64)


def _store(state: list, arr: np.ndarray) -> None:
    state[:] = [int(v) for v in arr]


def _uniforms_nb_wrapped(state: list, n: int) -> np.ndarray:
    arr = _state_array(state)
    out = _uniforms_nb(arr, n)
    _store(state, arr)
    return out


def _gaussians_nb_wrapped(state: list, n: int, mean: float, sigma: float) -> np.ndarray:
    arr = _state_array(state)
    out = _gaussians_nb(arr, n, float(mean), float(sigma))
    _store(state, arr)
    return out


def _betas_nb_wrapped(state: list, n: int, alpha: float):
    arr = _state_array(state)
    out, attempts = _betas_nb(arr, n, float(alpha))
    _store(state, arr)
    return out, int(attempts)


def _resize_nb_wrapped(src, out_h, out_w, factor):
    return _resize_bilinear_nb(np.ascontiguousarray(src), int(out_h), int(out_w), float(factor))


def _shear_nb_wrapped(src, k, fill):
    return _shear_bilinear_nb(np.ascontiguousarray(src), float(k), float(fill))


KERNELS = {
    "numpy": {
        "uniforms": _uniforms_py,
        "gaussians": _gaussians_py,
        "betas": _betas_py,
        "resize_bilinear": _resize_bilinear_np,
        "shear_bilinear": _shear_bilinear_np,
    },
}
if NUMBA_AVAILABLE:
    KERNELS["numba"] = {
        "uniforms": _uniforms_nb_wrapped,
        "gaussians": _gaussians_nb_wrapped,
        "betas": _betas_nb_wrapped,
        "resize_bilinear": _resize_nb_wrapped,
        "shear_bilinear": _shear_nb_wrapped,
    }

BACKEND = "numba" if NUMBA_AVAILABLE and not _env_disabled() else "numpy"


def set_backend(name: str) -> None:
    """Rebind the module-level kernels to ``name`` ("numba" or "numpy")."""
    global BACKEND, uniforms, gaussians, betas, resize_bilinear, shear_bilinear
    if name not in KERNELS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(KERNELS)}")
    BACKEND = name
    table = KERNELS[name]
    uniforms = table["uniforms"]
    gaussians = table["gaussians"]
    betas = table["betas"]
    resize_bilinear = table["resize_bilinear"]
    shear_bilinear = table["shear_bilinear"]


@contextlib.contextmanager
def use_backend(name: str):
    previous = BACKEND
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


set_backend(BACKEND)
