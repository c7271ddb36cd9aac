"""Seeded random streams and the Gaussian / Beta samplers.

Every stream is xoshiro256** seeded by four splitmix64 outputs, starting
from ``master_seed ^ (stream_index * 0x9E3779B97F4A7C15)`` (mod 2**64).
One stream is derived per work item, so results never depend on how the
items are scheduled.

Uniform consumption is fixed so that plans replay exactly:

* ``uniform``  -- one 64-bit word, top 53 bits.
* ``gaussian`` -- two uniforms (plus one extra per exact-zero first draw,
  probability 2**-53).
* ``beta``     -- two uniforms per Johnk attempt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import InvalidAlpha, InvalidLambda, InvalidSigma

_MASK64 = (1 << 64) - 1

DEFAULT_SEED = 42
DEFAULT_ALPHA = 0.4


def expand_seed(master_seed: int, stream_index: int) -> list:
    x = (master_seed ^ (stream_index * _accel.GOLDEN_GAMMA)) & _MASK64
    words = []
    for _ in range(4):
        x, out = _accel.splitmix64(x)
        words.append(out)
    return words


class RngStream:
    """Single-owner random stream; never share one between threads."""

    __slots__ = ("master_seed", "stream_index", "_state")

    def __init__(self, master_seed: int, stream_index: int = 0):
        self.master_seed = int(master_seed) & _MASK64
        self.stream_index = int(stream_index) & _MASK64
        self._state = expand_seed(self.master_seed, self.stream_index)

    @property
    def state(self) -> tuple:
        return tuple(self._state)

    def next_u64(self) -> int:
        return _accel.xoshiro_next(self._state)

    def uniform(self) -> float:
        return _accel.py_uniform(self._state)

    def uniforms(self, n: int) -> np.ndarray:
        return _accel.uniforms(self._state, int(n))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), as floor(uniform * n)."""
        return min(int(self.uniform() * n), n - 1)

    def gaussian(self, mean: float = 0.0, sigma: float = 1.0) -> float:
        _check_sigma(sigma)
        return _accel.py_gaussian(self._state, float(mean), float(sigma))

    def gaussians(self, n: int, mean: float = 0.0, sigma: float = 1.0) -> np.ndarray:
        _check_sigma(sigma)
        return _accel.gaussians(self._state, int(n), float(mean), float(sigma))

    def beta(self, alpha: float = DEFAULT_ALPHA) -> float:
        _check_alpha(alpha)
        value, _ = _accel.py_beta(self._state, float(alpha))
        return value

    def betas(self, n: int, alpha: float = DEFAULT_ALPHA, return_attempts: bool = False):
        _check_alpha(alpha)
        values, attempts = _accel.betas(self._state, int(n), float(alpha))
        if return_attempts:
            return values, attempts
        return values

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"


def derive_stream(master_seed: int, stream_index: int) -> RngStream:
    return RngStream(master_seed, stream_index)


def sample_gaussian(stream: RngStream, mean: float, sigma: float) -> float:
    return stream.gaussian(mean, sigma)


def sample_beta(stream: RngStream, alpha: float) -> float:
    return stream.beta(alpha)


def _check_sigma(sigma):
    if not sigma >= 0.0:
        raise InvalidSigma(f"sigma must be >= 0, got {sigma}")


def _check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise InvalidAlpha(f"alpha must be in (0, 1], got {alpha}")


@dataclass(frozen=True)
class MixupParams:
    alpha: float = DEFAULT_ALPHA
    lam: float | None = None

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise InvalidAlpha(f"alpha must be > 0, got {self.alpha}")
        if self.lam is not None and not 0.0 <= self.lam <= 1.0:
            raise InvalidLambda(f"lambda must be in [0, 1], got {self.lam}")

    def resolve(self, stream: RngStream) -> float:
        """Injected lambda if set, otherwise one Beta(alpha, alpha) draw."""
        if self.lam is not None:
            return self.lam
        return stream.beta(self.alpha)
