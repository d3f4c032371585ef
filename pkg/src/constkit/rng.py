"""Keyed counter-based random streams.

A stream is a Philox-4x64 generator whose 128-bit key is a BLAKE2b digest of
the master seed and a tuple of labels. Gaussians come from Box-Muller over the
stream's uniforms, so the draw order is fixed and independent of numpy's
normal-sampling algorithm.
"""

from __future__ import annotations

import hashlib
import math
from typing import Hashable, Sequence

import numpy as np


def _key(master_seed: int, labels: Sequence[Hashable]) -> int:
    text = "\x1f".join([str(int(master_seed))] + [str(x) for x in labels])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=16).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """Deterministic substream keyed by ``(master_seed, labels)``."""

    def __init__(self, master_seed: int, labels: tuple = ()):
        self.master_seed = int(master_seed)
        self.labels = tuple(labels)
        self._gen = np.random.Generator(np.random.Philox(key=_key(self.master_seed, self.labels)))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.master_seed}, labels={self.labels!r})"

    def uniform(self, n, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """Uniform doubles on [low, high); ``n`` may be a shape tuple."""
        u = self._gen.random(n)
        if low == 0.0 and high == 1.0:
            return u
        return low + (high - low) * u

    def normal(self, n: int) -> np.ndarray:
        """``n`` standard normal variates via Box-Muller, cosine branch first."""
        m = (n + 1) // 2
        u = self._gen.random((m, 2))
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - u in (0, 1]
        theta = 2.0 * math.pi * u[:, 1]
        z = np.empty((m, 2))
        z[:, 0] = r * np.cos(theta)
        z[:, 1] = r * np.sin(theta)
        return z.ravel()[:n]

    def complex_normal(self, n: int) -> np.ndarray:
        """Unit-variance circularly symmetric complex Gaussians (2n normals)."""
        z = self.normal(2 * n).reshape(n, 2)
        return (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2.0)

    def choice(self, probs: np.ndarray, n: int) -> np.ndarray:
        """Inverse-CDF sampling of ``n`` indices in stored order."""
        cdf = np.cumsum(probs)
        cdf /= cdf[-1]
        idx = np.searchsorted(cdf, self._gen.random(n), side="right")
        return np.minimum(idx, len(probs) - 1)

    def integers(self, low: int, high: int, n=None):
        """Integers on [low, high) from the stream's uniforms."""
        u = self._gen.random(n)
        out = low + np.floor(u * (high - low)).astype(np.int64)
        return np.minimum(out, high - 1) if n is not None else int(min(out, high - 1))


def derive_stream(master_seed: int, labels: tuple = ()) -> RngStream:
    return RngStream(master_seed, tuple(labels))
