"""Deterministic counter-based sampling and chunked map-reduce.

Every Monte Carlo estimator in this package draws its randomness through
:class:`CounterStream`: draw ``j`` of sample ``i`` is a pure function of
``(seed, stream, i, j)``.  Estimators therefore reproduce bit-for-bit for a
fixed seed and configuration, no matter how the sample range is split
across worker threads.

Reductions are made schedule-independent by summing over fixed-size
canonical chunks: each chunk's partial sums are computed from exactly the
same sample slice regardless of thread count, and the partial sums are
combined in chunk order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

# Fixed chunk size; must never depend on thread count or total sample count,
# otherwise float reduction order (and thus the result) would change.
CHUNK = 1 << 15

_INV_2_53 = 2.0 ** -53


class CounterStream:
    """Counter-based uniform draws backed by Philox4x64.

    ``uniforms(start, count)`` returns a ``(count, draws_per_sample)``
    matrix of float64 in (0, 1]; row ``i`` depends only on
    ``(seed, stream, start + i)``.
    """

    def __init__(self, seed: int, stream: int, draws_per_sample: int):
        if draws_per_sample <= 0:
            raise ValueError("draws_per_sample must be positive")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream = int(stream) & 0xFFFFFFFFFFFFFFFF
        # Pad to a whole number of Philox blocks (4 uint64 per counter tick)
        # so every sample starts on a block boundary.
        self.draws_per_sample = int(draws_per_sample)
        self._padded = (self.draws_per_sample + 3) // 4 * 4

    def uniforms(self, start: int, count: int) -> np.ndarray:
        blocks_per_sample = self._padded // 4
        bg = np.random.Philox(key=[self.seed, self.stream],
                              counter=int(start) * blocks_per_sample)
        raw = bg.random_raw(count * self._padded)
        u = (raw >> np.uint64(11)).astype(np.float64) * _INV_2_53
        # Map 0 -> 2^-53 so log/Box-Muller transforms never see exact zero.
        np.maximum(u, _INV_2_53, out=u)
        return u.reshape(count, self._padded)[:, : self.draws_per_sample]


def standard_normals(u: np.ndarray, count: int) -> np.ndarray:
    """Box-Muller: consume ``2*ceil(count/2)`` uniform columns, return
    ``(len(u), count)`` standard normals."""
    pairs = (count + 1) // 2
    u1 = u[:, 0 : 2 * pairs : 2]
    u2 = u[:, 1 : 2 * pairs : 2]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = (2.0 * np.pi) * u2
    out = np.empty((u.shape[0], 2 * pairs))
    out[:, 0::2] = r * np.cos(theta)
    out[:, 1::2] = r * np.sin(theta)
    return out[:, :count]


def normals_needed(count: int) -> int:
    return 2 * ((count + 1) // 2)


def ball_points(normals: np.ndarray, radius_u: np.ndarray) -> np.ndarray:
    """Uniform points in the unit ball of R^n from n standard normals and one
    uniform (radius ~ u^(1/n)).  ``normals``: (B, n), ``radius_u``: (B,)."""
    n = normals.shape[-1]
    norm = np.sqrt(np.sum(normals * normals, axis=-1, keepdims=True))
    norm = np.maximum(norm, 1e-300)
    r = radius_u ** (1.0 / n)
    return normals / norm * r[..., None]


def chunked_reduce(
    total: int,
    worker: Callable[[int, int], dict[str, np.ndarray | float]],
    threads: int = 1,
) -> dict[str, np.ndarray]:
    """Apply ``worker(start, count)`` over canonical chunks of ``total``
    samples and sum the returned partials in chunk order.

    The chunk grid and the reduction order are fixed, so the result is
    identical for any ``threads`` value.
    """
    starts = list(range(0, total, CHUNK))
    jobs = [(s, min(CHUNK, total - s)) for s in starts]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda job: worker(*job), jobs))
    else:
        partials = [worker(*job) for job in jobs]
    out: dict[str, np.ndarray] = {}
    for key in partials[0]:
        stack = np.array([p[key] for p in partials])
        out[key] = np.sum(stack, axis=0)
    return out
