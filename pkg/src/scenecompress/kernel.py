"""Gaussian RBF kernel on 3D positions with an LRU row cache.

All kernel values here use the same arithmetic (component-wise squared
differences summed in x, y, z order), so a cached row entry, a scalar
:func:`rbf` call and a dense Gram matrix agree bitwise.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from .config import DEFAULT_KERNEL_CACHE_MB

# elements per temporary block in the blocked routines (~16 MB of float64)
BLOCK_ELEMENTS = 1 << 21


def _rbf_from_diff(diff: np.ndarray, sigma: float) -> np.ndarray:
    # explicit component sum keeps the order fixed, so k(a, b) == k(b, a) bitwise
    sq = diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1] + diff[..., 2] * diff[..., 2]
    return np.exp(sq / (-2.0 * sigma * sigma))


def _rbf_block(xa: np.ndarray, xb: np.ndarray, sigma: float) -> np.ndarray:
    """``K[a, b]`` for two point sets; same arithmetic as :func:`_rbf_from_diff`."""
    sq = np.zeros((len(xa), len(xb)))
    tmp = np.empty_like(sq)
    for c in range(3):
        np.subtract(xb[None, :, c], xa[:, c, None], out=tmp)
        np.multiply(tmp, tmp, out=tmp)
        sq += tmp
    sq /= -2.0 * sigma * sigma
    return np.exp(sq, out=sq)


def rbf(xi, xj, sigma: float) -> float:
    """``exp(-||xi - xj||^2 / (2 sigma^2))``."""
    diff = np.asarray(xi, dtype=np.float64) - np.asarray(xj, dtype=np.float64)
    return float(_rbf_from_diff(diff.reshape(1, 3), sigma)[0])


def gram_matrix(positions: np.ndarray, sigma: float) -> np.ndarray:
    """Dense ``m x m`` kernel matrix. Only meant for small scenes."""
    x = np.asarray(positions, dtype=np.float64)
    return _rbf_from_diff(x[None, :, :] - x[:, None, :], sigma)


def kernel_weighted_sum(
    positions: np.ndarray, sigma: float, weights: np.ndarray, block: int = BLOCK_ELEMENTS
) -> np.ndarray:
    """Return ``K @ weights`` without forming ``K``.

    Only columns with nonzero weight are visited, and rows are processed in
    blocks so the temporaries stay below ``block`` elements.
    """
    x = np.asarray(positions, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    cols = np.flatnonzero(w)
    out = np.zeros(len(x))
    if cols.size == 0:
        return out
    xc = x[cols]
    wc = w[cols]
    step = max(1, block // cols.size)
    for start in range(0, len(x), step):
        stop = min(start + step, len(x))
        out[start:stop] = _rbf_block(x[start:stop], xc, sigma) @ wc
    return out


def cache_capacity(m: int, cache_mb: float = DEFAULT_KERNEL_CACHE_MB) -> int:
    """Rows of length ``m`` that fit in ``cache_mb`` megabytes, clamped to [1, m]."""
    rows = int(cache_mb * 2**20) // (8 * max(m, 1))
    return max(1, min(m, rows))


class KernelRowCache:
    """LRU cache of kernel rows ``K[i, :]`` for a fixed point set and bandwidth.

    Rows are returned read-only; callers must not keep them past the next
    :meth:`row` call if they rely on residency (eviction drops the reference,
    the array itself stays valid).
    """

    def __init__(self, positions: np.ndarray, sigma: float, capacity: int | None = None):
        if not (np.isfinite(sigma) and sigma > 0):
            raise ValueError(f"sigma must be > 0, got {sigma}")
        self.positions = np.ascontiguousarray(positions, dtype=np.float64)
        self.sigma = float(sigma)
        m = len(self.positions)
        self.capacity = cache_capacity(m) if capacity is None else int(capacity)
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self.evaluations = 0
        self.hits = 0

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def m(self) -> int:
        return len(self.positions)

    def __contains__(self, i: int) -> bool:
        return i in self._rows

    def compute_row(self, i: int) -> np.ndarray:
        self.evaluations += 1
        row = _rbf_from_diff(self.positions - self.positions[i], self.sigma)
        row.setflags(write=False)
        return row

    def row(self, i: int) -> np.ndarray:
        i = int(i)
        if not 0 <= i < self.m:
            raise IndexError(f"point index {i} out of range for {self.m} points")
        rows = self._rows
        r = rows.get(i)
        if r is not None:
            self.hits += 1
            rows.move_to_end(i)
            return r
        r = self.compute_row(i)
        rows[i] = r
        if len(rows) > self.capacity:
            rows.popitem(last=False)
        return r

    def nbytes(self) -> int:
        return sum(r.nbytes for r in self._rows.values())


def kernel_row(cache: KernelRowCache, i: int) -> np.ndarray:
    return cache.row(i)
