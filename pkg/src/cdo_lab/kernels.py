"""Hot loops, each with a numba kernel and a pure-numpy fallback.

The public entry points dispatch on :data:`cdo_lab._jit.JIT_ENABLED`.  Both
variants are importable under ``numba_*`` / ``numpy_*`` names so tests and the
benchmark can compare them directly.
"""

from __future__ import annotations

import numpy as np

from ._jit import JIT_ENABLED, njit
from .errors import BudgetError

# ---------------------------------------------------------------------------
# group-by-sum over int64 rows (twisted convolution accumulator)
# ---------------------------------------------------------------------------

_EMPTY = np.int64(-1)


@njit(cache=True)
def _row_hash(keys, i):
    h = np.uint64(1469598103934665603)
    for j in range(keys.shape[1]):
        h ^= np.uint64(keys[i, j] & 0xFFFFFFFFFFFF) + np.uint64(0x9E3779B97F4A7C15)
        h *= np.uint64(1099511628211)
        h ^= h >> np.uint64(29)
    return h


@njit(cache=True)
def _hash_accumulate(keys, vals, start, tab_keys, tab_vals, tab_slot, count, max_load):
    """Insert rows ``keys[start:]`` into an open-addressing table.

    Returns ``(next_row, count)``; stops early once ``count`` reaches
    ``max_load`` so the caller can grow the table.
    """
    cap = tab_slot.shape[0]
    mask = np.uint64(cap - 1)
    width = keys.shape[1]
    n = keys.shape[0]
    i = start
    while i < n:
        if count >= max_load:
            return i, count
        slot = np.int64(_row_hash(keys, i) & mask)
        while True:
            pos = tab_slot[slot]
            if pos < 0:
                tab_slot[slot] = count
                for j in range(width):
                    tab_keys[count, j] = keys[i, j]
                tab_vals[count] = vals[i]
                count += 1
                break
            same = True
            for j in range(width):
                if tab_keys[pos, j] != keys[i, j]:
                    same = False
                    break
            if same:
                tab_vals[pos] += vals[i]
                break
            slot = np.int64((np.uint64(slot) + np.uint64(1)) & mask)
        i += 1
    return i, count


class _NumbaRowAccumulator:
    def __init__(self, width: int, budget: int, capacity: int = 1024):
        self.width = width
        self.budget = budget
        self.count = 0
        self._alloc(capacity)

    def _alloc(self, capacity):
        self.keys = np.empty((capacity // 2 + 1, self.width), dtype=np.int64)
        self.vals = np.zeros(capacity // 2 + 1, dtype=np.complex128)
        self.slot = np.full(capacity, -1, dtype=np.int64)

    def _grow(self):
        old_keys, old_vals, n = self.keys[: self.count], self.vals[: self.count], self.count
        self._alloc(self.slot.shape[0] * 2)
        self.count = 0
        _, self.count = _hash_accumulate(
            old_keys, old_vals, 0, self.keys, self.vals, self.slot, 0, self.keys.shape[0]
        )
        assert self.count == n

    def add(self, keys: np.ndarray, vals: np.ndarray) -> None:
        keys = np.ascontiguousarray(keys, dtype=np.int64)
        vals = np.ascontiguousarray(vals, dtype=np.complex128)
        start = 0
        while start < keys.shape[0]:
            max_load = min(self.keys.shape[0] - 1, self.budget + 1)
            start, self.count = _hash_accumulate(
                keys, vals, start, self.keys, self.vals, self.slot, self.count, max_load
            )
            if self.count > self.budget:
                raise BudgetError(f"support exceeds budget of {self.budget} coefficients")
            if start < keys.shape[0]:
                self._grow()

    def result(self) -> tuple[np.ndarray, np.ndarray]:
        return self.keys[: self.count].copy(), self.vals[: self.count].copy()


def _unique_rows_sum(keys: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if keys.shape[0] == 0:
        return keys, vals
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    n = uniq.shape[0]
    sums = np.bincount(inverse, weights=vals.real, minlength=n) + 1j * np.bincount(
        inverse, weights=vals.imag, minlength=n
    )
    return uniq, sums


class _NumpyRowAccumulator:
    def __init__(self, width: int, budget: int):
        self.width = width
        self.budget = budget
        self.keys = np.empty((0, width), dtype=np.int64)
        self.vals = np.empty(0, dtype=np.complex128)

    def add(self, keys: np.ndarray, vals: np.ndarray) -> None:
        part_k, part_v = _unique_rows_sum(np.asarray(keys, dtype=np.int64), np.asarray(vals, dtype=np.complex128))
        self.keys, self.vals = _unique_rows_sum(
            np.concatenate([self.keys, part_k]), np.concatenate([self.vals, part_v])
        )
        if self.keys.shape[0] > self.budget:
            raise BudgetError(f"support exceeds budget of {self.budget} coefficients")

    def result(self) -> tuple[np.ndarray, np.ndarray]:
        return self.keys, self.vals


def numba_row_accumulator(width: int, budget: int):
    return _NumbaRowAccumulator(width, budget)


def numpy_row_accumulator(width: int, budget: int):
    return _NumpyRowAccumulator(width, budget)


def row_accumulator(width: int, budget: int):
    """Accumulator summing complex values per distinct int64 key row."""
    if JIT_ENABLED:
        return _NumbaRowAccumulator(width, budget)
    return _NumpyRowAccumulator(width, budget)


def sort_rows(keys: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lexicographic row order, so both backends return identical layouts."""
    if keys.shape[0] == 0:
        return keys, vals
    order = np.lexsort(keys.T[::-1])
    return keys[order], vals[order]


# ---------------------------------------------------------------------------
# segment maximum (envelope extraction)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _segment_max(ids, values, n_segments):
    out = np.zeros(n_segments, dtype=np.float64)
    for i in range(ids.shape[0]):
        v = values[i]
        if v > out[ids[i]]:
            out[ids[i]] = v
    return out


def numba_segment_max(ids, values, n_segments):
    return _segment_max(np.asarray(ids, dtype=np.int64), np.asarray(values, dtype=np.float64), n_segments)


def numpy_segment_max(ids, values, n_segments):
    out = np.zeros(n_segments, dtype=np.float64)
    np.maximum.at(out, np.asarray(ids, dtype=np.int64), np.asarray(values, dtype=np.float64))
    return out


def segment_max(ids, values, n_segments: int) -> np.ndarray:
    """Per-segment maximum of nonnegative values (empty segments give 0)."""
    if JIT_ENABLED:
        return numba_segment_max(ids, values, n_segments)
    return numpy_segment_max(ids, values, n_segments)


# ---------------------------------------------------------------------------
# sparse matvec (matrix-free finite sections)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _coo_matvec(rows, cols, vals, x, n_rows):
    out = np.zeros(n_rows, dtype=np.complex128)
    for k in range(rows.shape[0]):
        out[rows[k]] += vals[k] * x[cols[k]]
    return out


@njit(cache=True)
def _coo_rmatvec(rows, cols, vals, x, n_cols):
    out = np.zeros(n_cols, dtype=np.complex128)
    for k in range(rows.shape[0]):
        out[cols[k]] += np.conj(vals[k]) * x[rows[k]]
    return out


def _bincount_complex(idx, weights, n):
    return np.bincount(idx, weights=weights.real, minlength=n) + 1j * np.bincount(
        idx, weights=weights.imag, minlength=n
    )


def numba_matvec(rows, cols, vals, x, n_rows):
    return _coo_matvec(rows, cols, vals, np.asarray(x, dtype=np.complex128), n_rows)


def numba_rmatvec(rows, cols, vals, x, n_cols):
    return _coo_rmatvec(rows, cols, vals, np.asarray(x, dtype=np.complex128), n_cols)


def numpy_matvec(rows, cols, vals, x, n_rows):
    return _bincount_complex(rows, vals * np.asarray(x)[cols], n_rows)


def numpy_rmatvec(rows, cols, vals, x, n_cols):
    return _bincount_complex(cols, np.conj(vals) * np.asarray(x)[rows], n_cols)


def matvec(rows, cols, vals, x, n_rows: int) -> np.ndarray:
    """``M @ x`` for M given as COO triplets."""
    if JIT_ENABLED:
        return numba_matvec(rows, cols, vals, x, n_rows)
    return numpy_matvec(rows, cols, vals, x, n_rows)


def rmatvec(rows, cols, vals, x, n_cols: int) -> np.ndarray:
    """``M^H @ x`` for M given as COO triplets."""
    if JIT_ENABLED:
        return numba_rmatvec(rows, cols, vals, x, n_cols)
    return numpy_rmatvec(rows, cols, vals, x, n_cols)
