"""Matrix permanents and the transition amplitude sums built from them.

The amplitude for binary input pattern ``s`` to reach output occupation ``n``
is a sum over every way of assigning the occupied inputs to output slots,
which is exactly the permanent of the submatrix of ``U`` with the occupied
input columns and each output row ``k`` repeated ``n[k]`` times.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ConservationViolation, SizeExceeded

MAX_RYSER = 20
MAX_NAIVE = 9
# subset-mask batching allocates batch * k * 2^k complex numbers
_MAX_MASK_K = 12


def _square(matrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    return a


def permanent(matrix) -> complex:
    """Ryser's formula, visiting column subsets in Gray-code order.

    Each step adds or removes a single column from the running row sums, so
    the cost is O(2^M * M).
    """
    a = _square(matrix)
    m = a.shape[0]
    if m > MAX_RYSER:
        raise SizeExceeded(f"{m}x{m} permanent exceeds the {MAX_RYSER}x{MAX_RYSER} cap")
    if m == 0:
        return complex(1.0)
    if m == 1:
        return complex(a[0, 0])
    cols = [a[:, j].copy() for j in range(m)]
    row_sums = np.zeros(m, dtype=complex)
    total = 0j
    gray_prev = 0
    for g in range(1, 1 << m):
        gray = g ^ (g >> 1)
        flipped = gray ^ gray_prev
        j = flipped.bit_length() - 1
        if gray & flipped:
            row_sums += cols[j]
        else:
            row_sums -= cols[j]
        gray_prev = gray
        term = np.prod(row_sums)
        if gray.bit_count() & 1:
            total -= term
        else:
            total += term
    return complex(total * (-1) ** m)


def naive_permanent(matrix) -> complex:
    """Direct sum over all M! permutations. Reference oracle only."""
    a = _square(matrix)
    m = a.shape[0]
    if m > MAX_NAIVE:
        raise SizeExceeded(f"naive permanent limited to {MAX_NAIVE}x{MAX_NAIVE}, got {m}x{m}")
    total = 0j
    rows = range(m)
    for perm in itertools.permutations(rows):
        term = 1 + 0j
        for i in rows:
            term *= a[i, perm[i]]
        total += term
    return complex(total)


@lru_cache(maxsize=None)
def _ryser_masks(k: int) -> tuple[np.ndarray, np.ndarray]:
    subsets = np.arange(1, 1 << k)
    masks = ((subsets[None, :] >> np.arange(k)[:, None]) & 1).astype(float)
    sizes = masks.sum(axis=0)
    signs = np.where((k - sizes) % 2 == 0, 1.0, -1.0)
    return masks, signs


def permanents(mats: np.ndarray) -> np.ndarray:
    """Permanents of a stack of k x k matrices, shape (B, k, k) -> (B,).

    Vectorised Ryser over explicit subset masks; stacks with k above 12 fall
    back to the Gray-code kernel one matrix at a time.
    """
    mats = np.asarray(mats, dtype=complex)
    b, k = mats.shape[0], mats.shape[-1]
    if k == 0:
        return np.ones(b, dtype=complex)
    if k > _MAX_MASK_K:
        return np.array([permanent(m) for m in mats], dtype=complex)
    masks, signs = _ryser_masks(k)
    chunk = max(1, (1 << 22) // (k << k))
    out = np.empty(b, dtype=complex)
    for lo in range(0, b, chunk):
        row_sums = mats[lo:lo + chunk] @ masks  # (b, k, 2^k - 1)
        out[lo:lo + chunk] = np.prod(row_sums, axis=1) @ signs
    return out


def output_rows(n: Sequence[int]) -> list[int]:
    """Row index list with output mode k repeated n[k] times."""
    return [k for k, nk in enumerate(n) for _ in range(int(nk))]


def compute_S(unitary, s, n: Sequence[int]) -> complex:
    """Amplitude sum for binary input ``s`` and output occupation ``n``.

    ``unitary`` may be a ``Unitary`` or a bare array, ``s`` an
    ``OccupationVector`` or a 0/1 sequence.
    """
    u = np.asarray(getattr(unitary, "entries", unitary))
    bits = tuple(getattr(s, "bits", s))
    n = tuple(int(x) for x in n)
    if len(bits) != u.shape[1] or len(n) != u.shape[0]:
        raise ValueError("occupation lengths must match the matrix dimension")
    if any(x < 0 for x in n):
        raise ValueError(f"negative output occupation in {n}")
    cols = [i for i, b in enumerate(bits) if b]
    if len(cols) != sum(n):
        raise ConservationViolation(f"{len(cols)} photons in, {sum(n)} photons out")
    sub = u[np.ix_(output_rows(n), cols)]
    return permanent(sub)


def fock_norm(n: Sequence[int]) -> int:
    """prod_k n_k!"""
    return math.prod(math.factorial(int(x)) for x in n)
