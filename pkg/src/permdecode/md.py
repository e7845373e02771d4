"""Minimum-distance baseline decoders.

For the synchronized PLC channel the received ``n x n`` matrix is compared
against the permutation matrix of every codeword, optionally after
dropping all-one rows and columns as erasures. For rank modulation the
retrieved ranking is matched to the Ulam-nearest codeword.

Ties always go to the lowest codebook index.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .codes import Codebook
from .perm import Permutation, as_perm, perms_to_matrices, ulam_distances


@dataclass(frozen=True)
class ErasureSets:
    rows: frozenset[int]  # 1-indexed
    cols: frozenset[int]


@dataclass(frozen=True)
class DecodeResult:
    codeword: Permutation
    index: int  # 1-based codebook position
    distance: int
    tie: bool


def _square(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square channel matrix, got shape {m.shape}")
    return m


def detect_erasures(m) -> ErasureSets:
    m = _square(getattr(m, "bits", m))
    return ErasureSets(
        rows=frozenset(int(r) + 1 for r in np.flatnonzero(m.all(axis=1))),
        cols=frozenset(int(c) + 1 for c in np.flatnonzero(m.all(axis=0))),
    )


def _pick(cb: Codebook, dist: np.ndarray) -> DecodeResult:
    k = int(np.argmin(dist))
    best = dist[k]
    return DecodeResult(cb[k], k + 1, int(best), bool((dist == best).sum() > 1))


def _require(cb: Codebook, n: int) -> None:
    if len(cb) == 0:
        raise ValueError("empty codebook")
    if cb.n != n:
        raise ValueError(f"codebook length {cb.n} does not match input length {n}")


def md_decode_erasure(m, cb: Codebook) -> DecodeResult:
    """Nearest codeword in Hamming distance after deleting erased rows/columns."""
    m = _square(getattr(m, "bits", m)).astype(np.uint8)
    _require(cb, m.shape[0])
    er = detect_erasures(m)
    keep_r = [r for r in range(m.shape[0]) if r + 1 not in er.rows]
    keep_c = [c for c in range(m.shape[1]) if c + 1 not in er.cols]
    ref = perms_to_matrices(cb.as_array())[:, keep_r][:, :, keep_c]
    sub = m[np.ix_(keep_r, keep_c)]
    return _pick(cb, (ref != sub[None]).sum(axis=(1, 2)))


def md_decode_plain(m, cb: Codebook) -> DecodeResult:
    """Nearest codeword in entrywise Hamming distance, no erasure handling."""
    m = _square(getattr(m, "bits", m)).astype(np.uint8)
    _require(cb, m.shape[0])
    ref = perms_to_matrices(cb.as_array())
    return _pick(cb, (ref != m[None]).sum(axis=(1, 2)))


def ulam_nearest(w: Sequence[int], cb: Codebook) -> DecodeResult:
    w = as_perm(w)
    _require(cb, len(w))
    return _pick(cb, ulam_distances(np.array([w]), cb.as_array())[0])


def _chunks(total: int, per_item: int, budget: int = 1 << 24):
    step = max(1, budget // max(per_item, 1))
    for start in range(0, total, step):
        yield slice(start, min(total, start + step))


def md_distances_batch(mats: np.ndarray, codewords: np.ndarray, erasure: bool) -> np.ndarray:
    """Distances ``(B, M)`` from each received matrix to each codeword matrix.

    A permutation matrix has one 1 per column, so the Hamming distance to
    ``m`` is ``ones(m) + n - 2 * sum_i m[pi_i, i]``, restricted to kept rows
    and columns when erasures are removed.
    """
    mats = np.asarray(mats, dtype=np.int64)
    b, n, _ = mats.shape
    cols = np.arange(n)
    hits = mats[:, codewords - 1, cols]  # (B, M, n)
    if not erasure:
        return mats.sum(axis=(1, 2))[:, None] + n - 2 * hits.sum(axis=2)
    keep_r = ~mats.astype(bool).all(axis=2)  # (B, n)
    keep_c = ~mats.astype(bool).all(axis=1)
    ones = (mats * keep_r[:, :, None] * keep_c[:, None, :]).sum(axis=(1, 2))
    live = keep_r[:, codewords - 1] & keep_c[:, None, :]  # (B, M, n)
    return ones[:, None] + live.sum(axis=2) - 2 * (hits * live).sum(axis=2)


def md_decode_batch(mats: np.ndarray, cb: Codebook, erasure: bool = False) -> np.ndarray:
    """Decode ``(B, n, n)`` matrices; returns ``(B, n)`` decoded codewords."""
    mats = np.asarray(mats)
    _require(cb, mats.shape[1])
    if mats.shape[1] != mats.shape[2]:
        raise ValueError("minimum-distance decoding needs square matrices")
    words = cb.as_array()
    out = np.empty((mats.shape[0], words.shape[1]), dtype=np.int64)
    for sl in _chunks(mats.shape[0], len(words) * words.shape[1] * 4):
        out[sl] = words[md_distances_batch(mats[sl], words, erasure).argmin(axis=1)]
    return out


def ulam_decode_batch(received: np.ndarray, cb: Codebook) -> np.ndarray:
    """Ulam-nearest codewords for a ``(B, n)`` batch of retrieved rankings."""
    received = np.asarray(received)
    _require(cb, received.shape[1])
    words = cb.as_array()
    out = np.empty_like(received, dtype=np.int64)
    for sl in _chunks(received.shape[0], len(words) * words.shape[1] * 2):
        out[sl] = words[ulam_distances(received[sl], words).argmin(axis=1)]
    return out
