"""Power-line-communication channel at the demodulator-output level.

A codeword is sent as one frequency per time slot. The receiver sees an
``n x width`` binary matrix (rows are frequencies, columns are time slots)
that may suffer from

* background noise: independent bit flips,
* impulse noise: a whole transmitted column received as ones,
* permanent frequency disturbance: a whole row received as ones,
* insertions and deletions of whole columns (loss of synchronization).

Two paths produce channel matrices. :func:`apply_error_pattern` applies an
explicit :class:`PlcErrorPattern` one step at a time; :func:`transmit_batch`
samples patterns for many codewords at once with array operations. Every
sampled batch can be replayed through the scalar path via
:meth:`BatchPattern.pattern`.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .perm import as_perm


@dataclass(frozen=True)
class PlcParams:
    """Channel parameters. Probabilities are per bit (``p_bg``), per
    transmitted column (``p_im``), per row (``p_pfd``), per insertion trial
    (``p_i``) and per queued symbol (``p_d``)."""

    p_bg: float = 0.0
    p_im: float = 0.0
    p_pfd: float = 0.0
    p_i: float = 0.0
    p_d: float = 0.0
    l_max: int = 1
    c_max: int = 0

    def __post_init__(self):
        for name in ("p_bg", "p_im", "p_pfd", "p_i", "p_d"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
        if self.p_i + self.p_d > 1.0 or (self.p_i + self.p_d == 1.0 and self.p_i > 0):
            raise ValueError("p_i + p_d must stay below 1")
        if self.l_max < 0:
            raise ValueError("l_max must be non-negative")
        if self.c_max < 1:
            raise ValueError("c_max must be positive")

    @classmethod
    def synchronized(cls, n: int, p_bg=0.0, p_im=0.0, p_pfd=0.0) -> PlcParams:
        return cls(p_bg=p_bg, p_im=p_im, p_pfd=p_pfd, p_i=0.0, p_d=0.0, l_max=1, c_max=n)

    @property
    def p_t(self) -> float:
        return 1.0 - self.p_i - self.p_d

    @property
    def is_synchronized(self) -> bool:
        return self.p_i == 0.0 and self.p_d == 0.0

    def full_width(self, n: int) -> int:
        return n + self.l_max * (n + 1)

    def check_length(self, n: int) -> None:
        if self.c_max > self.full_width(n):
            raise ValueError(f"c_max={self.c_max} exceeds n + l_max*(n+1) = {self.full_width(n)}")


@dataclass(frozen=True)
class ChannelMatrix:
    bits: np.ndarray
    occupied: int

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]


@dataclass(frozen=True)
class PlcErrorPattern:
    """Explicit error event. All indices are 1-indexed.

    ``insertions`` maps a slot ``k`` in ``1..n+1`` to the symbols inserted
    just before ``x_k`` (slot ``n+1`` is after the last symbol).
    ``bg_flips`` and ``impulse_cols`` refer to columns of the occupied
    sequence, after insertions and deletions are resolved.
    """

    insertions: Mapping[int, Sequence[int]] = field(default_factory=dict)
    deletions: frozenset[int] = frozenset()
    bg_flips: frozenset[tuple[int, int]] = frozenset()
    impulse_cols: frozenset[int] = frozenset()
    pfd_rows: frozenset[int] = frozenset()


def apply_error_pattern(p: Sequence[int], pat: PlcErrorPattern, params: PlcParams) -> ChannelMatrix:
    perm = as_perm(p)
    n = len(perm)
    params.check_length(n)
    if any(not 1 <= k <= n for k in pat.deletions):
        raise ValueError("deletion index out of range")
    for slot, syms in pat.insertions.items():
        if not 1 <= slot <= n + 1:
            raise ValueError(f"insertion slot {slot} out of range 1..{n + 1}")
        if len(syms) > params.l_max:
            raise ValueError(f"{len(syms)} insertions in slot {slot} exceed l_max={params.l_max}")
        if any(not 1 <= s <= n for s in syms):
            raise ValueError("inserted symbol out of range")

    timeline: list[int] = []
    for k in range(1, n + 2):
        timeline.extend(pat.insertions.get(k, ()))
        if k <= n and k not in pat.deletions:
            timeline.append(perm[k - 1])
    occupied = len(timeline)

    width = params.full_width(n)
    bits = np.zeros((n, width), dtype=np.uint8)
    for c, s in enumerate(timeline):
        bits[s - 1, c] = 1
    for r, c in pat.bg_flips:
        if not (1 <= r <= n and 1 <= c <= occupied):
            raise ValueError(f"flip ({r}, {c}) outside the occupied {n}x{occupied} block")
        bits[r - 1, c - 1] ^= 1
    for c in pat.impulse_cols:
        if not 1 <= c <= occupied:
            raise ValueError(f"impulse column {c} outside occupied width {occupied}")
        bits[:, c - 1] = 1
    for r in pat.pfd_rows:
        if not 1 <= r <= n:
            raise ValueError(f"disturbed row {r} out of range")
        bits[r - 1, :occupied] = 1
    return ChannelMatrix(bits[:, : params.c_max].copy(), min(occupied, params.c_max))


@dataclass
class BatchPattern:
    """Sampled error events for a batch, in array form.

    Column-indexed arrays use the compacted (occupied) timeline of width
    ``n + l_max*(n+1)``; entries past ``occupied[b]`` are padding.
    """

    ins_count: np.ndarray  # (B, n+1) insertions per slot
    ins_sym: np.ndarray  # (B, n+1, l_max) inserted symbols, 1-indexed
    deleted: np.ndarray  # (B, n) bool
    symbols: np.ndarray  # (B, W) column symbol, 0 for padding
    transmitted: np.ndarray  # (B, W) bool, column came from the codeword
    occupied: np.ndarray  # (B,)
    flips: np.ndarray  # (B, n, W) bool, already restricted to transmitted columns
    impulse: np.ndarray  # (B, W) bool, already restricted to transmitted columns
    pfd: np.ndarray  # (B, n) bool

    def pattern(self, b: int) -> PlcErrorPattern:
        """The explicit pattern for batch row ``b``."""
        n1 = self.ins_count.shape[1]
        insertions = {
            k + 1: [int(s) for s in self.ins_sym[b, k, : self.ins_count[b, k]]]
            for k in range(n1)
            if self.ins_count[b, k]
        }
        rows, cols = np.nonzero(self.flips[b])
        return PlcErrorPattern(
            insertions=insertions,
            deletions=frozenset(int(k) + 1 for k in np.flatnonzero(self.deleted[b])),
            bg_flips=frozenset((int(r) + 1, int(c) + 1) for r, c in zip(rows, cols)),
            impulse_cols=frozenset(int(c) + 1 for c in np.flatnonzero(self.impulse[b])),
            pfd_rows=frozenset(int(r) + 1 for r in np.flatnonzero(self.pfd[b])),
        )


def sample_patterns(codewords: np.ndarray, params: PlcParams, rng: np.random.Generator) -> BatchPattern:
    """Draw error events for a ``(B, n)`` batch of codewords.

    Draw order per call: insertion trials, inserted symbols, deletions,
    bit flips, impulses, disturbances. Insertions in a slot are repeated
    Bernoulli(p_i) trials, stopping at the first failure or at ``l_max``.
    """
    codewords = np.asarray(codewords, dtype=np.int64)
    b, n = codewords.shape
    params.check_length(n)
    lm = params.l_max
    width = params.full_width(n)

    trials = rng.random((b, n + 1, lm)) < params.p_i
    ins_count = np.cumprod(trials, axis=2).sum(axis=2)
    ins_sym = rng.integers(1, n + 1, size=(b, n + 1, lm))
    deleted = rng.random((b, n)) < params.p_d

    # Uncompacted timeline: per slot, l_max insertion cells then the queued symbol.
    slot_len = lm + 1
    raw_sym = np.zeros((b, (n + 1) * slot_len), dtype=np.int64)
    raw_valid = np.zeros_like(raw_sym, dtype=bool)
    raw_tx = np.zeros_like(raw_valid)
    for k in range(n + 1):
        base = k * slot_len
        raw_sym[:, base : base + lm] = ins_sym[:, k, :]
        raw_valid[:, base : base + lm] = np.arange(lm)[None, :] < ins_count[:, k : k + 1]
        if k < n:
            raw_sym[:, base + lm] = codewords[:, k]
            raw_valid[:, base + lm] = ~deleted[:, k]
            raw_tx[:, base + lm] = ~deleted[:, k]
    # the last slot has no queued symbol; drop its cell to get width n + l_max*(n+1)
    raw_sym, raw_valid, raw_tx = raw_sym[:, :width], raw_valid[:, :width], raw_tx[:, :width]

    order = np.argsort(~raw_valid, axis=1, kind="stable")
    valid = np.take_along_axis(raw_valid, order, axis=1)
    symbols = np.where(valid, np.take_along_axis(raw_sym, order, axis=1), 0)
    transmitted = np.take_along_axis(raw_tx, order, axis=1)
    occupied = valid.sum(axis=1)

    flips = (rng.random((b, n, width)) < params.p_bg) & transmitted[:, None, :]
    impulse = (rng.random((b, width)) < params.p_im) & transmitted
    pfd = rng.random((b, n)) < params.p_pfd
    return BatchPattern(ins_count, ins_sym, deleted, symbols, transmitted, occupied, flips, impulse, pfd)


def render(batch: BatchPattern, c_max: int) -> np.ndarray:
    """Channel matrices ``(B, n, c_max)`` for a sampled batch."""
    b, n, width = batch.flips.shape
    bits = np.zeros((b, n, width), dtype=np.uint8)
    bb, cc = np.nonzero(batch.symbols)
    bits[bb, batch.symbols[bb, cc] - 1, cc] = 1
    bits ^= batch.flips.astype(np.uint8)
    bits[np.broadcast_to(batch.impulse[:, None, :], bits.shape)] = 1
    in_use = np.arange(width)[None, :] < batch.occupied[:, None]
    bits[batch.pfd[:, :, None] & in_use[:, None, :]] = 1
    return np.ascontiguousarray(bits[:, :, :c_max])


def transmit_batch(codewords: np.ndarray, params: PlcParams, rng: np.random.Generator) -> np.ndarray:
    """Pass a ``(B, n)`` batch through the channel; returns ``(B, n, c_max)`` uint8."""
    return render(sample_patterns(codewords, params, rng), params.c_max)


def transmit(p: Sequence[int], params: PlcParams, rng: np.random.Generator) -> ChannelMatrix:
    perm = as_perm(p)
    batch = sample_patterns(np.array([perm]), params, rng)
    return ChannelMatrix(render(batch, params.c_max)[0], int(min(batch.occupied[0], params.c_max)))


def transmit_sync(p: Sequence[int], params: PlcParams, rng: np.random.Generator) -> ChannelMatrix:
    """:func:`transmit` restricted to the synchronized channel (square output)."""
    if not params.is_synchronized:
        raise ValueError("synchronized channel requires p_i = p_d = 0")
    if params.c_max != len(p):
        raise ValueError("synchronized channel requires c_max = n")
    return transmit(p, params, rng)
