"""Rank-modulation channel: charges on ``n`` flash cells, Gaussian read
noise, and readout of the charge ranking."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .perm import Permutation, as_perm

_DEFAULT_LEVELS = {
    9: (1.5, 0.5),
    12: (1.5, 0.4),
}


def default_levels(n: int) -> tuple[float, ...]:
    """Charge levels ``1.5 + 0.5 i`` (n = 9) or ``1.5 + 0.4 i`` (n = 12).

    Built from integer tenths so each level is the double nearest its decimal value.
    """
    if n not in _DEFAULT_LEVELS:
        raise ValueError(f"no default charge levels for n={n}; pass levels explicitly")
    start, step = _DEFAULT_LEVELS[n]
    s10, d10 = round(start * 10), round(step * 10)
    return tuple((s10 + d10 * i) / 10 for i in range(n))


@dataclass(frozen=True)
class RmParams:
    """``sigma1`` is always applied; with probability ``p`` a cell also gets
    ``Normal(0, sigma2**2)``."""

    sigma1: float
    sigma2: float
    p: float
    levels: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if self.sigma1 < 0:
            raise ValueError("sigma1 must be non-negative")
        if not self.sigma2 > self.sigma1:
            raise ValueError("sigma2 must exceed sigma1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} is not a probability")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("levels must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.levels)

    @property
    def level_gap(self) -> float:
        return min(b - a for a, b in zip(self.levels, self.levels[1:]))


def encode_charges(p: Sequence[int], levels: Sequence[float]) -> np.ndarray:
    """Cell ``p_k`` gets ``levels[k]``: ``p`` lists cells from lowest to highest charge."""
    perm = as_perm(p)
    if len(levels) != len(perm):
        raise ValueError("levels and permutation differ in length")
    charges = np.empty(len(perm))
    charges[np.asarray(perm) - 1] = levels
    return charges


def encode_batch(codewords: np.ndarray, levels: Sequence[float]) -> np.ndarray:
    codewords = np.asarray(codewords, dtype=np.int64)
    charges = np.empty(codewords.shape)
    rows = np.arange(codewords.shape[0])[:, None]
    charges[rows, codewords - 1] = np.asarray(levels)[None, :]
    return charges


def perturb(charges: np.ndarray, params: RmParams, rng: np.random.Generator) -> np.ndarray:
    """Add read noise to a charge vector or a ``(B, n)`` batch.

    Draw order: the small-noise normals, the large-noise event uniforms,
    then the large-noise normals, each with the shape of ``charges``.
    Normals come from ``Generator.standard_normal``.
    """
    charges = np.asarray(charges, dtype=np.float64)
    small = rng.standard_normal(charges.shape) * params.sigma1
    hit = rng.random(charges.shape) < params.p
    large = rng.standard_normal(charges.shape) * params.sigma2
    return charges + small + np.where(hit, large, 0.0)


def read_ranking(charges: Sequence[float]) -> Permutation:
    """Cell indices (1-indexed) in increasing charge order; ties go to the lower index."""
    order = np.argsort(np.asarray(charges, dtype=np.float64), kind="stable")
    return tuple(int(k) + 1 for k in order)


def read_batch(charges: np.ndarray) -> np.ndarray:
    return np.argsort(charges, axis=1, kind="stable") + 1


def transmit_batch(codewords: np.ndarray, params: RmParams, rng: np.random.Generator) -> np.ndarray:
    """Write, perturb and read back a ``(B, n)`` batch; returns retrieved rankings."""
    return read_batch(perturb(encode_batch(codewords, params.levels), params, rng))
