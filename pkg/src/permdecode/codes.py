"""Permutation code families: Tenengolts, its even subcode, and the
three-way interleaved code for translocation errors."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .perm import (
    Permutation,
    as_perm,
    is_even,
    tenengolts_checksum,
    ulam_distances,
)

FAMILIES = ("tenengolts", "tenengolts_even", "interleaved")
MAX_EXHAUSTIVE_N = 10


@dataclass(frozen=True)
class CodeFamily:
    tag: str
    n: int

    def __post_init__(self):
        if self.tag not in FAMILIES:
            raise ValueError(f"unknown code family {self.tag!r}")
        if self.n < 2:
            raise ValueError("code length must be at least 2")
        if self.tag == "interleaved" and (self.n % 3 or self.n // 3 < 3):
            raise ValueError("interleaved code needs n divisible by 3 with n/3 >= 3")

    @property
    def label(self) -> str:
        suffix = {"tenengolts": "", "tenengolts_even": "e", "interleaved": "IL"}[self.tag]
        return f"C{self.n}{suffix}"


@dataclass(frozen=True)
class Codebook:
    """Lexicographically ordered codewords with reverse lookup.

    ``index`` is 1-based; ``codewords[index[c] - 1] == c``.
    """

    family: CodeFamily | None
    codewords: tuple[Permutation, ...]
    index: dict[Permutation, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        words = tuple(as_perm(c) for c in self.codewords)
        if words and len({len(c) for c in words}) != 1:
            raise ValueError("codewords of different lengths")
        if len(set(words)) != len(words):
            raise ValueError("duplicate codewords")
        object.__setattr__(self, "codewords", words)
        object.__setattr__(self, "index", {c: k for k, c in enumerate(words, start=1)})

    @classmethod
    def from_words(cls, words: Iterable[Sequence[int]], family: CodeFamily | None = None):
        return cls(family, tuple(sorted(as_perm(w) for w in words)))

    def __len__(self) -> int:
        return len(self.codewords)

    def __getitem__(self, k: int) -> Permutation:
        return self.codewords[k]

    def __iter__(self):
        return iter(self.codewords)

    def __contains__(self, p) -> bool:
        return tuple(p) in self.index

    @property
    def n(self) -> int:
        if self.family is not None:
            return self.family.n
        return len(self.codewords[0])

    def as_array(self) -> np.ndarray:
        """``(M, n)`` int64 array of codewords, rows in codebook order."""
        return np.array(self.codewords, dtype=np.int64).reshape(len(self), -1)


def _even_perms(m: int) -> list[Permutation]:
    return [p for p in itertools.permutations(range(1, m + 1)) if is_even(p)]


def build_interleaved(n: int, parts: Sequence[Sequence[int]]) -> Permutation:
    """Interleave three even permutations of ``1..m`` into a word of length ``3m``.

    Part ``t`` (0-based) carries the symbol class ``t*m+1 .. (t+1)*m`` and
    occupies positions ``t, t+3, t+6, ...`` (0-based).

    >>> build_interleaved(9, [(1, 2, 3)] * 3)
    (1, 4, 7, 2, 5, 8, 3, 6, 9)
    """
    if n % 3:
        raise ValueError("n must be divisible by 3")
    m = n // 3
    if len(parts) != 3:
        raise ValueError("need exactly three parts")
    word = [0] * n
    for t, part in enumerate(parts):
        part = as_perm(part)
        if len(part) != m:
            raise ValueError(f"part {t + 1} has length {len(part)}, expected {m}")
        if not is_even(part):
            raise ValueError(f"part {t + 1} {part} is odd")
        for k, x in enumerate(part):
            word[3 * k + t] = t * m + x
    return tuple(word)


def split_interleaved(p: Sequence[int]) -> list[Permutation] | None:
    """Undo :func:`build_interleaved`; ``None`` if ``p`` is not of that shape."""
    n = len(p)
    m = n // 3
    parts = []
    for t in range(3):
        part = tuple(x - t * m for x in p[t::3])
        if sorted(part) != list(range(1, m + 1)):
            return None
        parts.append(part)
    return parts


def is_member(p: Sequence[int], family: CodeFamily) -> bool:
    if len(p) != family.n:
        raise ValueError(f"length {len(p)} does not match code length {family.n}")
    p = as_perm(p)
    if family.tag == "interleaved":
        parts = split_interleaved(p)
        return parts is not None and all(is_even(q) for q in parts)
    if tenengolts_checksum(p) != 0:
        return False
    return family.tag == "tenengolts" or is_even(p)


def enumerate_code(family: CodeFamily) -> Codebook:
    """All codewords of ``family`` in lexicographic order.

    Tenengolts families are found by filtering all ``n!`` permutations, so
    ``n`` is capped at :data:`MAX_EXHAUSTIVE_N`. The interleaved code is
    built directly from its even parts.
    """
    n = family.n
    if family.tag == "interleaved":
        evens = _even_perms(n // 3)
        words = [build_interleaved(n, parts) for parts in itertools.product(evens, repeat=3)]
        return Codebook.from_words(words, family)
    if n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"n={n} too large for exhaustive enumeration (max {MAX_EXHAUSTIVE_N})")
    words = (p for p in itertools.permutations(range(1, n + 1)) if is_member(p, family))
    # itertools.permutations already yields lexicographic order
    return Codebook(family, tuple(words))


def interleaved_size(n: int) -> int:
    return (math.factorial(n // 3) // 2) ** 3


def _require_pairs(cb: Codebook) -> None:
    if len(cb) < 2:
        raise ValueError("need at least two codewords")


def min_hamming_distance(cb: Codebook) -> int:
    _require_pairs(cb)
    words = cb.as_array()
    best = words.shape[1]
    for k in range(len(words) - 1):
        d = (words[k + 1 :] != words[k]).sum(axis=1).min()
        best = min(best, int(d))
    return best


def min_ulam_distance(cb: Codebook) -> int:
    _require_pairs(cb)
    words = cb.as_array()
    d = ulam_distances(words, words)
    np.fill_diagonal(d, words.shape[1] + 1)
    return int(d.min())


def sample_codeword(cb: Codebook, rng: np.random.Generator) -> Permutation:
    if len(cb) == 0:
        raise ValueError("empty codebook")
    return cb.codewords[int(rng.integers(len(cb)))]


def sample_indices(cb: Codebook, size: int, rng: np.random.Generator) -> np.ndarray:
    """0-based codebook indices drawn uniformly; batched :func:`sample_codeword`."""
    if len(cb) == 0:
        raise ValueError("empty codebook")
    return rng.integers(len(cb), size=size)


def export_codebook(cb: Codebook) -> str:
    tag = cb.family.tag if cb.family else "custom"
    lines = [f"# family={tag} n={cb.n} size={len(cb)}"]
    lines += [" ".join(map(str, c)) for c in cb]
    return "\n".join(lines) + "\n"


def write_codebook(cb: Codebook, path: str | Path) -> None:
    Path(path).write_text(export_codebook(cb))


def read_codebook(path: str | Path) -> Codebook:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing codebook header")
    header = dict(kv.split("=", 1) for kv in lines[0][1:].split())
    words = [tuple(int(x) for x in ln.split()) for ln in lines[1:] if ln.strip()]
    if int(header["size"]) != len(words):
        raise ValueError("codebook size does not match header")
    family = None
    if header["family"] in FAMILIES:
        family = CodeFamily(header["family"], int(header["n"]))
    return Codebook(family, tuple(words))

