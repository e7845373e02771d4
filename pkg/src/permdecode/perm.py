"""Permutation primitives.

Permutations are plain tuples of the symbols ``1..n`` in one-line notation.
Every position argument at this module's boundary is 1-indexed, the same
way the symbols are.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

Permutation = tuple[int, ...]


def as_perm(p: Sequence[int]) -> Permutation:
    """Validate ``p`` and return it as a tuple of ints.

    :raises ValueError: if ``p`` is not a permutation of ``1..len(p)``
    """
    perm = tuple(int(x) for x in p)
    n = len(perm)
    if n < 1 or sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"{perm!r} is not a permutation of 1..{n}")
    return perm


def identity(n: int) -> Permutation:
    return tuple(range(1, n + 1))


def _check_pair(p: Sequence[int], q: Sequence[int]) -> None:
    if len(p) != len(q):
        raise ValueError(f"length mismatch: {len(p)} != {len(q)}")


def inversions(p: Sequence[int]) -> int:
    """Number of pairs ``i < j`` with ``p[i] > p[j]``."""
    n = len(p)
    return sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])


def parity(p: Sequence[int]) -> str:
    """Return ``"even"`` or ``"odd"``.

    Counted through the cycle decomposition: a permutation with ``c`` cycles
    on ``n`` points is a product of ``n - c`` transpositions.
    """
    perm = as_perm(p)
    n = len(perm)
    seen = [False] * n
    cycles = 0
    for start in range(n):
        if seen[start]:
            continue
        cycles += 1
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k] - 1
    return "even" if (n - cycles) % 2 == 0 else "odd"


def is_even(p: Sequence[int]) -> bool:
    return parity(p) == "even"


def alpha_vector(p: Sequence[int]) -> tuple[int, ...]:
    """Ascent indicator: entry ``i`` is 1 iff ``x_{i+1} >= x_i``."""
    return tuple(1 if p[i + 1] >= p[i] else 0 for i in range(len(p) - 1))


def tenengolts_checksum(p: Sequence[int]) -> int:
    """``sum(i * alpha_i for i in 1..n-1) mod n``."""
    n = len(p)
    return sum(i * a for i, a in enumerate(alpha_vector(p), start=1)) % n


def apply_translocation(p: Sequence[int], i: int, j: int) -> Permutation:
    """Move the symbol at position ``i`` to position ``j`` (both 1-indexed).

    Symbols between the two positions shift by one to close the gap.

    >>> apply_translocation((1, 2, 3, 4, 5), 1, 4)
    (2, 3, 4, 1, 5)
    """
    perm = list(p)
    n = len(perm)
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"positions ({i}, {j}) out of range 1..{n}")
    if i == j:
        raise ValueError("translocation needs distinct positions")
    x = perm.pop(i - 1)
    perm.insert(j - 1, x)
    return tuple(perm)


def hamming_distance(p: Sequence[int], q: Sequence[int]) -> int:
    _check_pair(p, q)
    return sum(1 for a, b in zip(p, q) if a != b)


def lcs_length(a: Sequence[int], b: Sequence[int]) -> int:
    """Longest common subsequence length by the quadratic table."""
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for k, y in enumerate(b):
            if x == y:
                cur.append(prev[k] + 1)
            else:
                cur.append(max(prev[k + 1], cur[k]))
        prev = cur
    return prev[-1]


def ulam_distance(p: Sequence[int], q: Sequence[int]) -> int:
    """``n - LCS(p, q)``; the translocation edit distance."""
    _check_pair(p, q)
    return len(p) - lcs_length(p, q)


def perm_to_matrix(p: Sequence[int]) -> np.ndarray:
    """Embed ``p`` as an ``n x n`` 0/1 matrix with a one at row ``x_c``, column ``c``."""
    perm = as_perm(p)
    n = len(perm)
    m = np.zeros((n, n), dtype=np.uint8)
    m[np.asarray(perm) - 1, np.arange(n)] = 1
    return m


def matrix_to_perm(m: np.ndarray) -> Permutation:
    """Inverse of :func:`perm_to_matrix`.

    :raises ValueError: if some row or column does not hold exactly one 1
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.isin(m, (0, 1)).all():
        raise ValueError("matrix is not binary")
    if (m.sum(axis=0) != 1).any() or (m.sum(axis=1) != 1).any():
        raise ValueError("not a permutation matrix")
    return tuple(int(r) + 1 for r in m.argmax(axis=0))


def perms_to_matrices(perms: np.ndarray) -> np.ndarray:
    """Batched :func:`perm_to_matrix` for an ``(B, n)`` array of 1-indexed rows."""
    perms = np.asarray(perms)
    b, n = perms.shape
    out = np.zeros((b, n, n), dtype=np.uint8)
    out[np.arange(b)[:, None], perms - 1, np.arange(n)[None, :]] = 1
    return out


def ulam_distances(words: np.ndarray, codewords: np.ndarray) -> np.ndarray:
    """Ulam distance of every word against every codeword.

    :param words: ``(B, n)`` array of permutations
    :param codewords: ``(M, n)`` array of permutations
    :return: ``(B, M)`` int array

    For permutations the LCS equals the longest increasing subsequence of
    ``pos_c[w_k]``, where ``pos_c`` maps a symbol to its position in the
    codeword. The LIS is computed with the quadratic table, vectorized over
    all ``B * M`` pairs.
    """
    words = np.asarray(words, dtype=np.int64)
    codewords = np.asarray(codewords, dtype=np.int64)
    b, n = words.shape
    m = codewords.shape[0]
    pos = np.empty_like(codewords)
    pos[np.arange(m)[:, None], codewords - 1] = np.arange(n)[None, :]
    # seq[b, m, k] = position in codeword m of the k-th symbol of word b
    seq = pos[:, words - 1].transpose(1, 0, 2)
    best = np.ones((b, m, n), dtype=np.int64)
    for k in range(1, n):
        for j in range(k):
            ok = seq[:, :, j] < seq[:, :, k]
            cand = np.where(ok, best[:, :, j] + 1, 1)
            np.maximum(best[:, :, k], cand, out=best[:, :, k])
    return n - best.max(axis=2)
