import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from permdecode.perm import (
    alpha_vector,
    apply_translocation,
    as_perm,
    hamming_distance,
    identity,
    matrix_to_perm,
    parity,
    perm_to_matrix,
    perms_to_matrices,
    tenengolts_checksum,
    ulam_distance,
    ulam_distances,
)

from .conftest import all_perms


def inversion_parity(p):
    inv = sum(1 for i, j in itertools.combinations(range(len(p)), 2) if p[i] > p[j])
    return "even" if inv % 2 == 0 else "odd"


def brute_lcs(p, q):
    """Longest common subsequence by trying subsets of p, longest first."""
    for k in range(len(p), 0, -1):
        for sub in itertools.combinations(p, k):
            it = iter(q)
            if all(x in it for x in sub):
                return k
    return 0


perms = st.integers(2, 8).flatmap(lambda n: st.permutations(list(range(1, n + 1))))


def perm_pairs():
    return st.integers(2, 7).flatmap(
        lambda n: st.tuples(st.permutations(list(range(1, n + 1))), st.permutations(list(range(1, n + 1))))
    )


@pytest.mark.parametrize(
    "p, expected",
    [((1, 2, 3, 4, 5, 6), "even"), ((2, 1, 3, 4, 5, 6), "odd"), ((1, 5, 6, 2, 3, 4), "even")],
)
def test_parity_examples(p, expected):
    assert parity(p) == expected


def test_parity_matches_inversion_count_exhaustively():
    for n in range(2, 7):
        for p in all_perms(n):
            assert parity(p) == inversion_parity(p)


def test_inversions_of_example():
    p = (1, 5, 6, 2, 3, 4)
    assert sum(1 for i, j in itertools.combinations(range(6), 2) if p[i] > p[j]) == 6


@pytest.mark.parametrize(
    "p, expected",
    [
        ((1, 2, 3, 4, 5, 6), (1, 1, 1, 1, 1)),
        ((6, 5, 4, 3, 2, 1), (0, 0, 0, 0, 0)),
        ((1, 5, 6, 2, 3, 4), (1, 1, 0, 1, 1)),
    ],
)
def test_alpha_vector(p, expected):
    assert alpha_vector(p) == expected


@pytest.mark.parametrize("p, expected", [((6, 5, 4, 3, 2, 1), 0), ((1, 2, 3, 4, 5, 6), 3), ((1, 5, 6, 2, 3, 4), 0)])
def test_checksum(p, expected):
    assert tenengolts_checksum(p) == expected


def test_translocation_examples():
    assert apply_translocation((1, 2, 3, 4, 5), 1, 4) == (2, 3, 4, 1, 5)
    assert apply_translocation((1, 2, 5, 3, 4, 9, 6, 8, 7), 9, 7) == (1, 2, 5, 3, 4, 9, 7, 6, 8)


@pytest.mark.parametrize("i, j", [(2, 2), (0, 1), (1, 4)])
def test_translocation_rejects_bad_positions(i, j):
    with pytest.raises(ValueError):
        apply_translocation((1, 2, 3), i, j)


def translocation_by_formula(p, i, j):
    """The two-case definition, written out with 1-indexed slices."""
    x = list(p)
    if i < j:
        return tuple(x[: i - 1] + x[i:j] + [x[i - 1]] + x[j:])
    return tuple(x[: j - 1] + [x[i - 1]] + x[j - 1 : i - 1] + x[i:])


def test_translocation_matches_definition_exhaustively():
    for p in all_perms(5):
        for i, j in itertools.permutations(range(1, 6), 2):
            assert apply_translocation(p, i, j) == translocation_by_formula(p, i, j)


@pytest.mark.parametrize("q, expected", [((1, 2, 3), 0), ((2, 1, 3), 2), ((2, 3, 1), 3)])
def test_hamming(q, expected):
    assert hamming_distance((1, 2, 3), q) == expected


def test_hamming_length_mismatch():
    with pytest.raises(ValueError):
        hamming_distance((1, 2), (1, 2, 3))


@pytest.mark.parametrize(
    "p, q, expected",
    [((1, 2, 3, 4), (1, 2, 3, 4), 0), ((1, 2, 3, 4), (4, 1, 2, 3), 1), ((1, 2, 3), (3, 2, 1), 2)],
)
def test_ulam_examples(p, q, expected):
    assert ulam_distance(p, q) == expected


def test_ulam_length_mismatch():
    with pytest.raises(ValueError):
        ulam_distance((1, 2), (1, 2, 3))


@given(perm_pairs())
def test_ulam_matches_brute_force_lcs(pq):
    p, q = pq
    assert ulam_distance(p, q) == len(p) - brute_lcs(p, q)


def test_ulam_is_a_metric_exhaustively():
    for n in range(2, 6):
        ps = all_perms(n)
        d = {(p, q): ulam_distance(p, q) for p in ps for q in ps}
        for p in ps:
            for q in ps:
                assert d[p, q] == d[q, p]
                assert (d[p, q] == 0) == (p == q)
        if n <= 4:
            for p, q, r in itertools.product(ps, repeat=3):
                assert d[p, r] <= d[p, q] + d[q, r]


def test_ulam_triangle_inequality_n5():
    ps = all_perms(5)
    arr = np.array(ps)
    d = ulam_distances(arr, arr)
    # d[p, r] <= min_q d[p, q] + d[q, r]
    via = (d[:, :, None] + d[None, :, :]).min(axis=1)
    assert (d <= via).all()


@given(perm_pairs())
def test_batched_ulam_agrees_with_scalar(pq):
    p, q = pq
    assert ulam_distances(np.array([p]), np.array([q]))[0, 0] == ulam_distance(p, q)


@given(perms, st.data())
def test_translocation_is_ulam_one(p, data):
    n = len(p)
    i = data.draw(st.integers(1, n))
    j = data.draw(st.integers(1, n).filter(lambda v: v != i))
    q = apply_translocation(p, i, j)
    assert ulam_distance(p, q) == (0 if q == tuple(p) else 1)
    assert ulam_distance(p, q) <= 1


@given(perms, st.data())
def test_adjacent_translocation_flips_parity(p, data):
    k = data.draw(st.integers(1, len(p) - 1))
    i, j = (k, k + 1) if data.draw(st.booleans()) else (k + 1, k)
    assert parity(apply_translocation(p, i, j)) != parity(p)


def test_hamming_two_implies_opposite_parity():
    for n in range(2, 7):
        ps = all_perms(n)
        for p in ps:
            for q in ps:
                if hamming_distance(p, q) == 2:
                    assert parity(p) != parity(q)


def test_example_one_matrix():
    m = perm_to_matrix((1, 2, 4, 3))
    expected = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    np.testing.assert_array_equal(m, expected)
    assert matrix_to_perm(expected) == (1, 2, 4, 3)


def test_identity_matrix_round_trip():
    np.testing.assert_array_equal(perm_to_matrix(identity(5)), np.eye(5))
    assert matrix_to_perm(np.eye(5, dtype=int)) == identity(5)


@pytest.mark.parametrize(
    "m",
    [np.zeros((3, 3), dtype=int), np.ones((3, 3), dtype=int), np.array([[1, 1, 0], [0, 0, 0], [0, 0, 1]])],
)
def test_matrix_to_perm_rejects_non_permutations(m):
    with pytest.raises(ValueError):
        matrix_to_perm(m)


@given(perms)
def test_matrix_embedding(p):
    m = perm_to_matrix(p)
    assert (m.sum(axis=0) == 1).all() and (m.sum(axis=1) == 1).all()
    for c, x in enumerate(p):
        assert m[x - 1, c] == 1
    assert matrix_to_perm(m) == tuple(p)


@given(perm_pairs())
def test_matrix_distance_is_twice_hamming(pq):
    p, q = pq
    assert int((perm_to_matrix(p) != perm_to_matrix(q)).sum()) == 2 * hamming_distance(p, q)


def test_batched_matrices_match_scalar():
    ps = np.array(all_perms(4))
    ms = perms_to_matrices(ps)
    for p, m in zip(ps, ms):
        np.testing.assert_array_equal(m, perm_to_matrix(p))


@pytest.mark.parametrize("bad", [(1, 1, 2), (0, 1, 2), (1, 2, 4)])
def test_as_perm_rejects(bad):
    with pytest.raises(ValueError):
        as_perm(bad)
