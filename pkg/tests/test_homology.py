import numpy as np
import pytest

from dms.cellcomplex import euler_characteristic
from dms.errors import BadDimension
from dms.homology import betti_mod2, boundary_matrix_mod2, rank_gf2


def bitmask_rank(A):
    """Independent GF(2) rank: rows as python ints, textbook elimination."""
    rows = [int("".join(str(int(x)) for x in row), 2) if row.size else 0
            for row in A]
    rank = 0
    for col in range(A.shape[1]):
        bit = 1 << (A.shape[1] - 1 - col)
        pivot = None
        for i in range(rank, len(rows)):
            if rows[i] & bit:
                pivot = i
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] & bit:
                rows[i] ^= rows[rank]
        rank += 1
    return rank


def test_boundary_matrix_shapes_tetra(tetra):
    A1 = boundary_matrix_mod2(tetra, 1)
    A2 = boundary_matrix_mod2(tetra, 2)
    assert A1.shape == (4, 6)
    assert list(A1.sum(axis=0)) == [2] * 6
    assert A2.shape == (6, 4)
    assert list(A2.sum(axis=0)) == [3] * 4


def test_torus_boundary_matrix_rank(torus):
    A2 = boundary_matrix_mod2(torus, 2)
    assert A2.shape == (21, 14)
    assert list(A2.sum(axis=0)) == [3] * 14
    assert rank_gf2(A2) == 13
    assert bitmask_rank(A2) == 13


def test_rank_agrees_with_independent_oracle(tetra, torus, genus2):
    for K in (tetra, torus, genus2[0]):
        for p in range(1, K.top_dim + 1):
            A = boundary_matrix_mod2(K, p)
            assert rank_gf2(A) == bitmask_rank(A)


def test_bad_dimension(tetra):
    with pytest.raises(BadDimension):
        boundary_matrix_mod2(tetra, 0)
    with pytest.raises(BadDimension):
        boundary_matrix_mod2(tetra, 3)


def test_betti_numbers(tetra, torus, genus2):
    assert betti_mod2(tetra).b == (1, 0, 1)
    assert betti_mod2(torus).b == (1, 2, 1)
    assert betti_mod2(genus2[0]).b == (1, 4, 1)


def test_rank_nullity_and_dd_zero(tetra, torus):
    for K in (tetra, torus):
        counts = K.counts()
        for p in range(1, K.top_dim + 1):
            A = boundary_matrix_mod2(K, p)
            assert rank_gf2(A) + (counts[p] - rank_gf2(A)) == counts[p]
        for p in range(2, K.top_dim + 1):
            A = boundary_matrix_mod2(K, p - 1)
            B = boundary_matrix_mod2(K, p)
            assert not ((A @ B) % 2).any()


def test_alternating_sum_is_euler(tetra, torus, genus2, pillow_sphere):
    for K in (tetra, torus, genus2[0], pillow_sphere):
        b = betti_mod2(K).b
        assert sum((-1) ** p * bp for p, bp in enumerate(b)) \
            == euler_characteristic(K)
