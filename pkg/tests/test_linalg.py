"""RREF, kernels/images, subspace enumeration, batch rank."""

import numpy as np
import pytest

from oracles import all_subspaces_bruteforce
from trlab.errors import CapExceeded, InputError
from trlab.gfq import field_new
from trlab.linalg import (Matrix, Subspace, batch_rank, gaussian_binomial,
                          image_basis, kernel_basis, left_kernel_basis,
                          matmul_arr, rank, rref, subspace_bases, subspaces_iter)

F2 = field_new(2, 1)
F3 = field_new(3, 1)


def test_rref_identity_and_zero():
    assert rref(Matrix.identity(F3, 4)).rank == 4
    assert rref(Matrix.zeros(F3, 3, 5)).rank == 0


def test_rref_all_ones_f2():
    m = Matrix(F2, [[1, 1], [1, 1]])
    red = rref(m)
    assert red.rank == 1
    assert red.pivots == (0,)
    assert red.matrix.data.tolist() == [[1, 1], [0, 0]]


def test_rref_is_reduced_and_deterministic():
    rng = np.random.default_rng(3)
    for ctx in (F2, F3, field_new(2, 2)):
        for _ in range(20):
            m = Matrix(ctx, rng.integers(0, ctx.q, size=(4, 5), dtype=np.int64))
            red = rref(m)
            a = red.matrix.data
            for i, pc in enumerate(red.pivots):
                col = a[:, pc]
                assert col[i] == 1 and (np.delete(col, i) == 0).all()
            assert rref(red.matrix).matrix == red.matrix  # idempotent


def test_rank_transpose_invariant():
    rng = np.random.default_rng(5)
    for ctx in (F2, F3, field_new(2, 3)):
        for _ in range(25):
            m = Matrix(ctx, rng.integers(0, ctx.q, size=(3, 5), dtype=np.int64))
            assert rank(m) == rank(m.transpose())


def test_kernel_image_examples():
    ident = Matrix.identity(F2, 3)
    assert kernel_basis(ident).dim == 0
    assert image_basis(ident) == Subspace.full(F2, 3)
    zero = Matrix.zeros(F2, 3, 3)
    assert kernel_basis(zero) == Subspace.full(F2, 3)
    diag = Matrix(F2, [[0, 0], [0, 1]])
    assert kernel_basis(diag).basis.tolist() == [[1, 0]]
    assert image_basis(diag).basis.tolist() == [[0, 1]]


def test_kernel_vectors_annihilate():
    rng = np.random.default_rng(11)
    for ctx in (F2, F3, field_new(2, 2)):
        for _ in range(15):
            m = Matrix(ctx, rng.integers(0, ctx.q, size=(3, 4), dtype=np.int64))
            k = kernel_basis(m)
            assert k.dim == 4 - rank(m)
            for v in k.basis:
                assert not m.mat_vec(v).any()
            lk = left_kernel_basis(m)
            for u in lk.basis:
                assert not matmul_arr(ctx, u[None, :], m.data).any()
            assert image_basis(m).dim == rank(m)


def test_subspace_counts_small():
    assert gaussian_binomial(2, 1, 2) == 3
    assert gaussian_binomial(3, 1, 2) == 7
    assert gaussian_binomial(4, 2, 2) == 35
    assert len(list(subspaces_iter(F2, 2, 1))) == 3
    assert len(list(subspaces_iter(F2, 3, 1))) == 7
    assert len(list(subspaces_iter(F2, 4, 2))) == 35


@pytest.mark.parametrize("ctx,n", [(F2, 4), (F3, 3), (field_new(2, 2), 3)])
def test_subspace_enumeration_complete_and_unique(ctx, n):
    for k in range(n + 1):
        subs = list(subspaces_iter(ctx, n, k))
        assert len(subs) == gaussian_binomial(n, k, ctx.q)
        keys = {s.basis.tobytes() for s in subs}
        assert len(keys) == len(subs)  # canonical bases are pairwise distinct
        for s in subs:
            red = rref(Matrix(ctx, s.basis))
            assert red.rank == k and np.array_equal(red.matrix.data[:k], s.basis)
        if ctx.q ** (k * n) <= 3 ** 9:
            oracle = {b.tobytes() for b in all_subspaces_bruteforce(ctx, n, k)}
            assert keys == oracle


def test_subspace_cap_refusal():
    with pytest.raises(CapExceeded) as exc:
        list(subspaces_iter(F2, 40, 20))
    assert str(gaussian_binomial(40, 20, 2)) in str(exc.value)


def test_subspace_from_rows_canonical():
    rng = np.random.default_rng(23)
    for _ in range(20):
        rows = rng.integers(0, 3, size=(3, 4), dtype=np.int64)
        s1 = Subspace.from_rows(F3, rows)
        perm = rows[rng.permutation(3)]
        s2 = Subspace.from_rows(F3, perm)
        assert s1 == s2 and hash(s1) == hash(s2)


def test_subspace_contains():
    s = Subspace.from_rows(F2, [[1, 0, 1], [0, 1, 0]])
    assert s.contains_vectors([[1, 1, 1]])
    assert not s.contains_vectors([[0, 0, 1]])
    assert s.contains_subspace(Subspace.from_rows(F2, [[1, 1, 1]]))
    assert Subspace.full(F2, 3).contains_subspace(s)


def test_bilinear_restriction_consistency():
    # restriction of M to W1 x W2 vanishes iff B1 M B2^T = 0, checked
    # against scalar per-pair evaluation
    rng = np.random.default_rng(29)
    for ctx in (F2, F3):
        for _ in range(30):
            m = rng.integers(0, ctx.q, size=(3, 3), dtype=np.int64)
            b1 = subspace_bases(ctx, 3, 2)[rng.integers(0, gaussian_binomial(3, 2, ctx.q))]
            b2 = subspace_bases(ctx, 3, 1)[rng.integers(0, gaussian_binomial(3, 1, ctx.q))]
            prod = matmul_arr(ctx, matmul_arr(ctx, b1, m), b2.T)
            scalar_zero = True
            for u in b1:
                for v in b2:
                    acc = 0
                    for i in range(3):
                        for j in range(3):
                            acc = ctx.add(acc, ctx.mul(ctx.mul(int(u[i]), int(m[i, j])), int(v[j])))
                    if acc:
                        scalar_zero = False
            assert (not prod.any()) == scalar_zero


def test_batch_rank_matches_rref():
    rng = np.random.default_rng(31)
    for ctx in (F2, F3, field_new(2, 2), field_new(2, 4)):
        mats = rng.integers(0, ctx.q, size=(40, 3, 4), dtype=np.int64)
        got = batch_rank(ctx, mats)
        want = [rref(Matrix(ctx, m)).rank for m in mats]
        assert got.tolist() == want


def test_batch_rank_edge_shapes():
    assert batch_rank(F2, np.zeros((0, 3, 3), dtype=np.int64)).tolist() == []
    assert batch_rank(F2, np.zeros((2, 0, 3), dtype=np.int64)).tolist() == [0, 0]


def test_matrix_validation():
    with pytest.raises(InputError):
        Matrix(F2, [[0, 2]])
    with pytest.raises(InputError):
        Matrix(F2, [1, 0])
    with pytest.raises(InputError):
        Matrix.identity(F2, 2).mul(Matrix.identity(F3, 2))
