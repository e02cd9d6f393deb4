"""Exact dense linear algebra over a FieldCtx.

Matrices and subspaces are immutable values.  A subspace is canonically
represented by the reduced row echelon basis of its row span, so equality
is a byte comparison and enumeration order is reproducible.
"""

from __future__ import annotations

import functools
import itertools
from typing import Iterator, NamedTuple

import numpy as np

from .errors import CapExceeded, InputError
from .gfq import FieldCtx

SUBSPACE_CAP = 10 ** 7  # default refusal bound on enumerated subspace counts


def _as_field_array(ctx: FieldCtx, data, ndim: int) -> np.ndarray:
    arr = np.asarray(data, dtype=np.int64)
    if arr.ndim != ndim:
        raise InputError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() >= ctx.q):
        raise InputError(f"entries must lie in [0, {ctx.q})")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


class Matrix:
    """Dense matrix over a finite field; rows x cols of element encodings."""

    __slots__ = ("ctx", "data")

    def __init__(self, ctx: FieldCtx, data):
        self.ctx = ctx
        self.data = _as_field_array(ctx, data, 2)

    @classmethod
    def zeros(cls, ctx: FieldCtx, rows: int, cols: int) -> "Matrix":
        return cls(ctx, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, ctx: FieldCtx, n: int) -> "Matrix":
        return cls(ctx, np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def transpose(self) -> "Matrix":
        return Matrix(self.ctx, self.data.T)

    def mul(self, other: "Matrix") -> "Matrix":
        if self.ctx != other.ctx or self.cols != other.rows:
            raise InputError("matrix product shape/field mismatch")
        return Matrix(self.ctx, matmul_arr(self.ctx, self.data, other.data))

    def mat_vec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64)
        return matmul_arr(self.ctx, self.data, v.reshape(-1, 1))[:, 0]

    def add(self, other: "Matrix") -> "Matrix":
        if self.ctx != other.ctx or self.data.shape != other.data.shape:
            raise InputError("matrix sum shape/field mismatch")
        return Matrix(self.ctx, self.ctx.add_arr(self.data, other.data))

    def scale(self, c: int) -> "Matrix":
        return Matrix(self.ctx, self.ctx.mul_arr(self.data, np.int64(c)))

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.ctx == other.ctx
                and self.data.shape == other.data.shape
                and np.array_equal(self.data, other.data))

    def __hash__(self):
        return hash((self.ctx, self.data.shape, self.data.tobytes()))

    def __repr__(self):
        return f"Matrix({self.ctx!r}, {self.data.tolist()!r})"


def matmul_arr(ctx: FieldCtx, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Field matrix product on raw arrays, shapes (..., m, k) @ (..., k, n)."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if ctx.e == 1:
        return (x @ y) % ctx.p
    k = x.shape[-1]
    shape = np.broadcast_shapes(x.shape[:-2], y.shape[:-2]) + (x.shape[-2], y.shape[-1])
    out = np.zeros(shape, dtype=np.int64)
    for t in range(k):
        out = ctx.add_arr(out, ctx.mul_arr(x[..., :, t, None], y[..., None, t, :]))
    return out


class RrefResult(NamedTuple):
    matrix: "Matrix"
    rank: int
    pivots: tuple[int, ...]


def rref(m: Matrix) -> RrefResult:
    """Gauss-Jordan reduced row echelon form.

    Pivot choice is deterministic: leftmost eligible column, topmost
    nonzero row.
    """
    ctx = m.ctx
    a = m.data.copy()
    rows, cols = a.shape
    r = 0
    pivots = []
    for col in range(cols):
        if r >= rows:
            break
        nz = np.nonzero(a[r:, col])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        piv = int(a[r, col])
        if piv != 1:
            a[r] = ctx.mul_arr(a[r], np.int64(ctx.inv(piv)))
        fac = a[:, col].copy()
        fac[r] = 0
        if np.any(fac):
            a = ctx.sub_arr(a, ctx.mul_arr(fac[:, None], a[r][None, :]))
        pivots.append(col)
        r += 1
    return RrefResult(Matrix(ctx, a), r, tuple(pivots))


def rank(m: Matrix) -> int:
    return rref(m).rank


class Subspace:
    """Subspace of GF(q)^n, stored as the RREF basis of its row span."""

    __slots__ = ("ctx", "ambient", "basis")

    def __init__(self, ctx: FieldCtx, ambient: int, basis):
        self.ctx = ctx
        self.ambient = int(ambient)
        b = _as_field_array(ctx, basis, 2)
        if b.shape[1] != self.ambient:
            raise InputError("basis width must equal the ambient dimension")
        self.basis = b

    @classmethod
    def from_rows(cls, ctx: FieldCtx, rows) -> "Subspace":
        arr = np.asarray(rows, dtype=np.int64)
        if arr.ndim != 2:
            raise InputError("expected a 2-d array of spanning rows")
        red = rref(Matrix(ctx, arr))
        return cls(ctx, arr.shape[1], red.matrix.data[: red.rank])

    @classmethod
    def full(cls, ctx: FieldCtx, n: int) -> "Subspace":
        return cls(ctx, n, np.eye(n, dtype=np.int64))

    @classmethod
    def zero(cls, ctx: FieldCtx, n: int) -> "Subspace":
        return cls(ctx, n, np.zeros((0, n), dtype=np.int64))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def codim(self) -> int:
        return self.ambient - self.dim

    def contains_vectors(self, vectors) -> bool:
        v = np.asarray(vectors, dtype=np.int64).reshape(-1, self.ambient)
        stacked = np.vstack([self.basis, v])
        return rref(Matrix(self.ctx, stacked)).rank == self.dim

    def contains_subspace(self, other: "Subspace") -> bool:
        if self.ctx != other.ctx or self.ambient != other.ambient:
            raise InputError("subspace comparison across different spaces")
        return self.contains_vectors(other.basis)

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.ctx == other.ctx
                and self.ambient == other.ambient
                and self.basis.shape == other.basis.shape
                and np.array_equal(self.basis, other.basis))

    def __hash__(self):
        return hash((self.ctx, self.ambient, self.basis.tobytes()))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient}, GF({self.ctx.q}))"


def kernel_basis(m: Matrix) -> Subspace:
    """Right kernel {v : M v = 0} as a canonical subspace of GF(q)^cols."""
    ctx = m.ctx
    red, rk, pivots = rref(m)
    n = m.cols
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return Subspace.zero(ctx, n)
    rows = np.zeros((len(free), n), dtype=np.int64)
    for i, fc in enumerate(free):
        rows[i, fc] = 1
        for j, pc in enumerate(pivots):
            rows[i, pc] = ctx.neg(int(red.data[j, fc]))
    return Subspace.from_rows(ctx, rows)


def image_basis(m: Matrix) -> Subspace:
    """Column space of M as a canonical subspace of GF(q)^rows."""
    return Subspace.from_rows(m.ctx, m.data.T)


def left_kernel_basis(m: Matrix) -> Subspace:
    """Left kernel {u : u^T M = 0} as a canonical subspace of GF(q)^rows."""
    return kernel_basis(m.transpose())


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of GF(q)^n (exact integer)."""
    if k < 0 or k > n:
        return 0
    out = 1
    for i in range(k):
        out = out * (q ** (n - i) - 1) // (q ** (i + 1) - 1)
    return out


def _pivot_free_positions(pivots: tuple[int, ...], n: int) -> list[tuple[int, int]]:
    pset = set(pivots)
    return [(i, c) for i, p in enumerate(pivots) for c in range(p + 1, n) if c not in pset]


@functools.lru_cache(maxsize=None)
def _subspace_bases_cached(ctx: FieldCtx, n: int, k: int) -> np.ndarray:
    """All RREF bases of k-dim subspaces of GF(q)^n, shape (count, k, n).

    Order: pivot sets lexicographically, then free entries counting with
    the last free position fastest (matches itertools.product).
    """
    q = ctx.q
    if k == 0:
        return np.zeros((1, 0, n), dtype=np.int64)
    blocks = []
    for pivots in itertools.combinations(range(n), k):
        free = _pivot_free_positions(pivots, n)
        f = len(free)
        cnt = q ** f
        block = np.zeros((cnt, k, n), dtype=np.int64)
        for i, p in enumerate(pivots):
            block[:, i, p] = 1
        if f:
            vals = np.indices((q,) * f).reshape(f, -1).T
            for idx, (i, c) in enumerate(free):
                block[:, i, c] = vals[:, idx]
        blocks.append(block)
    return np.concatenate(blocks, axis=0)


def subspace_bases(ctx: FieldCtx, n: int, k: int, cap: int = SUBSPACE_CAP) -> np.ndarray:
    """Cached array of all canonical bases; refuses above the cap."""
    count = gaussian_binomial(n, k, ctx.q)
    if count > cap:
        raise CapExceeded(
            f"enumerating {count} subspaces of dimension {k} in GF({ctx.q})^{n} "
            f"exceeds cap {cap}", size=count)
    return _subspace_bases_cached(ctx, n, k)


def subspaces_iter(ctx: FieldCtx, n: int, k: int, cap: int = SUBSPACE_CAP) -> Iterator[Subspace]:
    """Every k-dimensional subspace of GF(q)^n exactly once, canonical order.

    The stream can be consumed in parallel by splitting on pivot-set
    prefixes; recombining in pivot order reproduces this exact sequence.
    """
    if not (0 <= k <= n):
        raise InputError(f"need 0 <= k <= n, got k={k}, n={n}")
    for b in subspace_bases(ctx, n, k, cap=cap):
        yield Subspace(ctx, n, b)


def batch_rank(ctx: FieldCtx, mats: np.ndarray) -> np.ndarray:
    """Ranks of a stack of matrices (B, m, n), eliminated in lockstep."""
    work = np.array(mats, dtype=np.int64)
    if work.ndim != 3:
        raise InputError("batch_rank expects a (batch, rows, cols) array")
    nb, m, n = work.shape
    if nb == 0 or m == 0 or n == 0:
        return np.zeros(nb, dtype=np.int64)
    row = np.zeros(nb, dtype=np.int64)
    ridx = np.arange(m)
    for col in range(n):
        colv = work[:, :, col]
        cand = (colv != 0) & (ridx[None, :] >= row[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        b = np.nonzero(has)[0]
        r0 = row[b]
        p0 = np.argmax(cand[b], axis=1)
        swap = work[b, p0, :].copy()
        work[b, p0, :] = work[b, r0, :]
        work[b, r0, :] = swap
        piv = work[b, r0, col]
        pivrow = ctx.mul_arr(work[b, r0, :], ctx.inv_arr(piv)[:, None])
        work[b, r0, :] = pivrow
        fac = work[b][:, :, col]
        mask = (ridx[None, :] > r0[:, None]) & (fac != 0)
        if mask.any():
            delta = ctx.mul_arr(fac[:, :, None], pivrow[:, None, :])
            upd = ctx.sub_arr(work[b], delta)
            work[b] = np.where(mask[:, :, None], upd, work[b])
        row[b] += 1
        if (row == m).all():
            break
    return row
