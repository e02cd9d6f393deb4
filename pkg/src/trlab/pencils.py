"""Matrix pencils sA + tB: Kronecker singular blocks, rank profiles over
extensions, the kernel-image containment check, the radical restriction
check, and the max-rank reduction certificate for spans of matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapExceeded, InputError
from .gfq import FieldCtx, descriptor, field_from_descriptor
from .linalg import (Matrix, Subspace, batch_rank, image_basis, kernel_basis,
                     left_kernel_basis, matmul_arr, rref)

PROFILE_CAP = 10 ** 6  # bound on projective points per rank profile


@dataclass(frozen=True)
class Pencil:
    a: Matrix
    b: Matrix

    def __post_init__(self):
        if self.a.ctx != self.b.ctx or self.a.data.shape != self.b.data.shape:
            raise InputError("pencil members must share field and shape")

    @property
    def ctx(self) -> FieldCtx:
        return self.a.ctx

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.data.shape


def kronecker_block(ctx: FieldCtx, kind: str, n: int) -> Pencil:
    """Singular Kronecker blocks.

    "Ln": the (n+1) x n pair with A e_i = f_i and B e_i = f_{i+1}.
    "Ln_transpose": the n x (n+1) pair with A = [I | 0] and B = [0 | I].
    """
    if n < 0:
        raise InputError(f"block size must be >= 0, got {n}")
    if kind == "Ln":
        a = np.zeros((n + 1, n), dtype=np.int64)
        b = np.zeros((n + 1, n), dtype=np.int64)
        for i in range(n):
            a[i, i] = 1
            b[i + 1, i] = 1
    elif kind == "Ln_transpose":
        a = np.zeros((n, n + 1), dtype=np.int64)
        b = np.zeros((n, n + 1), dtype=np.int64)
        for i in range(n):
            a[i, i] = 1
            b[i, i + 1] = 1
    else:
        raise InputError(f"unknown block kind {kind!r} (want Ln or Ln_transpose)")
    return Pencil(Matrix(ctx, a), Matrix(ctx, b))


@dataclass(frozen=True)
class RankProfile:
    """rank(sA + tB) at every projective point of the line over GF(q^e).

    Points are listed as (1, t) for each t in encoding order, then (0, 1);
    encodings refer to the extension context.
    """

    extension_degree: int
    field_order: int
    points: tuple[tuple[tuple[int, int], int], ...]

    def rank_at_infinity(self) -> int:
        return self.points[-1][1]

    def affine_ranks(self) -> tuple[int, ...]:
        return tuple(r for (_, r) in self.points[:-1])


def _affine_members(ext: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Stack of A + t B over all t in the extension, shape (Q, rows, cols)."""
    ts = np.arange(ext.q, dtype=np.int64)
    return ext.add_arr(a[None], ext.mul_arr(ts[:, None, None], b[None]))


def rank_profile(pencil: Pencil, ext_e: int = 1, cap: int = PROFILE_CAP) -> RankProfile:
    if ext_e < 1:
        raise InputError(f"extension degree must be >= 1, got {ext_e}")
    ctx = pencil.ctx
    npts = ctx.q ** ext_e + 1
    if npts > cap:
        raise CapExceeded(f"rank profile needs {npts} projective points, cap is {cap}",
                          size=npts)
    ext, emb = ctx.extension(ext_e)
    ea, eb = emb[pencil.a.data], emb[pencil.b.data]
    ranks = batch_rank(ext, _affine_members(ext, ea, eb))
    pts = [((1, int(t)), int(r)) for t, r in enumerate(ranks)]
    pts.append(((0, 1), int(batch_rank(ext, eb[None])[0])))
    return RankProfile(ext_e, ext.q, tuple(pts))


@dataclass(frozen=True)
class KernelImageReport:
    """Does bounded rank along the affine pencil line force B(ker A) <= im A?

    affine_hypothesis_base / _ext: rank(A + tB) <= rank(A) for every t in
    the base field / the degree-ext_e extension.  Over a field with more
    than min(rows, cols) * (degeneracy points) elements the hypothesis
    forces the conclusion; over small base fields it need not (the
    all-elements diagonal against the identity is the standard
    counterexample).
    """

    affine_hypothesis_base: bool
    affine_hypothesis_ext: bool
    conclusion: bool
    rank_a: int
    extension_degree: int


def kernel_image_check(pencil: Pencil, ext_e: int = 4) -> KernelImageReport:
    ctx = pencil.ctx
    rank_a = rref(pencil.a).rank
    base_ranks = batch_rank(ctx, _affine_members(ctx, pencil.a.data, pencil.b.data))
    hyp_base = bool((base_ranks <= rank_a).all())
    ext, emb = ctx.extension(ext_e)
    ext_ranks = batch_rank(ext, _affine_members(ext, emb[pencil.a.data], emb[pencil.b.data]))
    hyp_ext = bool((ext_ranks <= rank_a).all())
    ker = kernel_basis(pencil.a)
    if ker.dim == 0:
        concl = True
    else:
        mapped = matmul_arr(ctx, pencil.b.data, ker.basis.T).T  # rows: B k
        concl = image_basis(pencil.a).contains_vectors(mapped)
    return KernelImageReport(hyp_base, hyp_ext, bool(concl), rank_a, ext_e)


@dataclass(frozen=True)
class RadicalRestrictionReport:
    """If rank(B + tC) stays at most rank(B) over the extension, the
    direction C must vanish on left-radical x right-radical of B."""

    hypothesis: bool
    conclusion: bool
    passed: bool
    rank_b: int
    extension_degree: int


def radical_restriction_check(b: Matrix, c: Matrix, ext_e: int = 4) -> RadicalRestrictionReport:
    if b.ctx != c.ctx or b.data.shape != c.data.shape:
        raise InputError("the two matrices must share field and shape")
    ctx = b.ctx
    rank_b = rref(b).rank
    ext, emb = ctx.extension(ext_e)
    ranks = batch_rank(ext, _affine_members(ext, emb[b.data], emb[c.data]))
    hyp = bool((ranks <= rank_b).all())
    s_u = left_kernel_basis(b)
    s_v = kernel_basis(b)
    restr = matmul_arr(ctx, matmul_arr(ctx, s_u.basis, c.data), s_v.basis.T)
    concl = not restr.any()
    return RadicalRestrictionReport(hyp, bool(concl), (not hyp) or bool(concl),
                                    rank_b, ext_e)


@dataclass(frozen=True)
class MaxRankReduction:
    """Kernel/image pair of a maximal-rank element of a span of matrices.

    On success the pair (W', V') = (ker M, im M) of a rank-maximal M
    satisfies l(W') <= V' for every l in the span, certifying that the
    minimal vanishing codimension sum is at most 2 * max_rank over the
    witness field.  over_extension records whether the verified witness
    required extension coefficients.
    """

    success: bool
    max_rank: int
    kernel: Optional[Subspace]
    image: Optional[Subspace]
    over_extension: bool
    witness_field_degree: int
    tried_base: int
    tried_ext: int


EXHAUSTIVE_SPAN_CAP = 10 ** 5


def _span_basis(mats) -> tuple[FieldCtx, tuple[int, int], np.ndarray]:
    mats = list(mats)
    if not mats:
        raise InputError("need at least one matrix")
    ctx = mats[0].ctx
    shape = mats[0].data.shape
    if any(m.ctx != ctx or m.data.shape != shape for m in mats):
        raise InputError("all matrices must share field and shape")
    flat = np.stack([m.data.reshape(-1) for m in mats])
    red = rref(Matrix(ctx, flat))
    return ctx, shape, red.matrix.data[:red.rank].reshape(red.rank, *shape)


def _combine(ctx: FieldCtx, coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    if ctx.e == 1:
        return np.tensordot(coeffs, basis, axes=(1, 0)) % ctx.p
    out = np.zeros((coeffs.shape[0],) + basis.shape[1:], dtype=np.int64)
    for j in range(basis.shape[0]):
        out = ctx.add_arr(out, ctx.mul_arr(coeffs[:, j, None, None], basis[j][None]))
    return out


def _verify_pair(field: FieldCtx, span_mats: np.ndarray, m: Matrix) -> tuple[bool, Subspace, Subspace]:
    w = kernel_basis(m)
    v = image_basis(m)
    ok = True
    for l in span_mats:
        if w.dim == 0:
            break
        mapped = matmul_arr(field, l, w.basis.T).T
        if not v.contains_vectors(mapped):
            ok = False
            break
    return ok, w, v


def max_rank_reduction(mats, ext_e: int = 4, samples: int = 50, seed: int = 0) -> MaxRankReduction:
    """Search a span for a maximal-rank element whose (ker, im) pair absorbs
    the whole span.

    Base-field elements are enumerated exhaustively when q^dim(span) is at
    most 10^5, otherwise sampled; `samples` extra combinations are drawn
    over GF(q^ext_e).  Verification prefers base-field witnesses; only when
    every maximal-rank base element fails is the extension consulted.
    """
    if ext_e < 1:
        raise InputError(f"extension degree must be >= 1, got {ext_e}")
    ctx, shape, basis = _span_basis(mats)
    dim_l = basis.shape[0]
    if dim_l == 0:
        full = Subspace.full(ctx, shape[1])
        zero = Subspace.zero(ctx, shape[0])
        return MaxRankReduction(True, 0, full, zero, False, 1, 1, 0)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0)))
    if ctx.q ** dim_l <= EXHAUSTIVE_SPAN_CAP:
        from .ranks import _all_vectors
        base_coeffs = _all_vectors(ctx, dim_l)
    else:
        base_coeffs = np.vstack([np.eye(dim_l, dtype=np.int64),
                                 rng.integers(0, ctx.q, size=(samples, dim_l), dtype=np.int64)])
    base_mats = _combine(ctx, base_coeffs, basis)
    base_ranks = batch_rank(ctx, base_mats)

    ext, emb = ctx.extension(ext_e)
    ebasis = emb[basis]
    ext_rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    ext_coeffs = ext_rng.integers(0, ext.q, size=(samples, dim_l), dtype=np.int64) \
        if samples > 0 else np.zeros((0, dim_l), dtype=np.int64)
    ext_mats = _combine(ext, ext_coeffs, ebasis) if ext_coeffs.size else \
        np.zeros((0,) + shape, dtype=np.int64)
    ext_ranks = batch_rank(ext, ext_mats) if ext_mats.shape[0] else np.zeros(0, dtype=np.int64)

    rtilde = int(max(base_ranks.max(initial=0), ext_ranks.max(initial=0)))
    tried_base = tried_ext = 0
    for idx in np.nonzero(base_ranks == rtilde)[0]:
        tried_base += 1
        ok, w, v = _verify_pair(ctx, basis, Matrix(ctx, base_mats[idx]))
        if ok:
            return MaxRankReduction(True, rtilde, w, v, False, 1, tried_base, 0)
    for idx in np.nonzero(ext_ranks == rtilde)[0]:
        tried_ext += 1
        ok, w, v = _verify_pair(ext, ebasis, Matrix(ext, ext_mats[idx]))
        if ok:
            return MaxRankReduction(True, rtilde, w, v, True, ext_e, tried_base, tried_ext)
    return MaxRankReduction(False, rtilde, None, None, False, ext_e, tried_base, tried_ext)


# -- serialization -------------------------------------------------------------

def pencil_to_obj(p: Pencil) -> dict:
    rows, cols = p.shape
    return {
        "field": descriptor(p.ctx),
        "rows": rows,
        "cols": cols,
        "A": [int(x) for x in p.a.data.reshape(-1)],
        "B": [int(x) for x in p.b.data.reshape(-1)],
    }


def pencil_from_obj(obj) -> Pencil:
    if not isinstance(obj, dict) or not {"field", "rows", "cols", "A", "B"} <= set(obj):
        raise InputError("pencil object needs keys field, rows, cols, A, B")
    ctx = field_from_descriptor(obj["field"])
    rows, cols = obj["rows"], obj["cols"]
    if not isinstance(rows, int) or not isinstance(cols, int) or rows < 0 or cols < 0:
        raise InputError("rows and cols must be nonnegative integers")
    out = []
    for key in ("A", "B"):
        flat = obj[key]
        if not isinstance(flat, list) or len(flat) != rows * cols:
            raise InputError(f"{key} must be a list of length rows*cols")
        if any(not isinstance(x, int) or not (0 <= x < ctx.q) for x in flat):
            raise InputError(f"{key} entries must be integers in [0, {ctx.q})")
        out.append(Matrix(ctx, np.array(flat, dtype=np.int64).reshape(rows, cols)))
    return Pencil(out[0], out[1])
