"""Rank invariants of multilinear forms.

Three quantities are computed exactly at desk scale:

* the zero-set count |{(v2..vd) : P(., v2..vd) = 0 as a functional}| over
  the base field or an extension, by full enumeration;
* the analytic rank, both from that count and independently from the
  normalized character sum over the whole domain;
* the exact slice rank, by iterative deepening over codimension
  compositions with exhaustive subspace enumeration.

Slot 0 is the distinguished slot for zero-set counting (re-root a form
with forms.move_slot_first if another slot is wanted).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import CapExceeded, InputError
from .forms import MultilinearForm, flatten, restrict_axis_arr
from .gfq import FieldCtx
from .linalg import (Matrix, Subspace, batch_rank, gaussian_binomial, kernel_basis,
                     matmul_arr, rref, subspace_bases)

POINT_CAP = 2 ** 34       # refusal bound on enumerated point tuples
GRID_BUDGET = 1 << 22     # max grid cells materialized per vectorized step
SEARCH_CAP = 5 * 10 ** 6  # refusal bound on subspace-tuple rank tests


def _all_vectors(ctx: FieldCtx, n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Vectors of GF(q)^n with encodings in [start, stop), one per row.

    Row r encodes the vector whose j-th coordinate is digit j of r in base q.
    """
    q = ctx.q
    if stop is None:
        stop = q ** n
    enc = np.arange(start, stop, dtype=np.int64)
    out = np.empty((enc.size, n), dtype=np.int64)
    t = enc.copy()
    for j in range(n):
        out[:, j] = t % q
        t //= q
    return out


def _contract_grid(ctx: FieldCtx, t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Contract the last axis of t with every row of x: (..., m) -> (..., G)."""
    if ctx.e == 1:
        return (t @ x.T) % ctx.p
    out = np.zeros(t.shape[:-1] + (x.shape[0],), dtype=np.int64)
    for k in range(t.shape[-1]):
        col = x[:, k]
        if col.any():
            out = ctx.add_arr(out, ctx.mul_arr(t[..., k, None], col))
    return out


def _grid_size(q: int, slot_dims) -> int:
    out = 1
    for m in slot_dims:
        out *= q ** m
    return out


def _count_zero_rec(ctx: FieldCtx, t: np.ndarray, slot_dims: list[int]) -> int:
    """Tuples over the listed slots on which every leading-axis value is zero.

    t has shape (n1, m2, ..., mk); the leading axis is not enumerated.
    """
    if not slot_dims:
        return 1 if not t.any() else 0
    grid = _grid_size(ctx.q, slot_dims)
    if grid <= GRID_BUDGET:
        v = t
        for _ in slot_dims:
            v = np.moveaxis(v, 1, -1)
            v = _contract_grid(ctx, v, _all_vectors(ctx, v.shape[-1]))
        return int((v == 0).all(axis=0).sum())
    # too large to materialize at once: enumerate the first slot in blocks
    m2 = slot_dims[0]
    rest = slot_dims[1:]
    rest_grid = _grid_size(ctx.q, rest)
    n_vec = ctx.q ** m2
    total = 0
    if rest_grid <= GRID_BUDGET:
        block = max(1, GRID_BUDGET // rest_grid)
        for startpos in range(0, n_vec, block):
            rows = _all_vectors(ctx, m2, startpos, min(startpos + block, n_vec))
            v = np.moveaxis(_contract_grid(ctx, np.moveaxis(t, 1, -1), rows), -1, 1)
            for _ in rest:  # v: (n1, B, remaining slots..., grids...)
                v = np.moveaxis(v, 2, -1)
                v = _contract_grid(ctx, v, _all_vectors(ctx, v.shape[-1]))
            total += int((v == 0).all(axis=0).sum())
        return total
    block = 1024
    for startpos in range(0, n_vec, block):
        rows = _all_vectors(ctx, m2, startpos, min(startpos + block, n_vec))
        tb = np.moveaxis(_contract_grid(ctx, np.moveaxis(t, 1, -1), rows), -1, 1)
        for b in range(rows.shape[0]):
            total += _count_zero_rec(ctx, tb[:, b], rest)
    return total


def _value_bincount(ctx: FieldCtx, t: np.ndarray, slot_dims: list[int]) -> np.ndarray:
    """Exact histogram of form values over the full grid of the given slots."""
    if not slot_dims:
        return np.bincount(np.asarray(t, dtype=np.int64).reshape(-1), minlength=ctx.q)
    grid = _grid_size(ctx.q, slot_dims)
    if grid <= GRID_BUDGET:
        v = t
        for _ in slot_dims:
            v = np.moveaxis(v, 0, -1)
            v = _contract_grid(ctx, v, _all_vectors(ctx, v.shape[-1]))
        return np.bincount(v.reshape(-1), minlength=ctx.q)
    m1 = slot_dims[0]
    rest = slot_dims[1:]
    rest_grid = _grid_size(ctx.q, rest)
    n_vec = ctx.q ** m1
    counts = np.zeros(ctx.q, dtype=np.int64)
    if rest_grid <= GRID_BUDGET:
        block = max(1, GRID_BUDGET // rest_grid)
        for startpos in range(0, n_vec, block):
            rows = _all_vectors(ctx, m1, startpos, min(startpos + block, n_vec))
            v = np.moveaxis(_contract_grid(ctx, np.moveaxis(t, 0, -1), rows), -1, 0)
            for _ in rest:  # v: (B, remaining slots..., grids...)
                v = np.moveaxis(v, 1, -1)
                v = _contract_grid(ctx, v, _all_vectors(ctx, v.shape[-1]))
            counts += np.bincount(v.reshape(-1), minlength=ctx.q)
        return counts
    block = 1024
    for startpos in range(0, n_vec, block):
        rows = _all_vectors(ctx, m1, startpos, min(startpos + block, n_vec))
        tb = np.moveaxis(_contract_grid(ctx, np.moveaxis(t, 0, -1), rows), -1, 0)
        for b in range(rows.shape[0]):
            counts += _value_bincount(ctx, tb[b], rest)
    return counts


@dataclass(frozen=True)
class ZeroSetCount:
    count: int
    extension_degree: int
    ambient: int  # sum of dims[1:]


def zero_set_count(p: MultilinearForm, ext_e: int = 1, cap: int = POINT_CAP) -> ZeroSetCount:
    """Exact |Z(GF(q^ext_e))| for Z = {(v2..vd) : slot-0 contraction vanishes}.

    Counts by enumerating all tuples and testing the contraction, so it is
    deterministic and independent of any rank shortcut.
    """
    if ext_e < 1:
        raise InputError(f"extension degree must be >= 1, got {ext_e}")
    dims = p.dims
    ambient = sum(dims[1:])
    big_q = p.ctx.q ** ext_e
    total = big_q ** ambient
    if total > cap:
        raise CapExceeded(f"zero-set enumeration needs {total} tuples, cap is {cap}",
                          size=total)
    ext, emb = p.ctx.extension(ext_e)
    coeffs = emb[p.coeffs]
    if p.d == 1:
        return ZeroSetCount(1 if not coeffs.any() else 0, ext_e, 0)
    return ZeroSetCount(_count_zero_rec(ext, coeffs, list(dims[1:])), ext_e, ambient)


def analytic_rank_count(p: MultilinearForm, cap: int = POINT_CAP) -> float:
    """a(P) = ambient - log_q |Z(GF(q))|; zero exactly when Z is everything."""
    z = zero_set_count(p, 1, cap=cap)
    if z.count == 0:  # only reachable for d = 1 and P nonzero
        return math.inf
    return z.ambient - math.log(z.count) / math.log(p.ctx.q)


def analytic_rank_charsum(p: MultilinearForm, j: int = 1, cap: int = POINT_CAP) -> float:
    """-log_q of the normalized character sum magnitude over the full domain.

    Agrees with analytic_rank_count within 1e-9 for every multilinear form
    and does not depend on the character index j.
    """
    dims = p.dims
    q = p.ctx.q
    total = q ** sum(dims)
    if total > cap:
        raise CapExceeded(f"character sum needs {total} points, cap is {cap}", size=total)
    counts = _value_bincount(p.ctx, p.coeffs, list(dims))
    table = p.ctx.char_table(j)
    bias = complex(counts @ table) / total
    mag = abs(bias)
    if mag < 1e-12:
        # impossible for d >= 2: the bias equals |Z|/q^ambient >= q^(-ambient)
        raise RuntimeError("character sum magnitude below 1e-12; internal error")
    return -math.log(mag) / math.log(q)


# -- slice rank ---------------------------------------------------------------

@dataclass(frozen=True)
class SubspaceWitness:
    """Tuple (W_0..W_{d-1}) with P restricted to it identically zero."""

    subspaces: tuple[Subspace, ...]
    codim_sum: int


def _make_witness(p: MultilinearForm, subs) -> SubspaceWitness:
    t = p.coeffs
    for axis, s in enumerate(subs):
        t = restrict_axis_arr(p.ctx, t, axis, s.basis)
    assert not t.any(), "witness restriction must vanish on all basis tuples"
    return SubspaceWitness(tuple(subs), sum(s.codim for s in subs))


class SliceRank(NamedTuple):
    value: int
    witness: Optional[SubspaceWitness]
    exact: bool


def _compositions(total: int, limits) -> list[tuple[int, ...]]:
    """All tuples c with sum(c) = total and 0 <= c_i <= limits[i], lex order."""
    out = []

    def rec(prefix, rest, remaining):
        if not rest:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        head, tail = rest[0], rest[1:]
        lo = max(0, remaining - sum(tail))
        for c in range(lo, min(head, remaining) + 1):
            rec(prefix + [c], tail, remaining - c)

    rec([], list(limits), total)
    out.sort()
    return out


def _search_cost(ctx: FieldCtx, dims, comp) -> int:
    cost = 1
    for i in range(len(dims) - 1):
        cost *= gaussian_binomial(dims[i], dims[i] - comp[i], ctx.q)
    return cost


def _search_composition(p: MultilinearForm, comp) -> Optional[SubspaceWitness]:
    """First witness with codim(W_i) = comp[i] for i < d-1 and the last slot
    resolved exactly: a witness completes iff the stacked restriction has
    rank at most comp[-1], in which case its kernel is the last subspace."""
    ctx = p.ctx
    dims = p.dims
    d = p.d
    per_slot = []
    for i in range(d - 1):
        per_slot.append(None if comp[i] == 0
                        else subspace_bases(ctx, dims[i], dims[i] - comp[i]))
    chosen: list[Optional[np.ndarray]] = [None] * (d - 1)

    def finish(t) -> Optional[SubspaceWitness]:
        a = t.reshape(-1, dims[-1])
        m = Matrix(ctx, a)
        if rref(m).rank > comp[-1]:
            return None
        w_last = kernel_basis(m)
        subs = []
        for jdx in range(d - 1):
            if chosen[jdx] is None:
                subs.append(Subspace.full(ctx, dims[jdx]))
            else:
                subs.append(Subspace(ctx, dims[jdx], chosen[jdx]))
        subs.append(w_last)
        return _make_witness(p, subs)

    def rec(i: int, t: np.ndarray) -> Optional[SubspaceWitness]:
        if i == d - 1:
            return finish(t)
        if per_slot[i] is None:
            chosen[i] = None
            return rec(i + 1, t)
        for b in per_slot[i]:
            chosen[i] = b
            got = rec(i + 1, restrict_axis_arr(ctx, t, i, b))
            if got is not None:
                return got
        chosen[i] = None
        return None

    return rec(0, p.coeffs)


def _greedy_upper(p: MultilinearForm) -> int:
    """Upper bound by repeatedly peeling one slice off the cheapest slot.

    At each step the slot with the smallest flattening rank is restricted
    to a hyperplane that lowers that rank by exactly one; each step costs
    one slice by the codimension characterization of the slice rank.
    """
    ctx = p.ctx
    t = p.coeffs
    total = 0
    while t.any():
        flats = [np.moveaxis(t, ax, 0).reshape(t.shape[ax], -1) for ax in range(t.ndim)]
        rks = [rref(Matrix(ctx, a)).rank for a in flats]
        ax = int(np.argmin(rks))
        a = flats[ax]
        red_t = rref(Matrix(ctx, a.T))
        pivot_rows = red_t.pivots  # indices of independent rows of a
        lk = kernel_basis(Matrix(ctx, a.T))
        keep = np.eye(t.shape[ax], dtype=np.int64)[list(pivot_rows[:-1])]
        h = Subspace.from_rows(ctx, np.vstack([lk.basis, keep]))
        assert h.dim == t.shape[ax] - 1
        t = restrict_axis_arr(ctx, t, ax, h.basis)
        total += 1
    return total


def slice_rank_exact(p: MultilinearForm, cap: int = SEARCH_CAP) -> SliceRank:
    """Least sum of slot codimensions over vanishing subspace tuples.

    Iterative deepening: levels r ascending, codimension compositions in
    lexicographic order, subspaces in canonical order; the first witness
    wins.  For d = 2 the deepening starts at the matrix rank, which every
    vanishing pair must reach (rank subadditivity).  If the projected
    search size exceeds the cap, a greedy upper bound is returned flagged
    non-exact.
    """
    ctx = p.ctx
    dims = p.dims
    d = p.d
    if p.is_zero():
        subs = tuple(Subspace.full(ctx, n) for n in dims)
        return SliceRank(0, _make_witness(p, subs), True)
    flat_ranks = [rref(Matrix(ctx, np.moveaxis(p.coeffs, ax, 0).reshape(dims[ax], -1))).rank
                  for ax in range(d)]
    upper = min(flat_ranks)
    lower = flat_ranks[0] if d == 2 else 1
    total_cost = 0
    levels = []
    for r in range(lower, upper + 1):
        comps = _compositions(r, dims)
        levels.append((r, comps))
        total_cost += sum(_search_cost(ctx, dims, c) for c in comps)
    if total_cost > cap:
        return SliceRank(_greedy_upper(p), None, False)
    for r, comps in levels:
        for comp in comps:
            w = _search_composition(p, comp)
            if w is not None:
                assert w.codim_sum == r
                return SliceRank(r, w, True)
    raise RuntimeError("slice rank search failed to terminate")  # unreachable


class SchmidtRank(NamedTuple):
    value: int
    exact: bool  # exact as a Schmidt rank: requires d <= 3 and an exact search


def schmidt_rank(p: MultilinearForm, cap: int = SEARCH_CAP) -> SchmidtRank:
    """Slice rank, exact as Schmidt rank for d <= 3, an upper bound beyond."""
    s = slice_rank_exact(p, cap=cap)
    return SchmidtRank(s.value, s.exact and p.d <= 3)


def subspace_rank_exact(mats, cap: int = SEARCH_CAP) -> int:
    """Minimum codim(W1) + codim(W2) with every given matrix vanishing on
    W1 x W2 (d = 2 setting; the input spans the space of forms)."""
    mats = list(mats)
    if not mats:
        raise InputError("need at least one matrix")
    ctx = mats[0].ctx
    shape = mats[0].data.shape
    if any(m.ctx != ctx or m.data.shape != shape for m in mats):
        raise InputError("all matrices must share field and shape")
    n1, n2 = shape
    stack = np.stack([m.data for m in mats])
    if not stack.any():
        return 0
    ranks = batch_rank(ctx, stack)
    lower = int(ranks.max())  # vanishing forces c1 + c2 >= rank(l) for each l
    rank_h = rref(Matrix(ctx, np.concatenate([m.data for m in mats], axis=1))).rank
    rank_v = rref(Matrix(ctx, np.concatenate([m.data for m in mats], axis=0))).rank
    upper = min(rank_h, rank_v)
    cost = 0
    for r in range(lower, upper + 1):
        for c1, _ in _compositions(r, (n1, n2)):
            cost += gaussian_binomial(n1, n1 - c1, ctx.q)
    if cost > cap:
        raise CapExceeded(f"subspace-rank search needs {cost} rank tests, cap is {cap}",
                          size=cost)
    for r in range(lower, upper + 1):
        for c1, c2 in _compositions(r, (n1, n2)):
            for b1 in subspace_bases(ctx, n1, n1 - c1):
                stacked = matmul_arr(ctx, b1, stack).reshape(-1, n2)
                if rref(Matrix(ctx, stacked)).rank <= c2:
                    return r
    raise RuntimeError("subspace rank search failed to terminate")  # unreachable


def _combine(ctx: FieldCtx, coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Linear combinations: (C, k) coefficients x (k, m, n) basis -> (C, m, n)."""
    if ctx.e == 1:
        return np.tensordot(coeffs, basis, axes=(1, 0)) % ctx.p
    out = np.zeros((coeffs.shape[0],) + basis.shape[1:], dtype=np.int64)
    for j in range(basis.shape[0]):
        out = ctx.add_arr(out, ctx.mul_arr(coeffs[:, j, None, None], basis[j][None]))
    return out


EXHAUSTIVE_SPAN_DIM = 4
EXHAUSTIVE_SPAN_CAP = 10 ** 5


def generic_max_rank(mats, ext_e: int = 1, samples: int = 0, seed: int = 0) -> int:
    """Max rank over the span, stabilized over extensions.

    Exhausts all base-field combinations when the span dimension is at
    most 4 (and the element count is small); otherwise at least the basis
    elements are ranked.  On top of that, `samples` seeded random
    combinations are drawn over GF(q^deg) for every deg = 1..ext_e, and the
    running maximum is returned, so the result is monotone nondecreasing
    in both ext_e and samples by construction.  With a large extension the
    result is the algebraic-closure value up to a per-sample failure
    probability of about (rank degeneracy degree) / q^deg; this is a
    heuristic, not a certificate.
    """
    mats = list(mats)
    if not mats:
        raise InputError("need at least one matrix")
    ctx = mats[0].ctx
    shape = mats[0].data.shape
    if any(m.ctx != ctx or m.data.shape != shape for m in mats):
        raise InputError("all matrices must share field and shape")
    if ext_e < 1:
        raise InputError(f"extension degree must be >= 1, got {ext_e}")
    flat = np.stack([m.data.reshape(-1) for m in mats])
    red = rref(Matrix(ctx, flat))
    dim_l = red.rank
    if dim_l == 0:
        return 0
    basis = red.matrix.data[:dim_l].reshape(dim_l, *shape)
    best = int(batch_rank(ctx, basis).max())
    if dim_l <= EXHAUSTIVE_SPAN_DIM and ctx.q ** dim_l <= EXHAUSTIVE_SPAN_CAP:
        combos = _all_vectors(ctx, dim_l)
        best = max(best, int(batch_rank(ctx, _combine(ctx, combos, basis)).max()))
    if samples > 0:
        for deg in range(1, ext_e + 1):
            ext, emb = ctx.extension(deg)
            ebasis = emb[basis]
            rng = np.random.default_rng(np.random.SeedSequence((seed, deg)))
            cf = rng.integers(0, ext.q, size=(samples, dim_l), dtype=np.int64)
            best = max(best, int(batch_rank(ext, _combine(ext, cf, ebasis)).max()))
    return best


# -- codimension estimator -----------------------------------------------------

@dataclass(frozen=True)
class ExtensionCount:
    extension_degree: int
    count: int
    dim_estimate: float


@dataclass(frozen=True)
class CodimEstimate:
    """Heuristic codimension of the zero set from extension point counts.

    dim_estimate(e) = log_{q^e} |Z(GF(q^e))| stabilizes near dim(Z) as e
    grows; g_hat = ambient - round(final estimate).  When the final
    estimate sits within 0.25 of a half-integer the rounding is refused
    (g_hat is None) and only the interval is reported.
    """

    ambient: int
    g_hat: Optional[int]
    interval: tuple[int, int]
    trace: tuple[ExtensionCount, ...]

    @property
    def ambiguous(self) -> bool:
        return self.g_hat is None


def codim_estimate(p: MultilinearForm, e_max: int, cap: int = POINT_CAP) -> CodimEstimate:
    if e_max < 1:
        raise InputError(f"e_max must be >= 1, got {e_max}")
    if p.d < 2:
        raise InputError("codimension estimate needs at least two slots")
    trace = []
    logq = math.log(p.ctx.q)
    ambient = sum(p.dims[1:])
    for e in range(1, e_max + 1):
        z = zero_set_count(p, e, cap=cap)
        dim_est = math.log(z.count) / (e * logq)
        trace.append(ExtensionCount(e, z.count, dim_est))
    x = trace[-1].dim_estimate
    frac = x - math.floor(x)
    if abs(frac - 0.5) < 0.25:
        lo = max(0, ambient - math.ceil(x))
        hi = min(ambient, ambient - math.floor(x))
        return CodimEstimate(ambient, None, (lo, hi), tuple(trace))
    g = min(max(ambient - round(x), 0), ambient)
    return CodimEstimate(ambient, g, (g, g), tuple(trace))
