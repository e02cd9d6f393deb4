"""Multilinear forms as dense coefficient tensors, plus polynomial functions.

A form P(v1, ..., vd) = sum c[i1..id] * v1[i1] * ... * vd[id] is stored as
a d-way int64 array of element encodings.  Slot indices are 0-based
everywhere (numpy axis convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, InputError
from .gfq import FieldCtx, descriptor, field_from_descriptor
from .linalg import Matrix, Subspace

COEFF_CAP = 10 ** 7  # dense storage bound on prod(dims)


class MultilinearForm:
    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldCtx, coeffs):
        arr = np.asarray(coeffs, dtype=np.int64)
        if arr.ndim < 1 or any(n < 1 for n in arr.shape):
            raise InputError("a form needs d >= 1 slots, each of dimension >= 1")
        if arr.size > COEFF_CAP:
            raise CapExceeded(f"coefficient tensor of size {arr.size} exceeds {COEFF_CAP}",
                              size=arr.size)
        if arr.size and (arr.min() < 0 or arr.max() >= ctx.q):
            raise InputError(f"coefficients must lie in [0, {ctx.q})")
        self.ctx = ctx
        arr = arr.copy()
        arr.setflags(write=False)
        self.coeffs = arr

    @property
    def dims(self) -> tuple[int, ...]:
        return self.coeffs.shape

    @property
    def d(self) -> int:
        return self.coeffs.ndim

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def __eq__(self, other):
        return (isinstance(other, MultilinearForm) and self.ctx == other.ctx
                and self.dims == other.dims
                and np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.ctx, self.dims, self.coeffs.tobytes()))

    def __repr__(self):
        return f"MultilinearForm(GF({self.ctx.q}), dims={self.dims})"


def contract_axis_arr(ctx: FieldCtx, t: np.ndarray, axis: int, v: np.ndarray) -> np.ndarray:
    """Contract one tensor axis with a vector of element encodings."""
    v = np.asarray(v, dtype=np.int64)
    if ctx.e == 1:
        return np.tensordot(v, t, axes=(0, axis)) % ctx.p
    tm = np.moveaxis(t, axis, 0)
    out = np.zeros(tm.shape[1:], dtype=np.int64)
    for i in range(tm.shape[0]):
        if v[i]:
            out = ctx.add_arr(out, ctx.mul_arr(tm[i], v[i]))
    return out


def restrict_axis_arr(ctx: FieldCtx, t: np.ndarray, axis: int, basis: np.ndarray) -> np.ndarray:
    """Replace one axis by its restriction to the row span of `basis` (k x n)."""
    basis = np.asarray(basis, dtype=np.int64)
    if ctx.e == 1:
        out = np.tensordot(basis, t, axes=(1, axis)) % ctx.p
        return np.moveaxis(out, 0, axis)
    tm = np.moveaxis(t, axis, 0)
    k = basis.shape[0]
    out = np.zeros((k,) + tm.shape[1:], dtype=np.int64)
    for i in range(tm.shape[0]):
        col = basis[:, i]
        if col.any():
            shaped = col.reshape((k,) + (1,) * (tm.ndim - 1))
            out = ctx.add_arr(out, ctx.mul_arr(shaped, tm[i][None, ...]))
    return np.moveaxis(out, 0, axis)


def evaluate(p: MultilinearForm, *vectors) -> int:
    """Value of the defining multilinear sum at one point per slot."""
    if len(vectors) != p.d:
        raise InputError(f"expected {p.d} vectors, got {len(vectors)}")
    t = p.coeffs
    for slot, v in enumerate(vectors):
        v = np.asarray(v, dtype=np.int64)
        if v.shape != (p.dims[slot],):
            raise InputError(f"slot {slot} expects a vector of length {p.dims[slot]}")
        t = contract_axis_arr(p.ctx, t, 0, v)
    return int(t)


def contract(p: MultilinearForm, slot: int, v) -> MultilinearForm:
    """Fix one slot at a vector, producing a form of arity d-1."""
    if not (0 <= slot < p.d):
        raise InputError(f"slot {slot} out of range for arity {p.d}")
    if p.d == 1:
        raise InputError("cannot contract the last remaining slot; use evaluate")
    v = np.asarray(v, dtype=np.int64)
    if v.shape != (p.dims[slot],):
        raise InputError(f"slot {slot} expects a vector of length {p.dims[slot]}")
    return MultilinearForm(p.ctx, contract_axis_arr(p.ctx, p.coeffs, slot, v))


def flatten(p: MultilinearForm, slot: int) -> Matrix:
    """Matrix of shape n_slot x (product of the other dims).

    Columns follow the row-major order of the remaining slots.
    """
    if not (0 <= slot < p.d):
        raise InputError(f"slot {slot} out of range for arity {p.d}")
    moved = np.moveaxis(p.coeffs, slot, 0)
    return Matrix(p.ctx, moved.reshape(p.dims[slot], -1))


def restrict(p: MultilinearForm, subspaces) -> MultilinearForm:
    """Restrict each slot to a subspace (None keeps the slot whole)."""
    if len(subspaces) != p.d:
        raise InputError("one subspace (or None) per slot required")
    t = p.coeffs
    for axis, s in enumerate(subspaces):
        if s is None:
            continue
        if not isinstance(s, Subspace) or s.ambient != p.dims[axis] or s.ctx != p.ctx:
            raise InputError(f"slot {axis} restriction mismatch")
        t = restrict_axis_arr(p.ctx, t, axis, s.basis)
    return MultilinearForm(p.ctx, t) if t.size else _empty_ok(p.ctx, t)


def _empty_ok(ctx, t):
    # a zero-dimensional slot is a legitimate restriction result; bypass the
    # "each dim >= 1" constructor check while keeping the value immutable
    f = MultilinearForm.__new__(MultilinearForm)
    f.ctx = ctx
    arr = np.asarray(t, dtype=np.int64).copy()
    arr.setflags(write=False)
    f.coeffs = arr
    return f


def move_slot_first(p: MultilinearForm, slot: int) -> MultilinearForm:
    """Re-root the form so `slot` becomes slot 0 (order of the rest kept)."""
    if not (0 <= slot < p.d):
        raise InputError(f"slot {slot} out of range for arity {p.d}")
    return MultilinearForm(p.ctx, np.moveaxis(p.coeffs, slot, 0))


# -- generators -------------------------------------------------------------

def gen_diagonal(ctx: FieldCtx, n: int, d: int) -> MultilinearForm:
    """sum_i x1[i] x2[i] ... xd[i]."""
    c = np.zeros((n,) * d, dtype=np.int64)
    idx = np.arange(n)
    c[tuple(idx for _ in range(d))] = 1
    return MultilinearForm(ctx, c)


def gen_random(ctx: FieldCtx, dims, seed: int) -> MultilinearForm:
    """Uniform i.i.d. coefficients from a seeded generator (reproducible)."""
    rng = np.random.default_rng(seed)
    c = rng.integers(0, ctx.q, size=tuple(dims), dtype=np.int64)
    return MultilinearForm(ctx, c)


def gen_rank_one(ctx: FieldCtx, covectors) -> MultilinearForm:
    """Product form l1(v1) * ... * ld(vd); coefficients are digit products."""
    vs = [np.asarray(v, dtype=np.int64) for v in covectors]
    if not vs:
        raise InputError("need at least one covector")
    cur = vs[0]
    for v in vs[1:]:
        cur = ctx.mul_arr(cur[..., None], v[(None,) * cur.ndim + (slice(None),)])
    return MultilinearForm(ctx, cur)


def gen_from_matrix(m: Matrix) -> MultilinearForm:
    """The bilinear form (u, v) -> u^T M v."""
    return MultilinearForm(m.ctx, m.data)


# -- polynomial functions (prime fields) ------------------------------------

@dataclass(frozen=True)
class PolynomialFn:
    """Polynomial function on GF(p)^n given by sparse terms.

    terms is a tuple of (exponent vector, coefficient); exponents are < p
    since x^p = x as a function on GF(p).
    """

    ctx: FieldCtx
    n: int
    terms: tuple[tuple[tuple[int, ...], int], ...]

    def __post_init__(self):
        if self.ctx.e != 1:
            raise InputError("polynomial functions are supported over prime fields only")
        p = self.ctx.p
        for exps, coeff in self.terms:
            if len(exps) != self.n:
                raise InputError("each exponent vector must have length n")
            if any(not (0 <= e < p) for e in exps):
                raise InputError("exponents must lie in [0, p)")
            if not (0 <= coeff < p):
                raise InputError("coefficients must lie in [0, p)")

    def degree(self) -> int:
        degs = [sum(exps) for exps, coeff in self.terms if coeff % self.ctx.p]
        return max(degs, default=0)

    def evaluate(self, point) -> int:
        p = self.ctx.p
        x = [int(v) % p for v in point]
        if len(x) != self.n:
            raise InputError(f"expected a point of length {self.n}")
        acc = 0
        for exps, coeff in self.terms:
            t = coeff
            for xi, ei in zip(x, exps):
                if ei:
                    t = t * pow(xi, ei, p) % p
            acc = (acc + t) % p
        return acc

    def evaluate_all(self) -> np.ndarray:
        """Values on all p^n points, indexed by base-p encoding of the point."""
        p, n = self.ctx.p, self.n
        npts = p ** n
        pts = np.arange(npts, dtype=np.int64)
        coords = np.empty((npts, n), dtype=np.int64)
        t = pts.copy()
        for j in range(n):
            coords[:, j] = t % p
            t //= p
        out = np.zeros(npts, dtype=np.int64)
        for exps, coeff in self.terms:
            if coeff % p == 0:
                continue
            term = np.full(npts, coeff, dtype=np.int64)
            for j, ej in enumerate(exps):
                if ej:
                    term = term * _pow_mod_arr(coords[:, j], ej, p) % p
            out = (out + term) % p
        return out


def _pow_mod_arr(base: np.ndarray, k: int, p: int) -> np.ndarray:
    r = np.ones_like(base)
    b = base % p
    while k > 0:
        if k & 1:
            r = r * b % p
        b = b * b % p
        k >>= 1
    return r


def polarize(q: PolynomialFn, d: int) -> MultilinearForm:
    """Symmetric multilinear form attached to a degree-d polynomial.

    Qt(h1, ..., hd) = sum over subsets S of {1..d} of (-1)^(d-|S|) *
    Q(sum_{i in S} h_i).  Valid without division only when d < p, which is
    enforced; coefficients are extracted by evaluating on basis tuples.
    Terms of degree below d difference away, so degree(Q) <= d is allowed.
    """
    p, n = q.ctx.p, q.n
    if q.degree() > d:
        raise InputError(f"polynomial has degree {q.degree()}, expected at most {d}")
    if d >= p:
        raise InputError(f"polarization requires degree < characteristic ({d} >= {p})")
    vals = q.evaluate_all()
    pw = np.array([p ** j for j in range(n)], dtype=np.int64)
    coeffs = np.zeros((n,) * d, dtype=np.int64)
    subsets = [(s, bin(s).count("1")) for s in range(1 << d)]
    for idx in np.ndindex(*(n,) * d):
        acc = 0
        for s, size in subsets:
            counts = np.zeros(n, dtype=np.int64)
            for pos in range(d):
                if s >> pos & 1:
                    counts[idx[pos]] += 1
            point = int(((counts % p) @ pw))
            sign = -1 if (d - size) % 2 else 1
            acc += sign * int(vals[point])
        coeffs[idx] = acc % p
    return MultilinearForm(q.ctx, coeffs)


# -- serialization -----------------------------------------------------------

def tensor_to_obj(p: MultilinearForm) -> dict:
    """Tensor JSON object: coeffs row-major, last index fastest."""
    return {
        "field": descriptor(p.ctx),
        "dims": list(p.dims),
        "coeffs": [int(c) for c in p.coeffs.reshape(-1)],
    }


def tensor_from_obj(obj) -> MultilinearForm:
    if not isinstance(obj, dict) or not {"field", "dims", "coeffs"} <= set(obj):
        raise InputError("tensor object needs keys field, dims, coeffs")
    ctx = field_from_descriptor(obj["field"])
    dims = obj["dims"]
    if (not isinstance(dims, list) or not dims
            or any(not isinstance(n, int) or n < 1 for n in dims)):
        raise InputError("dims must be a nonempty list of positive integers")
    coeffs = obj["coeffs"]
    want = math.prod(dims)
    if not isinstance(coeffs, list) or len(coeffs) != want:
        raise InputError(f"coeffs must be a list of length {want}")
    if any(not isinstance(c, int) or not (0 <= c < ctx.q) for c in coeffs):
        raise InputError(f"coefficients must be integers in [0, {ctx.q})")
    return MultilinearForm(ctx, np.array(coeffs, dtype=np.int64).reshape(dims))


def poly_to_obj(q: PolynomialFn) -> dict:
    return {
        "field": descriptor(q.ctx),
        "n": q.n,
        "terms": [{"exps": list(e), "coeff": c} for e, c in q.terms],
    }


def poly_from_obj(obj) -> PolynomialFn:
    if not isinstance(obj, dict) or not {"field", "n", "terms"} <= set(obj):
        raise InputError("polynomial object needs keys field, n, terms")
    ctx = field_from_descriptor(obj["field"])
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise InputError("n must be a positive integer")
    terms = []
    if not isinstance(obj["terms"], list):
        raise InputError("terms must be a list")
    for t in obj["terms"]:
        if not isinstance(t, dict) or not {"exps", "coeff"} <= set(t):
            raise InputError("each term needs exps and coeff")
        exps = t["exps"]
        if not isinstance(exps, list) or len(exps) != n:
            raise InputError("exps must be a list of length n")
        terms.append((tuple(int(e) for e in exps), int(t["coeff"])))
    return PolynomialFn(ctx, n, tuple(terms))
