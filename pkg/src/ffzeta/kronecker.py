"""Effective Kronecker reduction of polynomial systems.

Replaces m defining polynomials by n (homogeneous) or n+1 (affine)
with the same vanishing set over every extension field, provided q
exceeds the dependency degree.  Each elimination step finds an
algebraic dependence among n+1 homogeneous polynomials through a
Macaulay-style linear system, locates a point where the dependence's
top coefficient is nonzero, and changes basis so the last polynomial
becomes radical-redundant.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .ff import FieldCtx, FieldElement, enumerate_field
from .linalg import invert_matrix, nullspace_vector
from .logfield import LogTable, table_for
from .mpoly import MPoly, apply_matrix, monomials_of_degree


class FieldTooSmallError(ValueError):
    """q is too small for the reduction; retry over an extension field."""


class MixedDegreeError(ValueError):
    """Homogeneous reduction requires all inputs of one common degree."""


def dependency_degree(n: int, d: int) -> int:
    """The degree M = n*d^(n-1) at which n+1 forms must be dependent."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    M = n * d ** (n - 1)
    assert comb(M + n, n) > comb(M * d + n - 1, n - 1), "dependency count fails"
    return M


# ---------------------------------------------------------------------------
# dense homogeneous coefficient planes (matrix-build fast path)
#
# A homogeneous polynomial of degree t in v variables is stored as a
# (k, size) int64 array of base-p digit planes over the graded-lex
# monomial basis of degree t.

_INDEX_CACHE: dict[tuple[int, int], dict] = {}
_SHIFT_CACHE: dict[tuple[int, int, tuple[int, ...]], np.ndarray] = {}


def _mono_index(v: int, t: int) -> dict:
    key = (v, t)
    idx = _INDEX_CACHE.get(key)
    if idx is None:
        idx = {m: i for i, m in enumerate(monomials_of_degree(v, t))}
        _INDEX_CACHE[key] = idx
    return idx


def _shift_map(v: int, t: int, te: tuple[int, ...]) -> np.ndarray:
    """Index map: monomial i of degree t -> index of (mono_i + te)."""
    key = (v, t, te)
    m = _SHIFT_CACHE.get(key)
    if m is None:
        src = monomials_of_degree(v, t)
        dst = _mono_index(v, t + sum(te))
        m = np.array(
            [dst[tuple(a + b for a, b in zip(e, te))] for e in src], dtype=np.int64
        )
        _SHIFT_CACHE[key] = m
    return m


def _planes_from_poly(f: MPoly, t: int) -> np.ndarray:
    ctx = f.ctx
    size = comb(t + f.nvars - 1, f.nvars - 1)
    idx = _mono_index(f.nvars, t)
    planes = np.zeros((ctx.k, size), dtype=np.int64)
    for exps, c in f.terms.items():
        j = idx[exps]
        for i, ci in enumerate(c.coeffs):
            planes[i, j] = ci
    return planes


def _planes_mul(planes: np.ndarray, t: int, f: MPoly) -> np.ndarray:
    """Multiply degree-t planes by the sparse homogeneous polynomial f."""
    ctx = f.ctx
    p, k = ctx.p, ctx.k
    d = int(f.degree())
    v = f.nvars
    out = np.zeros((k, comb(t + d + v - 1, v - 1)), dtype=np.int64)
    for te, ce in f.terms.items():
        idxmap = _shift_map(v, t, te)
        if k == 1:
            out[0, idxmap] = (out[0, idxmap] + ce.coeffs[0] * planes[0]) % p
            continue
        conv = [None] * (2 * k - 1)
        for i, ci in enumerate(ce.coeffs):
            if ci == 0:
                continue
            for j in range(k):
                term = (ci * planes[j]) % p
                s = i + j
                conv[s] = term if conv[s] is None else (conv[s] + term) % p
        res = [conv[i] for i in range(k)]
        for tt in range(k, 2 * k - 1):
            o = conv[tt]
            if o is None:
                continue
            row = ctx._reduction_rows[tt - k]
            for i in range(k):
                if row[i]:
                    add = (row[i] * o) % p
                    res[i] = add if res[i] is None else (res[i] + add) % p
        for i in range(k):
            if res[i] is not None:
                out[i, idxmap] = (out[i, idxmap] + res[i]) % p
    return out


def _planes_to_codes(planes: np.ndarray, tab: LogTable) -> np.ndarray:
    p = tab.ctx.p
    packed = np.zeros(planes.shape[1], dtype=np.int64)
    for i in range(planes.shape[0] - 1, -1, -1):
        packed = packed * p + planes[i]
    return tab.codes_from_packed(packed)


# ---------------------------------------------------------------------------


def find_algebraic_dependence(fs: list[MPoly], M: int) -> dict:
    """A nonzero coefficient map A with sum_K A_K f^K = 0.

    Columns of the linear system are indexed by exponent vectors of
    degree M in len(fs) indeterminates; the column for K holds the
    coefficients of the product f^K over the degree-M*d monomials.
    The first free column of the Gaussian elimination is set to 1.
    """
    npolys = len(fs)
    ctx = fs[0].ctx
    n = fs[0].nvars
    if npolys != n + 1:
        raise ValueError(f"need n+1 = {n + 1} polynomials, got {npolys}")
    d = fs[0].degree()
    for f in fs:
        if not f or not f.is_homogeneous(int(d)):
            raise MixedDegreeError("inputs must be nonzero homogeneous of equal degree")
    d = int(d)
    tab = table_for(ctx)
    col_monos = monomials_of_degree(npolys, M)
    nrows = comb(M * d + n - 1, n - 1)
    mat = np.full((nrows, len(col_monos)), tab.ZERO, dtype=np.int64)
    col_index = {m: i for i, m in enumerate(col_monos)}

    one = np.zeros((ctx.k, 1), dtype=np.int64)
    one[0, 0] = 1

    def rec(i: int, rem: int, planes: np.ndarray, deg: int, prefix: tuple):
        if i == npolys - 1:
            cur, cd = planes, deg
            for _ in range(rem):
                cur = _planes_mul(cur, cd, fs[i])
                cd += d
            mat[:, col_index[prefix + (rem,)]] = _planes_to_codes(cur, tab)
            return
        cur, cd = planes, deg
        for e in range(rem + 1):
            if e > 0:
                cur = _planes_mul(cur, cd, fs[i])
                cd += d
            rec(i + 1, rem - e, cur, cd, prefix + (e,))

    rec(0, M, one, 0, ())
    x = nullspace_vector(mat, tab)
    assert x is not None, "dependency system unexpectedly has full rank"
    A = {}
    for m, code in zip(col_monos, x):
        if code != tab.ZERO:
            A[m] = tab.decode(int(code))
    assert A, "nullspace vector decoded to zero"
    return A


def eval_coeff_map(A: dict, point) -> FieldElement:
    """Evaluate a sparse exponent->coefficient map at a point."""
    ctx = next(iter(A.values())).ctx
    acc = ctx.zero
    for exps, c in A.items():
        v = c
        for x, e in zip(point, exps):
            if e:
                v = v * x**e
        acc = acc + v
    return acc


def find_nonvanishing_point(A: dict, M: int, ctx: FieldCtx):
    """A point b with A(b) = c != 0, by leading-coefficient descent.

    Views A as a polynomial in its last active variable, recurses on
    the (nonzero) leading coefficient to pin down the other
    coordinates, then tries at most deg+1 <= M+1 values in field
    enumeration order for the last one.  Requires q > M.
    """
    if not A:
        raise ValueError("dependence must be nonzero")
    if ctx.q <= M:
        raise FieldTooSmallError(f"need q > {M}, have q = {ctx.q}")
    nv = len(next(iter(A)))

    def solve(poly: dict) -> dict[int, FieldElement]:
        active = [j for j in range(nv) if any(e[j] for e in poly)]
        if not active:
            return {}
        j = active[-1]
        tstar = max(e[j] for e in poly)
        lead = {}
        for e, c in poly.items():
            if e[j] == tstar:
                key = e[:j] + (0,) + e[j + 1 :]
                prev = lead.get(key)
                s = c if prev is None else prev + c
                if s:
                    lead[key] = s
                elif prev is not None:
                    del lead[key]
        sigma = solve(lead)
        fixed = {v: sigma.get(v, ctx.zero) for v in range(nv) if v != j}
        coeffs: dict[int, FieldElement] = {}
        for e, c in poly.items():
            val = c
            for v, x in fixed.items():
                if e[v]:
                    val = val * x ** e[v]
            if val:
                prev = coeffs.get(e[j])
                s = val if prev is None else prev + val
                if s:
                    coeffs[e[j]] = s
                elif prev is not None:
                    del coeffs[e[j]]
        for cand in enumerate_field(ctx):
            h = ctx.zero
            for deg, cf in coeffs.items():
                h = h + cf * cand**deg
            if h:
                out = dict(fixed)
                out[j] = cand
                return out
        raise AssertionError("nonzero polynomial vanished everywhere")

    sol = solve(A)
    b = tuple(sol.get(j, ctx.zero) for j in range(nv))
    c = eval_coeff_map(A, b)
    assert c, "descent returned a root"
    return b, c


def extend_to_invertible(b, ctx: FieldCtx):
    """An invertible matrix whose last column is b.

    The first index i with b_i != 0 is the pivot; the other n columns
    are the standard basis vectors e_j, j != i, in ascending order.
    """
    if not any(b):
        raise ValueError("cannot extend the zero vector")
    n1 = len(b)
    pivot = next(i for i in range(n1) if b[i])
    cols = []
    for j in range(n1):
        if j != pivot:
            cols.append([ctx.one if u == j else ctx.zero for u in range(n1)])
    cols.append(list(b))
    return tuple(tuple(cols[v][u] for v in range(n1)) for u in range(n1))


@dataclass(frozen=True)
class DependencyWitness:
    """One elimination step, retained so the identity can be re-verified."""

    inputs: tuple[MPoly, ...]
    M: int
    A: dict
    b: tuple
    Bmat: tuple
    c: FieldElement


@dataclass(frozen=True)
class ReductionReport:
    mode: str  # "affine" | "homogeneous"
    ctx: FieldCtx
    nvars: int
    input_polys: tuple[MPoly, ...]
    output_polys: tuple[MPoly, ...]
    steps: tuple[DependencyWitness, ...]


def reduce_step(fs: list[MPoly], ctx: FieldCtx):
    """One fold: n+1 homogeneous degree-d forms -> n, plus the witness."""
    n = fs[0].nvars
    if len(fs) != n + 1:
        raise ValueError("reduce_step needs exactly n+1 polynomials")
    d = int(fs[0].degree())
    M = dependency_degree(n, d)
    A = find_algebraic_dependence(fs, M)
    b, c = find_nonvanishing_point(A, M, ctx)
    Bmat = extend_to_invertible(b, ctx)
    Binv = invert_matrix([list(r) for r in Bmat], ctx)
    g_all = apply_matrix(list(fs), Binv)
    witness = DependencyWitness(tuple(fs), M, A, b, Bmat, c)
    return g_all[:n], witness


def _infer(polys, ctx, nvars):
    if polys:
        return polys[0].ctx, polys[0].nvars
    if ctx is None or nvars is None:
        raise ValueError("empty input needs explicit ctx and nvars")
    return ctx, nvars


def reduce_homogeneous(polys, ctx: FieldCtx | None = None, nvars: int | None = None):
    """m homogeneous degree-d forms -> n forms with the same vanishing set.

    Zero inputs are dropped; if m <= n the input is padded with its
    first entry.  Otherwise remaining forms are folded one at a time
    (input order) into a running n-element list via reduce_step.
    """
    ctx, n = _infer(list(polys), ctx, nvars)
    work = [f for f in polys if f]
    zero = MPoly.zero(ctx, n)
    if any(f.degree() == 0 for f in work):
        out = [MPoly.const(ctx, n, 1)] + [zero] * (n - 1)
        return out, ReductionReport("homogeneous", ctx, n, tuple(polys), tuple(out), ())
    degs = {int(f.degree()) for f in work}
    if len(degs) > 1:
        raise MixedDegreeError(f"mixed homogeneous degrees {sorted(degs)}")
    for f in work:
        if not f.is_homogeneous():
            raise MixedDegreeError("inputs must be homogeneous")
    steps = []
    if len(work) > n:
        d = degs.pop()
        M = dependency_degree(n, d)
        if ctx.q <= M:
            raise FieldTooSmallError(f"need q > {M} = n*d^(n-1), have q = {ctx.q}")
        current: list[MPoly] = []
        for f in work:
            current.append(f)
            if len(current) == n + 1:
                gs, w = reduce_step(current, ctx)
                steps.append(w)
                current = [g for g in gs if g]
        work = current
    if work:
        out = list(work) + [work[0]] * (n - len(work))
    else:
        out = [zero] * n
    return out, ReductionReport("homogeneous", ctx, n, tuple(polys), tuple(out), tuple(steps))


def reduce_affine(polys, ctx: FieldCtx | None = None, nvars: int | None = None):
    """m polynomials of degree <= d in n variables -> n+1 with the same
    affine solution set over every extension.

    Homogenizes to the common max degree (variable 0 is the new one),
    reduces the homogeneous system in n+1 variables, dehomogenizes.
    Requires q > (n+1)*d^n when more than n+1 nonzero inputs remain.
    """
    ctx, n = _infer(list(polys), ctx, nvars)
    work = [f for f in polys if f]
    zero = MPoly.zero(ctx, n)
    if any(f.degree() == 0 for f in work):
        out = [MPoly.const(ctx, n, 1)] + [zero] * n
        return out, ReductionReport("affine", ctx, n, tuple(polys), tuple(out), ())
    if len(work) <= n + 1:
        if work:
            out = list(work) + [work[0]] * (n + 1 - len(work))
        else:
            out = [zero] * (n + 1)
        return out, ReductionReport("affine", ctx, n, tuple(polys), tuple(out), ())
    d = int(max(f.degree() for f in work))
    homog = [f.homogenize(d) for f in work]
    gs_hom, rep = reduce_homogeneous(homog, ctx=ctx, nvars=n + 1)
    out = [g.dehomogenize() for g in gs_hom]
    return out, ReductionReport("affine", ctx, n, tuple(polys), tuple(out), rep.steps)


def verify_witness(w: DependencyWitness) -> bool:
    """Re-check one witness by direct expansion: the dependence
    identity, the nonvanishing lead coefficient, and the basis change.
    """
    fs = w.inputs
    ctx = fs[0].ctx
    n = fs[0].nvars
    acc = MPoly.zero(ctx, n)
    for exps, coef in w.A.items():
        prod = MPoly.const(ctx, n, coef)
        for f, e in zip(fs, exps):
            if e:
                prod = prod * f**e
        acc = acc + prod
    if acc:
        return False
    if eval_coeff_map(w.A, w.b) != w.c or not w.c:
        return False
    Binv = invert_matrix([list(r) for r in w.Bmat], ctx)
    gs = apply_matrix(list(fs), Binv)
    return apply_matrix(gs, [list(r) for r in w.Bmat]) == list(fs)
