"""Linear algebra over finite fields.

Two tiers: small dense matrices of FieldElement (inverses,
determinants for the change-of-basis matrices) and a vectorized
nullspace routine on log-code matrices for the large dependency
systems.
"""

from __future__ import annotations

import numpy as np

from .ff import FieldCtx, FieldElement
from .logfield import LogTable


class SingularMatrixError(ValueError):
    pass


# ---------------------------------------------------------------------------
# FieldElement matrices (lists of lists), small sizes


def identity_matrix(ctx: FieldCtx, n: int) -> list[list[FieldElement]]:
    return [[ctx.one if i == j else ctx.zero for j in range(n)] for i in range(n)]


def mat_vec(M, v):
    return [sum((a * b for a, b in zip(row, v)), start=row[0].ctx.zero) for row in M]


def mat_mul(A, B):
    n, m, r = len(A), len(B), len(B[0])
    ctx = A[0][0].ctx
    out = [[ctx.zero] * r for _ in range(n)]
    for i in range(n):
        for k in range(m):
            a = A[i][k]
            if a:
                for j in range(r):
                    out[i][j] = out[i][j] + a * B[k][j]
    return out


def invert_matrix(M, ctx: FieldCtx):
    """Gauss-Jordan inverse; raises SingularMatrixError if singular."""
    n = len(M)
    aug = [list(row) + ident for row, ident in zip(M, identity_matrix(ctx, n))]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inv()
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def determinant(M, ctx: FieldCtx) -> FieldElement:
    n = len(M)
    m = [list(row) for row in M]
    det = ctx.one
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return ctx.zero
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det = det * m[col][col]
        inv = m[col][col].inv()
        for r in range(col + 1, n):
            if m[r][col]:
                f = m[r][col] * inv
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return det


# ---------------------------------------------------------------------------
# vectorized nullspace on log-code matrices


def nullspace_vector(mat: np.ndarray, tab: LogTable) -> np.ndarray | None:
    """A nonzero nullspace vector of mat (codes), or None if full rank.

    Deterministic: columns are processed left to right, the first
    column that yields no pivot becomes the free column (set to 1,
    all later columns 0) and earlier pivots are back-substituted.
    """
    Z = tab.ZERO
    m = mat.copy()
    nrows, ncols = m.shape
    pivot_cols: list[int] = []
    r = 0
    free_col = None
    for c in range(ncols):
        if r == nrows:
            free_col = c
            break
        nz = np.nonzero(m[r:, c] != Z)[0]
        if nz.size == 0:
            free_col = c
            break
        pr = r + int(nz[0])
        if pr != r:
            m[[r, pr]] = m[[pr, r]]
        # scale pivot row to 1
        m[r] = tab.mul(m[r], tab.inv_scalar(int(m[r, c])))
        if r + 1 < nrows:
            factors = m[r + 1 :, c]
            upd = tab.mul(tab.neg(factors)[:, None], m[r][None, :])
            m[r + 1 :] = tab.add(m[r + 1 :], upd)
        pivot_cols.append(c)
        r += 1
    if free_col is None:
        return None
    x = np.full(ncols, Z, dtype=np.int64)
    x[free_col] = 0  # code of 1
    for i in range(len(pivot_cols) - 1, -1, -1):
        pc = pivot_cols[i]
        lo, hi = pc + 1, free_col + 1
        if lo < hi:
            s = tab.tree_sum(tab.mul(m[i, lo:hi], x[lo:hi]))
        else:
            s = Z
        x[pc] = tab.neg(s)
    return x
