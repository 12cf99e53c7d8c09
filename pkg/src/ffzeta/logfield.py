"""Discrete-log tables for fast vectorized arithmetic in small fields.

Every element of F_q is encoded as an int64 "code": nonzero g^c gets
code c in [0, q-1), zero gets the sentinel code q-1, where g is the
first generator of F_q^* in enumeration order.  Multiplication is then
addition mod q-1 and addition uses the Zech logarithm table
z(d) = log(1 + g^d).  All operations below accept numpy arrays of
codes (scalars work too) and are the hot path for point counting and
Gaussian elimination.
"""

from __future__ import annotations

import numpy as np

from .ff import FieldCtx, FieldElement, prime_factors


def _find_generator(ctx: FieldCtx) -> FieldElement:
    """First generator of F_q^* in enumeration order."""
    q = ctx.q
    if q == 2:
        return ctx.one
    checks = [(q - 1) // r for r in prime_factors(q - 1)]
    for i in range(2, q):
        cand = ctx.from_index(i)
        if all(cand**e != ctx.one for e in checks):
            return cand
    raise AssertionError("no generator found")  # unreachable for a field


def _vec_scalar_mul(packed: np.ndarray, s: FieldElement, ctx: FieldCtx) -> np.ndarray:
    """Multiply an array of packed field values by the scalar s."""
    p, k = ctx.p, ctx.k
    if k == 1:
        return (packed * s.coeffs[0]) % p
    planes = [(packed // p**j) % p for j in range(k)]
    out = [np.zeros_like(packed) for _ in range(k)]
    over = [np.zeros_like(packed) for _ in range(k - 1)]
    for i, si in enumerate(s.coeffs):
        if si == 0:
            continue
        for j in range(k):
            t = i + j
            if t < k:
                out[t] = (out[t] + si * planes[j]) % p
            else:
                over[t - k] = (over[t - k] + si * planes[j]) % p
    for t in range(k - 1):
        row = ctx._reduction_rows[t]
        o = over[t]
        for i in range(k):
            if row[i]:
                out[i] = (out[i] + row[i] * o) % p
    res = np.zeros_like(packed)
    for j in reversed(range(k)):
        res = res * p + out[j]
    return res


class LogTable:
    """Exp/log/Zech tables for one field context."""

    def __init__(self, ctx: FieldCtx):
        self.ctx = ctx
        q = ctx.q
        self.q = q
        self.order = q - 1
        self.ZERO = q - 1  # sentinel code for the zero element
        self.generator = _find_generator(ctx)

        exp = np.zeros(max(self.order, 1), dtype=np.int64)
        exp[0] = 1  # packed value of the identity
        filled = 1
        gpow = self.generator
        while filled < self.order:
            take = min(filled, self.order - filled)
            exp[filled : filled + take] = _vec_scalar_mul(exp[:take], gpow, ctx)
            filled += take
            gpow = gpow * gpow
        self.exp = exp

        # codes fit comfortably in int32 at desk scale (q <= ~10^7)
        logbp = np.full(q, self.ZERO, dtype=np.int32)
        logbp[exp] = np.arange(self.order, dtype=np.int32)
        logbp[0] = self.ZERO
        if int(np.count_nonzero(logbp[1:] != self.ZERO)) != self.order:
            raise AssertionError("exp table is not a permutation")
        self.log_by_packed = logbp

        c0 = exp % ctx.p
        plus1 = np.where(c0 == ctx.p - 1, exp - (ctx.p - 1), exp + 1)
        self.zech = logbp[plus1]
        self.neg_shift = 0 if ctx.p == 2 else self.order // 2

    # -- conversions

    def encode(self, e: FieldElement) -> int:
        return int(self.log_by_packed[e.to_index()])

    def encode_vec(self, elems) -> np.ndarray:
        return self.log_by_packed[np.array([e.to_index() for e in elems], dtype=np.int64)]

    def decode(self, code: int) -> FieldElement:
        code = int(code)
        if code == self.ZERO:
            return self.ctx.zero
        return self.ctx.from_index(int(self.exp[code]))

    def codes_from_packed(self, packed: np.ndarray) -> np.ndarray:
        return self.log_by_packed[packed]

    def packed_from_codes(self, codes: np.ndarray) -> np.ndarray:
        out = np.zeros_like(codes)
        nz = codes != self.ZERO
        out[nz] = self.exp[codes[nz]]
        return out

    # -- arithmetic on code arrays; plain-int pairs take a scalar path

    def mul(self, a, b):
        if not isinstance(a, np.ndarray) and not isinstance(b, np.ndarray):
            a, b = int(a), int(b)
            if a == self.ZERO or b == self.ZERO:
                return self.ZERO
            return (a + b) % self.order
        a = np.asarray(a)
        b = np.asarray(b)
        res = a + b
        res %= self.order
        mask = (a == self.ZERO) | (b == self.ZERO)
        np.copyto(res, self.ZERO, where=mask)
        return res

    def neg(self, a):
        if not isinstance(a, np.ndarray):
            a = int(a)
            if self.neg_shift == 0 or a == self.ZERO:
                return a
            return (a + self.neg_shift) % self.order
        if self.neg_shift == 0:
            return a
        res = a + self.neg_shift
        res %= self.order
        np.copyto(res, self.ZERO, where=(a == self.ZERO))
        return res

    def add(self, a, b):
        if not isinstance(a, np.ndarray) and not isinstance(b, np.ndarray):
            a, b = int(a), int(b)
            if a == self.ZERO:
                return b
            if b == self.ZERO:
                return a
            z = int(self.zech[(b - a) % self.order])
            if z == self.ZERO:
                return self.ZERO
            return (a + z) % self.order
        a = np.asarray(a)
        b = np.asarray(b)
        d = b - a
        d %= self.order
        res = self.zech[d]
        zmask = res == self.ZERO
        res = res + a
        res %= self.order
        np.copyto(res, self.ZERO, where=zmask)
        np.copyto(res, b, where=(a == self.ZERO))
        np.copyto(res, a, where=(b == self.ZERO))
        return res

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def pow(self, a, e: int):
        if not isinstance(a, np.ndarray):
            a = int(a)
            if e == 0:
                return 0
            if a == self.ZERO:
                return self.ZERO
            return (a * (e % self.order if self.order > 1 else 0)) % self.order
        if e == 0:
            return np.zeros_like(a)
        er = e % self.order if self.order > 1 else 0
        res = (a.astype(np.int64) * er) % self.order
        res = res.astype(a.dtype)
        np.copyto(res, self.ZERO, where=(a == self.ZERO))
        return res

    def inv_scalar(self, a: int) -> int:
        if a == self.ZERO:
            raise ZeroDivisionError("inverse of zero code")
        return (self.order - a) % self.order if self.order > 1 else 0

    def tree_sum(self, arr: np.ndarray):
        """Sum a 1-D array of codes."""
        if arr.size == 0:
            return self.ZERO
        while arr.size > 1:
            if arr.size % 2:
                arr = np.concatenate([arr, np.array([self.ZERO], dtype=arr.dtype)])
            arr = self.add(arr[0::2], arr[1::2])
        return int(arr[0])


_TABLE_CACHE: dict[tuple[int, int], LogTable] = {}


def table_for(ctx: FieldCtx) -> LogTable:
    key = (ctx.p, ctx.k)
    tab = _TABLE_CACHE.get(key)
    if tab is None:
        tab = LogTable(ctx)
        _TABLE_CACHE[key] = tab
    return tab
