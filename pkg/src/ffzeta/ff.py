"""Exact arithmetic in F_p and its extensions F_{p^k}.

An extension field is always presented as a single polynomial-basis
extension of the prime field: F_{p^k} = F_p[x]/(modulus) where the
modulus is the first monic irreducible polynomial of degree k in a
fixed enumeration (coefficient vectors read as base-p counters, low
digit first).  Elements are length-k residue vectors, always reduced.

Construction is deterministic: the same (p, k) yields the identical
context object, so cross-extension identities are testable.
"""

from __future__ import annotations

import functools
from typing import Iterator

DEFAULT_FIELD_CAP = 10**7


class FieldError(ValueError):
    pass


class FieldCapError(FieldError):
    """p^k exceeds the configured desk-scale cap (not a math error)."""


def is_prime(n: int) -> bool:
    """Trial-division primality test; fields here are desk scale."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of n, ascending."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# dense univariate arithmetic over F_p (coefficient lists, low to high)

def _ptrim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _padd(a, b, p):
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % p
    return _ptrim(out)


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % p
    return _ptrim(out)


def _pdivmod(a, b, p):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        factor = (a[-1] * inv_lead) % p
        q[shift] = factor
        for i, cb in enumerate(b):
            a[shift + i] = (a[shift + i] - factor * cb) % p
        _ptrim(a)
    return _ptrim(q), a


def _pmod(a, b, p):
    return _pdivmod(a, b, p)[1]


def _pgcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        a, b = b, _pmod(a, b, p)
    if a:  # normalize monic
        inv_lead = pow(a[-1], p - 2, p)
        a = [(c * inv_lead) % p for c in a]
    return a


def _ppowmod(base, e, mod, p):
    result = [1]
    base = _pmod(base, mod, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), mod, p)
        base = _pmod(_pmul(base, base, p), mod, p)
        e >>= 1
    return result


def _pinvmod(a, mod, p):
    """Inverse of a modulo mod via extended Euclid."""
    r0, r1 = list(mod), _pmod(a, mod, p)
    s0, s1 = [], [1]
    while r1:
        q, r = _pdivmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _padd(s0, [(-c) % p for c in _pmul(q, s1, p)], p)
    if len(r0) != 1:
        raise ZeroDivisionError("element not invertible")
    c = pow(r0[0], p - 2, p)
    return [(x * c) % p for x in s0]


def _is_irreducible(f: list[int], p: int) -> bool:
    """f monic of degree k >= 1 irreducible over F_p.

    Uses the standard criterion: x^(p^k) == x mod f, and
    gcd(x^(p^(k/r)) - x, f) = 1 for every prime r | k.
    """
    k = len(f) - 1
    x = [0, 1]
    xq = _ppowmod(x, p**k, f, p)
    if _ptrim(_padd(xq, [0, p - 1], p)) != []:
        return False
    for r in prime_factors(k):
        h = _padd(_ppowmod(x, p ** (k // r), f, p), [0, p - 1], p)
        if len(_pgcd(h, f, p)) != 1:
            return False
    return True


def _first_irreducible(p: int, k: int) -> tuple[int, ...]:
    """First monic irreducible of degree k over F_p.

    Candidates x^k + c_{k-1}x^{k-1} + ... + c_0 enumerated by reading
    (c_0, ..., c_{k-1}) as a base-p counter, low digit first.
    """
    if k == 1:
        return (0, 1)
    for i in range(p**k):
        coeffs = []
        m = i
        for _ in range(k):
            coeffs.append(m % p)
            m //= p
        cand = coeffs + [1]
        if _is_irreducible(cand, p):
            return tuple(cand)
    raise AssertionError("no irreducible polynomial found")  # unreachable


# ---------------------------------------------------------------------------


class FieldCtx:
    """The field F_{p^k}, presented as F_p[x]/(modulus)."""

    __slots__ = ("p", "k", "q", "modulus", "_reduction_rows")

    def __init__(self, p: int, k: int, modulus: tuple[int, ...]):
        self.p = p
        self.k = k
        self.q = p**k
        self.modulus = modulus
        # x^(k+t) mod modulus for t = 0..k-2, used to fold products back
        rows = []
        if k > 1:
            base = tuple((-c) % p for c in modulus[:k])  # x^k mod modulus
            rows.append(base)
            for _ in range(k - 2):
                prev = rows[-1]
                overflow = prev[k - 1]
                shifted = (0,) + prev[: k - 1]
                rows.append(
                    tuple((shifted[i] + overflow * base[i]) % p for i in range(k))
                )
        self._reduction_rows = tuple(rows)

    def __repr__(self):
        return f"FieldCtx(p={self.p}, k={self.k})"

    def __eq__(self, other):
        return (
            isinstance(other, FieldCtx)
            and self.p == other.p
            and self.k == other.k
        )

    def __hash__(self):
        return hash((self.p, self.k))

    # element constructors ---------------------------------------------------

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, (0,) * self.k)

    @property
    def one(self) -> "FieldElement":
        return self.const(1)

    @property
    def gen(self) -> "FieldElement":
        """The class of x (equals 0 in the prime field, where modulus = x)."""
        if self.k == 1:
            return self.zero
        coeffs = [0] * self.k
        coeffs[1] = 1
        return FieldElement(self, tuple(coeffs))

    def const(self, c: int) -> "FieldElement":
        """The prime-subfield constant c mod p."""
        coeffs = [0] * self.k
        coeffs[0] = c % self.p
        return FieldElement(self, tuple(coeffs))

    def from_coeffs(self, coeffs) -> "FieldElement":
        cs = [c % self.p for c in coeffs]
        if len(cs) > self.k:
            raise FieldError(f"coefficient vector longer than degree {self.k}")
        cs += [0] * (self.k - len(cs))
        return FieldElement(self, tuple(cs))

    def from_index(self, i: int) -> "FieldElement":
        """The i-th element in enumeration order (base-p digits of i)."""
        coeffs = []
        for _ in range(self.k):
            coeffs.append(i % self.p)
            i //= self.p
        return FieldElement(self, tuple(coeffs))

    def coerce(self, v) -> "FieldElement":
        if isinstance(v, FieldElement):
            if v.ctx != self:
                raise FieldError(f"element of {v.ctx!r} used in {self!r}")
            return v
        if isinstance(v, int):
            return self.const(v)
        raise TypeError(f"cannot coerce {v!r} into {self!r}")


class FieldElement:
    """An element of a FieldCtx: a reduced length-k residue vector."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldCtx, coeffs: tuple[int, ...]):
        self.ctx = ctx
        self.coeffs = coeffs

    # -- predicates / conversions

    def __bool__(self):
        return any(self.coeffs)

    def to_index(self) -> int:
        """Position in enumeration order (base-p value of the vector)."""
        v = 0
        for c in reversed(self.coeffs):
            v = v * self.ctx.p + c
        return v

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ctx.const(other)
        return (
            isinstance(other, FieldElement)
            and self.ctx == other.ctx
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.ctx.p, self.ctx.k, self.coeffs))

    def __repr__(self):
        if self.ctx.k == 1:
            return str(self.coeffs[0])
        return "[" + ",".join(str(c) for c in self.coeffs) + "]"

    # -- arithmetic

    def _same_ctx(self, other) -> "FieldElement":
        if isinstance(other, int):
            return self.ctx.const(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.ctx != self.ctx:
            raise FieldError("arithmetic between elements of distinct fields")
        return other

    def __add__(self, other):
        other = self._same_ctx(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.ctx.p
        return FieldElement(
            self.ctx,
            tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)),
        )

    __radd__ = __add__

    def __neg__(self):
        p = self.ctx.p
        return FieldElement(self.ctx, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other):
        other = self._same_ctx(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.ctx.p
        return FieldElement(
            self.ctx,
            tuple((a - b) % p for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._same_ctx(other)
        if other is NotImplemented:
            return NotImplemented
        ctx = self.ctx
        p = ctx.p
        if ctx.k == 1:
            return FieldElement(ctx, ((self.coeffs[0] * other.coeffs[0]) % p,))
        k = ctx.k
        prod = [0] * (2 * k - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] = (prod[i + j] + a * b) % p
        out = prod[:k]
        for t in range(k, 2 * k - 1):
            c = prod[t]
            if c:
                row = ctx._reduction_rows[t - k]
                for i in range(k):
                    out[i] = (out[i] + c * row[i]) % p
        return FieldElement(ctx, tuple(out))

    __rmul__ = __mul__

    def inv(self) -> "FieldElement":
        if not self:
            raise ZeroDivisionError("inverse of zero field element")
        ctx = self.ctx
        if ctx.k == 1:
            return FieldElement(ctx, (pow(self.coeffs[0], ctx.p - 2, ctx.p),))
        c = _pinvmod(_ptrim(list(self.coeffs)), list(ctx.modulus), ctx.p)
        return ctx.from_coeffs(c)

    def __truediv__(self, other):
        other = self._same_ctx(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        ctx = self.ctx
        if not self:
            if e == 0:
                return ctx.one
            if e < 0:
                raise ZeroDivisionError("negative power of zero")
            return ctx.zero
        e %= ctx.q - 1 if ctx.q > 2 else 1
        if e < 0:
            e += ctx.q - 1
        result = ctx.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result


# ---------------------------------------------------------------------------
# deterministic construction and enumeration

_CTX_CACHE: dict[tuple[int, int], FieldCtx] = {}


def ctx_create(p: int, k: int, cap: int = DEFAULT_FIELD_CAP) -> FieldCtx:
    """The field F_{p^k} with the canonical modulus for (p, k)."""
    if not isinstance(p, int) or not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if not isinstance(k, int) or k < 1:
        raise FieldError(f"extension degree must be >= 1, got {k}")
    if p**k > cap:
        raise FieldCapError(f"p^k = {p**k} exceeds desk-scale cap {cap}")
    key = (p, k)
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        ctx = FieldCtx(p, k, _first_irreducible(p, k))
        _CTX_CACHE[key] = ctx
    return ctx


def enumerate_field(ctx: FieldCtx) -> Iterator[FieldElement]:
    """All p^k elements in the fixed order, starting with 0."""
    for i in range(ctx.q):
        yield ctx.from_index(i)


# ---------------------------------------------------------------------------
# embeddings F_{p^a} -> F_{p^b} for a | b

@functools.lru_cache(maxsize=None)
def _generator_image(src_key: tuple[int, int], dst_key: tuple[int, int]) -> FieldElement:
    """Image of src's generator in dst, canonical divisor-chain choice.

    Single prime-index steps pick the first root of src's modulus in
    dst's enumeration order; composite steps factor through the largest
    intermediate divisor, so embed(a->b) . embed(b->c) = embed(a->c)
    whenever b is that canonical intermediate.
    """
    p, a = src_key
    _, c = dst_key
    src = ctx_create(p, a)
    dst = ctx_create(p, c)
    ratio = c // a
    if is_prime(ratio):
        coeffs = [dst.const(x) for x in src.modulus]
        for cand in enumerate_field(dst):
            acc = dst.zero
            for co in reversed(coeffs):
                acc = acc * cand + co
            if not acc:
                return cand
        raise AssertionError("modulus has no root in extension")  # unreachable
    b = c // prime_factors(ratio)[0]
    mid = ctx_create(p, b)
    g_mid = _generator_image(src_key, (p, b))
    return embed(mid, dst, g_mid)


def embed(src: FieldCtx, dst: FieldCtx, e: FieldElement) -> FieldElement:
    """The canonical field embedding F_{p^a} -> F_{p^b}, a | b."""
    if src.p != dst.p:
        raise FieldError("embeddings require equal characteristic")
    if dst.k % src.k != 0:
        raise FieldError(f"degree {src.k} does not divide {dst.k}")
    if e.ctx != src:
        raise FieldError("element does not belong to the source field")
    if src.k == dst.k:
        return e
    g = _generator_image((src.p, src.k), (dst.p, dst.k))
    acc = dst.zero
    for c in reversed(e.coeffs):
        acc = acc * g + dst.const(c)
    return acc
