"""Sparse multivariate polynomials over a FieldCtx.

Terms are kept in a dict keyed by exponent tuples; zero coefficients
are never stored, so the zero polynomial has an empty term map.  The
text grammar (`+ - * ^`, integer or `[c0,c1,...]` coefficient
literals, named variables, parentheses) is shared with the program
language parser.
"""

from __future__ import annotations

import math
from math import comb

from .ff import FieldCtx, FieldElement, embed

NEG_INF = float("-inf")


def grlex_key(exps: tuple[int, ...]):
    return (sum(exps), exps)


def monomials_of_degree(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree exactly `degree`, graded-lex.

    The count is C(degree + nvars - 1, nvars - 1).
    """
    if nvars < 1:
        raise ValueError("nvars must be >= 1")
    if nvars == 1:
        return [(degree,)]
    out = []
    for e in range(degree, -1, -1):
        for rest in monomials_of_degree(nvars - 1, degree - e):
            out.append((e,) + rest)
    return out


def default_names(nvars: int) -> list[str]:
    return [f"x{i + 1}" for i in range(nvars)]


class MPoly:
    __slots__ = ("ctx", "nvars", "terms")

    def __init__(self, ctx: FieldCtx, nvars: int, terms=None):
        self.ctx = ctx
        self.nvars = nvars
        t = {}
        if terms:
            for exps, c in terms.items() if isinstance(terms, dict) else terms:
                if len(exps) != nvars:
                    raise ValueError("exponent tuple of wrong arity")
                c = ctx.coerce(c)
                if c:
                    prev = t.get(exps)
                    if prev is None:
                        t[exps] = c
                    else:
                        s = prev + c
                        if s:
                            t[exps] = s
                        else:
                            del t[exps]
        self.terms = t

    # -- constructors

    @classmethod
    def zero(cls, ctx, nvars):
        return cls(ctx, nvars)

    @classmethod
    def const(cls, ctx, nvars, c):
        return cls(ctx, nvars, {(0,) * nvars: ctx.coerce(c)})

    @classmethod
    def var(cls, ctx, nvars, i):
        exps = [0] * nvars
        exps[i] = 1
        return cls(ctx, nvars, {tuple(exps): ctx.one})

    # -- basics

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, MPoly)
            and self.ctx == other.ctx
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self, d=None) -> bool:
        if not self.terms:
            return True
        degs = {sum(e) for e in self.terms}
        if len(degs) != 1:
            return False
        return d is None or degs == {d}

    def _check_compat(self, other: "MPoly"):
        if self.ctx != other.ctx:
            raise ValueError("polynomials over distinct fields")
        if self.nvars != other.nvars:
            raise ValueError("polynomials with different variable counts")

    # -- ring operations

    def __add__(self, other):
        if isinstance(other, (int, FieldElement)):
            other = MPoly.const(self.ctx, self.nvars, other)
        self._check_compat(other)
        t = dict(self.terms)
        for exps, c in other.terms.items():
            prev = t.get(exps)
            if prev is None:
                t[exps] = c
            else:
                s = prev + c
                if s:
                    t[exps] = s
                else:
                    del t[exps]
        out = MPoly.__new__(MPoly)
        out.ctx, out.nvars, out.terms = self.ctx, self.nvars, t
        return out

    __radd__ = __add__

    def __neg__(self):
        out = MPoly.__new__(MPoly)
        out.ctx, out.nvars = self.ctx, self.nvars
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, FieldElement)):
            other = MPoly.const(self.ctx, self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, FieldElement)):
            return self.scale(other)
        self._check_compat(other)
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                prev = t.get(e)
                if prev is None:
                    if c:
                        t[e] = c
                else:
                    s = prev + c
                    if s:
                        t[e] = s
                    else:
                        del t[e]
        out = MPoly.__new__(MPoly)
        out.ctx, out.nvars, out.terms = self.ctx, self.nvars, t
        return out

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative polynomial power")
        result = MPoly.const(self.ctx, self.nvars, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def scale(self, c) -> "MPoly":
        c = self.ctx.coerce(c)
        out = MPoly.__new__(MPoly)
        out.ctx, out.nvars = self.ctx, self.nvars
        out.terms = {e: v * c for e, v in self.terms.items()} if c else {}
        return out

    # -- evaluation and substitution

    def eval(self, point) -> FieldElement:
        if len(point) != self.nvars:
            raise ValueError("point arity mismatch")
        acc = self.ctx.zero
        for exps, c in self.terms.items():
            v = c
            for x, e in zip(point, exps):
                if e:
                    v = v * x**e
            acc = acc + v
        return acc

    def substitute(self, values: dict[int, FieldElement]) -> "MPoly":
        """Fix some variables to field values; arity is unchanged."""
        t: dict = {}
        for exps, c in self.terms.items():
            v = c
            new_exps = list(exps)
            for i, val in values.items():
                e = exps[i]
                if e:
                    v = v * val**e
                    new_exps[i] = 0
            if not v:
                continue
            key = tuple(new_exps)
            prev = t.get(key)
            s = v if prev is None else prev + v
            if s:
                t[key] = s
            elif prev is not None:
                del t[key]
        out = MPoly.__new__(MPoly)
        out.ctx, out.nvars, out.terms = self.ctx, self.nvars, t
        return out

    # -- homogenization

    def homogenize(self, d: int) -> "MPoly":
        """Multiply each term up to degree d with a new variable at index 0."""
        if not self.terms:
            raise ValueError("cannot homogenize the zero polynomial")
        if self.degree() > d:
            raise ValueError(f"degree {self.degree()} exceeds target {d}")
        t = {}
        for exps, c in self.terms.items():
            t[(d - sum(exps),) + exps] = c
        return MPoly(self.ctx, self.nvars + 1, t)

    def dehomogenize(self) -> "MPoly":
        """Substitute 1 for variable 0 and drop it."""
        if self.nvars < 1:
            raise ValueError("no variable to dehomogenize")
        t: dict = {}
        for exps, c in self.terms.items():
            key = exps[1:]
            prev = t.get(key)
            s = c if prev is None else prev + c
            if s:
                t[key] = s
            elif prev is not None:
                del t[key]
        out = MPoly.__new__(MPoly)
        out.ctx, out.nvars, out.terms = self.ctx, self.nvars - 1, t
        return out

    # -- variable plumbing (used by the program reducer)

    def extend_vars(self, new_nvars: int) -> "MPoly":
        if new_nvars < self.nvars:
            raise ValueError("cannot shrink variable count")
        if new_nvars == self.nvars:
            return self
        pad = (0,) * (new_nvars - self.nvars)
        out = MPoly.__new__(MPoly)
        out.ctx, out.nvars = self.ctx, new_nvars
        out.terms = {e + pad: c for e, c in self.terms.items()}
        return out

    def remap_vars(self, mapping: list[int], new_nvars: int) -> "MPoly":
        """Relabel variable i as mapping[i]."""
        t = {}
        for exps, c in self.terms.items():
            new_exps = [0] * new_nvars
            for i, e in enumerate(exps):
                if e:
                    new_exps[mapping[i]] += e
            t[tuple(new_exps)] = c
        out = MPoly.__new__(MPoly)
        out.ctx, out.nvars, out.terms = self.ctx, new_nvars, t
        return out

    # -- formatting

    def to_str(self, names=None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = default_names(self.nvars)
        parts = []
        for exps in sorted(self.terms, key=grlex_key, reverse=True):
            c = self.terms[exps]
            factors = []
            for name, e in zip(names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            if self.ctx.k == 1:
                cs = str(c.coeffs[0])
                if factors and c.coeffs[0] == 1:
                    cs = ""
            else:
                cs = repr(c)
            if cs and factors:
                parts.append(cs + "*" + "*".join(factors))
            elif factors:
                parts.append("*".join(factors))
            else:
                parts.append(cs if cs else "1")
        return " + ".join(parts)

    def __repr__(self):
        return f"MPoly({self.to_str()})"


# ---------------------------------------------------------------------------
# linear algebra over the polynomial ring


def linear_combination(polys, coeffs) -> MPoly:
    if len(polys) != len(coeffs):
        raise ValueError("length mismatch")
    if not polys:
        raise ValueError("empty combination")
    acc = MPoly.zero(polys[0].ctx, polys[0].nvars)
    for f, c in zip(polys, coeffs):
        acc = acc + f.scale(c)
    return acc


def apply_matrix(polys, B) -> list[MPoly]:
    """Row-wise combinations: out_u = sum_v B[u][v] * polys[v]."""
    m = len(polys)
    if len(B) != m or any(len(row) != m for row in B):
        raise ValueError("matrix shape mismatch")
    return [linear_combination(polys, row) for row in B]


def embed_poly(f: MPoly, dst: FieldCtx) -> MPoly:
    """Read a polynomial over F_q as one over an extension field."""
    return MPoly(dst, f.nvars, {e: embed(f.ctx, dst, c) for e, c in f.terms.items()})


# ---------------------------------------------------------------------------
# text grammar (shared with the program language)


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} (at position {pos})")
        self.pos = pos


_SYMBOLS = set("+-*^()[],;=!&|")


def tokenize(text: str) -> list[tuple[str, object, int]]:
    """Tokens are (kind, value, pos); kinds: INT, NAME, SYM, END."""
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            out.append(("INT", int(text[i:j]), i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(("NAME", text[i:j], i))
            i = j
            continue
        if ch in _SYMBOLS:
            out.append(("SYM", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    out.append(("END", None, n))
    return out


class PolyParser:
    """Recursive-descent parser for polynomial expressions over tokens.

    Driven standalone by parse_poly and embedded by the program parser,
    which hands over (tokens, position) and takes the position back.
    """

    def __init__(self, tokens, ctx: FieldCtx, var_map: dict[str, int], nvars: int):
        self.tokens = tokens
        self.ctx = ctx
        self.var_map = var_map
        self.nvars = nvars
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_sym(self, sym: str):
        kind, val, pos = self.peek()
        if kind != "SYM" or val != sym:
            raise ParseError(f"expected {sym!r}", pos)
        return self.advance()

    def parse_expression(self) -> MPoly:
        kind, val, _ = self.peek()
        negate = False
        if kind == "SYM" and val in "+-":
            negate = val == "-"
            self.advance()
        acc = self.parse_term()
        if negate:
            acc = -acc
        while True:
            kind, val, _ = self.peek()
            if kind == "SYM" and val == "+":
                self.advance()
                acc = acc + self.parse_term()
            elif kind == "SYM" and val == "-":
                self.advance()
                acc = acc - self.parse_term()
            else:
                return acc

    def parse_term(self) -> MPoly:
        acc = self.parse_factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "SYM" and val == "*":
                self.advance()
                acc = acc * self.parse_factor()
            else:
                return acc

    def parse_factor(self) -> MPoly:
        base = self.parse_atom()
        kind, val, _ = self.peek()
        if kind == "SYM" and val == "^":
            self.advance()
            ekind, eval_, epos = self.peek()
            if ekind != "INT":
                raise ParseError("expected non-negative integer exponent", epos)
            self.advance()
            return base**eval_
        return base

    def parse_atom(self) -> MPoly:
        kind, val, pos = self.advance()
        if kind == "INT":
            return MPoly.const(self.ctx, self.nvars, val)
        if kind == "NAME":
            if val not in self.var_map:
                raise ParseError(f"undeclared variable {val!r}", pos)
            return MPoly.var(self.ctx, self.nvars, self.var_map[val])
        if kind == "SYM" and val == "(":
            inner = self.parse_expression()
            self.expect_sym(")")
            return inner
        if kind == "SYM" and val == "-":
            return -self.parse_atom()
        if kind == "SYM" and val == "[":
            coeffs = []
            while True:
                ckind, cval, cpos = self.advance()
                if ckind != "INT":
                    raise ParseError("expected integer in coefficient vector", cpos)
                coeffs.append(cval)
                kind2, val2, pos2 = self.advance()
                if kind2 == "SYM" and val2 == "]":
                    break
                if not (kind2 == "SYM" and val2 == ","):
                    raise ParseError("expected ',' or ']'", pos2)
            if len(coeffs) > self.ctx.k:
                raise ParseError("coefficient vector longer than field degree", pos)
            return MPoly.const(self.ctx, self.nvars, self.ctx.from_coeffs(coeffs))
        raise ParseError("expected a polynomial atom", pos)


def parse_poly(text: str, ctx: FieldCtx, names=None) -> MPoly:
    """Parse a polynomial in the given variables (default x1..xn)."""
    if names is None:
        raise ValueError("variable names required")
    var_map = {name: i for i, name in enumerate(names)}
    parser = PolyParser(tokenize(text), ctx, var_map, len(names))
    poly = parser.parse_expression()
    kind, _, pos = parser.peek()
    if kind != "END":
        raise ParseError("trailing input after polynomial", pos)
    return poly
