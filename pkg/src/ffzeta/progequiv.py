"""Randomized programs over finite fields and their equivalence.

A program is a semicolon-separated list of expressions over input
variables I and random variables R: polynomials, `fail`, and
`if <cond> then <e1> else <e2>` with conditions built from atoms
`<poly> = <poly>` by `!`, `&`, `|`.  Output distributions are computed
by exact enumeration of the random assignments.  reduce_query compiles
a general equivalence query down to one between plain arithmetic
programs through failure consolidation, CNF guard polynomials, and
inverse-gadget elimination of conditionals.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .config import Config, DEFAULT_CONFIG, CapExceededError
from .count import CountRecord  # noqa: F401  (re-exported convenience)
from .ff import FieldCtx, FieldElement, ctx_create, embed
from .grid import PreparedPoly, grid_ranges, packed_coords
from .logfield import table_for
from .mpoly import MPoly, ParseError, PolyParser, embed_poly, tokenize

_KEYWORDS = {"if", "then", "else", "fail"}


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class CAtom:
    poly: MPoly  # the proposition poly = 0


@dataclass(frozen=True)
class CNot:
    arg: "Cond"


@dataclass(frozen=True)
class CAnd:
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class COr:
    left: "Cond"
    right: "Cond"


Cond = CAtom | CNot | CAnd | COr


@dataclass(frozen=True)
class EPoly:
    poly: MPoly


@dataclass(frozen=True)
class EFail:
    pass


@dataclass(frozen=True)
class EIf:
    cond: Cond
    then_branch: "Expr"
    else_branch: "Expr"


Expr = EPoly | EFail | EIf


@dataclass(frozen=True)
class Program:
    """Variables are indexed inputs-first: poly variable i is
    inputs[i] for i < len(inputs), else randoms[i - len(inputs)]."""

    ctx: FieldCtx
    inputs: tuple[str, ...]
    randoms: tuple[str, ...]
    body: tuple[Expr, ...]

    @property
    def nvars(self) -> int:
        return len(self.inputs) + len(self.randoms)

    @property
    def is_arithmetic(self) -> bool:
        return all(isinstance(e, EPoly) for e in self.body)

    def arithmetic_polys(self) -> list[MPoly]:
        if not self.is_arithmetic:
            raise ValueError("program has conditionals or failure statements")
        return [e.poly for e in self.body]


@dataclass(frozen=True)
class EquivQuery:
    """P1 | P2 ~ Q1 | Q2 with P2, Q2 arithmetic constraint programs."""

    p1: Program
    p2: Program
    q1: Program
    q2: Program

    def __post_init__(self):
        if not (self.p1.inputs == self.p2.inputs == self.q1.inputs == self.q2.inputs):
            raise ValueError("all four programs must share the input variables")
        if self.p1.randoms != self.p2.randoms or self.q1.randoms != self.q2.randoms:
            raise ValueError("each side must share its random variables")
        if not self.p2.is_arithmetic or not self.q2.is_arithmetic:
            raise ValueError("constraint programs must be arithmetic")
        if len({p.ctx for p in (self.p1, self.p2, self.q1, self.q2)}) != 1:
            raise ValueError("programs over distinct fields")

    @property
    def is_arithmetic(self) -> bool:
        return self.p1.is_arithmetic and self.q1.is_arithmetic


# ---------------------------------------------------------------------------
# parser


class _ProgramParser:
    def __init__(self, text: str, ctx: FieldCtx, var_map: dict[str, int]):
        self.poly = PolyParser(tokenize(text), ctx, var_map, len(var_map))
        self.ctx = ctx

    def _peek(self):
        return self.poly.peek()

    def _at_name(self, word: str) -> bool:
        kind, val, _ = self._peek()
        return kind == "NAME" and val == word

    def _eat_name(self, word: str):
        kind, val, pos = self._peek()
        if kind != "NAME" or val != word:
            raise ParseError(f"expected {word!r}", pos)
        self.poly.advance()

    def parse_program(self) -> list[Expr]:
        body = []
        while True:
            kind, _, _ = self._peek()
            if kind == "END":
                break
            body.append(self.parse_expr())
            kind, val, pos = self._peek()
            if kind == "SYM" and val == ";":
                self.poly.advance()
                continue
            if kind == "END":
                break
            raise ParseError("expected ';' between expressions", pos)
        return body

    def parse_expr(self) -> Expr:
        if self._at_name("if"):
            self.poly.advance()
            cond = self.parse_cond()
            self._eat_name("then")
            then_b = self.parse_expr()
            self._eat_name("else")
            else_b = self.parse_expr()
            return EIf(cond, then_b, else_b)
        if self._at_name("fail"):
            self.poly.advance()
            return EFail()
        return EPoly(self.poly.parse_expression())

    def parse_cond(self) -> Cond:
        acc = self.parse_and()
        while True:
            kind, val, _ = self._peek()
            if kind == "SYM" and val == "|":
                self.poly.advance()
                acc = COr(acc, self.parse_and())
            else:
                return acc

    def parse_and(self) -> Cond:
        acc = self.parse_lit()
        while True:
            kind, val, _ = self._peek()
            if kind == "SYM" and val == "&":
                self.poly.advance()
                acc = CAnd(acc, self.parse_lit())
            else:
                return acc

    def parse_lit(self) -> Cond:
        kind, val, pos = self._peek()
        if kind == "SYM" and val == "!":
            self.poly.advance()
            return CNot(self.parse_lit())
        # atom `a = b`, with backtracking into a parenthesized condition
        save = self.poly.i
        try:
            lhs = self.poly.parse_expression()
            kind, val, pos2 = self._peek()
            if kind == "SYM" and val == "=":
                self.poly.advance()
                rhs = self.poly.parse_expression()
                return CAtom(lhs - rhs)
            raise ParseError("expected '=' in condition atom", pos2)
        except ParseError:
            self.poly.i = save
        kind, val, pos = self._peek()
        if kind == "SYM" and val == "(":
            self.poly.advance()
            inner = self.parse_cond()
            kind, val, pos2 = self._peek()
            if not (kind == "SYM" and val == ")"):
                raise ParseError("expected ')'", pos2)
            self.poly.advance()
            return inner
        raise ParseError("expected a condition", pos)


def parse_program(text: str, inputs, randoms, ctx: FieldCtx) -> Program:
    """Parse program text over declared input and random variables."""
    inputs, randoms = tuple(inputs), tuple(randoms)
    names = inputs + randoms
    if len(set(names)) != len(names):
        raise ValueError("input and random variable names must be disjoint")
    for name in names:
        if name in _KEYWORDS:
            raise ValueError(f"{name!r} is a reserved word")
    var_map = {name: i for i, name in enumerate(names)}
    parser = _ProgramParser(text, ctx, var_map)
    body = parser.parse_program()
    return Program(ctx, inputs, randoms, tuple(body))


# ---------------------------------------------------------------------------
# structural helpers


def _map_cond(c: Cond, f) -> Cond:
    if isinstance(c, CAtom):
        return CAtom(f(c.poly))
    if isinstance(c, CNot):
        return CNot(_map_cond(c.arg, f))
    if isinstance(c, CAnd):
        return CAnd(_map_cond(c.left, f), _map_cond(c.right, f))
    return COr(_map_cond(c.left, f), _map_cond(c.right, f))


def _map_expr(e: Expr, f) -> Expr:
    if isinstance(e, EPoly):
        return EPoly(f(e.poly))
    if isinstance(e, EFail):
        return e
    return EIf(_map_cond(e.cond, f), _map_expr(e.then_branch, f), _map_expr(e.else_branch, f))


def _expr_size(e: Expr) -> int:
    if isinstance(e, EPoly):
        return 1 + len(e.poly.terms)
    if isinstance(e, EFail):
        return 1
    return 1 + _cond_size(e.cond) + _expr_size(e.then_branch) + _expr_size(e.else_branch)


def _cond_size(c: Cond) -> int:
    if isinstance(c, CAtom):
        return 1 + len(c.poly.terms)
    if isinstance(c, CNot):
        return 1 + _cond_size(c.arg)
    return 1 + _cond_size(c.left) + _cond_size(c.right)


# ---------------------------------------------------------------------------
# exact distribution semantics


def _cap_grid(total: int, cfg: Config):
    if total > cfg.points_cap:
        raise CapExceededError(f"{total} random assignments exceed points cap")


class _Evaluator:
    """Vectorized evaluation of expressions over packed random coords."""

    def __init__(self, tab):
        self.tab = tab
        self._prepared: dict[int, PreparedPoly] = {}

    def _prep(self, f: MPoly) -> PreparedPoly:
        pp = self._prepared.get(id(f))
        if pp is None:
            pp = PreparedPoly(f, self.tab)
            self._prepared[id(f)] = pp
        return pp

    def cond(self, c: Cond, packed) -> np.ndarray:
        if isinstance(c, CAtom):
            return self._prep(c.poly).eval(packed) == self.tab.ZERO
        if isinstance(c, CNot):
            return ~self.cond(c.arg, packed)
        if isinstance(c, CAnd):
            return self.cond(c.left, packed) & self.cond(c.right, packed)
        return self.cond(c.left, packed) | self.cond(c.right, packed)

    def expr(self, e: Expr, packed, size: int):
        """Returns (value codes, fail mask)."""
        if isinstance(e, EPoly):
            vals = self._prep(e.poly).eval(packed)
            if vals.shape == ():
                vals = np.full(size, int(vals), dtype=np.int32)
            return vals, np.zeros(size, dtype=bool)
        if isinstance(e, EFail):
            return (
                np.full(size, self.tab.ZERO, dtype=np.int32),
                np.ones(size, dtype=bool),
            )
        m = self.cond(e.cond, packed)
        tv, tf = self.expr(e.then_branch, packed, size)
        ev, ef = self.expr(e.else_branch, packed, size)
        return np.where(m, tv, ev), np.where(m, tf, ef)


def _subst_embed(prog: Program, ext: FieldCtx, input_values) -> list[Expr]:
    """Embed the program body into ext and fix the input variables."""
    subs = dict(enumerate(input_values))

    def f(poly: MPoly) -> MPoly:
        g = embed_poly(poly, ext) if poly.ctx != ext else poly
        return g.substitute(subs) if subs else g

    return [_map_expr(e, f) for e in prog.body]


def _coerce_inputs(prog: Program, ext: FieldCtx, input_values) -> list[FieldElement]:
    vals = []
    for v in input_values:
        if isinstance(v, int):
            vals.append(ext.const(v))
        elif v.ctx == ext:
            vals.append(v)
        else:
            vals.append(embed(v.ctx, ext, v))
    if len(vals) != len(prog.inputs):
        raise ValueError("wrong number of input values")
    return vals


def _pack_outputs(outs: list[np.ndarray], q: int, mask: np.ndarray) -> np.ndarray:
    """Encode output tuples (code arrays) as single integers, base q."""
    if not outs:
        return np.zeros(int(mask.sum()), dtype=np.int64)
    if q ** len(outs) < 2**62:
        key = outs[0][mask].astype(np.int64)
        for o in outs[1:]:
            key = key * q + o[mask].astype(np.int64)
        return key
    stacked = np.stack([o[mask] for o in outs], axis=1)
    # fall back to row view for very wide outputs
    return np.array(
        [hash(tuple(int(x) for x in row)) for row in stacked], dtype=np.int64
    )


def _decode_output_key(key: int, nout: int, tab) -> tuple:
    out = []
    for _ in range(nout):
        out.append(tab.decode(int(key % tab.q)))
        key //= tab.q
    return tuple(reversed(out))


def distribution(
    body: Program,
    constraints: Program,
    input_values,
    k: int,
    cfg: Config = DEFAULT_CONFIG,
):
    """Exact output distribution of `body` conditioned on `constraints`
    vanishing, at one input over F_{q^k}.

    Enumerates the assignments to the random variables; assignments
    where the body fails or a constraint is nonzero are discarded.
    Returns {output tuple: Fraction probability}, or None when the
    sample space is empty (the vacuous case).
    """
    if body.inputs != constraints.inputs or body.randoms != constraints.randoms:
        raise ValueError("body and constraints must share the variable layout")
    ext = ctx_create(body.ctx.p, body.ctx.k * k, cap=cfg.field_cap)
    nr = len(body.randoms)
    ninp = len(body.inputs)
    total = ext.q**nr
    _cap_grid(total, cfg)
    vals = _coerce_inputs(body, ext, input_values)
    body_e = _subst_embed(body, ext, vals)
    cons_p = [
        e.poly for e in _subst_embed(constraints, ext, vals) if isinstance(e, EPoly)
    ]
    tab = table_for(ext)
    ev = _Evaluator(tab)
    counts: dict[int, int] = {}
    survivors = 0
    for start, stop in grid_ranges(total, cfg.chunk_size, cfg.workers):
        idx = np.arange(start, stop, dtype=np.int64)
        rp = packed_coords(idx, max(nr, 1), ext.q)
        packed = [None] * ninp + rp[:nr]
        size = stop - start
        keep = np.ones(size, dtype=bool)
        for g in cons_p:
            keep &= ev._prep(g).eval(packed) == tab.ZERO
        outs = []
        for e in body_e:
            v, fl = ev.expr(e, packed, size)
            keep &= ~fl
            outs.append(v)
        survivors += int(keep.sum())
        keys = _pack_outputs(outs, ext.q, keep)
        uk, uc = np.unique(keys, return_counts=True)
        for kk, cc in zip(uk, uc):
            counts[int(kk)] = counts.get(int(kk), 0) + int(cc)
    if survivors == 0:
        return None
    nout = len(body.body)
    return {
        _decode_output_key(kk, nout, tab): Fraction(cc, survivors)
        for kk, cc in sorted(counts.items())
    }


# ---------------------------------------------------------------------------
# joint equivalence checking
#
# The sample space for comparing P1|P2 with Q1|Q2 keeps only the random
# assignments where neither body fails; each side then conditions on
# its own constraints.  Sides share random variables by name.


@dataclass(frozen=True)
class Witness:
    k: int
    input: tuple
    output: tuple | None
    p_prob: Fraction
    q_prob: Fraction


def _joint_layout(query: EquivQuery):
    inputs = query.p1.inputs
    r_joint = list(query.p1.randoms)
    for r in query.q1.randoms:
        if r not in r_joint:
            r_joint.append(r)
    names = inputs + tuple(r_joint)

    def remap(prog: Program) -> list[Expr]:
        own = prog.inputs + prog.randoms
        mapping = [names.index(v) for v in own]
        f = lambda poly: poly.remap_vars(mapping, len(names))
        return [_map_expr(e, f) for e in prog.body]

    return inputs, tuple(r_joint), remap


def counterexample_at(query: EquivQuery, k: int, cfg: Config = DEFAULT_CONFIG):
    """First input where the conditioned output distributions differ
    over F_{q^k}, or None if they agree everywhere."""
    ctx = query.p1.ctx
    ext = ctx_create(ctx.p, ctx.k * k, cap=cfg.field_cap)
    inputs, r_joint, remap = _joint_layout(query)
    ninp, nr = len(inputs), len(r_joint)
    total_r = ext.q ** max(nr, 0)
    n_inputs = ext.q**ninp
    _cap_grid(total_r * n_inputs, cfg)
    tab = table_for(ext)

    asts = {
        "p1": remap(query.p1),
        "p2": remap(query.p2),
        "q1": remap(query.q1),
        "q2": remap(query.q2),
    }
    layout = Program(ctx, inputs, tuple(r_joint), tuple(asts["p1"]))

    for it in range(n_inputs):
        rem = it
        in_vals = []
        for _ in range(ninp):
            in_vals.append(ext.from_index(rem % ext.q))
            rem //= ext.q
        subs = dict(enumerate(in_vals))

        def spec(body):
            f = (
                lambda poly: (embed_poly(poly, ext) if poly.ctx != ext else poly)
                .substitute(subs)
            )
            return [_map_expr(e, f) for e in body]

        p1b, p2b, q1b, q2b = (spec(asts[x]) for x in ("p1", "p2", "q1", "q2"))
        ev = _Evaluator(tab)
        cP: dict[int, int] = {}
        cQ: dict[int, int] = {}
        totP = totQ = 0
        for start, stop in grid_ranges(total_r, cfg.chunk_size, cfg.workers):
            idx = np.arange(start, stop, dtype=np.int64)
            rp = packed_coords(idx, max(nr, 1), ext.q)
            packed = [None] * ninp + rp[:nr]
            size = stop - start
            fail_any = np.zeros(size, dtype=bool)
            outsP, outsQ = [], []
            for e in p1b:
                v, fl = ev.expr(e, packed, size)
                fail_any |= fl
                outsP.append(v)
            for e in q1b:
                v, fl = ev.expr(e, packed, size)
                fail_any |= fl
                outsQ.append(v)
            consP = ~fail_any
            for e in p2b:
                consP &= ev._prep(e.poly).eval(packed) == tab.ZERO
            consQ = ~fail_any
            for e in q2b:
                consQ &= ev._prep(e.poly).eval(packed) == tab.ZERO
            totP += int(consP.sum())
            totQ += int(consQ.sum())
            for outs, mask, acc in ((outsP, consP, cP), (outsQ, consQ, cQ)):
                keys = _pack_outputs(outs, ext.q, mask)
                uk, uc = np.unique(keys, return_counts=True)
                for kk, cc in zip(uk, uc):
                    acc[int(kk)] = acc.get(int(kk), 0) + int(cc)
        witness = _compare_dists(cP, totP, cQ, totQ, k, tuple(in_vals), len(query.p1.body), len(query.q1.body), tab)
        if witness is not None:
            return witness
    return None


def _compare_dists(cP, totP, cQ, totQ, k, in_vals, noutP, noutQ, tab):
    if totP == 0 and totQ == 0:
        return None  # both vacuous: equal by convention
    if totP == 0 or totQ == 0:
        side = cQ if totP == 0 else cP
        nout = noutQ if totP == 0 else noutP
        key = sorted(side)[0] if side else 0
        out = _decode_output_key(key, nout, tab)
        pp = Fraction(0) if totP == 0 else Fraction(side[key], totP)
        qq = Fraction(0) if totQ == 0 else Fraction(side[key], totQ)
        return Witness(k, in_vals, out, pp, qq)
    for key in sorted(set(cP) | set(cQ)):
        pp = Fraction(cP.get(key, 0), totP)
        qq = Fraction(cQ.get(key, 0), totQ)
        if pp != qq:
            return Witness(k, in_vals, _decode_output_key(key, noutP, tab), pp, qq)
    return None


def equivalent_at(query: EquivQuery, k: int, cfg: Config = DEFAULT_CONFIG) -> bool:
    """Whether the two conditioned distributions agree at every input
    over F_{q^k} (assignments failing either body are excluded)."""
    return counterexample_at(query, k, cfg) is None


@dataclass(frozen=True)
class UEVerdict:
    status: str  # "equivalent-up-to-kmax" | "inequivalent" | "caps-exceeded"
    k: int
    witness: Witness | None
    note: str


_UE_NOTE = (
    "bounded check: the agreement counts are governed by zeta functions whose "
    "total degree obeys the Bombieri bound, so they satisfy a linear recurrence "
    "of bounded order; this report is evidence up to k_max, not a certificate"
)


def universal_equivalence(
    query: EquivQuery, k_max: int | None = None, cfg: Config = DEFAULT_CONFIG
) -> UEVerdict:
    """Check equivalence for k = 1..k_max in order."""
    k_max = cfg.kmax_default if k_max is None else k_max
    for k in range(1, k_max + 1):
        try:
            w = counterexample_at(query, k, cfg)
        except CapExceededError:
            return UEVerdict("caps-exceeded", k, None, _UE_NOTE)
        if w is not None:
            return UEVerdict("inequivalent", k, w, _UE_NOTE)
    return UEVerdict("equivalent-up-to-kmax", k_max, None, _UE_NOTE)


# ---------------------------------------------------------------------------
# reduction passes


def _true_cond(ctx: FieldCtx, nvars: int) -> Cond:
    return CAtom(MPoly.zero(ctx, nvars))


def consolidate_failures(prog: Program) -> Program:
    """Merge all failure statements into a single guarded one.

    Collects the path condition of every `fail` (in program order) into
    one disjunction, prunes fail branches from the body, and guards the
    first expression with `if <guard> then fail else ...`.
    """
    paths: list[Cond] = []

    def collect(e: Expr, path: Cond | None):
        if isinstance(e, EFail):
            paths.append(path if path is not None else _true_cond(prog.ctx, prog.nvars))
        elif isinstance(e, EIf):
            here = e.cond
            neg = CNot(e.cond)
            collect(e.then_branch, here if path is None else CAnd(path, here))
            collect(e.else_branch, neg if path is None else CAnd(path, neg))

    def prune(e: Expr) -> Expr:
        if isinstance(e, EFail):
            return EPoly(MPoly.zero(prog.ctx, prog.nvars))
        if isinstance(e, EIf):
            if isinstance(e.then_branch, EFail):
                return prune(e.else_branch)
            if isinstance(e.else_branch, EFail):
                return prune(e.then_branch)
            return EIf(e.cond, prune(e.then_branch), prune(e.else_branch))
        return e

    for e in prog.body:
        collect(e, None)
    if not paths:
        return prog
    guard = paths[0]
    for p in paths[1:]:
        guard = COr(guard, p)
    cleaned = [prune(e) for e in prog.body]
    cleaned[0] = EIf(guard, EFail(), cleaned[0])
    return replace(prog, body=tuple(cleaned))


def literalize_conditions(prog: Program, cfg: Config = DEFAULT_CONFIG) -> Program:
    """Rewrite every conditional so its condition is a literal.

    `if a|b then T else E` nests through the then side, `if a&b ...`
    through the else side; negations push inward by De Morgan.
    """

    def is_literal(c: Cond) -> bool:
        return isinstance(c, CAtom) or (isinstance(c, CNot) and isinstance(c.arg, CAtom))

    def expand(c: Cond, T: Expr, E: Expr) -> Expr:
        if is_literal(c):
            return EIf(c, T, E)
        if isinstance(c, COr):
            return expand(c.left, T, expand(c.right, T, E))
        if isinstance(c, CAnd):
            return expand(c.left, expand(c.right, T, E), E)
        inner = c.arg  # c is CNot over a non-atom
        if isinstance(inner, CNot):
            return expand(inner.arg, T, E)
        if isinstance(inner, CAnd):
            return expand(COr(CNot(inner.left), CNot(inner.right)), T, E)
        return expand(CAnd(CNot(inner.left), CNot(inner.right)), T, E)

    def rewrite(e: Expr) -> Expr:
        if isinstance(e, EIf):
            out = expand(e.cond, rewrite(e.then_branch), rewrite(e.else_branch))
            if _expr_size(out) > cfg.program_size_cap:
                raise CapExceededError("literalized expression exceeds size cap")
            return out
        return e

    return replace(prog, body=tuple(rewrite(e) for e in prog.body))


def cnf(c: Cond, cfg: Config = DEFAULT_CONFIG) -> list[list[tuple[MPoly, bool]]]:
    """Conjunctive normal form over the original atoms.

    Returns clauses as lists of (poly, negated) literals, by negation
    normal form plus distribution; no auxiliary atoms are introduced.
    """
    atoms: list[MPoly] = []

    def count_atom(p: MPoly):
        for a in atoms:
            if a == p:
                return
        atoms.append(p)
        if len(atoms) > cfg.cnf_atom_cap:
            raise CapExceededError(f"CNF over more than {cfg.cnf_atom_cap} atoms")

    def walk(c: Cond):
        if isinstance(c, CAtom):
            count_atom(c.poly)
        elif isinstance(c, CNot):
            walk(c.arg)
        else:
            walk(c.left)
            walk(c.right)

    walk(c)

    def nnf(c: Cond, neg: bool):
        if isinstance(c, CAtom):
            return ("lit", c.poly, neg)
        if isinstance(c, CNot):
            return nnf(c.arg, not neg)
        if (isinstance(c, CAnd) and not neg) or (isinstance(c, COr) and neg):
            return ("and", nnf(c.left, neg), nnf(c.right, neg))
        return ("or", nnf(c.left, neg), nnf(c.right, neg))

    def clauses(t) -> list[list[tuple[MPoly, bool]]]:
        tag = t[0]
        if tag == "lit":
            return [[(t[1], t[2])]]
        if tag == "and":
            return clauses(t[1]) + clauses(t[2])
        left, right = clauses(t[1]), clauses(t[2])
        return [cl + cr for cl in left for cr in right]

    return clauses(nnf(c, False))


class FreshVars:
    """Supplies fresh random variables t1, t2, ... on a growing layout."""

    def __init__(self, ctx: FieldCtx, nvars: int, existing: set[str]):
        self.ctx = ctx
        self.nvars = nvars
        self.names: list[str] = []
        self._existing = existing
        self._counter = 0

    def fresh(self) -> int:
        while True:
            self._counter += 1
            name = f"t{self._counter}"
            if name not in self._existing:
                break
        self.names.append(name)
        idx = self.nvars
        self.nvars += 1
        return idx

    def lift(self, f: MPoly) -> MPoly:
        return f.extend_vars(self.nvars)

    def var(self, idx: int) -> MPoly:
        return MPoly.var(self.ctx, self.nvars, idx)


def clause_to_polynomial(clause, fresh: FreshVars):
    """One guard polynomial per clause: positive literals contribute Q,
    negated ones contribute (t*Q - 1) with a fresh t and the two side
    constraints t(tQ-1) and Q(tQ-1); B vanishes exactly where the
    clause holds (under the constraints)."""
    if not clause:
        raise ValueError("empty clause")
    B = None
    side: list[MPoly] = []
    for poly, negated in clause:
        if not negated:
            factor = fresh.lift(poly)
        else:
            t_idx = fresh.fresh()
            q = fresh.lift(poly)
            t = fresh.var(t_idx)
            gadget = t * q - 1
            factor = gadget
            side = [fresh.lift(s) for s in side]
            side.append(t * gadget)
            side.append(q * gadget)
        B = factor if B is None else fresh.lift(B) * factor
    return fresh.lift(B), [fresh.lift(s) for s in side]


def eliminate_conditionals(prog: Program, fresh: FreshVars, cfg: Config = DEFAULT_CONFIG):
    """Replace literal conditionals by selector polynomials.

    `if !(B=0) then P1 else P2` becomes P2 + (tB)(P1 - P2) and
    `if B=0 then P1 else P2` becomes P1 + (tB)(P2 - P1), each with the
    side constraints B(Bt-1) and t(Bt-1) pinning t to 0 or 1/B.
    """
    side: list[MPoly] = []

    def rec(e: Expr) -> MPoly:
        if isinstance(e, EPoly):
            return fresh.lift(e.poly)
        if isinstance(e, EFail):
            raise ValueError("failures must be consolidated before elimination")
        cond = e.cond
        if isinstance(cond, CNot) and isinstance(cond.arg, CAtom):
            bpoly, negated = cond.arg.poly, True
        elif isinstance(cond, CAtom):
            bpoly, negated = cond.poly, False
        else:
            raise ValueError("conditions must be literalized before elimination")
        pT = rec(e.then_branch)
        pE = rec(e.else_branch)
        t_idx = fresh.fresh()
        B = fresh.lift(bpoly)
        t = fresh.var(t_idx)
        pT, pE = fresh.lift(pT), fresh.lift(pE)
        tb = t * B
        if negated:
            out = pE + tb * (pT - pE)
        else:
            out = pT + tb * (pE - pT)
        gadget = B * t - 1
        side.append(B * gadget)
        side.append(t * gadget)
        if len(out.terms) > cfg.program_size_cap:
            raise CapExceededError("eliminated expression exceeds size cap")
        return out

    body = [EPoly(rec(e)) for e in prog.body]
    return body, side


def reduce_query(query: EquivQuery, cfg: Config = DEFAULT_CONFIG) -> EquivQuery:
    """Compile a general query to an all-arithmetic one.

    Per side: consolidate failures, turn the survival condition into
    CNF guard polynomials B_i (appended to BOTH constraint programs,
    with their inverse-gadget side constraints), literalize the
    remaining conditionals, and eliminate them with selector gadgets
    (side constraints appended to the owning side).  Fresh t variables
    are shared by all four programs, named in first-use order.
    """
    if query.is_arithmetic:
        return query
    ctx = query.p1.ctx
    inputs, r_joint, remap = _joint_layout(query)
    nv = len(inputs) + len(r_joint)
    fresh = FreshVars(ctx, nv, set(inputs) | set(r_joint))

    def lift_body(body: list[Expr]) -> list[MPoly]:
        return [fresh.lift(e.poly) for e in body]

    sides = {}
    shared_guards: list[MPoly] = []
    for tag, body_prog, cons_prog in (
        ("p", query.p1, query.p2),
        ("q", query.q1, query.q2),
    ):
        working = Program(ctx, inputs, tuple(r_joint), tuple(remap(body_prog)))
        working = consolidate_failures(working)
        body = list(working.body)
        if body and isinstance(body[0], EIf) and isinstance(body[0].then_branch, EFail):
            guard = body[0].cond
            body[0] = body[0].else_branch
            survive = CNot(guard)
            for clause in cnf(survive, cfg):
                B, side = clause_to_polynomial(clause, fresh)
                shared_guards.append(B)
                shared_guards.extend(side)
        working = replace(working, body=tuple(body))
        working = literalize_conditions(working, cfg)
        arith_body, cond_side = eliminate_conditionals(working, fresh, cfg)
        sides[tag] = (arith_body, cond_side, remap(cons_prog))
    randoms = tuple(r_joint) + tuple(fresh.names)
    nv_final = fresh.nvars

    def finish(body_polys, cons_exprs, cond_side) -> tuple[Program, Program]:
        body = tuple(EPoly(f.extend_vars(nv_final)) for f in body_polys)
        cons = [e.poly.extend_vars(nv_final) for e in cons_exprs]
        cons += [g.extend_vars(nv_final) for g in shared_guards]
        cons += [s.extend_vars(nv_final) for s in cond_side]
        return (
            Program(ctx, inputs, randoms, body),
            Program(ctx, inputs, randoms, tuple(EPoly(f) for f in cons)),
        )

    p1, p2 = finish(sides["p"][0], sides["p"][2], sides["p"][1])
    q1, q2 = finish(sides["q"][0], sides["q"][2], sides["q"][1])
    return EquivQuery(p1, p2, q1, q2)


# ---------------------------------------------------------------------------
# program and query files


def parse_program_file(text: str, ctx: FieldCtx) -> Program:
    """Header lines `inputs: x,y` and `randoms: z`, then program text."""
    lines = text.splitlines()
    inputs = randoms = None
    body_start = 0
    for i, ln in enumerate(lines):
        s = ln.strip()
        if not s or s.startswith("#"):
            continue
        if s.lower().startswith("inputs:"):
            names = s.split(":", 1)[1].strip()
            inputs = tuple(x.strip() for x in names.split(",") if x.strip())
        elif s.lower().startswith("randoms:"):
            names = s.split(":", 1)[1].strip()
            randoms = tuple(x.strip() for x in names.split(",") if x.strip())
        else:
            body_start = i
            break
        body_start = i + 1
    if inputs is None or randoms is None:
        raise ValueError("program file needs 'inputs:' and 'randoms:' headers")
    body_text = "\n".join(lines[body_start:])
    return parse_program(body_text, inputs, randoms, ctx)
