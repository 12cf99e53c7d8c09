"""Zeta functions of affine systems from exact point counts.

The generating function exp(sum_k N_k T^k / k) is reconstructed as a
rational function by an exact Pade-style linear solve on its series
prefix, with two held-out counts as validation and a full round-trip
check through the logarithmic derivative.  zeta_main orchestrates the
two-branch pipeline: one Kronecker reduction over the base field when
q is large enough, otherwise per-k exhaustive counts or reductions
over the extension fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .config import Config, DEFAULT_CONFIG, CapExceededError
from .count import CountRecord, PolySystem, count_points
from .ff import FieldCapError, ctx_create
from .kronecker import ReductionReport, reduce_affine
from .mpoly import embed_poly


class InvalidCountsError(ValueError):
    """The input counts cannot be the counts of a variety."""


class ReconstructionError(ValueError):
    """No rational function within the degree budget fits the counts."""


def bombieri_bound(n: int, d: int) -> int:
    """(4d+5)^(2n+1): certified bound on deg numer + deg denom."""
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    return (4 * d + 5) ** (2 * n + 1)


def _count_values(counts) -> list[int]:
    vals = []
    for i, c in enumerate(counts):
        if isinstance(c, CountRecord):
            if c.k != i + 1:
                raise ValueError("counts must be contiguous from k = 1")
            vals.append(int(c.count))
        else:
            vals.append(int(c))
    return vals


def series_from_counts(counts) -> list[int]:
    """Coefficients c_0..c_L of exp(sum N_k T^k / k), exactly.

    Uses the recurrence j*c_j = sum_{i=1..j} N_i c_{j-i}; every
    coefficient must come out a non-negative integer.
    """
    N = _count_values(counts)
    L = len(N)
    c: list[Fraction] = [Fraction(1)]
    for j in range(1, L + 1):
        s = sum(Fraction(N[i - 1]) * c[j - i] for i in range(1, j + 1))
        cj = s / j
        if cj.denominator != 1 or cj < 0:
            raise InvalidCountsError(
                f"series coefficient c_{j} = {cj} is not a non-negative integer"
            )
        c.append(cj)
    return [int(x) for x in c]


# ---------------------------------------------------------------------------
# integer polynomials in T, ascending coefficients, constant term 1


def _trim(v: list[Fraction]) -> list[Fraction]:
    while v and v[-1] == 0:
        v.pop()
    return v


def _qdivmod(a: list[Fraction], b: list[Fraction]):
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b) and a:
        f = a[-1] / b[-1]
        shift = len(a) - len(b)
        q[shift] = f
        for i, cb in enumerate(b):
            a[shift + i] -= f * cb
        _trim(a)
    return q, a


def _qgcd(a, b):
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _qdivmod(a, b)[1]
    if a:
        lead = a[-1]
        a = [x / lead for x in a]
    return a


@dataclass(frozen=True)
class ZetaFn:
    """A rational function in T, numer/denom coprime over Q, both with
    integer coefficients and constant term 1."""

    numer: tuple[int, ...]
    denom: tuple[int, ...]

    @classmethod
    def normalized(cls, numer, denom) -> "ZetaFn":
        nf = _trim([Fraction(x) for x in numer])
        df = _trim([Fraction(x) for x in denom])
        if not nf or not df:
            raise InvalidCountsError("zeta numerator/denominator must be nonzero")
        g = _qgcd(nf, df)
        if len(g) > 1:
            nf = _qdivmod(nf, g)[0]
            df = _qdivmod(df, g)[0]
        if nf[0] == 0 or df[0] == 0 or nf[0] != df[0]:
            raise InvalidCountsError("constant terms cannot be normalized to 1")
        nf = [x / nf[0] for x in nf]
        df = [x / df[0] for x in df]
        if any(x.denominator != 1 for x in nf + df):
            raise InvalidCountsError("normalized coefficients are not integers")
        return cls(tuple(int(x) for x in nf), tuple(int(x) for x in df))

    @property
    def total_degree(self) -> int:
        return (len(self.numer) - 1) + (len(self.denom) - 1)

    def to_strings(self) -> tuple[str, str]:
        return _poly_str(self.numer), _poly_str(self.denom)

    def __str__(self):
        n, d = self.to_strings()
        return n if self.denom == (1,) else f"({n}) / ({d})"


def _poly_str(coeffs: tuple[int, ...]) -> str:
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0 and not (i == 0 and len(coeffs) == 1):
            continue
        if i == 0:
            parts.append(str(c))
        else:
            mag = abs(c)
            t = "T" if i == 1 else f"T^{i}"
            body = t if mag == 1 else f"{mag}*{t}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts) if parts else "0"


def parse_zeta_poly(text: str) -> tuple[int, ...]:
    """Inverse of _poly_str: integer polynomial in T, ascending."""
    s = text.replace("-", "+-").replace(" ", "")
    coeffs: dict[int, int] = {}
    for part in s.split("+"):
        if not part:
            continue
        sign = 1
        if part.startswith("-"):
            sign, part = -1, part[1:]
        if "T" not in part:
            coeffs[0] = coeffs.get(0, 0) + sign * int(part)
            continue
        mag, _, rest = part.partition("T")
        mag = int(mag.rstrip("*")) if mag else 1
        e = int(rest[1:]) if rest.startswith("^") else 1
        coeffs[e] = coeffs.get(e, 0) + sign * mag
    deg = max(coeffs) if coeffs else 0
    return tuple(coeffs.get(i, 0) for i in range(deg + 1))


def _power_sums(coeffs: tuple[int, ...], k_max: int) -> list[int]:
    """s_k = sum of k-th powers of the reciprocal roots of the poly,
    via Newton's identities on the coefficients (no root extraction)."""
    r = list(coeffs) + [0] * k_max
    s = [0] * (k_max + 1)
    for j in range(1, k_max + 1):
        acc = -j * r[j]
        for i in range(1, j):
            acc -= s[i] * r[j - i]
        s[j] = acc
    return s


def counts_from_zeta(zf: ZetaFn, k_max: int) -> list[CountRecord]:
    """N_k from the logarithmic derivative: denominator power sums
    minus numerator power sums."""
    sd = _power_sums(zf.denom, k_max)
    sn = _power_sums(zf.numer, k_max)
    return [CountRecord(k, sd[k] - sn[k]) for k in range(1, k_max + 1)]


def _solve_linear(rows: list[list[Fraction]]) -> list[Fraction] | None:
    """Solve an (over)determined system [A | rhs]; free unknowns get 0.
    Returns None when inconsistent."""
    if not rows:
        return []
    ncols = len(rows[0]) - 1
    m = [list(r) for r in rows]
    piv_of_col: dict[int, int] = {}
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        f = m[r][c]
        m[r] = [x / f for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                fi = m[i][c]
                m[i] = [a - fi * b for a, b in zip(m[i], m[r])]
        piv_of_col[c] = r
        r += 1
        if r == len(m):
            break
    for i in range(len(m)):
        if all(x == 0 for x in m[i][:ncols]) and m[i][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for c, pr in piv_of_col.items():
        x[c] = m[pr][ncols]
    return x


def rational_reconstruct(counts, degree_budget: int) -> ZetaFn:
    """Fit numer/denom with deg numer + deg denom <= budget to the
    counts; the two final counts are held out for validation, and the
    result must regenerate every input count exactly."""
    N = _count_values(counts)
    D = degree_budget
    if len(N) < 2 * D + 2:
        raise ValueError(f"need at least 2D+2 = {2 * D + 2} counts, got {len(N)}")
    c = [Fraction(x) for x in series_from_counts(N)]
    for total in range(D + 1):
        for b in range(total + 1):
            a = total - b
            rows = []
            for j in range(a + 1, 2 * D + 1):
                row = [c[j - i] if j - i >= 0 else Fraction(0) for i in range(1, b + 1)]
                rows.append(row + [-c[j]])
            qs = _solve_linear(rows) if rows else []
            if qs is None:
                continue
            qpoly = [Fraction(1)] + list(qs)
            ppoly = []
            for j in range(a + 1):
                ppoly.append(
                    sum(qpoly[i] * c[j - i] for i in range(0, min(b, j) + 1))
                )
            try:
                zf = ZetaFn.normalized(ppoly, qpoly)
            except InvalidCountsError:
                continue
            regen = [rec.count for rec in counts_from_zeta(zf, len(N))]
            if regen == N:
                return zf
    raise ReconstructionError(
        f"no rational function of total degree <= {D} matches the counts"
    )


# ---------------------------------------------------------------------------
# main pipeline


@dataclass(frozen=True)
class KBranch:
    k: int
    branch: str  # "exhaustive" | "kronecker-ext" | "reduced-base"
    reduction: ReductionReport | None


@dataclass
class ZetaReport:
    system: PolySystem
    ok: bool
    zeta: ZetaFn | None
    counts: list[CountRecord]
    provenance: list[KBranch]
    base_reduction: ReductionReport | None
    achieved_budget: int | None
    bombieri: int
    message: str = ""


def zeta_main(F: PolySystem, cfg: Config = DEFAULT_CONFIG) -> ZetaReport:
    """Compute Z(F, T) with the adaptive degree budget.

    Large q (q > (n+1)d^n): reduce once over F_q, then count the
    reduced system.  Small q: exhaustive counts while q^k stays under
    the threshold, Kronecker over F_{q^k} beyond it.  Runs the budget
    D = 2, 4, 8, ... until the reconstruction validates; cap overruns
    yield an honest partial report, never a wrong answer.
    """
    n, d, q = F.nvars, F.d, F.ctx.q
    threshold = (n + 1) * d**n
    B = bombieri_bound(n, d)
    counts: dict[int, int] = {}
    prov: dict[int, KBranch] = {}
    base_reduction: ReductionReport | None = None

    large_q = q > threshold
    if large_q:
        G, base_reduction = reduce_affine(F.polys, ctx=F.ctx, nvars=n)
        Gsys = PolySystem(F.ctx, n, tuple(G))

    def compute_count(k: int) -> int:
        if large_q:
            prov[k] = KBranch(k, "reduced-base", None)
            return count_points(Gsys, k, cfg)
        if q**k <= threshold:
            prov[k] = KBranch(k, "exhaustive", None)
            return count_points(F, k, cfg)
        ext = ctx_create(F.ctx.p, F.ctx.k * k, cap=cfg.field_cap)
        embedded = [embed_poly(f, ext) for f in F.polys]
        Gk, rep = reduce_affine(embedded, ctx=ext, nvars=n)
        prov[k] = KBranch(k, "kronecker-ext", rep)
        return count_points(PolySystem(ext, n, tuple(Gk)), 1, cfg)

    def report(ok, zf, budget, msg=""):
        ks = sorted(counts)
        return ZetaReport(
            system=F,
            ok=ok,
            zeta=zf,
            counts=[CountRecord(k, counts[k]) for k in ks],
            provenance=[prov[k] for k in ks],
            base_reduction=base_reduction,
            achieved_budget=budget,
            bombieri=B,
            message=msg,
        )

    D = 2
    while D <= cfg.budget_cap:
        K = 2 * D + 2
        try:
            for k in range(1, K + 1):
                if k not in counts:
                    counts[k] = compute_count(k)
        except (CapExceededError, FieldCapError) as e:
            return report(False, None, D, f"caps exceeded at budget D={D}: {e}")
        try:
            zf = rational_reconstruct([counts[k] for k in range(1, K + 1)], D)
            return report(True, zf, D)
        except ReconstructionError:
            D *= 2
    return report(False, None, D // 2, f"budget cap {cfg.budget_cap} exhausted")
