"""Chunked vectorized evaluation of polynomials over F_q^n.

Points are indexed 0 .. q^n - 1; coordinate j of point i is the field
element with enumeration index (i // q^j) % q.  Everything runs on
int64 log-code arrays from logfield.
"""

from __future__ import annotations

import numpy as np

from .logfield import LogTable
from .mpoly import MPoly


def grid_ranges(total: int, chunk_size: int, workers: int = 1):
    """Deterministic partition of range(total): worker ranges, chunked."""
    workers = max(1, workers)
    per = -(-total // workers)
    for w in range(workers):
        lo, hi = w * per, min((w + 1) * per, total)
        start = lo
        while start < hi:
            stop = min(start + chunk_size, hi)
            yield start, stop
            start = stop


def coords_from_indices(idx: np.ndarray, nvars: int, tab: LogTable) -> list[np.ndarray]:
    q = tab.q
    return [tab.codes_from_packed((idx // q**j) % q) for j in range(nvars)]


def eval_poly_codes(f: MPoly, coords: list[np.ndarray], tab: LogTable) -> np.ndarray:
    """Evaluate f at every point given by coordinate code arrays."""
    size = coords[0].shape if coords else ()
    acc = None
    for exps, c in f.terms.items():
        t = None
        for j, e in enumerate(exps):
            if e:
                factor = tab.pow(coords[j], e)
                t = factor if t is None else tab.mul(t, factor)
        code = tab.encode(c)
        if t is None:
            t = np.full(size, code, dtype=np.int64)
        elif code != 0:  # skip multiplying by 1
            t = tab.mul(t, code)
        acc = t if acc is None else tab.add(acc, t)
    if acc is None:
        return np.full(size, tab.ZERO, dtype=np.int64)
    return acc


_GATHER_CAP = 1 << 22  # max q for per-term power lookup tables


class PreparedPoly:
    """A polynomial compiled for bulk evaluation on packed coordinates.

    Each term becomes a chain of gathers from per-variable tables
    mapping a packed coordinate value to the code of value^exponent
    (coefficient folded into the first table of the term).
    """

    def __init__(self, f: MPoly, tab: LogTable):
        self.tab = tab
        self.nvars = f.nvars
        self.const_code = tab.ZERO
        self.terms: list[list[tuple[int, np.ndarray]]] = []
        if tab.q > _GATHER_CAP:
            self.fallback = f
            return
        self.fallback = None
        base = tab.codes_from_packed(np.arange(tab.q, dtype=np.int64))
        for exps, c in f.terms.items():
            code = tab.encode(c)
            chain = []
            for j, e in enumerate(exps):
                if e:
                    t = tab.pow(base, e)
                    if code != 0 and not chain:  # fold coefficient in
                        t = tab.mul(t, code)
                    chain.append((j, t))
            if not chain:
                self.const_code = tab.add(self.const_code, code)
                continue
            self.terms.append(chain)

    def eval(self, packed: list[np.ndarray]) -> np.ndarray:
        tab = self.tab
        if self.fallback is not None:
            coords = [tab.codes_from_packed(pj) for pj in packed]
            return eval_poly_codes(self.fallback, coords, tab)
        size = packed[0].shape if packed else ()
        acc = None
        for chain in self.terms:
            j0, t0 = chain[0]
            t = t0[packed[j0]]
            for j, tbl in chain[1:]:
                t = tab.mul(t, tbl[packed[j]])
            acc = t if acc is None else tab.add(acc, t)
        cc = int(self.const_code)
        if acc is None:
            return np.full(size, cc, dtype=np.int64)
        if cc != tab.ZERO:
            acc = tab.add(acc, cc)
        return acc


def packed_coords(idx: np.ndarray, nvars: int, q: int) -> list[np.ndarray]:
    out = []
    rem = idx
    for j in range(nvars):
        out.append((rem % q).astype(np.int32))
        if j + 1 < nvars:
            rem = rem // q
    return out
