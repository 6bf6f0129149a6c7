"""Exact feasibility of conjunctions of linear integer constraints.

Pipeline: clear denominators, substitute equalities with unit-coefficient
pivots (integer-preserving), tighten and eliminate inequalities by
Fourier-Motzkin over exact rationals, then extract an integer point by
back-substitution with bounded backtracking.

Answers are definite ("sat" with a model, or "unsat"); when the bounded
search cannot decide, LiaLimitError is raised rather than guessing.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Optional

from .formula import LE, LinearAtom


class LiaLimitError(Exception):
    """Search budget exhausted before the conjunction could be decided."""


@dataclass
class Limits:
    max_rows: int = 60_000
    node_budget: int = 30_000
    diseq_branches: int = 64
    candidate_window: int = 8


Row = tuple[dict[int, int], int]  # sum(coeff*var) <= const, integer data
Interval = tuple[Optional[int], Optional[int]]


class _RationalUnsat(Exception):
    pass


def _norm_le(coeffs: dict[int, int], const: int) -> Optional[Row]:
    """Integer-tighten a <= row; returns None if trivially true."""
    coeffs = {v: c for v, c in coeffs.items() if c}
    if not coeffs:
        if const < 0:
            raise _RationalUnsat()
        return None
    g = 0
    for c in coeffs.values():
        g = gcd(g, abs(c))
    if g > 1:
        coeffs = {v: c // g for v, c in coeffs.items()}
        const = floor(Fraction(const, g))
    return coeffs, const


def literal_rows(atom: LinearAtom, pos: bool) -> list[tuple[str, dict[int, int], int]]:
    """Normalize one literal to ("le"|"eq"|"ne", coeffs, const) over integers."""
    terms, const = atom.scaled_int()
    coeffs = {v: c for c, v in terms}
    if atom.rel == LE:
        if pos:
            return [("le", coeffs, const)]
        # not(sum <= c)  <=>  sum >= c + 1  <=>  -sum <= -c - 1
        return [("le", {v: -c for v, c in coeffs.items()}, -const - 1)]
    if pos:
        return [("eq", coeffs, const)]
    return [("ne", coeffs, const)]


def conj_feasible(literals: list[tuple[LinearAtom, bool]],
                  intervals: dict[int, Interval],
                  want_model: bool = True,
                  limits: Optional[Limits] = None) -> tuple[str, Optional[dict[int, int]]]:
    """Decide a conjunction of atom literals under per-variable intervals."""
    limits = limits or Limits()
    les: list[tuple[dict[int, int], int]] = []
    eqs: list[tuple[dict[int, int], int]] = []
    nes: list[tuple[dict[int, int], int]] = []
    for atom, pos in literals:
        for kind, coeffs, const in literal_rows(atom, pos):
            (les if kind == "le" else eqs if kind == "eq" else nes).append((coeffs, const))

    # branch disequalities: sum != c  ->  sum <= c-1  or  sum >= c+1
    branches: list[list[tuple[dict[int, int], int]]] = [[]]
    for coeffs, const in nes:
        nxt = []
        for b in branches:
            nxt.append(b + [(dict(coeffs), const - 1)])
            nxt.append(b + [({v: -c for v, c in coeffs.items()}, -const - 1)])
        branches = nxt
        if len(branches) > limits.diseq_branches:
            raise LiaLimitError("disequality branching limit exceeded")

    saw_limit = None
    for b in branches:
        try:
            status, model = _solve(eqs, les + b, dict(intervals), want_model, limits)
        except LiaLimitError as e:
            saw_limit = e
            continue
        if status == "sat":
            return status, model
    if saw_limit is not None:
        raise saw_limit
    return "unsat", None


def _solve(eqs, les, intervals, want_model, limits):
    try:
        return _solve_inner(eqs, les, intervals, want_model, limits)
    except _RationalUnsat:
        return "unsat", None


def _fold(coeffs: dict[int, int], const: int, var: int,
          scoeffs: dict[int, int], sconst: int) -> tuple[dict[int, int], int]:
    """Substitute var = scoeffs.vars + sconst into a row/equation in place."""
    k = coeffs.pop(var, 0)
    if not k:
        return coeffs, const
    for v, c in scoeffs.items():
        nc = coeffs.get(v, 0) + k * c
        if nc:
            coeffs[v] = nc
        else:
            coeffs.pop(v, None)
    return coeffs, const - k * sconst


def _solve_inner(eqs, les, intervals, want_model, limits):
    eqs = [(dict(c), k) for c, k in eqs]
    rows: list[Row] = []
    for c, k in les:
        r = _norm_le(dict(c), k)
        if r is not None:
            rows.append(r)

    # ---- equality substitution with unit pivots --------------------------
    subs: list[tuple[int, dict[int, int], int]] = []  # var = coeffs . vars + const
    pending = list(range(len(eqs)))
    progress = True
    while progress:
        progress = False
        for idx in list(pending):
            coeffs, const = eqs[idx]
            coeffs = {v: c for v, c in coeffs.items() if c}
            if not coeffs:
                if const != 0:
                    raise _RationalUnsat()
                pending.remove(idx)
                progress = True
                continue
            g = 0
            for c in coeffs.values():
                g = gcd(g, abs(c))
            if g > 1:
                if const % g:
                    raise _RationalUnsat()
                coeffs = {v: c // g for v, c in coeffs.items()}
                const //= g
            eqs[idx] = (coeffs, const)
            pivot = next((v for v in sorted(coeffs) if abs(coeffs[v]) == 1), None)
            if pivot is None:
                continue
            a = coeffs[pivot]  # +-1, so pivot = a*(const - rest)
            scoeffs = {v: -c * a for v, c in coeffs.items() if v != pivot}
            sconst = const * a
            for j in range(len(eqs)):
                if j != idx:
                    eqs[j] = _fold(dict(eqs[j][0]), eqs[j][1], pivot, scoeffs, sconst)
            new_rows = []
            for rc, rk in rows:
                rc, rk = _fold(dict(rc), rk, pivot, scoeffs, sconst)
                r = _norm_le(rc, rk)
                if r is not None:
                    new_rows.append(r)
            rows = new_rows
            lo, hi = intervals.pop(pivot, (None, None))
            if lo is not None:
                r = _norm_le({v: -c for v, c in scoeffs.items()}, sconst - lo)
                if r is not None:
                    rows.append(r)
            if hi is not None:
                r = _norm_le(dict(scoeffs), hi - sconst)
                if r is not None:
                    rows.append(r)
            subs.append((pivot, scoeffs, sconst))
            pending.remove(idx)
            progress = True

    # leftover equalities without unit pivots: keep as <= pairs
    for idx in pending:
        coeffs, const = eqs[idx]
        r = _norm_le(dict(coeffs), const)
        if r is not None:
            rows.append(r)
        r = _norm_le({v: -c for v, c in coeffs.items()}, -const)
        if r is not None:
            rows.append(r)

    # ---- Fourier-Motzkin with level tracking ------------------------------
    live_vars: set[int] = set()
    for rc, _ in rows:
        live_vars.update(rc)
    for v in list(intervals):
        if v not in live_vars:
            continue
        lo, hi = intervals.pop(v)
        if lo is not None:
            rows.append(({v: -1}, -lo))
        if hi is not None:
            rows.append(({v: 1}, hi))

    rows = _dedup(rows)
    levels: list[tuple[int, list[Row]]] = []
    while live_vars:
        # cheapest variable first: minimize pos*neg fill-in
        occ: dict[int, list[int]] = {v: [0, 0] for v in live_vars}
        for rc, _ in rows:
            for v, c in rc.items():
                occ[v][0 if c > 0 else 1] += 1
        v = min(sorted(live_vars), key=lambda u: occ[u][0] * occ[u][1] - occ[u][0] - occ[u][1])
        uppers = [r for r in rows if r[0].get(v, 0) > 0]
        lowers = [r for r in rows if r[0].get(v, 0) < 0]
        stay = [r for r in rows if v not in r[0]]
        levels.append((v, uppers + lowers))
        new_rows = stay
        for uc, uk in uppers:
            a = uc[v]
            for lc, lk in lowers:
                b = -lc[v]
                g = gcd(a, b)
                ma, mb = b // g, a // g
                coeffs: dict[int, int] = {}
                for vv, c in uc.items():
                    if vv != v:
                        coeffs[vv] = coeffs.get(vv, 0) + ma * c
                for vv, c in lc.items():
                    if vv != v:
                        coeffs[vv] = coeffs.get(vv, 0) + mb * c
                r = _norm_le(coeffs, ma * uk + mb * lk)
                if r is not None:
                    new_rows.append(r)
        rows = _dedup(new_rows)
        if len(rows) > limits.max_rows:
            raise LiaLimitError(f"Fourier-Motzkin exceeded {limits.max_rows} rows")
        live_vars = set()
        for rc, _ in rows:
            live_vars.update(rc)

    for rc, rk in rows:
        if not rc and rk < 0:
            raise _RationalUnsat()

    if not want_model:
        return "sat", None

    # ---- integer extraction in reverse elimination order ------------------
    assign: dict[int, int] = {}
    budget = [limits.node_budget]

    def extract(i: int) -> bool:
        if i < 0:
            return True
        v, vrows = levels[i]
        lo: Optional[Fraction] = None
        hi: Optional[Fraction] = None
        for rc, rk in vrows:
            a = rc[v]
            rest = sum(c * assign[vv] for vv, c in rc.items() if vv != v)
            bound = Fraction(rk - rest, a)
            if a > 0:
                hi = bound if hi is None else min(hi, bound)
            else:
                lo = bound if lo is None else max(lo, bound)
        ilo = None if lo is None else ceil(lo)
        ihi = None if hi is None else floor(hi)
        complete = True
        if ilo is None and ihi is None:
            candidates = [0]
        elif ilo is None:
            candidates = [min(ihi, 0)]
            complete = False
        elif ihi is None:
            candidates = [max(ilo, 0)]
            complete = False
        else:
            if ilo > ihi:
                return False
            span = ihi - ilo + 1
            w = limits.candidate_window
            if span <= 2 * w:
                candidates = list(range(ilo, ihi + 1))
            else:
                candidates = list(range(ilo, ilo + w)) + list(range(ihi, ihi - w, -1))
                complete = False
        for val in candidates:
            budget[0] -= 1
            if budget[0] < 0:
                raise LiaLimitError("integer extraction budget exhausted")
            assign[v] = val
            if extract(i - 1):
                return True
        assign.pop(v, None)
        if complete:
            return False
        raise LiaLimitError("candidate window exhausted without certainty")

    if levels and not extract(len(levels) - 1):
        return "unsat", None

    # resolve substituted variables; later substitutions reference only
    # variables surviving them, so resolve newest first
    for v, scoeffs, sconst in reversed(subs):
        assign[v] = sum(c * assign.setdefault(vv, _default_val(intervals, vv))
                        for vv, c in scoeffs.items()) + sconst
    return "sat", assign


def _default_val(intervals: dict[int, Interval], v: int) -> int:
    lo, hi = intervals.get(v, (None, None))
    if lo is not None and 0 < lo:
        return lo
    if hi is not None and 0 > hi:
        return hi
    return 0


def _dedup(rows: list[Row]) -> list[Row]:
    best: dict[tuple, int] = {}
    for rc, rk in rows:
        key = tuple(sorted(rc.items()))
        if key not in best or rk < best[key]:
            best[key] = rk
    return [(dict(k), v) for k, v in best.items()]
