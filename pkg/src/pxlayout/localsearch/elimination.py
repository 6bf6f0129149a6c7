"""Unit equation elimination: Gauss-Jordan simplification of hard clause sets.

Equality atoms in unit clauses form a linear system; Gauss-Jordan over exact
rationals solves it, and variables with integer-preserving solved forms
(x = k, or y = k*x + b with integral k, b) are substituted away.  Substitution
makes some literals constant (shedding them can create new unit equations)
and complementary unit inequalities fuse into equations, so the whole pass
repeats to fixpoint.  The eliminated variables are reconstructed exactly from
the returned map after solving the reduced formula.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, gcd
from typing import Optional

from ..formula import (Clause, EQ, LE, LinearAtom, Literal, VarRegistry,
                       atom_lit, linear_atom)


class EliminationUnsat(Exception):
    """The unit equation system (hence the hard set) is inconsistent."""

    def __init__(self, origins: list[str], message: str = ""):
        self.origins = origins
        super().__init__(message or f"inconsistent unit equations from {origins}")


@dataclass
class Substitution:
    var: int
    coeffs: dict[int, Fraction]  # over surviving variables only
    const: Fraction


@dataclass
class EliminationMap:
    subs: list[Substitution] = field(default_factory=list)

    @property
    def eliminated(self) -> set[int]:
        return {s.var for s in self.subs}

    def record(self, var: int, coeffs: dict[int, Fraction], const: Fraction):
        # resolve references to already-eliminated variables in the new entry
        existing = {s.var: s for s in self.subs}
        coeffs = dict(coeffs)
        const = Fraction(const)
        progress = True
        while progress:
            progress = False
            for v in list(coeffs):
                s = existing.get(v)
                if s is None:
                    continue
                k = coeffs.pop(v)
                for u, c in s.coeffs.items():
                    nc = coeffs.get(u, Fraction(0)) + k * c
                    if nc:
                        coeffs[u] = nc
                    else:
                        coeffs.pop(u, None)
                const += k * s.const
                progress = True
        # keep existing entries closed over surviving variables
        for s in self.subs:
            k = s.coeffs.pop(var, None)
            if k:
                for v, c in coeffs.items():
                    s.coeffs[v] = s.coeffs.get(v, Fraction(0)) + k * c
                    if not s.coeffs[v]:
                        del s.coeffs[v]
                s.const += k * const
        self.subs.append(Substitution(var, dict(coeffs), const))

    def extend(self, arith: dict[int, int]) -> dict[int, int]:
        """Reconstruct eliminated variables; values are integral by construction."""
        out = dict(arith)
        for s in self.subs:
            val = s.const
            for v, c in s.coeffs.items():
                val += c * out[v]
            if val.denominator != 1:
                raise ValueError(f"non-integral reconstruction for var {s.var}: {val}")
            out[s.var] = int(val)
        return out


@dataclass
class EliminationStats:
    rounds: int = 0
    eliminated_vars: int = 0
    fused_equations: int = 0
    input_clauses: int = 0
    output_clauses: int = 0
    per_round: list[int] = field(default_factory=list)


_TRUE = object()


def _subst_atom(atom: LinearAtom, submap: dict[int, Substitution]) -> tuple:
    """Apply substitutions; returns a LinearAtom or (_TRUE/False-ish constant)."""
    if not any(v in submap for _, v in atom.terms):
        return atom
    coeffs: dict[int, Fraction] = {}
    const = atom.const
    for c, v in atom.terms:
        s = submap.get(v)
        if s is None:
            coeffs[v] = coeffs.get(v, Fraction(0)) + c
        else:
            for u, sc in s.coeffs.items():
                coeffs[u] = coeffs.get(u, Fraction(0)) + c * sc
            const -= c * s.const
    coeffs = {v: c for v, c in coeffs.items() if c}
    if not coeffs:
        truth = (Fraction(0) <= const) if atom.rel == LE else (const == 0)
        return truth
    return linear_atom([(c, v) for v, c in coeffs.items()], atom.rel, const)


def _scaled_key(atom: LinearAtom) -> tuple[tuple[tuple[int, int], ...], int, int]:
    """Canonical integer form: (oriented terms, sign, tightened bound).

    Returns (key terms, flip, bound) such that the atom (as <=) reads
    flip*(key) <= bound with key's first coefficient positive.
    """
    terms, const = atom.scaled_int()
    g = 0
    for c, _ in terms:
        g = gcd(g, abs(c))
    if g > 1:
        terms = tuple((c // g, v) for c, v in terms)
        const = floor(Fraction(const, g))
    flip = 1 if terms[0][0] > 0 else -1
    if flip < 0:
        terms = tuple((-c, v) for c, v in terms)
    return terms, flip, const


def unit_equation_elimination(clauses: list[Clause], registry: VarRegistry,
                              keep: frozenset[int] = frozenset()
                              ) -> tuple[list[Clause], EliminationMap, EliminationStats]:
    """Reduce a hard clause set to fixpoint; `keep` variables are never eliminated."""
    emap = EliminationMap()
    stats = EliminationStats(input_clauses=len(clauses))
    work = list(clauses)

    while True:
        stats.rounds += 1
        eliminated = _solve_round(work, registry, keep, emap, stats)
        stats.per_round.append(eliminated)
        work, changed = _normalize_clauses(work, emap, stats)
        if not eliminated and not changed:
            break
    stats.output_clauses = len(work)
    return work, emap, stats


def _solve_round(work: list[Clause], registry: VarRegistry, keep: frozenset[int],
                 emap: EliminationMap, stats: EliminationStats) -> int:
    # gather unit equations (already substitution-free: clauses are normalized
    # at the end of every round)
    rows: list[tuple[dict[int, Fraction], Fraction, list[str]]] = []
    seen = set()
    for c in work:
        if not c.is_unit:
            continue
        lit = c.literals[0]
        if lit.atom is None or not lit.pos or lit.atom.rel != EQ:
            continue
        key = (lit.atom.terms, lit.atom.const)
        if key in seen:
            continue
        seen.add(key)
        rows.append(({v: co for co, v in lit.atom.terms}, lit.atom.const, [c.origin]))
    if not rows:
        return 0

    # Gauss-Jordan to reduced row echelon form over exact rationals
    pivots: dict[int, int] = {}  # var -> row index
    reduced: list[tuple[dict[int, Fraction], Fraction, list[str]]] = []
    for coeffs, const, origins in rows:
        coeffs = dict(coeffs)
        origins = list(origins)
        for pv, ri in list(pivots.items()):
            k = coeffs.get(pv)
            if not k:
                continue
            pc, pk, porig = reduced[ri]
            for v, c in pc.items():
                nv = coeffs.get(v, Fraction(0)) - k * c
                if nv:
                    coeffs[v] = nv
                else:
                    coeffs.pop(v, None)
            coeffs.pop(pv, None)
            const -= k * pk
            origins = origins + [o for o in porig if o not in origins]
        if not coeffs:
            if const != 0:
                raise EliminationUnsat(origins)
            continue
        pivot = min((v for v in coeffs if v not in keep), default=None)
        if pivot is None:
            pivot = min(coeffs)  # fully inside keep: normalize but never substitute
        a = coeffs[pivot]
        coeffs = {v: c / a for v, c in coeffs.items()}
        const = const / a
        # back-substitute into earlier rows
        for i, (pc, pk, porig) in enumerate(reduced):
            k = pc.get(pivot)
            if not k:
                continue
            for v, c in coeffs.items():
                if v == pivot:
                    continue
                nv = pc.get(v, Fraction(0)) - k * c
                if nv:
                    pc[v] = nv
                else:
                    pc.pop(v, None)
            pc.pop(pivot, None)
            reduced[i] = (pc, pk - k * const, porig + [o for o in origins if o not in porig])
        pivots[pivot] = len(reduced)
        reduced.append((coeffs, const, origins))

    # extract integer-preserving solved forms: x = k, or y = k*x + b
    count = 0
    for coeffs, const, origins in reduced:
        frees = [v for v in coeffs if v not in pivots]
        pivot = next(v for v in coeffs if v in pivots and pivots[v] is not None
                     and coeffs[v] == 1)
        candidates = [pivot] + frees
        if len(coeffs) > 2:
            continue
        for var in candidates:
            if var in keep or var in emap.eliminated:
                continue
            a = coeffs[var]
            expr = {v: -c / a for v, c in coeffs.items() if v != var}
            k = const / a
            if len(coeffs) == 1:
                if k.denominator != 1:
                    raise EliminationUnsat(origins,
                                           f"variable {registry.name_of(var)} forced to "
                                           f"non-integral value {k}")
                emap.record(var, {}, k)
                count += 1
                break
            if all(c.denominator == 1 for c in expr.values()) and k.denominator == 1:
                emap.record(var, expr, k)
                count += 1
                break
    stats.eliminated_vars += count
    return count


def _normalize_clauses(work: list[Clause], emap: EliminationMap,
                       stats: EliminationStats) -> tuple[list[Clause], bool]:
    submap = {s.var: s for s in emap.subs}
    out: list[Clause] = []
    changed = False
    for c in work:
        lits: list[Literal] = []
        satisfied = False
        cchanged = False
        for lit in c.literals:
            if lit.atom is None:
                lits.append(lit)
                continue
            res = _subst_atom(lit.atom, submap)
            if isinstance(res, LinearAtom):
                if res is not lit.atom:
                    cchanged = True
                    lits.append(Literal(atom=res, pos=lit.pos))
                else:
                    lits.append(lit)
                continue
            cchanged = True
            truth = bool(res) == lit.pos
            if truth:
                satisfied = True
                break
            # falsified literal is shed
        if satisfied:
            changed = True
            continue
        if not lits:
            raise EliminationUnsat([c.origin], f"clause from {c.origin!r} became empty")
        if cchanged:
            changed = True
            out.append(Clause(tuple(lits), c.origin))
        else:
            out.append(c)

    # fuse complementary unit inequalities (lhs <= k and lhs >= k) into equations
    bounds: dict[tuple, dict] = {}
    for idx, c in enumerate(out):
        if not c.is_unit:
            continue
        lit = c.literals[0]
        if lit.atom is None or lit.atom.rel != LE:
            continue
        atom = lit.atom
        if not lit.pos:
            terms, const = atom.scaled_int()
            atom = linear_atom([(Fraction(-cf), v) for cf, v in terms], LE, -const - 1)
        key_terms, flip, bound = _scaled_key(atom)
        entry = bounds.setdefault(key_terms, {"lb": None, "ub": None})
        side = "ub" if flip > 0 else "lb"
        val = bound if flip > 0 else -bound
        better = entry.get(side)
        if side == "ub":
            if better is None or val < better[0]:
                entry[side] = (val, idx)
        else:
            if better is None or val > better[0]:
                entry[side] = (val, idx)

    drop: dict[int, Optional[Clause]] = {}
    for key_terms, entry in bounds.items():
        if entry["lb"] is None or entry["ub"] is None:
            continue
        (lb, li), (ub, ui) = entry["lb"], entry["ub"]
        if lb > ub:
            raise EliminationUnsat([out[li].origin, out[ui].origin],
                                   "contradictory unit bounds")
        if lb == ub:
            atom = linear_atom([(Fraction(cf), v) for cf, v in key_terms], EQ, lb)
            merged = Clause((atom_lit(atom),),
                            out[ui].origin if out[ui].origin == out[li].origin
                            else f"{out[ui].origin}+{out[li].origin}")
            drop[ui] = merged
            drop[li] = None
            stats.fused_equations += 1

    if drop:
        changed = True
        out = [drop[i] if i in drop else c
               for i, c in enumerate(out) if drop.get(i, c) is not None]
    return out, changed
