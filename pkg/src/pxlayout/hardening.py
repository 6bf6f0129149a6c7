"""Interval-based hardening of soft constraints.

For a size property p, the range of p splits into intervals on which the
optimal truth assignment of the related soft constraints is constant.  The
table of (interval, assignment) rows is detected by descending sweep: MaxSMT
at the interval's upper bound fixes the assignment, OMT minimization under
that assignment finds the lower bound, and the next interval starts one pixel
below.  Encoding each row as a biconditional between the range test and the
assignment turns the MaxSMT formula into a plain SMT formula.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .backends.base import Backend, SolverRequest, SolverResult, lsu_maxsmt, omt_search
from .backends.fast import SimplifyingBackend
from .config import EngineConfig
from .formula import (AXIS_NONE, Clause, LE, Literal, MaxSmtFormula, SoftLit,
                      VarRegistry, atom_lit, bool_lit, linear_atom)


class HardeningError(Exception):
    def __init__(self, message: str, core: Optional[list[str]] = None):
        self.core = core
        super().__init__(message)


@dataclass
class IntervalRow:
    lo: int
    hi: int
    assignment: dict[int, bool]  # related soft var id -> truth value


@dataclass
class IntervalTable:
    prop: int                    # the size property's variable id
    prop_name: str
    min_val: int
    max_val: int
    rows: list[IntervalRow]      # descending, tiling [min_val, max_val]
    related: list[int]           # related soft var ids, in soft-list order

    def locate(self, value: int) -> int:
        if not self.min_val <= value <= self.max_val:
            raise ValueError(f"{self.prop_name}={value} outside "
                             f"[{self.min_val}, {self.max_val}]")
        for i, row in enumerate(self.rows):
            if row.lo <= value <= row.hi:
                return i
        raise ValueError(f"interval table for {self.prop_name} has a gap at {value}")

    def row_literals(self, idx: int) -> list[Literal]:
        row = self.rows[idx]
        return [bool_lit(v, val) for v, val in sorted(row.assignment.items())]

    def relation_clauses(self) -> list[Clause]:
        """C_relation in clausal form: range bound plus per-row biconditionals."""
        one = Fraction(1)
        p = self.prop
        out = [
            Clause((atom_lit(linear_atom([(-one, p)], LE, -self.min_val)),),
                   f"interval:{self.prop_name}:range"),
            Clause((atom_lit(linear_atom([(one, p)], LE, self.max_val)),),
                   f"interval:{self.prop_name}:range"),
        ]
        for row in self.rows:
            origin = f"interval:{self.prop_name}[{row.lo},{row.hi}]"
            lits = [bool_lit(v, val) for v, val in sorted(row.assignment.items())]
            if lits:
                negated = [l.negate() for l in lits]
                out.append(Clause(tuple(negated + [
                    atom_lit(linear_atom([(-one, p)], LE, -row.lo))]), origin))
                out.append(Clause(tuple(negated + [
                    atom_lit(linear_atom([(one, p)], LE, row.hi))]), origin))
                below = atom_lit(linear_atom([(one, p)], LE, row.lo - 1))
                above = atom_lit(linear_atom([(-one, p)], LE, -(row.hi + 1)))
                for lit in lits:
                    out.append(Clause((below, above, lit), origin))
        return out


def related_softs(f: MaxSmtFormula, p_vid: int) -> list[int]:
    """Soft variables connected to p on the variable-clause incidence graph.

    Arithmetic variables participate only on p's axis; Boolean variables are
    axis-neutral and always participate.
    """
    axis = f.registry.arith[p_vid].axis
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    reg = f.registry
    for c in f.hard:
        nodes = [v for v in c.arith_vars()
                 if reg.arith[v].axis in (axis, AXIS_NONE)]
        nodes += list(c.bool_vars())
        for other in nodes[1:]:
            union(nodes[0], other)
    root = find(p_vid)
    return [s.lit.var for s in f.soft if find(s.lit.var) == root]


class DevSolver:
    """Development-end facade: simplification in front of a complete backend.

    Core requests go straight to the complete backend so core members name
    original clause origins.
    """

    def __init__(self, complete: Backend, cfg: Optional[EngineConfig] = None):
        self.cfg = cfg or EngineConfig()
        self.complete = complete
        self.fast = SimplifyingBackend(complete, self.cfg)

    def check(self, registry: VarRegistry, hard: list[Clause],
              assumptions: list[Literal] = (), want_core: bool = False) -> SolverResult:
        req = SolverRequest(registry, list(hard), assumptions=list(assumptions),
                            want_core=want_core, timeout_s=self.cfg.timeout_s)
        return (self.complete if want_core else self.fast).check(req)

    def maxsmt(self, f: MaxSmtFormula, extra: list[Clause] = (),
               groups: Optional[list[list[int]]] = None) -> SolverResult:
        idx_groups = None
        if groups:
            by_var = {s.lit.var: i for i, s in enumerate(f.soft)}
            idx_groups = [[by_var[v] for v in g if v in by_var] for g in groups]
            idx_groups = [g for g in idx_groups if g]
        req = SolverRequest(f.registry, list(f.hard) + list(extra),
                            soft=list(f.soft), timeout_s=self.cfg.timeout_s,
                            groups=idx_groups)
        return lsu_maxsmt(self.fast, req)

    def omt(self, registry: VarRegistry, hard: list[Clause], vid: int,
            direction: str, assumptions: list[Literal] = ()) -> SolverResult:
        req = SolverRequest(registry, list(hard), assumptions=list(assumptions),
                            objective=(vid, direction), timeout_s=self.cfg.timeout_s)
        return omt_search(self.fast, req)


def fix_value_clause(registry: VarRegistry, vid: int, value: int,
                     origin: str = "probe") -> Clause:
    from .formula import EQ
    return Clause((atom_lit(linear_atom([(Fraction(1), vid)], EQ, value)),), origin)


def soft_constraints_hardening(f: MaxSmtFormula, p_vid: int, dev: DevSolver,
                               groups: Optional[list[list[int]]] = None,
                               related: Optional[list[int]] = None) -> IntervalTable:
    """Compute the interval table of p over f (descending sweep).

    Raises HardeningError when the hard set is empty-ranged or develops a
    hard infeasibility at a probed bound (soft-assignment gaps are repaired
    later by the preview sweep, hard gaps are designer errors).
    """
    name = f.registry.name_of(p_vid)
    if related is None:
        related = related_softs(f, p_vid)
    res_max = dev.omt(f.registry, f.hard, p_vid, "max")
    if res_max.status != "sat":
        core = None
        if res_max.status == "unsat":
            core = dev.check(f.registry, f.hard, want_core=True).core
        raise HardeningError(f"empty range: hard constraints on {name} are "
                             f"{res_max.status}", core)
    res_min = dev.omt(f.registry, f.hard, p_vid, "min")
    if res_min.status != "sat":
        raise HardeningError(f"no minimum for {name}: {res_min.status}")
    max_val, min_val = res_max.optimum, res_min.optimum

    rows: list[IntervalRow] = []
    upper = max_val
    while upper >= min_val:
        mres = dev.maxsmt(f, extra=[fix_value_clause(f.registry, p_vid, upper,
                                                     f"harden:{name}")],
                          groups=groups)
        if mres.status != "sat":
            raise HardeningError(
                f"hard constraints infeasible at {name}={upper} during hardening "
                f"(status {mres.status})")
        assignment = {v: bool(mres.model.bools.get(v, False)) for v in related}
        assumptions = [bool_lit(v, val) for v, val in sorted(assignment.items())]
        lres = dev.omt(f.registry, f.hard, p_vid, "min", assumptions=assumptions)
        if lres.status != "sat":
            raise HardeningError(
                f"no lower bound for {name} under {assignment} ({lres.status})")
        lower = lres.optimum
        rows.append(IntervalRow(lower, upper, assignment))
        if not assignment and lower != min_val:
            raise HardeningError(
                f"{name}: empty soft assignment cannot tile the range")
        upper = lower - 1
    return IntervalTable(p_vid, name, min_val, max_val, rows, list(related))


def harden(f: MaxSmtFormula, table: IntervalTable) -> MaxSmtFormula:
    """SMT form of f: hard clauses plus C_relation; softs are absorbed."""
    remaining = [s for s in f.soft if s.lit.var not in set(table.related)]
    return f.derive(list(f.hard) + table.relation_clauses(), remaining)
