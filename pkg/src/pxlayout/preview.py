"""Development-end preview: sweep a hardened formula across its range.

Walks the size property from its maximum down to its minimum, checking
satisfiability at each value.  An unsat hit means either (a) the original
hard constraints conflict at that size (reported with an unsat core and the
pipeline stops), or (b) the predetermined soft assignment's feasible region
is discontinuous; the hardening then reruns with the assignment forced above
the failing value, carving the continuous interval out, and the sweep
re-checks the same value against the repaired formula.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .formula import Clause, MaxSmtFormula, bool_lit, dump_clause
from .hardening import (DevSolver, HardeningError, IntervalTable,
                        fix_value_clause, harden, soft_constraints_hardening)


class ConflictReport(Exception):
    """Hard constraints conflict at a specific size value."""

    def __init__(self, prop_name: str, value: int, core: list[str],
                 clause_texts: Optional[dict[str, list[str]]] = None):
        self.prop_name = prop_name
        self.value = value
        self.core = core
        self.clause_texts = clause_texts or {}
        super().__init__(f"conflicting hard constraints at {prop_name}={value}: "
                         f"{', '.join(core)}")


@dataclass
class RepairEvent:
    value: int
    assignment: dict[int, bool]


@dataclass
class SweepResult:
    formula: MaxSmtFormula       # hardened, conflict-free across the range
    table: IntervalTable
    f_max: MaxSmtFormula         # original plus accumulated repair implications
    repairs: list[RepairEvent] = field(default_factory=list)
    checks: int = 0


def preview_sweep(f_hardened: MaxSmtFormula, f_max: MaxSmtFormula,
                  table: IntervalTable, dev: DevSolver,
                  groups: Optional[list[list[int]]] = None,
                  stride: int = 1) -> SweepResult:
    """Verify and repair a hardened formula over its property's whole range."""
    p_vid = table.prop
    name = table.prop_name
    result = SweepResult(f_hardened, table, f_max)
    curr = table.max_val
    repair_rounds = 0
    while curr >= table.min_val:
        probe = fix_value_clause(f_max.registry, p_vid, curr, f"preview:{name}")
        res = dev.check(f_max.registry, result.formula.hard + [probe])
        result.checks += 1
        if res.status == "sat":
            curr -= stride
            continue
        if res.status == "unknown":
            raise HardeningError(f"preview backend answered unknown at {name}={curr}")
        hard_res = dev.check(f_max.registry, result.f_max.hard + [probe],
                             want_core=True)
        if hard_res.status == "unsat":
            core = [o for o in (hard_res.core or []) if o != f"preview:{name}"]
            texts: dict[str, list[str]] = {}
            for c in result.f_max.hard:
                if c.origin in core:
                    texts.setdefault(c.origin, []).append(dump_clause(c))
            raise ConflictReport(name, curr, core, texts)
        # discontinuous interval: force this assignment above curr and re-harden
        row = result.table.rows[result.table.locate(curr)]
        assignment = dict(row.assignment)
        repair = Clause(
            tuple([bool_lit(v, not val) for v, val in sorted(assignment.items())]
                  + [_above(f_max, p_vid, curr)]),
            f"repair:{name}>{curr}")
        new_fmax = result.f_max.derive(list(result.f_max.hard) + [repair],
                                       result.f_max.soft)
        new_table = soft_constraints_hardening(new_fmax, p_vid, dev, groups=groups,
                                               related=table.related)
        result.f_max = new_fmax
        result.table = new_table
        result.formula = harden(new_fmax, new_table)
        result.repairs.append(RepairEvent(curr, assignment))
        repair_rounds += 1
        if repair_rounds > 200:
            raise HardeningError(f"preview of {name} exceeded the repair budget")
        # re-check the same value against the repaired formula
    return result


def _above(f: MaxSmtFormula, p_vid: int, value: int):
    """Positive literal: p > value (normalized to p >= value + 1)."""
    from fractions import Fraction

    from .formula import LE, atom_lit, linear_atom
    return atom_lit(linear_atom([(Fraction(-1), p_vid)], LE, -(value + 1)))


def report_conflicts(report: ConflictReport) -> str:
    """Human-readable conflict summary grouped by clause origin."""
    if not report.core:
        raise ValueError("empty unsat core")
    lines = [f"conflicting constraints at {report.prop_name} = {report.value}:"]
    for origin in report.core:
        lines.append(f"  [{origin}]")
        for text in report.clause_texts.get(origin, []):
            lines.append(f"    {text}")
    return "\n".join(lines)
