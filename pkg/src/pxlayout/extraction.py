"""Independent widget extraction: split the formula into outer and inner layers.

A widget is independent when the clauses touching its sub-layout never
mention anything outside the widget and its subtree, the sub-clause count
stays under a threshold, and no clause couples its width axis to its height
axis.  Each such sub-layout is pulled out as an inner formula solved on its
own; interval tables over the widget's width and height re-inject the
sub-layout's intrinsic size constraints into the outer formula.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .formula import AXIS_X, AXIS_Y, Clause, EQ, MaxSmtFormula, atom_lit, linear_atom
from .hardening import (DevSolver, HardeningError, IntervalTable,
                        harden, related_softs, soft_constraints_hardening)
from .layout import model as M
from .layout.compile import CompiledLayout
from .preview import RepairEvent, preview_sweep


@dataclass
class IndependentSlice:
    widget: str
    inner: MaxSmtFormula            # hard-only inner formula (positions normalized)
    width_table: IntervalTable
    height_table: IntervalTable
    clause_count: int               # |sub-constraints| before hardening
    repairs: list[RepairEvent] = field(default_factory=list)

    @property
    def width_var(self) -> int:
        return self.width_table.prop

    @property
    def height_var(self) -> int:
        return self.height_table.prop


def _clause_widgets(c: Clause, var_widget: dict[int, str]) -> set[str]:
    out = set()
    for v in c.arith_vars() | c.bool_vars():
        w = var_widget.get(v)
        if w is not None:
            out.add(w)
    return out


def _mixes_axes(c: Clause, compiled: CompiledLayout) -> bool:
    axes = {compiled.formula.registry.arith[v].axis for v in c.arith_vars()}
    return AXIS_X in axes and AXIS_Y in axes


def detect_independent_widgets(compiled: CompiledLayout,
                               threshold: Optional[int] = None) -> list[str]:
    """Outermost widgets whose sub-constraints qualify for extraction."""
    spec = compiled.spec
    t = threshold if threshold is not None else compiled.cfg.independence_threshold
    var_widget = compiled.var_widget
    qualified: list[str] = []
    for w in spec.widgets.values():
        if w.id == M.SCREEN_ID or not w.kids:
            continue
        sub = set(spec.subtree(w.id))
        if not sub:
            continue
        allowed = sub | {w.id}
        f_sub = []
        ok = True
        for c in compiled.formula.hard:
            owners = _clause_widgets(c, var_widget)
            if owners & sub:
                if not owners <= allowed:
                    ok = False
                    break
                f_sub.append(c)
        if not ok or not f_sub or len(f_sub) > t:
            continue
        if any(_mixes_axes(c, compiled) for c in f_sub):
            continue
        qualified.append(w.id)
    # keep outermost qualifying widgets only
    out = []
    for wid in qualified:
        if not any(wid in spec.subtree(other) for other in qualified if other != wid):
            out.append(wid)
    return out


def split_sub_formula(compiled: CompiledLayout, wid: str,
                      hard: list[Clause], soft) -> tuple[MaxSmtFormula, list, list]:
    """Separate wid's sub-constraints (plus position normalization) from hard."""
    sub_set = set(compiled.spec.subtree(wid))
    var_widget = compiled.var_widget
    f_sub = [c for c in hard if _clause_widgets(c, var_widget) & sub_set]
    rest = [c for c in hard if not (_clause_widgets(c, var_widget) & sub_set)]
    sub_vars: set[int] = set()
    for c in f_sub:
        sub_vars |= c.arith_vars() | c.bool_vars()
    sub_softs = [s for s in soft if s.lit.var in sub_vars]
    rest_softs = [s for s in soft if s.lit.var not in sub_vars]
    one = Fraction(1)
    norm = [
        Clause((atom_lit(linear_atom([(one, compiled.var(wid, "x"))], EQ, 0)),),
               f"slice:{wid}:normalize"),
        Clause((atom_lit(linear_atom([(one, compiled.var(wid, "y"))], EQ, 0)),),
               f"slice:{wid}:normalize"),
    ]
    sub_f = compiled.formula.derive(f_sub + norm, sub_softs)
    return sub_f, rest, rest_softs


def extract_independent_widgets(
        compiled: CompiledLayout, dev: DevSolver,
        widgets: Optional[list[str]] = None,
        preview: bool = False, stride: int = 1,
) -> tuple[MaxSmtFormula, list[IndependentSlice]]:
    """Pull qualifying sub-layouts out of the compiled formula.

    Returns the outer MaxSMT formula (width/height interval constraints of
    every slice conjoined, slice softs removed) and the inner slices.  With
    preview=True each slice table is swept and repaired before encoding.
    """
    f = compiled.formula
    if widgets is None:
        widgets = detect_independent_widgets(compiled)
    outer_hard = list(f.hard)
    outer_soft = list(f.soft)
    slices: list[IndependentSlice] = []
    for wid in widgets:
        sub_f, outer_hard, outer_soft = split_sub_formula(
            compiled, wid, outer_hard, outer_soft)
        count = len(sub_f.hard) - 2  # the two normalization units are ours
        w_vid = compiled.var(wid, "w")
        h_vid = compiled.var(wid, "h")
        repairs: list[RepairEvent] = []
        wt = soft_constraints_hardening(sub_f, w_vid, dev,
                                        groups=compiled.placeholder_groups)
        if preview:
            swept = preview_sweep(harden(sub_f, wt), sub_f, wt, dev,
                                  groups=compiled.placeholder_groups, stride=stride)
            sub_f, wt = swept.f_max, swept.table
            repairs.extend(swept.repairs)
        h_related = [v for v in related_softs(sub_f, h_vid)
                     if v not in set(wt.related)]
        ht = soft_constraints_hardening(sub_f, h_vid, dev,
                                        groups=compiled.placeholder_groups,
                                        related=h_related)
        if preview:
            swept = preview_sweep(
                sub_f.derive(list(sub_f.hard) + wt.relation_clauses()
                             + ht.relation_clauses()),
                sub_f, ht, dev, groups=compiled.placeholder_groups, stride=stride)
            sub_f, ht = swept.f_max, swept.table
            repairs.extend(swept.repairs)
        uncovered = [s for s in sub_f.soft
                     if s.lit.var not in set(wt.related) | set(ht.related)]
        if uncovered:
            names = [f.registry.name_of(s.lit.var) for s in uncovered]
            raise HardeningError(
                f"slice {wid}: soft constraints unrelated to width or height: {names}")
        inner = f.derive(list(sub_f.hard) + wt.relation_clauses()
                         + ht.relation_clauses())
        slices.append(IndependentSlice(wid, inner, wt, ht, count, repairs))

    outer = f.derive(outer_hard, outer_soft)
    for s in slices:
        outer.hard.extend(s.width_table.relation_clauses())
        outer.hard.extend(s.height_table.relation_clauses())
    return outer, slices
