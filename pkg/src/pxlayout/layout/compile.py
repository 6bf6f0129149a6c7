"""Compilation of a layout spec into a MaxSMT formula.

Every widget gets five property variables (width, height, x, y, visibility).
Hierarchy constraints tie visibilities together; each container contributes
its positional constraint family, guarded by the container's visibility (a
positional clause always carries the negated container visibility literal).
User constraints are guarded by the visibility of every widget they mention.
Preferences become fresh soft Booleans bridged to their targets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..config import EngineConfig
from ..formula import (AXIS_X, AXIS_Y, EQ, KIND_POS, KIND_SIZE, LE, Clause,
                       Literal, MaxSmtFormula, VarRegistry, atom_lit, bool_lit,
                       linear_atom)
from . import model as M
from .exprs import parse_constraint, referenced_widgets

F0 = Fraction(0)


class SpecError(ValueError):
    def __init__(self, diagnostics: list[str]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics))


@dataclass
class CompiledLayout:
    spec: M.LayoutSpec
    formula: MaxSmtFormula
    props: dict[tuple[str, str], int]     # (widget id, prop) -> var id
    var_widget: dict[int, str]            # var id -> owning widget id
    soft_names: dict[int, str]            # soft var id -> human name
    placeholder_groups: list[list[int]]   # soft var ids, at-most-one per group
    cfg: EngineConfig = field(default_factory=EngineConfig)

    @property
    def screen_w(self) -> int:
        return self.props[(M.SCREEN_ID, "w")]

    def var(self, wid: str, prop: str) -> int:
        return self.props[(wid, prop)]


def _le(terms, const=0) -> Literal:
    return atom_lit(linear_atom(terms, LE, const))


def _ge(terms, const=0) -> Literal:
    return atom_lit(linear_atom([(-c, v) for c, v in terms], LE, -const))


def _eq(terms, const=0) -> Literal:
    return atom_lit(linear_atom(terms, EQ, const))


class _Emitter:
    def __init__(self, spec: M.LayoutSpec, cfg: EngineConfig):
        self.spec = spec
        self.cfg = cfg
        self.reg = VarRegistry()
        self.f = MaxSmtFormula(self.reg)
        self.props: dict[tuple[str, str], int] = {}
        self.var_widget: dict[int, str] = {}
        self.soft_names: dict[int, str] = {}
        self.groups: list[list[int]] = []

    # -- variables ---------------------------------------------------------
    def declare_widget(self, w: M.WidgetDef):
        mx = self.cfg.max_px
        spec_vars = [
            ("w", AXIS_X, KIND_SIZE), ("h", AXIS_Y, KIND_SIZE),
            ("x", AXIS_X, KIND_POS), ("y", AXIS_Y, KIND_POS),
        ]
        for prop, axis, kind in spec_vars:
            v = self.reg.new_arith(f"{w.id}.{prop}", 0, mx, axis=axis, kind=kind)
            self.props[(w.id, prop)] = v.id
            self.var_widget[v.id] = w.id
        b = self.reg.new_bool(f"{w.id}.v")
        self.props[(w.id, "v")] = b.id
        self.var_widget[b.id] = w.id

    def aux(self, wid: str, name: str, axis: str, kind: str) -> int:
        v = self.reg.new_arith(f"{wid}.{name}", 0, self.cfg.max_px, axis=axis, kind=kind)
        self.var_widget[v.id] = wid
        return v.id

    def p(self, wid: str, prop: str) -> int:
        return self.props[(wid, prop)]

    def vis(self, wid: str, pos: bool = True) -> Literal:
        return bool_lit(self.props[(wid, "v")], pos)

    # -- clause emission -----------------------------------------------------
    def hard(self, lits, origin: str):
        self.f.add_hard(lits, origin)

    def guarded(self, wid: str, lits, origin: str):
        """Positional clause of container wid, guarded per its visibility."""
        self.f.add_hard([self.vis(wid, False)] + list(lits), origin)

    # -- top level ---------------------------------------------------------
    def run(self) -> CompiledLayout:
        spec = self.spec
        for w in spec.widgets.values():
            self.declare_widget(w)

        # screen anchoring and size
        lo, hi = spec.screen_width
        sw = self.reg.arith[self.p(M.SCREEN_ID, "w")]
        self.reg.rebound(sw.id, lo, hi)
        self.hard([bool_lit(self.p(M.SCREEN_ID, "v"))], "screen:visible")
        self.hard([_eq([(Fraction(1), self.p(M.SCREEN_ID, "x"))], 0)], "screen:anchor")
        self.hard([_eq([(Fraction(1), self.p(M.SCREEN_ID, "y"))], 0)], "screen:anchor")
        if spec.screen_height is not None:
            self.hard([_eq([(Fraction(1), self.p(M.SCREEN_ID, "h"))],
                           spec.screen_height)], "screen:height")

        self.emit_hierarchy()
        for w in spec.widgets.values():
            if w.kind in M.CONTAINER_KINDS:
                self.emit_container(w)
            self.emit_attrs(w)
        self.emit_user_constraints()
        self.emit_preferences()

        compiled = CompiledLayout(spec, self.f, self.props, self.var_widget,
                                  self.soft_names, self.groups, self.cfg)
        return compiled

    # -- hierarchy (visibility Boolean constraints) -------------------------
    def emit_hierarchy(self):
        spec = self.spec
        parents = spec.parents()
        for w in spec.widgets.values():
            if w.id == M.SCREEN_ID:
                continue
            ps = parents[w.id]
            origin = f"hierarchy:{w.id}"
            # visible widget needs a visible parent
            self.hard([self.vis(w.id, False)] + [self.vis(p) for p in ps], origin)
            # and at most one visible parent
            for i in range(len(ps)):
                for j in range(i + 1, len(ps)):
                    self.hard([self.vis(w.id, False), self.vis(ps[i], False),
                               self.vis(ps[j], False)], origin)
        for w in spec.widgets.values():
            if w.kind not in M.CONTAINER_KINDS:
                continue
            origin = f"hierarchy:{w.id}"
            if w.kind == M.PLACEHOLDER:
                # exactly one visible alternative while the placeholder shows
                self.hard([self.vis(w.id, False)] + [self.vis(k) for k in w.kids],
                          origin)
                for i in range(len(w.kids)):
                    for j in range(i + 1, len(w.kids)):
                        self.hard([self.vis(w.id, False), self.vis(w.kids[i], False),
                                   self.vis(w.kids[j], False)], origin)
            elif w.kind == M.FLOW_NOWRAP:
                pass  # kid visibility is position-driven, emitted with the container
            else:
                for k in w.kids:
                    self.hard([self.vis(w.id, False), self.vis(k)], origin)

    # -- containers ----------------------------------------------------------
    def emit_container(self, w: M.WidgetDef):
        kind = w.kind
        if kind in (M.ROW, M.FLEX):
            self.emit_row_basics(w)
        if kind in (M.COLUMN, M.SCREEN):
            self.emit_column_basics(w)
        if kind == M.ROW or kind == M.COLUMN:
            self.emit_spacing(w, horizontal=(kind == M.ROW))
        if kind == M.FLOW_WRAP:
            self.emit_flow_wrap_equal(w)
        elif kind == M.FLOW_NOWRAP:
            self.emit_flow_nowrap(w)
        elif kind == M.FLOW_VARY:
            self.emit_flow_vary(w)
        elif kind == M.WATERFALL:
            self.emit_waterfall(w)
        elif kind == M.TABLE:
            self.emit_table(w)
        elif kind == M.CARD:
            self.emit_card(w)
        elif kind == M.FLEX:
            self.emit_flex(w)
        elif kind == M.PLACEHOLDER:
            self.emit_placeholder(w)

    def emit_row_basics(self, w: M.WidgetDef):
        origin = f"{w.kind}:{w.id}"
        kids = w.kids
        one = Fraction(1)
        for a, b in zip(kids, kids[1:]):
            self.guarded(w.id, [_le([(one, self.p(a, "x")), (one, self.p(a, "w")),
                                     (-one, self.p(b, "x"))], 0)], origin)
        first, last = kids[0], kids[-1]
        self.guarded(w.id, [_ge([(one, self.p(first, "x")),
                                 (-one, self.p(w.id, "x"))], 0)], origin)
        self.guarded(w.id, [_le([(one, self.p(last, "x")), (one, self.p(last, "w")),
                                 (-one, self.p(w.id, "x")), (-one, self.p(w.id, "w"))],
                                0)], origin)
        for k in kids:
            self.guarded(w.id, [_ge([(one, self.p(k, "y")),
                                     (-one, self.p(w.id, "y"))], 0)], origin)
            self.guarded(w.id, [_le([(one, self.p(k, "y")), (one, self.p(k, "h")),
                                     (-one, self.p(w.id, "y")),
                                     (-one, self.p(w.id, "h"))], 0)], origin)

    def emit_column_basics(self, w: M.WidgetDef):
        origin = f"{w.kind}:{w.id}"
        kids = w.kids
        if not kids:
            return
        one = Fraction(1)
        for a, b in zip(kids, kids[1:]):
            self.guarded(w.id, [_le([(one, self.p(a, "y")), (one, self.p(a, "h")),
                                     (-one, self.p(b, "y"))], 0)], origin)
        first, last = kids[0], kids[-1]
        self.guarded(w.id, [_ge([(one, self.p(first, "y")),
                                 (-one, self.p(w.id, "y"))], 0)], origin)
        self.guarded(w.id, [_le([(one, self.p(last, "y")), (one, self.p(last, "h")),
                                 (-one, self.p(w.id, "y")), (-one, self.p(w.id, "h"))],
                                0)], origin)
        for k in kids:
            self.guarded(w.id, [_ge([(one, self.p(k, "x")),
                                     (-one, self.p(w.id, "x"))], 0)], origin)
            self.guarded(w.id, [_le([(one, self.p(k, "x")), (one, self.p(k, "w")),
                                     (-one, self.p(w.id, "x")),
                                     (-one, self.p(w.id, "w"))], 0)], origin)

    def emit_spacing(self, w: M.WidgetDef, horizontal: bool):
        """set_margin / set_padding along a row or column axis."""
        origin = f"{w.kind}:{w.id}"
        one = Fraction(1)
        x, y, wd, h = ("x", "y", "w", "h") if horizontal else ("y", "x", "h", "w")
        kids = w.kids
        if w.margin is not None:
            m = w.margin
            rel = _eq if m.equal else _ge
            for a, b in zip(kids, kids[1:]):
                self.guarded(w.id, [rel([(one, self.p(b, x)), (-one, self.p(a, x)),
                                         (-one, self.p(a, wd))], m.amount)], origin)
        if w.padding is not None:
            pd = w.padding
            rel = _eq if pd.equal else _ge
            for k in kids:
                self.guarded(w.id, [rel([(one, self.p(k, y)),
                                         (-one, self.p(w.id, y))], pd.amount)], origin)
                self.guarded(w.id, [rel([(one, self.p(w.id, y)), (one, self.p(w.id, h)),
                                         (-one, self.p(k, y)), (-one, self.p(k, h))],
                                        pd.amount)], origin)
            first, last = kids[0], kids[-1]
            self.guarded(w.id, [rel([(one, self.p(first, x)),
                                     (-one, self.p(w.id, x))], pd.amount)], origin)
            self.guarded(w.id, [rel([(one, self.p(w.id, x)), (one, self.p(w.id, wd)),
                                     (-one, self.p(last, x)), (-one, self.p(last, wd))],
                                    pd.amount)], origin)

    def _fits_atom(self, w: M.WidgetDef, prev: str, kid: str) -> Literal:
        """Positive literal: kid fits in the current row after prev."""
        one = Fraction(1)
        return _le([(one, self.p(kid, "w")), (one, self.p(prev, "x")),
                    (one, self.p(prev, "w")), (-one, self.p(w.id, "x")),
                    (-one, self.p(w.id, "w"))], 0)

    def emit_flow_wrap_equal(self, w: M.WidgetDef):
        origin = f"flow_wrap:{w.id}"
        one = Fraction(1)
        kids = w.kids
        k1 = kids[0]
        for k in kids[1:]:
            self.guarded(w.id, [_eq([(one, self.p(k, "h")), (-one, self.p(k1, "h"))], 0)],
                         origin)
        self.guarded(w.id, [_eq([(one, self.p(k1, "x")), (-one, self.p(w.id, "x"))], 0)],
                     origin)
        self.guarded(w.id, [_eq([(one, self.p(k1, "y")), (-one, self.p(w.id, "y"))], 0)],
                     origin)
        last = kids[-1]
        self.guarded(w.id, [_le([(one, self.p(last, "x")), (one, self.p(last, "w")),
                                 (-one, self.p(w.id, "x")), (-one, self.p(w.id, "w"))], 0)],
                     origin)
        self.guarded(w.id, [_le([(one, self.p(last, "y")), (one, self.p(last, "h")),
                                 (-one, self.p(w.id, "y")), (-one, self.p(w.id, "h"))], 0)],
                     origin)
        for prev, k in zip(kids, kids[1:]):
            fits = self._fits_atom(w, prev, k)
            # wrapped to the next row
            self.guarded(w.id, [fits, _eq([(one, self.p(k, "x")),
                                           (-one, self.p(w.id, "x"))], 0)], origin)
            self.guarded(w.id, [fits, _eq([(one, self.p(k, "y")),
                                           (-one, self.p(prev, "y")),
                                           (-one, self.p(k1, "h"))], 0)], origin)
            # stays in the current row
            self.guarded(w.id, [fits.negate(), _eq([(one, self.p(k, "x")),
                                                    (-one, self.p(prev, "x")),
                                                    (-one, self.p(prev, "w"))], 0)], origin)
            self.guarded(w.id, [fits.negate(), _eq([(one, self.p(k, "y")),
                                                    (-one, self.p(prev, "y"))], 0)], origin)

    def emit_flow_nowrap(self, w: M.WidgetDef):
        origin = f"flow_nowrap:{w.id}"
        one = Fraction(1)
        kids = w.kids
        k1 = kids[0]
        for k in kids[1:]:
            self.guarded(w.id, [_eq([(one, self.p(k, "h")), (-one, self.p(k1, "h"))], 0)],
                         origin)
        self.guarded(w.id, [_eq([(one, self.p(k1, "x")), (-one, self.p(w.id, "x"))], 0)],
                     origin)
        self.guarded(w.id, [_eq([(one, self.p(k1, "y")), (-one, self.p(w.id, "y"))], 0)],
                     origin)
        for prev, k in zip(kids, kids[1:]):
            self.guarded(w.id, [_eq([(one, self.p(k, "x")), (-one, self.p(prev, "x")),
                                     (-one, self.p(prev, "w"))], 0)], origin)
            self.guarded(w.id, [_eq([(one, self.p(k, "y")), (-one, self.p(prev, "y"))],
                                    0)], origin)
        # kids inside the container are visible, kids past the edge are not
        for k in kids:
            inside = _le([(one, self.p(k, "x")), (one, self.p(k, "w")),
                          (-one, self.p(w.id, "x")), (-one, self.p(w.id, "w"))], 0)
            self.guarded(w.id, [inside.negate(), self.vis(k)], origin)
            self.guarded(w.id, [inside, self.vis(k, False)], origin)

    def emit_flow_vary(self, w: M.WidgetDef):
        origin = f"flow_vary:{w.id}"
        one = Fraction(1)
        kids = w.kids
        k1 = kids[0]
        tops = {k: self.aux(w.id, f"top{i + 1}", AXIS_Y, KIND_POS)
                for i, k in enumerate(kids)}
        maxh = {k: self.aux(w.id, f"rowh{i + 1}", AXIS_Y, KIND_SIZE)
                for i, k in enumerate(kids)}
        self.guarded(w.id, [_eq([(one, self.p(k1, "x")), (-one, self.p(w.id, "x"))], 0)],
                     origin)
        self.guarded(w.id, [_eq([(one, self.p(k1, "y")), (-one, self.p(w.id, "y"))], 0)],
                     origin)
        self.guarded(w.id, [_eq([(one, tops[k1]), (-one, self.p(k1, "y"))], 0)], origin)
        self.guarded(w.id, [_eq([(one, maxh[k1]), (-one, self.p(k1, "h"))], 0)], origin)
        last = kids[-1]
        self.guarded(w.id, [_le([(one, self.p(last, "y")), (one, self.p(last, "h")),
                                 (-one, self.p(w.id, "y")), (-one, self.p(w.id, "h"))], 0)],
                     origin)
        self.guarded(w.id, [_le([(one, self.p(last, "x")), (one, self.p(last, "w")),
                                 (-one, self.p(w.id, "x")), (-one, self.p(w.id, "w"))], 0)],
                     origin)
        for prev, k in zip(kids, kids[1:]):
            fits = self._fits_atom(w, prev, k)
            shorter = _le([(one, self.p(k, "h")), (-one, maxh[prev])], 0)
            # same row: adjacent, bottom-aligned with the previous widget
            self.guarded(w.id, [fits.negate(), _eq([(one, self.p(k, "x")),
                                                    (-one, self.p(prev, "x")),
                                                    (-one, self.p(prev, "w"))], 0)], origin)
            self.guarded(w.id, [fits.negate(), _eq([(one, self.p(k, "y")),
                                                    (one, self.p(k, "h")),
                                                    (-one, self.p(prev, "y")),
                                                    (-one, self.p(prev, "h"))], 0)], origin)
            self.guarded(w.id, [fits.negate(), _eq([(one, tops[k]), (-one, tops[prev])],
                                                   0)], origin)
            self.guarded(w.id, [fits.negate(), shorter,
                                _eq([(one, maxh[k]), (-one, self.p(k, "h"))], 0)], origin)
            self.guarded(w.id, [fits.negate(), shorter.negate(),
                                _eq([(one, maxh[k]), (-one, maxh[prev])], 0)], origin)
            # wrapped: left edge, below the previous widget, fresh row bookkeeping
            self.guarded(w.id, [fits, _eq([(one, self.p(k, "x")),
                                           (-one, self.p(w.id, "x"))], 0)], origin)
            self.guarded(w.id, [fits, _eq([(one, self.p(k, "y")),
                                           (-one, self.p(prev, "y")),
                                           (-one, self.p(prev, "h"))], 0)], origin)
            self.guarded(w.id, [fits, _eq([(one, tops[k]), (-one, self.p(k, "y"))], 0)],
                         origin)
            self.guarded(w.id, [fits, _eq([(one, maxh[k]), (-one, self.p(k, "h"))], 0)],
                         origin)
            self.guarded(w.id, [fits, _eq([(one, self.p(prev, "y")), (one, self.p(prev, "h")),
                                           (-one, tops[prev]), (-one, maxh[prev])], 0)],
                         origin)

    def emit_waterfall(self, w: M.WidgetDef):
        origin = f"waterfall:{w.id}"
        one = Fraction(1)
        kids = w.kids
        c = w.columns
        n = len(kids)
        k1 = kids[0]
        for k in kids:
            self.guarded(w.id, [_eq([(Fraction(c), self.p(k, "w")),
                                     (-one, self.p(w.id, "w"))], 0)], origin)
        for i in range(min(c, n)):
            k = kids[i]
            self.guarded(w.id, [_eq([(one, self.p(k, "y")), (-one, self.p(w.id, "y"))],
                                    0)], origin)
            self.guarded(w.id, [_eq([(one, self.p(k, "x")), (-one, self.p(w.id, "x")),
                                     (Fraction(-i), self.p(k1, "w"))], 0)], origin)
        if n <= c:
            return
        # colh[i][y]: height of column y after placing kid i (1-based step index)
        colh: dict[tuple[int, int], int] = {}
        for i in range(c, n + 1):
            for y in range(1, c + 1):
                colh[(i, y)] = self.aux(w.id, f"colh_{i}_{y}", AXIS_Y, KIND_SIZE)
        for y in range(1, c + 1):
            self.guarded(w.id, [_eq([(one, colh[(c, y)]),
                                     (-one, self.p(kids[y - 1], "h"))], 0)], origin)
        for i in range(c + 1, n + 1):
            k = kids[i - 1]
            for y in range(1, c + 1):
                # lowest-column condition: strictly lower than columns to the
                # left, not higher than columns to the right (leftmost minimum)
                antecedent: list[Literal] = []
                for y2 in range(1, c + 1):
                    if y2 == y:
                        continue
                    if y2 < y:
                        cond = _le([(one, colh[(i - 1, y)]), (-one, colh[(i - 1, y2)])],
                                   -1)
                    else:
                        cond = _le([(one, colh[(i - 1, y)]), (-one, colh[(i - 1, y2)])],
                                   0)
                    antecedent.append(cond.negate())
                self.guarded(w.id, antecedent + [_eq([(one, self.p(k, "x")),
                                                      (-one, self.p(w.id, "x")),
                                                      (Fraction(-(y - 1)), self.p(k1, "w"))],
                                                     0)], origin)
                self.guarded(w.id, antecedent + [_eq([(one, self.p(k, "y")),
                                                      (-one, self.p(w.id, "y")),
                                                      (-one, colh[(i - 1, y)])], 0)],
                             origin)
                self.guarded(w.id, antecedent + [_eq([(one, colh[(i, y)]),
                                                      (-one, colh[(i - 1, y)]),
                                                      (-one, self.p(k, "h"))], 0)], origin)
                for y2 in range(1, c + 1):
                    if y2 != y:
                        self.guarded(w.id, antecedent + [_eq([(one, colh[(i, y2)]),
                                                              (-one, colh[(i - 1, y2)])],
                                                             0)], origin)

    def emit_table(self, w: M.WidgetDef):
        origin = f"table:{w.id}"
        one = Fraction(1)
        r, c = w.rows, w.columns

        def kid(i, j):  # 1-based
            return w.kids[(i - 1) * c + (j - 1)]

        k11, krc = kid(1, 1), kid(r, c)
        self.guarded(w.id, [_eq([(one, self.p(k11, "x")), (-one, self.p(w.id, "x"))], 0)],
                     origin)
        self.guarded(w.id, [_eq([(one, self.p(k11, "y")), (-one, self.p(w.id, "y"))], 0)],
                     origin)
        self.guarded(w.id, [_eq([(one, self.p(krc, "x")), (one, self.p(krc, "w")),
                                 (-one, self.p(w.id, "x")), (-one, self.p(w.id, "w"))], 0)],
                     origin)
        self.guarded(w.id, [_eq([(one, self.p(krc, "y")), (one, self.p(krc, "h")),
                                 (-one, self.p(w.id, "y")), (-one, self.p(w.id, "h"))], 0)],
                     origin)
        for i in range(1, r + 1):
            for j in range(2, c + 1):
                self.guarded(w.id, [_eq([(one, self.p(kid(i, j), "y")),
                                         (-one, self.p(kid(i, 1), "y"))], 0)], origin)
                self.guarded(w.id, [_eq([(one, self.p(kid(i, j), "h")),
                                         (-one, self.p(kid(i, 1), "h"))], 0)], origin)
        for j in range(1, c + 1):
            for i in range(2, r + 1):
                self.guarded(w.id, [_eq([(one, self.p(kid(i, j), "x")),
                                         (-one, self.p(kid(1, j), "x"))], 0)], origin)
                self.guarded(w.id, [_eq([(one, self.p(kid(i, j), "w")),
                                         (-one, self.p(kid(1, j), "w"))], 0)], origin)
        for j in range(1, c):
            self.guarded(w.id, [_eq([(one, self.p(kid(1, j), "x")),
                                     (one, self.p(kid(1, j), "w")),
                                     (-one, self.p(kid(1, j + 1), "x"))], 0)], origin)
        for i in range(1, r):
            self.guarded(w.id, [_eq([(one, self.p(kid(i, 1), "y")),
                                     (one, self.p(kid(i, 1), "h")),
                                     (-one, self.p(kid(i + 1, 1), "y"))], 0)], origin)
        # explicit sizes; remaining columns/rows share one size
        for j, width in sorted(w.col_widths.items()):
            self.guarded(w.id, [_eq([(one, self.p(kid(1, j), "w"))], width)], origin)
        free_cols = [j for j in range(1, c + 1) if j not in w.col_widths]
        for j in free_cols[1:]:
            self.guarded(w.id, [_eq([(one, self.p(kid(1, j), "w")),
                                     (-one, self.p(kid(1, free_cols[0]), "w"))], 0)],
                         origin)
        for i, height in sorted(w.row_heights.items()):
            self.guarded(w.id, [_eq([(one, self.p(kid(i, 1), "h"))], height)], origin)
        free_rows = [i for i in range(1, r + 1) if i not in w.row_heights]
        for i in free_rows[1:]:
            self.guarded(w.id, [_eq([(one, self.p(kid(i, 1), "h")),
                                     (-one, self.p(kid(free_rows[0], 1), "h"))], 0)],
                         origin)

    def emit_card(self, w: M.WidgetDef):
        origin = f"card:{w.id}"
        one = Fraction(1)
        cap, body, dis = w.kids
        for k in w.kids:
            self.guarded(w.id, [_eq([(one, self.p(k, "w")), (-one, self.p(w.id, "w"))], 0)],
                         origin)
            self.guarded(w.id, [_eq([(one, self.p(k, "x")), (-one, self.p(w.id, "x"))], 0)],
                         origin)
        self.guarded(w.id, [_eq([(one, self.p(cap, "y")), (-one, self.p(w.id, "y"))], 0)],
                     origin)
        self.guarded(w.id, [_eq([(one, self.p(dis, "y")), (one, self.p(dis, "h")),
                                 (-one, self.p(w.id, "y")), (-one, self.p(w.id, "h"))], 0)],
                     origin)
        # a card is a special column: kids stack without overlap
        for a, b in zip(w.kids, w.kids[1:]):
            self.guarded(w.id, [_le([(one, self.p(a, "y")), (one, self.p(a, "h")),
                                     (-one, self.p(b, "y"))], 0)], origin)
        for i, prop in sorted(w.proportions.items()):
            k = w.kids[i - 1]
            self.guarded(w.id, [_eq([(one, self.p(k, "h")),
                                     (-prop, self.p(w.id, "h"))], 0)], origin)

    def emit_flex(self, w: M.WidgetDef):
        origin = f"flex:{w.id}"
        one = Fraction(1)
        kids = w.kids
        first, last = kids[0], kids[-1]
        if w.align == "stretch":
            for k in kids:
                self.guarded(w.id, [_eq([(one, self.p(k, "y")),
                                         (-one, self.p(w.id, "y"))], 0)], origin)
                self.guarded(w.id, [_eq([(one, self.p(k, "h")),
                                         (-one, self.p(w.id, "h"))], 0)], origin)
        elif w.align == "flex_start":
            for k in kids:
                self.guarded(w.id, [_eq([(one, self.p(k, "y")),
                                         (-one, self.p(w.id, "y"))], 0)], origin)
        elif w.align == "flex_end":
            for k in kids:
                self.guarded(w.id, [_eq([(one, self.p(k, "y")), (one, self.p(k, "h")),
                                         (-one, self.p(w.id, "y")),
                                         (-one, self.p(w.id, "h"))], 0)], origin)
        elif w.align == "space_around":
            self.guarded(w.id, [_eq([(one, self.p(first, "x")), (-one, self.p(w.id, "x")),
                                     (one, self.p(last, "x")), (one, self.p(last, "w")),
                                     (-one, self.p(w.id, "x")), (-one, self.p(w.id, "w"))],
                                    0)], origin)
            for prev, k in zip(kids, kids[1:]):
                self.guarded(w.id, [_eq([(Fraction(2), self.p(first, "x")),
                                         (Fraction(-2), self.p(w.id, "x")),
                                         (-one, self.p(k, "x")), (one, self.p(prev, "x")),
                                         (one, self.p(prev, "w"))], 0)], origin)
        elif w.align == "space_between":
            self.guarded(w.id, [_eq([(one, self.p(first, "x")),
                                     (-one, self.p(w.id, "x"))], 0)], origin)
            self.guarded(w.id, [_eq([(one, self.p(last, "x")), (one, self.p(last, "w")),
                                     (-one, self.p(w.id, "x")), (-one, self.p(w.id, "w"))],
                                    0)], origin)
            if len(kids) >= 3:
                k1, k2 = kids[0], kids[1]
                for prev, k in zip(kids[1:], kids[2:]):
                    self.guarded(w.id, [_eq([(one, self.p(k, "x")),
                                             (-one, self.p(prev, "x")),
                                             (-one, self.p(prev, "w")),
                                             (-one, self.p(k2, "x")),
                                             (one, self.p(k1, "x")),
                                             (one, self.p(k1, "w"))], 0)], origin)
        if w.flex_items:
            items = w.flex_items
            basis_sum = sum(it.basis for it in items)
            grow_sum = sum((it.grow for it in items), F0)
            shrink_sum = sum((it.shrink for it in items), F0)
            if grow_sum > 0:
                # room to grow (boundary included: widths equal basis exactly)
                room = _ge([(one, self.p(w.id, "w"))], basis_sum)
                for k, it in zip(kids, items):
                    self.guarded(w.id, [room.negate(),
                                        _eq([(grow_sum, self.p(k, "w")),
                                             (-it.grow, self.p(w.id, "w"))],
                                            grow_sum * it.basis - it.grow * basis_sum)],
                                 origin)
            if shrink_sum > 0:
                tight = _le([(one, self.p(w.id, "w"))], basis_sum)
                for k, it in zip(kids, items):
                    self.guarded(w.id, [tight.negate(),
                                        _eq([(shrink_sum, self.p(k, "w")),
                                             (-it.shrink, self.p(w.id, "w"))],
                                            shrink_sum * it.basis - it.shrink * basis_sum)],
                                 origin)

    def emit_placeholder(self, w: M.WidgetDef):
        """A visible alternative takes over the placeholder's box exactly."""
        origin = f"placeholder:{w.id}"
        one = Fraction(1)
        for k in w.kids:
            for prop in ("x", "y", "w", "h"):
                self.f.add_hard([self.vis(w.id, False), self.vis(k, False),
                                 _eq([(one, self.p(k, prop)),
                                      (-one, self.p(w.id, prop))], 0)], origin)

    # -- user constraints and preferences ------------------------------------
    def emit_attrs(self, w: M.WidgetDef):
        one = Fraction(1)
        fixed = [("w", w.width, "width"), ("h", w.height, "height")]
        for prop, val, label in fixed:
            if val is not None:
                self.f.add_hard([self.vis(w.id, False),
                                 _eq([(one, self.p(w.id, prop))], val)],
                                f"user:{w.id}.{label}")
        mins = [("w", w.min_width, "min_width"), ("h", w.min_height, "min_height")]
        for prop, val, label in mins:
            if val is not None:
                self.f.add_hard([self.vis(w.id, False),
                                 _ge([(one, self.p(w.id, prop))], val)],
                                f"user:{w.id}.{label}")
        maxs = [("w", w.max_width, "max_width"), ("h", w.max_height, "max_height")]
        for prop, val, label in maxs:
            if val is not None:
                self.f.add_hard([self.vis(w.id, False),
                                 _le([(one, self.p(w.id, prop))], val)],
                                f"user:{w.id}.{label}")

    def _resolve(self, wid: str, prop: str) -> int:
        key = (wid, prop)
        if key not in self.props:
            raise SpecError([f"unknown widget {wid!r} in constraint expression"])
        return self.props[key]

    def emit_user_constraints(self):
        for i, uc in enumerate(self.spec.constraints):
            origin = f"user:{uc.label or f'c{i}'}"
            guards = sorted(set().union(*[referenced_widgets(t)
                                          for t in uc.all + uc.any]))
            guard_lits = [self.vis(g, False) for g in guards if g != M.SCREEN_ID]
            for text in uc.all:
                lit = parse_constraint(text, self._resolve)
                self.f.add_hard(guard_lits + [lit], origin)
            if uc.any:
                lits = [parse_constraint(t, self._resolve) for t in uc.any]
                self.f.add_hard(guard_lits + lits, origin)

    def emit_preferences(self):
        # positional preferences: fresh soft Boolean bridged to the conjunction
        for pref in self.spec.preferences:
            b = self.reg.new_bool(f"pref.{pref.name}")
            self.soft_names[b.id] = pref.name
            for text in pref.all:
                lit = parse_constraint(text, self._resolve)
                self.f.add_hard([bool_lit(b, False), lit], f"pref:{pref.name}")
            self.f.add_soft(bool_lit(b), pref.weight)
        # alternative-visibility preferences of each placeholder
        parents = self.spec.parents()
        seen_soft: set[int] = set()
        for w in self.spec.widgets.values():
            if w.kind != M.PLACEHOLDER:
                continue
            group: list[int] = []
            n = len(w.kids)
            for idx, k in enumerate(w.kids):
                vid = self.p(k, "v")
                if vid in seen_soft:
                    continue
                seen_soft.add(vid)
                kw = self.spec.widgets[k].weight
                weight = kw if kw is not None else (n - idx)
                self.soft_names[vid] = f"{w.id}:{k}"
                group.append(vid)
                self.f.add_soft(bool_lit(vid), weight)
            # the at-most-one structure is only safe to exploit when the
            # alternatives answer to this placeholder alone
            if group and all(parents[k] == [w.id] for k in w.kids):
                self.groups.append(group)


def compile_layout(spec: M.LayoutSpec, cfg: Optional[EngineConfig] = None) -> CompiledLayout:
    """Validate and compile; validation failures raise SpecError."""
    diagnostics = [d for d in M.validate_spec(spec) if not d.startswith("warning:")]
    if diagnostics:
        raise SpecError(diagnostics)
    return _Emitter(spec, cfg or EngineConfig()).run()
