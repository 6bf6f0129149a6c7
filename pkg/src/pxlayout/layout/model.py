"""Declarative layout specification: widget tree, containers, preferences."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exprs import ExprError, referenced_widgets

SCREEN_ID = "screen"

LEAF = "leaf"
ROW = "row"
COLUMN = "column"
FLOW_WRAP = "flow_wrap"          # equal heights, wrapping
FLOW_NOWRAP = "flow_nowrap"      # equal heights, overflow hides kids
FLOW_VARY = "flow_vary"          # varying heights, wrapping
WATERFALL = "waterfall"
TABLE = "table"
CARD = "card"
FLEX = "flex"
PLACEHOLDER = "placeholder"
SCREEN = "screen"                # root container, behaves like a column

CONTAINER_KINDS = {ROW, COLUMN, FLOW_WRAP, FLOW_NOWRAP, FLOW_VARY, WATERFALL,
                   TABLE, CARD, FLEX, PLACEHOLDER, SCREEN}
ALL_KINDS = CONTAINER_KINDS | {LEAF}

FLEX_ALIGNMENTS = {"none", "stretch", "space_around", "space_between",
                   "flex_start", "flex_end"}


@dataclass
class FlexItem:
    basis: int
    grow: Fraction = Fraction(0)
    shrink: Fraction = Fraction(0)


@dataclass
class SpacingRule:
    amount: int
    equal: bool = False


@dataclass
class WidgetDef:
    id: str
    kind: str = LEAF
    kids: list[str] = field(default_factory=list)
    # container parameters
    columns: Optional[int] = None        # waterfall, table
    rows: Optional[int] = None           # table
    align: str = "none"                  # flex
    flex_items: Optional[list[FlexItem]] = None
    weight: Optional[int] = None         # as a placeholder alternative
    # per-widget attributes (visibility-guarded user constraints)
    width: Optional[int] = None
    height: Optional[int] = None
    min_width: Optional[int] = None
    max_width: Optional[int] = None
    min_height: Optional[int] = None
    max_height: Optional[int] = None
    margin: Optional[SpacingRule] = None       # row/column/card
    padding: Optional[SpacingRule] = None
    col_widths: dict[int, int] = field(default_factory=dict)    # table
    row_heights: dict[int, int] = field(default_factory=dict)   # table
    proportions: dict[int, Fraction] = field(default_factory=dict)  # card


@dataclass
class UserConstraint:
    label: str
    all: list[str] = field(default_factory=list)   # conjunction of relations
    any: list[str] = field(default_factory=list)   # single disjunctive clause


@dataclass
class Preference:
    name: str
    weight: int
    all: list[str] = field(default_factory=list)


@dataclass
class LayoutSpec:
    screen_width: tuple[int, int]
    widgets: dict[str, WidgetDef]              # declaration order, screen first
    constraints: list[UserConstraint] = field(default_factory=list)
    preferences: list[Preference] = field(default_factory=list)
    screen_height: Optional[int] = None

    def __post_init__(self):
        if SCREEN_ID not in self.widgets:
            raise ValueError("spec must define the screen root")
        self._parents: Optional[dict[str, list[str]]] = None

    @property
    def screen(self) -> WidgetDef:
        return self.widgets[SCREEN_ID]

    def parents(self) -> dict[str, list[str]]:
        if self._parents is None:
            out: dict[str, list[str]] = {wid: [] for wid in self.widgets}
            for w in self.widgets.values():
                for k in w.kids:
                    if k in out:
                        out[k].append(w.id)
            self._parents = out
        return self._parents

    def subtree(self, wid: str) -> list[str]:
        """Transitive kid closure, excluding wid itself; declaration-ordered."""
        seen: list[str] = []
        stack = list(self.widgets[wid].kids)
        while stack:
            k = stack.pop(0)
            if k in seen:
                continue
            seen.append(k)
            stack.extend(self.widgets[k].kids)
        order = {w: i for i, w in enumerate(self.widgets)}
        return sorted(seen, key=lambda w: order[w])


def validate_spec(spec: LayoutSpec) -> list[str]:
    """Check every structural invariant; returns diagnostics, never raises."""
    out: list[str] = []
    widgets = spec.widgets
    lo, hi = spec.screen_width
    if lo < 0 or lo > hi:
        out.append(f"screen width range [{lo},{hi}] is invalid")

    parents = spec.parents()
    for w in widgets.values():
        if w.kind not in ALL_KINDS:
            out.append(f"{w.id}: unknown kind {w.kind!r}")
            continue
        for k in w.kids:
            if k not in widgets:
                out.append(f"{w.id}: kid {k!r} is not defined")
        if w.kind == LEAF and w.kids:
            out.append(f"{w.id}: leaf widgets cannot have kids")
        if w.kind in CONTAINER_KINDS and w.kind != SCREEN and not w.kids:
            out.append(f"{w.id}: {w.kind} container requires at least one kid")
        if w.kind == CARD and len(w.kids) != 3:
            out.append(f"{w.id}: Card requires exactly 3 kids (cap, body, dis), got {len(w.kids)}")
        if w.kind == PLACEHOLDER and len(w.kids) < 2:
            out.append(f"{w.id}: Placeholder requires at least 2 alternatives")
        if w.kind == TABLE:
            r, c = w.rows or 0, w.columns or 0
            if r < 1 or c < 1:
                out.append(f"{w.id}: Table requires positive rows and columns")
            elif r * c != len(w.kids):
                out.append(f"{w.id}: Table {r}x{c} needs {r * c} kids, got {len(w.kids)}")
            for j in w.col_widths:
                if not 1 <= j <= c:
                    out.append(f"{w.id}: column width override on nonexistent column {j}")
            for i in w.row_heights:
                if not 1 <= i <= r:
                    out.append(f"{w.id}: row height override on nonexistent row {i}")
        if w.kind == WATERFALL:
            c = w.columns or 0
            if c < 1:
                out.append(f"{w.id}: Waterfall requires at least 1 column")
            elif len(w.kids) < c:
                out.append(f"{w.id}: Waterfall with {c} columns needs at least {c} kids")
        if w.kind == FLEX:
            if w.align not in FLEX_ALIGNMENTS:
                out.append(f"{w.id}: unknown flex alignment {w.align!r}")
            if w.flex_items is not None:
                if len(w.flex_items) != len(w.kids):
                    out.append(f"{w.id}: flex items ({len(w.flex_items)}) must match kids "
                               f"({len(w.kids)})")
                else:
                    if any(it.grow < 0 or it.shrink < 0 or it.basis < 0
                           for it in w.flex_items):
                        out.append(f"{w.id}: flex basis/grow/shrink must be non-negative")
        if w.kind == CARD:
            for i in w.proportions:
                if not 1 <= i <= 3:
                    out.append(f"{w.id}: proportion override on nonexistent kid {i}")
        for rule in (w.margin, w.padding):
            if rule is not None and rule.amount < 0:
                out.append(f"{w.id}: negative spacing")
        if w.weight is not None and w.weight < 1:
            out.append(f"{w.id}: alternative weight must be >= 1")

    # reachability and cycles
    state: dict[str, int] = {}

    def dfs(wid: str, trail: list[str]) -> None:
        st = state.get(wid)
        if st == 1:
            cycle = trail[trail.index(wid):] + [wid]
            out.append("hierarchy cycle: " + " -> ".join(cycle))
            return
        if st == 2:
            return
        state[wid] = 1
        for k in widgets[wid].kids:
            if k in widgets:
                dfs(k, trail + [wid])
        state[wid] = 2

    dfs(SCREEN_ID, [])
    for wid in widgets:
        if wid != SCREEN_ID and state.get(wid) != 2:
            out.append(f"{wid}: defined but never placed under the screen")
        if wid != SCREEN_ID and state.get(wid) == 2 and not parents[wid]:
            out.append(f"{wid}: reachable widget without a parent")

    # a widget serving both as a placeholder alternative and a plain kid is
    # legal (the hierarchy constraints cover it) but worth flagging
    for wid, ps in parents.items():
        kinds = {widgets[p].kind for p in ps if p in widgets}
        if PLACEHOLDER in kinds and len(ps) > 1:
            out.append(f"warning: {wid} is a placeholder alternative and also "
                       f"a kid of another container")

    # expressions must parse and reference known widgets
    known = set(widgets)

    def check_exprs(texts: list[str], where: str):
        for t in texts:
            try:
                refs = referenced_widgets(t)
            except ExprError as e:
                out.append(f"{where}: {e}")
                continue
            for r in refs - known:
                out.append(f"{where}: unknown widget {r!r} in {t!r}")

    for uc in spec.constraints:
        if bool(uc.all) == bool(uc.any):
            out.append(f"constraint {uc.label!r}: exactly one of all:/any: required")
        check_exprs(uc.all + uc.any, f"constraint {uc.label!r}")
    for pref in spec.preferences:
        if pref.weight < 1:
            out.append(f"preference {pref.name!r}: weight must be >= 1")
        if not pref.all:
            out.append(f"preference {pref.name!r}: empty target")
        check_exprs(pref.all, f"preference {pref.name!r}")
    return out
