"""Layout specification files.

YAML document: screen width range, a body tree of widgets, optional shared
definitions (referenced with {ref: id}), user constraints, and preferences.
Unknown fields are rejected with the offending path.

    version: 1
    screen: {width: [1000, 2000]}
    defs:
      - {id: card_a, kind: card, kids: [...]}
    body:
      - id: bars
        kind: placeholder
        kids:
          - {id: wide, kind: row, weight: 2, kids: [...]}
          - {id: thin, kind: row, kids: [...]}
    constraints:
      - {label: gap, all: ["thin.w >= 300"]}
    preferences:
      - {name: centered, weight: 2, all: ["2*a.x + a.w == 2*b.x + b.w"]}
"""
from __future__ import annotations

from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

import yaml

from . import model as M


class SpecFileError(ValueError):
    pass


_NODE_KEYS = {"id", "kind", "kids", "columns", "rows", "wrap", "varying_height",
              "align", "items", "weight", "width", "height", "min_width",
              "max_width", "min_height", "max_height", "margin", "padding",
              "col_widths", "row_heights", "proportions"}
_REF_KEYS = {"ref", "weight"}
_TOP_KEYS = {"version", "screen", "defs", "body", "constraints", "preferences"}
_ITEM_KEYS = {"basis", "grow", "shrink"}

_KIND_NAMES = {
    "leaf": M.LEAF, "row": M.ROW, "column": M.COLUMN, "card": M.CARD,
    "table": M.TABLE, "waterfall": M.WATERFALL, "flex": M.FLEX,
    "placeholder": M.PLACEHOLDER, "flow": None,  # resolved from wrap flags
}


def _fail(path: str, msg: str):
    raise SpecFileError(f"{path}: {msg}")


def _require_keys(d: dict, allowed: set, path: str):
    unknown = set(d) - allowed
    if unknown:
        _fail(path, f"unknown fields {sorted(unknown)}")


def _as_int(val, path: str) -> int:
    if not isinstance(val, int) or isinstance(val, bool):
        _fail(path, f"expected an integer, got {val!r}")
    return val


def _as_fraction(val, path: str) -> Fraction:
    try:
        if isinstance(val, float):
            return Fraction(str(val))
        return Fraction(val)
    except (ValueError, ZeroDivisionError):
        _fail(path, f"expected a number or ratio, got {val!r}")


def _spacing(val, path: str) -> M.SpacingRule:
    if isinstance(val, int) and not isinstance(val, bool):
        return M.SpacingRule(val, equal=False)
    if isinstance(val, dict):
        _require_keys(val, {"amount", "equal"}, path)
        return M.SpacingRule(_as_int(val.get("amount", 0), path),
                             bool(val.get("equal", False)))
    _fail(path, f"expected an amount or {{amount, equal}}, got {val!r}")


class _Loader:
    def __init__(self):
        self.widgets: dict[str, M.WidgetDef] = {}
        self.auto_n = 0

    def fresh_id(self) -> str:
        self.auto_n += 1
        return f"w{self.auto_n}"

    def load_node(self, node, path: str) -> str:
        if not isinstance(node, dict):
            _fail(path, f"expected a widget mapping, got {node!r}")
        if "ref" in node:
            _require_keys(node, _REF_KEYS, path)
            ref = node["ref"]
            if "weight" in node:
                target = self.widgets.get(ref)
                if target is not None:
                    target.weight = _as_int(node["weight"], path + ".weight")
            return ref
        _require_keys(node, _NODE_KEYS, path)
        wid = node.get("id") or self.fresh_id()
        if wid in self.widgets:
            _fail(path, f"duplicate widget id {wid!r}")
        if wid == M.SCREEN_ID:
            _fail(path, f"{M.SCREEN_ID!r} is reserved for the root")

        raw_kind = node.get("kind", "leaf")
        if raw_kind == "flow":
            wrap = node.get("wrap", True)
            vary = node.get("varying_height", False)
            kind = M.FLOW_NOWRAP if not wrap else (M.FLOW_VARY if vary else M.FLOW_WRAP)
        else:
            kind = _KIND_NAMES.get(raw_kind)
            if kind is None:
                _fail(path, f"unknown kind {raw_kind!r}")
            if "wrap" in node or "varying_height" in node:
                _fail(path, "wrap/varying_height only apply to flow containers")

        w = M.WidgetDef(id=wid, kind=kind)
        self.widgets[wid] = w
        for i, kid in enumerate(node.get("kids", []) or []):
            w.kids.append(self.load_node(kid, f"{path}.kids[{i}]"))
        if "columns" in node:
            w.columns = _as_int(node["columns"], path + ".columns")
        if "rows" in node:
            w.rows = _as_int(node["rows"], path + ".rows")
        if "align" in node:
            w.align = str(node["align"])
        if "weight" in node:
            w.weight = _as_int(node["weight"], path + ".weight")
        if "items" in node:
            items = []
            for i, it in enumerate(node["items"]):
                ipath = f"{path}.items[{i}]"
                if not isinstance(it, dict):
                    _fail(ipath, "expected {basis, grow, shrink}")
                _require_keys(it, _ITEM_KEYS, ipath)
                items.append(M.FlexItem(
                    basis=_as_int(it.get("basis", 0), ipath),
                    grow=_as_fraction(it.get("grow", 0), ipath),
                    shrink=_as_fraction(it.get("shrink", 0), ipath)))
            w.flex_items = items
        for attr in ("width", "height", "min_width", "max_width",
                     "min_height", "max_height"):
            if attr in node:
                setattr(w, attr, _as_int(node[attr], f"{path}.{attr}"))
        if "margin" in node:
            w.margin = _spacing(node["margin"], path + ".margin")
        if "padding" in node:
            w.padding = _spacing(node["padding"], path + ".padding")
        for key, attr in (("col_widths", "col_widths"), ("row_heights", "row_heights")):
            if key in node:
                d = node[key]
                if not isinstance(d, dict):
                    _fail(f"{path}.{key}", "expected an index -> size mapping")
                setattr(w, attr, {_as_int(k, f"{path}.{key}"): _as_int(v, f"{path}.{key}")
                                  for k, v in d.items()})
        if "proportions" in node:
            d = node["proportions"]
            if not isinstance(d, dict):
                _fail(path + ".proportions", "expected an index -> ratio mapping")
            w.proportions = {_as_int(k, path + ".proportions"):
                             _as_fraction(v, path + ".proportions")
                             for k, v in d.items()}
        return wid


def parse_spec(doc: dict) -> M.LayoutSpec:
    if not isinstance(doc, dict):
        raise SpecFileError("top level: expected a mapping")
    _require_keys(doc, _TOP_KEYS, "top level")
    if doc.get("version") != 1:
        raise SpecFileError("top level: version: 1 is required")
    screen = doc.get("screen")
    if not isinstance(screen, dict):
        raise SpecFileError("screen: required mapping with width: [lo, hi]")
    _require_keys(screen, {"width", "height"}, "screen")
    rng = screen.get("width")
    if (not isinstance(rng, list) or len(rng) != 2
            or not all(isinstance(v, int) for v in rng)):
        raise SpecFileError("screen.width: expected [lo, hi]")
    height = screen.get("height")
    if height is not None:
        height = _as_int(height, "screen.height")

    loader = _Loader()
    screen_def = M.WidgetDef(id=M.SCREEN_ID, kind=M.SCREEN)
    loader.widgets[M.SCREEN_ID] = screen_def
    for i, node in enumerate(doc.get("defs", []) or []):
        loader.load_node(node, f"defs[{i}]")
    for i, node in enumerate(doc.get("body", []) or []):
        screen_def.kids.append(loader.load_node(node, f"body[{i}]"))

    constraints = []
    for i, c in enumerate(doc.get("constraints", []) or []):
        path = f"constraints[{i}]"
        if isinstance(c, str):
            constraints.append(M.UserConstraint(label=f"c{i}", all=[c]))
            continue
        if not isinstance(c, dict):
            _fail(path, "expected an expression or mapping")
        _require_keys(c, {"label", "all", "any"}, path)
        constraints.append(M.UserConstraint(
            label=str(c.get("label", f"c{i}")),
            all=[str(t) for t in c.get("all", []) or []],
            any=[str(t) for t in c.get("any", []) or []]))
    preferences = []
    for i, p in enumerate(doc.get("preferences", []) or []):
        path = f"preferences[{i}]"
        if not isinstance(p, dict):
            _fail(path, "expected a mapping")
        _require_keys(p, {"name", "weight", "all"}, path)
        preferences.append(M.Preference(
            name=str(p.get("name", f"p{i}")),
            weight=_as_int(p.get("weight", 1), path + ".weight"),
            all=[str(t) for t in p.get("all", []) or []]))

    return M.LayoutSpec(screen_width=(rng[0], rng[1]), widgets=loader.widgets,
                        constraints=constraints, preferences=preferences,
                        screen_height=height)


def load_spec(path: Union[str, Path]) -> M.LayoutSpec:
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise SpecFileError(f"{path}: {e}") from e
    return parse_spec(doc)
