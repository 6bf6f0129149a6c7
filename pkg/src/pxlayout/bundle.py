"""Deploy bundle: everything the runtime needs, as one deterministic JSON file.

Contents: variable registry, the hardened outer formula, the screen-width
interval table, one entry per independent widget (inner formula plus width
and height tables), widget metadata for geometry assembly, and build
provenance (format version, tool version, config hash, seed).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from . import __version__
from .config import EngineConfig
from .extraction import IndependentSlice, extract_independent_widgets
from .formula import (ArithVar, BoolVar, Clause, EQ, LE, LinearAtom, Literal,
                      MaxSmtFormula, VarRegistry, linear_atom)
from .hardening import (DevSolver, HardeningError, IntervalRow, IntervalTable,
                        harden, soft_constraints_hardening)
from .layout.compile import CompiledLayout
from .preview import RepairEvent, preview_sweep

FORMAT_VERSION = 1


class BundleError(Exception):
    pass


@dataclass
class WidgetInfo:
    id: str
    kind: str
    kids: list[str]
    vars: dict[str, int]  # prop letter -> var id (w, h, x, y, v)


@dataclass
class DeployBundle:
    registry: VarRegistry
    outer: MaxSmtFormula                 # hardened outer formula (hard-only)
    screen_table: IntervalTable
    slices: list[IndependentSlice]
    widgets: list[WidgetInfo]
    soft_names: dict[int, str]
    screen_w: int
    seed: int = 1
    config_hash: str = ""
    tool_version: str = __version__
    format_version: int = FORMAT_VERSION
    repairs: list[RepairEvent] = field(default_factory=list)

    def widget_map(self) -> dict[str, WidgetInfo]:
        return {w.id: w for w in self.widgets}

    # -- serialization ---------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "format_version": self.format_version,
            "tool_version": self.tool_version,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "screen_w": self.screen_w,
            "vars": {
                "arith": [[v.id, v.name, v.lower, v.upper, v.axis, v.kind]
                          for v in sorted(self.registry.arith.values(),
                                          key=lambda v: v.id)],
                "bools": [[b.id, b.name] for b in sorted(self.registry.bools.values(),
                                                         key=lambda b: b.id)],
            },
            "outer": [_clause_doc(c) for c in self.outer.hard],
            "screen_table": _table_doc(self.screen_table),
            "slices": [
                {
                    "widget": s.widget,
                    "clause_count": s.clause_count,
                    "inner": [_clause_doc(c) for c in s.inner.hard],
                    "width_table": _table_doc(s.width_table),
                    "height_table": _table_doc(s.height_table),
                }
                for s in self.slices
            ],
            "widgets": [
                {"id": w.id, "kind": w.kind, "kids": w.kids, "vars": w.vars}
                for w in self.widgets
            ],
            "soft_names": {str(k): v for k, v in sorted(self.soft_names.items())},
            "repairs": [{"value": r.value,
                         "assignment": {str(k): v
                                        for k, v in sorted(r.assignment.items())}}
                        for r in self.repairs],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    def save(self, path: Union[str, Path]):
        Path(path).write_text(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "DeployBundle":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise BundleError(f"bundle is not valid JSON: {e}") from e
        version = doc.get("format_version")
        if version != FORMAT_VERSION:
            raise BundleError(f"unsupported bundle format version {version!r} "
                              f"(expected {FORMAT_VERSION})")
        try:
            reg = VarRegistry()
            for vid, name, lo, hi, axis, kind in doc["vars"]["arith"]:
                reg.arith[vid] = ArithVar(vid, name, lo, hi, axis, kind)
            for vid, name in doc["vars"]["bools"]:
                reg.bools[vid] = BoolVar(vid, name)
            reg._next = 1 + max([v for v in reg.arith] + [v for v in reg.bools],
                                default=-1)
            known = set(reg.arith) | set(reg.bools)

            outer = MaxSmtFormula(reg)
            outer.hard = [_clause_undoc(c, known, "outer") for c in doc["outer"]]
            slices = []
            for s in doc["slices"]:
                inner = MaxSmtFormula(reg)
                inner.hard = [_clause_undoc(c, known, f"slice {s['widget']}")
                              for c in s["inner"]]
                slices.append(IndependentSlice(
                    s["widget"], inner, _table_undoc(s["width_table"], reg),
                    _table_undoc(s["height_table"], reg), s["clause_count"]))
            widgets = [WidgetInfo(w["id"], w["kind"], list(w["kids"]),
                                  {k: int(v) for k, v in w["vars"].items()})
                       for w in doc["widgets"]]
            bundle = cls(
                registry=reg, outer=outer,
                screen_table=_table_undoc(doc["screen_table"], reg),
                slices=slices, widgets=widgets,
                soft_names={int(k): v for k, v in doc["soft_names"].items()},
                screen_w=doc["screen_w"], seed=doc["seed"],
                config_hash=doc["config_hash"], tool_version=doc["tool_version"],
                format_version=version,
                repairs=[RepairEvent(r["value"],
                                     {int(k): v for k, v in r["assignment"].items()})
                         for r in doc.get("repairs", [])],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise BundleError(f"malformed bundle section: {e}") from e
        for w in bundle.widgets:
            for prop, vid in w.vars.items():
                if vid not in known:
                    raise BundleError(f"widget {w.id} references unknown var {vid}")
        return bundle

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DeployBundle":
        return cls.from_json(Path(path).read_text())


def _frac_doc(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


def _clause_doc(c: Clause) -> dict:
    lits = []
    for lit in c.literals:
        if lit.is_bool:
            lits.append({"b": lit.var, "p": lit.pos})
        else:
            lits.append({
                "a": {
                    "t": [[t[0].numerator, t[0].denominator, t[1]]
                          for t in lit.atom.terms],
                    "r": lit.atom.rel,
                    "c": _frac_doc(lit.atom.const),
                },
                "p": lit.pos,
            })
    return {"o": c.origin, "l": lits}


def _clause_undoc(doc: dict, known: set[int], where: str) -> Clause:
    lits = []
    for ld in doc["l"]:
        if "b" in ld:
            if ld["b"] not in known:
                raise BundleError(f"{where}: unknown Boolean var {ld['b']}")
            lits.append(Literal(var=ld["b"], pos=ld["p"]))
        else:
            a = ld["a"]
            terms = []
            for num, den, vid in a["t"]:
                if vid not in known:
                    raise BundleError(f"{where}: unknown arithmetic var {vid}")
                terms.append((Fraction(num, den), vid))
            atom = linear_atom(terms, a["r"], Fraction(a["c"][0], a["c"][1]))
            lits.append(Literal(atom=atom, pos=ld["p"]))
    return Clause(tuple(lits), doc["o"])


def _table_doc(t: IntervalTable) -> dict:
    return {
        "prop": t.prop,
        "prop_name": t.prop_name,
        "min_val": t.min_val,
        "max_val": t.max_val,
        "related": t.related,
        "rows": [{"lo": r.lo, "hi": r.hi,
                  "assignment": {str(k): v for k, v in sorted(r.assignment.items())}}
                 for r in t.rows],
    }


def _table_undoc(doc: dict, reg: VarRegistry) -> IntervalTable:
    return IntervalTable(
        doc["prop"], doc["prop_name"], doc["min_val"], doc["max_val"],
        [IntervalRow(r["lo"], r["hi"],
                     {int(k): v for k, v in r["assignment"].items()})
         for r in doc["rows"]],
        list(doc["related"]))


@dataclass
class BuildLog:
    independent_widgets: list[str] = field(default_factory=list)
    repairs: int = 0
    outer_clauses: int = 0
    screen_rows: int = 0
    notes: list[str] = field(default_factory=list)


def build_deploy_bundle(compiled: CompiledLayout, dev: DevSolver,
                        cfg: Optional[EngineConfig] = None,
                        preview: bool = True,
                        extract: bool = True) -> tuple[DeployBundle, BuildLog]:
    """Full development-end pipeline: extract, harden, preview, assemble.

    Inner slices are swept before the outer formula; a hard-constraint
    conflict anywhere aborts the build (ConflictReport propagates).
    """
    cfg = cfg or compiled.cfg
    log = BuildLog()
    widgets = None if extract else []
    outer_base, slices = extract_independent_widgets(
        compiled, dev, widgets=widgets, preview=preview, stride=cfg.stride)
    log.independent_widgets = [s.widget for s in slices]
    log.repairs += sum(len(s.repairs) for s in slices)

    screen_table = soft_constraints_hardening(
        outer_base, compiled.screen_w, dev, groups=compiled.placeholder_groups)
    uncovered = [s for s in outer_base.soft
                 if s.lit.var not in set(screen_table.related)]
    if uncovered:
        names = [compiled.formula.registry.name_of(s.lit.var) for s in uncovered]
        raise HardeningError(
            f"outer soft constraints unrelated to the screen width: {names}")
    hardened = harden(outer_base, screen_table)
    repairs: list[RepairEvent] = []
    if preview:
        swept = preview_sweep(hardened, outer_base, screen_table, dev,
                              groups=compiled.placeholder_groups, stride=cfg.stride)
        hardened, screen_table = swept.formula, swept.table
        repairs = swept.repairs
        log.repairs += len(repairs)

    infos = [WidgetInfo(w.id, w.kind, list(w.kids),
                        {p: compiled.var(w.id, p) for p in ("w", "h", "x", "y", "v")})
             for w in compiled.spec.widgets.values()]
    bundle = DeployBundle(
        registry=compiled.formula.registry,
        outer=hardened,
        screen_table=screen_table,
        slices=slices,
        widgets=infos,
        soft_names=dict(compiled.soft_names),
        screen_w=compiled.screen_w,
        seed=cfg.seed,
        config_hash=cfg.config_hash(),
        repairs=repairs,
    )
    log.outer_clauses = len(hardened.hard)
    log.screen_rows = len(screen_table.rows)
    return bundle, log
