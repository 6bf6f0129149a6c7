"""Uniform solving contract shared by all backends.

A request bundles hard clauses (plus optional soft literals, an optimization
objective, and Boolean assumptions); a result reports sat/unsat/unknown with
a model, optimum, or unsat core.  The portable OMT (binary search on bound
assertions) and MaxSMT (descending linear search over soft assumption
literals) drivers live here and run over any backend's plain check().
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from ..formula import (Clause, Literal, MaxSmtFormula, Model, SoftLit, VarRegistry,
                       atom_lit, linear_atom, LE)


class BackendError(Exception):
    pass


@dataclass
class SolverRequest:
    registry: VarRegistry
    hard: list[Clause]
    soft: list[SoftLit] = field(default_factory=list)
    assumptions: list[Literal] = field(default_factory=list)
    objective: Optional[tuple[int, str]] = None  # (arith var id, "min"|"max")
    want_core: bool = False
    timeout_s: float = 30.0
    # at-most-one groups over soft indices, used to prune the LSU search
    groups: Optional[list[list[int]]] = None

    @classmethod
    def from_formula(cls, f: MaxSmtFormula, **kw) -> "SolverRequest":
        return cls(registry=f.registry, hard=list(f.hard), soft=list(f.soft), **kw)


@dataclass
class SolverResult:
    status: str  # "sat" | "unsat" | "unknown"
    model: Optional[Model] = None
    optimum: Optional[int] = None
    core: Optional[list[str]] = None
    stats: dict = field(default_factory=dict)


class Backend:
    """check() decides hard clauses under assumptions; solve() dispatches."""

    name = "abstract"

    def check(self, req: SolverRequest) -> SolverResult:
        raise NotImplementedError

    def solve(self, req: SolverRequest) -> SolverResult:
        if req.objective is not None:
            return omt_search(self, req)
        if req.soft:
            return lsu_maxsmt(self, req)
        return self.check(req)


def bound_clause(registry: VarRegistry, vid: int, rel_upper: bool, value: int,
                 origin: str = "omt:bound") -> Clause:
    if rel_upper:
        atom = linear_atom([(Fraction(1), vid)], LE, value)
    else:
        atom = linear_atom([(Fraction(-1), vid)], LE, -value)
    return Clause((atom_lit(atom),), origin)


def omt_search(backend: Backend, req: SolverRequest) -> SolverResult:
    """Optimize an integer objective by binary search on bound assertions.

    Returns an optimum v such that v is feasible and the next value in the
    optimizing direction is not.  Requires a finite bound on the optimizing
    side (all engine variables carry pixel-range bounds).
    """
    vid, direction = req.objective
    var = req.registry.arith[vid]
    base = SolverRequest(req.registry, req.hard, assumptions=req.assumptions,
                         timeout_s=req.timeout_s)
    first = backend.check(base)
    if first.status != "sat":
        return SolverResult(first.status, core=first.core, stats=first.stats)
    best_model = first.model
    best = best_model.arith[vid]
    calls = 1
    if direction == "min":
        lo = var.lower
        if lo is None:
            raise BackendError(f"objective {var.name} has no lower bound to search from")
        hi = best
        while lo < hi:
            mid = (lo + hi) // 2
            probe = SolverRequest(req.registry,
                                  req.hard + [bound_clause(req.registry, vid, True, mid)],
                                  assumptions=req.assumptions, timeout_s=req.timeout_s)
            res = backend.check(probe)
            calls += 1
            if res.status == "sat":
                best_model = res.model
                hi = min(mid, best_model.arith[vid])
            elif res.status == "unsat":
                lo = mid + 1
            else:
                return SolverResult("unknown", stats={"reason": "omt probe unknown"})
        optimum = lo
    elif direction == "max":
        hi = var.upper
        if hi is None:
            raise BackendError(f"objective {var.name} has no upper bound to search from")
        lo = best
        while lo < hi:
            mid = (lo + hi + 1) // 2
            probe = SolverRequest(req.registry,
                                  req.hard + [bound_clause(req.registry, vid, False, mid)],
                                  assumptions=req.assumptions, timeout_s=req.timeout_s)
            res = backend.check(probe)
            calls += 1
            if res.status == "sat":
                best_model = res.model
                lo = max(mid, res.model.arith[vid])
            elif res.status == "unsat":
                hi = mid - 1
            else:
                return SolverResult("unknown", stats={"reason": "omt probe unknown"})
        optimum = hi
    else:
        raise BackendError(f"unknown objective direction {direction!r}")
    return SolverResult("sat", model=best_model, optimum=optimum,
                        stats={"omt_calls": calls})


def _weight_ordered_assignments(softs: Sequence[SoftLit], groups: list[list[int]]):
    """Yield total soft assignments as (weight, true-index frozenset), heaviest first.

    Each group contributes one member or none (the at-most-one structure of
    layout alternatives); ungrouped softs form singleton groups.  Best-first
    expansion over a heap gives exact descending weight order.
    """
    choices: list[list[tuple[int, Optional[int]]]] = []
    for g in groups:
        opts = sorted(((softs[i].weight, i) for i in g), reverse=True)
        group_choices = [(w, i) for w, i in opts] + [(0, None)]
        choices.append(group_choices)
    # heap entries: (weight deficit from maximum, choice indices per group)
    max_w = sum(c[0][0] for c in choices) if choices else 0
    seen = set()
    heap = [(0, tuple(0 for _ in choices))]
    seen.add(heap[0][1])
    counter = itertools.count()
    while heap:
        deficit, idxs = heapq.heappop(heap)
        chosen = frozenset(choices[g][i][1] for g, i in enumerate(idxs)
                           if choices[g][i][1] is not None)
        yield max_w - deficit, chosen
        for g, i in enumerate(idxs):
            if i + 1 < len(choices[g]):
                nxt = idxs[:g] + (i + 1,) + idxs[g + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    d = deficit + choices[g][i][0] - choices[g][i + 1][0]
                    heapq.heappush(heap, (d, nxt))


def lsu_maxsmt(backend: Backend, req: SolverRequest,
               candidate_cap: int = 20000) -> SolverResult:
    """Linear search over total soft assignments in descending weight order.

    The first satisfiable assignment is optimal: any heavier true-set would
    have been checked earlier, and checking assumes the exact set (chosen
    literals true, the rest false), so weights match the assignment exactly.
    """
    softs = req.soft
    if not softs:
        res = backend.check(SolverRequest(req.registry, req.hard,
                                          assumptions=req.assumptions,
                                          timeout_s=req.timeout_s))
        res.optimum = 0 if res.status == "sat" else None
        return res
    grouped = set()
    groups = []
    for g in (req.groups or []):
        groups.append(list(g))
        grouped.update(g)
    for i in range(len(softs)):
        if i not in grouped:
            groups.append([i])
    checks = 0
    for weight, true_set in _weight_ordered_assignments(softs, groups):
        assumptions = list(req.assumptions)
        for i, s in enumerate(softs):
            lit = s.lit if i in true_set else s.lit.negate()
            assumptions.append(lit)
        res = backend.check(SolverRequest(req.registry, req.hard,
                                          assumptions=assumptions,
                                          timeout_s=req.timeout_s))
        checks += 1
        if checks > candidate_cap:
            return SolverResult("unknown", stats={"reason": "LSU candidate cap"})
        if res.status == "sat":
            return SolverResult("sat", model=res.model, optimum=weight,
                                stats={"lsu_checks": checks})
        if res.status == "unknown":
            return SolverResult("unknown", stats={"reason": "LSU probe unknown"})
    return SolverResult("unsat", stats={"lsu_checks": checks})
