"""Local-search adapter and the simplify-then-solve combinator.

LocalSearchBackend satisfies the uniform backend contract with satisfiability
only: sat answers carry evaluator-verified models; everything else is unknown
(unsat never comes from search, only from elimination's inconsistency check).

SimplifyingBackend is the workhorse for development-end queries: Boolean
assumptions trigger unit propagation / pure literal elimination, unit
equation elimination shrinks the rest, local search grabs the easy sat
answers, and a complete backend decides whatever remains (on the reduced
clause set).  Core requests bypass simplification so the core names original
clause origins.
"""
from __future__ import annotations

from typing import Optional

from ..config import EngineConfig
from ..formula import (Clause, ConflictError, MaxSmtFormula, Model,
                       boolean_simplify, eval_clause, violated_clauses)
from ..localsearch.elimination import EliminationUnsat, unit_equation_elimination
from ..localsearch.solver import LocalSearchSolver
from .base import Backend, SolverRequest, SolverResult


def _as_formula(req: SolverRequest, clauses: list[Clause]) -> MaxSmtFormula:
    f = MaxSmtFormula(req.registry)
    f.hard = list(clauses)
    return f


def _complete_model(req: SolverRequest, model: Model) -> Model:
    """Fill unconstrained variables so the model is total over the request."""
    out = model.copy()
    used_a: set[int] = set()
    used_b: set[int] = {lit.var for lit in req.assumptions}
    for c in req.hard:
        used_a.update(c.arith_vars())
        used_b.update(c.bool_vars())
    for vid in used_a:
        if vid not in out.arith:
            var = req.registry.arith[vid]
            lo, hi = var.lower, var.upper
            out.arith[vid] = lo if (lo is not None and lo > 0) else \
                (hi if (hi is not None and hi < 0) else 0)
    for vid in used_b:
        out.bools.setdefault(vid, False)
    return out


def _verified(req: SolverRequest, model: Model) -> bool:
    for c in req.hard:
        if not eval_clause(c, model):
            return False
    for lit in req.assumptions:
        if model.bools.get(lit.var) != lit.pos:
            return False
    return True


class LocalSearchBackend(Backend):
    """Adapter over the local-search module; satisfiability only."""

    name = "local"

    def __init__(self, cfg: Optional[EngineConfig] = None):
        self.cfg = cfg or EngineConfig()

    def check(self, req: SolverRequest) -> SolverResult:
        clauses = list(req.hard)
        assume = {lit.var: lit.pos for lit in req.assumptions}
        try:
            residual, inferred = boolean_simplify(_as_formula(req, clauses), assume)
        except ConflictError as e:
            return SolverResult("unsat", core=[e.origin])
        try:
            reduced, emap, estats = unit_equation_elimination(
                residual.hard, req.registry)
        except EliminationUnsat as e:
            return SolverResult("unsat", core=e.origins)
        solver = LocalSearchSolver(reduced, req.registry, cfg=self.cfg)
        status, model, stats = solver.solve(
            budget_ms=min(self.cfg.budget_ms * 20, req.timeout_s * 1000))
        stats["elimination_rounds"] = estats.rounds
        if status == "sat":
            model.arith = emap.extend(model.arith)
            model.bools.update(inferred)
            full = _complete_model(req, model)
            if _verified(req, full):
                return SolverResult("sat", model=full, stats=stats)
            stats["reason"] = "search model failed verification"
            return SolverResult("unknown", stats=stats)
        stats["reason"] = "search budget exhausted"
        return SolverResult("unknown", stats=stats)


class SimplifyingBackend(Backend):
    """Boolean reasoning + unit equation elimination in front of a complete backend."""

    name = "fast"

    def __init__(self, complete: Backend, cfg: Optional[EngineConfig] = None,
                 use_search: bool = True):
        self.complete = complete
        self.cfg = cfg or EngineConfig()
        self.use_search = use_search

    def check(self, req: SolverRequest) -> SolverResult:
        if req.want_core:
            return self.complete.check(req)
        assume = {lit.var: lit.pos for lit in req.assumptions}
        try:
            residual, inferred = boolean_simplify(_as_formula(req, req.hard), assume)
        except ConflictError as e:
            return SolverResult("unsat", core=[e.origin])
        try:
            reduced, emap, _ = unit_equation_elimination(residual.hard, req.registry)
        except EliminationUnsat as e:
            return SolverResult("unsat", core=e.origins)

        def reconstruct(model: Model) -> Optional[Model]:
            m = model.copy()
            m.arith = emap.extend(m.arith)
            m.bools.update(inferred)
            full = _complete_model(req, m)
            return full if _verified(req, full) else None

        if self.use_search:
            solver = LocalSearchSolver(reduced, req.registry, cfg=self.cfg)
            status, model, stats = solver.solve(
                budget_ms=max(self.cfg.budget_ms, 250.0))
            if status == "sat":
                full = reconstruct(model)
                if full is not None:
                    return SolverResult("sat", model=full, stats=stats)

        sub = SolverRequest(req.registry, reduced, timeout_s=req.timeout_s)
        res = self.complete.check(sub)
        if res.status == "sat":
            full = reconstruct(res.model)
            if full is None:
                return SolverResult("unknown",
                                    stats={"reason": "reconstruction failed verification"})
            return SolverResult("sat", model=full, stats=res.stats)
        return res
