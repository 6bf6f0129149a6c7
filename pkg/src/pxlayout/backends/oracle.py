"""Brute-force oracle: exhaustive Boolean enumeration with exact arithmetic.

Testing reference for every other solving path.  Enumerates Boolean
assignments (pruned by unit propagation and, for MaxSMT, a weight bound),
then decides the induced linear system exactly: disjunctive arithmetic
remainders are split by literal selection and each conjunction goes through
the Fourier-Motzkin + integer extraction pipeline.

Deliberately refuses instances beyond its size limits instead of guessing.
"""
from __future__ import annotations

from typing import Optional

from .. import lia
from ..formula import Clause, Literal, Model, VarRegistry
from .base import Backend, SolverRequest, SolverResult, omt_search


class OracleLimitError(Exception):
    """Instance exceeds the oracle's documented size limits."""


MAX_BOOLS = 20
CORE_SHRINK_LIMIT = 400


class OracleBackend(Backend):
    name = "oracle"

    def __init__(self, max_bools: int = MAX_BOOLS, limits: Optional[lia.Limits] = None):
        self.max_bools = max_bools
        self.limits = limits or lia.Limits()

    # ------------------------------------------------------------------
    def solve(self, req: SolverRequest) -> SolverResult:
        if req.objective is not None:
            return omt_search(self, req)
        if req.soft:
            return self._maxsmt(req)
        return self.check(req)

    def check(self, req: SolverRequest) -> SolverResult:
        fixed = _assumption_map(req.assumptions)
        if fixed is None:
            return SolverResult("unsat", core=["assumptions"])
        enum = _Enumerator(req.registry, req.hard, self.max_bools, self.limits)
        model = enum.first_model(fixed)
        if model is not None:
            return SolverResult("sat", model=model, stats={"leaves": enum.leaves})
        res = SolverResult("unsat", stats={"leaves": enum.leaves})
        if req.want_core:
            res.core = self._shrink_core(req, fixed)
        return res

    def _maxsmt(self, req: SolverRequest) -> SolverResult:
        fixed = _assumption_map(req.assumptions)
        if fixed is None:
            return SolverResult("unsat", core=["assumptions"])
        enum = _Enumerator(req.registry, req.hard, self.max_bools, self.limits)
        best = enum.best_weight(fixed, req.soft)
        if best is None:
            res = SolverResult("unsat", stats={"leaves": enum.leaves})
            if req.want_core:
                res.core = self._shrink_core(req, fixed)
            return res
        weight, model = best
        return SolverResult("sat", model=model, optimum=weight,
                            stats={"leaves": enum.leaves})

    def _shrink_core(self, req: SolverRequest, fixed: dict[int, bool]) -> list[str]:
        clauses = list(req.hard)
        if len(clauses) > CORE_SHRINK_LIMIT:
            return _distinct_origins(clauses)

        def unsat(cs: list[Clause]) -> bool:
            enum = _Enumerator(req.registry, cs, self.max_bools, self.limits)
            return enum.first_model(dict(fixed)) is None

        i = 0
        while i < len(clauses):
            trial = clauses[:i] + clauses[i + 1:]
            if trial and unsat(trial):
                clauses = trial
            else:
                i += 1
        return _distinct_origins(clauses)


def _distinct_origins(clauses: list[Clause]) -> list[str]:
    seen: list[str] = []
    for c in clauses:
        if c.origin not in seen:
            seen.append(c.origin)
    return seen


def _assumption_map(assumptions: list[Literal]) -> Optional[dict[int, bool]]:
    fixed: dict[int, bool] = {}
    for lit in assumptions:
        if not lit.is_bool:
            raise OracleLimitError("assumptions must be Boolean literals")
        if fixed.get(lit.var, lit.pos) != lit.pos:
            return None
        fixed[lit.var] = lit.pos
    return fixed


class _Enumerator:
    def __init__(self, registry: VarRegistry, clauses: list[Clause],
                 max_bools: int, limits: lia.Limits):
        self.registry = registry
        self.clauses = clauses
        self.limits = limits
        self.leaves = 0
        self.bool_ids = sorted({v for c in clauses for v in c.bool_vars()})
        if len(self.bool_ids) > max_bools:
            raise OracleLimitError(
                f"{len(self.bool_ids)} Boolean variables exceed the oracle limit of {max_bools}")
        self.intervals = {}
        for c in clauses:
            for vid in c.arith_vars():
                var = registry.arith[vid]
                self.intervals[vid] = (var.lower, var.upper)
        self._conj_cache: dict[frozenset, tuple[str, Optional[dict[int, int]]]] = {}

    # -- Boolean layer --------------------------------------------------
    def first_model(self, fixed: dict[int, bool]) -> Optional[Model]:
        for model in self._models(fixed, order=self.bool_ids):
            return model
        return None

    def best_weight(self, fixed: dict[int, bool], softs) -> Optional[tuple[int, Model]]:
        soft_ids = [s.lit.var for s in softs]
        order = [v for v in soft_ids if v not in fixed]
        order += [v for v in self.bool_ids if v not in order and v not in fixed]
        total = sum(s.weight for s in softs)
        best: Optional[tuple[int, Model]] = None

        def lost_weight(assign: dict[int, bool]) -> int:
            lost = 0
            for s in softs:
                val = assign.get(s.lit.var)
                if val is not None and val != s.lit.pos:
                    lost += s.weight
            return lost

        stack = [dict(fixed)]
        # depth-first over soft-first variable order, true branch first
        def rec(assign: dict[int, bool]) -> None:
            nonlocal best
            if best is not None and total - lost_weight(assign) <= best[0]:
                return
            nxt = next((v for v in order if v not in assign), None)
            if nxt is None:
                for model in self._models(assign, order=self.bool_ids):
                    w = sum(s.weight for s in softs
                            if model.bools.get(s.lit.var) == s.lit.pos)
                    if best is None or w > best[0]:
                        best = (w, model)
                    return
                return
            for val in (True, False):
                child = dict(assign)
                child[nxt] = val
                rec(child)

        rec(stack[0])
        return best

    def _models(self, fixed: dict[int, bool], order: list[int]):
        """Yield one model per satisfiable total Boolean assignment."""

        def rec(assign: dict[int, bool]):
            self.leaves += 1
            status = self._propagate(assign)
            if status == "conflict":
                return
            nxt = next((v for v in order if v not in assign), None)
            if nxt is None:
                model = self._arith_stage(assign)
                if model is not None:
                    yield model
                return
            for val in (True, False):
                child = dict(assign)
                child[nxt] = val
                yield from rec(child)

        yield from rec(dict(fixed))

    def _propagate(self, assign: dict[int, bool]) -> str:
        """Unit-propagate pure-Boolean clauses; mutates assign."""
        progress = True
        while progress:
            progress = False
            for c in self.clauses:
                unassigned: list[Literal] = []
                satisfied = False
                has_arith = False
                for lit in c.literals:
                    if lit.is_bool:
                        val = assign.get(lit.var)
                        if val is None:
                            unassigned.append(lit)
                        elif val == lit.pos:
                            satisfied = True
                            break
                    else:
                        has_arith = True
                if satisfied:
                    continue
                if has_arith:
                    continue
                if not unassigned:
                    return "conflict"
                if len(unassigned) == 1:
                    lit = unassigned[0]
                    assign[lit.var] = lit.pos
                    progress = True
        return "ok"

    # -- arithmetic layer -------------------------------------------------
    def _arith_stage(self, assign: dict[int, bool]) -> Optional[Model]:
        residual: list[list[Literal]] = []
        for c in self.clauses:
            satisfied = False
            arith: list[Literal] = []
            for lit in c.literals:
                if lit.is_bool:
                    if assign[lit.var] == lit.pos:
                        satisfied = True
                        break
                else:
                    arith.append(lit)
            if satisfied:
                continue
            if not arith:
                return None
            residual.append(arith)
        residual.sort(key=len)

        chosen: dict = {}  # atom -> polarity

        def decide(i: int) -> Optional[dict[int, int]]:
            if i == len(residual):
                conj = frozenset(chosen.items())
                if conj not in self._conj_cache:
                    try:
                        self._conj_cache[conj] = lia.conj_feasible(
                            [(a, p) for a, p in conj], self.intervals,
                            want_model=True, limits=self.limits)
                    except lia.LiaLimitError as e:
                        raise OracleLimitError(str(e)) from e
                status, assignment = self._conj_cache[conj]
                return assignment if status == "sat" else None
            already = [lit for lit in residual[i] if chosen.get(lit.atom) == lit.pos]
            if already:
                return decide(i + 1)
            for lit in residual[i]:
                prev = chosen.get(lit.atom)
                if prev is not None and prev != lit.pos:
                    continue
                added = prev is None
                if added:
                    chosen[lit.atom] = lit.pos
                result = decide(i + 1)
                if result is not None:
                    return result
                if added:
                    del chosen[lit.atom]
            return None

        arith_assign = decide(0)
        if arith_assign is None:
            return None
        model = Model(dict(arith_assign), dict(assign))
        for vid, (lo, hi) in self.intervals.items():
            if vid not in model.arith:
                model.arith[vid] = _clamp_default(lo, hi)
        return model


def _clamp_default(lo, hi) -> int:
    if lo is not None and lo > 0:
        return lo
    if hi is not None and hi < 0:
        return hi
    return 0


def brute_force_solve(req: SolverRequest) -> SolverResult:
    """Module-level convenience wrapper over OracleBackend."""
    return OracleBackend().solve(req)
