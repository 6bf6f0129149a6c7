"""Local-search solver instance: owns one problem encoding and its state.

Incomplete by design: answers sat (with a verified-refreshable model) or
unknown at budget; unsat only ever comes from elimination's inconsistency
detection upstream.  Warm starts reuse the previous assignment so a 1-px
width change usually resolves in a handful of steps.
"""
from __future__ import annotations

import time
from typing import Optional

import numpy as np

from ..config import EngineConfig
from ..formula import Clause, Model, VarRegistry
from . import kernel
from .arrays import KernelProblem, build_problem, initial_assignment, to_model

CHUNK_STEPS = 4096


class LocalSearchSolver:
    def __init__(self, clauses: list[Clause], registry: VarRegistry,
                 pinned_ids: frozenset[int] = frozenset(),
                 cfg: Optional[EngineConfig] = None):
        self.cfg = cfg or EngineConfig()
        self.problem: KernelProblem = build_problem(clauses, registry, pinned_ids)
        self._solve_count = 0
        p = self.problem
        nc = p.n_clauses
        self._nsat = np.zeros(nc, dtype=np.int64)
        self._weight = np.ones(nc, dtype=np.int64)
        self._sums = np.zeros(len(p.atom_rel), dtype=np.int64)
        self._fals_list = np.zeros(max(nc, 1), dtype=np.int64)
        self._fals_pos = np.full(max(nc, 1), -1, dtype=np.int64)
        self._tabu = np.zeros(p.n_arith + p.n_bool, dtype=np.int64)
        self._scratch = np.zeros(nc, dtype=np.int64)
        self._touched = np.zeros(max(nc, 1), dtype=np.int64)

    def solve(self, warm: Optional[Model] = None,
              pin_values: Optional[dict[int, int]] = None,
              budget_ms: Optional[float] = None,
              max_steps: Optional[int] = None,
              seed: Optional[int] = None) -> tuple[str, Optional[Model], dict]:
        """Returns (status, model or None, stats)."""
        cfg = self.cfg
        budget_s = (budget_ms if budget_ms is not None else cfg.budget_ms) / 1000.0
        cap = max_steps if max_steps is not None else cfg.max_steps
        base_seed = cfg.seed if seed is None else seed
        p = self.problem
        assign, bvals = initial_assignment(p, warm, pin_values)
        self._weight.fill(1)
        self._tabu.fill(0)
        self._scratch.fill(0)
        fcount, fweight = kernel.init_state(
            p.atom_rel, p.atom_const, p.atom_ptr, p.atom_var, p.atom_coef,
            p.cl_ptr, p.cl_kind, p.cl_idx, p.cl_pos,
            assign, bvals, self._sums, self._nsat, self._weight,
            self._fals_list, self._fals_pos)
        self._solve_count += 1
        steps = 0
        t0 = time.perf_counter()
        status = kernel.SAT if fcount == 0 else kernel.UNKNOWN
        chunk_i = 0
        walk_milli = int(cfg.walk_prob * 1000)
        while status != kernel.SAT:
            chunk = min(CHUNK_STEPS, cap - steps)
            if chunk <= 0:
                break
            status, done, fcount, fweight = kernel.run_steps(
                p.atom_rel, p.atom_const, p.atom_ptr, p.atom_var, p.atom_coef,
                p.var_atom_ptr, p.var_atom,
                p.cl_ptr, p.cl_kind, p.cl_idx, p.cl_pos,
                p.atom_occ_ptr, p.atom_occ_cl, p.atom_occ_pos,
                p.bool_occ_ptr, p.bool_occ_cl, p.bool_occ_pos,
                p.lower, p.upper, p.pinned,
                assign, bvals, self._sums, self._nsat, self._weight,
                self._fals_list, self._fals_pos, fcount, fweight,
                self._tabu, self._scratch, self._touched,
                steps, chunk,
                (base_seed + 7919 * self._solve_count + chunk_i) % (2 ** 31),
                cfg.tenure, walk_milli)
            steps += done
            chunk_i += 1
            if time.perf_counter() - t0 > budget_s:
                break
        stats = {
            "steps": steps,
            "wall_s": time.perf_counter() - t0,
            "kernel": kernel.kernel_mode(),
            "falsified": int(fcount),
        }
        if status == kernel.SAT:
            return "sat", to_model(p, assign, bvals), stats
        return "unknown", None, stats

    def warmup(self):
        """Trigger kernel compilation outside any timed path."""
        self.solve(max_steps=1, budget_ms=50.0)


def warm_start_from(previous: Model, changed: Optional[dict[int, int]] = None) -> Model:
    """Previous model with fixed-value updates applied (e.g. the new width).

    Eliminated variables are simply absent here; they are reconstructed after
    solving.  Crossing an interval boundary additionally requires re-running
    the Boolean fixing for the new row before solving (the runtime session
    does this).
    """
    out = previous.copy()
    for vid, val in (changed or {}).items():
        out.arith[vid] = val
    return out
