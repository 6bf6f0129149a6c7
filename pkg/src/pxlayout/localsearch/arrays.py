"""Flat-array encoding of a hard clause set for the search kernel.

Atoms are scaled to integer coefficients, variables and clauses become index
spaces, and occurrence lists are CSR arrays so the step loop never touches a
Python object.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..formula import Clause, EQ, Model, VarRegistry

NO_LOWER = -(2 ** 62)
NO_UPPER = 2 ** 62


@dataclass
class KernelProblem:
    registry: VarRegistry
    arith_ids: list[int]          # kernel index -> registry id
    bool_ids: list[int]
    arith_index: dict[int, int]   # registry id -> kernel index
    bool_index: dict[int, int]
    lower: np.ndarray
    upper: np.ndarray
    pinned: np.ndarray
    atom_rel: np.ndarray
    atom_const: np.ndarray
    atom_ptr: np.ndarray
    atom_var: np.ndarray
    atom_coef: np.ndarray
    var_atom_ptr: np.ndarray
    var_atom: np.ndarray
    cl_ptr: np.ndarray
    cl_kind: np.ndarray
    cl_idx: np.ndarray
    cl_pos: np.ndarray
    atom_occ_ptr: np.ndarray
    atom_occ_cl: np.ndarray
    atom_occ_pos: np.ndarray
    bool_occ_ptr: np.ndarray
    bool_occ_cl: np.ndarray
    bool_occ_pos: np.ndarray
    n_trivial: int                # clauses dropped as tautologies at build

    @property
    def n_arith(self) -> int:
        return len(self.arith_ids)

    @property
    def n_bool(self) -> int:
        return len(self.bool_ids)

    @property
    def n_clauses(self) -> int:
        return len(self.cl_ptr) - 1


def build_problem(clauses: list[Clause], registry: VarRegistry,
                  pinned_ids: frozenset[int] = frozenset()) -> KernelProblem:
    arith_ids: list[int] = []
    bool_ids: list[int] = []
    a_index: dict[int, int] = {}
    b_index: dict[int, int] = {}

    def a_idx(vid: int) -> int:
        if vid not in a_index:
            a_index[vid] = len(arith_ids)
            arith_ids.append(vid)
        return a_index[vid]

    def b_idx(vid: int) -> int:
        if vid not in b_index:
            b_index[vid] = len(bool_ids)
            bool_ids.append(vid)
        return b_index[vid]

    for vid in sorted(pinned_ids):
        a_idx(vid)

    atoms: dict = {}          # LinearAtom -> atom index
    atom_terms: list[list[tuple[int, int]]] = []
    atom_rels: list[int] = []
    atom_consts: list[int] = []

    def atom_id(atom) -> int:
        if atom not in atoms:
            terms, const = atom.scaled_int()
            atoms[atom] = len(atom_terms)
            atom_terms.append([(c, a_idx(v)) for c, v in terms])
            atom_rels.append(0 if atom.rel != EQ else 1)
            atom_consts.append(const)
        return atoms[atom]

    cl_lits: list[list[tuple[int, int, int]]] = []  # (kind, idx, pos)
    n_trivial = 0
    for c in clauses:
        seen: set[tuple[int, int, int]] = set()
        lits: list[tuple[int, int, int]] = []
        taut = False
        for lit in c.literals:
            if lit.is_bool:
                entry = (0, b_idx(lit.var), int(lit.pos))
            else:
                entry = (1, atom_id(lit.atom), int(lit.pos))
            if (entry[0], entry[1], 1 - entry[2]) in seen:
                taut = True
                break
            if entry not in seen:
                seen.add(entry)
                lits.append(entry)
        if taut:
            n_trivial += 1
            continue
        cl_lits.append(lits)

    na, nb, natoms, nc = len(arith_ids), len(bool_ids), len(atom_terms), len(cl_lits)

    lower = np.full(na, NO_LOWER, dtype=np.int64)
    upper = np.full(na, NO_UPPER, dtype=np.int64)
    pinned = np.zeros(na, dtype=np.uint8)
    for vid, i in a_index.items():
        var = registry.arith[vid]
        if var.lower is not None:
            lower[i] = var.lower
        if var.upper is not None:
            upper[i] = var.upper
        if vid in pinned_ids:
            pinned[i] = 1

    atom_ptr = np.zeros(natoms + 1, dtype=np.int64)
    for i, terms in enumerate(atom_terms):
        atom_ptr[i + 1] = atom_ptr[i] + len(terms)
    atom_var = np.zeros(atom_ptr[-1], dtype=np.int64)
    atom_coef = np.zeros(atom_ptr[-1], dtype=np.int64)
    k = 0
    for terms in atom_terms:
        for c, vi in terms:
            atom_var[k] = vi
            atom_coef[k] = c
            k += 1

    var_atoms: list[list[int]] = [[] for _ in range(na)]
    for ai in range(natoms):
        for ti in range(atom_ptr[ai], atom_ptr[ai + 1]):
            var_atoms[atom_var[ti]].append(ai)
    var_atom_ptr = np.zeros(na + 1, dtype=np.int64)
    for i in range(na):
        var_atom_ptr[i + 1] = var_atom_ptr[i] + len(var_atoms[i])
    var_atom = np.zeros(var_atom_ptr[-1], dtype=np.int64)
    k = 0
    for lst in var_atoms:
        for ai in lst:
            var_atom[k] = ai
            k += 1

    cl_ptr = np.zeros(nc + 1, dtype=np.int64)
    for i, lits in enumerate(cl_lits):
        cl_ptr[i + 1] = cl_ptr[i] + len(lits)
    nlits = cl_ptr[-1]
    cl_kind = np.zeros(nlits, dtype=np.uint8)
    cl_idx = np.zeros(nlits, dtype=np.int64)
    cl_pos = np.zeros(nlits, dtype=np.uint8)
    atom_occ: list[list[tuple[int, int]]] = [[] for _ in range(natoms)]
    bool_occ: list[list[tuple[int, int]]] = [[] for _ in range(nb)]
    k = 0
    for ci, lits in enumerate(cl_lits):
        for kind, idx, pos in lits:
            cl_kind[k] = kind
            cl_idx[k] = idx
            cl_pos[k] = pos
            (bool_occ if kind == 0 else atom_occ)[idx].append((ci, pos))
            k += 1

    def csr(occ):
        ptr = np.zeros(len(occ) + 1, dtype=np.int64)
        for i, lst in enumerate(occ):
            ptr[i + 1] = ptr[i] + len(lst)
        cl = np.zeros(ptr[-1], dtype=np.int64)
        po = np.zeros(ptr[-1], dtype=np.uint8)
        j = 0
        for lst in occ:
            for ci, p in lst:
                cl[j] = ci
                po[j] = p
                j += 1
        return ptr, cl, po

    aop, aoc, aopos = csr(atom_occ)
    bop, boc, bopos = csr(bool_occ)

    return KernelProblem(
        registry=registry, arith_ids=arith_ids, bool_ids=bool_ids,
        arith_index=a_index, bool_index=b_index,
        lower=lower, upper=upper, pinned=pinned,
        atom_rel=np.array(atom_rels, dtype=np.uint8),
        atom_const=np.array(atom_consts, dtype=np.int64),
        atom_ptr=atom_ptr, atom_var=atom_var, atom_coef=atom_coef,
        var_atom_ptr=var_atom_ptr, var_atom=var_atom,
        cl_ptr=cl_ptr, cl_kind=cl_kind, cl_idx=cl_idx, cl_pos=cl_pos,
        atom_occ_ptr=aop, atom_occ_cl=aoc, atom_occ_pos=aopos,
        bool_occ_ptr=bop, bool_occ_cl=boc, bool_occ_pos=bopos,
        n_trivial=n_trivial,
    )


def initial_assignment(p: KernelProblem, warm: Model | None = None,
                       pin_values: dict[int, int] | None = None
                       ) -> tuple[np.ndarray, np.ndarray]:
    assign = np.zeros(p.n_arith, dtype=np.int64)
    for i in range(p.n_arith):
        lo = p.lower[i] if p.lower[i] != NO_LOWER else None
        hi = p.upper[i] if p.upper[i] != NO_UPPER else None
        if lo is not None and hi is not None:
            assign[i] = (lo + hi) // 2
        elif lo is not None:
            assign[i] = lo
        elif hi is not None:
            assign[i] = min(hi, 0)
    bvals = np.zeros(p.n_bool, dtype=np.uint8)
    if warm is not None:
        for vid, val in warm.arith.items():
            i = p.arith_index.get(vid)
            if i is not None:
                assign[i] = val
        for vid, val in warm.bools.items():
            i = p.bool_index.get(vid)
            if i is not None:
                bvals[i] = 1 if val else 0
    for vid, val in (pin_values or {}).items():
        i = p.arith_index.get(vid)
        if i is not None:
            assign[i] = val
    return assign, bvals


def to_model(p: KernelProblem, assign: np.ndarray, bvals: np.ndarray) -> Model:
    return Model(
        {vid: int(assign[i]) for vid, i in p.arith_index.items()},
        {vid: bool(bvals[i]) for vid, i in p.bool_index.items()},
    )
