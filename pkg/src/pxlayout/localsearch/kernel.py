"""Step loop of the local-search solver.

Critical moves assign one integer variable the threshold value that satisfies
a falsified linear atom (rounded toward feasibility); Boolean literals flip.
Moves are scored by the weighted falsified-clause decrease with tabu
filtering; stagnation bumps the weights of falsified clauses (additive) and
occasionally takes a random walk step.

The loop is compiled with numba when available.  Set PXLAYOUT_KERNEL=python
to force the uncompiled path (same code, plain numpy) or PXLAYOUT_KERNEL=numba
to fail loudly if compilation is unavailable.
"""
from __future__ import annotations

import os

import numpy as np

from .arrays import NO_LOWER, NO_UPPER

_MODE_ENV = "PXLAYOUT_KERNEL"
_mode = os.environ.get(_MODE_ENV, "auto").lower()
_active_mode = "python"

SAT = 0
UNKNOWN = 1


def _identity(fn):
    return fn

if _mode in ("auto", "numba"):
    try:
        from numba import njit as _njit

        def _jit(fn):
            return _njit(cache=True)(fn)

        _active_mode = "numba"
    except ImportError:
        if _mode == "numba":
            raise
        _jit = _identity
else:
    _jit = _identity


def kernel_mode() -> str:
    return _active_mode


@_jit
def _atom_truth(rel, s, k):
    if rel == 0:
        return s <= k
    return s == k


@_jit
def _ceil_div(a, b):
    return -((-a) // b)


@_jit
def init_state(atom_rel, atom_const, atom_ptr, atom_var, atom_coef,
               cl_ptr, cl_kind, cl_idx, cl_pos,
               assign, bvals,
               sums, nsat, weight, fals_list, fals_pos):
    """Recompute sums / sat counts / falsified set from scratch.

    Returns (falsified count, falsified weight).
    """
    natoms = atom_rel.shape[0]
    for ai in range(natoms):
        s = np.int64(0)
        for ti in range(atom_ptr[ai], atom_ptr[ai + 1]):
            s += atom_coef[ti] * assign[atom_var[ti]]
        sums[ai] = s
    nclauses = cl_ptr.shape[0] - 1
    fcount = 0
    fweight = np.int64(0)
    for ci in range(nclauses):
        n = 0
        for li in range(cl_ptr[ci], cl_ptr[ci + 1]):
            if cl_kind[li] == 0:
                lv = bvals[cl_idx[li]] == 1
            else:
                ai = cl_idx[li]
                lv = _atom_truth(atom_rel[ai], sums[ai], atom_const[ai])
            if (cl_pos[li] == 1) == lv:
                n += 1
        nsat[ci] = n
        fals_pos[ci] = -1
        if n == 0:
            fals_list[fcount] = ci
            fals_pos[ci] = fcount
            fcount += 1
            fweight += weight[ci]
    return fcount, fweight


@_jit
def run_steps(atom_rel, atom_const, atom_ptr, atom_var, atom_coef,
              var_atom_ptr, var_atom,
              cl_ptr, cl_kind, cl_idx, cl_pos,
              atom_occ_ptr, atom_occ_cl, atom_occ_pos,
              bool_occ_ptr, bool_occ_cl, bool_occ_pos,
              lower, upper, pinned,
              assign, bvals, sums, nsat, weight,
              fals_list, fals_pos, fcount, fweight,
              tabu_until, scratch_delta, touched,
              step0, max_steps, seed, tenure, walk_milli):
    """Run up to max_steps; returns (status, steps_done, fcount, fweight)."""
    np.random.seed(seed)
    na = lower.shape[0]
    step = step0

    for it in range(max_steps):
        if fcount == 0:
            return SAT, it, fcount, fweight

        # pick a falsified clause, weighted random
        r = np.random.randint(0, fweight)
        acc = np.int64(0)
        ci = fals_list[0]
        for i in range(fcount):
            acc += weight[fals_list[i]]
            if r < acc:
                ci = fals_list[i]
                break

        # enumerate candidate moves from the chosen clause
        # candidate arrays sized by worst case: literals * terms + 2
        maxc = 2 * (cl_ptr[ci + 1] - cl_ptr[ci]) + 2
        for li in range(cl_ptr[ci], cl_ptr[ci + 1]):
            if cl_kind[li] == 1:
                ai = cl_idx[li]
                maxc += 2 * (atom_ptr[ai + 1] - atom_ptr[ai])
        cand_kind = np.empty(maxc, dtype=np.int8)
        cand_var = np.empty(maxc, dtype=np.int64)
        cand_val = np.empty(maxc, dtype=np.int64)
        cand_tabu = np.empty(maxc, dtype=np.int8)
        ncand = 0

        for li in range(cl_ptr[ci], cl_ptr[ci + 1]):
            kind = cl_kind[li]
            idx = cl_idx[li]
            pos = cl_pos[li] == 1
            if kind == 0:
                cand_kind[ncand] = 0
                cand_var[ncand] = idx
                cand_val[ncand] = 1 - bvals[idx]
                cand_tabu[ncand] = 1 if tabu_until[na + idx] > step else 0
                ncand += 1
                continue
            ai = idx
            rel = atom_rel[ai]
            k = atom_const[ai]
            s = sums[ai]
            for ti in range(atom_ptr[ai], atom_ptr[ai + 1]):
                x = atom_var[ti]
                if pinned[x] == 1:
                    continue
                c = atom_coef[ti]
                rest = s - c * assign[x]
                nvals = 0
                v0 = np.int64(0)
                v1 = np.int64(0)
                if rel == 0:
                    if pos:
                        if c > 0:
                            v0 = (k - rest) // c
                        else:
                            v0 = _ceil_div(k - rest, c)
                        nvals = 1
                    else:
                        if c > 0:
                            v0 = _ceil_div(k + 1 - rest, c)
                        else:
                            v0 = (k + 1 - rest) // c
                        nvals = 1
                else:
                    if pos:
                        num = k - rest
                        if num % c == 0:
                            v0 = num // c
                            nvals = 1
                    else:
                        v0 = assign[x] + 1
                        v1 = assign[x] - 1
                        nvals = 2
                for w in range(nvals):
                    val = v0 if w == 0 else v1
                    if val == assign[x]:
                        continue
                    if val < lower[x] or val > upper[x]:
                        continue
                    cand_kind[ncand] = 1
                    cand_var[ncand] = x
                    cand_val[ncand] = val
                    cand_tabu[ncand] = 1 if tabu_until[x] > step else 0
                    ncand += 1

        if ncand == 0:
            step += 1
            continue

        # score candidates (tabu ones only if nothing else exists)
        any_free = False
        for j in range(ncand):
            if cand_tabu[j] == 0:
                any_free = True
                break

        best_j = -1
        best_score = np.int64(-(2 ** 62))
        nties = 0
        for j in range(ncand):
            if any_free and cand_tabu[j] == 1:
                continue
            if cand_kind[j] == 0:
                sc = _score_bool(j, cand_var, cand_val,
                                 bool_occ_ptr, bool_occ_cl, bool_occ_pos,
                                 nsat, weight, scratch_delta, touched)
            else:
                sc = _score_arith(j, cand_var, cand_val, assign,
                                  atom_rel, atom_const, atom_ptr, atom_var, atom_coef,
                                  var_atom_ptr, var_atom,
                                  atom_occ_ptr, atom_occ_cl, atom_occ_pos,
                                  sums, nsat, weight, scratch_delta, touched)
            if sc > best_score:
                best_score = sc
                best_j = j
                nties = 1
            elif sc == best_score:
                nties += 1
                if np.random.randint(0, nties) == 0:
                    best_j = j

        j = best_j
        if best_score <= 0:
            # stagnation: bump weights of all falsified clauses, sometimes walk
            for i in range(fcount):
                weight[fals_list[i]] += 1
            fweight += fcount
            if np.random.randint(0, 1000) < walk_milli:
                j = np.random.randint(0, ncand)

        if cand_kind[j] == 0:
            fcount, fweight = _apply_bool(cand_var[j], cand_val[j],
                                          bool_occ_ptr, bool_occ_cl, bool_occ_pos,
                                          bvals, nsat, weight,
                                          fals_list, fals_pos, fcount, fweight)
            tabu_until[na + cand_var[j]] = step + tenure
        else:
            fcount, fweight = _apply_arith(cand_var[j], cand_val[j], assign,
                                           atom_rel, atom_const, atom_ptr, atom_var,
                                           atom_coef, var_atom_ptr, var_atom,
                                           atom_occ_ptr, atom_occ_cl, atom_occ_pos,
                                           sums, nsat, weight,
                                           fals_list, fals_pos, fcount, fweight)
            tabu_until[cand_var[j]] = step + tenure
        step += 1

    if fcount == 0:
        return SAT, max_steps, fcount, fweight
    return UNKNOWN, max_steps, fcount, fweight


@_jit
def _score_bool(j, cand_var, cand_val,
                bool_occ_ptr, bool_occ_cl, bool_occ_pos,
                nsat, weight, scratch_delta, touched):
    b = cand_var[j]
    new = cand_val[j] == 1
    ntouch = 0
    for oi in range(bool_occ_ptr[b], bool_occ_ptr[b + 1]):
        ci = bool_occ_cl[oi]
        lit_new = (bool_occ_pos[oi] == 1) == new
        if scratch_delta[ci] == 0:
            touched[ntouch] = ci
            ntouch += 1
        scratch_delta[ci] += 1 if lit_new else -1
    score = np.int64(0)
    for t in range(ntouch):
        ci = touched[t]
        was = nsat[ci] > 0
        now = nsat[ci] + scratch_delta[ci] > 0
        if was and not now:
            score -= weight[ci]
        elif now and not was:
            score += weight[ci]
        scratch_delta[ci] = 0
    return score


@_jit
def _score_arith(j, cand_var, cand_val, assign,
                 atom_rel, atom_const, atom_ptr, atom_var, atom_coef,
                 var_atom_ptr, var_atom,
                 atom_occ_ptr, atom_occ_cl, atom_occ_pos,
                 sums, nsat, weight, scratch_delta, touched):
    x = cand_var[j]
    delta = cand_val[j] - assign[x]
    ntouch = 0
    for vi in range(var_atom_ptr[x], var_atom_ptr[x + 1]):
        ai = var_atom[vi]
        c = np.int64(0)
        for ti in range(atom_ptr[ai], atom_ptr[ai + 1]):
            if atom_var[ti] == x:
                c = atom_coef[ti]
                break
        old_s = sums[ai]
        new_s = old_s + c * delta
        old_t = _atom_truth(atom_rel[ai], old_s, atom_const[ai])
        new_t = _atom_truth(atom_rel[ai], new_s, atom_const[ai])
        if old_t == new_t:
            continue
        for oi in range(atom_occ_ptr[ai], atom_occ_ptr[ai + 1]):
            ci = atom_occ_cl[oi]
            lit_old = (atom_occ_pos[oi] == 1) == old_t
            lit_new = (atom_occ_pos[oi] == 1) == new_t
            if lit_old == lit_new:
                continue
            if scratch_delta[ci] == 0:
                touched[ntouch] = ci
                ntouch += 1
            scratch_delta[ci] += 1 if lit_new else -1
    score = np.int64(0)
    for t in range(ntouch):
        ci = touched[t]
        was = nsat[ci] > 0
        now = nsat[ci] + scratch_delta[ci] > 0
        if was and not now:
            score -= weight[ci]
        elif now and not was:
            score += weight[ci]
        scratch_delta[ci] = 0
    return score


@_jit
def _fals_add(ci, fals_list, fals_pos, fcount, fweight, weight):
    fals_list[fcount] = ci
    fals_pos[ci] = fcount
    return fcount + 1, fweight + weight[ci]


@_jit
def _fals_remove(ci, fals_list, fals_pos, fcount, fweight, weight):
    p = fals_pos[ci]
    last = fals_list[fcount - 1]
    fals_list[p] = last
    fals_pos[last] = p
    fals_pos[ci] = -1
    return fcount - 1, fweight - weight[ci]


@_jit
def _apply_bool(b, val, bool_occ_ptr, bool_occ_cl, bool_occ_pos,
                bvals, nsat, weight, fals_list, fals_pos, fcount, fweight):
    new = val == 1
    bvals[b] = val
    for oi in range(bool_occ_ptr[b], bool_occ_ptr[b + 1]):
        ci = bool_occ_cl[oi]
        lit_new = (bool_occ_pos[oi] == 1) == new
        was = nsat[ci] > 0
        nsat[ci] += 1 if lit_new else -1
        now = nsat[ci] > 0
        if was and not now:
            fcount, fweight = _fals_add(ci, fals_list, fals_pos, fcount, fweight, weight)
        elif now and not was:
            fcount, fweight = _fals_remove(ci, fals_list, fals_pos, fcount, fweight, weight)
    return fcount, fweight


@_jit
def _apply_arith(x, val, assign,
                 atom_rel, atom_const, atom_ptr, atom_var, atom_coef,
                 var_atom_ptr, var_atom,
                 atom_occ_ptr, atom_occ_cl, atom_occ_pos,
                 sums, nsat, weight, fals_list, fals_pos, fcount, fweight):
    delta = val - assign[x]
    assign[x] = val
    for vi in range(var_atom_ptr[x], var_atom_ptr[x + 1]):
        ai = var_atom[vi]
        c = np.int64(0)
        for ti in range(atom_ptr[ai], atom_ptr[ai + 1]):
            if atom_var[ti] == x:
                c = atom_coef[ti]
                break
        old_s = sums[ai]
        new_s = old_s + c * delta
        sums[ai] = new_s
        old_t = _atom_truth(atom_rel[ai], old_s, atom_const[ai])
        new_t = _atom_truth(atom_rel[ai], new_s, atom_const[ai])
        if old_t == new_t:
            continue
        for oi in range(atom_occ_ptr[ai], atom_occ_ptr[ai + 1]):
            ci = atom_occ_cl[oi]
            lit_old = (atom_occ_pos[oi] == 1) == old_t
            lit_new = (atom_occ_pos[oi] == 1) == new_t
            if lit_old == lit_new:
                continue
            was = nsat[ci] > 0
            nsat[ci] += 1 if lit_new else -1
            now = nsat[ci] > 0
            if was and not now:
                fcount, fweight = _fals_add(ci, fals_list, fals_pos, fcount, fweight, weight)
            elif now and not was:
                fcount, fweight = _fals_remove(ci, fals_list, fals_pos, fcount, fweight, weight)
    return fcount, fweight
