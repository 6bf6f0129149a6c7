"""Reference SMT-LIB2 solver process (console script: pxlayout-smt2).

A small complete solver for the clausal QF_LIA fragment this engine emits:
assertions are literals or disjunctions of literals over Int/Bool constants.
Search is goal-directed DPLL over clause literals with interval pruning;
leaf conjunctions are decided exactly by the shared LIA pipeline.  Supports
check-sat, check-sat-assuming, get-model, and get-unsat-core over stdio, so
it can stand in wherever a real SMT-LIB2 executable (z3, cvc5) would be
configured.
"""
from __future__ import annotations

import sys
from fractions import Fraction
from math import ceil, floor
from typing import Optional

from . import lia
from .formula import EQ, LE, LinearAtom, linear_atom
from .backends.smtlib import parse_sexprs, tokenize

Lit = tuple[str, object, bool]  # ("b", bool idx, pos) | ("a", LinearAtom, pos)


class SmtError(Exception):
    pass


class _LinExpr:
    def __init__(self, coeffs=None, const=Fraction(0)):
        self.coeffs: dict[int, Fraction] = coeffs or {}
        self.const = const

    def add(self, other, sign=1):
        for v, c in other.coeffs.items():
            self.coeffs[v] = self.coeffs.get(v, Fraction(0)) + sign * c
        self.const += sign * other.const
        return self

    def scale(self, k: Fraction):
        self.coeffs = {v: c * k for v, c in self.coeffs.items()}
        self.const *= k
        return self


class Engine:
    def __init__(self):
        self.int_names: list[str] = []
        self.bool_names: list[str] = []
        self.vars: dict[str, tuple[str, int]] = {}
        self.asserts: list[tuple[Optional[str], list[list[Lit]]]] = []
        self.last_status: Optional[str] = None
        self.last_model = None
        self.last_assumptions: list[Lit] = []

    # -- declarations and assertions ------------------------------------
    def declare(self, name: str, sort: str):
        if name in self.vars:
            raise SmtError(f"duplicate declaration {name}")
        if sort == "Int":
            self.vars[name] = ("int", len(self.int_names))
            self.int_names.append(name)
        elif sort == "Bool":
            self.vars[name] = ("bool", len(self.bool_names))
            self.bool_names.append(name)
        else:
            raise SmtError(f"unsupported sort {sort}")

    def add_assert(self, expr):
        name = None
        if isinstance(expr, list) and expr and expr[0] == "!":
            body = expr[1]
            for i in range(2, len(expr) - 1):
                if expr[i] == ":named":
                    name = expr[i + 1]
            expr = body
        self.asserts.append((name, self._clausify(expr)))

    def _clausify(self, expr) -> list[list[Lit]]:
        if isinstance(expr, list) and expr and expr[0] == "and":
            out = []
            for sub in expr[1:]:
                out.extend(self._clausify(sub))
            return out
        if isinstance(expr, list) and expr and expr[0] == "or":
            return [[self._literal(sub) for sub in expr[1:]]]
        return [[self._literal(expr)]]

    def _literal(self, expr) -> Lit:
        pos = True
        while isinstance(expr, list) and expr and expr[0] == "not":
            pos = not pos
            expr = expr[1]
        if isinstance(expr, str):
            if expr in ("true", "false"):
                return ("c", expr == "true", pos)
            kind, idx = self.vars[expr]
            if kind != "bool":
                raise SmtError(f"{expr} used as Boolean")
            return ("b", idx, pos)
        op = expr[0]
        if op not in ("<=", "<", ">=", ">", "="):
            raise SmtError(f"unsupported operator {op}")
        lhs = self._linexpr(expr[1])
        rhs = self._linexpr(expr[2])
        diff = lhs.add(rhs, -1)  # diff REL 0
        if op in (">=", ">"):
            diff.scale(Fraction(-1))
            op = "<=" if op == ">=" else "<"
        const = -diff.const
        if not diff.coeffs:
            truth = {"<=": Fraction(0) <= const, "<": Fraction(0) < const,
                     "=": const == 0}[op]
            # constant literal: encode as a trivially true/false atom over a
            # dummy always-zero comparison on the first declared int
            return ("c", truth, pos)
        if op == "<":
            # strict over integers: scale to integers then tighten by 1
            atom = linear_atom(list((c, v) for v, c in diff.coeffs.items()), LE, const)
            terms, k = atom.scaled_int()
            atom = linear_atom([(Fraction(c), v) for c, v in terms], LE, k - 1)
            return ("a", atom, pos)
        rel = LE if op == "<=" else EQ
        atom = linear_atom(list((c, v) for v, c in diff.coeffs.items()), rel, const)
        return ("a", atom, pos)

    def _linexpr(self, expr) -> _LinExpr:
        if isinstance(expr, str):
            if expr.lstrip("-").isdigit():
                return _LinExpr(const=Fraction(int(expr)))
            kind, idx = self.vars[expr]
            if kind != "int":
                raise SmtError(f"{expr} used as Int")
            return _LinExpr({idx: Fraction(1)})
        op = expr[0]
        if op == "+":
            out = _LinExpr()
            for sub in expr[1:]:
                out.add(self._linexpr(sub))
            return out
        if op == "-":
            if len(expr) == 2:
                return self._linexpr(expr[1]).scale(Fraction(-1))
            out = self._linexpr(expr[1])
            for sub in expr[2:]:
                out.add(self._linexpr(sub), -1)
            return out
        if op == "*":
            out = _LinExpr(const=Fraction(1))
            acc = Fraction(1)
            var_part: Optional[_LinExpr] = None
            for sub in expr[1:]:
                e = self._linexpr(sub)
                if e.coeffs:
                    if var_part is not None:
                        raise SmtError("nonlinear product")
                    var_part = e
                else:
                    acc *= e.const
            if var_part is None:
                return _LinExpr(const=acc)
            return var_part.scale(acc)
        if op == "div":
            raise SmtError("integer division not supported")
        raise SmtError(f"unsupported arithmetic operator {op}")

    # -- solving ----------------------------------------------------------
    def _active_clauses(self, names: Optional[set] = None) -> list[list[Lit]]:
        out = []
        for name, clauses in self.asserts:
            if names is not None and name is not None and name not in names:
                continue
            out.extend(clauses)
        return out

    def check(self, assumptions: list[Lit]) -> str:
        clauses = self._active_clauses()
        clauses = [[lit] for lit in assumptions] + clauses
        try:
            result = _dpll(clauses)
        except lia.LiaLimitError:
            self.last_status = "unknown"
            return "unknown"
        if result is None:
            self.last_status = "unsat"
            self.last_model = None
        else:
            self.last_status = "sat"
            self.last_model = result
        self.last_assumptions = assumptions
        return self.last_status

    def unsat_core(self, budget: int = 200) -> list[str]:
        if self.last_status != "unsat":
            raise SmtError("no unsat result to extract a core from")
        names = [n for n, _ in self.asserts if n is not None]
        ordered = list(dict.fromkeys(names))
        core = list(ordered)

        def unsat_with(keep: set) -> bool:
            clauses = [[lit] for lit in self.last_assumptions]
            clauses += self._active_clauses(keep)
            try:
                return _dpll(clauses) is None
            except lia.LiaLimitError:
                return False

        solves = 0
        i = 0
        while i < len(core) and solves < budget:
            trial = core[:i] + core[i + 1:]
            solves += 1
            if trial and unsat_with(set(trial)):
                core = trial
            else:
                i += 1
        return core

    def model_text(self) -> str:
        if self.last_model is None:
            raise SmtError("no model available")
        bass, aass = self.last_model
        lines = ["(model"]
        for name in self.int_names:
            _, idx = self.vars[name]
            val = aass.get(idx, 0)
            sval = str(val) if val >= 0 else f"(- {-val})"
            lines.append(f"  (define-fun {name} () Int {sval})")
        for name in self.bool_names:
            _, idx = self.vars[name]
            val = "true" if bass.get(idx, False) else "false"
            lines.append(f"  (define-fun {name} () Bool {val})")
        lines.append(")")
        return "\n".join(lines)


def _atom_interval_update(atom: LinearAtom, pos: bool,
                          iv: dict[int, tuple]) -> bool:
    """Tighten single-variable intervals; False on emptiness."""
    terms, const = atom.scaled_int()
    if len(terms) == 1:
        c, v = terms[0]
        lo, hi = iv.get(v, (None, None))
        if atom.rel == LE and pos:
            b = floor(Fraction(const, c))
            if c > 0:
                hi = b if hi is None else min(hi, b)
            else:
                b = ceil(Fraction(const, c))
                lo = b if lo is None else max(lo, b)
        elif atom.rel == LE:
            if c > 0:
                b = ceil(Fraction(const + 1, c))
                lo = b if lo is None else max(lo, b)
            else:
                b = floor(Fraction(const + 1, c))
                hi = b if hi is None else min(hi, b)
        elif atom.rel == EQ and pos:
            if const % c:
                return False
            val = const // c
            lo = val if lo is None else max(lo, val)
            hi = val if hi is None else min(hi, val)
        else:
            iv[v] = (lo, hi)
            return True
        if lo is not None and hi is not None and lo > hi:
            return False
        iv[v] = (lo, hi)
        return True
    # multi-variable: cheap range filter
    lo_sum, hi_sum = 0, 0
    for c, v in terms:
        vlo, vhi = iv.get(v, (None, None))
        if c > 0:
            lo_sum = None if (lo_sum is None or vlo is None) else lo_sum + c * vlo
            hi_sum = None if (hi_sum is None or vhi is None) else hi_sum + c * vhi
        else:
            lo_sum = None if (lo_sum is None or vhi is None) else lo_sum + c * vhi
            hi_sum = None if (hi_sum is None or vlo is None) else hi_sum + c * vlo
    if atom.rel == LE and pos and lo_sum is not None and lo_sum > const:
        return False
    if atom.rel == EQ and pos:
        if lo_sum is not None and lo_sum > const:
            return False
        if hi_sum is not None and hi_sum < const:
            return False
    return True


def _dpll(clauses: list[list[Lit]]):
    """Returns (bool assignment, int assignment) or None."""

    def lit_state(lit: Lit, bass, achoice) -> Optional[bool]:
        kind, payload, pos = lit
        if kind == "c":
            return payload == pos
        if kind == "b":
            val = bass.get(payload)
            return None if val is None else val == pos
        val = achoice.get(payload)
        return None if val is None else val == pos

    def propagate(bass, achoice, iv) -> Optional[str]:
        progress = True
        while progress:
            progress = False
            for cl in clauses:
                undecided = []
                satisfied = False
                for lit in cl:
                    st = lit_state(lit, bass, achoice)
                    if st is True:
                        satisfied = True
                        break
                    if st is None:
                        undecided.append(lit)
                if satisfied:
                    continue
                if not undecided:
                    return "conflict"
                if len(undecided) == 1:
                    if not assume(undecided[0], bass, achoice, iv):
                        return "conflict"
                    progress = True
        return None

    def assume(lit: Lit, bass, achoice, iv) -> bool:
        kind, payload, pos = lit
        if kind == "c":
            return payload == pos
        if kind == "b":
            bass[payload] = pos
            return True
        achoice[payload] = pos
        return _atom_interval_update(payload, pos, iv)

    def search(bass, achoice, iv):
        if propagate(bass, achoice, iv) == "conflict":
            return None
        branch_clause = None
        for cl in clauses:
            undecided = []
            satisfied = False
            for lit in cl:
                st = lit_state(lit, bass, achoice)
                if st is True:
                    satisfied = True
                    break
                if st is None:
                    undecided.append(lit)
            if satisfied:
                continue
            branch_clause = undecided
            break
        if branch_clause is None:
            conj = [(atom, pos) for atom, pos in achoice.items()]
            status, assignment = lia.conj_feasible(conj, dict(iv), want_model=True)
            if status != "sat":
                return None
            full = dict(assignment or {})
            for v, (lo, hi) in iv.items():
                if v not in full:
                    full[v] = lo if (lo is not None and lo > 0) else \
                        (hi if (hi is not None and hi < 0) else 0)
            return dict(bass), full
        for lit in branch_clause:
            b2, a2, i2 = dict(bass), dict(achoice), dict(iv)
            if not assume(lit, b2, a2, i2):
                continue
            result = search(b2, a2, i2)
            if result is not None:
                return result
        return None

    return search({}, {}, {})


# ---------------------------------------------------------------------------
# stdio command loop

def _iter_commands(stream):
    """Yield complete top-level S-expressions from a text stream."""
    buf = []
    depth = 0
    in_comment = False
    while True:
        ch = stream.read(1)
        if not ch:
            return
        if in_comment:
            if ch == "\n":
                in_comment = False
            continue
        if ch == ";":
            in_comment = True
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        buf.append(ch)
        if depth == 0 and ch == ")":
            text = "".join(buf).strip()
            buf = []
            if text:
                yield text


def main(argv=None) -> int:
    engine = Engine()
    out = sys.stdout
    for text in _iter_commands(sys.stdin):
        try:
            cmd = parse_sexprs(text)[0]
        except Exception:
            print('(error "parse error")', file=out, flush=True)
            continue
        if not isinstance(cmd, list) or not cmd:
            continue
        head = cmd[0]
        try:
            if head in ("set-option", "set-logic", "set-info"):
                pass
            elif head == "declare-fun":
                engine.declare(cmd[1], cmd[3])
            elif head == "declare-const":
                engine.declare(cmd[1], cmd[2])
            elif head == "assert":
                engine.add_assert(cmd[1])
            elif head == "check-sat":
                print(engine.check([]), file=out, flush=True)
            elif head == "check-sat-assuming":
                lits = [engine._literal(e) for e in cmd[1]]
                print(engine.check(lits), file=out, flush=True)
            elif head == "get-model":
                print(engine.model_text(), file=out, flush=True)
            elif head == "get-unsat-core":
                print("(" + " ".join(engine.unsat_core()) + ")", file=out, flush=True)
            elif head == "exit":
                return 0
            elif head in ("push", "pop", "reset"):
                print('(error "incremental commands not supported")', file=out, flush=True)
            else:
                print(f'(error "unsupported command {head}")', file=out, flush=True)
        except SmtError as e:
            print(f'(error "{e}")', file=out, flush=True)
        except Exception as e:  # keep serving; report the failure
            print(f'(error "internal: {type(e).__name__}: {e}")', file=out, flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
