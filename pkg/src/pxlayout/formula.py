"""Core representation of (Max)SMT formulas over linear integer arithmetic.

Variables are integers (pixels) plus Booleans (visibility and preference
switches).  Atoms are linear (in)equalities with exact rational coefficients;
clauses are disjunctions of literals; a formula is a conjunction of hard
clauses plus weighted soft Boolean literals.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Union


class FormulaError(Exception):
    pass


class EvalError(FormulaError):
    """A model left a referenced variable unassigned."""


class ConflictError(FormulaError):
    """Boolean simplification derived an empty hard clause."""

    def __init__(self, origin: str, message: str = ""):
        self.origin = origin
        super().__init__(message or f"conflict in hard clause from {origin!r}")


# Relations carried by atoms.  Strict inequalities are normalized away at
# construction time (a < b becomes a <= b - 1 over the integer domain).
LE = "<="
EQ = "="

# Axis / kind metadata used by independence analysis and slice translation.
AXIS_X = "x"  # widths and x coordinates
AXIS_Y = "y"  # heights and y coordinates
AXIS_NONE = "n"
KIND_POS = "pos"    # shifts when a sub-layout is translated
KIND_SIZE = "size"  # invariant under translation


@dataclass(frozen=True)
class ArithVar:
    id: int
    name: str
    lower: Optional[int] = 0
    upper: Optional[int] = None
    axis: str = AXIS_NONE
    kind: str = KIND_SIZE

    def __post_init__(self):
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise FormulaError(f"variable {self.name}: lower {self.lower} > upper {self.upper}")


@dataclass(frozen=True)
class BoolVar:
    id: int
    name: str


@dataclass(frozen=True)
class LinearAtom:
    """sum(coeff * var) REL const with exact rational coefficients."""

    terms: tuple[tuple[Fraction, int], ...]  # sorted by var id, coeffs nonzero
    rel: str
    const: Fraction

    def vars(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.terms)

    def scaled_int(self) -> tuple[tuple[tuple[int, int], ...], int]:
        """Clear denominators: returns integer (coeff, var) terms and constant.

        Scaling by a positive rational preserves the atom, so this is the
        canonical integer form used by solvers and emitters.
        """
        denoms = [c.denominator for c, _ in self.terms] + [self.const.denominator]
        scale = 1
        for d in denoms:
            scale = scale * d // _gcd(scale, d)
        terms = tuple((int(c * scale), v) for c, v in self.terms)
        return terms, int(self.const * scale)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def linear_atom(terms: Iterable[tuple[Fraction, int]], rel: str, const) -> LinearAtom:
    """Normalize and build an atom; empty or all-zero term lists are rejected."""
    if rel not in (LE, EQ):
        raise FormulaError(f"unsupported relation {rel!r}")
    acc: dict[int, Fraction] = {}
    for c, v in terms:
        c = Fraction(c)
        if c:
            acc[v] = acc.get(v, Fraction(0)) + c
    items = tuple(sorted(((c, v) for v, c in acc.items() if c), key=lambda t: t[1]))
    if not items:
        raise FormulaError("atom with no variables")
    return LinearAtom(items, rel, Fraction(const))


@dataclass(frozen=True)
class Literal:
    """Either a Boolean variable or a linear atom, with a polarity."""

    var: Optional[int] = None
    atom: Optional[LinearAtom] = None
    pos: bool = True

    def __post_init__(self):
        if (self.var is None) == (self.atom is None):
            raise FormulaError("literal must carry exactly one payload")

    @property
    def is_bool(self) -> bool:
        return self.var is not None

    def negate(self) -> "Literal":
        return replace(self, pos=not self.pos)


def bool_lit(var: Union[int, BoolVar], pos: bool = True) -> Literal:
    vid = var.id if isinstance(var, BoolVar) else var
    return Literal(var=vid, pos=pos)


def atom_lit(atom: LinearAtom, pos: bool = True) -> Literal:
    return Literal(atom=atom, pos=pos)


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...]
    origin: str

    def __post_init__(self):
        if not self.literals:
            raise FormulaError(f"empty clause from {self.origin!r}")

    @property
    def is_unit(self) -> bool:
        return len(self.literals) == 1

    def arith_vars(self) -> set[int]:
        out: set[int] = set()
        for lit in self.literals:
            if lit.atom is not None:
                out.update(lit.atom.vars())
        return out

    def bool_vars(self) -> set[int]:
        return {lit.var for lit in self.literals if lit.var is not None}


@dataclass(frozen=True)
class SoftLit:
    lit: Literal  # always a Boolean literal
    weight: int

    def __post_init__(self):
        if not self.lit.is_bool:
            raise FormulaError("soft constraints must be Boolean literals")
        if self.weight < 1:
            raise FormulaError("soft weight must be >= 1")


class VarRegistry:
    """Shared id space for arithmetic and Boolean variables.

    Derived formulas (residuals, slices, hardened forms) share the registry so
    models transfer between them without renaming.
    """

    def __init__(self):
        self.arith: dict[int, ArithVar] = {}
        self.bools: dict[int, BoolVar] = {}
        self._next = 0

    def new_arith(self, name: str, lower: Optional[int] = 0, upper: Optional[int] = None,
                  axis: str = AXIS_NONE, kind: str = KIND_SIZE) -> ArithVar:
        v = ArithVar(self._next, name, lower, upper, axis, kind)
        self.arith[v.id] = v
        self._next += 1
        return v

    def new_bool(self, name: str) -> BoolVar:
        b = BoolVar(self._next, name)
        self.bools[b.id] = b
        self._next += 1
        return b

    def name_of(self, vid: int) -> str:
        if vid in self.arith:
            return self.arith[vid].name
        if vid in self.bools:
            return self.bools[vid].name
        return f"?{vid}"

    def rebound(self, vid: int, lower: Optional[int], upper: Optional[int]) -> ArithVar:
        v = replace(self.arith[vid], lower=lower, upper=upper)
        self.arith[vid] = v
        return v


@dataclass
class Model:
    arith: dict[int, int] = field(default_factory=dict)
    bools: dict[int, bool] = field(default_factory=dict)

    def copy(self) -> "Model":
        return Model(dict(self.arith), dict(self.bools))


class MaxSmtFormula:
    """Hard clauses plus weighted soft Boolean literals over a registry."""

    def __init__(self, registry: Optional[VarRegistry] = None):
        self.registry = registry or VarRegistry()
        self.hard: list[Clause] = []
        self.soft: list[SoftLit] = []

    # -- construction -----------------------------------------------------
    def add_hard(self, literals: Iterable[Literal], origin: str) -> Clause:
        c = Clause(tuple(literals), origin)
        self.hard.append(c)
        return c

    def add_unit(self, lit: Literal, origin: str) -> Clause:
        return self.add_hard([lit], origin)

    def add_soft(self, lit: Literal, weight: int) -> SoftLit:
        s = SoftLit(lit, weight)
        self.soft.append(s)
        return s

    def derive(self, hard: Iterable[Clause], soft: Iterable[SoftLit] = ()) -> "MaxSmtFormula":
        f = MaxSmtFormula(self.registry)
        f.hard = list(hard)
        f.soft = list(soft)
        return f

    # -- introspection ----------------------------------------------------
    def used_vars(self) -> tuple[list[int], list[int]]:
        """(arith ids, bool ids) referenced by clauses or softs, ascending."""
        a: set[int] = set()
        b: set[int] = set()
        for c in self.hard:
            a.update(c.arith_vars())
            b.update(c.bool_vars())
        for s in self.soft:
            b.add(s.lit.var)
        return sorted(a), sorted(b)

    def validate(self) -> list[str]:
        """Registration / weight invariants; returns diagnostics, never raises."""
        out = []
        reg_a, reg_b = set(self.registry.arith), set(self.registry.bools)
        a, b = self.used_vars()
        for vid in a:
            if vid not in reg_a:
                out.append(f"unregistered arithmetic variable id {vid}")
        for vid in b:
            if vid not in reg_b:
                out.append(f"unregistered Boolean variable id {vid}")
        for s in self.soft:
            if s.weight < 1:
                out.append(f"soft weight {s.weight} < 1 on {self.registry.name_of(s.lit.var)}")
        return out

    def stats(self) -> dict:
        a, b = self.used_vars()
        units = sum(1 for c in self.hard if c.is_unit)
        ue = len(collect_unit_equations(self))
        return {
            "arith_vars": len(a),
            "bool_vars": len(b),
            "hard_clauses": len(self.hard),
            "non_unit_clauses": len(self.hard) - units,
            "unit_equations": ue,
            "soft": len(self.soft),
        }


# ---------------------------------------------------------------------------
# Evaluation (exact rational arithmetic against integer assignments)

def eval_atom(atom: LinearAtom, arith: dict[int, int]) -> bool:
    total = Fraction(0)
    for c, v in atom.terms:
        if v not in arith:
            raise EvalError(f"unassigned variable id {v}")
        total += c * arith[v]
    if atom.rel == LE:
        return total <= atom.const
    return total == atom.const


def eval_literal(lit: Literal, m: Model) -> bool:
    if lit.is_bool:
        if lit.var not in m.bools:
            raise EvalError(f"unassigned Boolean id {lit.var}")
        val = m.bools[lit.var]
    else:
        val = eval_atom(lit.atom, m.arith)
    return val if lit.pos else not val


def eval_clause(c: Clause, m: Model) -> bool:
    return any(eval_literal(lit, m) for lit in c.literals)


def violated_clauses(f: MaxSmtFormula, m: Model) -> list[Clause]:
    return [c for c in f.hard if not eval_clause(c, m)]


def model_weight(f: MaxSmtFormula, m: Model) -> int:
    return sum(s.weight for s in f.soft if eval_literal(s.lit, m))


def check_bounds(f: MaxSmtFormula, m: Model) -> list[str]:
    out = []
    for vid, val in m.arith.items():
        v = f.registry.arith.get(vid)
        if v is None:
            continue
        if v.lower is not None and val < v.lower:
            out.append(f"{v.name}={val} below lower bound {v.lower}")
        if v.upper is not None and val > v.upper:
            out.append(f"{v.name}={val} above upper bound {v.upper}")
    return out


# ---------------------------------------------------------------------------
# Boolean automated reasoning: unit propagation + pure literal elimination.

def boolean_simplify(f: MaxSmtFormula, fixed: Optional[dict[int, bool]] = None
                     ) -> tuple[MaxSmtFormula, dict[int, bool]]:
    """Simplify the Boolean skeleton under a partial Boolean assignment.

    Unit propagation and pure literal elimination run to fixpoint over
    Boolean literals.  Satisfied clauses are removed, falsified Boolean
    literals are deleted, and arithmetic atoms are never touched.  Returns
    the residual formula plus the full assignment (input and inferred).

    Pure literal elimination never picks soft variables: their polarity is
    an optimization concern, not an entailment.
    """
    assigned: dict[int, bool] = dict(fixed or {})
    for vid in assigned:
        if vid not in f.registry.bools:
            raise FormulaError(f"fixed assignment names unregistered Boolean id {vid}")
    soft_ids = {s.lit.var for s in f.soft}
    alive: list[Optional[list[Literal]]] = [list(c.literals) for c in f.hard]
    origins = [c.origin for c in f.hard]

    def sweep_units() -> bool:
        changed = False
        progress = True
        while progress:
            progress = False
            for i, lits in enumerate(alive):
                if lits is None:
                    continue
                kept: list[Literal] = []
                satisfied = False
                for lit in lits:
                    if lit.is_bool and lit.var in assigned:
                        if assigned[lit.var] == lit.pos:
                            satisfied = True
                            break
                    else:
                        kept.append(lit)
                if satisfied:
                    alive[i] = None
                    changed = progress = True
                    continue
                if not kept:
                    raise ConflictError(origins[i])
                if len(kept) == 1 and kept[0].is_bool:
                    assigned[kept[0].var] = kept[0].pos
                    alive[i] = None
                    changed = progress = True
                    continue
                if len(kept) != len(lits):
                    alive[i] = kept
                    changed = progress = True
        return changed

    while True:
        sweep_units()
        # pure literal pass
        pos_seen: set[int] = set()
        neg_seen: set[int] = set()
        for lits in alive:
            if lits is None:
                continue
            for lit in lits:
                if lit.is_bool and lit.var not in assigned:
                    (pos_seen if lit.pos else neg_seen).add(lit.var)
        pure = {}
        for vid in sorted(pos_seen | neg_seen):
            if vid in soft_ids:
                continue
            if vid in pos_seen and vid not in neg_seen:
                pure[vid] = True
            elif vid in neg_seen and vid not in pos_seen:
                pure[vid] = False
        if not pure:
            break
        assigned.update(pure)

    residual_hard = [Clause(tuple(lits), origins[i])
                     for i, lits in enumerate(alive) if lits is not None]
    residual_soft = [s for s in f.soft if s.lit.var not in assigned]
    return f.derive(residual_hard, residual_soft), assigned


def collect_unit_equations(f: MaxSmtFormula) -> list[LinearAtom]:
    """Equality atoms appearing positively in unit clauses."""
    out = []
    for c in f.hard:
        if c.is_unit:
            lit = c.literals[0]
            if lit.atom is not None and lit.pos and lit.atom.rel == EQ:
                out.append(lit.atom)
    return out


# ---------------------------------------------------------------------------
# Canonical textual dump (golden tests, bundle payloads)

def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def dump_atom(atom: LinearAtom) -> str:
    parts = " + ".join(f"{_frac_str(c)}*v{v}" for c, v in atom.terms)
    return f"({parts} {atom.rel} {_frac_str(atom.const)})"


def dump_literal(lit: Literal) -> str:
    body = f"b{lit.var}" if lit.is_bool else dump_atom(lit.atom)
    return body if lit.pos else f"!{body}"


def dump_clause(c: Clause) -> str:
    return " | ".join(dump_literal(lit) for lit in c.literals)


def canonical_dump(f: MaxSmtFormula) -> str:
    """Deterministic text form: variables by id, clauses in declaration order."""
    a, b = f.used_vars()
    lines = ["format: pxlayout-formula v1", "vars:"]
    for vid in a:
        v = f.registry.arith[vid]
        lo = "-inf" if v.lower is None else str(v.lower)
        hi = "+inf" if v.upper is None else str(v.upper)
        lines.append(f"  int v{vid} {v.name} [{lo},{hi}] axis={v.axis} kind={v.kind}")
    for vid in b:
        lines.append(f"  bool b{vid} {f.registry.bools[vid].name}")
    lines.append("hard:")
    for c in f.hard:
        lines.append(f"  {dump_clause(c)}  ; {c.origin}")
    lines.append("soft:")
    for s in f.soft:
        lines.append(f"  {dump_literal(s.lit)} weight={s.weight}")
    return "\n".join(lines) + "\n"
