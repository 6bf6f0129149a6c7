"""Deterministic SMT-LIB2 emission and response parsing.

Variables are emitted as v<id> (Int) and b<id> (Bool) with debug names in
comments.  Rational coefficients are cleared to integers per atom, clause
assertions carry :named tags for unsat-core extraction, and assumptions go
through check-sat-assuming.
"""
from __future__ import annotations

from typing import Iterable, Optional

from ..formula import Clause, LE, LinearAtom, Literal, VarRegistry


def _int_sexp(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


def _term_sexp(coef: int, vid: int) -> str:
    name = f"v{vid}"
    if coef == 1:
        return name
    return f"(* {_int_sexp(coef)} {name})"


def atom_sexp(atom: LinearAtom) -> str:
    terms, const = atom.scaled_int()
    parts = [_term_sexp(c, v) for c, v in terms]
    lhs = parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"
    op = "<=" if atom.rel == LE else "="
    return f"({op} {lhs} {_int_sexp(const)})"


def literal_sexp(lit: Literal) -> str:
    body = f"b{lit.var}" if lit.is_bool else atom_sexp(lit.atom)
    return body if lit.pos else f"(not {body})"


def clause_sexp(c: Clause) -> str:
    if len(c.literals) == 1:
        return literal_sexp(c.literals[0])
    return "(or " + " ".join(literal_sexp(l) for l in c.literals) + ")"


def emit_script(registry: VarRegistry, clauses: list[Clause],
                assumptions: Iterable[Literal] = (),
                want_core: bool = False) -> tuple[str, dict[str, str]]:
    """Emit a self-contained SMT-LIB2 script ending in a check command.

    Returns (script text, assertion-name -> clause origin map).  Variable
    bounds are asserted with "bounds:<name>" origins so cores can cite them.
    """
    arith_ids: set[int] = set()
    bool_ids: set[int] = set()
    for c in clauses:
        arith_ids.update(c.arith_vars())
        bool_ids.update(c.bool_vars())
    for lit in assumptions:
        bool_ids.add(lit.var)

    lines = ["(set-option :produce-models true)"]
    if want_core:
        lines.append("(set-option :produce-unsat-cores true)")
    lines.append("(set-logic QF_LIA)")
    for vid in sorted(arith_ids):
        lines.append(f"(declare-fun v{vid} () Int) ; {registry.name_of(vid)}")
    for vid in sorted(bool_ids):
        lines.append(f"(declare-fun b{vid} () Bool) ; {registry.name_of(vid)}")

    names: dict[str, str] = {}
    counter = 0

    def emit_assert(body: str, origin: str):
        nonlocal counter
        tag = f"a{counter}"
        counter += 1
        names[tag] = origin
        if want_core:
            lines.append(f"(assert (! {body} :named {tag}))")
        else:
            lines.append(f"(assert {body})")

    for vid in sorted(arith_ids):
        var = registry.arith[vid]
        if var.lower is not None:
            emit_assert(f"(<= {_int_sexp(var.lower)} v{vid})", f"bounds:{var.name}")
        if var.upper is not None:
            emit_assert(f"(<= v{vid} {_int_sexp(var.upper)})", f"bounds:{var.name}")
    for c in clauses:
        emit_assert(clause_sexp(c), c.origin)

    assumed = [literal_sexp(l) for l in assumptions]
    if assumed:
        lines.append("(check-sat-assuming (" + " ".join(assumed) + "))")
    else:
        lines.append("(check-sat)")
    return "\n".join(lines) + "\n", names


# ---------------------------------------------------------------------------
# S-expression parsing for solver responses

def tokenize(text: str):
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in "()":
            out.append(ch)
            i += 1
        elif ch.isspace():
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == "|":
            j = text.index("|", i + 1)
            out.append(text[i + 1:j])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_sexprs(text: str) -> list:
    """Parse a sequence of S-expressions into nested lists of strings."""
    tokens = tokenize(text)
    pos = 0

    def parse():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while tokens[pos] != ")":
                items.append(parse())
            pos += 1
            return items
        if tok == ")":
            raise ValueError("unbalanced ')' in solver response")
        return tok

    out = []
    while pos < len(tokens):
        out.append(parse())
    return out


def _eval_int(expr) -> int:
    if isinstance(expr, str):
        return int(expr)
    if expr and expr[0] == "-" and len(expr) == 2:
        return -_eval_int(expr[1])
    if expr and expr[0] == "+":
        return sum(_eval_int(e) for e in expr[1:])
    if expr and expr[0] == "*":
        out = 1
        for e in expr[1:]:
            out *= _eval_int(e)
        return out
    raise ValueError(f"cannot evaluate model value {expr!r}")


def parse_model(sexp) -> tuple[dict[int, int], dict[int, bool]]:
    """Extract v<id>/b<id> values from a (model ...) or bare define-fun list."""
    entries = sexp
    if entries and entries[0] == "model":
        entries = entries[1:]
    arith: dict[int, int] = {}
    bools: dict[int, bool] = {}
    for e in entries:
        if not isinstance(e, list) or not e or e[0] != "define-fun":
            continue
        name, _args, sort, value = e[1], e[2], e[3], e[4]
        if name.startswith("v") and sort == "Int":
            arith[int(name[1:])] = _eval_int(value)
        elif name.startswith("b") and sort == "Bool":
            bools[int(name[1:])] = (value == "true")
    return arith, bools


def parse_core(sexp, names: dict[str, str]) -> list[str]:
    seen: list[str] = []
    for tag in sexp:
        origin = names.get(tag, tag)
        if origin not in seen:
            seen.append(origin)
    return seen
