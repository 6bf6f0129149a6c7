"""Linear constraint expressions in layout files.

Strings like "2*a.x + a.w == 2*b.x + b.w" or "screen.w >= 1200" parse via the
Python ast into linear atoms over widget property variables.  Properties are
w/width, h/height, x, y; coefficients may be integers, decimals, or ratios
like 1/3 (exact rationals throughout).
"""
from __future__ import annotations

import ast
from fractions import Fraction
from typing import Callable

from ..formula import EQ, LE, Literal, atom_lit, linear_atom


class ExprError(ValueError):
    pass


_PROPS = {"w": "w", "width": "w", "h": "h", "height": "h", "x": "x", "y": "y"}

# resolver: (widget id, prop letter) -> variable id
Resolver = Callable[[str, str], int]


class _Lin:
    def __init__(self, coeffs=None, const=Fraction(0)):
        self.coeffs: dict[int, Fraction] = coeffs or {}
        self.const = const

    def add(self, other: "_Lin", sign: int = 1) -> "_Lin":
        for v, c in other.coeffs.items():
            n = self.coeffs.get(v, Fraction(0)) + sign * c
            if n:
                self.coeffs[v] = n
            else:
                self.coeffs.pop(v, None)
        self.const += sign * other.const
        return self

    def scale(self, k: Fraction) -> "_Lin":
        self.coeffs = {v: c * k for v, c in self.coeffs.items()}
        self.const *= k
        return self


def _walk(node: ast.expr, resolve: Resolver, text: str) -> _Lin:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExprError(f"non-numeric constant in {text!r}")
        return _Lin(const=Fraction(str(node.value)))
    if isinstance(node, ast.Attribute):
        if not isinstance(node.value, ast.Name):
            raise ExprError(f"unsupported property access in {text!r}")
        prop = _PROPS.get(node.attr)
        if prop is None:
            raise ExprError(f"unknown property .{node.attr} in {text!r} "
                            "(use w/width, h/height, x, y)")
        return _Lin({resolve(node.value.id, prop): Fraction(1)})
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return _walk(node.operand, resolve, text).scale(Fraction(-1))
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Add):
            return _walk(node.left, resolve, text).add(_walk(node.right, resolve, text))
        if isinstance(node.op, ast.Sub):
            return _walk(node.left, resolve, text).add(_walk(node.right, resolve, text), -1)
        if isinstance(node.op, ast.Mult):
            left = _walk(node.left, resolve, text)
            right = _walk(node.right, resolve, text)
            if left.coeffs and right.coeffs:
                raise ExprError(f"nonlinear product in {text!r}")
            if left.coeffs:
                return left.scale(right.const)
            return right.scale(left.const)
        if isinstance(node.op, ast.Div):
            left = _walk(node.left, resolve, text)
            right = _walk(node.right, resolve, text)
            if right.coeffs or right.const == 0:
                raise ExprError(f"division by a variable or zero in {text!r}")
            return left.scale(Fraction(1) / right.const)
        raise ExprError(f"unsupported operator in {text!r}")
    if isinstance(node, ast.Name):
        raise ExprError(f"bare name {node.id!r} in {text!r}; write widget.prop")
    raise ExprError(f"unsupported syntax in {text!r}")


def parse_constraint(text: str, resolve: Resolver) -> Literal:
    """Parse one relational expression into a literal (strictness normalized)."""
    try:
        tree = ast.parse(text, mode="eval").body
    except SyntaxError as e:
        raise ExprError(f"cannot parse {text!r}: {e}") from e
    if not isinstance(tree, ast.Compare) or len(tree.ops) != 1:
        raise ExprError(f"expected a single comparison in {text!r}")
    lhs = _walk(tree.left, resolve, text)
    rhs = _walk(tree.comparators[0], resolve, text)
    diff = lhs.add(rhs, -1)  # diff OP 0
    if not diff.coeffs:
        raise ExprError(f"constraint {text!r} contains no variables")
    op = tree.ops[0]
    const = -diff.const
    terms = [(c, v) for v, c in diff.coeffs.items()]
    if isinstance(op, ast.Eq):
        return atom_lit(linear_atom(terms, EQ, const))
    if isinstance(op, ast.NotEq):
        return atom_lit(linear_atom(terms, EQ, const), pos=False)
    if isinstance(op, ast.LtE):
        return atom_lit(linear_atom(terms, LE, const))
    if isinstance(op, ast.GtE):
        return atom_lit(linear_atom([(-c, v) for c, v in terms], LE, -const))
    if isinstance(op, ast.Lt):
        # strict over integer pixels: a < b  ==>  a <= b - 1, scaled to integers
        atom = linear_atom(terms, LE, const)
        sterms, sconst = atom.scaled_int()
        return atom_lit(linear_atom([(Fraction(c), v) for c, v in sterms], LE, sconst - 1))
    if isinstance(op, ast.Gt):
        atom = linear_atom([(-c, v) for c, v in terms], LE, -const)
        sterms, sconst = atom.scaled_int()
        return atom_lit(linear_atom([(Fraction(c), v) for c, v in sterms], LE, sconst - 1))
    raise ExprError(f"unsupported comparison in {text!r}")


def referenced_widgets(text: str) -> set[str]:
    """Widget ids a constraint expression mentions (for visibility guards)."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as e:
        raise ExprError(f"cannot parse {text!r}: {e}") from e
    out = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Attribute) and isinstance(node.value, ast.Name):
            out.add(node.value.id)
    return out
