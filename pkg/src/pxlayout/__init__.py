"""Constraint-based GUI layout engine.

Widget trees compile to MaxSMT formulas over linear integer arithmetic with
Boolean visibility variables.  A development stage hardens soft preferences
into interval tables and extracts independent sub-layouts into a deployable
bundle; a runtime stage solves the bundle incrementally (warm-started local
search with a complete fallback) to produce pixel geometry for any width.
"""

__version__ = "0.1.0"
