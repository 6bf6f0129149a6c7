from .compile import CompiledLayout, SpecError, compile_layout
from .model import LayoutSpec, Preference, UserConstraint, WidgetDef, validate_spec
from .specfile import SpecFileError, load_spec, parse_spec

__all__ = [
    "CompiledLayout", "SpecError", "compile_layout",
    "LayoutSpec", "Preference", "UserConstraint", "WidgetDef", "validate_spec",
    "SpecFileError", "load_spec", "parse_spec",
]
