"""Unification and projectivity in finitely generated Fregean varieties."""
from .errors import (CapExceeded, ConditionThreeFailed, InvalidContext, NoDesignatedTerm,
                     NotUnifiable, PreconditionFailed)
from .variety import VarietyContext, builtin_context, load_context

__version__ = "0.1.0"

__all__ = ["CapExceeded", "ConditionThreeFailed", "InvalidContext", "NoDesignatedTerm",
           "NotUnifiable", "PreconditionFailed", "VarietyContext", "builtin_context",
           "load_context", "__version__"]
