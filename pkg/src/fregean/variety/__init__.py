"""Varieties generated by finitely many finite algebras."""
from .builtins import BUILTINS, builtin_context, load_context
from .checks import (MAJORITY, MALCEV, PIXLEY, check_chi_identity, search_term_conditions, check_variety_identities,
                     find_malcev_element, find_term_condition, free_algebra,
                     fregean_diagnostics, identity_witness, si_members_check, terms_equal,
                     two_element_members, validate_equivalence_term,
                     validate_subtractive_term)
from .context import DEFAULT_CAPS, VarietyContext
from .free import Closure, FreeAlgebra
from .spectrum import ExplicitSIView, SIView, SpectrumMember, si_spectrum

__all__ = [
    "BUILTINS", "builtin_context", "load_context", "MAJORITY", "MALCEV", "PIXLEY",
    "check_chi_identity", "check_variety_identities", "find_malcev_element",
    "find_term_condition", "search_term_conditions", "free_algebra", "fregean_diagnostics", "identity_witness",
    "si_members_check", "terms_equal", "two_element_members", "validate_equivalence_term",
    "validate_subtractive_term", "DEFAULT_CAPS", "VarietyContext", "Closure", "FreeAlgebra",
    "ExplicitSIView", "SIView", "SpectrumMember", "si_spectrum",
]
