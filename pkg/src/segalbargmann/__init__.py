"""Trace polynomials, heat operators and Segal-Bargmann transforms on classical matrix groups."""
from .free import free_moment, free_sb, nu, pi_tau
from .groups import GroupSpec, magic_closed_form, magic_sum, random_group_element
from .heat import MCConfig, MomentEstimate, estimate_l2, estimate_moment, sample_mu, sample_rho
from .linalg import NumericalOverflowError, expm
from .operators import DN, OperatorSpec, apply, assemble, boosted_sb, combination, exp_apply, heat_moment
from .tracepoly import (DegreeCapError, DiskError, Monomial, ParseError, TracePolynomial, TransformParams,
                        basis_monomials, parse_poly)
from .words import WordPolynomial, bform, build_generator, eval_word, iota, iota_star, l2_norm_sq

__version__ = "0.1.0"

__all__ = [
    "TracePolynomial", "Monomial", "TransformParams", "basis_monomials", "parse_poly",
    "DegreeCapError", "DiskError", "ParseError", "NumericalOverflowError",
    "OperatorSpec", "DN", "combination", "apply", "assemble", "exp_apply", "boosted_sb", "heat_moment",
    "nu", "pi_tau", "free_sb", "free_moment",
    "GroupSpec", "magic_sum", "magic_closed_form", "random_group_element",
    "WordPolynomial", "eval_word", "iota", "iota_star", "bform", "build_generator", "l2_norm_sq",
    "MCConfig", "MomentEstimate", "sample_rho", "sample_mu", "estimate_moment", "estimate_l2",
    "expm",
]
