"""Certification engine for tangential-secant join identifiability.

Exact fat-point interpolation ranks over F_p and Q, Terracini dimension
checks, node/contact-locus certificates for the associated hypersurfaces, and a
planted-decomposition recovery lab.
"""

__version__ = "0.1.0"

from .certifier import (
    DripReport,
    HypothesisError,
    certify_drip,
    certify_h1_quadruple,
    certify_h1_triples,
    certify_weak_3O,
)
from .domains import FLOAT, RATIONAL, Domain, prime_field
from .forms import DenseForm, Params, parameter_table, power_form, tangent_form
from .interp import Certificate, assemble, cohomology, generic_rank_certificate, rank
from .lab import RecoveryResult, canonicalize, fit, local_identifiability, parametrization_jacobian, plant
from .schemes import FatPoint, SchemeUnion, TwoThreePoint, conditions, random_scheme
from .tangent import duality_check, join_dimension_sigma, join_dimension_tau

__all__ = [
    "Certificate", "DenseForm", "Domain", "DripReport", "FLOAT", "FatPoint", "HypothesisError",
    "Params", "RATIONAL", "RecoveryResult", "SchemeUnion", "TwoThreePoint", "assemble",
    "canonicalize", "certify_drip", "certify_h1_quadruple", "certify_h1_triples", "certify_weak_3O",
    "cohomology", "conditions", "duality_check", "fit", "generic_rank_certificate", "join_dimension_sigma",
    "join_dimension_tau", "local_identifiability", "parameter_table", "parametrization_jacobian",
    "plant", "power_form", "prime_field", "random_scheme", "rank", "tangent_form",
]
