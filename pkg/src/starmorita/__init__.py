"""Exact computations with star-algebras, pre-Hilbert modules and strong Morita equivalence.

Scalars live in Q(i) or Q(i)[l], ordered by the sign of the lowest
coefficient; every check is exact.
"""
from .ring import LAMBDA, Scalar, Sign, VariantMismatch, is_positive, parse_scalar
from .report import FAIL, PASS, UNKNOWN, Check, Report
from .algebra import (AlgebraElement, AlgebraPresentation, Functional, check_star_algebra, evaluation_functional,
                      full_matrix_algebra, function_algebra, is_positive_functional, matrix_algebra,
                      membership_aplus, membership_app, parse_element, scalars, trace_functional)
from .modules import (InnerProductModule, ModuleElement, ModuleOperator, Representation, are_unitarily_equivalent,
                      canonical_module, check_representation, find_isometry, inner_product, is_completely_positive,
                      is_nondegenerate)
from .gns import gns_construct
from .tensor import internal_tensor, phi_from_inner, inner_from_phi
from .morita import (Bimodule, K0Class, PicardArrow, check_equivalence_bimodule, column_bimodule, compose, forget,
                     identity_arrow, identity_bimodule, inverse, isotropy_action, k0h_action, picard_group,
                     rep_transfer)
from .deformation import (EquivalenceOperator, PolyObservable, StarProduct, apply_equivalence, check_star_axioms,
                          classical_limit, deform_functional, formal_positive, moyal_product)
from .workspace import Workspace, emit, load

__version__ = "0.1.0"
