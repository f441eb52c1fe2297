"""Exact rational DGBV algebras: cohomology, Maurer-Cartan solutions,
deformed products, Frobenius potentials, gauge calculus and morphisms."""

__version__ = "0.1.0"

from .algebra import GradedAlgebra, GradedBasis, LinearOperator, StructureError
from .structure import (CohomologyBasis, ConsistencyError, ContractError, DGBVStructure,
                        check_q_condition, cohomology_basis, decompose, q_condition,
                        validate_dgbv, validate_gbv)
from .series import ParamSpec, SuperSeries, bracket_series, series_multiply
from .fixtures import (acyclic, bv, ddbar, direct_sum, koszul, parse_fixture, pd4,
                       random_operator_pair, tensor_product, trivial)
from .mc import (MCSolution, check_deformed_q, deformed_product, extend_class, phi, phi_inverse,
                 shifted_gamma1, solve_mc_epsilon, solve_mc_one_param, solve_mc_universal,
                 verify_solution)
from .frobenius import (cubic_term_oracle, frobenius_report, gram, potential,
                        validate_integral)
from .gauge import (ShiftedDGLA, cbh, cbh_oracle, cbh_serre, check_phi_gauge_invariance,
                    conjugate_differential_check, conjugation_identity_check,
                    construct_gauge_equivalence, differential_conjugation_check, gauge_action)
from .morphisms import (DGBVMorphism, augmented_inclusion, check_functoriality,
                        identify_frobenius, induced_map, validate_morphism)
from .document import DocumentError, parse, serialize, structure_to_text
from .report import RunReport, emit_report
