"""Mechanics on q-cosymplectic manifolds: structures, derived vector fields,
Poisson brackets, symplectization and the fast-slow oscillator application."""

from .geometry import (Chart, FDConfig, OneFormField, QCosymplecticStructure, ReebInvarianceViolated,
                       ScalarField, SingularMusicalMatrix, TwoFormField, ValidationReport, VectorField,
                       check_automorphism, deform_structure, evolution_field, gradient_field,
                       hamiltonian_field, is_local_gradient, lie_bracket, musical_matrix, poisson_bracket,
                       reeb_fields, sample_points, standard_structure, validate_structure)
from .flow import IntegratorConfig, NonFiniteState, StepSizeUnderflow, Trajectory, convergence_order, integrate
from .symplectization import SymplecticStructure, check_poisson_morphism, extended_reeb_check, symplectize

__version__ = "0.1.0"
