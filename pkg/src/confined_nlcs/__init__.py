"""Confined harmonic oscillator as an f-deformed oscillator, and its
nonlinear coherent states."""

__version__ = "0.1.0"

from .errors import DomainError, NumericError, TruncationError
from .fock import (adjoint, build_deformed, build_ladder, commutator, expectation,
                   heisenberg_phase_G, ladder_from_spectrum)
from .nlcs import (MomentReport, NlcsState, build_nlcs, gen_bessel_I, generalized_factorial,
                   identity_moment_check, identity_moment_closed_form, mandel_parameter,
                   normalization_sq, normalization_sq_bessel, photon_distribution,
                   quadrature_variance, squeeze_S_deformed, squeeze_s)
from .params import ConfinementParams, DeformationFunction, deformation_f, derive_params
from .spectra import (SpectrumResult, deformed_energy, model_energy, shift_to_ground,
                      solve_confined_oscillator, solve_dirichlet, solve_model_potential)
