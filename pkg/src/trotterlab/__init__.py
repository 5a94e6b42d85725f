"""Numerical laboratory for state-dependent Trotter product errors."""
from ._accel import HAVE_NUMBA, backend
from .errors import *  # noqa: F401,F403
from .matcore import (BasisTag, EigenSystem, HermitianOperator, StateVector, UnitaryPropagator,
                      apply_power, hermitian_eig, unitary_exp)
from .models import (FockOperators, FourierCoefficients, SplitModel, fock_operators, fourier_decay_state,
                     fourier_potential, oscillator_model, sine_coeffs, square_wave_coeffs, torus_laplacian,
                     torus_model, v_alpha_coeffs)
from .propagate import (A_THEN_B, B_THEN_A, TrotterRun, commutator_defect, cycle_propagator, exact_evolve,
                        telescoping_bound, trotter_error, trotter_errors)
from .regularity import (EnergyBudget, FavardEstimate, LambdaSearch, enorm_bruteforce, f_energy,
                         favard_probe, fractional_norm, operator_E_norm, stability_omega)
from .bounds import (BoundReport, coulomb_rate, dirac_constants, energy_limited_bound, favard_exponent,
                     graph_norm_exponent, many_body_rate, oscillator_bound, perturbative_bound,
                     perturbative_constants, schrodinger_bound, schrodinger_constants)
from .experiments import (ErrorCurve, ExperimentConfig, RateFit, config_hash, detect_crossover,
                          emit_results, fit_rate, linear_fit, pre_crossover_window, read_curve,
                          run_experiment, sliding_fits, truncation_check)

__version__ = "0.1.0"
