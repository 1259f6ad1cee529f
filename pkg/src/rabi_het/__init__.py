"""Heteroclinic phase-transition profiles of the Rabi-coupled two-component condensate."""
from .bvp import Profile, SolveOptions, continue_in_lambda, initial_guess, refine, solve, solve_params
from .dynamics import Frame, HamiltonianKind, hamiltonian, rhs, to_frame
from .equilibria import all_equilibria, mixed_equilibria, slow_eigenvalues
from .limit_profiles import compute_phi0, compute_u0, sample
from .params import Params, Regime, make_params

__version__ = "0.1.0"
