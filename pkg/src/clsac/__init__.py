"""Simple adaptive control with open- and closed-loop reference models."""

from .adaptive import AdaptiveGains, GainWeights, control, integral_gain_derivatives, proportional_gains
from .bounds import BoundReport, bound_report, error_system_matrices
from .cgt import CgtError, IdealGains, cgt_residual, solve_cgt_closedloop, solve_cgt_openloop
from .kernel import DEFAULT_BACKEND, available_backends
from .lti import (Polynomial, StateSpace, TransferFunction, eig, is_hurwitz, is_minimum_phase,
                  poly_roots, relative_degree, ss_to_tf, tf_add, tf_to_ss)
from .passivity import (PfcDesign, WasprCertificate, augment_plant, check_waspr_sufficient,
                        gain_sweep_stability, synthesize_pfc, verify_waspr_certificate)
from .refmodel import RefModelConfig, cl_derivative, lv_deviation_bound, ol_derivative
from .sim import (CommandSpec, DivergenceError, Scenario, SimSettings, SimTrace, command_value,
                  metrics, rk4_step, run)

__version__ = "0.1.0"
