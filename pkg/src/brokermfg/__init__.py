"""Equilibrium solver and simulator for an informed broker facing a mean-field
crowd of uninformed traders: trader-side equilibrium coefficients, the
broker's optimal information-revelation time and execution control, trajectory
simulation, and finite-player convergence measurements."""

from .broker import (BrokerCoefficients, RevelationPolicy, broker_objective_reduced,
                     broker_payoff_monte_carlo, compute_A, compute_A_prime, critical_time,
                     evaluate_broker_control, solve_broker)
from .errors import (BAboveBound, BrokerMfgError, ConfigParse, LengthMismatch, MissingSigma,
                     MomentInconsistency, NonPositiveParameter, NTooSmall, RiccatiBlowup,
                     SeriesDiverging, TruncationLimit)
from .finite_game import (ConvergenceReport, FiniteCoefficients, compute_finite_coefficients,
                          convergence_study, evaluate_nash_controls)
from .model import (KernelSurface, ModelParams, ScalarCurve, TimeGrid, b_admissibility_bound,
                    validate)
from .riccati import RiccatiSolution, solve_gamma, solve_gamma_broker, solve_gamma_N
from .simulate import (PopulationSnapshot, SimulationConfig, simulate_broker_path,
                       simulate_population, simulate_price)
from .trader import (MuPath, TraderCoefficients, compute_beta_coefficients,
                     compute_trader_coefficients, conditional_moments,
                     evaluate_trader_control, solve_trader)

__version__ = "0.1.0"
