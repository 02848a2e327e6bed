"""BER bounds and desk-scale simulation for MAP detection of large BPSK MIMO systems."""
from .bounds import (BoundSummary, Regime, ber_curves, classify_uniqueness, critical_points, ell, ell_prime, mfb,
                     replica_theta_star, summarize, tau0, theta0)
from .errors import (BudgetError, ConvergenceError, DomainError, MapboundError, NumericalError,
                     ParameterError)
from .model import DetectionResult, Instance, ModelParams, gen_instance
from .scalar_math import phi, q_inv, q_tail

__all__ = [
    "BoundSummary", "BudgetError", "ConvergenceError", "DetectionResult", "DomainError", "Instance",
    "MapboundError", "ModelParams", "NumericalError", "ParameterError", "Regime", "ber_curves",
    "classify_uniqueness", "critical_points", "ell", "ell_prime", "gen_instance", "mfb", "phi", "q_inv",
    "q_tail", "replica_theta_star", "summarize", "tau0", "theta0",
]
