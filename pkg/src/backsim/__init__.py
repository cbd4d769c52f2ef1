"""Backward Simulation of correlated multivariate mixed Poisson processes."""

from .analytics import (CorrelationCurve, chi_square_pmf, correlation_curve, empirical_curve,
                        ks_uniform, rho_bs, rho_fc, rho_theoretical, z_function)
from .calibration import (CalibratedModel, InfeasibleCalibration, admissible_range, calibrate,
                          flatten, phase1_solve, sample_joint, unflatten)
from .distributions import (Degenerate, FiniteDiscrete, Gamma, MixedPoissonDistribution,
                            StructureDistribution, TruncatedPmf, nb_from_mean_variance, thin_pmf)
from .ejd import (ExtremeMeasure, MonotonicityStructure, build_extreme_measure,
                  correlation_matrix, enumerate_structures)
from .simulation import (Path, PathSet, SimulationConfig, backward_simulate_period,
                         forward_comonotone, simulate)

__version__ = "0.1.0"

__all__ = [
    "CalibratedModel", "CorrelationCurve", "Degenerate", "ExtremeMeasure", "FiniteDiscrete",
    "Gamma", "InfeasibleCalibration", "MixedPoissonDistribution", "MonotonicityStructure",
    "Path", "PathSet", "SimulationConfig", "StructureDistribution", "TruncatedPmf",
    "admissible_range", "backward_simulate_period", "build_extreme_measure", "calibrate",
    "chi_square_pmf", "correlation_curve", "correlation_matrix", "empirical_curve",
    "enumerate_structures", "flatten", "forward_comonotone", "ks_uniform",
    "nb_from_mean_variance", "phase1_solve", "rho_bs", "rho_fc", "rho_theoretical",
    "sample_joint", "simulate", "thin_pmf", "unflatten", "z_function",
]
