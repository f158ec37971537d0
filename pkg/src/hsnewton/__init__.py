"""Inexact Newton regularization in Hilbert scales.

Diagonal Hilbert scales, spectral filter families with their structure
checks, synthetic forward problems, the Newton solver with discrepancy
stopping, and an experiment harness for convergence rates.
"""
from .assumptions import (AssumptionCheckConfig, check_assumption1, check_assumption2, contour_arcs,
                          lemma1_probe)
from .filters import (FilterFamily, InadmissibleAlpha, InnerSolveError, ScalingError, filter_step_iterative,
                      filter_step_spectral, g_scalar, phi_complex, r_scalar)
from .harness import (CertificationReport, RateReport, certify_filters, export_report, fit_rate, lemma3_probe,
                      rate_experiment, theory_slope)
from .hilbert_scale import (ScaleOperator, apply_power, default_scale, embedding_slack, interpolation_slack,
                            make_scale, norm_r)
from .problems import (CATALOG, ForwardProblem, NoisyData, SourceElement, construct_source,
                       make_diagonal_linear, make_noisy, make_quadratic_perturbed, rescale_to_assumption3b)
from .schedules import AlphaSchedule, make_schedule, validate_schedule
from .solver import SolverConfig, SolverResult, newton_step, predicted_stop_index, run

__version__ = "0.1.0"
