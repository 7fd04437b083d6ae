"""Vertex-reinforced random walks on the integers: weights, critical parameters, simulation."""

from .weights import (DomainError, OutOfDomainError, ResourceLimitError, WeightError, WeightSpec,
                      W_limit, eval_H, eval_W, eval_w, inv_H, inv_W, partial_sums, series_tests)
from .criticals import (CriticalEstimate, Parameter, TailClassification, Verdict, check_scaling,
                        check_sublinear_conditions, classify_integral, consistency_gate,
                        estimate_critical, partial_I, partial_J, partial_J_tilde)
from .simulator import InitialConfig, RunRecord, new_walk, run, step, tail_schedule
from .diagnostics import (center_dominance, asymmetry_monitor, beta_envelope, crossing_gap,
                          eqW_residual, localization_report, tail_support, u_monitor)
from .harness import ExperimentPlan, run_experiment, verify_suite

__version__ = "0.1.0"
