"""Inertial accelerated primal-dual optimization for problems
min f(x) + g(x) s.t. Ax = b, with schedule validation, Lyapunov-energy
certificates, a continuous-time simulator, and a benchmark CLI."""

from .problems import (CompositeProblem, LinearMap, SaddlePointCertificate,
                       certificate_for, eval_aug_lagrangian, eval_lagrangian,
                       kkt_residual, quadratic_problem, zero_map)
from .prox import (MoreauParams, ProxFunction, l1, l1_plus_sql2, moreau_grad,
                   moreau_value, nonneg, prox_l1, prox_nonneg, sql2, ZERO)
from .schedules import (ExtrapolationRule, ScalingPolicy, attouch_cabot_rule,
                        beta_upper_factor, chambolle_dossal_rule, constant_beta,
                        custom_rule, nesterov_rule, next_beta, next_t,
                        power_beta, validate_rule)
from .solver import (CertificateReport, EnergyBreakdown, SolverParams,
                     bound_certificates, energy, run)
from .subsolvers import (InnerSolverConfig, QuadraticCompositeSubproblem,
                         afbm_baseline, estimate_opnorm, fista_baseline,
                         fista_solve)
from .trace import MetricsTrace, read_trace_csv

__version__ = "0.1.0"
