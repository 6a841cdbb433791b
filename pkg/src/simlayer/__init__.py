"""Concave and convex similarity solutions of f''' + f f'' + g(f') = 0.

Shooting on f''(0) with an analytic bracket seed, plus nonexistence
predicates, closed-form oracles and a small CLI.
"""

from .analysis import (AsymptoticsReport, ClosedForm, ClosedFormCase, NonexistenceVerdict,
                       closed_form_eval, estimate_mu, nonexistence_concave, nonexistence_convex,
                       nonexistence_for, residual_of, toepfer_gamma_star)
from .errors import (BracketFailure, ConvergenceFailure, DomainError, EvaluationError,
                     HypothesisError, InvalidParameter, ParseError, SimlayerError, SolveError,
                     StepUnderflow, StripExitAtMidpoint)
from .gfamily import (Branch, GKind, GSpec, HypothesisReport, ScalingRecipe, check_hypotheses,
                      eval_g, make_builtin, max_abs_g_on_interval, normalize_scaling,
                      parse_g_expression)
from .integrator import (EventKind, EventRecord, IntegratorConfig, State, Termination,
                         Trajectory, integrate_with_events, step)
from .problem import ProblemSpec
from .shooting import (BracketPlan, ShotClass, ShotOutcome, SolverSettings, SolveReport,
                       classify_shot, identity_residual, initial_bracket, p_gamma_seed,
                       solve_bvp)

__version__ = "0.1.0"
