"""Multi-block ADMM for separable convex quadratic programs."""

import json as _json

from ._core import (
    Error,
    InsufficientDataError,
    NoGuaranteeError,
    NumericalError,
    Problem,
    UnsupportedError,
    ValidationError,
    gamma_bound,
    generate_qp,
    kkt_residual,
    oracle_solve_eq_qp,
    rate_fit,
    residual_weight,
    run_experiment,
    solve,
)


def problem_from_dict(doc):
    """Build a Problem from the JSON-shaped dict used by problem files."""
    return Problem.from_json(_json.dumps(doc))


def problem_to_dict(problem):
    return _json.loads(problem.to_json())


__all__ = [
    "Error",
    "InsufficientDataError",
    "NoGuaranteeError",
    "NumericalError",
    "Problem",
    "UnsupportedError",
    "ValidationError",
    "gamma_bound",
    "generate_qp",
    "kkt_residual",
    "oracle_solve_eq_qp",
    "problem_from_dict",
    "problem_to_dict",
    "rate_fit",
    "residual_weight",
    "run_experiment",
    "solve",
]
