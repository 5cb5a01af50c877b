"""
Hard-core model package.
"""
from .hardcore import (
    IndependentSet,
    ModelParams,
    greedy_maximal_independent_set,
    is_independent,
    lambda_c,
    lambda_from_ratio,
    log_lambda_c,
    log_weight,
    weight,
)

__all__ = [
    "IndependentSet",
    "ModelParams",
    "greedy_maximal_independent_set",
    "is_independent",
    "lambda_c",
    "lambda_from_ratio",
    "log_lambda_c",
    "log_weight",
    "weight",
]
