from .estimates import (
    BoundResult,
    chain_A,
    chain_A_expression,
    chain_E2_bound,
    chain_P,
    leakage_amplitude,
    leakage_L,
    leakage_L_loose,
    loose_amplitude_bound,
    one_plaquette_E2_bound,
    one_plaquette_projector_estimate,
    schwinger_A,
    schwinger_A_expression,
    schwinger_error_bounds,
    schwinger_leak1,
    schwinger_M,
    suggest_lambda0,
)
from .logspace import LogMagnitude, log_double_factorial
from .nested import ExpSumExpression, nested_expression, nested_integral
from .prior import tong_combined, tong_energy_bound, tong_long_time, tong_short_time

__all__ = [
    "BoundResult", "ExpSumExpression", "LogMagnitude",
    "chain_A", "chain_A_expression", "chain_E2_bound", "chain_P",
    "leakage_amplitude", "leakage_L", "leakage_L_loose", "log_double_factorial", "loose_amplitude_bound",
    "nested_expression", "nested_integral", "one_plaquette_E2_bound", "one_plaquette_projector_estimate",
    "schwinger_A", "schwinger_A_expression", "schwinger_error_bounds", "schwinger_leak1", "schwinger_M",
    "suggest_lambda0", "tong_combined", "tong_energy_bound", "tong_long_time", "tong_short_time",
]
