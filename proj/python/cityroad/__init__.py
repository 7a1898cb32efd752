from ._cityroad import (
    AsymptoticSpeed,
    BlowUpError,
    ConfigError,
    DispersionResult,
    Parameters,
    compute_c_star,
    compute_c_star_inf,
    dispersion_y,
    find_lambda0,
    max_exchange_dt,
    run_command,
    run_criterion,
    simulate,
    simulate_asymptotic,
)

__all__ = [
    "AsymptoticSpeed",
    "BlowUpError",
    "ConfigError",
    "DispersionResult",
    "Parameters",
    "compute_c_star",
    "compute_c_star_inf",
    "dispersion_y",
    "find_lambda0",
    "max_exchange_dt",
    "run_command",
    "run_criterion",
    "simulate",
    "simulate_asymptotic",
]
