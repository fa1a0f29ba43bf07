"""Stokes-Biot interaction solver.

The compiled core lives in ``fpsi._core``; this package re-exports it.
"""

from ._core import (
    ConfigError,
    DarcyPair,
    Experiment,
    IterationControl,
    ManufacturedSolution,
    PhysicalParams,
    PulseBC,
    RunConfig,
    Scheme,
    convergence_study,
    default_config,
    example2_params,
    free_decay,
    load_config,
    parse_config,
    run_command,
)

__all__ = [
    "ConfigError",
    "DarcyPair",
    "Experiment",
    "IterationControl",
    "ManufacturedSolution",
    "PhysicalParams",
    "PulseBC",
    "RunConfig",
    "Scheme",
    "convergence_study",
    "default_config",
    "example2_params",
    "free_decay",
    "load_config",
    "parse_config",
    "run_command",
]
