"""Delayed-feedback stabilization of a vibrating string: modal root analysis,
stabilizing-gain certificates and a finite-difference simulator."""

from ._delaystab import (
    Error,
    InvalidArgument,
    NumericalError,
    admissible_alpha_interval,
    check_stabilizing,
    count_roots,
    critical_delays,
    dde_integrate,
    evaluate,
    k_index,
    locate_roots,
    region_grid,
    rhp_root_bound,
    simulate_mode,
    spectral_abscissa,
)

__all__ = [
    "Error",
    "InvalidArgument",
    "NumericalError",
    "admissible_alpha_interval",
    "check_stabilizing",
    "count_roots",
    "critical_delays",
    "dde_integrate",
    "evaluate",
    "k_index",
    "locate_roots",
    "region_grid",
    "rhp_root_bound",
    "simulate_mode",
    "spectral_abscissa",
]
