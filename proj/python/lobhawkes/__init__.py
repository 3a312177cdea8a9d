"""Nonparametric multivariate Hawkes estimation for order-book event flows."""

from ._core import (
    EventStream,
    IllConditionedError,
    InstabilityError,
    InvalidArgument,
    LinLogParams,
    ParseError,
    QuadratureParams,
    Session,
    build_linlog_grid,
    build_quadrature,
    estimate_conditional_law,
    load_event_sessions,
    mean_intensity,
    randomize_timestamps,
    read_kernel_estimate,
    run_acceptance,
    simulate,
    solve_wiener_hopf,
    write_kernel_estimate,
)

__all__ = [
    "EventStream",
    "IllConditionedError",
    "InstabilityError",
    "InvalidArgument",
    "LinLogParams",
    "ParseError",
    "QuadratureParams",
    "Session",
    "build_linlog_grid",
    "build_quadrature",
    "estimate_conditional_law",
    "load_event_sessions",
    "mean_intensity",
    "randomize_timestamps",
    "read_kernel_estimate",
    "run_acceptance",
    "simulate",
    "solve_wiener_hopf",
    "write_kernel_estimate",
]
