"""Python bindings for the Wiener-sausage continuum percolation toolkit."""

from ._wsperc import (
    ConfigError,
    ExplosionError,
    ball_capacity,
    bottleneck,
    cap_ball_hitting,
    count_star_contours,
    count_star_contours_bruteforce,
    crossing_time,
    fit_scaling,
    run_experiment,
    sausage_caps,
    series_check,
    simulate_gw,
)

__all__ = [
    "ConfigError",
    "ExplosionError",
    "ball_capacity",
    "bottleneck",
    "cap_ball_hitting",
    "count_star_contours",
    "count_star_contours_bruteforce",
    "crossing_time",
    "fit_scaling",
    "run_experiment",
    "sausage_caps",
    "series_check",
    "simulate_gw",
]
