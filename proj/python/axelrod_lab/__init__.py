"""Simulator for the one-dimensional Axelrod model and its particle systems."""

from ._core import (
    Configuration,
    GenealogyError,
    ModelParams,
    ReplayError,
    TrackingError,
    Trajectory,
    ancestor,
    ancestry,
    collisions,
    critical_slope,
    descendant_count,
    exact_tail,
    exact_tail_fraction,
    fixation,
    jump_rate,
    load_trajectory,
    martingale,
    mc_tail,
    omega,
    phase_grid,
    race,
    refined_margin,
    run,
    sample_pi0,
    save_trajectory,
    suite_names,
    track,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
