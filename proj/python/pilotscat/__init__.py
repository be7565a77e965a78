"""Pilot-wave trajectories for charged-particle scattering."""

from ._pilotscat import (
    BeamSpec,
    DomainError,
    Error,
    InsufficientStatistics,
    NodalSingularity,
    NoRoot,
    ParseError,
    RegimeViolation,
    TargetSpec,
    ValidationError,
    WaveMode,
    WaveModel,
    __version__,
    bragg_angles,
    canonical,
    make_model,
    preset_names,
    preset_text,
    psi,
    run_scenario,
    rutherford_deflections,
    separator_topology,
    tof_difference_bohm,
    tof_difference_histories,
    tof_difference_kijowski,
    velocity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
