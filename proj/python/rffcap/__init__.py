"""Radio-fingerprint simulation, information estimates and user capacity."""

from ._rffcap import (
    DeviceProfile,
    PipelineConfig,
    build_dataset,
    check_fano_consistency,
    draw_population,
    emi_kde,
    fano_lower_bound,
    fano_upper_bound,
    ideal_preamble,
    lda_error_rate,
    per_feature_mi,
    run_sweep_csv,
    simulate_capture,
    user_capacity,
)

__all__ = [
    "DeviceProfile",
    "PipelineConfig",
    "build_dataset",
    "check_fano_consistency",
    "draw_population",
    "emi_kde",
    "fano_lower_bound",
    "fano_upper_bound",
    "ideal_preamble",
    "lda_error_rate",
    "per_feature_mi",
    "run_sweep_csv",
    "simulate_capture",
    "user_capacity",
]
