"""Local levels, exact calibration and asymptotics for order-statistic GOF tests."""

from goflevels.boundary_crossing import (
    CrossingResult,
    accept_prob_one_sided,
    accept_prob_two_sided,
    mc_level_estimate,
)
from goflevels.calibration import (
    CalibrationResult,
    bonferroni_bounds,
    calibrate_ell,
    calibrate_hc,
    calibrate_ks,
    calibrate_mc,
    ell_asymptotic_local_level,
)
from goflevels.gof_tests import (
    Sample,
    TestDefinition,
    custom_from_local_levels,
    ell_critical_values,
    evaluate_test,
    hc_statistics,
    hc_test,
    hc_threshold,
    ks_asymptotic_c,
    ks_critical_values,
    ks_test,
    minp_statistics,
)
from goflevels.local_levels import (
    LocalLevelProfile,
    ks_asymptotic_local_level,
    local_levels_one_sided,
    local_levels_two_sided,
)

__all__ = [
    "CalibrationResult",
    "CrossingResult",
    "LocalLevelProfile",
    "Sample",
    "TestDefinition",
    "accept_prob_one_sided",
    "accept_prob_two_sided",
    "bonferroni_bounds",
    "calibrate_ell",
    "calibrate_hc",
    "calibrate_ks",
    "calibrate_mc",
    "custom_from_local_levels",
    "ell_asymptotic_local_level",
    "ell_critical_values",
    "evaluate_test",
    "hc_statistics",
    "hc_test",
    "hc_threshold",
    "ks_asymptotic_c",
    "ks_asymptotic_local_level",
    "ks_critical_values",
    "ks_test",
    "local_levels_one_sided",
    "local_levels_two_sided",
    "mc_level_estimate",
    "minp_statistics",
]
