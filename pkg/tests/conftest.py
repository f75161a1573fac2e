import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from goflevels.calibration import calibrate_ell, calibrate_hc, calibrate_ks  # noqa: E402

SIZES = (100, 500, 1000)


@pytest.fixture(scope="session")
def calibrated():
    """One-sided exact calibrations at alpha = 0.05, keyed by (family, n)."""
    out = {}
    for n in SIZES:
        out["hc", n] = calibrate_hc(n, 0.05)
        out["ks", n] = calibrate_ks(n, 0.05)
        out["ell", n] = calibrate_ell(n, 0.05)
    return out
