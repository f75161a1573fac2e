"""Plain-text formats: test definitions, local-level profiles, curve tables,
calibration reports and data samples.

Floats are written with 17 significant digits so a read after a write
reproduces every value bit for bit.
"""

from __future__ import annotations

import contextlib
import csv
import math
from pathlib import Path

import numpy as np

from goflevels.calibration import CalibrationResult
from goflevels.gof_tests import Family, Sample, TestDefinition
from goflevels.local_levels import LocalLevelProfile

__all__ = [
    "SampleFormatError",
    "fmt",
    "write_testdef",
    "read_testdef",
    "write_profile",
    "read_profile",
    "write_curves",
    "format_calibration",
    "read_sample",
]

TESTDEF_HEADER = ["i", "lower", "upper"]
PROFILE_HEADER = ["i", "alpha_one", "alpha_two"]
CURVES_HEADER = ["x", "rho", "rho_tilde", "r", "r_tilde"]


class SampleFormatError(ValueError):
    """A sample or table file could not be parsed."""


def fmt(x: float) -> str:
    return "%.17g" % x


def _open_out(target):
    """Open a path for writing, or pass an open text stream through."""
    if hasattr(target, "write"):
        return contextlib.nullcontext(target)
    return open(target, "w", newline="")


def _meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta")


def _read_rows(path, header):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != header:
        raise SampleFormatError(f"{path}: expected header {','.join(header)}")
    body = rows[1:]
    for k, row in enumerate(body, start=1):
        if len(row) != len(header) or row[0] != str(k):
            raise SampleFormatError(f"{path}: malformed row {k + 1}")
    return body


def write_testdef(test: TestDefinition, path) -> None:
    """Write ``i,lower,upper`` (upper empty for one-sided tests) plus a
    ``<path>.meta`` sidecar holding family, parameter, n and sidedness.
    """
    if hasattr(path, "write"):
        raise TypeError("a testdef needs a file path for its metadata sidecar")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TESTDEF_HEADER)
        for k in range(test.n):
            up = "" if test.upper is None else fmt(test.upper[k])
            w.writerow([k + 1, fmt(test.lower[k]), up])
    meta = {
        "family": test.family.value,
        "parameter": fmt(test.parameter),
        "n": str(test.n),
        "sided": "two" if test.two_sided else "one",
    }
    _meta_path(path).write_text("".join(f"{k}={v}\n" for k, v in meta.items()))


def _read_meta(path) -> dict[str, str]:
    meta_path = _meta_path(path)
    if not meta_path.exists():
        return {}
    meta = {}
    for line in meta_path.read_text().splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
    return meta


def read_testdef(path) -> TestDefinition:
    body = _read_rows(path, TESTDEF_HEADER)
    if not body:
        raise SampleFormatError(f"{path}: no rows")
    lower = np.array([float(r[1]) for r in body])
    uppers = [r[2] for r in body]
    if all(u == "" for u in uppers):
        upper = None
    elif any(u == "" for u in uppers):
        raise SampleFormatError(f"{path}: upper column partly empty")
    else:
        upper = np.array([float(u) for u in uppers])
    meta = _read_meta(path)
    try:
        family = Family(meta.get("family", Family.CUSTOM.value))
    except ValueError:
        raise SampleFormatError(f"{path}: unknown family {meta['family']!r} in metadata") from None
    parameter = float(meta.get("parameter", "nan"))
    if "n" in meta and int(meta["n"]) != len(body):
        raise SampleFormatError(f"{path}: metadata says n={meta['n']}, file has {len(body)} rows")
    return TestDefinition(len(body), lower, upper, family, parameter)


def write_profile(profile: LocalLevelProfile, path) -> None:
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_HEADER)
        for k in range(profile.n):
            two = "" if profile.two_sided is None else fmt(profile.two_sided[k])
            w.writerow([k + 1, fmt(profile.one_sided[k]), two])


def read_profile(path) -> LocalLevelProfile:
    body = _read_rows(path, PROFILE_HEADER)
    one = np.array([float(r[1]) for r in body])
    twos = [r[2] for r in body]
    two = None if all(v == "" for v in twos) else np.array([float(v) for v in twos])
    return LocalLevelProfile(len(body), one, two)


def write_curves(columns: dict[str, np.ndarray], path) -> None:
    """Write the curve table; NaN marks points outside a curve's domain."""
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVES_HEADER)
        for row in zip(*(columns[name] for name in CURVES_HEADER)):
            w.writerow([fmt(v) for v in row])


def format_calibration(result: CalibrationResult) -> str:
    """``key=value`` lines, one per field."""
    lines = [
        f"family={result.family.value}",
        f"n={result.n}",
        f"alpha={fmt(result.alpha)}",
        f"sided={result.sided}",
        f"method={result.method}",
        f"parameter={fmt(result.parameter)}",
        f"achieved_level={fmt(result.achieved_level)}",
        f"iterations={result.iterations}",
        f"bracket_width={fmt(result.bracket_width)}",
    ]
    if result.method == "mc":
        lines.append(f"stderr={fmt(result.stderr)}")
    return "\n".join(lines) + "\n"


def _read_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column ``x,F`` table of the null c.d.f., strictly increasing in x."""
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError as exc:
        raise SampleFormatError(f"{path}: {exc}") from None
    if data.shape[1] != 2 or data.shape[0] < 2:
        raise SampleFormatError(f"{path}: need at least two rows of x,F")
    x, f = data[:, 0], data[:, 1]
    if np.any(np.diff(x) <= 0) or np.any(np.diff(f) < 0):
        raise SampleFormatError(f"{path}: table must increase in x and not decrease in F")
    if f[0] < 0.0 or f[-1] > 1.0:
        raise SampleFormatError(f"{path}: F values must lie in [0, 1]")
    return x, f


def read_sample(path, f0_table=None) -> Sample:
    """Read one decimal value per line; ``#`` starts a comment.

    A ``# f0: table`` header asks for the values to be mapped through a
    tabulated null c.d.f. (linear interpolation of ``f0_table``, a CSV of
    ``x,F`` rows) before the [0, 1] check; ``# f0: none`` or no header leaves
    them as they are.  Ties are kept.
    """
    transform = "none"
    values, lines = [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text, _, comment = raw.partition("#")
            key, sep, val = comment.partition(":")
            if sep and key.strip().lower() == "f0":
                transform = val.strip().lower()
                if transform not in ("none", "table"):
                    raise SampleFormatError(f"{path}: line {lineno}: unknown f0 transform {transform!r}")
            text = text.strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise SampleFormatError(f"{path}: line {lineno}: not a number: {text!r}") from None
            if not math.isfinite(v):
                raise SampleFormatError(f"{path}: line {lineno}: value {text} is not finite")
            values.append(v)
            lines.append(lineno)
    if not values:
        raise SampleFormatError(f"{path}: empty sample")
    arr = np.array(values)
    if transform == "table":
        if f0_table is None:
            raise SampleFormatError(f"{path}: header asks for f0 table but none was given")
        x, f = _read_table(f0_table)
        arr = np.interp(arr, x, f)
    for v, lineno in zip(arr, lines):
        if not 0.0 <= v <= 1.0:
            raise SampleFormatError(f"{path}: line {lineno}: value {v!r} outside [0, 1]")
    return Sample(arr)
