"""Intensity calibration: measured heights of uniformly peened coupons are
turned into thermal moments, and a linear moment-intensity slope is fitted
through the origin. Also exports the equivalent linear temperature slope
for use in thermoelastic finite element codes.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import PlateSpec


def midplane_from_measurement(measured_height, h):
    """Midplane displacement from a height-gauge reading: P = M - h."""
    if measured_height < h:
        warnings.warn(
            f"measured height {measured_height} is below the plate thickness {h}; "
            "check the measurement or the plate flatness",
            stacklevel=2,
        )
    return measured_height - h


def moment_from_max_displacement(u_max, h, l1, l2):
    """Thermal moment of a uniformly peened coupon from its peak displacement.

    Inverts the uniform-moment paraboloid: tau = 2 h^3 |u_max| / (3 (l1^2 + l2^2)).
    Symmetric in the two side lengths.
    """
    if h <= 0 or l1 <= 0 or l2 <= 0:
        raise InputError("coupon dimensions must be positive")
    return 2.0 * h**3 * abs(u_max) / (3.0 * (l1**2 + l2**2))


@dataclass(frozen=True)
class CalibrationRecord:
    """One uniform-peen test: intensity level, peak midplane displacement,
    and the thermal moment derived from it."""

    intensity: float
    u_max: float
    tau: float


def record_from_measurement(intensity, measured_height, coupon):
    """Record built from a raw height-gauge reading on a given coupon."""
    u_max = midplane_from_measurement(measured_height, coupon.h)
    tau = moment_from_max_displacement(u_max, coupon.h, coupon.L1, coupon.L2)
    return CalibrationRecord(intensity, u_max, tau)


@dataclass(frozen=True)
class CalibrationModel:
    """Linear moment-intensity relation tau = K I fitted on one coupon build.

    The slope is specific to the coupon's material and thickness; applying
    the model to a meaningfully different plate triggers a warning at
    projection time.
    """

    records: tuple
    slope_K: float
    coupon: PlateSpec | None = None

    def __post_init__(self):
        if self.slope_K <= 0:
            raise InputError(f"calibration slope must be positive, got {self.slope_K}")
        object.__setattr__(self, "records", tuple(self.records))


def fit_slope(records, coupon=None):
    """Least-squares slope through the origin: K = sum(tau I) / sum(I^2)."""
    records = tuple(records)
    if not records:
        raise InputError("at least one calibration record is required")
    intensities = np.array([r.intensity for r in records])
    moments = np.array([r.tau for r in records])
    if np.any(intensities <= 0):
        raise InputError("calibration intensities must be positive")
    slope = float(np.dot(moments, intensities) / np.dot(intensities, intensities))
    return CalibrationModel(records, slope, coupon)


def intensity_to_moment(intensity, model, sign=1):
    """Thermal moment for peening at the given intensity.

    sign selects the peened face: -1 bends the plate the other way.
    """
    if intensity < 0:
        raise InputError("intensity must be nonnegative")
    if sign not in (1, -1):
        raise InputError(f"sign must be +1 or -1, got {sign}")
    return sign * model.slope_K * intensity


def linear_temperature_slope(tau, alpha, h):
    """Slope T0 of a linear through-thickness temperature profile T = T0 x3
    that reproduces the thermal moment: T0 = 12 tau / (alpha h^3)."""
    if alpha <= 0 or h <= 0:
        raise InputError("alpha and h must be positive")
    return 12.0 * tau / (alpha * h**3)
