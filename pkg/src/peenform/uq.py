"""Monte Carlo propagation of input uncertainty through the calibrated
forward model, and the two-way no-replication ANOVA used on the uniform-peen
measurements.

Reproducibility contract: trial i draws from a generator derived purely from
(master seed, i), so a given seed yields bitwise-identical results no matter
how trials are scheduled or batched.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .assembly import forward_solve
from .calibration import (
    CalibrationModel,
    CalibrationRecord,
    midplane_from_measurement,
    moment_from_max_displacement,
)
from .errors import DegenerateAnovaError, InputError
from .model import TensorBasis, eval_displacement, project_moment

# Intensity of the shot peen program used for the uniform calibration runs.
CALIBRATION_INTENSITY = 0.0101


@dataclass(frozen=True)
class UncertaintySpec:
    """Uniform sampling ranges for the uncertain inputs plus trial bookkeeping.

    Every range is an inclusive (lo, hi) pair in the recipe's length unit.
    M_range covers the measured heights of the uniformly peened coupons;
    mask_offset_range perturbs every masked-rectangle edge outward by one
    shared draw per trial; measurement_noise_range is added to the final
    predicted height. Degenerate ranges (lo == hi) pin an input.
    """

    L1_range: tuple
    L2_range: tuple
    h_range: tuple
    mask_offset_range: tuple
    measurement_noise_range: tuple
    M_range: tuple
    trial_count: int
    seed: int

    def __post_init__(self):
        for name in ("L1_range", "L2_range", "h_range", "mask_offset_range",
                     "measurement_noise_range", "M_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InputError(f"{name} has lo > hi")
        if self.trial_count < 1:
            raise InputError("trial count must be at least 1")


@dataclass(frozen=True, eq=False)
class McSummary:
    """Predicted measured-height distribution from one Monte Carlo sweep."""

    samples: np.ndarray
    mean: float
    std: float
    bin_edges: np.ndarray
    counts: np.ndarray


def trial_rng(seed, index):
    """Independent generator for one trial; a pure function of (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def run_trial(spec, recipe, rng):
    """One Monte Carlo draw of the predicted measured height.

    The draw order is fixed so a seed pins the trial across versions:
    coupon h, L1, L2; coupon measured height M; prediction-plate h, L1, L2;
    mask offset; measurement noise. The coupon draws rebuild the calibration
    (u_max = M - h, slope from the uniform-peen formula at the calibration
    intensity); the plate draws feed the forward solve; the result is the
    center midplane displacement plus the plate thickness plus noise.
    """
    h_coupon = rng.uniform(*spec.h_range)
    l1_coupon = rng.uniform(*spec.L1_range)
    l2_coupon = rng.uniform(*spec.L2_range)
    measured = rng.uniform(*spec.M_range)
    u_max = midplane_from_measurement(measured, h_coupon)
    tau_cal = moment_from_max_displacement(u_max, h_coupon, l1_coupon, l2_coupon)
    slope = tau_cal / CALIBRATION_INTENSITY

    h_plate = rng.uniform(*spec.h_range)
    l1_plate = rng.uniform(*spec.L1_range)
    l2_plate = rng.uniform(*spec.L2_range)
    offset = rng.uniform(*spec.mask_offset_range)
    noise = rng.uniform(*spec.measurement_noise_range)

    plate = replace(recipe.plate, L1=l1_plate, L2=l2_plate, h=h_plate)
    coupon = replace(recipe.plate, L1=l1_coupon, L2=l2_coupon, h=h_coupon)
    model = CalibrationModel(
        (CalibrationRecord(CALIBRATION_INTENSITY, u_max, tau_cal),), slope, coupon)
    basis = TensorBasis(plate, recipe.basis_n)
    field = project_moment(basis, recipe.intensity.offset(offset), model)
    solution = forward_solve(basis, field)
    center = eval_displacement(basis, solution.a, (plate.L1 / 2.0, plate.L2 / 2.0))
    return center + h_plate + noise


def run_monte_carlo(spec, recipe):
    """Full sweep of spec.trial_count independent trials.

    The sample standard deviation of a single trial is zero by convention.
    Histogram bins follow the Freedman-Diaconis rule.
    """
    samples = np.array([
        run_trial(spec, recipe, trial_rng(spec.seed, i))
        for i in range(spec.trial_count)
    ])
    mean = float(samples.mean())
    std = float(samples.std(ddof=1)) if spec.trial_count > 1 else 0.0
    counts, edges = np.histogram(samples, bins="fd")
    return McSummary(samples, mean, std, edges, counts)


def f_tail_probability(f_value, df_num, df_den):
    """Upper-tail probability of the F distribution.

    Integrates the density with adaptive quadrature (absolute tolerance
    1e-8) rather than relying on a closed-form CDF.
    """
    if df_num < 1 or df_den < 1:
        raise InputError("degrees of freedom must be positive")
    if f_value <= 0.0:
        return 1.0
    d1 = float(df_num)
    d2 = float(df_den)
    log_beta = math.lgamma(d1 / 2.0) + math.lgamma(d2 / 2.0) - math.lgamma((d1 + d2) / 2.0)

    def density(x):
        log_pdf = (
            0.5 * d1 * math.log(d1 / d2)
            + (0.5 * d1 - 1.0) * math.log(x)
            - 0.5 * (d1 + d2) * math.log1p(d1 * x / d2)
            - log_beta
        )
        return math.exp(log_pdf)

    tail, _ = integrate.quad(density, f_value, np.inf, epsabs=1e-8, limit=200)
    return float(min(max(tail, 0.0), 1.0))


@dataclass(frozen=True)
class AnovaResult:
    """Two-way no-replication ANOVA summary."""

    F_rows: float
    F_cols: float
    df: tuple
    p_rows: float
    p_cols: float
    significant_rows: bool
    significant_cols: bool
    alpha_level: float


def anova_two_way_no_replication(table, alpha_level=0.10):
    """Row and column F tests for an r x c table with one observation per cell.

    The additive model leaves (r-1)(c-1) error degrees of freedom. A
    perfectly additive table has zero error mean square and admits no test;
    that raises DegenerateAnovaError.
    """
    x = np.asarray(table, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise InputError("ANOVA table must be at least 2 x 2")
    if not np.all(np.isfinite(x)):
        raise InputError("ANOVA table entries must be finite")
    if not 0.0 < alpha_level < 1.0:
        raise InputError("significance level must lie in (0, 1)")
    rows, cols = x.shape
    grand = x.mean()
    ss_rows = cols * float(((x.mean(axis=1) - grand) ** 2).sum())
    ss_cols = rows * float(((x.mean(axis=0) - grand) ** 2).sum())
    ss_total = float(((x - grand) ** 2).sum())
    ss_error = max(ss_total - ss_rows - ss_cols, 0.0)
    df = (rows - 1, cols - 1, (rows - 1) * (cols - 1))
    if ss_error <= 1e-12 * max(ss_total, np.finfo(float).tiny):
        raise DegenerateAnovaError(
            "error mean square is zero (perfectly additive table)")
    ms_error = ss_error / df[2]
    f_rows = (ss_rows / df[0]) / ms_error
    f_cols = (ss_cols / df[1]) / ms_error
    p_rows = f_tail_probability(f_rows, df[0], df[2])
    p_cols = f_tail_probability(f_cols, df[1], df[2])
    return AnovaResult(
        F_rows=f_rows,
        F_cols=f_cols,
        df=df,
        p_rows=p_rows,
        p_cols=p_cols,
        significant_rows=p_rows < alpha_level,
        significant_cols=p_cols < alpha_level,
        alpha_level=alpha_level,
    )
