import numpy as np
import pytest

from peenform import (
    CalibrationModel,
    CalibrationRecord,
    IntensityMap,
    PlateSpec,
    TensorBasis,
    eval_displacement,
    fit_slope,
    forward_solve,
    intensity_to_moment,
    linear_temperature_slope,
    midplane_from_measurement,
    moment_from_max_displacement,
    project_moment,
    record_from_measurement,
)
from peenform.errors import InputError
from peenform.legendre import gauss_rule


class TestMomentFromMaxDisplacement:
    def test_zero(self):
        assert moment_from_max_displacement(0.0, 0.123, 8, 8) == 0.0

    def test_representative_value(self):
        # 2 * 0.123^3 * 0.182 / (3 * 128), worked by hand.
        tau = moment_from_max_displacement(0.182, 0.123, 8.0, 8.0)
        assert tau == pytest.approx(1.76394684375e-6, rel=1e-12)

    def test_cubic_thickness_scaling(self):
        base = moment_from_max_displacement(0.1, 0.1, 8, 8)
        assert moment_from_max_displacement(0.1, 0.2, 8, 8) == pytest.approx(8 * base)

    def test_side_length_swap(self):
        assert moment_from_max_displacement(0.15, 0.1, 6.0, 9.0) == pytest.approx(
            moment_from_max_displacement(0.15, 0.1, 9.0, 6.0))

    def test_sign_insensitive(self):
        assert moment_from_max_displacement(-0.1, 0.1, 8, 8) == \
            moment_from_max_displacement(0.1, 0.1, 8, 8)

    def test_rejects_bad_dimensions(self):
        with pytest.raises(InputError):
            moment_from_max_displacement(0.1, 0.0, 8, 8)


class TestMidplaneFromMeasurement:
    def test_values(self):
        assert midplane_from_measurement(0.311, 0.123) == pytest.approx(0.188)
        assert midplane_from_measurement(0.123, 0.123) == 0.0
        assert midplane_from_measurement(0.302, 0.1215) == pytest.approx(0.1805)

    def test_warns_below_thickness(self):
        with pytest.warns(UserWarning, match="below the plate thickness"):
            midplane_from_measurement(0.1, 0.123)


class TestFitSlope:
    def test_single_record(self, plate):
        record = record_from_measurement(0.0101, 0.305, plate)
        model = fit_slope([record], plate)
        assert model.slope_K == pytest.approx(1.7464820235148516e-4, rel=1e-12)
        assert model.slope_K == pytest.approx(record.tau / record.intensity, rel=1e-15)

    def test_scaling_invariance(self):
        records = [CalibrationRecord(0.01, 0.2, 2e-6), CalibrationRecord(0.02, 0.38, 3.9e-6)]
        scaled = [CalibrationRecord(r.intensity * 3, r.u_max * 3, r.tau * 3) for r in records]
        assert fit_slope(records).slope_K == pytest.approx(fit_slope(scaled).slope_K)

    def test_duplicate_records_do_not_move_the_fit(self):
        record = CalibrationRecord(0.0101, 0.182, 1.764e-6)
        assert fit_slope([record]).slope_K == pytest.approx(
            fit_slope([record, record]).slope_K)

    def test_least_squares_through_origin(self):
        records = [
            CalibrationRecord(0.01, 0.1, 1.5e-6),
            CalibrationRecord(0.02, 0.2, 3.5e-6),
            CalibrationRecord(0.03, 0.3, 4.0e-6),
        ]
        intensities = np.array([r.intensity for r in records])
        taus = np.array([r.tau for r in records])
        expected = float(taus @ intensities / (intensities @ intensities))
        assert fit_slope(records).slope_K == pytest.approx(expected, rel=1e-14)

    def test_empty_records_rejected(self):
        with pytest.raises(InputError):
            fit_slope([])

    def test_nonpositive_intensity_rejected(self):
        with pytest.raises(InputError):
            fit_slope([CalibrationRecord(0.0, 0.1, 1e-6)])


class TestIntensityToMoment:
    def test_zero(self, cal):
        assert intensity_to_moment(0.0, cal) == 0.0

    def test_roundtrip_with_fit(self, cal):
        assert intensity_to_moment(0.0101, cal) == pytest.approx(1.76394684375e-6, rel=1e-12)

    def test_sign(self, cal):
        assert intensity_to_moment(0.005, cal, sign=-1) == -intensity_to_moment(0.005, cal)
        with pytest.raises(InputError):
            intensity_to_moment(0.005, cal, sign=0)

    def test_negative_intensity_rejected(self, cal):
        with pytest.raises(InputError):
            intensity_to_moment(-0.001, cal)


class TestLinearTemperatureSlope:
    def test_zero(self):
        assert linear_temperature_slope(0.0, 1.0, 0.123) == 0.0

    def test_representative_value(self):
        # 12 * tau / h^3 with alpha normalized to one.
        expected = 12 * 1.76394684375e-6 / 0.123**3
        assert linear_temperature_slope(1.76394684375e-6, 1.0, 0.123) == pytest.approx(expected)
        assert expected == pytest.approx(1.1375e-2, rel=1e-4)

    def test_moment_recovered_by_thickness_integral(self):
        # integral of alpha * T0 * x3^2 over the thickness reproduces tau.
        rng = np.random.default_rng(53)
        rule = gauss_rule(6)
        for _ in range(100):
            tau = rng.uniform(1e-8, 1e-4)
            alpha = rng.uniform(0.1, 30.0)
            h = rng.uniform(0.02, 0.5)
            slope = linear_temperature_slope(tau, alpha, h)
            pts, wts = rule.mapped(-h / 2, h / 2)
            back = float(wts @ (alpha * slope * pts**2))
            assert back == pytest.approx(tau, rel=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(InputError):
            linear_temperature_slope(1e-6, 0.0, 0.1)


class TestModelValidation:
    def test_slope_must_be_positive(self, plate):
        with pytest.raises(InputError):
            CalibrationModel((), 0.0, plate)

    def test_calibration_closes_with_solver(self, plate, cal):
        # Forward solve at the calibrated intensity, then invert the peak
        # displacement: the chain reproduces K * I.
        basis = TensorBasis(plate, 7)
        field = project_moment(basis, IntensityMap(0.0101), cal)
        sol = forward_solve(basis, field)
        center = eval_displacement(basis, sol.a, (4.0, 4.0))
        back = moment_from_max_displacement(center, plate.h, plate.L1, plate.L2)
        assert back == pytest.approx(cal.slope_K * 0.0101, rel=1e-9)
