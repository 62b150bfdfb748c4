import pathlib

import pytest

from peenform import PlateSpec, fit_slope, record_from_measurement

DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "data"

# Nominal test article: 8 x 8 x 0.123 in, 6061-T6 sheet values.
NOMINAL = dict(L1=8.0, L2=8.0, h=0.123, E=1.0e7, v=0.33)


@pytest.fixture
def plate():
    return PlateSpec(**NOMINAL)


@pytest.fixture
def cal(plate):
    # One representative uniform-peen point: 0.305 in height at 0.0101A.
    return fit_slope([record_from_measurement(0.0101, 0.305, plate)], plate)


@pytest.fixture
def data_dir():
    return DATA_DIR
