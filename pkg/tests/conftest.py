import pytest

from geoflow import initial_data as idat
from geoflow import source_geometry as sg
from geoflow import target_geometry as tg


@pytest.fixture
def s2():
    return tg.make_target("s2")


@pytest.fixture
def s6():
    return tg.make_target("s6")


@pytest.fixture
def t2():
    return tg.make_target("t2")


@pytest.fixture
def line64():
    return sg.flat_metric(64)


@pytest.fixture
def square32():
    return sg.flat_metric((32, 32))


@pytest.fixture
def spin_wave_64(s2, line64):
    return idat.spin_wave(line64, s2)
