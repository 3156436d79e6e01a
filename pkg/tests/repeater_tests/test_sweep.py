import numpy as np
import pytest

from skcvr.curve import RateCurve
from skcvr.errors import InvalidParameterError
from skcvr.repeater import (
    DirectTransmission,
    MemorylessRepeater,
    SweepConfig,
    sweep_rate_vs_distance,
)


def test_sweep_keeps_grid_order():
    distances = [60.0, 10.0, 30.0]
    curve = sweep_rate_vs_distance(DirectTransmission(), distances)
    np.testing.assert_equal(curve.column("parameter"), distances)
    rates = curve.column("rate")
    assert rates[1] > rates[2] > rates[0]


def test_parallel_sweep_matches_serial():
    protocol = MemorylessRepeater()
    distances = [100.0, 200.0, 300.0, 400.0]
    serial = sweep_rate_vs_distance(protocol, distances)
    parallel = sweep_rate_vs_distance(protocol, distances, SweepConfig(n_process=2))
    np.testing.assert_equal(parallel.column("parameter"), distances)
    np.testing.assert_allclose(parallel.column("rate"), serial.column("rate"), rtol=1e-9)


def test_empty_grid():
    curve = sweep_rate_vs_distance(DirectTransmission(), [])
    assert isinstance(curve, RateCurve)
    assert len(curve) == 0


def test_rates_below_bound():
    distances = np.linspace(10.0, 200.0, 5)
    for protocol in [DirectTransmission(), MemorylessRepeater()]:
        curve = sweep_rate_vs_distance(protocol, distances)
        for point in curve:
            assert point.rate >= 0.0
            assert point.rate <= point.metadata["nlink_bound"] + 1e-9


def test_sweep_config_is_validated():
    with pytest.raises(InvalidParameterError):
        SweepConfig(n_process=0)


if __name__ == "__main__":
    test_parallel_sweep_matches_serial()
