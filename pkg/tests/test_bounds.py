import math

import numpy as np
import pytest
from scipy.optimize import brentq

from skcvr.bounds import (
    ChannelModel,
    crossing_distance,
    distance_from_transmissivity,
    nlink_bound,
    plob,
    transmissivity,
    unassisted_capacity,
)
from skcvr.curve import RateCurve, RatePoint
from skcvr.errors import InvalidParameterError


def test_plob_values():
    np.testing.assert_allclose(plob(0.5), 1.0, rtol=1e-15)
    assert plob(0.0) == 0.0
    assert plob(1.0) == float("inf")
    etas = np.array([1e-4, 1e-2, 0.3])
    np.testing.assert_allclose(plob(etas), -np.log2(1.0 - etas))


def test_plob_small_eta_asymptote():
    # -log2(1 - eta) ~ 1.44 eta
    eta = 1e-9
    np.testing.assert_allclose(plob(eta), eta / math.log(2.0), rtol=1e-8)


def test_nlink_bound():
    np.testing.assert_allclose(nlink_bound(0.5, 1), plob(0.5))
    np.testing.assert_allclose(nlink_bound(0.25, 2), plob(0.5))
    # more links never lower the bound
    for eta in (1e-3, 0.1, 0.7):
        values = [float(nlink_bound(eta, n)) for n in (1, 2, 4, 8)]
        assert all(np.diff(values) > 0.0)
    with pytest.raises(InvalidParameterError):
        nlink_bound(0.5, 0)


def test_unassisted_capacity():
    assert unassisted_capacity(0.5) == 0.0
    assert unassisted_capacity(0.3) == 0.0
    np.testing.assert_allclose(unassisted_capacity(0.8), 2.0)
    assert unassisted_capacity(1.0) == float("inf")
    with pytest.raises(InvalidParameterError):
        unassisted_capacity(1.2)


def test_transmissivity_roundtrip():
    np.testing.assert_allclose(transmissivity(50.0), 0.1)
    np.testing.assert_allclose(transmissivity(100.0, attenuation=0.1), 0.1)
    np.testing.assert_allclose(distance_from_transmissivity(1e-3), 150.0)
    assert transmissivity(0.0) == 1.0
    with pytest.raises(InvalidParameterError):
        transmissivity(-1.0)
    with pytest.raises(InvalidParameterError):
        distance_from_transmissivity(0.0)


def test_channel_model_split():
    channel = ChannelModel(100.0)
    half = channel.split(2)
    np.testing.assert_allclose(half.eta**2, channel.eta)
    with pytest.raises(InvalidParameterError):
        ChannelModel(10.0, attenuation=0.0)


def test_crossing_distance():
    # a rate decaying as sqrt(eta) overtakes the bound
    def rate(d):
        return 0.1 * math.sqrt(float(transmissivity(d)))

    points = []
    for d in np.linspace(10.0, 300.0, 59):
        eta = float(transmissivity(d))
        points.append(RatePoint(float(d), rate(d), 1.0, {"plob": float(plob(eta))}))
    curve = RateCurve(points)
    crossing = crossing_distance(curve)
    assert crossing is not None
    exact = brentq(lambda d: rate(d) - float(plob(transmissivity(d))), 10.0, 300.0)
    assert 100.0 < exact < 130.0
    np.testing.assert_allclose(crossing, exact, atol=2.0)

    below = RateCurve([RatePoint(d, 0.0, 1.0, {"plob": 1.0}) for d in (0.0, 10.0)])
    assert crossing_distance(below) is None


def test_crossing_distance_interpolates():
    curve = RateCurve(
        [
            RatePoint(0.0, 0.0, 1.0, {"plob": 1.0}),
            RatePoint(10.0, 2.0, 1.0, {"plob": 1.0}),
        ]
    )
    np.testing.assert_allclose(crossing_distance(curve), 5.0)
    linear = crossing_distance(curve, bound=lambda eta: 1.0)
    np.testing.assert_allclose(linear, 5.0)


if __name__ == "__main__":
    test_crossing_distance()
