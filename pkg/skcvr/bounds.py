import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Union

import numpy as np

from skcvr.errors import InvalidParameterError

if TYPE_CHECKING:
    from skcvr.curve import RateCurve

logger = logging.getLogger(__name__)

DEFAULT_ATTENUATION = 0.2  # dB / km
INFINITE_RATE = float("inf")

ArrayLike = Union[float, np.ndarray]


def _check_eta(eta: np.ndarray) -> None:
    if np.any(eta < 0.0) or np.any(eta > 1.0):
        raise InvalidParameterError("transmissivity must lie in [0, 1]")


def _finite_or_inf(values: np.ndarray, is_inf: np.ndarray) -> ArrayLike:
    out = np.where(is_inf, INFINITE_RATE, values)
    if out.ndim == 0:
        return float(out)
    return out


def plob(eta: ArrayLike) -> ArrayLike:
    """repeaterless bound -log2(1 - eta) of the pure-loss channel"""
    eta_arr = np.asarray(eta, dtype=float)
    _check_eta(eta_arr)
    is_inf = eta_arr >= 1.0
    safe = np.where(is_inf, 0.0, eta_arr)
    return _finite_or_inf(-np.log1p(-safe) / np.log(2.0), is_inf)


def nlink_bound(eta_total: ArrayLike, n_links: int) -> ArrayLike:
    """-log2(1 - eta^(1/N)) for a chain of N equal links"""
    if n_links < 1:
        raise InvalidParameterError("n_links must be >= 1, got {}".format(n_links))
    return plob(np.asarray(eta_total, dtype=float) ** (1.0 / n_links))


def unassisted_capacity(eta: ArrayLike) -> ArrayLike:
    """max(0, log2(eta / (1 - eta))), zero for eta <= 1/2"""
    eta_arr = np.asarray(eta, dtype=float)
    _check_eta(eta_arr)
    is_inf = eta_arr >= 1.0
    safe = np.where(is_inf, 0.5, eta_arr)
    with np.errstate(divide="ignore"):
        values = np.maximum(np.log2(safe) - np.log2(1.0 - safe), 0.0)
    return _finite_or_inf(values, is_inf)


def transmissivity(distance: ArrayLike, attenuation: float = DEFAULT_ATTENUATION) -> ArrayLike:
    if np.any(np.asarray(distance) < 0.0):
        raise InvalidParameterError("distance must be non-negative")
    eta = 10.0 ** (-attenuation * np.asarray(distance, dtype=float) / 10.0)
    return float(eta) if eta.ndim == 0 else eta


def distance_from_transmissivity(
    eta: ArrayLike, attenuation: float = DEFAULT_ATTENUATION
) -> ArrayLike:
    eta_arr = np.asarray(eta, dtype=float)
    if np.any(eta_arr <= 0.0) or np.any(eta_arr > 1.0):
        raise InvalidParameterError("transmissivity must lie in (0, 1]")
    dist = -10.0 * np.log10(eta_arr) / attenuation
    return float(dist) if dist.ndim == 0 else dist


@dataclass(frozen=True)
class ChannelModel:
    distance: float
    attenuation: float = DEFAULT_ATTENUATION

    def __post_init__(self):
        if self.distance < 0.0:
            raise InvalidParameterError("distance must be non-negative")
        if self.attenuation <= 0.0:
            raise InvalidParameterError("attenuation must be positive")

    @property
    def eta(self) -> float:
        return float(transmissivity(self.distance, self.attenuation))

    def split(self, n_links: int) -> "ChannelModel":
        return ChannelModel(self.distance / n_links, self.attenuation)


Bound = Union[str, Callable[[float], float]]


def crossing_distance(
    curve: "RateCurve", bound: Bound = "plob", attenuation: float = DEFAULT_ATTENUATION
) -> Optional[float]:
    """first parameter value where the rate climbs above the bound, linearly interpolated

    bound is either the name of a metadata column recorded on every point, or a function of the
    transmissivity at the point's distance.
    """
    xs = []
    gaps = []
    for point in curve:
        if isinstance(bound, str):
            value = float(point.metadata[bound])
        else:
            value = float(bound(float(transmissivity(point.parameter, attenuation))))
        xs.append(point.parameter)
        gaps.append(point.rate - value)

    for i, gap in enumerate(gaps):
        if gap >= 0.0:
            if i == 0:
                return xs[0]
            prev = gaps[i - 1]
            ratio = -prev / (gap - prev)
            return xs[i - 1] + ratio * (xs[i] - xs[i - 1])
    return None
