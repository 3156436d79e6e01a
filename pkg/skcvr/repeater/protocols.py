"""Concrete rate protocols swept along distance grids."""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional

from skcvr.bounds import DEFAULT_ATTENUATION, transmissivity
from skcvr.curve import RatePoint
from skcvr.errors import InvalidParameterError, check_unit_interval
from skcvr.fock.channels import DeviceImperfections
from skcvr.gaussian import KeyRateResult, Measurement, calibrate_excess_noise
from skcvr.repeater.config import ChainConfig, LinkConfig
from skcvr.repeater.cvqr import cvqr_key_rate
from skcvr.repeater.interface import RateProtocol
from skcvr.repeater.memoryless import (
    direct_transmission_rate,
    simple_repeater_key_rate,
    three_repeater_chain,
)

logger = logging.getLogger(__name__)

EXCESS_NOISE_REFERENCE_DISTANCE = 350.0  # km


def _key_point(distance: float, key: KeyRateResult) -> RatePoint:
    metadata = {
        "raw": key.raw,
        "mutual_information": key.mutual_information,
        "holevo": key.holevo,
    }
    return RatePoint(distance, key.clipped, key.probability, metadata)


def _env_variance(excess_noise: float, attenuation: float) -> float:
    """thermal variance that shows excess_noise on direct transmission at the reference distance"""
    if excess_noise == 0.0:
        return 1.0
    if excess_noise < 0.0:
        raise InvalidParameterError("excess noise must be >= 0, got {}".format(excess_noise))
    eta = float(transmissivity(EXCESS_NOISE_REFERENCE_DISTANCE, attenuation))
    return calibrate_excess_noise(excess_noise, eta).env_variance


def _check_node(
    layout: str, chi: float, transmissivity_b: float, amplitude_gain: float, cutoff: Optional[int]
) -> None:
    if layout not in ("asymmetric", "symmetric"):
        raise InvalidParameterError("unknown layout {}".format(layout))
    if not 0.0 <= chi < 1.0:
        raise InvalidParameterError("chi must be in [0, 1), got {}".format(chi))
    check_unit_interval("transmissivity_b", transmissivity_b)
    if amplitude_gain <= 0.0:
        raise InvalidParameterError(
            "amplitude gain must be positive, got {}".format(amplitude_gain)
        )
    if cutoff is not None and cutoff < 1:
        raise InvalidParameterError("cutoff must be >= 1")


@dataclass
class DirectTransmission(RateProtocol):
    """TMSV sent straight to Bob, modulation variance optimized per point"""

    beta: float = 0.95
    excess_noise: float = 0.0
    measurement: Measurement = Measurement.HETERODYNE
    attenuation: float = DEFAULT_ATTENUATION

    @property
    def n_links(self) -> int:
        return 1

    def _evaluate(self, distance: float, eta: float) -> RatePoint:
        env_variance = _env_variance(self.excess_noise, self.attenuation)
        key = direct_transmission_rate(
            eta, beta=self.beta, env_variance=env_variance, measurement=self.measurement
        )
        return _key_point(distance, key)


@dataclass
class MemorylessRepeater(RateProtocol):
    """single memoryless node; layout is "asymmetric" (sqrt(eta_A) g fixed) or "symmetric" """

    layout: str = "asymmetric"
    chi: float = 0.4
    transmissivity_b: float = 2.0 / 3.0
    amplitude_gain: float = 0.21
    beta: float = 0.95
    excess_noise: float = 0.0
    imperfections: DeviceImperfections = field(default_factory=DeviceImperfections)
    cutoff: Optional[int] = None
    attenuation: float = DEFAULT_ATTENUATION

    def __post_init__(self):
        _check_node(self.layout, self.chi, self.transmissivity_b, self.amplitude_gain, self.cutoff)
        if self.excess_noise < 0.0:
            raise InvalidParameterError("excess noise must be >= 0")

    @property
    def n_links(self) -> int:
        return 2

    def link(self, eta: float) -> LinkConfig:
        env_variance = _env_variance(self.excess_noise, self.attenuation)
        if self.layout == "symmetric":
            return LinkConfig.symmetric(
                eta,
                self.chi,
                env_variance=env_variance,
                imperfections=self.imperfections,
                cutoff=self.cutoff,
            )
        return LinkConfig.asymmetric(
            eta,
            self.chi,
            transmissivity_b=self.transmissivity_b,
            amplitude_gain=self.amplitude_gain,
            env_variance=env_variance,
            imperfections=self.imperfections,
            cutoff=self.cutoff,
        )

    def _evaluate(self, distance: float, eta: float) -> RatePoint:
        link = self.link(eta)
        point = _key_point(distance, simple_repeater_key_rate(link, self.beta))
        point.metadata["eta_a"] = link.eta_a
        point.metadata["eta_b"] = link.eta_b
        return point

    def describe(self) -> Dict[str, Any]:
        d = super().describe()
        d.update(asdict(self))
        return d


@dataclass
class ThreeRepeaterChain(RateProtocol):
    """two memoryless repeaters joined by a higher-level scissor, each covering half the distance"""

    layout: str = "asymmetric"
    chi: float = 0.2
    transmissivity_b: float = 2.0 / 3.0
    amplitude_gain: float = 0.21
    transmissivity_higher: float = 0.5
    beta: float = 0.95
    excess_noise: float = 0.0
    imperfections: DeviceImperfections = field(default_factory=DeviceImperfections)
    cutoff: Optional[int] = None
    attenuation: float = DEFAULT_ATTENUATION

    def __post_init__(self):
        _check_node(self.layout, self.chi, self.transmissivity_b, self.amplitude_gain, self.cutoff)
        check_unit_interval("transmissivity_higher", self.transmissivity_higher)
        if self.excess_noise < 0.0:
            raise InvalidParameterError("excess noise must be >= 0")

    @property
    def n_links(self) -> int:
        return 4

    def _evaluate(self, distance: float, eta: float) -> RatePoint:
        half = MemorylessRepeater(
            layout=self.layout,
            chi=self.chi,
            transmissivity_b=self.transmissivity_b,
            amplitude_gain=self.amplitude_gain,
            beta=self.beta,
            excess_noise=self.excess_noise,
            imperfections=self.imperfections,
            cutoff=self.cutoff,
            attenuation=self.attenuation,
        ).link(math.sqrt(eta))
        res = three_repeater_chain(half, half, self.beta, self.transmissivity_higher, self.cutoff)
        point = _key_point(distance, res.key)
        point.metadata["p_higher"] = res.p_higher
        point.metadata["p_lower"] = res.p_lower[0]
        return point

    def describe(self) -> Dict[str, Any]:
        d = super().describe()
        d.update(asdict(self))
        return d


@dataclass
class CVQuantumRepeater(RateProtocol):
    """NLA links with nested post-selected swaps; the rate column is the lower bound"""

    chain: ChainConfig = field(default_factory=ChainConfig)
    beta: float = 0.95
    measurement: Measurement = Measurement.HOMODYNE

    @property
    def attenuation(self) -> float:  # type: ignore[override]
        return self.chain.attenuation

    @property
    def n_links(self) -> int:
        return self.chain.n_links

    def _evaluate(self, distance: float, eta: float) -> RatePoint:
        res = cvqr_key_rate(self.chain, distance, self.beta, self.measurement)
        point = _key_point(distance, res.lower)
        point.metadata["upper"] = res.upper.clipped
        point.metadata["upper_raw"] = res.upper.raw
        point.metadata["p_nla"] = res.lower_chain.p_nla
        point.metadata["p_ps"] = res.lower_chain.p_ps[-1]
        point.metadata["grid_error"] = max(res.lower_chain.error_estimates, default=0.0)
        return point

    def describe(self) -> Dict[str, Any]:
        d = super().describe()
        d["chain"] = asdict(self.chain)
        d["measurement"] = self.measurement.name
        return d
