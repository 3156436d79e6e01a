import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from skcvr.bounds import DEFAULT_ATTENUATION
from skcvr.errors import InvalidParameterError, check_unit_interval
from skcvr.fock.channels import DeviceImperfections

# rough optimum of the post-selection radius per nesting level, base level first
DEFAULT_GAMMA_MAX: Dict[int, List[float]] = {
    2: [0.5],
    4: [0.2, 0.45],
    8: [0.06, 0.15, 0.4],
}


@dataclass
class LinkConfig:
    """one memoryless repeater node between Alice and Bob

    Alice's TMSV arm C crosses the channel eta_a to the node. Bob's single photon is split by T_B,
    the reflected part D crosses eta_b to the node, and C and D meet on T_C before two detectors.
    """

    eta_a: float = 1.0
    eta_b: float = 1.0
    transmissivity_b: float = 0.5
    transmissivity_c: float = 0.5
    chi: float = 0.4
    env_variance: float = 1.0
    imperfections: DeviceImperfections = field(default_factory=DeviceImperfections)
    cutoff: Optional[int] = None

    def __post_init__(self):
        check_unit_interval("eta_a", self.eta_a)
        check_unit_interval("eta_b", self.eta_b)
        check_unit_interval("transmissivity_b", self.transmissivity_b)
        check_unit_interval("transmissivity_c", self.transmissivity_c)
        if not 0.0 <= self.chi < 1.0:
            raise InvalidParameterError("chi must be in [0, 1), got {}".format(self.chi))
        if self.env_variance < 1.0:
            raise InvalidParameterError(
                "environment variance must be >= 1, got {}".format(self.env_variance)
            )
        if self.cutoff is not None and self.cutoff < 1:
            raise InvalidParameterError("cutoff must be >= 1")

    @property
    def eta(self) -> float:
        return self.eta_a * self.eta_b

    @property
    def nbar(self) -> float:
        return 0.5 * (self.env_variance - 1.0)

    @property
    def gain(self) -> float:
        """sqrt(T_B / (eta_B (1 - T_B))), the gain of the node for pure loss"""
        if self.eta_b == 0.0 or self.transmissivity_b == 1.0:
            return math.inf
        return math.sqrt(self.transmissivity_b / (self.eta_b * (1.0 - self.transmissivity_b)))

    def is_pure_loss(self) -> bool:
        return self.env_variance == 1.0 and self.imperfections.is_ideal()

    @classmethod
    def symmetric(cls, eta: float, chi: float = 0.4, **kwargs) -> "LinkConfig":
        """node half way, T_B = T_C = 1/2"""
        check_unit_interval("eta", eta)
        half = math.sqrt(eta)
        return cls(eta_a=half, eta_b=half, chi=chi, **kwargs)

    @classmethod
    def asymmetric(
        cls,
        eta: float,
        chi: float = 0.4,
        transmissivity_b: float = 2.0 / 3.0,
        amplitude_gain: float = 0.21,
        **kwargs
    ) -> "LinkConfig":
        """node placed so that sqrt(eta_A) g equals amplitude_gain

        eta_A / eta_B = amplitude_gain^2 (1 - T_B) / T_B; eta_B is capped at one.
        """
        check_unit_interval("eta", eta)
        check_unit_interval("transmissivity_b", transmissivity_b)
        ratio = amplitude_gain**2 * (1.0 - transmissivity_b) / transmissivity_b
        eta_b = min(math.sqrt(eta / ratio), 1.0) if ratio > 0.0 else 1.0
        eta_a = eta / eta_b
        if eta_a > 1.0:
            raise InvalidParameterError(
                "amplitude gain {} cannot be reached at eta {}".format(amplitude_gain, eta)
            )
        return cls(eta_a=eta_a, eta_b=eta_b, chi=chi, transmissivity_b=transmissivity_b, **kwargs)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "LinkConfig":
        d = dict(d)
        if "imperfections" in d and isinstance(d["imperfections"], dict):
            d["imperfections"] = DeviceImperfections(**d["imperfections"])
        return cls(**d)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class PolarGrid:
    """Gauss-Legendre radial nodes times uniform angles over the disc |gamma| <= gamma_max"""

    n_radial: int = 32
    n_angular: int = 16

    def __post_init__(self):
        if self.n_radial < 1 or self.n_angular < 1:
            raise InvalidParameterError("grid needs at least one node per axis")

    def radial(self, gamma_max: float):
        """radii and weights of int_0^gamma_max f(r) r dr"""
        x, w = np.polynomial.legendre.leggauss(self.n_radial)
        radii = 0.5 * gamma_max * (x + 1.0)
        weights = 0.5 * gamma_max * w * radii
        return radii, weights

    def nodes(self, gamma_max: float):
        """complex nodes and weights of the disc integral d^2 gamma"""
        if gamma_max <= 0.0:
            raise InvalidParameterError("gamma_max must be positive, got {}".format(gamma_max))
        radii, radial_weights = self.radial(gamma_max)
        angles = 2.0 * np.pi * np.arange(self.n_angular) / self.n_angular
        gammas = np.outer(radii, np.exp(1j * angles)).reshape(-1)
        weights = np.repeat(radial_weights * 2.0 * np.pi / self.n_angular, self.n_angular)
        return gammas, weights

    def coarse(self) -> "PolarGrid":
        return PolarGrid(max(self.n_radial // 2, 1), max(self.n_angular // 2, 1))


@dataclass
class ChainConfig:
    """NLA links joined by nested dual-homodyne swaps with post-selection

    Each link distributes a TMSV of squeezing chi whose lossy arm is amplified by a one-photon
    scissor of gain g. gamma_max lists the post-selection radius of each swapping level, starting
    from the swaps between neighbouring links.
    """

    n_links: int = 2
    chi: float = 0.3
    gain: float = 2.0
    cutoff: int = 10
    corrected_cutoff: int = 6
    gamma_max: Optional[List[float]] = None
    upper_gamma_max: float = 0.5
    grid: PolarGrid = field(default_factory=PolarGrid)
    attenuation: float = DEFAULT_ATTENUATION

    def __post_init__(self):
        if self.n_links < 2 or self.n_links & (self.n_links - 1) != 0:
            raise InvalidParameterError(
                "nested chains need a power of two >= 2 links, got {}".format(self.n_links)
            )
        if not 0.0 <= self.chi < 1.0:
            raise InvalidParameterError("chi must be in [0, 1), got {}".format(self.chi))
        if self.gain <= 0.0:
            raise InvalidParameterError("gain must be positive, got {}".format(self.gain))
        if self.cutoff < 1 or self.corrected_cutoff < 1:
            raise InvalidParameterError("cutoffs must be >= 1")
        if self.gamma_max is None:
            if self.n_links not in DEFAULT_GAMMA_MAX:
                raise InvalidParameterError(
                    "no default post-selection radii for {} links".format(self.n_links)
                )
            self.gamma_max = list(DEFAULT_GAMMA_MAX[self.n_links])
        if len(self.gamma_max) != self.n_levels:
            raise InvalidParameterError(
                "expected {} post-selection radii, got {}".format(
                    self.n_levels, len(self.gamma_max)
                )
            )

    @property
    def n_levels(self) -> int:
        return int(round(math.log2(self.n_links)))

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ChainConfig":
        d = dict(d)
        if "grid" in d and isinstance(d["grid"], dict):
            d["grid"] = PolarGrid(**d["grid"])
        return cls(**d)
