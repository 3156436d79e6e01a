import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from skcvr.errors import InvalidParameterError, check_unit_interval
from skcvr.fock.gates import apply_mode_operator
from skcvr.fock.state import DensityOp, State, as_density, combine_tails, report_tail

logger = logging.getLogger(__name__)


def _log_binom(n: np.ndarray, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


@dataclass
class KrausChannel:
    """single-mode channel rho -> sum_l A_l rho A_l^dag acting on target_mode"""

    operators: List[np.ndarray]
    target_mode: int
    label: str
    out_cutoff: int = field(init=False)

    def __post_init__(self):
        assert len(self.operators) > 0
        self.out_cutoff = self.operators[0].shape[0] - 1
        completeness = sum(op.conj().T @ op for op in self.operators)
        excess = np.linalg.eigvalsh(completeness).max() - 1.0
        if excess > 1e-8:
            raise InvalidParameterError(
                "channel {} is trace increasing by {:.3e}".format(self.label, excess)
            )

    def apply(self, state: State) -> DensityOp:
        rho = as_density(state)
        matrix: Optional[np.ndarray] = None
        cutoffs = rho.cutoffs
        for op in self.operators:
            term = apply_mode_operator(rho, [self.target_mode], op, [self.out_cutoff])
            assert isinstance(term, DensityOp)
            matrix = term.matrix if matrix is None else matrix + term.matrix
            cutoffs = term.cutoffs
        out = DensityOp(matrix, cutoffs)  # type: ignore[arg-type]
        leak = max(rho.trace() - out.trace(), 0.0)
        if leak > 0.0:
            report_tail(leak, "channel {}".format(self.label))
        return DensityOp(out.matrix, out.cutoffs, combine_tails(rho.tail, leak))


def pure_loss_channel(eta: float, mode: int, cutoff: int) -> KrausChannel:
    """A_l[n - l, n] = sqrt(C(n, l)) eta^((n - l) / 2) (1 - eta)^(l / 2)"""
    check_unit_interval("eta", eta)
    n = np.arange(cutoff + 1)
    operators = []
    for n_lost in range(cutoff + 1):
        op = np.zeros((cutoff + 1, cutoff + 1))
        cols = n[n >= n_lost]
        coef = np.exp(0.5 * _log_binom(cols, n_lost))
        kept = eta ** (0.5 * (cols - n_lost))
        op[cols - n_lost, cols] = coef * kept * (1.0 - eta) ** (0.5 * n_lost)
        operators.append(op)
    return KrausChannel(operators, mode, "pure_loss({})".format(eta))


def amplifier_channel(gain: float, mode: int, cutoff: int) -> KrausChannel:
    """quantum-limited amplifier; components above cutoff are dropped"""
    if gain < 1.0:
        raise InvalidParameterError("amplifier gain must be >= 1, got {}".format(gain))
    n = np.arange(cutoff + 1)
    operators = []
    for k in range(cutoff + 1):
        op = np.zeros((cutoff + 1, cutoff + 1))
        cols = n[n + k <= cutoff]
        coef = np.exp(0.5 * _log_binom(cols + k, k))
        op[cols + k, cols] = coef * gain ** (-0.5 * (cols + 1)) * (1.0 - 1.0 / gain) ** (0.5 * k)
        operators.append(op)
        if gain == 1.0:
            break
    return KrausChannel(operators, mode, "amplifier({})".format(gain))


def thermal_loss_channels(eta: float, nbar: float, mode: int, cutoff: int) -> List[KrausChannel]:
    """thermal loss = pure loss of eta / G followed by amplification G = 1 + (1 - eta) nbar"""
    check_unit_interval("eta", eta)
    if nbar < 0.0:
        raise InvalidParameterError("nbar must be non-negative, got {}".format(nbar))
    if nbar == 0.0:
        return [pure_loss_channel(eta, mode, cutoff)]
    gain = 1.0 + (1.0 - eta) * nbar
    return [pure_loss_channel(eta / gain, mode, cutoff), amplifier_channel(gain, mode, cutoff)]


def apply_loss(rho: State, mode: int, eta: float, nbar: float = 0.0) -> DensityOp:
    out = as_density(rho)
    if eta == 1.0 and nbar == 0.0:
        return out
    for channel in thermal_loss_channels(eta, nbar, mode, out.cutoffs[mode]):
        out = channel.apply(out)
    return out


def click_probability(nbar_dark: float, detector_efficiency: float) -> float:
    """probability that a vacuum-illuminated detector clicks"""
    m = (1.0 - detector_efficiency) * nbar_dark
    return m / (1.0 + m)


def dark_count_mean_photons(dark_count_probability: float, detector_efficiency: float) -> float:
    """thermal occupation of the detector loss port reproducing a dark-count probability"""
    check_unit_interval("dark_count_probability", dark_count_probability)
    check_unit_interval("detector_efficiency", detector_efficiency)
    if dark_count_probability == 0.0:
        return 0.0
    if detector_efficiency == 1.0 or dark_count_probability == 1.0:
        raise InvalidParameterError(
            "dark counts need a lossy detector and a click probability below one"
        )
    p = dark_count_probability
    return p / ((1.0 - p) * (1.0 - detector_efficiency))


@dataclass(frozen=True)
class DeviceImperfections:
    """source efficiency, detector efficiency and dark-count probability of a device"""

    source_efficiency: float = 1.0
    detector_efficiency: float = 1.0
    dark_count_probability: float = 0.0

    def __post_init__(self):
        check_unit_interval("source_efficiency", self.source_efficiency)
        check_unit_interval("detector_efficiency", self.detector_efficiency)
        check_unit_interval("dark_count_probability", self.dark_count_probability)

    @property
    def dark_count_nbar(self) -> float:
        return dark_count_mean_photons(self.dark_count_probability, self.detector_efficiency)

    def is_ideal(self) -> bool:
        return (
            self.source_efficiency == 1.0
            and self.detector_efficiency == 1.0
            and self.dark_count_probability == 0.0
        )


def apply_source_imperfection(
    state: State, mode: int, imperfections: DeviceImperfections
) -> DensityOp:
    return apply_loss(state, mode, imperfections.source_efficiency)


def apply_detector_imperfection(
    state: State, modes: Sequence[int], imperfections: DeviceImperfections
) -> DensityOp:
    """detector loss with a thermal loss port modelling dark counts, applied before projection"""
    out = as_density(state)
    nbar = imperfections.dark_count_nbar
    for mode in modes:
        out = apply_loss(out, mode, imperfections.detector_efficiency, nbar)
    return out


Stage = Callable[[DensityOp], DensityOp]


def imperfection_wrap(
    stage: Stage,
    imperfections: DeviceImperfections,
    source_modes: Sequence[int] = (),
    detector_modes: Sequence[int] = (),
) -> Stage:
    """compose a stage with source loss before it and the detector model after it

    detector_modes index the modes of the stage's output.
    """

    def wrapped(rho: DensityOp) -> DensityOp:
        for mode in source_modes:
            rho = apply_source_imperfection(rho, mode, imperfections)
        rho = stage(rho)
        return apply_detector_imperfection(rho, detector_modes, imperfections)

    return wrapped
