"""Memoryless single-node repeater and its extensions.

Alice keeps arm A of a TMSV and sends arm C to the node through eta_A. Bob splits a single photon
on T_B, keeps B and sends D through eta_B. The node mixes C and D on T_C and heralds on exactly
one click. E and F are the environment modes of the two channels.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from skcvr.errors import InvalidParameterError, TruncationWarning
from skcvr.fock.channels import apply_detector_imperfection, apply_loss, apply_source_imperfection
from skcvr.fock.gates import apply_beamsplitter
from skcvr.fock.measurement import partial_trace, project_pattern
from skcvr.fock.metrics import covariance_of
from skcvr.fock.state import (
    DensityOp,
    FockArray,
    State,
    as_density,
    make_fock,
    make_tmsv,
    tensor,
    vacuum,
)
from skcvr.gaussian import (
    KeyRateInputs,
    KeyRateResult,
    Measurement,
    devetak_winter,
    mutual_information_estimate,
    thermal_loss,
    tmsv_state,
)
from skcvr.optimize import OptimizationConfig, maximize_by_optimization, maximize_scalar_on_grid
from skcvr.repeater.config import LinkConfig
from skcvr.repeater.waiting import three_repeater_rate

logger = logging.getLogger(__name__)

CLOSED_FORM_TOLERANCE = 1e-14
CLOSED_FORM_MAX_TERMS = 400
CLOSED_FORM_TAIL_WARNING = 1e-8
DEFAULT_CIRCUIT_CUTOFF = 12
N_CLICK_PATTERNS = 2


@dataclass
class RepeaterOutcome:
    """single click-pattern state and the heralding probability over both patterns"""

    state: State
    probability: float

    def shared_state(self) -> DensityOp:
        """normalized state of Alice's and Bob's modes"""
        if self.state.n_modes == 2:
            rho = as_density(self.state)
        else:
            rho = partial_trace(self.state, list(range(2, self.state.n_modes)))
        return rho.normalized()


def _closed_form_terms(cfg: LinkConfig, cutoff: Optional[int]) -> int:
    x = (1.0 - cfg.eta_a) * cfg.chi**2
    if cutoff is not None:
        return cutoff
    if x == 0.0:
        return 0
    k = int(math.ceil(math.log(CLOSED_FORM_TOLERANCE) / math.log(x)))
    return min(max(k, 1), CLOSED_FORM_MAX_TERMS)


def simple_repeater_state(cfg: LinkConfig, cutoff: Optional[int] = None) -> RepeaterOutcome:
    """global output state of modes (A, B, E, F) for pure loss and ideal devices

    |psi> = sqrt((1 - chi^2) / 2) sum_k (1 - eta_A)^(k/2) [
        chi^k sqrt(eta_B (1 - T_B)) |k, 0, k, 0>
        + chi^(k+1) sqrt((k + 1) eta_A) (sqrt(T_B) |k+1, 1, k, 0>
                                         + sqrt((1 - eta_B)(1 - T_B)) |k+1, 0, k, 1>) ]
    cutoff bounds the number k of photons lost on Alice's side; by default it is chosen so that the
    dropped probability is negligible.
    """
    if not cfg.is_pure_loss():
        raise InvalidParameterError("the closed form needs pure loss and ideal devices")
    if cfg.transmissivity_c != 0.5:
        raise InvalidParameterError("the closed form assumes a balanced node beamsplitter")
    chi, eta_a, eta_b, t_b = cfg.chi, cfg.eta_a, cfg.eta_b, cfg.transmissivity_b
    k_max = _closed_form_terms(cfg, cutoff)

    k = np.arange(k_max + 1)
    decay = np.sqrt(1.0 - eta_a) ** k
    pref = math.sqrt(0.5 * (1.0 - chi**2))
    amps = np.zeros((k_max + 2, 2, k_max + 1, 2), dtype=complex)
    amps[k, 0, k, 0] = pref * decay * chi**k * math.sqrt(eta_b * (1.0 - t_b))
    excited = pref * decay * chi ** (k + 1) * np.sqrt((k + 1) * eta_a)
    amps[k + 1, 1, k, 0] = excited * math.sqrt(t_b)
    amps[k + 1, 0, k, 1] = excited * math.sqrt((1.0 - eta_b) * (1.0 - t_b))

    # closed-form norm over all k, from sum x^k and sum (k + 1) x^k
    x = (1.0 - eta_a) * chi**2
    full = (
        0.5
        * (1.0 - chi**2)
        * (
            eta_b * (1.0 - t_b) / (1.0 - x)
            + chi**2 * eta_a * (t_b + (1.0 - eta_b) * (1.0 - t_b)) / (1.0 - x) ** 2
        )
    )
    state = FockArray(amps)
    kept = state.norm2()
    tail = max(full - kept, 0.0) / full if full > 0.0 else 0.0
    if tail > CLOSED_FORM_TAIL_WARNING:
        warnings.warn(
            "memoryless output state drops {:.3e} of its norm at {} loss terms".format(
                tail, k_max + 1
            ),
            TruncationWarning,
            stacklevel=2,
        )
    logger.debug("memoryless closed form with {} loss terms, tail {:.3e}".format(k_max + 1, tail))
    return RepeaterOutcome(FockArray(amps, tail), N_CLICK_PATTERNS * kept)


def memoryless_circuit(cfg: LinkConfig, cutoff: int = DEFAULT_CIRCUIT_CUTOFF) -> RepeaterOutcome:
    """the repeater built gate by gate in Fock space, with thermal noise and device imperfections

    Returns the single click-pattern state of (A, B).
    """
    imperfections = cfg.imperfections
    # modes (A, C, B, D)
    state: State = tensor(make_tmsv(cfg.chi, cutoff), make_fock(1), vacuum([1]))
    if imperfections.source_efficiency < 1.0:
        state = apply_source_imperfection(state, 2, imperfections)
    state = apply_beamsplitter(state, (2, 3), cfg.transmissivity_b)
    rho = apply_loss(state, 1, cfg.eta_a, cfg.nbar)
    rho = apply_loss(rho, 3, cfg.eta_b, cfg.nbar)
    # detector loss commutes with the passive node, so the one-photon output box stays exact
    if not imperfections.is_ideal():
        rho = apply_detector_imperfection(rho, [1, 3], imperfections)
    tail = rho.tail
    mixed = apply_beamsplitter(rho, (1, 3), cfg.transmissivity_c, out_cutoffs=(1, 1))
    out, prob = project_pattern(mixed, {1: 0, 3: 1})
    assert isinstance(out, DensityOp)
    logger.debug("memoryless circuit: single pattern probability {:.6e}".format(prob))
    return RepeaterOutcome(DensityOp(out.matrix, out.cutoffs, tail), N_CLICK_PATTERNS * prob)


def repeater_outcome(cfg: LinkConfig, cutoff: Optional[int] = None) -> RepeaterOutcome:
    if cutoff is None:
        cutoff = cfg.cutoff
    if cfg.is_pure_loss() and cfg.transmissivity_c == 0.5:
        return simple_repeater_state(cfg, cutoff)
    return memoryless_circuit(cfg, DEFAULT_CIRCUIT_CUTOFF if cutoff is None else cutoff)


def _key_rate_of(rho: DensityOp, beta: float) -> KeyRateResult:
    cm = covariance_of(rho)
    inputs = KeyRateInputs(cm, beta, Measurement.HETERODYNE, bob_mode=1)
    return devetak_winter(inputs, mutual_info=mutual_information_estimate(cm))


def simple_repeater_key_rate(
    cfg: LinkConfig, beta: float = 0.95, cutoff: Optional[int] = None
) -> KeyRateResult:
    """K = P (beta I_AB - chi_EB) from the covariance matrix of the heralded state

    I_AB is the heterodyne estimate from the (a, b, c) entries; chi_EB is bounded by the Gaussian
    state with the same covariance matrix, Bob being the reference side.
    """
    outcome = repeater_outcome(cfg, cutoff)
    result = _key_rate_of(outcome.shared_state(), beta).scaled(outcome.probability)
    logger.debug(
        "memoryless key: P={:.4e} I={:.4e} chi={:.4e} K={:.4e}".format(
            result.probability, result.mutual_information, result.holevo, result.raw
        )
    )
    return result


def direct_transmission_rate(
    eta: float,
    nu: Optional[float] = None,
    beta: float = 0.95,
    env_variance: float = 1.0,
    measurement: Measurement = Measurement.HETERODYNE,
) -> KeyRateResult:
    """key rate of a TMSV sent straight through the channel, without a repeater

    When nu is not given the modulation variance is optimized on a log grid refined by SLSQP.
    """

    def rate_at(nu_: float) -> float:
        state = thermal_loss(tmsv_state(nu_), 1, eta, env_variance)
        return devetak_winter(KeyRateInputs(state, beta, measurement, bob_mode=1)).raw

    if nu is None:
        grid = list(np.linspace(-4.0, 4.0, 33))
        log_seed, _ = maximize_scalar_on_grid(lambda s: rate_at(1.0 + 10.0**s), grid)
        res = maximize_by_optimization(
            lambda x: rate_at(1.0 + 10.0 ** x[0]),
            np.array([log_seed]),
            [(-4.0, 4.0)],
            OptimizationConfig(finite_diff_step=1e-5),
        )
        nu = 1.0 + 10.0 ** float(res.x[0])
        logger.debug("direct transmission at eta={}: optimal nu={:.4f}".format(eta, nu))

    state = thermal_loss(tmsv_state(nu), 1, eta, env_variance)
    return devetak_winter(KeyRateInputs(state, beta, measurement, bob_mode=1))


@dataclass
class ThreeRepeaterResult:
    key: KeyRateResult
    rate: float
    p_higher: float
    p_lower: Sequence[float]


def three_repeater_chain(
    left: LinkConfig,
    right: LinkConfig,
    beta: float = 0.95,
    transmissivity: float = 0.5,
    cutoff: Optional[int] = None,
) -> ThreeRepeaterResult:
    """two memoryless repeaters joined by a higher-level one-photon scissor

    Bob's mode of the left repeater and Alice's arm of the right repeater meet on a beamsplitter
    and the higher node heralds one click. The rate is P_higher / Z_1(P_lower).
    """
    lower = [repeater_outcome(cfg, cutoff) for cfg in (left, right)]
    rho_left, rho_right = (o.shared_state() for o in lower)
    # modes (A, B, A', B')
    joint = tensor(rho_left, rho_right)
    mixed = apply_beamsplitter(joint, (1, 2), transmissivity, out_cutoffs=(1, 1))
    out, prob = project_pattern(mixed, {1: 0, 2: 1})
    assert isinstance(out, DensityOp)
    p_higher = N_CLICK_PATTERNS * prob
    p_lower = [o.probability for o in lower]
    rate = three_repeater_rate(p_higher, p_lower)
    key = _key_rate_of(out.normalized(), beta).scaled(rate)
    logger.debug(
        "three-repeater chain: P_higher={:.4e} P_lower={} R={:.4e}".format(p_higher, p_lower, rate)
    )
    return ThreeRepeaterResult(key, rate, p_higher, p_lower)
