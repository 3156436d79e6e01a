"""CV quantum repeater chain: NLA-distilled links joined by post-selected dual-homodyne swaps.

Every link distributes a TMSV whose lossy arm is amplified by a one-photon scissor at the node.
Neighbouring links are swapped by projecting the inner modes onto |gamma> and correcting the
outer modes with displacements linear in gamma. Outcomes are accepted inside |gamma| <= gamma_max.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from skcvr.bounds import transmissivity
from skcvr.errors import InvalidParameterError, NumericalFailure, check_unit_interval
from skcvr.fock.gates import apply_displacement
from skcvr.fock.measurement import (
    dual_homodyne_swap,
    partial_trace,
    single_mode_marginal,
    swap_density,
)
from skcvr.fock.metrics import covariance_of
from skcvr.fock.state import DensityOp, FockArray, combine_tails, report_tail
from skcvr.gaussian import (
    GaussianState,
    KeyRateInputs,
    KeyRateResult,
    Measurement,
    devetak_winter,
)
from skcvr.optimize import OptimizationConfig, OptimizationResult, maximize_with_budget
from skcvr.repeater.config import ChainConfig, PolarGrid
from skcvr.repeater.waiting import chain_rate

logger = logging.getLogger(__name__)

GRID_ERROR_TOLERANCE = 1e-3
PHASE_INVARIANCE_TOL = 1e-12


def nla_success_probability(chi: float, eta: float, gain: float) -> float:
    """(1 - chi^2)(chi^2 (eta g^2 + eta - 1) + 1) / ((g^2 + 1)((eta - 1) chi^2 + 1)^2)"""
    check_unit_interval("eta", eta)
    g2 = gain**2
    num = (1.0 - chi**2) * (chi**2 * (eta * g2 + eta - 1.0) + 1.0)
    return num / ((g2 + 1.0) * ((eta - 1.0) * chi**2 + 1.0) ** 2)


def cvqr_nla_state(chi: float, eta: float, gain: float, cutoff: int) -> Tuple[FockArray, float]:
    """TMSV through pure loss, amplified by a one-photon scissor, over modes (A, C, E)

    sqrt((1 - chi^2) / (g^2 + 1)) sum_n chi^n [ (1 - eta)^(n/2) |n, 0, n>
                                              + g sqrt(n eta) (1 - eta)^((n-1)/2) |n, 1, n - 1> ]
    Both heralding patterns are folded in, so the squared norm is P_NLA.
    """
    if not 0.0 <= chi < 1.0:
        raise InvalidParameterError("chi must be in [0, 1), got {}".format(chi))
    check_unit_interval("eta", eta)
    if gain <= 0.0:
        raise InvalidParameterError("gain must be positive, got {}".format(gain))
    if cutoff < 1:
        raise InvalidParameterError("cutoff must be >= 1, got {}".format(cutoff))

    pref = math.sqrt((1.0 - chi**2) / (gain**2 + 1.0))
    n = np.arange(cutoff + 1)
    amps = np.zeros((cutoff + 1, 2, cutoff + 1), dtype=complex)
    amps[n, 0, n] = pref * chi**n * np.sqrt(1.0 - eta) ** n
    m = n[1:]
    amps[m, 1, m - 1] = pref * gain * np.sqrt(m * eta) * chi**m * np.sqrt(1.0 - eta) ** (m - 1)

    p_nla = nla_success_probability(chi, eta, gain)
    state = FockArray(amps)
    tail = max(p_nla - state.norm2(), 0.0) / p_nla if p_nla > 0.0 else 0.0
    report_tail(tail, "NLA link state")
    return FockArray(amps, tail), p_nla


def nla_link_state(chi: float, eta: float, gain: float, cutoff: int) -> DensityOp:
    """normalized state of (A, C) after tracing out the channel environment"""
    state, _ = cvqr_nla_state(chi, eta, gain, cutoff)
    return partial_trace(state, [2]).normalized()


def reverse_modes(rho: DensityOp) -> DensityOp:
    """the same state with its mode order reversed, as seen from the other end of the chain"""
    n = rho.n_modes
    rows = list(reversed(range(n)))
    order = rows + [r + n for r in rows]
    return DensityOp.from_tensor(np.transpose(rho.tensor, order), rho.tail)


def _is_phase_invariant(marginal: np.ndarray) -> bool:
    off = marginal - np.diag(np.diag(marginal))
    return bool(np.abs(off).max(initial=0.0) < PHASE_INVARIANCE_TOL)


def postselection_probability(
    left: DensityOp,
    right: DensityOp,
    gamma_max: float,
    grid: Optional[PolarGrid] = None,
    left_mode: int = 1,
    right_mode: int = 0,
) -> float:
    """P_PS, the probability that the dual-homodyne outcome falls inside |gamma| <= gamma_max

    Only the marginals of the two measured modes enter. When both marginals are diagonal the
    integrand does not depend on the phase of gamma and the angular sum collapses to one node.
    """
    if grid is None:
        grid = PolarGrid()
    left_marginal = single_mode_marginal(left.normalized(), left_mode)
    right_marginal = single_mode_marginal(right.normalized(), right_mode)
    if _is_phase_invariant(left_marginal) and _is_phase_invariant(right_marginal):
        radii, weights = grid.radial(gamma_max)
        densities = [swap_density(left_marginal, right_marginal, r) for r in radii]
        return float(2.0 * np.pi * np.dot(weights, densities))
    gammas, weights = grid.nodes(gamma_max)
    densities = [swap_density(left_marginal, right_marginal, g) for g in gammas]
    return float(np.dot(weights, densities))


@dataclass
class SwapResult:
    """corrected output of a post-selected swap, averaged over the accepted region

    gains maps (Re gamma, Im gamma) to the conditional quadrature means that the corrective
    displacements remove. state is the averaged density operator when it was requested.
    """

    cm: GaussianState
    probability: float
    gains: np.ndarray
    error_estimate: float
    state: Optional[DensityOp] = None


def _correction(gains: np.ndarray, gamma: complex) -> np.ndarray:
    return gains @ np.array([gamma.real, gamma.imag])


def swap_with_postselection(
    left: DensityOp,
    right: DensityOp,
    gamma_max: float,
    grid: Optional[PolarGrid] = None,
    left_mode: int = 1,
    right_mode: int = 0,
    corrected_cutoff: Optional[int] = None,
    average_state: bool = False,
) -> SwapResult:
    """swap two states and average the corrected outputs over |gamma| <= gamma_max

    The gains are the weighted least-squares fit of the conditional means against gamma, which
    zeroes the means exactly for Gaussian inputs. corrected_cutoff bounds the last output mode of
    the averaged state.
    """
    if grid is None:
        grid = PolarGrid()
    left = left.normalized()
    right = right.normalized()
    gammas, weights = grid.nodes(gamma_max)

    masses = []
    xs = []
    means = []
    covs = []
    outputs = []
    for gamma, weight in zip(gammas, weights):
        out, density = dual_homodyne_swap(left, right, left_mode, right_mode, gamma)
        if density <= 0.0:
            continue
        moments = covariance_of(out)
        masses.append(weight * density)
        xs.append([gamma.real, gamma.imag])
        means.append(moments.mean)
        covs.append(moments.cov)
        outputs.append((gamma, weight, out))
    if len(masses) == 0:
        raise NumericalFailure("no accepted outcome carries probability inside the region")

    mass = np.array(masses)
    x = np.array(xs)
    mu = np.array(means)
    p_ps = math.fsum(masses)

    moment_x = (mass[:, None] * x).T @ x
    moment_mx = (mass[:, None] * mu).T @ x
    gains = moment_mx @ np.linalg.pinv(moment_x)

    residual = mu - x @ gains.T
    avg_mean = mass @ residual / p_ps
    second = np.einsum("i,ijk->jk", mass, np.array(covs))
    second += (mass[:, None] * residual).T @ residual
    cov = second / p_ps - np.outer(avg_mean, avg_mean)
    cm = GaussianState(avg_mean, 0.5 * (cov + cov.T))

    coarse = postselection_probability(left, right, gamma_max, grid.coarse(), left_mode, right_mode)
    error = abs(coarse - p_ps)
    logger.debug(
        "swap at gamma_max={}: P_PS={:.6e}, grid error {:.2e}".format(gamma_max, p_ps, error)
    )
    if error > GRID_ERROR_TOLERANCE:
        logger.warning(
            "post-selection integral at gamma_max={} changes by {:.2e} on a coarser grid; "
            "increase the grid resolution".format(gamma_max, error)
        )

    state = None
    if average_state:
        state = _average_corrected(outputs, gains, corrected_cutoff, p_ps)
    return SwapResult(cm, p_ps, gains, error, state)


def _average_corrected(
    outputs: Sequence[Tuple[complex, float, DensityOp]],
    gains: np.ndarray,
    corrected_cutoff: Optional[int],
    p_ps: float,
) -> DensityOp:
    accumulated: Optional[np.ndarray] = None
    cutoffs: Tuple[int, ...] = ()
    lost = 0.0
    input_tail = 0.0
    for gamma, weight, out in outputs:
        shift = _correction(gains, gamma)
        corrected = out
        for mode in range(out.n_modes):
            beta = -0.5 * complex(shift[2 * mode], shift[2 * mode + 1])
            out_cutoff = None
            if mode == out.n_modes - 1 and corrected_cutoff is not None:
                out_cutoff = corrected_cutoff
            displaced = apply_displacement(corrected, mode, beta, out_cutoff)
            assert isinstance(displaced, DensityOp)
            corrected = displaced
        contribution = weight * corrected.matrix
        accumulated = contribution if accumulated is None else accumulated + contribution
        cutoffs = corrected.cutoffs
        lost = max(lost, 1.0 - corrected.trace() / out.trace())
        input_tail = out.tail
    assert accumulated is not None
    report_tail(lost, "corrective displacement")
    return DensityOp(accumulated / p_ps, cutoffs, combine_tails(input_tail, lost))


@dataclass
class ChainBound:
    """state and probabilities of a nested chain, one entry per swapping round from the links up"""

    cm: GaussianState
    p_nla: float
    p_ps: List[float]
    rate: float
    error_estimates: List[float] = field(default_factory=list)


def nested_chain(chain: ChainConfig, eta_link: float, upper: bool = False) -> ChainBound:
    """2^n links swapped level by level

    The lower bound carries the corrected state averaged over the accepted region from one level to
    the next. The upper bound carries the gamma = 0 conditional state and uses the post-selection
    probability at chain.upper_gamma_max for every level.
    """
    assert chain.gamma_max is not None
    link = nla_link_state(chain.chi, eta_link, chain.gain, chain.cutoff)
    p_nla = nla_success_probability(chain.chi, eta_link, chain.gain)

    left = link
    p_ps: List[float] = []
    errors: List[float] = []
    cm: Optional[GaussianState] = None
    for level in range(chain.n_levels):
        right = reverse_modes(left)
        last = level == chain.n_levels - 1
        if upper:
            p_ps.append(postselection_probability(left, right, chain.upper_gamma_max, chain.grid))
            out, _ = dual_homodyne_swap(left, right, 1, 0, 0.0)
            left = out.normalized()
            cm = covariance_of(left)
            errors.append(0.0)
        else:
            res = swap_with_postselection(
                left,
                right,
                chain.gamma_max[level],
                chain.grid,
                corrected_cutoff=chain.corrected_cutoff,
                average_state=not last,
            )
            p_ps.append(res.probability)
            errors.append(res.error_estimate)
            cm = res.cm
            if res.state is not None:
                left = res.state.normalized()
    assert cm is not None

    # swaps between neighbouring links carry index n - 1
    rate = chain_rate(p_nla, list(reversed(p_ps)))
    logger.debug(
        "{} bound for {} links: P_NLA={:.4e} P_PS={} R={:.4e}".format(
            "upper" if upper else "lower", chain.n_links, p_nla, p_ps, rate
        )
    )
    return ChainBound(cm, p_nla, p_ps, rate, errors)


def chain_key_rate(
    bound: ChainBound,
    beta: float = 0.95,
    measurement: Measurement = Measurement.HOMODYNE,
) -> KeyRateResult:
    """R_rep (beta I_AB - chi_EB) with reverse reconciliation on the chain's end-to-end state"""
    inputs = KeyRateInputs(bound.cm, beta, measurement, bob_mode=1)
    return devetak_winter(inputs).scaled(bound.rate)


@dataclass
class CVQRResult:
    lower: KeyRateResult
    upper: KeyRateResult
    lower_chain: ChainBound
    upper_chain: ChainBound


def cvqr_key_rate(
    chain: ChainConfig,
    distance: float,
    beta: float = 0.95,
    measurement: Measurement = Measurement.HOMODYNE,
) -> CVQRResult:
    """lower and upper key-rate bounds of the chain spread evenly over distance km"""
    eta_link = float(transmissivity(distance / chain.n_links, chain.attenuation))
    lower_chain = nested_chain(chain, eta_link, upper=False)
    upper_chain = nested_chain(chain, eta_link, upper=True)
    return CVQRResult(
        chain_key_rate(lower_chain, beta, measurement),
        chain_key_rate(upper_chain, beta, measurement),
        lower_chain,
        upper_chain,
    )


def optimize_chain(
    chain: ChainConfig,
    distance: float,
    beta: float = 0.95,
    measurement: Measurement = Measurement.HOMODYNE,
    gain_range: Tuple[float, float] = (0.5, 10.0),
    chi_range: Tuple[float, float] = (0.01, 0.9),
    config: Optional[OptimizationConfig] = None,
    n_trial_budget: int = 3,
) -> Tuple[ChainConfig, OptimizationResult]:
    """tune (g, chi) on the cheap upper-bound chain; the result keeps every other setting"""
    eta_link = float(transmissivity(distance / chain.n_links, chain.attenuation))

    def configured(x: np.ndarray) -> ChainConfig:
        return ChainConfig(
            n_links=chain.n_links,
            chi=float(x[1]),
            gain=float(x[0]),
            cutoff=chain.cutoff,
            corrected_cutoff=chain.corrected_cutoff,
            gamma_max=chain.gamma_max,
            upper_gamma_max=chain.upper_gamma_max,
            grid=chain.grid,
            attenuation=chain.attenuation,
        )

    def objective(x: np.ndarray) -> float:
        bound = nested_chain(configured(x), eta_link, upper=True)
        return chain_key_rate(bound, beta, measurement).raw

    seed = np.array([chain.gain, chain.chi])
    result = maximize_with_budget(
        objective, seed, [gain_range, chi_range], config=config, n_trial_budget=n_trial_budget
    )
    logger.debug("optimized chain (g, chi) = {} with raw key {:.4e}".format(result.x, result.value))
    return configured(result.x), result
