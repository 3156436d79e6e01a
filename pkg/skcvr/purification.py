"""Purification of TMSV entanglement by total-photon-number measurements on m rails.

Alice holds k photons spread over m rails (a code word of the code (k, m)) and Bob counts the
photons that arrived. Single-shot purification keeps only j = k. The iterative protocol repeats
the count on the first m - n + 1 rails at round n until both sides agree.
"""
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom, nbinom

from skcvr.bounds import DEFAULT_ATTENUATION, nlink_bound, plob
from skcvr.curve import RatePoint
from skcvr.errors import InvalidParameterError, TruncationWarning, check_unit_interval
from skcvr.fock.channels import apply_loss
from skcvr.fock.gates import apply_beamsplitter
from skcvr.fock.measurement import project_total_photons
from skcvr.fock.metrics import fidelity, purity, reduced_entropy, rci
from skcvr.fock.state import DensityOp, FockArray, State, as_density, make_tmsv, tensor, vacuum
from skcvr.gaussian import g_function
from skcvr.repeater.interface import RateProtocol

logger = logging.getLogger(__name__)

ITERATIVE_MAX_RAILS = 9
ITERATIVE_MAX_PHOTONS = 12
ORACLE_MAX_RAILS = 3
DEFAULT_SERIES_TOLERANCE = 1e-12


def _check_code(k: int, m: int) -> None:
    if k < 0:
        raise InvalidParameterError("photon number k must be >= 0, got {}".format(k))
    if m < 1:
        raise InvalidParameterError("rail number m must be >= 1, got {}".format(m))


def code_dim(k: int, m: int) -> int:
    """d(k, m) = C(k + m - 1, k), the number of ways to put k photons on m rails"""
    _check_code(k, m)
    return math.comb(k + m - 1, k)


def log2_code_dim(k, m: int):
    """log2 d(k, m) through log-gamma, vectorized over k"""
    k = np.asarray(k, dtype=float)
    return (gammaln(k + m) - gammaln(k + 1) - gammaln(m)) / np.log(2.0)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class CodeSpec:
    """k photons on m rails; code words are ordered lexicographically descending"""

    k: int
    m: int

    def __post_init__(self):
        _check_code(self.k, self.m)

    @property
    def dim(self) -> int:
        return code_dim(self.k, self.m)

    def code_words(self) -> List[Tuple[int, ...]]:
        return list(_compositions(self.k, self.m))

    def anticorrelated_words(self) -> List[Tuple[int, ...]]:
        """(k - n_1, ..., k - n_m), the rails of the linear-optics resource state"""
        return [tuple(self.k - n for n in word) for word in self.code_words()]

    def resource_coefficients(self) -> np.ndarray:
        """f_mu = prod_i C(k, n_i)^(-1/2) in code-word order"""
        return np.array(
            [math.prod(math.comb(self.k, n) for n in word) ** -0.5 for word in self.code_words()]
        )


@dataclass(frozen=True)
class OutcomeChain:
    """photon counts (k_s, j_s) of Alice and Bob at each round s = 1..n"""

    ks: Tuple[int, ...]
    js: Tuple[int, ...]

    def __post_init__(self):
        if len(self.ks) != len(self.js) or len(self.ks) == 0:
            raise InvalidParameterError("a chain needs the same positive number of k and j")

    @property
    def n_rounds(self) -> int:
        return len(self.ks)

    @property
    def is_success(self) -> bool:
        return self.ks[-1] == self.js[-1]

    def is_valid(self) -> bool:
        n = self.n_rounds
        for s in range(n):
            if self.js[s] < 0 or self.js[s] > self.ks[s]:
                return False
            if s < n - 1:
                if self.ks[s] <= self.js[s]:
                    return False
                if self.ks[s + 1] > self.ks[s] or self.js[s + 1] > self.js[s]:
                    return False
                if self.ks[s] - self.ks[s + 1] < self.js[s] - self.js[s + 1]:
                    return False
        return True

    def validate(self) -> None:
        if not self.is_valid() or not self.is_success:
            raise InvalidParameterError("{} is not a successful outcome chain".format(self))

    def probability(self, m: int, eta: float) -> float:
        """probability of the whole sequence of outcomes given Alice's offline k_1"""
        if not self.is_valid():
            raise InvalidParameterError("{} violates the chain constraints".format(self))
        n = self.n_rounds
        k1, j1, kn, jn = self.ks[0], self.js[0], self.ks[-1], self.js[-1]
        value = (1.0 - eta) ** (k1 - j1) * eta**j1
        value *= math.comb(kn + m - n, kn) * math.comb(kn, jn) / math.comb(k1 + m - 1, k1)
        for s in range(n - 1):
            value *= math.comb(self.ks[s] - self.ks[s + 1], self.js[s] - self.js[s + 1])
        return value

    def entanglement(self, m: int) -> float:
        """ebits of the maximally entangled state left on the m - n + 1 kept rails"""
        kn = self.ks[-1]
        return math.log2(math.comb(kn + m - self.n_rounds, kn))


def enumerate_chains(k1: int, m: int, round_cap: Optional[int] = None) -> Iterator[OutcomeChain]:
    """every successful chain that ends within round_cap rounds"""
    cap = m - 1 if round_cap is None else round_cap

    def extend(ks: Tuple[int, ...], js: Tuple[int, ...]) -> Iterator[OutcomeChain]:
        k, j = ks[-1], js[-1]
        if k == j:
            yield OutcomeChain(ks, js)
            return
        if len(ks) == cap:
            return
        for k_next in range(k, -1, -1):
            for j_next in range(min(j, k_next), -1, -1):
                if k - k_next >= j - j_next:
                    yield from extend(ks + (k_next,), js + (j_next,))

    for j1 in range(k1, -1, -1):
        yield from extend((k1,), (j1,))


@dataclass
class OutcomeProbabilities:
    alice: float
    bob: float
    joint: float


def outcome_probabilities(k: int, j: int, m: int, chi: float, eta: float) -> OutcomeProbabilities:
    """Alice counts k on m TMSV rails, Bob counts j after loss eta"""
    _check_code(k, m)
    if not 0 <= j <= k:
        raise InvalidParameterError("need 0 <= j <= k, got j={} k={}".format(j, k))
    if not 0.0 <= chi < 1.0:
        raise InvalidParameterError("chi must be in [0, 1), got {}".format(chi))
    check_unit_interval("eta", eta)
    alice = (1.0 - chi**2) ** m * chi ** (2 * k) * code_dim(k, m)
    bob = (1.0 - eta) ** (k - j) * eta**j * math.comb(k, j)
    return OutcomeProbabilities(alice, bob, alice * bob)


def heralded_rci(k: int, j: int, m: int) -> float:
    """log2[d(k, m) / d(k - j, m)], independent of eta and chi"""
    _check_code(k, m)
    if not 0 <= j <= k:
        raise InvalidParameterError("need 0 <= j <= k, got j={} k={}".format(j, k))
    return math.log2(code_dim(k, m) / code_dim(k - j, m))


def single_shot_rate(k: int, m: int, eta: float) -> float:
    """eta^k log2 d(k, m) / m ebits per channel use"""
    _check_code(k, m)
    check_unit_interval("eta", eta)
    return eta**k * math.log2(code_dim(k, m)) / m


@dataclass
class SingleShotOptimum:
    k: int
    m: int
    rate: float
    ratio: float


def optimize_single_shot(
    eta: float, k_max: int = 60, m_max: int = 10, n_links: int = 1
) -> SingleShotOptimum:
    """exhaustive search over 1 <= k <= k_max and 2 <= m <= m_max

    With n_links > 1 each link has transmissivity eta^(1/n_links) and the ratio is taken against
    the n_links bound.
    """
    check_unit_interval("eta", eta)
    if eta == 0.0 or eta == 1.0:
        raise InvalidParameterError("the ratio to the bound needs 0 < eta < 1")
    if k_max < 1 or m_max < 2:
        raise InvalidParameterError("need k_max >= 1 and m_max >= 2")
    eta_link = eta ** (1.0 / n_links)
    ks = np.arange(1, k_max + 1)
    best: Optional[SingleShotOptimum] = None
    for m in range(2, m_max + 1):
        # log-space keeps large k from overflowing the binomial
        rates = np.exp(ks * np.log(eta_link)) * log2_code_dim(ks, m) / m
        i = int(np.argmax(rates))
        if best is None or rates[i] > best.rate:
            best = SingleShotOptimum(int(ks[i]), m, float(rates[i]), 0.0)
    assert best is not None
    best.ratio = best.rate / float(nlink_bound(eta, n_links))
    logger.debug("single-shot optimum at eta={}: {}".format(eta, best))
    return best


@dataclass
class IterativeRate:
    """rate of the iterative protocol with its successful mass split by round"""

    rate: float
    per_round: List[float]
    success_probability: float
    residual: float


def iterative_rate(k1: int, m: int, eta: float, round_cap: Optional[int] = None) -> IterativeRate:
    """(1/m) sum over successful outcome chains of P E, chains ending after round_cap dropped

    residual is the probability of the chains still unresolved at round_cap.
    """
    _check_code(k1, m)
    check_unit_interval("eta", eta)
    if m < 2:
        raise InvalidParameterError("iteration needs at least two rails")
    if m > ITERATIVE_MAX_RAILS or k1 > ITERATIVE_MAX_PHOTONS:
        raise InvalidParameterError(
            "iterative rates are limited to m <= {} and k1 <= {}".format(
                ITERATIVE_MAX_RAILS, ITERATIVE_MAX_PHOTONS
            )
        )
    cap = m - 1 if round_cap is None else round_cap
    if not 1 <= cap <= m - 1:
        raise InvalidParameterError("round cap must be in [1, {}], got {}".format(m - 1, cap))

    @lru_cache(maxsize=None)
    def continuation(n: int, k: int, j: int) -> Tuple[Tuple[float, ...], Tuple[float, ...], float]:
        """(P E, P) per success round and unresolved P, without the round-one prefactor"""
        rate = [0.0] * cap
        prob = [0.0] * cap
        if k == j:
            weight = math.comb(k + m - n, k)
            rate[n - 1] = weight * math.log2(weight)
            prob[n - 1] = weight
            return tuple(rate), tuple(prob), 0.0
        if n == cap:
            return tuple(rate), tuple(prob), float(math.comb(k + m - n, k) * math.comb(k, j))
        residual = 0.0
        for k_next in range(k + 1):
            for j_next in range(min(j, k_next) + 1):
                if k - k_next < j - j_next:
                    continue
                branch = math.comb(k - k_next, j - j_next)
                sub_rate, sub_prob, sub_residual = continuation(n + 1, k_next, j_next)
                for i in range(cap):
                    rate[i] += branch * sub_rate[i]
                    prob[i] += branch * sub_prob[i]
                residual += branch * sub_residual
        return tuple(rate), tuple(prob), residual

    per_round = np.zeros(cap)
    success = 0.0
    residual = 0.0
    norm = math.comb(k1 + m - 1, k1)
    for j1 in range(k1 + 1):
        prefactor = (1.0 - eta) ** (k1 - j1) * eta**j1 / norm
        if prefactor == 0.0:
            continue
        sub_rate, sub_prob, sub_residual = continuation(1, k1, j1)
        per_round += prefactor * np.array(sub_rate)
        success += prefactor * sum(sub_prob)
        residual += prefactor * sub_residual
    per_round /= m
    logger.debug(
        "iterative rate k1={} m={} eta={}: rounds {} residual {:.3e}".format(
            k1, m, eta, per_round, residual
        )
    )
    return IterativeRate(float(per_round.sum()), list(per_round), success, residual)


def _alice_cutoff(m: int, chi: float, tolerance: float) -> Tuple[int, float]:
    """photon cap K of Alice's negative-binomial count and the mass beyond it"""
    dist = nbinom(m, 1.0 - chi**2)
    k_max = int(dist.isf(tolerance)) + 1
    return k_max, float(dist.sf(k_max))


@dataclass
class RCIIdentity:
    value: float
    target: float
    gap: float
    k_max: int
    tail: float


def average_rci_identity(
    m: int, chi: float, eta: float, tolerance: float = DEFAULT_SERIES_TOLERANCE
) -> RCIIdentity:
    """S_1 + F_1 = (1/m) sum_k sum_j P_alice P_bob R against (m - 1)/m (-log2(1 - eta))

    Alice's count is negative binomial; the sum stops where the remaining mass drops below
    tolerance, and that mass is reported as tail.
    """
    _check_code(0, m)
    if not 0.0 < chi < 1.0:
        raise InvalidParameterError("chi must be in (0, 1), got {}".format(chi))
    check_unit_interval("eta", eta)
    if eta == 1.0:
        raise InvalidParameterError("the capacity target diverges at eta = 1")
    k_max, tail = _alice_cutoff(m, chi, tolerance)
    ks = np.arange(k_max + 1)
    p_alice = nbinom.pmf(ks, m, 1.0 - chi**2)
    log_dims = log2_code_dim(ks, m)
    inner = np.zeros(k_max + 1)
    for k in range(1, k_max + 1):
        js = np.arange(k + 1)
        inner[k] = log_dims[k] - np.dot(binom.pmf(js, k, eta), log_dims[k - js])
    value = float(np.dot(p_alice, inner)) / m
    target = (m - 1) / m * float(plob(eta))
    gap = abs(target - value) / target if target > 0.0 else abs(value)
    logger.debug(
        "RCI identity m={} chi={} eta={}: {:.6f} vs {:.6f}, K={} tail {:.2e}".format(
            m, chi, eta, value, target, k_max, tail
        )
    )
    return RCIIdentity(value, target, gap, k_max, tail)


def entanglement_of_tmsv(chi: float) -> float:
    """E_chi = G((lambda - 1) / 2) with lambda = cosh(2 artanh chi)"""
    if not 0.0 <= chi < 1.0:
        raise InvalidParameterError("chi must be in [0, 1), got {}".format(chi))
    lam = math.cosh(2.0 * math.atanh(chi))
    return float(g_function(0.5 * (lam - 1.0)))


def entanglement_ratio(m: int, chi: float, tolerance: float = DEFAULT_SERIES_TOLERANCE) -> float:
    """Gamma_1, the mean entanglement heralded by Alice's count over the m E_chi ebits she made"""
    _check_code(0, m)
    if not 0.0 < chi < 1.0:
        raise InvalidParameterError("chi must be in (0, 1), got {}".format(chi))
    k_max, _ = _alice_cutoff(m, chi, tolerance)
    ks = np.arange(k_max + 1)
    heralded = float(np.dot(nbinom.pmf(ks, m, 1.0 - chi**2), log2_code_dim(ks, m)))
    return heralded / (m * entanglement_of_tmsv(chi))


def entanglement_ratio_round(k_prev: int, m: int, n: int) -> float:
    """Gamma at round n >= 2 for outcome k_prev at round n - 1, over a lossless channel

    sum_{k=0}^{k_prev} d_n(k) log2 d_n(k) / (d_{n-1}(k_prev) log2 d_{n-1}(k_prev))
    with d_n(k) = C(k + m - n, k).
    """
    if n < 2 or n > m:
        raise InvalidParameterError("round must be in [2, m], got {}".format(n))
    _check_code(k_prev, m)
    d_prev = math.comb(k_prev + m - n + 1, k_prev)
    if d_prev <= 1:
        raise InvalidParameterError("no entanglement heralded at the previous round")
    total = 0.0
    for k in range(k_prev + 1):
        d = math.comb(k + m - n, k)
        if d > 1:
            total += d * math.log2(d)
    return total / (d_prev * math.log2(d_prev))


def linear_optics_probability(k: int, m: int, eta: float) -> float:
    """eta^k / (2^(m (k - 1)) S) with S the sum of the squared resource coefficients"""
    spec = CodeSpec(k, m)
    check_unit_interval("eta", eta)
    if k < 1:
        raise InvalidParameterError("the linear-optics decoder needs k >= 1")
    norm = float(np.sum(spec.resource_coefficients() ** 2))
    return eta**k / (2.0 ** (m * (k - 1)) * norm)


def linear_optics_rate(k: int, m: int, eta: float) -> float:
    return linear_optics_probability(k, m, eta) * math.log2(code_dim(k, m)) / m


@dataclass
class HeraldedOutcome:
    j: int
    probability: float
    bob_probability: float
    purity: float
    rci: float
    state: DensityOp = field(repr=False)


@dataclass
class PurificationReport:
    """outcomes of the brute-force single-round circuit for Alice's count k"""

    k: int
    m: int
    alice_probability: float
    outcomes: List[HeraldedOutcome]
    eta_fidelity: Dict[int, float] = field(default_factory=dict)


def _rails_after_loss(m: int, chi: float, k: int, eta: float, nbar: float) -> DensityOp:
    # modes (A_1, B_1, ..., A_m, B_m); the total-k sector survives the cutoff k exactly
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        rails: State = tensor(*[make_tmsv(chi, k) for _ in range(m)])
    counted, _ = project_total_photons(rails, [2 * i for i in range(m)], k)
    rho = as_density(counted)
    for i in range(m):
        rho = apply_loss(rho, 2 * i + 1, eta, nbar)
    return rho


def fock_oracle_purify(
    k: int,
    m: int,
    chi: float,
    eta: float,
    reference_eta: Optional[float] = None,
    nbar: float = 0.0,
) -> PurificationReport:
    """one purification round simulated on m TMSV rails with per-rail loss and QND counts

    When reference_eta is given, each heralded state is compared with the one heralded at
    reference_eta and the fidelity is stored per Bob outcome.
    """
    _check_code(k, m)
    if m > ORACLE_MAX_RAILS:
        raise InvalidParameterError("the Fock oracle handles at most {} rails".format(m))
    if k < 1:
        raise InvalidParameterError("the Fock oracle needs k >= 1")
    a_modes = [2 * i for i in range(m)]
    b_modes = [2 * i + 1 for i in range(m)]

    rho = _rails_after_loss(m, chi, k, eta, nbar)
    p_alice = rho.trace()
    reference = None
    if reference_eta is not None:
        reference = _rails_after_loss(m, chi, k, reference_eta, nbar)

    outcomes = []
    eta_fidelity: Dict[int, float] = {}
    for j in range(k + 1):
        heralded, p_joint = project_total_photons(rho, b_modes, j)
        assert isinstance(heralded, DensityOp)
        if p_joint <= 0.0:
            continue
        heralded = heralded.normalized()
        outcomes.append(
            HeraldedOutcome(
                j, p_joint, p_joint / p_alice, purity(heralded), rci(heralded, a_modes), heralded
            )
        )
        if reference is not None:
            other, p_other = project_total_photons(reference, b_modes, j)
            if p_other > 0.0:
                eta_fidelity[j] = fidelity(heralded, other)
    logger.debug("purification oracle k={} m={}: P_alice={:.6e}".format(k, m, p_alice))
    return PurificationReport(k, m, p_alice, outcomes, eta_fidelity)


@dataclass
class ChainOutcome:
    chain: OutcomeChain
    probability: float
    entanglement: float


def fock_oracle_iterative(k1: int, m: int, eta: float) -> List[ChainOutcome]:
    """successful chains of the iterative protocol from a pure state of A, B and the environment

    Round n projects the total photon numbers of the first m - n + 1 rails on both sides.
    """
    _check_code(k1, m)
    if m > ORACLE_MAX_RAILS or m < 2:
        raise InvalidParameterError(
            "the Fock oracle handles 2 to {} rails".format(ORACLE_MAX_RAILS)
        )
    spec = CodeSpec(k1, m)
    # modes (A_1..A_m, B_1..B_m, e_1..e_m)
    amps = np.zeros((k1 + 1,) * (2 * m), dtype=complex)
    for word in spec.code_words():
        amps[word + word] = 1.0 / math.sqrt(spec.dim)
    state: State = tensor(FockArray(amps), vacuum([k1] * m))
    for i in range(m):
        state = apply_beamsplitter(state, (m + i, 2 * m + i), eta)

    results: List[ChainOutcome] = []

    def descend(current: State, ks: Tuple[int, ...], js: Tuple[int, ...]) -> None:
        n = len(ks) + 1
        kept = m - n + 1
        a_kept = list(range(kept))
        b_kept = [m + i for i in range(kept)]
        k_prev = ks[-1] if ks else k1
        j_prev = js[-1] if js else k1
        for k_n, j_n in itertools.product(range(k_prev + 1), range(j_prev + 1)):
            if n == 1 and k_n != k1:
                continue
            counted, _ = project_total_photons(current, a_kept, k_n)
            counted, p = project_total_photons(counted, b_kept, j_n)
            if p <= 1e-300:
                continue
            chain_ks, chain_js = ks + (k_n,), js + (j_n,)
            if not OutcomeChain(chain_ks, chain_js).is_valid():
                continue
            if k_n == j_n:
                entropy = reduced_entropy(counted.normalized(), a_kept)
                results.append(ChainOutcome(OutcomeChain(chain_ks, chain_js), p, entropy))
            elif n < m - 1:
                descend(counted, chain_ks, chain_js)

    descend(state, (), ())
    return results


@dataclass
class SingleShotPurification(RateProtocol):
    """optimized single-shot purification on each of n_links equal links"""

    k_max: int = 60
    m_max: int = 10
    links: int = 1
    attenuation: float = DEFAULT_ATTENUATION

    @property
    def n_links(self) -> int:
        return self.links

    def _evaluate(self, distance: float, eta: float) -> RatePoint:
        if eta >= 1.0:
            raise InvalidParameterError("purification rates need a lossy channel")
        best = optimize_single_shot(eta, self.k_max, self.m_max, self.links)
        metadata = {"k": best.k, "m": best.m, "ratio": best.ratio}
        return RatePoint(distance, best.rate, eta ** (best.k / self.links), metadata)
