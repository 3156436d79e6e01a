"""Waiting-time combinators for probabilistic repeater stages.

A stage that succeeds with probability P per attempt and must succeed on 2^n independent segments
before the next stage proceeds needs on average Z_n(P) attempts, the expected maximum of 2^n
geometric variables.
"""
import itertools
import logging
import math
from typing import Optional, Sequence

import numpy as np

from skcvr.errors import InvalidParameterError, check_unit_interval

logger = logging.getLogger(__name__)


def _check_probability(p: float) -> None:
    if not 0.0 < p <= 1.0:
        raise InvalidParameterError("success probability must be in (0, 1], got {}".format(p))


def z_steps(n: int, p: float) -> float:
    """Z_n(P) = sum_{j=1}^{2^n} C(2^n, j) (-1)^(j+1) / (1 - (1 - P)^j)"""
    if n < 0:
        raise InvalidParameterError("level must be >= 0, got {}".format(n))
    _check_probability(p)
    n_segments = 2**n
    log_fail = math.log1p(-p) if p < 1.0 else -math.inf
    terms = []
    for j in range(1, n_segments + 1):
        # 1 - (1 - P)^j without cancellation for small P
        denom = -math.expm1(j * log_fail) if p < 1.0 else 1.0
        terms.append((-1) ** (j + 1) * math.comb(n_segments, j) / denom)
    return math.fsum(terms)


def expected_max_steps(probabilities: Sequence[float]) -> float:
    """expected number of attempts until every independent segment has succeeded once

    Inclusion-exclusion over subsets; equals z_steps when all probabilities agree.
    """
    if len(probabilities) == 0:
        raise InvalidParameterError("need at least one segment")
    for p in probabilities:
        _check_probability(p)
    terms = []
    for size in range(1, len(probabilities) + 1):
        for subset in itertools.combinations(probabilities, size):
            log_fail = sum(math.log1p(-p) if p < 1.0 else -math.inf for p in subset)
            denom = -math.expm1(log_fail) if log_fail > -math.inf else 1.0
            terms.append((-1) ** (size + 1) / denom)
    return math.fsum(terms)


def simulate_steps(n: int, p: float, n_trials: int = 10**6, seed: Optional[int] = 0) -> float:
    """Monte-Carlo estimate of Z_n(P) from seeded geometric draws"""
    if n < 0:
        raise InvalidParameterError("level must be >= 0, got {}".format(n))
    _check_probability(p)
    rng = np.random.default_rng(seed)
    draws = rng.geometric(p, size=(n_trials, 2**n))
    estimate = float(draws.max(axis=1).mean())
    logger.debug("simulated Z_{}({}) = {} from {} trials".format(n, p, estimate, n_trials))
    return estimate


def chain_rate(p_nla: float, p_ps: Sequence[float]) -> float:
    """R_rep = 1 / Z_n(P_NLA) prod_i 1 / Z_i(P_PS,i) for 2^n links

    p_ps[i] is the post-selection probability of the swaps at index i, so p_ps[n - 1] belongs to
    the swaps between neighbouring links and p_ps[0] to the final swap.
    """
    n = len(p_ps)
    if n < 1:
        raise InvalidParameterError("a chain needs at least one swapping level")
    rate = 1.0 / z_steps(n, p_nla)
    for i, p in enumerate(p_ps):
        rate /= z_steps(i, p)
    return rate


def three_repeater_rate(p_higher: float, p_lower: Sequence[float]) -> float:
    """R = P_higher / Z_1(P_lower); unequal lower probabilities use the exact expected maximum"""
    check_unit_interval("p_higher", p_higher)
    if len(p_lower) != 2:
        raise InvalidParameterError("a three-repeater chain has two lower-level repeaters")
    return p_higher / expected_max_steps(p_lower)
