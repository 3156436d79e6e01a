import numpy as np
import pytest
from utils import create_link_pair, create_small_chain, eta_at

from skcvr.errors import InvalidParameterError
from skcvr.repeater import (
    ChainConfig,
    CVQuantumRepeater,
    PolarGrid,
    chain_rate,
    cvqr_key_rate,
    cvqr_nla_state,
    nested_chain,
    nla_link_state,
    nla_success_probability,
    optimize_chain,
    postselection_probability,
    reverse_modes,
    swap_with_postselection,
)
from skcvr.scissors import distill_lossy_tmsv


def test_nla_success_probability():
    for chi, eta, gain in [(0.3, 0.5, 1.5), (0.6, 0.01, 4.0), (0.1, 1.0, 0.7)]:
        state, p_nla = cvqr_nla_state(chi, eta, gain, cutoff=60)
        assert p_nla == pytest.approx(nla_success_probability(chi, eta, gain))
        assert state.norm2() == pytest.approx(p_nla, rel=1e-10)
    # lossless channel and unit gain
    chi = 0.4
    assert nla_success_probability(chi, 1.0, 1.0) == pytest.approx(0.5 * (1.0 - chi**4))


@pytest.mark.parametrize("chi,eta,gain", [(0.3, 0.5, 1.5), (0.6, 0.2, 3.0), (0.1, 0.9, 0.7)])
def test_nla_link_state_matches_lossy_scissor(chi, eta, gain):
    distilled, p_distilled = distill_lossy_tmsv(chi, eta, order=1, gain=gain)
    link = nla_link_state(chi, eta, gain, cutoff=distilled.cutoffs[0])
    assert link.cutoffs == distilled.cutoffs
    np.testing.assert_allclose(link.matrix, distilled.normalized().matrix, atol=1e-9)
    assert p_distilled == pytest.approx(nla_success_probability(chi, eta, gain), rel=1e-8)


def test_nla_state_is_validated():
    with pytest.raises(InvalidParameterError):
        cvqr_nla_state(1.0, 0.5, 1.0, 10)
    with pytest.raises(InvalidParameterError):
        cvqr_nla_state(0.3, 0.5, 0.0, 10)


def test_reverse_modes():
    left, right = create_link_pair()
    np.testing.assert_allclose(reverse_modes(right).matrix, left.matrix)
    assert right.cutoffs == tuple(reversed(left.cutoffs))


def test_postselection_probability():
    left, right = create_link_pair()
    grid = PolarGrid(64, 1)
    # the whole plane holds every outcome
    assert postselection_probability(left, right, 7.0, grid) == pytest.approx(1.0, abs=1e-8)
    small = postselection_probability(left, right, 0.3, grid)
    medium = postselection_probability(left, right, 0.6, grid)
    assert 0.0 < small < medium < 1.0


def test_swap_with_postselection():
    left, right = create_link_pair()
    grid = PolarGrid(8, 8)
    res = swap_with_postselection(left, right, 0.5, grid)
    assert res.probability == pytest.approx(
        postselection_probability(left, right, 0.5, grid), rel=1e-10
    )
    assert res.gains.shape == (4, 2)
    # the angular average of the corrected means vanishes
    np.testing.assert_allclose(res.cm.mean, np.zeros(4), atol=1e-9)
    assert res.state is None

    averaged = swap_with_postselection(
        left, right, 0.5, grid, corrected_cutoff=4, average_state=True
    )
    assert averaged.state is not None
    assert averaged.state.n_modes == 2
    assert averaged.state.cutoffs[1] == 4
    assert 0.9 < averaged.state.trace() <= 1.0 + 1e-9


def test_nested_chain_two_links():
    chain = create_small_chain()
    eta_link = eta_at(50.0)
    lower = nested_chain(chain, eta_link)
    upper = nested_chain(chain, eta_link, upper=True)
    assert lower.p_nla == pytest.approx(nla_success_probability(0.3, eta_link, 1.5))
    assert len(lower.p_ps) == 1
    assert 0.0 < lower.p_ps[0] < 1.0
    assert lower.rate == pytest.approx(chain_rate(lower.p_nla, lower.p_ps), rel=1e-12)
    # same radius on both bounds for a single level
    assert upper.p_ps[0] == pytest.approx(lower.p_ps[0], rel=1e-9)


def test_nested_chain_four_links():
    chain = create_small_chain(n_links=4)
    bound = nested_chain(chain, eta_at(25.0))
    assert len(bound.p_ps) == 2
    assert len(bound.error_estimates) == 2
    expected = chain_rate(bound.p_nla, list(reversed(bound.p_ps)))
    assert bound.rate == pytest.approx(expected, rel=1e-12)
    assert bound.cm.n_modes == 2


def test_cvqr_key_rate():
    chain = create_small_chain()
    res = cvqr_key_rate(chain, 100.0)
    assert res.lower.probability == pytest.approx(res.lower_chain.rate)
    assert res.upper.probability == pytest.approx(res.upper_chain.rate)
    assert res.lower.clipped >= 0.0

    point = CVQuantumRepeater(chain).evaluate(100.0)
    assert point.rate == pytest.approx(res.lower.clipped)
    assert point.metadata["upper"] == pytest.approx(res.upper.clipped)
    assert point.metadata["p_nla"] == pytest.approx(res.lower_chain.p_nla)
    assert point.metadata["nlink_bound"] > point.metadata["plob"]


def test_optimize_chain():
    chain = create_small_chain()
    tuned, result = optimize_chain(chain, 100.0, n_trial_budget=1)
    assert 0.5 <= tuned.gain <= 10.0
    assert 0.01 <= tuned.chi <= 0.9
    assert tuned.grid == chain.grid
    assert tuned.cutoff == chain.cutoff
    seed_value = cvqr_key_rate(chain, 100.0).upper.raw
    assert result.value >= seed_value - 1e-9 * max(1.0, abs(seed_value))


def test_chain_config():
    assert ChainConfig(n_links=4).gamma_max == [0.2, 0.45]
    with pytest.raises(InvalidParameterError):
        ChainConfig(n_links=3)
    with pytest.raises(InvalidParameterError):
        ChainConfig(n_links=4, gamma_max=[0.5])
    with pytest.raises(InvalidParameterError):
        ChainConfig(n_links=16)
    assert ChainConfig.from_dict({"n_links": 2, "grid": {"n_radial": 4}}).grid.n_radial == 4


if __name__ == "__main__":
    test_nested_chain_four_links()
