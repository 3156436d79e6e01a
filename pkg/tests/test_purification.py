import math

import numpy as np
import pytest

from skcvr.bounds import plob, transmissivity
from skcvr.errors import InvalidParameterError
from skcvr.purification import (
    CodeSpec,
    OutcomeChain,
    SingleShotPurification,
    average_rci_identity,
    code_dim,
    entanglement_of_tmsv,
    entanglement_ratio,
    entanglement_ratio_round,
    enumerate_chains,
    fock_oracle_iterative,
    fock_oracle_purify,
    heralded_rci,
    iterative_rate,
    linear_optics_probability,
    linear_optics_rate,
    log2_code_dim,
    optimize_single_shot,
    outcome_probabilities,
    single_shot_rate,
)


def test_code_spec():
    assert code_dim(2, 3) == 6
    spec = CodeSpec(2, 2)
    assert spec.dim == 3
    assert spec.code_words() == [(2, 0), (1, 1), (0, 2)]
    assert spec.anticorrelated_words() == [(0, 2), (1, 1), (2, 0)]
    np.testing.assert_allclose(spec.resource_coefficients(), [1.0, 0.5, 1.0])
    assert len(CodeSpec(3, 4).code_words()) == code_dim(3, 4)
    np.testing.assert_allclose(
        log2_code_dim(np.arange(6), 4), [math.log2(code_dim(k, 4)) for k in range(6)], atol=1e-12
    )
    with pytest.raises(InvalidParameterError):
        CodeSpec(-1, 2)


def test_outcome_probabilities():
    chi, eta, m = 0.4, 0.6, 3
    k = 3
    outcomes = [outcome_probabilities(k, j, m, chi, eta) for j in range(k + 1)]
    np.testing.assert_allclose(sum(o.joint for o in outcomes), outcomes[0].alice)
    np.testing.assert_allclose(sum(o.bob for o in outcomes), 1.0)
    total_alice = sum(outcome_probabilities(n, 0, m, chi, eta).alice for n in range(200))
    np.testing.assert_allclose(total_alice, 1.0, atol=1e-12)
    with pytest.raises(InvalidParameterError):
        outcome_probabilities(2, 3, 2, chi, eta)


def test_heralded_rci():
    np.testing.assert_allclose(heralded_rci(2, 1, 2), math.log2(1.5))
    assert heralded_rci(3, 0, 2) == 0.0
    np.testing.assert_allclose(heralded_rci(3, 3, 4), math.log2(code_dim(3, 4)))


def test_single_shot_rate():
    np.testing.assert_allclose(single_shot_rate(1, 2, 0.8), 0.4)
    np.testing.assert_allclose(single_shot_rate(2, 2, 0.5), 0.25 * math.log2(3) / 2)
    assert single_shot_rate(0, 3, 0.5) == 0.0


def test_optimize_single_shot_low_transmissivity():
    best = optimize_single_shot(1e-4)
    assert (best.k, best.m) == (1, 3)
    np.testing.assert_allclose(best.ratio, math.log(3.0) / 3.0, rtol=1e-2)
    np.testing.assert_allclose(best.rate, single_shot_rate(1, 3, 1e-4))


def test_optimize_single_shot_high_transmissivity():
    best = optimize_single_shot(0.999)
    # large codes are needed close to eta = 1; the optimum sits on the k_max cap
    assert (best.k, best.m) == (60, 5)
    np.testing.assert_allclose(best.ratio, 0.364328, rtol=1e-5)
    assert best.rate < float(plob(0.999))

    wide = optimize_single_shot(0.999, k_max=200)
    assert (wide.k, wide.m) == (200, 6)
    np.testing.assert_allclose(wide.ratio, 0.430166, rtol=1e-5)
    # a wider m range does not move the optimum
    assert optimize_single_shot(0.999, m_max=30).m == 5

    coarse = optimize_single_shot(0.999, k_max=20)
    assert coarse.rate <= best.rate
    with pytest.raises(InvalidParameterError):
        optimize_single_shot(1.0)
    with pytest.raises(InvalidParameterError):
        optimize_single_shot(0.5, m_max=1)


def test_optimize_single_shot_half_transmissivity():
    best = optimize_single_shot(0.5)
    assert (best.k, best.m) == (1, 3)
    np.testing.assert_allclose(best.rate, 0.5 * math.log2(3.0) / 3.0)
    np.testing.assert_allclose(best.ratio, best.rate)


def test_optimize_single_shot_links():
    eta = 1e-6
    best = optimize_single_shot(eta, n_links=2)
    eta_link = math.sqrt(eta)
    np.testing.assert_allclose(best.rate, single_shot_rate(best.k, best.m, eta_link))
    assert best.ratio < 1.0


def test_linear_optics_penalty():
    for m in (2, 3, 5):
        np.testing.assert_allclose(linear_optics_probability(1, m, 0.7), 0.7 / m)
    np.testing.assert_allclose(linear_optics_probability(2, 2, 0.6), 0.36 / 9.0)
    np.testing.assert_allclose(linear_optics_rate(2, 2, 0.6), 0.36 / 9.0 * math.log2(3) / 2)
    # linear optics never beats the QND version
    for k in (1, 2, 3):
        assert linear_optics_rate(k, 3, 0.5) <= single_shot_rate(k, 3, 0.5)


def test_outcome_chain():
    chain = OutcomeChain((2, 1), (1, 1))
    assert chain.n_rounds == 2
    assert chain.is_success
    assert chain.is_valid()
    chain.validate()
    assert not OutcomeChain((2, 3), (1, 1)).is_valid()
    with pytest.raises(InvalidParameterError):
        OutcomeChain((2, 1), (1, 0)).validate()
    with pytest.raises(InvalidParameterError):
        OutcomeChain((2,), ())
    np.testing.assert_allclose(chain.entanglement(3), math.log2(code_dim(1, 2)))


def test_enumerate_chains():
    chains = list(enumerate_chains(1, 2))
    assert chains == [OutcomeChain((1,), (1,))]
    for chain in enumerate_chains(3, 4):
        assert chain.is_valid() and chain.is_success
        assert chain.n_rounds <= 3
    capped = list(enumerate_chains(3, 4, round_cap=1))
    assert capped == [OutcomeChain((3,), (3,))]


def test_iterative_rate_special_cases():
    for eta in (0.1, 0.5, 0.9):
        np.testing.assert_allclose(iterative_rate(1, 2, eta).rate, eta / 2)
    # lossless channel: every round-one count already agrees
    lossless = iterative_rate(3, 4, 1.0)
    np.testing.assert_allclose(lossless.rate, math.log2(code_dim(3, 4)) / 4)
    np.testing.assert_allclose(lossless.residual, 0.0)


def test_iterative_rate_is_normalized():
    for k1, m, eta in ((2, 3, 0.7), (4, 5, 0.3), (6, 4, 0.55)):
        res = iterative_rate(k1, m, eta)
        np.testing.assert_allclose(res.success_probability + res.residual, 1.0, atol=1e-12)
        np.testing.assert_allclose(res.rate, sum(res.per_round))
        # round one is the single-shot protocol
        np.testing.assert_allclose(res.per_round[0], single_shot_rate(k1, m, eta))
        assert res.rate >= single_shot_rate(k1, m, eta)


def test_iterative_rate_matches_chain_enumeration():
    for k1, m, eta in ((2, 3, 0.7), (3, 4, 0.4)):
        chains = list(enumerate_chains(k1, m))
        total = sum(c.probability(m, eta) * c.entanglement(m) for c in chains) / m
        np.testing.assert_allclose(iterative_rate(k1, m, eta).rate, total, rtol=1e-12)

    capped = iterative_rate(3, 4, 0.4, round_cap=2)
    chains = list(enumerate_chains(3, 4, round_cap=2))
    total = sum(c.probability(4, 0.4) * c.entanglement(4) for c in chains) / 4
    np.testing.assert_allclose(capped.rate, total, rtol=1e-12)
    assert capped.rate <= iterative_rate(3, 4, 0.4).rate


def test_iterative_rate_limits():
    with pytest.raises(InvalidParameterError):
        iterative_rate(2, 1, 0.5)
    with pytest.raises(InvalidParameterError):
        iterative_rate(2, 10, 0.5)
    with pytest.raises(InvalidParameterError):
        iterative_rate(13, 3, 0.5)
    with pytest.raises(InvalidParameterError):
        iterative_rate(2, 3, 0.5, round_cap=3)


def test_iterative_rate_matches_fock_oracle():
    k1, m, eta = 2, 3, 0.7
    outcomes = fock_oracle_iterative(k1, m, eta)
    for outcome in outcomes:
        expected = outcome.chain.probability(m, eta)
        np.testing.assert_allclose(outcome.probability, expected, atol=1e-9)
        np.testing.assert_allclose(outcome.entanglement, outcome.chain.entanglement(m), atol=1e-9)
    def key(chain):
        return (chain.ks, chain.js)

    found = sorted((o.chain for o in outcomes), key=key)
    assert found == sorted(enumerate_chains(k1, m), key=key)
    oracle_rate = sum(o.probability * o.entanglement for o in outcomes) / m
    np.testing.assert_allclose(oracle_rate, iterative_rate(k1, m, eta).rate, atol=1e-9)


def test_rci_identity_trend():
    results = [average_rci_identity(2, chi, 0.5) for chi in (0.9, 0.99, 0.999)]
    values = [r.value for r in results]
    gaps = [r.gap for r in results]
    assert values[0] < values[1] < values[2] < results[-1].target
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] < 0.05
    np.testing.assert_allclose(results[-1].target, 0.5)
    assert all(r.tail < 1e-10 for r in results)


def test_entanglement_of_tmsv():
    chi = 0.5
    n = np.arange(200)
    p = (1 - chi**2) * chi ** (2 * n)
    np.testing.assert_allclose(entanglement_of_tmsv(chi), -np.sum(p * np.log2(p)), rtol=1e-12)
    assert entanglement_of_tmsv(0.0) == 0.0


def test_entanglement_ratio():
    ratios = [entanglement_ratio(3, chi) for chi in (0.9, 0.99, 0.999)]
    assert ratios[0] < ratios[1] < ratios[2]
    # the approach to (m - 1) / m is slow: still 6% short at chi = 0.999
    assert ratios[-1] < 2.0 / 3.0
    np.testing.assert_allclose(ratios[-1], 0.627504, rtol=1e-5)
    # after round one, a lossless round keeps a fixed share of the entanglement
    np.testing.assert_allclose(entanglement_ratio_round(1, 3, 2), 2.0 / (3.0 * math.log2(3.0)))
    with pytest.raises(InvalidParameterError):
        entanglement_ratio_round(1, 3, 1)


def test_entanglement_ratio_grows_with_rails():
    ratios = [entanglement_ratio(m, 0.5) for m in range(2, 9)]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 1.0
    np.testing.assert_allclose(ratios[0], 0.25729, rtol=1e-4)
    np.testing.assert_allclose(ratios[-1], 0.67172, rtol=1e-4)


def test_entanglement_ratio_round():
    # k = 3 at round one on six rails, then a lossless second round
    dims = [math.comb(k + 4, k) for k in range(4)]
    expected = sum(d * math.log2(d) for d in dims) / (56 * math.log2(56))
    np.testing.assert_allclose(entanglement_ratio_round(3, 6, 2), expected, rtol=1e-12)
    np.testing.assert_allclose(entanglement_ratio_round(3, 6, 2), 0.767924, rtol=1e-5)


@pytest.mark.parametrize("k,m", [(1, 2), (2, 2), (2, 3)])
def test_heralded_states_do_not_depend_on_loss(k, m):
    chi = 0.3
    report = fock_oracle_purify(k, m, chi, 0.3, reference_eta=0.8)
    alice = outcome_probabilities(k, 0, m, chi, 0.3).alice
    np.testing.assert_allclose(report.alice_probability, alice, atol=1e-12)
    assert len(report.outcomes) == k + 1
    for outcome in report.outcomes:
        expected = outcome_probabilities(k, outcome.j, m, chi, 0.3).joint
        np.testing.assert_allclose(outcome.probability, expected, atol=1e-10)
        np.testing.assert_allclose(outcome.rci, heralded_rci(k, outcome.j, m), atol=1e-9)
        assert report.eta_fidelity[outcome.j] >= 1.0 - 1e-9
    final = report.outcomes[-1]
    assert final.j == k
    np.testing.assert_allclose(final.purity, 1.0, atol=1e-10)


def test_fock_oracle_limits():
    with pytest.raises(InvalidParameterError):
        fock_oracle_purify(1, 4, 0.3, 0.5)
    with pytest.raises(InvalidParameterError):
        fock_oracle_purify(0, 2, 0.3, 0.5)
    with pytest.raises(InvalidParameterError):
        fock_oracle_iterative(1, 1, 0.5)


def test_fock_oracle_with_thermal_noise():
    report = fock_oracle_purify(1, 2, 0.3, 0.5, nbar=0.1)
    total = sum(outcome.probability for outcome in report.outcomes)
    assert total <= report.alice_probability + 1e-9
    for outcome in report.outcomes:
        assert 0.0 < outcome.purity <= 1.0 + 1e-9


def test_single_shot_purification_protocol():
    protocol = SingleShotPurification(k_max=20, m_max=6)
    point = protocol.evaluate(100.0)
    eta = float(transmissivity(100.0))
    best = optimize_single_shot(eta, 20, 6)
    np.testing.assert_allclose(point.rate, best.rate)
    assert point.metadata["k"] == best.k and point.metadata["m"] == best.m
    np.testing.assert_allclose(point.probability, eta**best.k)
    assert point.rate <= point.metadata["plob"]
    with pytest.raises(InvalidParameterError):
        protocol.evaluate(0.0)


if __name__ == "__main__":
    test_iterative_rate_matches_fock_oracle()
