import numpy as np
import pytest

from skcvr.errors import InvalidParameterError, InvalidStateError, TruncationWarning
from skcvr.fock import (
    DensityOp,
    DeviceImperfections,
    FockArray,
    KrausChannel,
    amplifier_channel,
    apply_beamsplitter,
    apply_detector_imperfection,
    apply_displacement,
    apply_loss,
    apply_passive_unitary,
    apply_phase,
    apply_source_imperfection,
    apply_squeezing,
    click_probability,
    covariance_of,
    dark_count_mean_photons,
    dual_homodyne_project,
    dual_homodyne_swap,
    fidelity,
    fourier_unitary,
    make_coherent,
    make_fock,
    make_tmsv,
    partial_trace,
    project_photons,
    project_total_photons,
    pure_loss_channel,
    purity,
    rci,
    reduced_entropy,
    state_metrics,
    tensor,
    thermal_loss_channels,
    vacuum,
    von_neumann_entropy,
)
from skcvr.gaussian import (
    Squeeze,
    nu_from_chi,
    swap_tmsv,
    swap_tmsv_pipeline,
    symplectic_apply,
    tmsv_state,
    vacuum_state,
)


def _random_ket(cutoffs, max_photons, seed=0) -> FockArray:
    rng = np.random.default_rng(seed)
    dims = tuple(c + 1 for c in cutoffs)
    amps = rng.normal(size=dims) + 1j * rng.normal(size=dims)
    total = sum(np.indices(dims))
    amps[total > max_photons] = 0.0
    return FockArray(amps).normalized()


def _random_density(cutoffs, max_photons, rank=3) -> DensityOp:
    matrix = 0
    for seed in range(rank):
        vec = _random_ket(cutoffs, max_photons, seed).vector()
        matrix = matrix + np.outer(vec, vec.conj()) / rank
    return DensityOp(matrix, tuple(cutoffs))


def test_tmsv_state():
    chi = 0.3
    tmsv = make_tmsv(chi, 20)
    np.testing.assert_allclose(tmsv.norm2() + tmsv.tail, 1.0, atol=1e-14)
    np.testing.assert_allclose(tmsv.amplitudes[2, 2], np.sqrt(1 - chi**2) * chi**2)
    assert tmsv.amplitudes[1, 2] == 0.0
    with pytest.raises(InvalidParameterError):
        make_tmsv(1.0, 5)


def test_truncation_warning():
    with pytest.warns(TruncationWarning):
        tmsv = make_tmsv(0.9, 5)
    np.testing.assert_allclose(tmsv.tail, 0.9**12)


def test_beamsplitter_single_photon():
    t = 0.3
    out = apply_beamsplitter(tensor(make_fock(1), make_fock(0, 1)), (0, 1), t)
    np.testing.assert_allclose(out.amplitudes[1, 0], np.sqrt(t))
    np.testing.assert_allclose(out.amplitudes[0, 1], -np.sqrt(1 - t))
    # T = 1 is the identity
    state = _random_ket((2, 2), 2)
    assert apply_beamsplitter(state, (0, 1), 1.0) is state


def test_hong_ou_mandel():
    out = apply_beamsplitter(tensor(make_fock(1), make_fock(1)), (0, 1), 0.5, [2, 2])
    np.testing.assert_allclose(abs(out.amplitudes[1, 1]), 0.0, atol=1e-15)
    np.testing.assert_allclose(np.abs(out.amplitudes[2, 0]) ** 2, 0.5)
    np.testing.assert_allclose(np.abs(out.amplitudes[0, 2]) ** 2, 0.5)


def test_beamsplitter_unitarity():
    state = _random_ket((3, 3), 6)
    out = apply_beamsplitter(state, (0, 1), 0.37, [6, 6])
    np.testing.assert_allclose(out.norm2(), 1.0, atol=1e-10)
    assert out.tail == 0.0

    # overflowing the output box is reported in the tail
    clipped = apply_beamsplitter(state, (0, 1), 0.37)
    np.testing.assert_allclose(clipped.norm2() + clipped.tail, 1.0, atol=1e-10)
    assert clipped.tail > 0.0


def test_passive_unitary_density_matches_ket():
    ket = _random_ket((2, 2, 2), 2)
    u = fourier_unitary(3)
    out_ket = apply_passive_unitary(ket, [0, 1, 2], u)
    out_rho = apply_passive_unitary(ket.to_density(), [0, 1, 2], u)
    np.testing.assert_allclose(out_ket.to_density().matrix, out_rho.matrix, atol=1e-12)
    np.testing.assert_allclose(out_ket.norm2(), 1.0, atol=1e-10)


def test_phase_and_displacement():
    alpha = 0.5 + 0.2j
    coherent = apply_displacement(vacuum([25]), 0, alpha)
    expected = make_coherent(alpha, 25)
    np.testing.assert_allclose(coherent.amplitudes, expected.amplitudes, atol=1e-10)

    rotated = apply_phase(expected, 0, 0.4)
    target = make_coherent(alpha * np.exp(-0.4j), 25)
    np.testing.assert_allclose(fidelity(rotated, target), 1.0, atol=1e-12)


def test_squeezing_matches_gaussian():
    r = 0.3
    squeezed = apply_squeezing(vacuum([30]), 0, r)
    gaussian = symplectic_apply(vacuum_state(1), Squeeze(0, r))
    np.testing.assert_allclose(covariance_of(squeezed).cov, gaussian.cov, atol=1e-6)


def test_tmsv_covariance():
    chi = 0.3
    cm = covariance_of(make_tmsv(chi, 30))
    np.testing.assert_allclose(cm.cov, tmsv_state(nu_from_chi(chi)).cov, atol=1e-6)
    np.testing.assert_allclose(cm.mean, 0.0, atol=1e-12)


def test_loss_on_single_photon():
    out = apply_loss(make_fock(1), 0, 0.75)
    np.testing.assert_allclose(out.probabilities(), [0.25, 0.75], atol=1e-14)
    np.testing.assert_allclose(out.matrix[0, 1], 0.0)


def test_loss_composition():
    rho = _random_density((3, 3), 3)
    twice = apply_loss(apply_loss(rho, 1, 0.6), 1, 0.5)
    once = apply_loss(rho, 1, 0.3)
    np.testing.assert_allclose(twice.matrix, once.matrix, atol=1e-9)
    np.testing.assert_allclose(once.trace(), 1.0, atol=1e-12)


def test_thermal_loss_trace_and_mean():
    eta, nbar = 0.5, 0.1
    out = apply_loss(make_fock(1, 30), 0, eta, nbar)
    np.testing.assert_allclose(out.trace() + out.tail, 1.0, atol=1e-10)
    n = np.arange(31)
    mean = float(n.dot(out.probabilities()))
    # <n> -> eta <n> + (1 - eta) nbar
    np.testing.assert_allclose(mean, eta + (1 - eta) * nbar, atol=1e-8)


def test_kraus_builders():
    loss = pure_loss_channel(0.3, 0, 5)
    completeness = sum(op.conj().T @ op for op in loss.operators)
    np.testing.assert_allclose(completeness, np.eye(6), atol=1e-12)

    gain = 1.5
    amplified = amplifier_channel(gain, 0, 8).apply(vacuum([8]))
    k = np.arange(4)
    thermal = (1.0 / gain) * (1.0 - 1.0 / gain) ** k
    np.testing.assert_allclose(amplified.probabilities()[:4], thermal, atol=1e-12)

    assert len(thermal_loss_channels(0.5, 0.0, 0, 4)) == 1
    assert thermal_loss_channels(0.5, 0.2, 0, 4)[1].label.startswith("amplifier")
    with pytest.raises(InvalidParameterError):
        amplifier_channel(0.5, 0, 4)
    with pytest.raises(InvalidParameterError):
        KrausChannel([2.0 * np.eye(2)], 0, "doubling")


def test_dark_count_calibration():
    p = 1e-8
    nbar = dark_count_mean_photons(p, 0.9)
    np.testing.assert_allclose(click_probability(nbar, 0.9), p, rtol=0.05)
    assert dark_count_mean_photons(0.0, 0.9) == 0.0
    with pytest.raises(InvalidParameterError):
        dark_count_mean_photons(1e-8, 1.0)


def test_device_imperfections():
    ideal = DeviceImperfections()
    assert ideal.is_ideal()
    rho = make_fock(1).to_density()
    np.testing.assert_allclose(apply_source_imperfection(rho, 0, ideal).matrix, rho.matrix)
    np.testing.assert_allclose(apply_detector_imperfection(rho, [0], ideal).matrix, rho.matrix)

    lossy = DeviceImperfections(source_efficiency=0.75)
    out = apply_source_imperfection(make_fock(1), 0, lossy)
    np.testing.assert_allclose(out.probabilities(), [0.25, 0.75], atol=1e-14)
    with pytest.raises(InvalidParameterError):
        DeviceImperfections(detector_efficiency=1.5)


def test_projections():
    chi = 0.4
    tmsv = make_tmsv(chi, 12)
    out, prob = project_photons(tmsv, 1, 2)
    np.testing.assert_allclose(prob, (1 - chi**2) * chi**4)
    assert out.n_modes == 1

    rho_out, rho_prob = project_photons(tmsv.to_density(), 1, 2)
    np.testing.assert_allclose(rho_prob, prob)
    np.testing.assert_allclose(rho_out.matrix, out.to_density().matrix, atol=1e-14)

    with pytest.raises(InvalidParameterError):
        project_photons(tmsv, 0, 13)

    pair = tensor(make_tmsv(chi, 6), make_tmsv(chi, 6))
    _, total_prob = project_total_photons(pair, [0, 2], 1)
    # one photon in either copy
    np.testing.assert_allclose(total_prob, 2 * (1 - chi**2) ** 2 * chi**2)


def test_partial_trace_and_entropy():
    chi = 0.5
    tmsv = make_tmsv(chi, 40)
    reduced = partial_trace(tmsv, [1])
    p = (1 - chi**2) * chi ** (2 * np.arange(41))
    np.testing.assert_allclose(np.real(np.diag(reduced.matrix)), p, atol=1e-14)
    entropy = float(-np.sum(p * np.log2(p)))
    np.testing.assert_allclose(von_neumann_entropy(reduced), entropy, atol=1e-9)
    np.testing.assert_allclose(reduced_entropy(tmsv, [0]), entropy, atol=1e-9)
    # pure bipartite state: rci equals the entanglement entropy
    np.testing.assert_allclose(rci(tmsv.to_density(), [0]), entropy, atol=1e-9)
    assert purity(tmsv) == 1.0

    rho = tmsv.to_density()
    np.testing.assert_allclose(
        partial_trace(rho, [1]).matrix, partial_trace(tmsv, [1]).matrix, atol=1e-14
    )
    with pytest.raises(InvalidParameterError):
        partial_trace(tmsv, [0, 1])


def test_fidelity():
    p = np.array([0.7, 0.3])
    q = np.array([0.4, 0.6])
    rho = DensityOp(np.diag(p), (1,))
    sigma = DensityOp(np.diag(q), (1,))
    np.testing.assert_allclose(fidelity(rho, sigma), np.sum(np.sqrt(p * q)) ** 2, atol=1e-12)
    np.testing.assert_allclose(fidelity(rho, rho), 1.0, atol=1e-12)

    plus = FockArray(np.array([1.0, 1.0]) / np.sqrt(2))
    np.testing.assert_allclose(fidelity(plus, make_fock(0)), 0.5)
    np.testing.assert_allclose(fidelity(rho, plus), 0.5)

    # rank-deficient mixed states
    mixed = _random_density((2, 2), 2, rank=2)
    np.testing.assert_allclose(fidelity(mixed, mixed), 1.0, atol=1e-9)


def test_state_metrics():
    rho = DensityOp(np.diag([0.5, 0.5]), (1,))
    metrics = state_metrics(rho, target=make_fock(0))
    np.testing.assert_allclose(metrics.purity, 0.5)
    np.testing.assert_allclose(metrics.von_neumann_entropy, 1.0)
    np.testing.assert_allclose(metrics.fidelity, 0.5)
    assert metrics.rci is None
    with pytest.raises(InvalidStateError):
        state_metrics(make_tmsv(0.2, 5), bipartition=([0], [0]))


def test_dual_homodyne_swap_matches_projection():
    left = make_tmsv(0.3, 4).to_density()
    right = make_tmsv(0.3, 4).to_density()
    gamma = 0.2 - 0.1j
    swapped, density = dual_homodyne_swap(left, right, 1, 0, gamma)
    projected, projected_density = dual_homodyne_project(tensor(left, right), (1, 2), gamma)
    np.testing.assert_allclose(swapped.matrix, projected.matrix, atol=1e-12)
    np.testing.assert_allclose(density, projected_density, atol=1e-12)


def test_swap_at_origin_matches_gaussian_swap():
    chi = 0.3
    left = make_tmsv(chi, 20).to_density()
    out, _ = dual_homodyne_swap(left, left, 1, 0, 0.0)
    cm = covariance_of(out.normalized())
    expected = swap_tmsv_pipeline(nu_from_chi(chi))
    np.testing.assert_allclose(np.diag(cm.cov), swap_tmsv(nu_from_chi(chi)), atol=1e-6)
    # quadrature sign conventions of the two constructions may differ
    np.testing.assert_allclose(np.abs(cm.cov), np.abs(expected.cov), atol=1e-6)
    np.testing.assert_allclose(cm.mean, np.zeros(4), atol=1e-9)


if __name__ == "__main__":
    test_dual_homodyne_swap_matches_projection()
