import numpy as np
import pytest

from skcvr.errors import InvalidParameterError, InvalidStateError
from skcvr.gaussian import (
    Beamsplitter,
    GaussianState,
    KeyRateInputs,
    Measurement,
    Phase,
    Squeeze,
    TwoModeSqueeze,
    calibrate_excess_noise,
    condition_heterodyne,
    condition_homodyne,
    devetak_winter,
    g_function,
    gaussian_entropy,
    gaussian_rci,
    holevo_bound,
    lossy_channel,
    min_leakage_pipeline,
    mutual_information,
    standard_form,
    swap_tmsv,
    swap_tmsv_pipeline,
    symplectic_apply,
    symplectic_eigenvalues,
    thermal_loss,
    thermal_state,
    tmsv_state,
    vacuum_state,
)


def _lossy_tmsv(nu: float, eta: float) -> GaussianState:
    return lossy_channel(tmsv_state(nu), 1, eta)


def test_two_mode_squeeze_on_vacuum():
    r = 0.4
    state = symplectic_apply(vacuum_state(2), TwoModeSqueeze(0, 1, r), check=True)
    np.testing.assert_allclose(state.cov, tmsv_state(np.cosh(2 * r)).cov, atol=1e-12)


def test_inverse_pairs_and_identity():
    state = _lossy_tmsv(3.0, 0.6)
    again = symplectic_apply(symplectic_apply(state, Squeeze(0, 0.3)), Squeeze(0, -0.3))
    np.testing.assert_allclose(again.cov, state.cov, atol=1e-12)
    same = symplectic_apply(state, Beamsplitter(0, 1, 1.0))
    np.testing.assert_allclose(same.cov, state.cov, atol=1e-15)
    rotated = symplectic_apply(symplectic_apply(state, Phase(1, 0.7)), Phase(1, -0.7))
    np.testing.assert_allclose(rotated.cov, state.cov, atol=1e-12)
    with pytest.raises(InvalidParameterError):
        symplectic_apply(state, Squeeze(2, 0.1))
    with pytest.raises(InvalidParameterError):
        symplectic_apply(state, Beamsplitter(0, 0, 0.5))


def test_condition_homodyne_on_tmsv():
    nu = 2.5
    out = condition_homodyne(tmsv_state(nu), 1, "q")
    np.testing.assert_allclose(out.cov, np.diag([1.0 / nu, nu]), atol=1e-12)
    assert out.mode_labels == ("A",)

    # product state: the remaining arm is untouched
    product = vacuum_state(1) + thermal_state(0.5)
    np.testing.assert_allclose(condition_homodyne(product, 1, "p").cov, np.eye(2))


def test_condition_heterodyne_matches_ancilla_construction():
    state = _lossy_tmsv(3.0, 0.4)
    expected = condition_heterodyne(state, 1)

    joint = state + vacuum_state(1)
    joint = symplectic_apply(joint, Beamsplitter(1, 2, 0.5))
    joint = condition_homodyne(joint, 2, "p")
    joint = condition_homodyne(joint, 1, "q")
    np.testing.assert_allclose(joint.cov, expected.cov, atol=1e-10)

    # a TMSV collapses to a coherent state
    np.testing.assert_allclose(condition_heterodyne(tmsv_state(4.0), 1).cov, np.eye(2))
    # a fully lost arm carries no information
    decoupled = _lossy_tmsv(3.0, 0.0)
    np.testing.assert_allclose(condition_heterodyne(decoupled, 1).cov, 3.0 * np.eye(2))


def test_symplectic_eigenvalues():
    np.testing.assert_allclose(symplectic_eigenvalues(np.eye(4)), [1.0, 1.0])
    np.testing.assert_allclose(symplectic_eigenvalues(tmsv_state(5.0).cov), [1.0, 1.0])
    np.testing.assert_allclose(symplectic_eigenvalues(thermal_state(1.5).cov), [4.0])
    with pytest.raises(InvalidStateError):
        symplectic_eigenvalues(0.5 * np.eye(2))


def test_entropies():
    nbar = 0.7
    np.testing.assert_allclose(gaussian_entropy(thermal_state(nbar).cov), g_function(nbar))
    np.testing.assert_allclose(g_function(0.0), 0.0)
    np.testing.assert_allclose(g_function(1.0), 2.0)
    np.testing.assert_allclose(gaussian_entropy(tmsv_state(3.0).cov), 0.0, atol=1e-10)


def test_rci_approaches_plob():
    eta = 0.5
    rci = gaussian_rci(_lossy_tmsv(1e3, eta), [0])
    np.testing.assert_allclose(rci, -np.log2(1 - eta), rtol=1e-2)
    assert rci < -np.log2(1 - eta)


def test_mutual_information_closed_forms():
    np.testing.assert_allclose(
        mutual_information((2.0, 2.0, 1.0), Measurement.HOMODYNE), 0.5 * np.log2(4.0 / 3.0)
    )
    np.testing.assert_allclose(
        mutual_information((2.0, 2.0, 1.0), Measurement.HETERODYNE), np.log2(9.0 / 8.0)
    )
    cov = np.block([[2.0 * np.eye(2), np.diag([1.0, -1.0])], [np.diag([1.0, -1.0]), 2 * np.eye(2)]])
    state = GaussianState.from_cov(cov)
    for measurement in Measurement:
        np.testing.assert_allclose(
            mutual_information(state, measurement),
            mutual_information((2.0, 2.0, 1.0), measurement),
        )
    sf = standard_form(state)
    np.testing.assert_allclose([sf.a, sf.b, sf.c], [2.0, 2.0, 1.0])


def test_holevo_and_key_rate():
    # lossless TMSV leaves Eve nothing
    np.testing.assert_allclose(holevo_bound(tmsv_state(3.0)), 0.0, atol=1e-9)

    state = _lossy_tmsv(5.0, 0.3)
    key = devetak_winter(KeyRateInputs(state, beta=1.0, measurement=Measurement.HOMODYNE))
    np.testing.assert_allclose(key.raw, key.mutual_information - key.holevo)
    assert key.clipped == max(key.raw, 0.0)
    assert key.holevo > 0.0

    lower = devetak_winter(KeyRateInputs(state, beta=0.95, measurement=Measurement.HOMODYNE))
    np.testing.assert_allclose(lower.raw, key.raw - 0.05 * key.mutual_information)

    half = key.scaled(0.5)
    np.testing.assert_allclose(half.raw, 0.5 * key.raw)
    assert half.probability == 0.5
    with pytest.raises(InvalidParameterError):
        KeyRateInputs(state, beta=1.2)


def test_entanglement_swap():
    np.testing.assert_allclose(swap_tmsv(1.0), 1.0)
    np.testing.assert_allclose(swap_tmsv(2.0), 1.25)
    for nu in (1.5, 3.0, 10.0):
        out = swap_tmsv_pipeline(nu)
        assert out.n_modes == 2
        np.testing.assert_allclose(np.diag(out.cov), swap_tmsv(nu), rtol=1e-12)
        np.testing.assert_allclose(symplectic_eigenvalues(out.cov), [1.0, 1.0], atol=1e-9)


def test_min_leakage_pipeline():
    res = min_leakage_pipeline(2.0, 0.3, 0.7, 0.01)
    np.testing.assert_allclose(res.state.cov, res.closed_form.cov, atol=1e-10)
    assert res.state.mode_labels == ("A1", "A2", "B")
    assert res.chi_eb > 0.0
    with pytest.raises(InvalidParameterError):
        min_leakage_pipeline(0.5, 0.3, 0.7, 0.01)


def test_channels():
    t, v_env = 0.4, 1.3
    xi = (1 - t) * (v_env - 1) / t
    thermal = thermal_loss(tmsv_state(3.0), 1, t, v_env)
    lossy = lossy_channel(tmsv_state(3.0), 1, t, xi)
    np.testing.assert_allclose(thermal.cov, lossy.cov, atol=1e-12)
    with pytest.raises(InvalidParameterError):
        thermal_loss(tmsv_state(3.0), 1, t, 0.5)


def test_calibrate_excess_noise():
    model = calibrate_excess_noise(0.01, 1e-3)
    np.testing.assert_allclose(model.excess_noise(1e-3), 0.01)
    assert model.env_variance > 1.0
    np.testing.assert_allclose(model.nbar, 0.5 * (model.env_variance - 1.0))
    with pytest.raises(InvalidParameterError):
        calibrate_excess_noise(0.01, 1.0)


if __name__ == "__main__":
    test_condition_heterodyne_matches_ancilla_construction()
