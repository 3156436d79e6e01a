"""Covariance-matrix formalism in hbar = 2 units.

Quadratures are q = a + a^dag and p = i(a^dag - a), ordered (q_1, p_1, q_2, p_2, ...), so the
vacuum covariance matrix is the identity.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import xlogy

from skcvr.errors import (
    InvalidParameterError,
    InvalidStateError,
    NumericalFailure,
    check_unit_interval,
)

logger = logging.getLogger(__name__)

SYMPLECTIC_TOL = 1e-8
UNPHYSICAL_TOL = 1e-6


class Measurement(Enum):
    HOMODYNE = "homodyne"
    HETERODYNE = "heterodyne"


def omega(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _mode_slice(mode: int) -> slice:
    return slice(2 * mode, 2 * mode + 2)


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray
    mode_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2 != 0:
            raise InvalidParameterError("covariance matrix has shape {}".format(cov.shape))
        if mean.shape != (cov.shape[0],):
            raise InvalidParameterError("mean has shape {}".format(mean.shape))
        labels = tuple(self.mode_labels)
        if len(labels) == 0:
            labels = tuple(str(i) for i in range(cov.shape[0] // 2))
        assert len(labels) == cov.shape[0] // 2
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mode_labels", labels)

    @classmethod
    def from_cov(cls, cov: np.ndarray, mode_labels: Sequence[str] = ()) -> "GaussianState":
        cov = np.asarray(cov, dtype=float)
        return cls(np.zeros(cov.shape[0]), cov, tuple(mode_labels))

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    def block(self, i: int, j: int) -> np.ndarray:
        return self.cov[_mode_slice(i), _mode_slice(j)]

    def reduced(self, modes: Sequence[int]) -> "GaussianState":
        idx = np.concatenate([np.arange(2 * m, 2 * m + 2) for m in modes])
        labels = tuple(self.mode_labels[m] for m in modes)
        return GaussianState(self.mean[idx], self.cov[np.ix_(idx, idx)], labels)

    def validate(self) -> None:
        if not np.allclose(self.cov, self.cov.T, atol=1e-10):
            raise InvalidStateError("covariance matrix is not symmetric")
        symplectic_eigenvalues(self.cov)

    def __add__(self, other: "GaussianState") -> "GaussianState":
        """direct sum of two independent states"""
        n = self.cov.shape[0]
        m = other.cov.shape[0]
        cov = np.zeros((n + m, n + m))
        cov[:n, :n] = self.cov
        cov[n:, n:] = other.cov
        mean = np.concatenate([self.mean, other.mean])
        return GaussianState(mean, cov, self.mode_labels + other.mode_labels)


def vacuum_state(n_modes: int = 1) -> GaussianState:
    return GaussianState.from_cov(np.eye(2 * n_modes))


def thermal_state(nbar: float) -> GaussianState:
    if nbar < 0.0:
        raise InvalidParameterError("nbar must be non-negative, got {}".format(nbar))
    return GaussianState.from_cov((2.0 * nbar + 1.0) * np.eye(2))


def coherent_state(alpha: complex) -> GaussianState:
    return GaussianState(np.array([2.0 * alpha.real, 2.0 * alpha.imag]), np.eye(2))


def tmsv_cov(nu: float) -> np.ndarray:
    """q-correlated and p-anticorrelated TMSV covariance matrix with variance nu"""
    if nu < 1.0:
        raise InvalidParameterError("nu must be >= 1, got {}".format(nu))
    c = np.sqrt(nu**2 - 1.0)
    z = np.diag([1.0, -1.0])
    return np.block([[nu * np.eye(2), c * z], [c * z, nu * np.eye(2)]])


def tmsv_state(nu: float) -> GaussianState:
    return GaussianState.from_cov(tmsv_cov(nu), ("A", "B"))


def nu_from_chi(chi: float) -> float:
    return (1.0 + chi**2) / (1.0 - chi**2)


class SymplecticTransform(ABC):
    @abstractmethod
    def modes(self) -> Tuple[int, ...]:
        ...

    @abstractmethod
    def local_matrix(self) -> np.ndarray:
        ...

    def matrix(self, n_modes: int) -> np.ndarray:
        modes = self.modes()
        for m in modes:
            if not 0 <= m < n_modes:
                raise InvalidParameterError(
                    "mode {} out of range for {} modes".format(m, n_modes)
                )
        if len(set(modes)) != len(modes):
            raise InvalidParameterError("modes must be distinct, got {}".format(modes))
        idx = np.concatenate([np.arange(2 * m, 2 * m + 2) for m in modes])
        s = np.eye(2 * n_modes)
        s[np.ix_(idx, idx)] = self.local_matrix()
        return s


@dataclass(frozen=True)
class Beamsplitter(SymplecticTransform):
    """a_i -> sqrt(T) a_i + sqrt(1 - T) a_j, a_j -> -sqrt(1 - T) a_i + sqrt(T) a_j"""

    i: int
    j: int
    transmissivity: float

    def modes(self) -> Tuple[int, ...]:
        return (self.i, self.j)

    def local_matrix(self) -> np.ndarray:
        check_unit_interval("transmissivity", self.transmissivity)
        c = np.sqrt(self.transmissivity)
        s = np.sqrt(1.0 - self.transmissivity)
        eye = np.eye(2)
        return np.block([[c * eye, s * eye], [-s * eye, c * eye]])


@dataclass(frozen=True)
class Squeeze(SymplecticTransform):
    mode: int
    r: float

    def modes(self) -> Tuple[int, ...]:
        return (self.mode,)

    def local_matrix(self) -> np.ndarray:
        return np.diag([np.exp(-self.r), np.exp(self.r)])


@dataclass(frozen=True)
class TwoModeSqueeze(SymplecticTransform):
    i: int
    j: int
    r: float

    def modes(self) -> Tuple[int, ...]:
        return (self.i, self.j)

    def local_matrix(self) -> np.ndarray:
        ch = np.cosh(self.r) * np.eye(2)
        sh = np.sinh(self.r) * np.diag([1.0, -1.0])
        return np.block([[ch, sh], [sh, ch]])


@dataclass(frozen=True)
class Phase(SymplecticTransform):
    mode: int
    phi: float

    def modes(self) -> Tuple[int, ...]:
        return (self.mode,)

    def local_matrix(self) -> np.ndarray:
        c, s = np.cos(self.phi), np.sin(self.phi)
        return np.array([[c, s], [-s, c]])


def symplectic_apply(
    state: GaussianState, transform: SymplecticTransform, check: bool = False
) -> GaussianState:
    s = transform.matrix(state.n_modes)
    if check or logger.isEnabledFor(logging.DEBUG):
        om = omega(state.n_modes)
        err = np.abs(s @ om @ s.T - om).max()
        logger.debug("symplectic residual of {}: {:.3e}".format(transform, err))
        if err > 1e-10:
            raise NumericalFailure("{} is not symplectic (residual {:.3e})".format(transform, err))
    return GaussianState(s @ state.mean, s @ state.cov @ s.T, state.mode_labels)


def lossy_channel(
    state: GaussianState, mode: int, transmissivity: float, excess_noise: float = 0.0
) -> GaussianState:
    """V -> T V + (1 - T) + T xi on one mode, correlations scaled by sqrt(T)"""
    check_unit_interval("transmissivity", transmissivity)
    return _apply_channel(
        state, mode, np.sqrt(transmissivity), 1.0 - transmissivity + transmissivity * excess_noise
    )


def thermal_loss(
    state: GaussianState, mode: int, transmissivity: float, env_variance: float = 1.0
) -> GaussianState:
    """beamsplitter coupling to a thermal environment of variance env_variance"""
    check_unit_interval("transmissivity", transmissivity)
    if env_variance < 1.0:
        raise InvalidParameterError("environment variance must be >= 1")
    return _apply_channel(
        state, mode, np.sqrt(transmissivity), (1.0 - transmissivity) * env_variance
    )


def _apply_channel(state: GaussianState, mode: int, x: float, y: float) -> GaussianState:
    if not 0 <= mode < state.n_modes:
        raise InvalidParameterError("mode {} out of range".format(mode))
    scale = np.ones(2 * state.n_modes)
    scale[_mode_slice(mode)] = x
    cov = state.cov * np.outer(scale, scale)
    cov[_mode_slice(mode), _mode_slice(mode)] += y * np.eye(2)
    return GaussianState(state.mean * scale, cov, state.mode_labels)


def _split(state: GaussianState, mode: int):
    if state.n_modes < 2:
        raise InvalidParameterError("conditioning needs at least two modes")
    if not 0 <= mode < state.n_modes:
        raise InvalidParameterError("mode {} out of range".format(mode))
    keep = [m for m in range(state.n_modes) if m != mode]
    idx_x = np.concatenate([np.arange(2 * m, 2 * m + 2) for m in keep])
    idx_y = np.arange(2 * mode, 2 * mode + 2)
    gx = state.cov[np.ix_(idx_x, idx_x)]
    gy = state.cov[np.ix_(idx_y, idx_y)]
    sigma = state.cov[np.ix_(idx_x, idx_y)]
    labels = tuple(state.mode_labels[m] for m in keep)
    return gx, gy, sigma, state.mean[idx_x], state.mean[idx_y], labels


def condition_homodyne(
    state: GaussianState, mode: int, quadrature: str = "q", outcome: float = 0.0
) -> GaussianState:
    """Gamma_X - sigma (Pi Gamma_Y Pi)^+ sigma^T; the measured mode is removed"""
    if quadrature not in ("q", "p"):
        raise InvalidParameterError("quadrature must be q or p, got {}".format(quadrature))
    k = 0 if quadrature == "q" else 1
    gx, gy, sigma, mx, my, labels = _split(state, mode)
    var = gy[k, k]
    if var <= 1e-15:
        # pseudoinverse of a vanishing block
        return GaussianState(mx, gx, labels)
    col = sigma[:, k]
    cov = gx - np.outer(col, col) / var
    mean = mx + col * (outcome - my[k]) / var
    return GaussianState(mean, cov, labels)


def condition_heterodyne(
    state: GaussianState, mode: int, outcome: Tuple[float, float] = (0.0, 0.0)
) -> GaussianState:
    """Gamma_X - sigma (Gamma_Y + 1)^-1 sigma^T; the measured mode is removed"""
    gx, gy, sigma, mx, my, labels = _split(state, mode)
    inv = np.linalg.inv(gy + np.eye(2))
    cov = gx - sigma @ inv @ sigma.T
    mean = mx + sigma @ inv @ (np.asarray(outcome, dtype=float) - my)
    return GaussianState(mean, cov, labels)


def condition(state: GaussianState, mode: int, measurement: Measurement) -> GaussianState:
    if measurement == Measurement.HOMODYNE:
        return condition_homodyne(state, mode, "q")
    return condition_heterodyne(state, mode)


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """|eig(i Omega V)| deduplicated, ascending, clamped to 1 within tolerance"""
    cov = np.asarray(cov, dtype=float)
    cov = 0.5 * (cov + cov.T)
    n = cov.shape[0] // 2
    eigvals = np.abs(np.linalg.eigvals(1j * omega(n) @ cov))
    nus = np.sort(eigvals)[::2]
    if nus.min() < 1.0 - UNPHYSICAL_TOL:
        raise InvalidStateError(
            "symplectic eigenvalue {:.6f} violates the uncertainty principle".format(nus.min())
        )
    if nus.min() < 1.0 - SYMPLECTIC_TOL:
        logger.debug("clamping symplectic eigenvalue {:.3e} to 1".format(nus.min()))
    return np.maximum(nus, 1.0)


def g_function(x: Union[float, np.ndarray]) -> np.ndarray:
    """G(x) = (x + 1) log2(x + 1) - x log2 x, the entropy of a thermal state of mean x"""
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return (xlogy(x + 1.0, x + 1.0) - xlogy(x, x)) / np.log(2.0)


def gaussian_entropy(cov: np.ndarray) -> float:
    nus = symplectic_eigenvalues(cov)
    return float(np.sum(g_function(0.5 * (nus - 1.0))))


def gaussian_rci(state: GaussianState, a_modes: Sequence[int]) -> float:
    """S(A) - S(AB) in bits"""
    return gaussian_entropy(state.reduced(a_modes).cov) - gaussian_entropy(state.cov)


def holevo_bound(
    state: GaussianState, bob_mode: int = -1, measurement: Measurement = Measurement.HOMODYNE
) -> float:
    """chi_EB = S(AB) - S(A|b) for reverse reconciliation on a pure purification"""
    if bob_mode < 0:
        bob_mode += state.n_modes
    conditional = condition(state, bob_mode, measurement)
    return gaussian_entropy(state.cov) - gaussian_entropy(conditional.cov)


@dataclass(frozen=True)
class StandardForm:
    a: float
    b: float
    c: float


def standard_form(state: GaussianState) -> StandardForm:
    """local-symplectic invariants of a two-mode state in the q-correlated convention

    Assumes C = diag(c, -c) up to local rotations, which holds for every protocol state here.
    """
    if state.n_modes != 2:
        raise InvalidParameterError("standard form needs a two-mode state")
    a = np.sqrt(np.linalg.det(state.block(0, 0)))
    b = np.sqrt(np.linalg.det(state.block(1, 1)))
    c = np.sqrt(abs(np.linalg.det(state.block(0, 1))))
    return StandardForm(float(a), float(b), float(c))


CMLike = Union[GaussianState, StandardForm, Tuple[float, float, float]]


def mutual_information(
    cm: CMLike, measurement: Measurement = Measurement.HETERODYNE, bob_mode: int = -1
) -> float:
    """Alice-Bob mutual information in bits

    A (a, b, c) triple (or StandardForm) uses the closed forms
    het: log2((1 + a) / (1 + a - c^2 / (1 + b))), hom: 1/2 log2(a / (a - c^2 / b)).
    A GaussianState is treated with Alice holding every mode except bob_mode.
    """
    if isinstance(cm, tuple):
        cm = StandardForm(*cm)
    if isinstance(cm, StandardForm):
        a, b, c = cm.a, cm.b, cm.c
        if measurement == Measurement.HETERODYNE:
            return float(np.log2((1.0 + a) / (1.0 + a - c**2 / (1.0 + b))))
        return float(0.5 * np.log2(a / (a - c**2 / b)))

    if bob_mode < 0:
        bob_mode += cm.n_modes
    gx, gy, sigma, _, _, _ = _split(cm, bob_mode)
    if measurement == Measurement.HETERODYNE:
        va = gx + np.eye(gx.shape[0])
        vcond = va - sigma @ np.linalg.inv(gy + np.eye(2)) @ sigma.T
        return float(0.5 * np.log2(np.linalg.det(va) / np.linalg.det(vcond)))
    if cm.n_modes != 2:
        raise InvalidParameterError("homodyne mutual information needs a single Alice mode")
    va = gx[0, 0]
    return float(0.5 * np.log2(va / (va - sigma[0, 0] ** 2 / gy[0, 0])))


def mutual_information_estimate(state: GaussianState) -> float:
    """heterodyne information from the (a, b, c) entries of a near-Gaussian two-mode state"""
    return mutual_information(standard_form(state), Measurement.HETERODYNE)


@dataclass
class KeyRateInputs:
    cm: GaussianState
    beta: float = 0.95
    measurement: Measurement = Measurement.HETERODYNE
    bob_mode: int = -1
    sifting_factor: float = 1.0  # 1/2 when both parties pick homodyne bases at random

    def __post_init__(self):
        check_unit_interval("beta", self.beta)
        check_unit_interval("sifting_factor", self.sifting_factor)


@dataclass
class KeyRateResult:
    raw: float
    clipped: float
    mutual_information: float
    holevo: float
    probability: float = 1.0

    def scaled(self, probability: float) -> "KeyRateResult":
        raw = self.raw * probability
        return KeyRateResult(raw, max(raw, 0.0), self.mutual_information, self.holevo, probability)


def devetak_winter(inputs: KeyRateInputs, mutual_info: Optional[float] = None) -> KeyRateResult:
    """reverse-reconciliation rate beta I_AB - chi_EB"""
    if mutual_info is None:
        mutual_info = mutual_information(inputs.cm, inputs.measurement, inputs.bob_mode)
    chi = holevo_bound(inputs.cm, inputs.bob_mode, inputs.measurement)
    raw = inputs.sifting_factor * (inputs.beta * mutual_info - chi)
    return KeyRateResult(raw, max(raw, 0.0), mutual_info, chi)


def swap_tmsv(nu: float) -> float:
    """variance after CV entanglement swapping of two TMSVs of variance nu"""
    if nu < 1.0:
        raise InvalidParameterError("nu must be >= 1, got {}".format(nu))
    return (nu**2 + 1.0) / (2.0 * nu)


def two_copy_swap(left: GaussianState, right: GaussianState) -> GaussianState:
    """dual-homodyne swap of the second mode of left with the first mode of right

    The inner modes meet on a balanced beamsplitter, then q is measured on one output and p on the
    other. The output holds the outer modes of left and right.
    """
    if left.n_modes != 2 or right.n_modes != 2:
        raise InvalidParameterError("two_copy_swap expects two-mode states")
    joint = left + right
    joint = symplectic_apply(joint, Beamsplitter(1, 2, 0.5))
    joint = condition_homodyne(joint, 2, "q")
    return condition_homodyne(joint, 1, "p")


def swap_tmsv_pipeline(nu: float) -> GaussianState:
    return two_copy_swap(tmsv_state(nu), tmsv_state(nu))


@dataclass
class MinLeakageResult:
    state: GaussianState
    chi_eb: float
    closed_form: GaussianState = field(repr=False)


def min_leakage_closed_form(mu: float, r: float, transmissivity: float, xi: float) -> GaussianState:
    t = transmissivity
    e2, e4 = np.exp(2 * r), np.exp(4 * r)
    root = np.sqrt(mu**2 - 1.0)
    a1 = (e4 * mu**2 + 1.0) / (mu * (e4 + 1.0))
    a2 = (mu**2 + e4) / (mu * (e4 + 1.0))
    b1 = (e4 - t + t * xi - t * e4 + t * xi * e4 + 2 * t * mu * e2 + 1.0) / (e4 + 1.0)
    b2 = t * xi - t + 0.5 * t * (mu * np.exp(-2 * r) + mu * e2) + 1.0
    c1 = e2 * (mu**2 - 1.0) / (mu * (e4 + 1.0))
    c2 = np.sqrt(2 * t) * np.exp(3 * r) * root / (e4 + 1.0)
    c3 = -np.sqrt(2 * t) * np.exp(r) * root / 2.0
    c4 = np.sqrt(2 * t) * np.exp(r) * root / (e4 + 1.0)
    c5 = -np.sqrt(2 * t) * np.exp(-r) * root / 2.0
    cov = np.array(
        [
            [a1, 0, c1, 0, c2, 0],
            [0, mu, 0, 0, 0, c3],
            [c1, 0, a2, 0, c4, 0],
            [0, 0, 0, mu, 0, c5],
            [c2, 0, c4, 0, b1, 0],
            [0, c3, 0, c5, 0, b2],
        ]
    )
    return GaussianState.from_cov(cov, ("A1", "A2", "B"))


def min_leakage_pipeline(mu: float, r: float, transmissivity: float, xi: float) -> MinLeakageResult:
    """heralded minimum-leakage state shared by Alice (A1, A2) and Bob (B)

    Two TMSVs of variance mu on (A1, B) and (A2, A3), squeezers r on B and -r on A3, a balanced
    beamsplitter on (B, A3), homodyne q on A3, then the channel (T, xi) on B. Eve's information
    uses a q-homodyne of B, the same quadrature as the herald.
    """
    if mu < 1.0:
        raise InvalidParameterError("mu must be >= 1, got {}".format(mu))
    r_mu = 0.5 * np.arccosh(mu)
    state = GaussianState.from_cov(np.eye(8), ("A1", "A2", "B", "A3"))
    for transform in (
        TwoModeSqueeze(0, 2, r_mu),
        TwoModeSqueeze(1, 3, r_mu),
        Squeeze(2, r),
        Squeeze(3, -r),
        Beamsplitter(2, 3, 0.5),
    ):
        state = symplectic_apply(state, transform)
    state = condition_homodyne(state, 3, "q")
    state = lossy_channel(state, 2, transmissivity, xi)
    chi_eb = holevo_bound(state, 2, Measurement.HOMODYNE)
    closed = min_leakage_closed_form(mu, r, transmissivity, xi)
    return MinLeakageResult(state, chi_eb, closed)


@dataclass(frozen=True)
class ExcessNoiseModel:
    """fixed thermal environment that shows excess noise xi at a reference transmissivity"""

    env_variance: float

    @property
    def nbar(self) -> float:
        return 0.5 * (self.env_variance - 1.0)

    def excess_noise(self, eta: float) -> float:
        """input-referred excess noise of a thermal-loss channel of transmissivity eta"""
        return (1.0 - eta) * (self.env_variance - 1.0) / eta


def calibrate_excess_noise(xi: float, reference_eta: float) -> ExcessNoiseModel:
    """solve (1 - eta) (V_env - 1) / eta = xi at eta = reference_eta"""
    check_unit_interval("reference_eta", reference_eta)
    if reference_eta in (0.0, 1.0):
        raise InvalidParameterError("reference transmissivity must be inside (0, 1)")
    env_variance = 1.0 + reference_eta * xi / (1.0 - reference_eta)
    logger.debug("calibrated environment variance {:.6e}".format(env_variance))
    return ExcessNoiseModel(env_variance)
